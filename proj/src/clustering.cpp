#include "aura/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "aura/error.hpp"
#include "aura/random.hpp"
#include "binary_io.hpp"

namespace aura {

std::vector<std::size_t> ClusterModel::cluster_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignments) ++sizes[a];
  return sizes;
}

std::vector<std::vector<std::size_t>> ClusterModel::members() const {
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t i = 0; i < assignments.size(); ++i) out[assignments[i]].push_back(i);
  return out;
}

std::size_t nearest_centroid(const Matrix& centroids, std::span<const double> point) {
  const std::size_t dim = point.size();
  const double* x = point.data();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double* y = centroids.row(c).data();
    double acc = 0.0;
    std::size_t j = 0;
    // Partial sums only grow, so a block total >= best_d rules the centroid out.
    for (; j + 8 <= dim && acc < best_d; j += 8) {
      double block[8];
      for (int t = 0; t < 8; ++t) {
        const double d = x[j + t] - y[j + t];
        block[t] = d * d;
      }
      acc += ((block[0] + block[1]) + (block[2] + block[3])) +
             ((block[4] + block[5]) + (block[6] + block[7]));
    }
    if (acc >= best_d) continue;
    for (; j < dim; ++j) {
      const double d = x[j] - y[j];
      acc += d * d;
    }
    if (acc < best_d) {
      best_d = acc;
      best = c;
    }
  }
  return best;
}

std::size_t assign(const ClusterModel& model, std::span<const double> point) {
  if (point.size() != model.dim()) {
    throw InvalidInput("dimension mismatch: point has " + std::to_string(point.size()) +
                       " components, model expects " + std::to_string(model.dim()));
  }
  return nearest_centroid(model.centroids, point);
}

double inertia(const Matrix& points, const Matrix& centroids,
               std::span<const std::uint32_t> assignments) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    total += squared_distance(points.row(i), centroids.row(assignments[i]));
  }
  return total;
}

std::size_t default_local_trials(std::size_t k) {
  return 2 + static_cast<std::size_t>(std::floor(std::log(static_cast<double>(std::max<std::size_t>(k, 1)))));
}

Matrix kmeanspp_init(const Matrix& points, std::size_t k, std::uint64_t seed,
                     std::size_t local_trials) {
  const std::size_t n = points.rows();
  if (k == 0) throw InvalidInput("k must be at least 1");
  if (local_trials == 0) throw InvalidInput("local_trials must be at least 1");
  if (k > n) {
    throw InvalidInput("k = " + std::to_string(k) + " exceeds distinct-point count (only " +
                       std::to_string(n) + " points)");
  }
  Rng rng(seed);
  Matrix centroids(k, points.cols());
  auto place = [&](std::size_t c, std::size_t i) {
    std::ranges::copy(points.row(i), centroids.row(c).begin());
  };

  const std::size_t first = rng.below(n);
  place(0, first);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), points.row(first));

  std::vector<double> cumulative(n);
  std::vector<double> trial(n);
  std::vector<double> best_d2(n);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += d2[i];
      cumulative[i] = total;
    }
    if (!(total > 0.0)) {
      throw InvalidInput("k = " + std::to_string(k) + " exceeds distinct-point count (" +
                         std::to_string(c) + " distinct points)");
    }
    std::size_t best = n;
    double best_potential = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < local_trials; ++t) {
      const double target = rng.uniform_open() * total;
      // First index whose cumulative mass reaches the target; zero-mass
      // points (already chosen) can never be hit.
      auto it = std::lower_bound(cumulative.begin(), cumulative.end(), target);
      std::size_t pick = it == cumulative.end() ? n - 1 : static_cast<std::size_t>(it - cumulative.begin());
      while (d2[pick] <= 0.0 && pick + 1 < n) ++pick;
      while (d2[pick] <= 0.0 && pick > 0) --pick;
      if (local_trials == 1) {
        best = pick;
        break;
      }
      double potential = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = std::min(d2[i], squared_distance(points.row(i), points.row(pick)));
        potential += trial[i];
      }
      if (potential < best_potential) {
        best_potential = potential;
        best = pick;
        best_d2.swap(trial);
      }
    }
    place(c, best);
    if (local_trials == 1) {
      for (std::size_t i = 0; i < n; ++i) {
        d2[i] = std::min(d2[i], squared_distance(points.row(i), points.row(best)));
      }
    } else {
      d2.swap(best_d2);
    }
  }
  return centroids;
}

namespace {

void assign_all(const Matrix& points, const Matrix& centroids,
                std::vector<std::uint32_t>& assignments) {
  for (std::size_t i = 0; i < points.rows(); ++i) {
    assignments[i] = static_cast<std::uint32_t>(nearest_centroid(centroids, points.row(i)));
  }
}

// One pass of farthest-point seizure. Returns false if nothing was empty.
bool seize_for_empty(const Matrix& points, Matrix& centroids,
                     std::vector<std::uint32_t>& assignments) {
  const std::size_t k = centroids.rows();
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignments) ++sizes[a];
  bool repaired = false;
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] != 0) continue;
    std::size_t far = points.rows();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
      if (sizes[assignments[i]] < 2) continue;
      const double d = squared_distance(points.row(i), centroids.row(assignments[i]));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == points.rows()) throw Error("cannot repair empty cluster: too few points");
    --sizes[assignments[far]];
    assignments[far] = static_cast<std::uint32_t>(c);
    sizes[c] = 1;
    std::ranges::copy(points.row(far), centroids.row(c).begin());
    repaired = true;
  }
  return repaired;
}

// Re-runs assignment after each seizure so assignments stay nearest-centroid.
void ensure_nonempty(const Matrix& points, Matrix& centroids,
                     std::vector<std::uint32_t>& assignments) {
  const std::size_t max_passes = 2 * centroids.rows() + 2;
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    if (!seize_for_empty(points, centroids, assignments)) return;
    std::vector<std::uint32_t> next(assignments.size());
    assign_all(points, centroids, next);
    std::vector<std::size_t> sizes(centroids.rows(), 0);
    for (auto a : next) ++sizes[a];
    if (std::ranges::find(sizes, 0) != sizes.end()) {
      assignments = std::move(next);
      continue;
    }
    assignments = std::move(next);
    return;
  }
  // Pathological duplicates: keep the seized layout even if not strictly nearest.
  seize_for_empty(points, centroids, assignments);
}

Matrix cluster_means(const Matrix& points, const std::vector<std::uint32_t>& assignments,
                     std::size_t k) {
  Matrix sums(k, points.cols());
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto row = sums.row(assignments[i]);
    const auto p = points.row(i);
    for (std::size_t j = 0; j < p.size(); ++j) row[j] += p[j];
    ++counts[assignments[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    auto row = sums.row(c);
    for (double& v : row) v /= static_cast<double>(counts[c]);
  }
  return sums;
}

}  // namespace

ClusterModel lloyd(const Matrix& points, const Matrix& init_centroids, int max_iter, double tol) {
  if (max_iter < 1) throw InvalidInput("max_iter must be >= 1");
  if (!(tol >= 0.0)) throw InvalidInput("tol must be >= 0");
  const std::size_t k = init_centroids.rows();
  if (k == 0) throw InvalidInput("need at least one initial centroid");
  if (init_centroids.cols() != points.cols()) {
    throw InvalidInput("dimension mismatch between points and initial centroids");
  }
  if (k > points.rows()) throw InvalidInput("more centroids than points");

  ClusterModel model;
  model.k = k;
  model.centroids = init_centroids;
  model.assignments.assign(points.rows(), 0);
  assign_all(points, model.centroids, model.assignments);
  ensure_nonempty(points, model.centroids, model.assignments);

  for (int it = 1; it <= max_iter; ++it) {
    Matrix next = cluster_means(points, model.assignments, k);
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      shift = std::max(shift, std::sqrt(squared_distance(next.row(c), model.centroids.row(c))));
    }
    model.centroids = std::move(next);
    assign_all(points, model.centroids, model.assignments);
    ensure_nonempty(points, model.centroids, model.assignments);
    model.iterations_run = it;
    if (shift <= tol) break;
  }

  model.inertia = inertia(points, model.centroids, model.assignments);
  if (k >= 2) {
    try {
      model.db_index = davies_bouldin(points, model);
    } catch (const InvalidInput&) {
      model.db_index = std::numeric_limits<double>::infinity();
    }
  }
  return model;
}

double davies_bouldin(const Matrix& points, const ClusterModel& model) {
  const std::size_t k = model.k;
  if (k < 2) throw InvalidInput("Davies-Bouldin index needs k >= 2");
  if (model.assignments.size() != points.rows()) {
    throw InvalidInput("cluster model does not cover the point set");
  }
  std::vector<double> scatter(k, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto c = model.assignments[i];
    scatter[c] += std::sqrt(squared_distance(points.row(i), model.centroids.row(c)));
    ++counts[c];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) throw InvalidInput("empty cluster " + std::to_string(c));
    scatter[c] /= static_cast<double>(counts[c]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const double sep = std::sqrt(squared_distance(model.centroids.row(i), model.centroids.row(j)));
      if (sep == 0.0) throw InvalidInput("degenerate centroids");
      worst = std::max(worst, (scatter[i] + scatter[j]) / sep);
    }
    total += worst;
  }
  return total / static_cast<double>(k);
}

ClusterModel select_k(const Matrix& points, const SelectKOptions& options) {
  if (options.k_grid.empty()) throw InvalidInput("k grid is empty");
  if (options.restarts < 1) throw InvalidInput("restarts must be >= 1");
  std::vector<std::size_t> grid = options.k_grid;
  std::ranges::sort(grid);
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (auto k : grid) {
    if (k == 0 || k > points.rows()) {
      throw InvalidInput("invalid k = " + std::to_string(k) + " for " +
                         std::to_string(points.rows()) + " points");
    }
    if (k < 2 && grid.size() > 1) {
      throw InvalidInput("k = 1 has no Davies-Bouldin index; use it only as a singleton grid");
    }
  }

  ClusterModel chosen;
  bool have = false;
  for (auto k : grid) {
    ClusterModel best;
    bool have_best = false;
    for (int r = 0; r < options.restarts; ++r) {
      const auto seed = derive_seed(derive_seed(options.seed, k), static_cast<std::uint64_t>(r));
      const std::size_t trials =
          options.local_trials ? options.local_trials : default_local_trials(k);
      ClusterModel m =
          lloyd(points, kmeanspp_init(points, k, seed, trials), options.max_iter, options.tol);
      if (!have_best || m.inertia < best.inertia) {
        best = std::move(m);
        have_best = true;
      }
    }
    if (!have || best.db_index < chosen.db_index) {
      chosen = std::move(best);
      have = true;
    }
  }
  return chosen;
}

std::vector<std::size_t> desk_k_grid() {
  std::vector<std::size_t> grid(15);
  std::iota(grid.begin(), grid.end(), 2);
  return grid;
}

std::vector<std::size_t> target_scale_k_grid() { return {32, 64, 128, 192, 256, 320, 384, 512}; }

void write_cluster_model(const std::filesystem::path& path, const ClusterModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write cluster sidecar " + path.string());
  detail::write_header(out, kClusterMagic,
                       {static_cast<std::uint32_t>(model.k), static_cast<std::uint32_t>(model.dim())});
  for (double v : model.centroids.values()) detail::put_f64(out, v);
  detail::put_f64(out, model.db_index);
  detail::put_u32(out, static_cast<std::uint32_t>(model.iterations_run));
  detail::put_f64(out, model.inertia);
  detail::put_u32(out, static_cast<std::uint32_t>(model.assignments.size()));
  for (auto a : model.assignments) detail::put_u32(out, a);
  if (!out) throw Error("write failed for " + path.string());
}

ClusterModel read_cluster_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open cluster sidecar " + path.string());
  const auto h = detail::read_header(in, kClusterMagic);
  if (h.count == 0 || h.dim == 0) throw InvalidInput("cluster sidecar declares k or dim of 0");
  ClusterModel m;
  m.k = h.count;
  m.centroids = Matrix(h.count, h.dim);
  for (double& v : m.centroids.values()) v = detail::get_f64(in, "centroids");
  m.db_index = detail::get_f64(in, "db_index");
  m.iterations_run = static_cast<int>(detail::get_u32(in, "iterations"));
  m.inertia = detail::get_f64(in, "inertia");
  const auto n = detail::get_u32(in, "assignment count");
  m.assignments.resize(n);
  for (auto& a : m.assignments) {
    a = detail::get_u32(in, "assignments");
    if (a >= m.k) throw InvalidInput("cluster sidecar assignment out of range");
  }
  return m;
}

nlohmann::ordered_json cluster_summary(const ClusterModel& model) {
  nlohmann::ordered_json j;
  j["k"] = model.k;
  j["dim"] = model.dim();
  j["db_index"] = std::isfinite(model.db_index) ? nlohmann::ordered_json(model.db_index)
                                                : nlohmann::ordered_json(nullptr);
  j["iterations_run"] = model.iterations_run;
  j["inertia"] = model.inertia;
  j["cluster_sizes"] = model.cluster_sizes();
  return j;
}

}  // namespace aura
