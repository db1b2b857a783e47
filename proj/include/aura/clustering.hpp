#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "aura/matrix.hpp"

namespace aura {

/// Result of a k-means run. Assignments index the nearest centroid (lowest
/// index on ties) and no cluster is empty.
struct ClusterModel {
  std::size_t k = 0;
  Matrix centroids;                       // k x dim
  std::vector<std::uint32_t> assignments;  // one per point
  double db_index = 0.0;                   // 0 for k == 1, +inf for coincident centroids
  int iterations_run = 0;
  double inertia = 0.0;  // within-cluster sum of squared distances

  std::size_t dim() const { return centroids.cols(); }
  std::vector<std::size_t> cluster_sizes() const;
  /// Point indices grouped by cluster, ascending within each cluster.
  std::vector<std::vector<std::size_t>> members() const;

  friend bool operator==(const ClusterModel&, const ClusterModel&) = default;
};

/// k-means++ seeding: first centroid uniform, the rest drawn with probability
/// proportional to squared distance from the nearest chosen centroid.
///
/// With local_trials > 1 each step draws that many D^2-weighted candidates
/// and keeps the one that minimizes the total squared distance (greedy
/// k-means++). local_trials == 1 is the plain scheme.
Matrix kmeanspp_init(const Matrix& points, std::size_t k, std::uint64_t seed,
                     std::size_t local_trials = 1);

/// 2 + floor(ln k), the usual greedy k-means++ candidate count.
std::size_t default_local_trials(std::size_t k);

/// Lloyd refinement from the given centroids. Stops when the largest centroid
/// shift is <= tol or after max_iter rounds. Empty clusters seize the point
/// farthest from its current centroid.
ClusterModel lloyd(const Matrix& points, const Matrix& init_centroids, int max_iter, double tol);

double davies_bouldin(const Matrix& points, const ClusterModel& model);

/// Index of the nearest centroid, ties to the lowest index.
std::size_t assign(const ClusterModel& model, std::span<const double> point);
std::size_t nearest_centroid(const Matrix& centroids, std::span<const double> point);

double inertia(const Matrix& points, const Matrix& centroids,
               std::span<const std::uint32_t> assignments);

struct SelectKOptions {
  std::vector<std::size_t> k_grid;
  std::uint64_t seed = 0;
  int restarts = 3;
  int max_iter = 100;
  double tol = 1e-4;
  /// Seeding candidates per step: 1 is plain k-means++, 0 selects
  /// default_local_trials(k) (greedy).
  std::size_t local_trials = 1;
};

/// For every k in the grid keeps the lowest-inertia run out of `restarts`
/// seeded k-means++/Lloyd runs, then returns the model with the lowest
/// Davies-Bouldin index (ties to the smaller k).
ClusterModel select_k(const Matrix& points, const SelectKOptions& options);

/// Grid used at desk scale: 2..16.
std::vector<std::size_t> desk_k_grid();
/// Grid used for million-clip workloads; includes 256.
std::vector<std::size_t> target_scale_k_grid();

// Sidecar: "AURACLU1", u32 k, u32 dim, k*dim f64 centroids, f64 db_index,
// u32 iterations, f64 inertia, u32 n, n u32 assignments. Little-endian.
inline constexpr std::string_view kClusterMagic = "AURACLU1";

void write_cluster_model(const std::filesystem::path& path, const ClusterModel& model);
ClusterModel read_cluster_model(const std::filesystem::path& path);
nlohmann::ordered_json cluster_summary(const ClusterModel& model);

}  // namespace aura
