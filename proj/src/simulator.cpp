#include "aura/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "aura/error.hpp"
#include "aura/random.hpp"

namespace aura {
namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n, 0.5 * (lo + hi));
  if (n < 2) return out;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

std::size_t draw_component(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform(0.0, cumulative.back());
  const auto it = std::ranges::upper_bound(cumulative, u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               cumulative.size() - 1);
}

std::vector<double> cumulative_weights(const std::vector<double>& w, std::size_t k,
                                       const char* what) {
  std::vector<double> cum(k);
  double acc = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double v = w.empty() ? 1.0 : w[c];
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidInput(std::string(what) + " must be finite and non-negative");
    }
    acc += v;
    cum[c] = acc;
  }
  if (!(acc > 0.0)) throw InvalidInput(std::string(what) + " sum to zero");
  return cum;
}

std::string padded(const char* prefix, std::size_t i, int width) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

}  // namespace

WorkloadSpec default_workload_spec(std::uint64_t seed) {
  WorkloadSpec s;
  s.clean_component_weights = {0.5, 0.2, 0.12, 0.08, 0.04, 0.03, 0.02, 0.01};
  s.seed = seed;
  return s;
}

WorkloadSpec balanced_workload_spec(std::uint64_t seed) {
  WorkloadSpec s;
  s.clean_fraction = 0.0;
  // Two clearly harder noise types, the rest mild.
  s.cluster_difficulty = {-1.6, -1.2, -0.4, 0.0, 0.2, 0.4, 0.5, 0.6};
  s.seed = seed;
  return s;
}

WorkloadSpec resolve_spec(const WorkloadSpec& in) {
  WorkloadSpec s = in;
  if (s.n_clips == 0) throw InvalidInput("workload: n_clips must be positive");
  if (s.dim == 0) throw InvalidInput("workload: dim must be positive");
  if (s.k_true == 0) throw InvalidInput("workload: k_true must be >= 1");
  if (s.n_models == 0) throw InvalidInput("workload: n_models must be >= 1");
  if (!(s.component_std > 0.0)) throw InvalidInput("workload: component_std must be > 0");
  if (!(s.noise_std >= 0.0)) throw InvalidInput("workload: noise_std must be >= 0");
  if (!(s.clean_fraction >= 0.0 && s.clean_fraction < 1.0)) {
    throw InvalidInput("workload: clean_fraction must lie in [0, 1)");
  }
  if (!(s.clean_dmos_bound >= 0.0 && s.clean_dmos_bound <= 0.01)) {
    throw InvalidInput("workload: clean_dmos_bound must lie in [0, 0.01]");
  }
  if (s.component_means.empty()) {
    if (s.k_true > s.dim) {
      throw InvalidInput("workload: component_means must be given when k_true > dim");
    }
    const double offset = s.separation * s.component_std / std::sqrt(2.0);
    s.component_means.assign(s.k_true, std::vector<double>(s.dim, 0.0));
    for (std::size_t c = 0; c < s.k_true; ++c) s.component_means[c][c] = offset;
  }
  if (s.component_means.size() != s.k_true) {
    throw InvalidInput("workload: component_means needs k_true rows");
  }
  for (const auto& m : s.component_means) {
    if (m.size() != s.dim) throw InvalidInput("workload: component mean has wrong dimension");
  }
  if (s.model_quality.empty()) s.model_quality = linspace(-0.3, 0.3, s.n_models);
  if (s.model_quality.size() != s.n_models) {
    throw InvalidInput("workload: model_quality needs n_models values");
  }
  if (s.cluster_difficulty.empty()) s.cluster_difficulty = linspace(-0.8, 0.6, s.k_true);
  if (s.cluster_difficulty.size() != s.k_true) {
    throw InvalidInput("workload: cluster_difficulty needs k_true values");
  }
  for (const auto* w : {&s.noisy_component_weights, &s.clean_component_weights}) {
    if (!w->empty() && w->size() != s.k_true) {
      throw InvalidInput("workload: component weights need k_true values");
    }
  }
  if (s.channel_offsets.size() != 3) throw InvalidInput("workload: channel_offsets needs 3 values");
  return s;
}

double spec_separation(const WorkloadSpec& spec) {
  const WorkloadSpec s = resolve_spec(spec);
  if (s.k_true < 2) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < s.k_true; ++a) {
    for (std::size_t b = a + 1; b < s.k_true; ++b) {
      best = std::min(best, std::sqrt(squared_distance(s.component_means[a], s.component_means[b])));
    }
  }
  return best / s.component_std;
}

ClipCollection generate_workload(const WorkloadSpec& spec, WorkloadStats* stats) {
  const WorkloadSpec s = resolve_spec(spec);
  const auto noisy_cum = cumulative_weights(s.noisy_component_weights, s.k_true,
                                            "noisy_component_weights");
  const auto clean_cum = cumulative_weights(s.clean_component_weights, s.k_true,
                                            "clean_component_weights");

  std::vector<std::string> models;
  for (std::size_t j = 0; j < s.n_models; ++j) models.push_back(padded("model-", j, 2));

  WorkloadStats local;
  WorkloadStats& st = stats ? *stats : local;
  st = {};
  st.components.reserve(s.n_clips);
  st.clean.reserve(s.n_clips);

  constexpr double kBefore = 3.0;
  Rng rng(s.seed);
  std::vector<ClipRecord> records;
  records.reserve(s.n_clips);

  for (std::size_t i = 0; i < s.n_clips; ++i) {
    ClipRecord r;
    r.clip_id = padded("clip-", i, 6);
    const bool clean = s.clean_fraction > 0.0 && rng.uniform(0.0, 1.0) < s.clean_fraction;
    const std::size_t comp = draw_component(clean ? clean_cum : noisy_cum, rng);
    r.noise_label = "component-" + std::to_string(comp);
    r.embedding.resize(s.dim);
    for (std::size_t d = 0; d < s.dim; ++d) {
      r.embedding[d] = static_cast<float>(rng.normal(s.component_means[comp][d], s.component_std));
    }
    bool clamped = false;
    for (std::size_t j = 0; j < s.n_models; ++j) {
      double target[3];
      if (clean) {
        const double d = rng.uniform(-s.clean_dmos_bound, s.clean_dmos_bound);
        target[0] = target[1] = target[2] = d;
      } else {
        const double noise = s.noise_std > 0.0 ? rng.normal(0.0, s.noise_std) : 0.0;
        const double base = s.model_quality[j] + s.cluster_difficulty[comp] + noise;
        for (int c = 0; c < 3; ++c) target[c] = base + s.channel_offsets[c];
      }
      double after[3];
      for (int c = 0; c < 3; ++c) {
        after[c] = std::clamp(kBefore + target[c], kMosMin, kMosMax);
        if (after[c] != kBefore + target[c]) {
          clamped = true;
          ++st.clamp_events;
        }
      }
      MosPair p;
      p.before = {kBefore, kBefore, kBefore};
      p.after = {after[0], after[1], after[2]};
      r.scores.emplace(models[j], p);
    }
    if (clamped) st.clamped_clips.push_back(r.clip_id);
    st.components.push_back(static_cast<std::uint32_t>(comp));
    st.clean.push_back(clean);
    records.push_back(std::move(r));
  }
  return ClipCollection(s.dim, std::move(models), std::move(records));
}

WorkloadSpec workload_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidInput("workload spec must be a JSON object");
  WorkloadSpec s;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n_clips") s.n_clips = v.get<std::size_t>();
      else if (key == "dim") s.dim = v.get<std::size_t>();
      else if (key == "k_true") s.k_true = v.get<std::size_t>();
      else if (key == "component_means") s.component_means = v.get<std::vector<std::vector<double>>>();
      else if (key == "component_std") s.component_std = v.get<double>();
      else if (key == "separation") s.separation = v.get<double>();
      else if (key == "n_models") s.n_models = v.get<std::size_t>();
      else if (key == "model_quality") s.model_quality = v.get<std::vector<double>>();
      else if (key == "cluster_difficulty") s.cluster_difficulty = v.get<std::vector<double>>();
      else if (key == "noise_std") s.noise_std = v.get<double>();
      else if (key == "clean_fraction") s.clean_fraction = v.get<double>();
      else if (key == "noisy_component_weights") s.noisy_component_weights = v.get<std::vector<double>>();
      else if (key == "clean_component_weights") s.clean_component_weights = v.get<std::vector<double>>();
      else if (key == "clean_dmos_bound") s.clean_dmos_bound = v.get<double>();
      else if (key == "channel_offsets") s.channel_offsets = v.get<std::vector<double>>();
      else if (key == "seed") s.seed = v.get<std::uint64_t>();
      else throw InvalidInput("workload spec: unknown key \"" + key + "\"");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("workload spec: ") + e.what());
  }
  return s;
}

nlohmann::ordered_json workload_spec_to_json(const WorkloadSpec& s) {
  nlohmann::ordered_json j;
  j["n_clips"] = s.n_clips;
  j["dim"] = s.dim;
  j["k_true"] = s.k_true;
  j["component_means"] = s.component_means;
  j["component_std"] = s.component_std;
  j["separation"] = s.separation;
  j["n_models"] = s.n_models;
  j["model_quality"] = s.model_quality;
  j["cluster_difficulty"] = s.cluster_difficulty;
  j["noise_std"] = s.noise_std;
  j["clean_fraction"] = s.clean_fraction;
  j["noisy_component_weights"] = s.noisy_component_weights;
  j["clean_component_weights"] = s.clean_component_weights;
  j["clean_dmos_bound"] = s.clean_dmos_bound;
  j["channel_offsets"] = s.channel_offsets;
  j["seed"] = s.seed;
  return j;
}

}  // namespace aura
