#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "aura/clustering.hpp"
#include "aura/dataset.hpp"
#include "aura/metrics.hpp"
#include "aura/sampling.hpp"

namespace aura {

/// Synthetic workload with planted ground truth. Embeddings come from a
/// Gaussian mixture; clip i under model j gets
///   DMOS = model_quality[j] + cluster_difficulty[component(i)] + N(0, noise_std)
/// unless the clip is clean speech, in which case |DMOS| <= clean_dmos_bound.
struct WorkloadSpec {
  std::size_t n_clips = 20000;
  std::size_t dim = 32;
  std::size_t k_true = 8;
  std::vector<std::vector<double>> component_means;  // empty: axis-aligned, `separation` apart
  double component_std = 1.0;
  double separation = 10.0;  // in units of component_std, used when means are generated
  std::size_t n_models = 28;
  std::vector<double> model_quality;       // empty: evenly spaced in [-0.3, 0.3]
  std::vector<double> cluster_difficulty;  // empty: evenly spaced in [-0.8, 0.6]
  double noise_std = 0.6;
  double clean_fraction = 10.0 / 11.0;
  /// Mixture weights for noisy clips (empty: uniform) and clean clips
  /// (empty: uniform).
  std::vector<double> noisy_component_weights;
  std::vector<double> clean_component_weights;
  double clean_dmos_bound = 0.005;
  /// Added to the base DMOS per channel (sig, bak, ovrl) for noisy clips.
  std::vector<double> channel_offsets = {0.0, 0.0, 0.0};
  std::uint64_t seed = 0;
};

/// Desk-scale default: 20k clips, dim 32, 8 components, 28 models, clean
/// fraction 10/11 with clean speech concentrated in a few components.
WorkloadSpec default_workload_spec(std::uint64_t seed);
/// Equal-size components, no clean speech, two markedly harder components.
WorkloadSpec balanced_workload_spec(std::uint64_t seed);

/// Fills in generated defaults and checks invariants; throws InvalidInput.
WorkloadSpec resolve_spec(const WorkloadSpec& spec);

/// min pairwise distance between component means / component_std.
double spec_separation(const WorkloadSpec& spec);

struct WorkloadStats {
  std::vector<std::uint32_t> components;  // true component per clip
  std::vector<bool> clean;
  std::size_t clamp_events = 0;
  std::vector<std::string> clamped_clips;
};

ClipCollection generate_workload(const WorkloadSpec& spec, WorkloadStats* stats = nullptr);

WorkloadSpec workload_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json workload_spec_to_json(const WorkloadSpec& spec);

// --- strategy comparison -----------------------------------------------------

enum class Strategy { kRandom, kDiversity, kVariance, kAura };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);
SamplingMode strategy_mode(Strategy s);

struct ExperimentConfig {
  std::vector<Strategy> strategies = {Strategy::kRandom, Strategy::kDiversity, Strategy::kVariance,
                                      Strategy::kAura};
  std::vector<std::size_t> budgets;
  int rounds = 200;
  std::vector<Channel> channels = {Channel::kOvrl};
  std::uint64_t seed = 0;
  double epsilon = kDefaultEpsilon;
  std::set<std::string> baseline_labels;
};

struct ExperimentRow {
  Strategy strategy = Strategy::kRandom;
  std::size_t budget = 0;
  std::vector<Channel> channels;
  std::vector<RankingFidelity> fidelity;  // parallel to channels
  DiversityReport diversity;              // cluster counts pooled over rounds
  OodSummary ood;                         // pooled over rounds
  MeanDmosReport difficulty;              // pooled over rounds
};

struct ExperimentReport {
  std::size_t n_clips = 0;
  std::size_t k = 0;
  int rounds = 0;
  std::vector<ExperimentRow> rows;

  const ExperimentRow& row(Strategy s, std::size_t budget) const;
  nlohmann::ordered_json to_json() const;
  /// Aligned-column table: one line per (strategy, budget).
  std::string to_text() const;
};

ExperimentReport run_experiment(const ClipCollection& collection, const ClusterModel& clusters,
                                const ExperimentConfig& config);

}  // namespace aura
