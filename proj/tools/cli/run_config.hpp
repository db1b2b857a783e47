#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "aura/clustering.hpp"
#include "aura/dataset.hpp"
#include "aura/sampling.hpp"
#include "aura/simulator.hpp"

namespace aura::cli {

struct ExperimentSection {
  std::vector<Strategy> strategies = {Strategy::kRandom, Strategy::kDiversity, Strategy::kVariance,
                                      Strategy::kAura};
  std::vector<std::size_t> budgets;
  std::vector<double> budget_fractions;
  std::vector<Channel> channels = {Channel::kOvrl};
};

/// Everything a command may need. Loaded from a JSON config file; command
/// line flags override individual fields afterwards. Relative paths in the
/// file resolve against the file's directory.
struct RunConfig {
  std::filesystem::path manifest;
  std::filesystem::path embeddings;
  std::filesystem::path output_dir;
  std::filesystem::path clusters;  // existing sidecar, for sample/report
  std::filesystem::path sample;    // existing sample manifest, for rank/report
  std::optional<WorkloadSpec> workload;
  std::optional<std::uint64_t> seed;

  std::vector<std::size_t> k_grid = desk_k_grid();
  int restarts = 3;
  int max_iter = 100;
  double tol = 1e-4;

  std::optional<std::size_t> budget;
  std::optional<double> budget_fraction;
  SamplingMode mode = SamplingMode::kHardness;
  Channel channel = Channel::kOvrl;
  double epsilon = kDefaultEpsilon;

  int rounds = 200;
  std::set<std::string> baseline_labels;
  std::size_t top_n = 10;

  std::optional<ExperimentSection> experiment;

  /// Budget in clips for a collection of n clips.
  std::size_t resolve_budget(std::size_t n) const;
  std::uint64_t require_seed() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Baseline label file: one category per line, blank lines and '#' comments ignored.
std::set<std::string> read_label_file(const std::filesystem::path& path);

/// "2,3,8" or "2-16" or a mix ("2-4,8").
std::vector<std::size_t> parse_k_grid(const std::string& text);

}  // namespace aura::cli
