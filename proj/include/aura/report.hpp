#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "aura/clustering.hpp"
#include "aura/dataset.hpp"
#include "aura/metrics.hpp"
#include "aura/sampling.hpp"

namespace aura {

/// Quality summary of one sample: difficulty, coverage, OOD share and how
/// well it reproduces the full-data model ranking.
struct SampleReport {
  std::string strategy;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  Channel channel = Channel::kOvrl;
  MeanDmosReport difficulty;
  std::optional<DiversityReport> diversity;  // needs k >= 2
  std::optional<OodSummary> ood;             // absent when no sampled clip is labeled
  CategoryReport categories;
  ModelRanking full_ranking;
  ModelRanking sample_ranking;
  std::optional<double> ranking_srcc;  // absent when the sample ranking is constant
  std::optional<RankingFidelity> fidelity;

  nlohmann::ordered_json to_json() const;
  /// Table-1 style row plus ranking and category tables.
  std::string to_text() const;
};

struct SampleReportOptions {
  Channel channel = Channel::kOvrl;
  std::set<std::string> baseline_labels;
  std::size_t top_n = 10;
  int bootstrap_rounds = 0;  // 0 skips the bootstrap
};

SampleReport build_sample_report(const ClipCollection& collection, const ClusterModel* clusters,
                                 const SampleManifest& manifest,
                                 const SampleReportOptions& options);

}  // namespace aura
