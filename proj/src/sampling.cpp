#include "aura/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <utility>

#include <json.hpp>

#include "aura/error.hpp"

namespace aura {

std::string_view to_string(SamplingMode mode) {
  switch (mode) {
    case SamplingMode::kHardness:
      return "hardness";
    case SamplingMode::kRanking:
      return "ranking";
    case SamplingMode::kRandom:
      return "random";
    case SamplingMode::kDiversity:
      return "diversity";
    case SamplingMode::kVariance:
      return "variance";
    case SamplingMode::kGlobalHardness:
      return "global_hardness";
  }
  return "?";
}

SamplingMode parse_sampling_mode(std::string_view name) {
  for (auto m : {SamplingMode::kHardness, SamplingMode::kRanking, SamplingMode::kRandom,
                 SamplingMode::kDiversity, SamplingMode::kVariance,
                 SamplingMode::kGlobalHardness}) {
    if (to_string(m) == name) return m;
  }
  if (name == "aura") return SamplingMode::kRanking;
  throw InvalidInput("unknown sampling mode \"" + std::string(name) + "\"");
}

bool is_stratified(SamplingMode mode) {
  return mode == SamplingMode::kHardness || mode == SamplingMode::kRanking ||
         mode == SamplingMode::kDiversity;
}

std::vector<std::size_t> SampleManifest::clip_indices() const {
  std::vector<std::size_t> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.clip_index);
  return out;
}

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidInput("epsilon must be > 0");
}

std::vector<double> normalized(std::vector<double> w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
  return w;
}

double population_variance(std::span<const double> row) {
  double mean = 0.0;
  for (double v : row) mean += v;
  mean /= static_cast<double>(row.size());
  double acc = 0.0;
  for (double v : row) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(row.size());
}

}  // namespace

std::vector<double> hardness_scores(std::span<const double> dmos_values, double epsilon) {
  check_epsilon(epsilon);
  if (dmos_values.empty()) throw InvalidInput("hardness weights need at least one value");
  const double top = *std::ranges::max_element(dmos_values);
  std::vector<double> w(dmos_values.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = top - dmos_values[i] + epsilon;
  return w;
}

std::vector<double> hardness_weights(std::span<const double> dmos_values, double epsilon) {
  return normalized(hardness_scores(dmos_values, epsilon));
}

std::vector<double> variance_scores(const Matrix& dmos_rows, double epsilon) {
  check_epsilon(epsilon);
  if (dmos_rows.cols() < 2) throw InvalidInput("variance weights need at least 2 models");
  std::vector<double> w(dmos_rows.rows());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = population_variance(dmos_rows.row(i)) + epsilon;
  return w;
}

std::vector<double> variance_weights(const Matrix& dmos_rows, double epsilon) {
  if (dmos_rows.rows() == 0) throw InvalidInput("variance weights need at least one clip");
  return normalized(variance_scores(dmos_rows, epsilon));
}

std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> weights,
                                                             std::size_t quota, Rng& rng) {
  if (quota > weights.size()) {
    throw InvalidInput("quota " + std::to_string(quota) + " exceeds population of " +
                       std::to_string(weights.size()));
  }
  // log(u)/w orders items exactly like u^(1/w) and stays finite for tiny w.
  std::vector<std::pair<double, std::size_t>> keys(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInput("sampling weights must be positive");
    keys[i] = {std::log(rng.uniform_open()) / w, i};
  }
  auto by_key = [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  };
  if (quota < keys.size()) {
    std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(quota), keys.end(),
                     by_key);
  }
  keys.resize(quota);
  std::sort(keys.begin(), keys.end(), by_key);
  std::vector<std::size_t> out(quota);
  for (std::size_t i = 0; i < quota; ++i) out[i] = keys[i].second;
  return out;
}

std::vector<std::size_t> allocate_quotas(std::span<const std::size_t> cluster_sizes,
                                         std::size_t budget) {
  const std::size_t k = cluster_sizes.size();
  if (k == 0) throw InvalidInput("no clusters to allocate over");
  const std::size_t total = std::accumulate(cluster_sizes.begin(), cluster_sizes.end(),
                                            std::size_t{0});
  if (budget > total) {
    throw InvalidInput("budget " + std::to_string(budget) + " exceeds collection size " +
                       std::to_string(total));
  }
  std::vector<std::size_t> by_size(k);
  std::iota(by_size.begin(), by_size.end(), 0);
  std::ranges::stable_sort(by_size, [&](std::size_t a, std::size_t b) {
    return cluster_sizes[a] > cluster_sizes[b];
  });

  std::vector<std::size_t> quota(k, budget / k);
  for (std::size_t i = 0; i < budget % k; ++i) ++quota[by_size[i]];

  while (true) {
    std::size_t deficit = 0;
    for (std::size_t c = 0; c < k; ++c) {
      if (quota[c] > cluster_sizes[c]) {
        deficit += quota[c] - cluster_sizes[c];
        quota[c] = cluster_sizes[c];
      }
    }
    if (deficit == 0) break;

    std::vector<std::size_t> open;
    std::size_t open_size = 0;
    for (auto c : by_size) {
      if (quota[c] < cluster_sizes[c]) {
        open.push_back(c);
        open_size += cluster_sizes[c];
      }
    }
    // Largest-remainder apportionment of the deficit by cluster size.
    std::vector<std::pair<std::size_t, std::size_t>> remainders;  // (remainder, cluster)
    std::size_t given = 0;
    for (auto c : open) {
      const std::size_t share = deficit * cluster_sizes[c];
      quota[c] += share / open_size;
      given += share / open_size;
      remainders.emplace_back(share % open_size, c);
    }
    std::ranges::stable_sort(remainders, [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; i < deficit - given; ++i) ++quota[remainders[i].second];
  }
  return quota;
}

Sampler::Sampler(const ClipCollection& collection, const ClusterModel* clusters, Channel channel,
                 double epsilon)
    : collection_(&collection), clusters_(clusters), channel_(channel), epsilon_(epsilon) {
  check_epsilon(epsilon);
  if (collection.empty()) throw InvalidInput("cannot sample from an empty collection");
  if (clusters_ && clusters_->assignments.size() != collection.size()) {
    throw InvalidInput("cluster model covers " + std::to_string(clusters_->assignments.size()) +
                       " clips but the collection has " + std::to_string(collection.size()));
  }
  dmos_ = dmos_matrix(collection, channel);
  const std::size_t n = collection.size();
  mean_dmos_.resize(n);
  variance_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = dmos_.row(i);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean_dmos_[i] = row.empty() ? 0.0 : mean / static_cast<double>(row.size());
    variance_[i] = row.empty() ? 0.0 : population_variance(row);
  }
  if (clusters_) members_ = clusters_->members();
}

std::uint32_t Sampler::cluster_of(std::size_t clip) const {
  return clusters_ ? clusters_->assignments[clip] : 0;
}

SampleManifest Sampler::draw(SamplingMode mode, std::size_t budget, std::uint64_t seed) const {
  if (budget == 0) throw InvalidInput("budget must be positive");
  if (budget > collection_->size()) {
    throw InvalidInput("budget " + std::to_string(budget) + " exceeds collection size " +
                       std::to_string(collection_->size()));
  }
  if ((mode == SamplingMode::kRanking || mode == SamplingMode::kVariance) && dmos_.cols() < 2) {
    throw InvalidInput("variance weighting needs at least 2 models");
  }
  if ((mode == SamplingMode::kHardness || mode == SamplingMode::kGlobalHardness) &&
      dmos_.cols() < 1) {
    throw InvalidInput("hardness weighting needs at least 1 model");
  }
  SampleManifest m = is_stratified(mode) ? stratified(mode, budget, seed) : global(mode, budget, seed);
  m.config = {budget, mode, channel_, seed, epsilon_};
  m.strategy_name = std::string(to_string(mode));
  m.k = clusters_ ? clusters_->k : 0;
  return m;
}

SampleManifest Sampler::stratified(SamplingMode mode, std::size_t budget, std::uint64_t seed) const {
  if (!clusters_) throw InvalidInput("stratified sampling needs a cluster model");
  std::vector<std::size_t> sizes(members_.size());
  for (std::size_t c = 0; c < sizes.size(); ++c) sizes[c] = members_[c].size();
  const auto quotas = allocate_quotas(sizes, budget);

  SampleManifest m;
  m.entries.reserve(budget);
  std::vector<double> values;
  std::vector<double> weights;
  for (std::size_t c = 0; c < members_.size(); ++c) {
    if (quotas[c] == 0) continue;
    const auto& mem = members_[c];
    weights.clear();
    switch (mode) {
      case SamplingMode::kHardness:
        values.clear();
        for (auto i : mem) values.push_back(mean_dmos_[i]);
        weights = hardness_scores(values, epsilon_);
        break;
      case SamplingMode::kRanking:
        for (auto i : mem) weights.push_back(variance_[i] + epsilon_);
        break;
      default:
        weights.assign(mem.size(), 1.0);
        break;
    }
    Rng rng(seed ^ static_cast<std::uint64_t>(c));
    for (auto pos : weighted_sample_without_replacement(weights, quotas[c], rng)) {
      const auto clip = mem[pos];
      m.entries.push_back({(*collection_)[clip].clip_id, clip, static_cast<std::uint32_t>(c),
                           weights[pos]});
    }
  }
  return m;
}

SampleManifest Sampler::global(SamplingMode mode, std::size_t budget, std::uint64_t seed) const {
  const std::size_t n = collection_->size();
  std::vector<double> weights;
  switch (mode) {
    case SamplingMode::kVariance:
      weights.resize(n);
      for (std::size_t i = 0; i < n; ++i) weights[i] = variance_[i] + epsilon_;
      break;
    case SamplingMode::kGlobalHardness:
      weights = hardness_scores(mean_dmos_, epsilon_);
      break;
    default:
      weights.assign(n, 1.0);
      break;
  }
  Rng rng(seed);
  SampleManifest m;
  m.entries.reserve(budget);
  for (auto clip : weighted_sample_without_replacement(weights, budget, rng)) {
    m.entries.push_back({(*collection_)[clip].clip_id, clip, cluster_of(clip), weights[clip]});
  }
  return m;
}

SampleManifest stratified_sample(const ClipCollection& collection, const ClusterModel& clusters,
                                 const SamplingConfig& config) {
  if (!is_stratified(config.mode)) {
    throw InvalidInput("stratified sampling supports hardness, ranking and diversity modes");
  }
  return Sampler(collection, &clusters, config.channel, config.epsilon)
      .draw(config.mode, config.budget, config.seed);
}

SampleManifest baseline_random(const ClipCollection& collection, std::size_t budget,
                               std::uint64_t seed) {
  return Sampler(collection, nullptr, Channel::kOvrl).draw(SamplingMode::kRandom, budget, seed);
}

SampleManifest baseline_variance(const ClipCollection& collection, std::size_t budget,
                                 Channel channel, std::uint64_t seed, double epsilon) {
  return Sampler(collection, nullptr, channel, epsilon).draw(SamplingMode::kVariance, budget, seed);
}

SampleManifest draw_sample(const ClipCollection& collection, const ClusterModel* clusters,
                           const SamplingConfig& config) {
  return Sampler(collection, clusters, config.channel, config.epsilon)
      .draw(config.mode, config.budget, config.seed);
}

void write_manifest(const std::filesystem::path& path, const SampleManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write sample manifest " + path.string());
  nlohmann::ordered_json header;
  header["strategy"] = manifest.strategy_name;
  header["mode"] = to_string(manifest.config.mode);
  header["seed"] = manifest.config.seed;
  header["budget"] = manifest.config.budget;
  header["k"] = manifest.k;
  header["channel"] = to_string(manifest.config.channel);
  header["epsilon"] = manifest.config.epsilon;
  out << header.dump() << '\n';
  for (const auto& e : manifest.entries) {
    nlohmann::ordered_json j;
    j["clip_id"] = e.clip_id;
    j["cluster"] = e.cluster;
    j["weight"] = e.weight;
    out << j.dump() << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

SampleManifest read_manifest(const std::filesystem::path& path, const ClipCollection& collection) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open sample manifest " + path.string());
  SampleManifest m;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto j = nlohmann::json::parse(line);
      if (!have_header) {
        m.strategy_name = j.at("strategy").get<std::string>();
        m.config.mode = parse_sampling_mode(j.at("mode").get<std::string>());
        m.config.seed = j.at("seed").get<std::uint64_t>();
        m.config.budget = j.at("budget").get<std::size_t>();
        m.k = j.at("k").get<std::size_t>();
        m.config.channel = parse_channel(j.at("channel").get<std::string>());
        m.config.epsilon = j.at("epsilon").get<double>();
        have_header = true;
        continue;
      }
      SampleEntry e;
      e.clip_id = j.at("clip_id").get<std::string>();
      const auto idx = collection.find(e.clip_id);
      if (!idx) {
        throw InvalidInput("sample manifest line " + std::to_string(line_no) +
                           ": unknown clip \"" + e.clip_id + "\"");
      }
      e.clip_index = *idx;
      e.cluster = j.at("cluster").get<std::uint32_t>();
      e.weight = j.at("weight").get<double>();
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("sample manifest line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!have_header) throw InvalidInput("sample manifest " + path.string() + " is empty");
  return m;
}

}  // namespace aura
