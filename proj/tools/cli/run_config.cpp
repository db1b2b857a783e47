#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "aura/error.hpp"

namespace aura::cli {

std::size_t RunConfig::resolve_budget(std::size_t n) const {
  if (budget) return *budget;
  if (budget_fraction) {
    if (!(*budget_fraction > 0.0 && *budget_fraction <= 1.0)) {
      throw InvalidInput("budget_fraction must lie in (0, 1]");
    }
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(*budget_fraction * n)));
  }
  throw InvalidInput("no sampling budget configured (set budget or budget_fraction)");
}

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw InvalidInput("a seed is required (--seed or \"seed\" in the config)");
  return *seed;
}

std::set<std::string> read_label_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open baseline label file " + path.string());
  std::set<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    labels.insert(line.substr(first, last - first + 1));
  }
  return labels;
}

std::vector<std::size_t> parse_k_grid(const std::string& text) {
  std::vector<std::size_t> grid;
  std::stringstream ss(text);
  std::string part;
  try {
    while (std::getline(ss, part, ',')) {
      if (part.empty()) continue;
      const auto dash = part.find('-');
      if (dash == std::string::npos) {
        grid.push_back(std::stoul(part));
      } else {
        const auto lo = std::stoul(part.substr(0, dash));
        const auto hi = std::stoul(part.substr(dash + 1));
        if (hi < lo) throw InvalidInput("bad k range \"" + part + "\"");
        for (auto k = lo; k <= hi; ++k) grid.push_back(k);
      }
    }
  } catch (const std::logic_error&) {
    throw InvalidInput("cannot parse k grid \"" + text + "\"");
  }
  if (grid.empty()) throw InvalidInput("empty k grid");
  return grid;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidInput("config: unknown key \"" + key + "\" in " + where);
  }
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  RunConfig c;
  try {
    check_keys(j,
               {"manifest", "embeddings", "output_dir", "clusters", "sample", "workload", "seed",
                "clustering", "sampling", "metrics", "experiment"},
               "top level");
    if (j.contains("manifest")) c.manifest = resolve(base_dir, j["manifest"].get<std::string>());
    if (j.contains("embeddings")) c.embeddings = resolve(base_dir, j["embeddings"].get<std::string>());
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
    if (j.contains("clusters")) c.clusters = resolve(base_dir, j["clusters"].get<std::string>());
    if (j.contains("sample")) c.sample = resolve(base_dir, j["sample"].get<std::string>());
    if (j.contains("workload")) c.workload = workload_spec_from_json(j["workload"]);
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();

    if (j.contains("clustering")) {
      const auto& s = j["clustering"];
      check_keys(s, {"k_grid", "restarts", "max_iter", "tol"}, "clustering");
      if (s.contains("k_grid")) {
        c.k_grid = s["k_grid"].is_string() ? parse_k_grid(s["k_grid"].get<std::string>())
                                           : s["k_grid"].get<std::vector<std::size_t>>();
      }
      if (s.contains("restarts")) c.restarts = s["restarts"].get<int>();
      if (s.contains("max_iter")) c.max_iter = s["max_iter"].get<int>();
      if (s.contains("tol")) c.tol = s["tol"].get<double>();
    }
    if (j.contains("sampling")) {
      const auto& s = j["sampling"];
      check_keys(s, {"mode", "budget", "budget_fraction", "channel", "epsilon"}, "sampling");
      if (s.contains("mode")) c.mode = parse_sampling_mode(s["mode"].get<std::string>());
      if (s.contains("budget")) c.budget = s["budget"].get<std::size_t>();
      if (s.contains("budget_fraction")) c.budget_fraction = s["budget_fraction"].get<double>();
      if (s.contains("channel")) c.channel = parse_channel(s["channel"].get<std::string>());
      if (s.contains("epsilon")) c.epsilon = s["epsilon"].get<double>();
    }
    if (j.contains("metrics")) {
      const auto& s = j["metrics"];
      check_keys(s, {"rounds", "baseline_labels", "top_n"}, "metrics");
      if (s.contains("rounds")) c.rounds = s["rounds"].get<int>();
      if (s.contains("top_n")) c.top_n = s["top_n"].get<std::size_t>();
      if (s.contains("baseline_labels")) {
        const auto& b = s["baseline_labels"];
        if (b.is_string()) {
          c.baseline_labels = read_label_file(resolve(base_dir, b.get<std::string>()));
        } else {
          const auto v = b.get<std::vector<std::string>>();
          c.baseline_labels = {v.begin(), v.end()};
        }
      }
    }
    if (j.contains("experiment")) {
      const auto& s = j["experiment"];
      check_keys(s, {"strategies", "budgets", "budget_fractions", "channels"}, "experiment");
      ExperimentSection e;
      if (s.contains("strategies")) {
        e.strategies.clear();
        for (const auto& name : s["strategies"]) e.strategies.push_back(parse_strategy(name.get<std::string>()));
      }
      if (s.contains("budgets")) e.budgets = s["budgets"].get<std::vector<std::size_t>>();
      if (s.contains("budget_fractions")) {
        e.budget_fractions = s["budget_fractions"].get<std::vector<double>>();
      }
      if (s.contains("channels")) {
        e.channels.clear();
        for (const auto& name : s["channels"]) e.channels.push_back(parse_channel(name.get<std::string>()));
      }
      c.experiment = std::move(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput("config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

}  // namespace aura::cli
