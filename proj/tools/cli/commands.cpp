#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "aura/aura.hpp"
#include "run_config.hpp"

namespace aura::cli {
namespace fs = std::filesystem;

namespace {

/// Raised when a pipeline stage fails; carries the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::exception& cause, bool invalid)
      : std::runtime_error("stage " + stage + ": " + cause.what()), invalid_(invalid) {}
  bool invalid() const { return invalid_; }

 private:
  bool invalid_;
};

// Flags shared by every subcommand. Values apply on top of --config.
struct CommonFlags {
  std::string config;
  std::string manifest;
  std::string embeddings;
  std::string output_dir;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "JSON run configuration");
    app->add_option("--manifest", manifest, "JSON-lines clip manifest");
    app->add_option("--embeddings", embeddings, "AURAEMB1 embedding file");
    app->add_option("--output-dir", output_dir, "Directory for written artifacts");
    seed_opt = app->add_option("--seed", seed, "Random seed (required for randomized commands)");
  }

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : load_run_config(config);
    if (!manifest.empty()) c.manifest = manifest;
    if (!embeddings.empty()) c.embeddings = embeddings;
    if (!output_dir.empty()) c.output_dir = output_dir;
    if (seed_opt && seed_opt->count() > 0) c.seed = seed;
    return c;
  }
};

ClipCollection load_inputs(const RunConfig& c, std::optional<std::size_t> expected_dim = {}) {
  if (c.manifest.empty() || c.embeddings.empty()) {
    throw InvalidInput("both --manifest and --embeddings are required");
  }
  return load_collection(c.manifest, c.embeddings, {expected_dim});
}

fs::path require_output_dir(const RunConfig& c) {
  if (c.output_dir.empty()) throw InvalidInput("--output-dir is required");
  fs::create_directories(c.output_dir);
  return c.output_dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

std::size_t labeled_count(const ClipCollection& c) {
  return static_cast<std::size_t>(std::ranges::count_if(
      c.records(), [](const ClipRecord& r) { return r.noise_label.has_value(); }));
}

int cmd_ingest(const RunConfig& c, std::optional<std::size_t> dim, std::ostream& out) {
  const ClipCollection coll = load_inputs(c, dim);
  out << coll.size() << " clips, dim " << coll.dim() << ", " << coll.model_ids().size()
      << " models, " << labeled_count(coll) << "/" << coll.size() << " labeled\n";
  if (!c.output_dir.empty()) {
    const auto dir = require_output_dir(c);
    write_collection(coll, dir / "manifest.jsonl", dir / "embeddings.bin");
    out << "wrote " << (dir / "manifest.jsonl").string() << " and "
        << (dir / "embeddings.bin").string() << "\n";
  }
  return kExitOk;
}

SelectKOptions clustering_options(const RunConfig& c) {
  return {c.k_grid, c.require_seed(), c.restarts, c.max_iter, c.tol};
}

int cmd_cluster(const RunConfig& c, std::ostream& out) {
  const auto options = clustering_options(c);
  const ClipCollection coll = load_inputs(c);
  const ClusterModel model = select_k(coll.points(), options);
  const auto dir = require_output_dir(c);
  write_cluster_model(dir / "cluster.bin", model);
  write_text(dir / "cluster.json", dump(cluster_summary(model)));
  out << "k = " << model.k << ", Davies-Bouldin " << model.db_index << ", " << model.iterations_run
      << " iterations\n";
  return kExitOk;
}

int cmd_sample(const RunConfig& c, const std::string& out_path, std::ostream& out) {
  const auto seed = c.require_seed();
  const ClipCollection coll = load_inputs(c);
  const std::size_t budget = c.resolve_budget(coll.size());
  if (budget == 0 || budget > coll.size()) {
    throw InvalidInput("budget " + std::to_string(budget) + " outside [1, " +
                       std::to_string(coll.size()) + "]");
  }
  std::optional<ClusterModel> clusters;
  if (!c.clusters.empty()) clusters = read_cluster_model(c.clusters);
  if (is_stratified(c.mode) && !clusters) {
    throw InvalidInput("mode " + std::string(to_string(c.mode)) + " needs --clusters");
  }
  const SampleManifest m = draw_sample(coll, clusters ? &*clusters : nullptr,
                                       {budget, c.mode, c.channel, seed, c.epsilon});
  fs::path path = out_path;
  if (path.empty()) path = require_output_dir(c) / "sample.jsonl";
  write_manifest(path, m);
  out << "sampled " << m.entries.size() << " clips (" << m.strategy_name << ") -> "
      << path.string() << "\n";
  return kExitOk;
}

int cmd_rank(const RunConfig& c, bool as_json, std::ostream& out) {
  const ClipCollection coll = load_inputs(c);
  const ModelRanking full = rank_models(coll, c.channel);
  std::optional<ModelRanking> sample;
  if (!c.sample.empty()) {
    const SampleManifest m = read_manifest(c.sample, coll);
    sample = rank_models(coll, c.channel, m.clip_indices());
  }
  if (as_json) {
    nlohmann::ordered_json j;
    j["channel"] = to_string(c.channel);
    auto& models = j["models"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < full.model_ids.size(); ++i) {
      nlohmann::ordered_json row{{"model_id", full.model_ids[i]},
                                 {"mean_dmos", full.mean_dmos[i]},
                                 {"rank", full.ranks[i]}};
      if (sample) {
        row["sample_mean_dmos"] = sample->mean_dmos[i];
        row["sample_rank"] = sample->ranks[i];
      }
      models.push_back(std::move(row));
    }
    if (sample && full.ranks.size() >= 2) j["srcc"] = srcc(sample->ranks, full.ranks);
    out << dump(j);
    return kExitOk;
  }
  char buf[160];
  out << "model                 mean DMOS (" << to_string(c.channel) << ")   rank"
      << (sample ? "   sample mean   sample rank" : "") << "\n";
  for (std::size_t i = 0; i < full.model_ids.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%-20s %+14.4f %7.1f", full.model_ids[i].c_str(),
                  full.mean_dmos[i], full.ranks[i]);
    out << buf;
    if (sample) {
      std::snprintf(buf, sizeof buf, " %+13.4f %13.1f", sample->mean_dmos[i], sample->ranks[i]);
      out << buf;
    }
    out << "\n";
  }
  if (sample && full.ranks.size() >= 2) out << "SRCC: " << srcc(sample->ranks, full.ranks) << "\n";
  return kExitOk;
}

int cmd_report(const RunConfig& c, int rounds, std::ostream& out) {
  const ClipCollection coll = load_inputs(c);
  if (c.sample.empty()) throw InvalidInput("--sample is required");
  const SampleManifest m = read_manifest(c.sample, coll);
  std::optional<ClusterModel> clusters;
  if (!c.clusters.empty()) clusters = read_cluster_model(c.clusters);
  const SampleReport r = build_sample_report(coll, clusters ? &*clusters : nullptr, m,
                                             {c.channel, c.baseline_labels, c.top_n, rounds});
  if (c.output_dir.empty()) {
    out << r.to_text();
    return kExitOk;
  }
  const auto dir = require_output_dir(c);
  write_text(dir / "report.json", dump(r.to_json()));
  write_text(dir / "report.txt", r.to_text());
  out << "wrote " << (dir / "report.json").string() << "\n";
  return kExitOk;
}

struct SimulateFlags {
  std::size_t n_clips = 0;
  double clean_fraction = 0.0;
  CLI::Option* n_opt = nullptr;
  CLI::Option* clean_opt = nullptr;
  bool balanced = false;
};

WorkloadSpec workload_for(const RunConfig& c, const SimulateFlags* flags) {
  const auto seed = c.require_seed();
  WorkloadSpec spec = c.workload ? *c.workload : default_workload_spec(seed);
  if (flags && flags->balanced) spec = balanced_workload_spec(seed);
  if (flags && flags->n_opt->count()) spec.n_clips = flags->n_clips;
  if (flags && flags->clean_opt->count()) spec.clean_fraction = flags->clean_fraction;
  spec.seed = seed;
  return resolve_spec(spec);
}

int cmd_simulate(const RunConfig& c, const SimulateFlags& flags, std::ostream& out) {
  const WorkloadSpec spec = workload_for(c, &flags);
  const auto dir = require_output_dir(c);
  WorkloadStats stats;
  const ClipCollection coll = generate_workload(spec, &stats);
  write_collection(coll, dir / "manifest.jsonl", dir / "embeddings.bin");
  write_text(dir / "workload.json", dump(workload_spec_to_json(spec)));
  const auto clean = std::ranges::count(stats.clean, true);
  out << coll.size() << " clips (" << clean << " clean), dim " << coll.dim() << ", "
      << coll.model_ids().size() << " models, separation " << spec_separation(spec)
      << " sigma, " << stats.clamp_events << " clamp events\n";
  return kExitOk;
}

int cmd_pipeline(const RunConfig& c, std::ostream& out) {
  // Validation happens before anything is written.
  const auto seed = c.require_seed();
  if (c.output_dir.empty()) throw InvalidInput("pipeline needs output_dir");
  std::optional<WorkloadSpec> spec;
  std::optional<ClipCollection> loaded;
  std::size_t n = 0;
  if (c.workload) {
    spec = workload_for(c, nullptr);
    n = spec->n_clips;
  } else {
    for (const auto& p : {c.manifest, c.embeddings}) {
      if (p.empty() || !fs::exists(p)) {
        throw InvalidInput("input path not found: " + (p.empty() ? std::string("<unset>") : p.string()));
      }
    }
    loaded = load_inputs(c);
    n = loaded->size();
  }
  const std::size_t budget = c.resolve_budget(n);
  if (budget == 0 || budget > n) {
    throw InvalidInput("budget " + std::to_string(budget) + " exceeds collection size " +
                       std::to_string(n));
  }
  std::vector<std::size_t> exp_budgets;
  if (c.experiment) {
    exp_budgets = c.experiment->budgets;
    for (double f : c.experiment->budget_fractions) {
      if (!(f > 0.0 && f <= 1.0)) throw InvalidInput("experiment budget fraction outside (0, 1]");
      exp_budgets.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * n))));
    }
    if (exp_budgets.empty()) exp_budgets.push_back(budget);
    for (auto b : exp_budgets) {
      if (b == 0 || b > n) {
        throw InvalidInput("experiment budget " + std::to_string(b) + " exceeds collection size " +
                           std::to_string(n));
      }
    }
  }
  if (c.rounds < 0) throw InvalidInput("rounds must be >= 0");
  const auto options = clustering_options(c);

  fs::create_directories(c.output_dir);
  std::vector<fs::path> written;
  auto stage = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      for (const auto& p : written) {
        std::error_code ec;
        fs::remove(p, ec);
      }
      throw StageError(name, e, dynamic_cast<const InvalidInput*>(&e) != nullptr);
    }
  };
  const fs::path dir = c.output_dir;

  stage("ingest", [&] {
    if (spec) {
      loaded = generate_workload(*spec);
      written.push_back(dir / "manifest.jsonl");
      written.push_back(dir / "embeddings.bin");
      write_collection(*loaded, written[0], written[1]);
    }
  });
  const ClipCollection& coll = *loaded;

  ClusterModel model;
  stage("cluster", [&] {
    model = select_k(coll.points(), options);
    written.push_back(dir / "cluster.bin");
    write_cluster_model(written.back(), model);
    written.push_back(dir / "cluster.json");
    write_text(written.back(), dump(cluster_summary(model)));
  });

  SampleManifest sample;
  stage("sample", [&] {
    sample = draw_sample(coll, &model, {budget, c.mode, c.channel, seed, c.epsilon});
    written.push_back(dir / "sample.jsonl");
    write_manifest(written.back(), sample);
  });

  stage("metrics", [&] {
    const SampleReport report =
        build_sample_report(coll, &model, sample, {c.channel, c.baseline_labels, c.top_n, c.rounds});
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["clusters"] = cluster_summary(model);
    j["sample"] = report.to_json();
    std::string text = "clusters: k = " + std::to_string(model.k) + "\n\n" + report.to_text();
    if (c.experiment) {
      ExperimentConfig ec;
      ec.strategies = c.experiment->strategies;
      ec.budgets = exp_budgets;
      ec.rounds = c.rounds;
      ec.channels = c.experiment->channels;
      ec.seed = seed;
      ec.epsilon = c.epsilon;
      ec.baseline_labels = c.baseline_labels;
      const ExperimentReport er = run_experiment(coll, model, ec);
      j["experiment"] = er.to_json();
      text += "\nstrategy comparison\n" + er.to_text();
    }
    written.push_back(dir / "report.json");
    write_text(written.back(), dump(j));
    written.push_back(dir / "report.txt");
    write_text(written.back(), text);
  });

  out << "pipeline complete: k = " << model.k << ", " << sample.entries.size()
      << " clips sampled, outputs in " << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"aura: budget-constrained test-set curation and model ranking"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  CommonFlags ingest_f, cluster_f, sample_f, rank_f, report_f, simulate_f, pipeline_f;

  auto* ingest = app.add_subcommand("ingest", "Validate and normalize a manifest + embedding pair");
  ingest_f.add_to(ingest);
  std::size_t dim = 0;
  auto* dim_opt = ingest->add_option("--dim", dim, "Expected embedding dimension");

  auto* cluster = app.add_subcommand("cluster", "k-means++ clustering with Davies-Bouldin k selection");
  cluster_f.add_to(cluster);
  std::string k_grid;
  int restarts = 0, max_iter = 0;
  double tol = 0.0;
  cluster->add_option("--k-grid", k_grid, "Candidate k values, e.g. 2-16 or 4,8,16");
  auto* restarts_opt = cluster->add_option("--restarts", restarts, "Seeded runs per k");
  auto* max_iter_opt = cluster->add_option("--max-iter", max_iter, "Lloyd iteration cap");
  auto* tol_opt = cluster->add_option("--tol", tol, "Centroid movement tolerance");

  auto* sample = app.add_subcommand("sample", "Draw a budget-limited sample");
  sample_f.add_to(sample);
  std::string mode, channel, clusters_path, sample_out;
  std::size_t budget = 0;
  double epsilon = 0.0;
  sample->add_option("--mode", mode, "hardness | ranking | diversity | random | variance | global_hardness");
  auto* budget_opt = sample->add_option("--budget", budget, "Number of clips to select");
  sample->add_option("--channel", channel, "sig | bak | ovrl");
  auto* eps_opt = sample->add_option("--epsilon", epsilon, "Weight floor");
  sample->add_option("--clusters", clusters_path, "Cluster sidecar (cluster.bin)");
  sample->add_option("--out", sample_out, "Output manifest path");

  auto* rank = app.add_subcommand("rank", "Rank models by mean DMOS");
  rank_f.add_to(rank);
  std::string rank_sample, rank_channel;
  bool rank_json = false;
  rank->add_option("--sample", rank_sample, "Sample manifest to compare against the full data");
  rank->add_option("--channel", rank_channel, "sig | bak | ovrl");
  rank->add_flag("--json", rank_json, "Emit JSON");

  auto* report = app.add_subcommand("report", "Difficulty, diversity and OOD report for a sample");
  report_f.add_to(report);
  std::string report_sample, report_clusters, labels_path, report_channel;
  int report_rounds = 0;
  std::size_t top_n = 0;
  report->add_option("--sample", report_sample, "Sample manifest");
  report->add_option("--clusters", report_clusters, "Cluster sidecar");
  report->add_option("--baseline-labels", labels_path, "File listing in-distribution categories");
  report->add_option("--channel", report_channel, "sig | bak | ovrl");
  report->add_option("--rounds", report_rounds, "Bootstrap rounds (0 = none)");
  auto* top_opt = report->add_option("--top-n", top_n, "Categories per list");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic workload");
  simulate_f.add_to(simulate);
  SimulateFlags sim;
  sim.n_opt = simulate->add_option("--n-clips", sim.n_clips, "Number of clips");
  sim.clean_opt = simulate->add_option("--clean-fraction", sim.clean_fraction, "Share of clean clips");
  simulate->add_flag("--balanced", sim.balanced, "Equal-size components, no clean speech");

  auto* pipeline = app.add_subcommand("pipeline", "cluster -> sample -> metrics");
  pipeline_f.add_to(pipeline);
  std::size_t pipe_budget = 0;
  int pipe_rounds = 0;
  std::string pipe_mode;
  auto* pipe_budget_opt = pipeline->add_option("--budget", pipe_budget, "Sampling budget override");
  auto* pipe_rounds_opt = pipeline->add_option("--rounds", pipe_rounds, "Bootstrap rounds override");
  pipeline->add_option("--mode", pipe_mode, "Sampling mode override");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*ingest) {
      RunConfig c = ingest_f.resolve();
      return cmd_ingest(c, dim_opt->count() ? std::optional<std::size_t>(dim) : std::nullopt, out);
    }
    if (*cluster) {
      RunConfig c = cluster_f.resolve();
      if (!k_grid.empty()) c.k_grid = parse_k_grid(k_grid);
      if (restarts_opt->count()) c.restarts = restarts;
      if (max_iter_opt->count()) c.max_iter = max_iter;
      if (tol_opt->count()) c.tol = tol;
      return cmd_cluster(c, out);
    }
    if (*sample) {
      RunConfig c = sample_f.resolve();
      if (!mode.empty()) c.mode = parse_sampling_mode(mode);
      if (budget_opt->count()) {
        c.budget = budget;
        c.budget_fraction.reset();
      }
      if (!channel.empty()) c.channel = parse_channel(channel);
      if (eps_opt->count()) c.epsilon = epsilon;
      if (!clusters_path.empty()) c.clusters = clusters_path;
      return cmd_sample(c, sample_out, out);
    }
    if (*rank) {
      RunConfig c = rank_f.resolve();
      if (!rank_sample.empty()) c.sample = rank_sample;
      if (!rank_channel.empty()) c.channel = parse_channel(rank_channel);
      return cmd_rank(c, rank_json, out);
    }
    if (*report) {
      RunConfig c = report_f.resolve();
      if (!report_sample.empty()) c.sample = report_sample;
      if (!report_clusters.empty()) c.clusters = report_clusters;
      if (!labels_path.empty()) c.baseline_labels = read_label_file(labels_path);
      if (!report_channel.empty()) c.channel = parse_channel(report_channel);
      if (top_opt->count()) c.top_n = top_n;
      return cmd_report(c, report_rounds, out);
    }
    if (*simulate) {
      return cmd_simulate(simulate_f.resolve(), sim, out);
    }
    if (*pipeline) {
      RunConfig c = pipeline_f.resolve();
      if (pipe_budget_opt->count()) {
        c.budget = pipe_budget;
        c.budget_fraction.reset();
      }
      if (pipe_rounds_opt->count()) c.rounds = pipe_rounds;
      if (!pipe_mode.empty()) c.mode = parse_sampling_mode(pipe_mode);
      return cmd_pipeline(c, out);
    }
  } catch (const StageError& e) {
    err << "error: " << e.what() << "\n";
    return e.invalid() ? kExitInvalid : kExitInternal;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInvalid;
}

}  // namespace aura::cli
