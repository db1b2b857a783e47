#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aura/aura.hpp"

namespace py = pybind11;
using namespace aura;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw InvalidInput("expected a 2-d array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.values().begin());
  return m;
}

Array to_array(const Matrix& m) {
  Array a({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), a.mutable_data());
  return a;
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw InvalidInput("expected a 1-d array");
  return {a.data(), a.data() + a.size()};
}

// Python dicts cross the boundary as JSON text.
nlohmann::json from_py(const py::object& obj) {
  auto dumps = py::module_::import("json").attr("dumps");
  return nlohmann::json::parse(dumps(obj).cast<std::string>());
}

py::object to_py(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict fidelity_dict(const RankingFidelity& f) {
  py::dict d;
  d["srcc_mean"] = f.srcc_mean;
  d["srcc_std"] = f.srcc_std;
  d["ci95_low"] = f.ci95_low;
  d["ci95_high"] = f.ci95_high;
  d["rounds"] = f.bootstrap_rounds;
  d["per_round"] = f.per_round;
  return d;
}

py::dict channel_mean_dict(const ChannelMean& c) {
  py::dict d;
  d["mean"] = c.mean;
  d["ci95"] = c.ci95;
  return d;
}

SamplingConfig make_config(std::size_t budget, const std::string& mode, const std::string& channel,
                           std::uint64_t seed, double epsilon) {
  SamplingConfig c;
  c.budget = budget;
  c.mode = parse_sampling_mode(mode);
  c.channel = parse_channel(channel);
  c.seed = seed;
  c.epsilon = epsilon;
  return c;
}

}  // namespace

PYBIND11_MODULE(_aura, m) {
  m.doc() = "Cluster-stratified hardness sampling for speech enhancement evaluation";

  static py::exception<InvalidInput> invalid_input(m, "InvalidInput", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidInput& e) {
      py::set_error(invalid_input, e.what());
    }
  });

  // --- dataset ---------------------------------------------------------------

  py::class_<ClipCollection>(m, "ClipCollection")
      .def("__len__", &ClipCollection::size)
      .def_property_readonly("dim", &ClipCollection::dim)
      .def_property_readonly("model_ids", &ClipCollection::model_ids)
      .def_property_readonly("clip_ids",
                             [](const ClipCollection& c) {
                               std::vector<std::string> ids;
                               for (const auto& r : c.records()) ids.push_back(r.clip_id);
                               return ids;
                             })
      .def_property_readonly("noise_labels",
                             [](const ClipCollection& c) {
                               std::vector<std::optional<std::string>> out;
                               for (const auto& r : c.records()) out.push_back(r.noise_label);
                               return out;
                             })
      .def("points", [](const ClipCollection& c) { return to_array(c.points()); })
      .def(
          "dmos_matrix",
          [](const ClipCollection& c, const std::string& channel) {
            return to_array(dmos_matrix(c, parse_channel(channel)));
          },
          py::arg("channel") = "ovrl")
      .def("find", &ClipCollection::find);

  m.def(
      "load_collection",
      [](const std::filesystem::path& manifest, const std::filesystem::path& embeddings,
         std::optional<std::size_t> expected_dim) {
        LoadOptions o;
        o.expected_dim = expected_dim;
        return load_collection(manifest, embeddings, o);
      },
      py::arg("manifest"), py::arg("embeddings"), py::arg("expected_dim") = py::none());
  m.def("write_collection", &write_collection, py::arg("collection"), py::arg("manifest"),
        py::arg("embeddings"));

  // --- simulator -------------------------------------------------------------

  m.def(
      "default_workload_spec",
      [](std::uint64_t seed) { return to_py(workload_spec_to_json(default_workload_spec(seed))); },
      py::arg("seed") = 0);
  m.def(
      "balanced_workload_spec",
      [](std::uint64_t seed) { return to_py(workload_spec_to_json(balanced_workload_spec(seed))); },
      py::arg("seed") = 0);
  m.def(
      "generate_workload",
      [](const py::object& spec) {
        WorkloadStats stats;
        auto coll = generate_workload(workload_spec_from_json(from_py(spec)), &stats);
        return py::make_tuple(std::move(coll), stats.components, stats.clean);
      },
      py::arg("spec"),
      "Returns (collection, component per clip, clean flag per clip). Unknown spec keys raise.");

  // --- clustering ------------------------------------------------------------

  py::class_<ClusterModel>(m, "ClusterModel")
      .def_readonly("k", &ClusterModel::k)
      .def_readonly("db_index", &ClusterModel::db_index)
      .def_readonly("inertia", &ClusterModel::inertia)
      .def_readonly("iterations", &ClusterModel::iterations_run)
      .def_readonly("assignments", &ClusterModel::assignments)
      .def_property_readonly("centroids", [](const ClusterModel& c) { return to_array(c.centroids); })
      .def("cluster_sizes", &ClusterModel::cluster_sizes)
      .def("assign", [](const ClusterModel& c, const Array& point) {
        const auto v = to_vector(point);
        if (v.size() != c.dim()) throw InvalidInput("point dimension does not match centroids");
        return assign(c, v);
      });

  m.def(
      "kmeanspp_init",
      [](const Array& points, std::size_t k, std::uint64_t seed, std::size_t local_trials) {
        return to_array(kmeanspp_init(to_matrix(points), k, seed, local_trials));
      },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0, py::arg("local_trials") = 1);
  m.def(
      "lloyd",
      [](const Array& points, const Array& init, int max_iter, double tol) {
        return lloyd(to_matrix(points), to_matrix(init), max_iter, tol);
      },
      py::arg("points"), py::arg("init_centroids"), py::arg("max_iter") = 100,
      py::arg("tol") = 1e-4);
  m.def(
      "davies_bouldin",
      [](const Array& points, const ClusterModel& model) {
        return davies_bouldin(to_matrix(points), model);
      },
      py::arg("points"), py::arg("model"));
  m.def(
      "select_k",
      [](const Array& points, std::vector<std::size_t> k_grid, std::uint64_t seed, int restarts,
         int max_iter, double tol, std::size_t local_trials) {
        SelectKOptions o;
        o.k_grid = std::move(k_grid);
        o.seed = seed;
        o.restarts = restarts;
        o.max_iter = max_iter;
        o.tol = tol;
        o.local_trials = local_trials;
        const Matrix pts = to_matrix(points);
        py::gil_scoped_release release;
        return select_k(pts, o);
      },
      py::arg("points"), py::arg("k_grid"), py::arg("seed") = 0, py::arg("restarts") = 3,
      py::arg("max_iter") = 100, py::arg("tol") = 1e-4, py::arg("local_trials") = 1);
  m.def("desk_k_grid", &desk_k_grid);
  m.def("write_cluster_model", &write_cluster_model, py::arg("path"), py::arg("model"));
  m.def("read_cluster_model", &read_cluster_model, py::arg("path"));

  // --- sampling --------------------------------------------------------------

  py::class_<SampleManifest>(m, "SampleManifest")
      .def("__len__", [](const SampleManifest& s) { return s.entries.size(); })
      .def_readonly("strategy", &SampleManifest::strategy_name)
      .def_readonly("k", &SampleManifest::k)
      .def_property_readonly("clip_ids",
                             [](const SampleManifest& s) {
                               std::vector<std::string> out;
                               for (const auto& e : s.entries) out.push_back(e.clip_id);
                               return out;
                             })
      .def_property_readonly("clip_indices", &SampleManifest::clip_indices)
      .def_property_readonly("clusters",
                             [](const SampleManifest& s) {
                               std::vector<std::uint32_t> out;
                               for (const auto& e : s.entries) out.push_back(e.cluster);
                               return out;
                             })
      .def_property_readonly("weights", [](const SampleManifest& s) {
        std::vector<double> out;
        for (const auto& e : s.entries) out.push_back(e.weight);
        return out;
      });

  m.def("hardness_weights",
        [](const Array& dmos, double epsilon) { return hardness_weights(to_vector(dmos), epsilon); },
        py::arg("dmos"), py::arg("epsilon") = kDefaultEpsilon);
  m.def("variance_weights",
        [](const Array& rows, double epsilon) { return variance_weights(to_matrix(rows), epsilon); },
        py::arg("dmos_rows"), py::arg("epsilon") = kDefaultEpsilon);
  m.def(
      "weighted_sample",
      [](const Array& weights, std::size_t quota, std::uint64_t seed) {
        Rng rng(seed);
        return weighted_sample_without_replacement(to_vector(weights), quota, rng);
      },
      py::arg("weights"), py::arg("quota"), py::arg("seed") = 0,
      "Weighted sampling without replacement; positions in descending key order.");
  m.def("allocate_quotas", [](std::vector<std::size_t> sizes, std::size_t budget) {
    return allocate_quotas(sizes, budget);
  }, py::arg("cluster_sizes"), py::arg("budget"));
  m.def(
      "draw_sample",
      [](const ClipCollection& coll, const ClusterModel* clusters, std::size_t budget,
         const std::string& mode, const std::string& channel, std::uint64_t seed, double epsilon) {
        return draw_sample(coll, clusters, make_config(budget, mode, channel, seed, epsilon));
      },
      py::arg("collection"), py::arg("clusters"), py::arg("budget"), py::arg("mode") = "hardness",
      py::arg("channel") = "ovrl", py::arg("seed") = 0, py::arg("epsilon") = kDefaultEpsilon);
  m.def("write_manifest", &write_manifest, py::arg("path"), py::arg("manifest"));
  m.def("read_manifest", &read_manifest, py::arg("path"), py::arg("collection"));

  // --- metrics ---------------------------------------------------------------

  m.def("srcc", [](const Array& a, const Array& b) { return srcc(to_vector(a), to_vector(b)); },
        py::arg("a"), py::arg("b"));
  m.def("average_ranks",
        [](const Array& v, bool descending) { return average_ranks(to_vector(v), descending); },
        py::arg("values"), py::arg("descending") = false);
  m.def("chi_square_sf", &chi_square_sf, py::arg("statistic"), py::arg("df"));
  m.def(
      "chi_square_uniformity",
      [](std::vector<std::size_t> counts) {
        const auto r = chi_square_uniformity(counts);
        return py::make_tuple(r.chi2, r.p_value);
      },
      py::arg("cluster_counts"), "Returns (chi2, p_value).");
  m.def(
      "rank_models",
      [](const ClipCollection& coll, const std::string& channel,
         std::optional<std::vector<std::size_t>> clip_indices) {
        const auto r = clip_indices ? rank_models(coll, parse_channel(channel), *clip_indices)
                                    : rank_models(coll, parse_channel(channel));
        py::dict d;
        d["model_ids"] = r.model_ids;
        d["mean_dmos"] = r.mean_dmos;
        d["ranks"] = r.ranks;
        return d;
      },
      py::arg("collection"), py::arg("channel") = "ovrl", py::arg("clip_indices") = py::none());
  m.def(
      "bootstrap_srcc",
      [](const ClipCollection& coll, const ClusterModel* clusters, std::size_t budget,
         const std::string& mode, const std::string& channel, std::uint64_t seed, int rounds,
         double epsilon) {
        const auto config = make_config(budget, mode, channel, seed, epsilon);
        RankingFidelity f;
        {
          py::gil_scoped_release release;
          f = bootstrap_srcc(coll, clusters, config, rounds);
        }
        return fidelity_dict(f);
      },
      py::arg("collection"), py::arg("clusters"), py::arg("budget"), py::arg("mode") = "ranking",
      py::arg("channel") = "ovrl", py::arg("seed") = 0, py::arg("rounds") = 200,
      py::arg("epsilon") = kDefaultEpsilon);
  m.def(
      "ood_fraction",
      [](const SampleManifest& s, const ClipCollection& coll, std::set<std::string> baseline) {
        const auto r = ood_fraction(s, coll, baseline);
        py::dict d;
        d["fraction"] = r.fraction;
        d["ood"] = r.ood;
        d["labeled"] = r.labeled;
        d["unlabeled"] = r.unlabeled;
        return d;
      },
      py::arg("manifest"), py::arg("collection"), py::arg("baseline_labels"));
  m.def(
      "mean_dmos",
      [](const SampleManifest& s, const ClipCollection& coll, std::vector<std::string> models) {
        const auto r = mean_dmos(s, coll, models);
        py::dict d;
        d["sig"] = channel_mean_dict(r.sig);
        d["bak"] = channel_mean_dict(r.bak);
        d["ovrl"] = channel_mean_dict(r.ovrl);
        d["count"] = r.count;
        return d;
      },
      py::arg("manifest"), py::arg("collection"), py::arg("models") = std::vector<std::string>{});

  // --- experiment ------------------------------------------------------------

  m.def(
      "run_experiment",
      [](const ClipCollection& coll, const ClusterModel& clusters, std::vector<std::size_t> budgets,
         std::vector<std::string> strategies, int rounds, std::vector<std::string> channels,
         std::uint64_t seed, double epsilon, std::set<std::string> baseline_labels) {
        ExperimentConfig c;
        c.budgets = std::move(budgets);
        if (!strategies.empty()) {
          c.strategies.clear();
          for (const auto& s : strategies) c.strategies.push_back(parse_strategy(s));
        }
        c.rounds = rounds;
        c.channels.clear();
        for (const auto& ch : channels) c.channels.push_back(parse_channel(ch));
        c.seed = seed;
        c.epsilon = epsilon;
        c.baseline_labels = std::move(baseline_labels);
        ExperimentReport rep;
        {
          py::gil_scoped_release release;
          rep = run_experiment(coll, clusters, c);
        }
        return to_py(rep.to_json());
      },
      py::arg("collection"), py::arg("clusters"), py::arg("budgets"),
      py::arg("strategies") = std::vector<std::string>{}, py::arg("rounds") = 200,
      py::arg("channels") = std::vector<std::string>{"ovrl"}, py::arg("seed") = 0,
      py::arg("epsilon") = kDefaultEpsilon, py::arg("baseline_labels") = std::set<std::string>{});
}
