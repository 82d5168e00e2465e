/*
 * Copyright 2026 The fairpareto Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fairpareto/cli.hpp"
#include "fairpareto/fairmetrics.hpp"
#include "fairpareto/orchestrator.hpp"
#include "fairpareto/paretostats.hpp"
#include "fairpareto/scalarize.hpp"
#include "fairpareto/store.hpp"
#include "fairpareto/worker_protocol.hpp"

namespace py = pybind11;
namespace fp = fairpareto;

namespace {

py::dict record_dict(const fp::TrialRecord& r) {
  py::dict d;
  d["trial_id"] = r.trial_id;
  d["config"] = r.config.values;
  d["seed"] = r.seed;
  d["fidelity"] = r.fidelity;
  d["status"] = std::string(fp::to_string(r.status));
  if (r.objectives) {
    d["objectives"] = *r.objectives;
  } else {
    d["objectives"] = py::none();
  }
  d["wall_time_s"] = r.wall_time_s;
  return d;
}

py::list point_list(std::span<const fp::AggregatedPoint> points) {
  py::list out;
  for (const auto& p : points) {
    py::dict d;
    d["config_key"] = p.config_key;
    d["mean"] = p.mean;
    d["standard_error"] = p.standard_error;
    d["n_seeds"] = p.n_seeds;
    out.append(d);
  }
  return out;
}

fp::ObjectiveVector named(const std::vector<double>& values) {
  fp::ObjectiveVector v;
  for (std::size_t i = 0; i < values.size(); ++i) v["o" + std::to_string(i)] = values[i];
  return v;
}

std::vector<fp::ObjectiveVector> named_rows(const std::vector<std::vector<double>>& rows) {
  std::vector<fp::ObjectiveVector> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(named(r));
  return out;
}

py::dict metrics_dict(const fp::IdentificationReport& report, const std::vector<std::string>& groups,
                      bool multi_group) {
  if (groups.size() < 2) throw fp::ConfigError("need at least two groups");
  if (groups.size() > 2 && !multi_group) {
    throw fp::ConfigError("more than two groups; pass multi_group=True or choose two groups");
  }
  py::dict d;
  d["error"] = report.overall_error();
  for (auto m : fp::kAllFairnessMetrics) {
    const auto v = multi_group ? fp::multi_group_metric(report, m, groups)
                               : fp::fairness_metric(report, m, groups[0], groups[1]);
    d[py::str(std::string(fp::to_string(m)))] = v.value;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fairness metrics, Pareto statistics and the multi-fidelity search loop.";

  auto base = py::register_exception<fp::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<fp::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<fp::DataError>(m, "DataError", base.ptr());
  py::register_exception<fp::BackendError>(m, "BackendError", base.ptr());
  py::register_exception<fp::ProtocolError>(m, "ProtocolError", base.ptr());

  m.def(
      "embedding_metrics",
      [](const std::string& path, std::vector<std::string> groups, bool multi_group) {
        const auto report = fp::compute_ranks(fp::load_embeddings(path));
        if (groups.empty()) groups = report.group_order;
        return metrics_dict(report, groups, multi_group);
      },
      py::arg("path"), py::arg("groups") = std::vector<std::string>{}, py::arg("multi_group") = false,
      "Overall error and the five fairness metrics of an embedding file. Undefined values are None.");

  m.def(
      "identification_ranks",
      [](const std::vector<std::vector<double>>& vectors, const std::vector<std::string>& identities,
         const std::vector<std::string>& groups) {
        if (vectors.size() != identities.size() || vectors.size() != groups.size()) {
          throw fp::DataError("vectors, identities and groups must have the same length");
        }
        std::vector<fp::EmbeddingRecord> records;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
          records.push_back({std::to_string(i), identities[i], groups[i], vectors[i]});
        }
        const auto report = fp::compute_ranks(fp::EmbeddingSet(std::move(records)));
        py::list ranks;
        for (const auto& r : report.per_image) {
          if (r.excluded) {
            ranks.append(py::none());
          } else {
            ranks.append(r.rank);
          }
        }
        return ranks;
      },
      py::arg("vectors"), py::arg("identities"), py::arg("groups"),
      "Per-image rank: non-mates strictly closer than the nearest same-identity image. None when the "
      "image has no mate.");

  m.def(
      "pareto_front_indices",
      [](const std::vector<std::vector<double>>& points) {
        return fp::pareto_front_indices(named_rows(points));
      },
      py::arg("points"));

  m.def(
      "hypervolume2d",
      [](const std::vector<std::vector<double>>& front, const std::vector<double>& ref) {
        return fp::hypervolume2d(named_rows(front), named(ref));
      },
      py::arg("front"), py::arg("ref"));

  m.def(
      "parego",
      [](const std::vector<double>& normalized, const std::vector<double>& weights, double rho) {
        return fp::parego(normalized, fp::WeightVector{weights}, rho);
      },
      py::arg("normalized"), py::arg("weights"), py::arg("rho") = fp::kDefaultRho);

  m.def(
      "pearson",
      [](const std::vector<double>& x, const std::vector<double>& y) { return fp::pearson(x, y); },
      py::arg("x"), py::arg("y"));

  m.def(
      "ladder", [](int min_f, int max_f, int eta) { return fp::make_ladder(min_f, max_f, eta).fidelities; },
      py::arg("min_fidelity"), py::arg("max_fidelity"), py::arg("eta"));

  m.def(
      "zdt1_mf",
      [](const std::vector<double>& x, double fidelity_fraction) {
        const auto f = fp::zdt1_mf(x, fidelity_fraction);
        return std::pair(f.at("f1"), f.at("f2"));
      },
      py::arg("x"), py::arg("fidelity_fraction"));

  m.def(
      "sample_configs",
      [](const std::string& space, std::size_t n, std::uint64_t seed) {
        const auto s = fp::SearchSpace::load(space);
        fp::Rng rng(seed);
        std::vector<std::map<std::string, fp::ParamValue>> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(fp::sample(s, rng).values);
        return out;
      },
      py::arg("space") = "dpn_fair_v1", py::arg("n") = 1, py::arg("seed") = 0);

  m.def(
      "validate_config",
      [](const std::string& space, const std::map<std::string, fp::ParamValue>& values) {
        return fp::validate(fp::SearchSpace::load(space), fp::Configuration{values});
      },
      py::arg("space"), py::arg("config"), "List of violations; empty when the configuration is valid.");

  m.def(
      "load_run_log",
      [](const std::string& path) {
        const auto log = fp::load_run_log(path);
        py::list out;
        for (const auto& r : log.records) out.append(record_dict(r));
        return out;
      },
      py::arg("path"));

  m.def(
      "run_search",
      [](const std::string& space_name, const std::string& backend_spec, std::optional<std::size_t> max_trials,
         std::optional<double> max_full_fidelity_equivalents, int min_fidelity, int max_fidelity, int eta,
         double rho, std::size_t workers, std::uint64_t seed, std::vector<std::string> objectives,
         std::optional<std::string> out) {
        const auto space = fp::SearchSpace::load(space_name);
        fp::BackendOptions options;
        options.max_fidelity = max_fidelity;
        auto backend = fp::make_backend(backend_spec, space, options);
        fp::SearchSettings s;
        s.min_fidelity = min_fidelity;
        s.max_fidelity = max_fidelity;
        s.eta = eta;
        s.rho = rho;
        s.n_workers = workers;
        s.seed = seed;
        s.objectives = std::move(objectives);
        s.budget.max_trials = max_trials;
        s.budget.max_full_fidelity_equivalents = max_full_fidelity_equivalents;
        std::optional<fp::RunLogWriter> writer;
        if (out) writer.emplace(*out);
        fp::SearchResult result;
        {
          py::gil_scoped_release release;
          result = fp::run_search(space, *backend, s, writer ? &*writer : nullptr);
        }
        py::dict d;
        py::list history;
        for (const auto& r : result.history) history.append(record_dict(r));
        d["history"] = history;
        d["objectives"] = result.objectives;
        d["points"] = point_list(result.max_fidelity_points);
        d["front_indices"] = result.front_indices;
        d["consumed_full_fidelity"] = result.consumed_full_fidelity;
        d["failed_trials"] = result.failed_trials;
        return d;
      },
      py::arg("space") = "dpn_fair_v1", py::arg("backend") = "builtin:zdt1", py::arg("max_trials") = py::none(),
      py::arg("max_full_fidelity_equivalents") = py::none(), py::arg("min_fidelity") = 25,
      py::arg("max_fidelity") = 100, py::arg("eta") = 2, py::arg("rho") = fp::kDefaultRho,
      py::arg("workers") = 1, py::arg("seed") = 0, py::arg("objectives") = std::vector<std::string>{},
      py::arg("out") = py::none());

  m.def(
      "cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "fairpareto");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out;
        std::ostringstream err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = fp::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
