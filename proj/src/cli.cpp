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

#include "fairpareto/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>

#include "fairpareto/fairmetrics.hpp"
#include "fairpareto/orchestrator.hpp"
#include "fairpareto/paretostats.hpp"
#include "fairpareto/runner.hpp"
#include "fairpareto/store.hpp"

namespace fairpareto {
namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(',', start);
    std::string item = text.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string format_value(const MaybeReal& v) { return v ? fmt::format("{}", *v) : "undefined"; }

/// Writes to `path` or, when it is empty or "-", to `fallback`.
template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw ConfigError(fmt::format("cannot write '{}'", path));
  fn(file);
}

int top_fidelity(std::span<const TrialRecord> records) {
  int top = 0;
  for (const auto& r : records) {
    if (r.status == TrialStatus::reported) top = std::max(top, r.fidelity);
  }
  return top;
}

void require_known_objectives(std::span<const TrialRecord> records,
                              std::span<const std::string> objectives) {
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (r.objectives) {
      for (const auto& [name, v] : *r.objectives) seen.insert(name);
    }
  }
  for (const auto& o : objectives) {
    if (!seen.contains(o)) throw ConfigError(fmt::format("unknown objective '{}'", o));
  }
}

void require_filter_objectives(std::span<const TrialRecord> records, const RecordFilter& filter) {
  std::vector<std::string> names;
  for (const auto& t : filter.terms()) names.push_back(t.objective);
  require_known_objectives(records, names);
}

struct SearchArgs {
  std::string space = "dpn_fair_v1";
  std::string backend;
  int min_fidelity = 25;
  int max_fidelity = 100;
  int eta = 2;
  double rho = kDefaultRho;
  std::size_t budget_trials = 0;
  double budget_fidelity = 0.0;
  double wall_clock_s = 0.0;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  std::string out = "run.jsonl";
  std::string objectives;
  double timeout_s = 0.0;
  std::size_t zdt_dims = 6;
  std::size_t max_failures = 5;
};

int cmd_search(const SearchArgs& a, std::ostream& out) {
  const SearchSpace space = SearchSpace::load(a.space);
  BackendOptions backend_options;
  backend_options.max_fidelity = a.max_fidelity;
  backend_options.zdt_dims = a.zdt_dims;
  if (a.timeout_s > 0) {
    backend_options.timeout = std::chrono::milliseconds(static_cast<long long>(a.timeout_s * 1000));
  }
  auto backend = make_backend(a.backend, space, backend_options);

  SearchSettings settings;
  settings.min_fidelity = a.min_fidelity;
  settings.max_fidelity = a.max_fidelity;
  settings.eta = a.eta;
  settings.rho = a.rho;
  settings.n_workers = a.workers;
  settings.seed = a.seed;
  settings.objectives = split_list(a.objectives);
  settings.max_consecutive_failures = a.max_failures;
  if (a.budget_trials > 0) settings.budget.max_trials = a.budget_trials;
  if (a.budget_fidelity > 0) settings.budget.max_full_fidelity_equivalents = a.budget_fidelity;
  if (a.wall_clock_s > 0) {
    settings.budget.wall_clock_limit =
        std::chrono::milliseconds(static_cast<long long>(a.wall_clock_s * 1000));
  }
  settings.budget.validate();
  make_ladder(a.min_fidelity, a.max_fidelity, a.eta);

  log().info("search over '{}' with {}", space.name(), backend->describe());
  RunLogWriter writer(a.out);
  const auto result = run_search(space, *backend, settings, &writer);
  write_front_csv(out, result.max_fidelity_points, result.objectives, result.front_indices);
  return kExitOk;
}

struct EvalArgs {
  std::string file;
  std::string metrics = "rank_disparity,disparity,ratio,rank_ratio,error_ratio";
  bool multi_group = false;
  std::string groups;
};

int cmd_eval_embeddings(const EvalArgs& a, std::ostream& out) {
  const auto report = [&] {
    try {
      return compute_ranks(load_embeddings(a.file));
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
  }();
  std::vector<std::string> groups = a.groups.empty() ? report.group_order : split_list(a.groups);
  for (const auto& g : groups) {
    if (!report.per_group.contains(g)) {
      throw ConfigError(fmt::format("group '{}' has no probes with a same-identity mate", g));
    }
  }
  if (groups.size() < 2) {
    throw ConfigError(fmt::format("need at least two groups, found {}", groups.size()));
  }
  if (groups.size() > 2 && !a.multi_group) {
    throw ConfigError(fmt::format("{} groups present; pass --multi-group or --groups a,b", groups.size()));
  }
  std::vector<std::string> names = split_list(a.metrics);
  if (names.empty()) throw ConfigError("no metrics requested");
  out << "metric,value\n";
  for (const auto& name : names) {
    if (name == "error") {
      out << "error," << fmt::format("{}", report.overall_error()) << '\n';
      continue;
    }
    const FairnessMetric metric = parse_fairness_metric(name);
    const FairnessValue v = a.multi_group ? multi_group_metric(report, metric, groups)
                                          : fairness_metric(report, metric, groups[0], groups[1]);
    if (!v.value) log().warn("{} is undefined (zero denominator)", name);
    out << name << ',' << format_value(v.value) << '\n';
  }
  return kExitOk;
}

struct ParetoArgs {
  std::vector<std::string> runs;
  std::string objectives = "error,rank_disparity";
  bool aggregate = false;
  std::string filter;
  int fidelity = 0;
  std::string out;
};

std::vector<TrialRecord> load_runs(const std::vector<std::string>& runs) {
  std::vector<std::filesystem::path> paths(runs.begin(), runs.end());
  try {
    return load_run_logs(paths);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

int cmd_pareto(const ParetoArgs& a, std::ostream& out) {
  const auto records = load_runs(a.runs);
  const auto objectives = split_list(a.objectives);
  if (objectives.empty()) throw ConfigError("no objectives given");
  require_known_objectives(records, objectives);
  const RecordFilter filter = a.filter.empty() ? RecordFilter{} : RecordFilter::parse(a.filter);
  require_filter_objectives(records, filter);
  const int fidelity = a.fidelity > 0 ? a.fidelity : top_fidelity(records);

  std::vector<AggregatedPoint> points;
  if (a.aggregate) {
    points = aggregate_seeds(records, fidelity, objectives).points;
  } else {
    std::size_t undefined = 0;
    for (const auto& r : records) {
      if (r.status != TrialStatus::reported || r.fidelity != fidelity) continue;
      auto values = r.defined(objectives);
      if (!values) {
        ++undefined;
        continue;
      }
      AggregatedPoint p;
      p.config_key = config_key(r.config);
      p.mean = std::move(*values);
      for (const auto& o : objectives) p.standard_error[o] = 0.0;
      p.n_seeds = 1;
      points.push_back(std::move(p));
    }
    if (undefined > 0) log().warn("{} record(s) skipped for undefined objectives", undefined);
  }
  if (!filter.terms().empty()) {
    std::vector<AggregatedPoint> kept;
    for (auto& p : points) {
      ObjectiveValues all;
      for (const auto& [k, v] : p.mean) all[k] = v;
      if (filter.accepts(all)) kept.push_back(std::move(p));
    }
    points = std::move(kept);
  }
  std::vector<ObjectiveVector> means;
  for (const auto& p : points) means.push_back(p.mean);
  const auto front = pareto_front_indices(means);
  log().info("{} point(s) at fidelity {}, {} on the front", points.size(), fidelity, front.size());
  with_output(a.out, out, [&](std::ostream& os) { write_front_csv(os, points, objectives, front); });
  return kExitOk;
}

struct ReportArgs {
  std::vector<std::string> runs;
  std::string correlation = "error,rank_disparity";
  std::string filter;
  int fidelity = 0;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  const auto records = load_runs(a.runs);
  const auto pair = split_list(a.correlation);
  if (pair.size() != 2) throw ConfigError("--correlation takes exactly two objectives");
  require_known_objectives(records, pair);
  const RecordFilter filter = a.filter.empty() ? RecordFilter{} : RecordFilter::parse(a.filter);
  require_filter_objectives(records, filter);
  const int fidelity = a.fidelity > 0 ? a.fidelity : top_fidelity(records);
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : records) {
    if (r.status != TrialStatus::reported || r.fidelity != fidelity) continue;
    if (!filter.accepts(*r.objectives)) continue;
    auto values = r.defined(pair);
    if (!values) continue;
    xs.push_back(values->at(pair[0]));
    ys.push_back(values->at(pair[1]));
  }
  const MaybeReal rho = xs.size() >= 2 ? pearson(xs, ys) : std::nullopt;
  if (!rho) log().warn("correlation undefined over {} record(s)", xs.size());
  out << "x,y,n,pearson\n"
      << pair[0] << ',' << pair[1] << ',' << xs.size() << ',' << format_value(rho) << '\n';
  return kExitOk;
}

struct ReevaluateArgs {
  std::vector<std::string> runs;
  std::string space = "dpn_fair_v1";
  std::string backend;
  std::string objectives;
  int fidelity = 0;
  std::size_t seeds = 4;
  std::uint64_t seed = 0;
  double timeout_s = 0.0;
  std::size_t zdt_dims = 6;
  std::string out = "reevaluate.jsonl";
};

int cmd_reevaluate(const ReevaluateArgs& a, std::ostream& out) {
  const auto records = load_runs(a.runs);
  const SearchSpace space = SearchSpace::load(a.space);
  const int fidelity = a.fidelity > 0 ? a.fidelity : top_fidelity(records);
  BackendOptions backend_options;
  backend_options.max_fidelity = fidelity;
  backend_options.zdt_dims = a.zdt_dims;
  if (a.timeout_s > 0) {
    backend_options.timeout = std::chrono::milliseconds(static_cast<long long>(a.timeout_s * 1000));
  }
  auto backend = make_backend(a.backend, space, backend_options);
  const auto objectives = a.objectives.empty() ? backend->default_objectives() : split_list(a.objectives);
  require_known_objectives(records, objectives);
  if (a.seeds == 0) throw ConfigError("--seeds must be positive");

  const auto aggregated = aggregate_seeds(records, fidelity, objectives).points;
  std::vector<ObjectiveVector> means;
  for (const auto& p : aggregated) means.push_back(p.mean);
  std::map<std::string, Configuration> configs;
  for (const auto& r : records) configs.emplace(config_key(r.config), r.config);

  RunLogWriter writer(a.out);
  std::vector<TrialRecord> evaluated;
  std::size_t failures = 0;
  std::size_t member = 0;
  for (std::size_t idx : pareto_front_indices(means)) {
    const Configuration& config = configs.at(aggregated[idx].config_key);
    for (std::size_t k = 0; k < a.seeds; ++k) {
      EvaluationRequest request{fmt::format("r{}s{}", member, k), config, fidelity,
                                trial_seed(a.seed, k), std::nullopt};
      const auto result = backend->evaluate(request, {});
      TrialRecord record{request.trial_id, config, request.seed, fidelity, TrialStatus::failed,
                         std::nullopt, result.wall_time_s};
      if (result.ok) {
        record.status = TrialStatus::reported;
        record.objectives = result.objectives;
      } else {
        ++failures;
        log().warn("{} failed: {}", request.trial_id, result.failure);
      }
      writer.append(record);
      evaluated.push_back(std::move(record));
    }
    ++member;
  }
  if (!evaluated.empty() && failures == evaluated.size()) {
    throw BackendError("every re-evaluation failed");
  }
  const auto points = aggregate_seeds(evaluated, fidelity, objectives).points;
  std::vector<ObjectiveVector> re_means;
  for (const auto& p : points) re_means.push_back(p.mean);
  write_front_csv(out, points, objectives, pareto_front_indices(re_means));
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  configure_logging_from_env();
  CLI::App app{"Multi-objective, multi-fidelity search for accurate and fair face identification"};
  app.name("fairpareto");
  app.require_subcommand(1);

  SearchArgs search;
  auto* s = app.add_subcommand("search", "Run the ASHA + ParEGO search loop");
  s->add_option("--space", search.space, "Preset name (dpn_fair_v1, box6) or JSON space file")
      ->capture_default_str();
  s->add_option("--backend", search.backend, "builtin:zdt1 | worker:<cmd> | embeddings:<template>")
      ->required();
  s->add_option("--min-fidelity", search.min_fidelity)->capture_default_str();
  s->add_option("--max-fidelity", search.max_fidelity)->capture_default_str();
  s->add_option("--eta", search.eta)->capture_default_str();
  s->add_option("--rho", search.rho)->capture_default_str();
  s->add_option("--budget-trials", search.budget_trials, "Number of evaluations");
  s->add_option("--budget-fidelity", search.budget_fidelity, "Full-fidelity equivalents");
  s->add_option("--wall-clock-limit", search.wall_clock_s, "Seconds");
  s->add_option("--workers", search.workers)->capture_default_str();
  s->add_option("--seed", search.seed)->capture_default_str();
  s->add_option("--out", search.out, "Run log (JSON Lines)")->capture_default_str();
  s->add_option("--objectives", search.objectives, "Comma-separated; default: backend's");
  s->add_option("--timeout", search.timeout_s, "Per-evaluation timeout in seconds");
  s->add_option("--zdt-dim", search.zdt_dims, "Inputs of builtin:zdt1")->capture_default_str();
  s->add_option("--max-failures", search.max_failures, "Consecutive failures before exit 3")
      ->capture_default_str();

  EvalArgs eval;
  auto* e = app.add_subcommand("eval-embeddings", "Identification fairness metrics of an embedding file");
  e->add_option("--file", eval.file, "CSV or JSONL embeddings")->required();
  e->add_option("--metrics", eval.metrics)->capture_default_str();
  e->add_flag("--multi-group", eval.multi_group, "Max over all group pairs");
  e->add_option("--groups", eval.groups, "Groups to compare, comma-separated");

  ParetoArgs pareto;
  auto* p = app.add_subcommand("pareto", "Pareto front of logged trials as CSV");
  p->add_option("--runs", pareto.runs, "Run logs")->required()->delimiter(',');
  p->add_option("--objectives", pareto.objectives)->capture_default_str();
  p->add_flag("--aggregate-seeds", pareto.aggregate, "Mean and standard error per configuration");
  p->add_option("--filter", pareto.filter, "e.g. \"error<0.3 && rank_disparity<2\"");
  p->add_option("--fidelity", pareto.fidelity, "Default: highest reported");
  p->add_option("--out", pareto.out, "Default: standard output");

  ReportArgs report;
  auto* r = app.add_subcommand("report", "Pearson correlation between two objectives");
  r->add_option("--runs", report.runs, "Run logs")->required()->delimiter(',');
  r->add_option("--correlation", report.correlation)->capture_default_str();
  r->add_option("--filter", report.filter);
  r->add_option("--fidelity", report.fidelity, "Default: highest reported");

  ReevaluateArgs reeval;
  auto* v = app.add_subcommand("reevaluate", "Re-run front members over several seeds");
  v->add_option("--runs", reeval.runs, "Run logs")->required()->delimiter(',');
  v->add_option("--space", reeval.space)->capture_default_str();
  v->add_option("--backend", reeval.backend)->required();
  v->add_option("--objectives", reeval.objectives);
  v->add_option("--fidelity", reeval.fidelity, "Default: highest reported");
  v->add_option("--seeds", reeval.seeds)->capture_default_str();
  v->add_option("--seed", reeval.seed)->capture_default_str();
  v->add_option("--timeout", reeval.timeout_s, "Seconds");
  v->add_option("--zdt-dim", reeval.zdt_dims)->capture_default_str();
  v->add_option("--out", reeval.out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (s->parsed()) return cmd_search(search, out);
    if (e->parsed()) return cmd_eval_embeddings(eval, out);
    if (p->parsed()) return cmd_pareto(pareto, out);
    if (r->parsed()) return cmd_report(report, out);
    if (v->parsed()) return cmd_reevaluate(reeval, out);
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitConfig;
  } catch (const DataError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitConfig;
  } catch (const BackendError& ex) {
    err << "backend failure: " << ex.what() << '\n';
    return kExitBackend;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace fairpareto
