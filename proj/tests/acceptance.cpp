// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Uses only the builtin and stub-worker backends.
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fairpareto/cli.hpp"
#include "fairpareto/fairmetrics.hpp"
#include "fairpareto/orchestrator.hpp"
#include "fairpareto/paretostats.hpp"
#include "fairpareto/scalarize.hpp"
#include "fairpareto/store.hpp"
#include "support/oracles.hpp"
#include "support/paths.hpp"

namespace fp = fairpareto;

namespace {

using Clock = std::chrono::steady_clock;

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Check metric_oracle() {
  Check c;
  const auto start = Clock::now();
  fp::Rng rng(20240601);
  const std::vector<std::string> names = {"disparity", "rank_disparity", "ratio", "rank_ratio", "error_ratio"};
  std::size_t compared = 0;
  for (int rep = 0; rep < 100 && c.ok; ++rep) {
    const std::size_t n = 2 + fp::uniform_index(rng, 199);
    const std::size_t d = 1 + fp::uniform_index(rng, 16);
    const std::size_t g = 2 + fp::uniform_index(rng, 3);
    const auto set = fp::oracle::random_embeddings(rng, n, d, g, rep % 4 == 0);
    const auto report = fp::compute_ranks(set);
    const auto expected = fp::oracle::ranks(set);
    for (std::size_t i = 0; i < n; ++i) {
      c.expect(report.per_image[i].excluded == !expected.rank[i].has_value(),
               fmt::format("set {}: image {} exclusion differs", rep, i));
      if (expected.rank[i]) {
        c.expect(report.per_image[i].rank == *expected.rank[i],
                 fmt::format("set {}: image {} rank {} != {}", rep, i, report.per_image[i].rank,
                             *expected.rank[i]));
      }
    }
    const auto means = fp::oracle::group_means(set, expected);
    const auto& groups = report.group_order;
    for (std::size_t a = 0; a < groups.size(); ++a) {
      for (std::size_t b = 0; b < groups.size(); ++b) {
        if (a == b) continue;
        for (const auto& name : names) {
          const auto got = fp::fairness_metric(report, fp::parse_fairness_metric(name), groups[a], groups[b]);
          const auto want = fp::oracle::metric(name, means.at(groups[a]), means.at(groups[b]));
          c.expect(got.value.has_value() == want.has_value(),
                   fmt::format("set {}: {} definedness differs", rep, name));
          if (got.value && want) {
            c.expect(std::abs(*got.value - *want) <= 1e-12,
                     fmt::format("set {}: {} {} vs {}", rep, name, *got.value, *want));
          }
          ++compared;
        }
      }
    }
  }
  const double t = seconds_since(start);
  c.expect(t < 30.0, fmt::format("took {:.1f} s", t));
  if (c.ok) c.detail = fmt::format("100 sets, {} metric values, {:.2f} s", compared, t);
  return c;
}

Check worked_example() {
  Check c;
  const auto report = fp::compute_ranks(fp::load_embeddings(FAIRPARETO_TEST_DATA "/worked_example.csv"));
  using M = fp::FairnessMetric;
  const auto value = [&](M m) { return fp::fairness_metric(report, m, "M", "F").value; };
  c.expect(value(M::rank_disparity) == 1.0, "rank_disparity != 1");
  c.expect(value(M::disparity) == 1.0, "disparity != 1");
  c.expect(value(M::error_ratio) == 1.0, "error_ratio != 1");
  c.expect(!value(M::ratio).has_value(), "ratio is defined");
  if (c.ok) c.detail = "rank_disparity=1 disparity=1 error_ratio=1 ratio=undefined";
  return c;
}

Check asha_invariants() {
  Check c;
  const auto start = Clock::now();
  const auto ladder = fp::make_ladder(25, 100, 2);
  c.expect(ladder.fidelities == std::vector<int>{25, 50, 100}, "ladder(25,100,2) != [25,50,100]");
  fp::AshaScheduler s(ladder);
  fp::Rng rng(99);
  int counter = 0;
  auto suggest = [&] {
    fp::Configuration config;
    config.values["n"] = static_cast<double>(++counter);
    return config;
  };
  std::map<std::string, double> quality;
  std::vector<fp::AshaJob> running;
  std::size_t dispatched = 0;
  while ((dispatched < 1000 || !running.empty()) && c.ok) {
    while (dispatched < 1000 && running.size() < 8) {
      auto job = s.next_job(suggest);
      quality.try_emplace(job.trial_id, fp::uniform01(rng));
      c.expect(ladder.rung_of(job.fidelity).has_value(), "job fidelity off the ladder");
      running.push_back(std::move(job));
      ++dispatched;
    }
    const auto pick = fp::uniform_index(rng, running.size());
    const auto job = running[pick];
    running.erase(running.begin() + static_cast<std::ptrdiff_t>(pick));
    s.report(job.trial_id, job.rung, quality[job.trial_id] + 0.05 * fp::uniform01(rng));
    for (std::size_t r = 0; r < ladder.size(); ++r) {
      c.expect(s.promoted_count(r) <= s.completed_count(r) / 2,
               fmt::format("rung {}: {} promoted of {} completed", r, s.promoted_count(r),
                           s.completed_count(r)));
    }
  }
  s.check_invariants();
  const double t = seconds_since(start);
  c.expect(t < 10.0, fmt::format("took {:.1f} s", t));
  if (c.ok) {
    c.detail = fmt::format("1000 jobs, completed per rung {}/{}/{}, {:.2f} s", s.completed_count(0),
                           s.completed_count(1), s.completed_count(2), t);
  }
  return c;
}

Check parego() {
  Check c;
  const auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
  c.expect(near(fp::parego(std::vector<double>{0.3, 0.9}, fp::WeightVector{{1.0, 0.0}}, 0.05), 0.315),
           "(0.3,0.9), λ=(1,0) != 0.315");
  c.expect(near(fp::parego(std::vector<double>{0.2, 0.4}, fp::WeightVector{{0.5, 0.5}}, 0.05), 0.215),
           "(0.2,0.4), λ=(0.5,0.5) != 0.215");
  c.expect(near(fp::parego(std::vector<double>{1.0, 1.0}, fp::WeightVector{{0.3, 0.7}}, 0.05), 0.75),
           "(1,1), λ=(0.3,0.7) != 0.75");
  fp::Rng rng(5);
  std::size_t checked = 0;
  while (checked < 10000 && c.ok) {
    const auto w = fp::sample_weights(rng, 2);
    if (!(w.lambda[0] > 0 && w.lambda[1] > 0)) continue;
    const std::vector<double> f = {fp::uniform01(rng), fp::uniform01(rng)};
    std::vector<double> g = f;
    // g weakly dominated by f, strictly worse in a random non-empty subset.
    const auto mask = 1 + fp::uniform_index(rng, 3);
    for (std::size_t k = 0; k < 2; ++k) {
      if (mask & (1u << k)) g[k] = f[k] + (1.0 - f[k]) * fp::uniform01(rng);
    }
    c.expect(fp::parego(f, w, 0.05) <= fp::parego(g, w, 0.05), "monotonicity violated");
    ++checked;
  }
  if (c.ok) c.detail = "3 formula examples, 10000 monotone triples";
  return c;
}

Check pareto_hypervolume() {
  Check c;
  fp::Rng rng(500);
  for (int rep = 0; rep < 100 && c.ok; ++rep) {
    std::vector<fp::ObjectiveVector> pts;
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < 500; ++i) {
      // Coarse values on half the repetitions force ties and duplicates.
      double a = fp::uniform01(rng);
      double b = fp::uniform01(rng);
      if (rep % 2 == 0) {
        a = std::floor(a * 20) / 20;
        b = std::floor(b * 20) / 20;
      }
      pts.push_back({{"a", a}, {"b", b}});
      raw.push_back({a, b});
    }
    c.expect(fp::pareto_front_indices(pts) == fp::oracle::front_indices(raw),
             fmt::format("front differs from brute force on repetition {}", rep));
  }
  const std::vector<fp::ObjectiveVector> front = {{{"a", 0.1}, {"b", 0.5}}, {{"a", 0.2}, {"b", 0.3}}};
  const double hv = fp::hypervolume2d(front, {{"a", 1.0}, {"b", 1.0}});
  const double grid = fp::oracle::grid_hypervolume({{0.1, 0.5}, {0.2, 0.3}}, 1.0, 1.0, 1e-3);
  c.expect(std::abs(hv - 0.61) <= 1e-9, fmt::format("hypervolume {} != 0.61", hv));
  c.expect(std::abs(grid - hv) <= 2e-3, fmt::format("grid oracle {} vs {}", grid, hv));
  if (c.ok) c.detail = fmt::format("100 x 500-point fronts, hv={:.12g}, grid={:.6g}", hv, grid);
  return c;
}

Check end_to_end() {
  Check c;
  const auto start = Clock::now();
  const auto space = fp::box_space(6);
  fp::BuiltinBackend backend(space, 100, 6);
  const fp::ObjectiveVector ref{{"f1", 1.1}, {"f2", 11.0}};
  int wins = 0;
  std::vector<std::string> pairs;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    fp::SearchSettings s;
    s.seed = seed;
    s.budget.max_trials = 150;
    const auto result = fp::run_search(space, backend, s);
    c.expect(result.ladder.fidelities == std::vector<int>{25, 50, 100}, "ladder != [25,50,100]");
    std::vector<fp::ObjectiveVector> front;
    for (auto i : result.front_indices) front.push_back(result.max_fidelity_points[i].mean);
    const double hv_search = fp::hypervolume2d(front, ref);

    // Random search gets the same number of full-fidelity equivalents.
    const auto n = static_cast<std::size_t>(std::ceil(result.consumed_full_fidelity - 1e-9));
    fp::Rng rng(fp::mix_seed(seed ^ 0xabcdef));
    std::vector<fp::ObjectiveVector> points;
    for (std::size_t i = 0; i < n; ++i) {
      auto r = backend.evaluate({"random", fp::sample(space, rng), 100, 0, std::nullopt}, {});
      points.push_back({{"f1", *r.objectives.at("f1")}, {"f2", *r.objectives.at("f2")}});
    }
    std::vector<fp::ObjectiveVector> random_front;
    for (auto i : fp::pareto_front_indices(points)) random_front.push_back(points[i]);
    const double hv_random = fp::hypervolume2d(random_front, ref);
    wins += hv_search > hv_random;
    pairs.push_back(fmt::format("{:.3f}/{:.3f}", hv_search, hv_random));
  }
  const double t = seconds_since(start);
  c.expect(wins >= 8, fmt::format("search beat random in {}/10 runs", wins));
  c.expect(t < 120.0, fmt::format("took {:.1f} s", t));
  c.detail = fmt::format("{}/10 wins over random, {:.1f} s [{}]", wins, t, fmt::join(pairs, " "));
  return c;
}

Check determinism() {
  Check c;
  auto run = [&](const std::string& name) {
    const auto out = fp::testing::scratch(name);
    const std::string path = out.string();
    const char* argv[] = {"fairpareto", "search",       "--backend", "builtin:zdt1", "--budget-trials",
                          "120",        "--seed",       "7",         "--workers",    "1",
                          "--out",      path.c_str()};
    std::ostringstream sink;
    const int code = fp::run_cli(static_cast<int>(std::size(argv)), argv, sink, sink);
    c.expect(code == fp::kExitOk, fmt::format("search exited {}", code));
    return read_text(out);
  };
  const auto a = run("acceptance_det_a.jsonl");
  const auto b = run("acceptance_det_b.jsonl");
  c.expect(!a.empty(), "empty run log");
  c.expect(a == b, "run logs differ");
  if (c.ok) c.detail = fmt::format("two 120-trial logs identical ({} bytes)", a.size());
  return c;
}

Check config_space() {
  Check c;
  const auto space = fp::dpn_fair_v1();
  fp::Rng rng(10000);
  for (int i = 0; i < 10000 && c.ok; ++i) {
    const auto config = fp::sample(space, rng);
    c.expect(fp::validate(space, config).empty(), "sample fails validation: " + fp::canonical_string(config));
    const double lr = config.continuous("lr");
    if (config.categorical("optimizer") == "SGD") {
      c.expect(lr >= 0.09 && lr <= 0.8, fmt::format("SGD lr {} out of range", lr));
    } else {
      c.expect(lr >= 1e-4 && lr <= 1e-2, fmt::format("Adam/AdamW lr {} out of range", lr));
    }
  }
  for (auto [optimizer, lr] : {std::pair<std::string, double>{"SGD", 0.2813}, {"SGD", 0.32348}, {"AdamW", 0.0006}}) {
    fp::Configuration config;
    config.values = {{"head", std::string("CosFace")}, {"optimizer", optimizer}, {"lr", lr},
                     {"op1", std::string("Conv3x3")},  {"op2", std::string("BnConv1x1")},
                     {"op3", std::string("Conv5x5Bn")}};
    c.expect(fp::validate(space, config).empty(), fmt::format("CosFace/{} lr {} rejected", optimizer, lr));
  }
  if (c.ok) c.detail = "10000 samples valid, 3 discovered configurations valid";
  return c;
}

Check protocol_golden() {
  Check c;
  const auto space = fp::dpn_fair_v1();
  struct Case {
    std::string transcript;
    fp::TrialStatus status;
    std::optional<fp::ObjectiveValues> objectives;
  };
  const std::vector<Case> cases = {
      {"golden", fp::TrialStatus::reported, fp::ObjectiveValues{{"error", 0.32}, {"rank_disparity", 1.70}}},
      {"undefined", fp::TrialStatus::reported,
       fp::ObjectiveValues{{"error", 0.25}, {"rank_ratio", std::nullopt}}},
      {"fail", fp::TrialStatus::failed, std::nullopt},
      {"wrong_fidelity", fp::TrialStatus::failed, std::nullopt},
  };
  for (const auto& k : cases) {
    fp::WorkerBackend backend(fp::testing::stub_command(k.transcript), std::chrono::seconds(20));
    fp::SearchSettings s;
    s.seed = 3;
    s.budget.max_trials = 1;
    const auto path = fp::testing::scratch("acceptance_" + k.transcript + ".jsonl");
    {
      fp::RunLogWriter writer(path);
      fp::run_search(space, backend, s, &writer);
    }
    const auto records = fp::load_run_log(path).records;
    c.expect(records.size() == 1, k.transcript + ": expected one record");
    if (records.size() != 1) continue;
    const auto& r = records[0];
    c.expect(r.trial_id == "t0", k.transcript + ": trial_id " + r.trial_id);
    c.expect(r.fidelity == 25, k.transcript + ": fidelity");
    c.expect(r.seed == fp::trial_seed(s.seed, 0), k.transcript + ": seed");
    c.expect(fp::validate(space, r.config).empty(), k.transcript + ": config invalid");
    c.expect(r.status == k.status, k.transcript + ": status");
    c.expect(r.objectives == k.objectives, k.transcript + ": objectives");
    c.expect(r.wall_time_s > 0.0, k.transcript + ": wall time");
  }

  const auto golden = read_text(FAIRPARETO_TEST_DATA "/golden_run.jsonl");
  const auto truncated = fp::testing::scratch("acceptance_truncated.jsonl");
  std::ofstream(truncated, std::ios::binary) << golden.substr(0, golden.size() - 25);
  const auto log = fp::load_run_log(truncated);
  c.expect(log.skipped_trailing == 1, fmt::format("skipped {} records", log.skipped_trailing));
  c.expect(log.records.size() == 2, fmt::format("loaded {} records", log.records.size()));
  if (c.ok) c.detail = "4 transcripts matched, truncated log skipped exactly 1 record";
  return c;
}

}  // namespace

int main() {
  ::setenv("FAIRPARETO_LOG", "error", 1);
  fp::configure_logging_from_env();
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"metric-oracle-equivalence", metric_oracle},
      {"worked-example", worked_example},
      {"asha-invariants", asha_invariants},
      {"parego", parego},
      {"pareto-hypervolume", pareto_hypervolume},
      {"end-to-end-search-quality", end_to_end},
      {"determinism", determinism},
      {"config-space", config_space},
      {"protocol-golden", protocol_golden},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    failed += !c.ok;
    std::cout << (c.ok ? "PASS " : "FAIL ") << name << ": " << c.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
