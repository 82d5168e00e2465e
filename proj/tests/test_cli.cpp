#include <gtest/gtest.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fairpareto/cli.hpp"
#include "fairpareto/common.hpp"
#include "fairpareto/paretostats.hpp"
#include "fairpareto/store.hpp"
#include "support/paths.hpp"

namespace fp = fairpareto;
using fp::testing::scratch;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fairpareto");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = fp::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary | std::ios::trunc) << text;
}

fp::TrialRecord record(const std::string& id, double lr, int fidelity, double error, double disparity) {
  fp::Configuration c;
  c.values = {{"head", std::string("CosFace")}, {"optimizer", std::string("SGD")}, {"lr", lr},
              {"op1", std::string("Conv3x3")},  {"op2", std::string("Conv3x3")},   {"op3", std::string("Conv3x3")}};
  return {id, c, 1, fidelity, fp::TrialStatus::reported,
          fp::ObjectiveValues{{"error", error}, {"rank_disparity", disparity}}, 1.0};
}

/// Four configurations at fidelity 100; (0.1,3) and (0.3,1) form the front,
/// (0.2,4) and (0.4,2) are dominated. A fidelity-50 record is ignored.
std::filesystem::path small_log() {
  const auto path = scratch("cli_small.jsonl");
  fp::RunLogWriter w(path);
  w.append(record("t0", 0.11, 100, 0.1, 3.0));
  w.append(record("t1", 0.12, 100, 0.2, 4.0));
  w.append(record("t2", 0.13, 100, 0.3, 1.0));
  w.append(record("t3", 0.14, 100, 0.4, 2.0));
  w.append(record("t4", 0.15, 50, 0.0, 0.0));
  return path;
}

std::size_t count_on_front(const std::string& csv) {
  std::size_t n = 0;
  for (const auto& l : lines(csv)) n += l.ends_with(",true");
  return n;
}

}  // namespace

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { ::setenv("FAIRPARETO_LOG", "error", 1); }
  void TearDown() override { ::unsetenv("FAIRPARETO_LOG"); }
};

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({}).code, fp::kExitConfig);
  EXPECT_EQ(cli({"bogus"}).code, fp::kExitConfig);
  EXPECT_EQ(cli({"search"}).code, fp::kExitConfig);
  EXPECT_EQ(cli({"--help"}).code, fp::kExitOk);
  EXPECT_EQ(cli({"search", "--backend", "nope:x", "--budget-trials", "3"}).code, fp::kExitConfig);
  EXPECT_EQ(cli({"search", "--backend", "builtin:zdt1"}).code, fp::kExitConfig);
}

TEST_F(Cli, SearchWritesLogAndFront) {
  const auto out = scratch("cli_search.jsonl");
  const auto r = cli({"search", "--space", "box6", "--backend", "builtin:zdt1", "--budget-trials",
                      "40", "--seed", "3", "--out", out.string()});
  ASSERT_EQ(r.code, fp::kExitOk) << r.err;
  EXPECT_EQ(fp::load_run_log(out).records.size(), 40u);
  EXPECT_TRUE(r.out.starts_with("config_key,f1_mean,f1_stderr,f2_mean,f2_stderr,n_seeds,on_front\n"));
  EXPECT_GE(count_on_front(r.out), 1u);
}

TEST_F(Cli, SingleTrialSearch) {
  const auto out = scratch("cli_one.jsonl");
  const auto r = cli({"search", "--backend", "builtin:zdt1", "--budget-trials", "1", "--out", out.string()});
  ASSERT_EQ(r.code, fp::kExitOk) << r.err;
  EXPECT_EQ(lines(r.out).size(), 1u);
  EXPECT_EQ(fp::load_run_log(out).records.size(), 1u);
}

TEST_F(Cli, InvalidSpaceFileNamesTheParameter) {
  const auto space = scratch("bad_space.json");
  write_text(space, R"({"parameters":[{"name":"lr","kind":"continuous","bounds":[0.5,0.1]}]})");
  const auto r = cli({"search", "--space", space.string(), "--backend", "builtin:zdt1",
                      "--budget-trials", "3", "--out", scratch("unused.jsonl").string()});
  EXPECT_EQ(r.code, fp::kExitConfig);
  EXPECT_NE(r.err.find("lr"), std::string::npos) << r.err;
}

TEST_F(Cli, WorkerFailuresExitThree) {
  const auto r = cli({"search", "--backend", "worker:" + fp::testing::stub_command("fail"),
                      "--budget-trials", "10", "--max-failures", "2", "--out",
                      scratch("cli_fail.jsonl").string()});
  EXPECT_EQ(r.code, fp::kExitBackend);
}

TEST_F(Cli, EvalEmbeddingsWorkedExample) {
  const auto r = cli({"eval-embeddings", "--file", FAIRPARETO_TEST_DATA "/worked_example.csv",
                      "--metrics", "rank_disparity,error"});
  ASSERT_EQ(r.code, fp::kExitOk) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0], "metric,value");
  EXPECT_EQ(l[1], "rank_disparity,1");
}

TEST_F(Cli, EvalEmbeddingsMirroredGroupsHaveZeroDisparity) {
  const auto path = scratch("mirrored.csv");
  write_text(path,
             "image_id,identity,group,e0,e1\n"
             "a1,a,A,0,0\na2,a,A,0,1\nb1,b,A,5,0\nb2,b,A,5,2\n"
             "c1,c,B,0,10\nc2,c,B,0,11\nd1,d,B,5,10\nd2,d,B,5,12\n");
  const auto r = cli({"eval-embeddings", "--file", path.string(), "--metrics", "rank_disparity,disparity"});
  ASSERT_EQ(r.code, fp::kExitOk) << r.err;
  EXPECT_EQ(lines(r.out)[1], "rank_disparity,0");
  EXPECT_EQ(lines(r.out)[2], "disparity,0");
}

TEST_F(Cli, EvalEmbeddingsRejectsBadInput) {
  const auto one_group = scratch("one_group.csv");
  write_text(one_group, "image_id,identity,group,e0\na1,a,A,0\na2,a,A,1\n");
  EXPECT_EQ(cli({"eval-embeddings", "--file", one_group.string()}).code, fp::kExitConfig);

  const auto no_group = scratch("no_group.csv");
  write_text(no_group, "image_id,identity,e0\na1,a,0\na2,a,1\n");
  const auto r = cli({"eval-embeddings", "--file", no_group.string()});
  EXPECT_EQ(r.code, fp::kExitConfig);
  EXPECT_NE(r.err.find("group"), std::string::npos) << r.err;

  EXPECT_EQ(cli({"eval-embeddings", "--file", scratch("absent.csv").string()}).code, fp::kExitConfig);
  EXPECT_EQ(cli({"eval-embeddings", "--file", FAIRPARETO_TEST_DATA "/worked_example.csv", "--metrics",
                 "beauty"})
                .code,
            fp::kExitConfig);
}

TEST_F(Cli, ParetoSelectsFrontAtTopFidelity) {
  const auto log = small_log();
  const auto r = cli({"pareto", "--runs", log.string()});
  ASSERT_EQ(r.code, fp::kExitOk) << r.err;
  EXPECT_EQ(lines(r.out).size(), 5u);
  EXPECT_EQ(count_on_front(r.out), 2u);

  std::istringstream in(r.out);
  const auto rows = fp::read_front_csv(in);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& row : rows) {
    const double e = row.point.mean.at("error");
    EXPECT_EQ(row.on_front, e == 0.1 || e == 0.3) << e;
  }
}

TEST_F(Cli, ParetoFilterAndFidelity) {
  const auto log = small_log();
  auto r = cli({"pareto", "--runs", log.string(), "--filter", "error>0.15"});
  ASSERT_EQ(r.code, fp::kExitOk) << r.err;
  // (0.2,4) joins the front once (0.1,3) is filtered out.
  EXPECT_EQ(lines(r.out).size(), 4u);
  EXPECT_EQ(count_on_front(r.out), 2u);

  r = cli({"pareto", "--runs", log.string(), "--filter", "error<0.3"});
  ASSERT_EQ(r.code, fp::kExitOk) << r.err;
  std::istringstream kept(r.out);
  const auto rows = fp::read_front_csv(kept);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& row : rows) EXPECT_LT(row.point.mean.at("error"), 0.3);

  r = cli({"pareto", "--runs", log.string(), "--fidelity", "50"});
  ASSERT_EQ(r.code, fp::kExitOk);
  EXPECT_EQ(lines(r.out).size(), 2u);

  EXPECT_EQ(cli({"pareto", "--runs", log.string(), "--objectives", "error,beauty"}).code, fp::kExitConfig);
  EXPECT_EQ(cli({"pareto", "--runs", log.string(), "--filter", "beauty<1"}).code, fp::kExitConfig);
  EXPECT_EQ(cli({"pareto", "--runs", log.string(), "--filter", "error<<1"}).code, fp::kExitConfig);
  EXPECT_EQ(cli({"pareto", "--runs", scratch("absent.jsonl").string()}).code, fp::kExitConfig);
}

TEST_F(Cli, ParetoMergesRunsAndAggregatesSeeds) {
  const auto a = scratch("merge_a.jsonl");
  const auto b = scratch("merge_b.jsonl");
  {
    fp::RunLogWriter wa(a);
    wa.append(record("t0", 0.11, 100, 0.1, 3.0));
    fp::RunLogWriter wb(b);
    wb.append(record("t0", 0.11, 100, 0.3, 1.0));
  }
  const auto r = cli({"pareto", "--runs", a.string() + "," + b.string(), "--aggregate-seeds"});
  ASSERT_EQ(r.code, fp::kExitOk) << r.err;
  std::istringstream in(r.out);
  const auto rows = fp::read_front_csv(in);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].point.mean.at("error"), 0.2);
  EXPECT_DOUBLE_EQ(rows[0].point.standard_error.at("error"), 0.1);
  EXPECT_EQ(rows[0].point.n_seeds, 2u);
}

TEST_F(Cli, ReportCorrelation) {
  const auto path = scratch("corr.jsonl");
  {
    fp::RunLogWriter w(path);
    for (int i = 0; i < 5; ++i) w.append(record("t" + std::to_string(i), 0.1 + i * 0.01, 100, i, 2.0 * i + 1));
  }
  auto r = cli({"report", "--runs", path.string()});
  ASSERT_EQ(r.code, fp::kExitOk) << r.err;
  EXPECT_EQ(lines(r.out)[1], "error,rank_disparity,5,1");

  r = cli({"report", "--runs", path.string(), "--filter", "error<1"});
  EXPECT_EQ(lines(r.out)[1], "error,rank_disparity,1,undefined");
  EXPECT_EQ(cli({"report", "--runs", path.string(), "--correlation", "error"}).code, fp::kExitConfig);
}

TEST_F(Cli, ReevaluateFrontMembers) {
  const auto log = small_log();
  const auto out = scratch("reeval.jsonl");
  const auto r = cli({"reevaluate", "--runs", log.string(), "--backend",
                      "worker:" + fp::testing::stub_command("golden"), "--seeds", "3", "--out", out.string()});
  ASSERT_EQ(r.code, fp::kExitOk) << r.err;
  const auto records = fp::load_run_log(out).records;
  ASSERT_EQ(records.size(), 6u);
  EXPECT_EQ(records[0].trial_id, "r0s0");
  EXPECT_EQ(records[5].trial_id, "r1s2");
  for (const auto& rec : records) EXPECT_EQ(rec.fidelity, 100);
}
