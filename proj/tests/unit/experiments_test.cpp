#include <gtest/gtest.h>

#include <algorithm>

#include "kiefer/error.hpp"
#include "kiefer/experiments.hpp"
#include "kiefer/report.hpp"

using namespace kiefer;

namespace {

ExperimentContext small_ctx(unsigned threads = 1) {
  ExperimentContext ctx;
  ctx.seed = 12;
  ctx.threads = threads;
  ctx.calibration_length = 100'000;
  return ctx;
}

}  // namespace

TEST(Validation, RejectsUnknownKindKeyAndValue) {
  EXPECT_THROW(validate_experiment({"a", "nope", {}}), DomainError);
  EXPECT_THROW(validate_experiment({"a", "simulate", {{"bogus", "1"}}}), DomainError);
  EXPECT_THROW(validate_experiment({"a", "simulate", {{"n", "ten"}}}), DomainError);
  EXPECT_THROW(validate_experiment({"a", "simulate", {{"process", "lsv"}, {"gamma", "1.5"}}}), DomainError);
  EXPECT_THROW(validate_experiment({"a", "boundary", {{"process", "iid"}}}), DomainError);
  EXPECT_NO_THROW(validate_experiment({"a", "simulate", {{"n", "2^10"}, {"process", "lsv"}}}));
  EXPECT_NO_THROW(validate_experiment({"a", "lambda", {{"n", "1e5"}, {"r", "2"}}}));
}

TEST(Validation, UnknownKeyIsNamed) {
  try {
    validate_experiment({"a", "clt", {{"replicats", "10"}}});
    FAIL() << "no throw";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("replicats"), std::string::npos);
  }
}

TEST(Presets, AllValidate) {
  for (const auto* name : {"iid-anchors", "lsv", "boundary", "coupling", "kiefer"}) {
    const auto suite = preset_suite(name);
    EXPECT_FALSE(suite.empty()) << name;
    for (const auto& e : suite) EXPECT_NO_THROW(validate_experiment(e)) << name << "/" << e.name;
  }
  EXPECT_THROW(preset_suite("nope"), DomainError);
}

TEST(Suite, EmptySuiteRunsNothing) {
  SuiteConfig cfg;
  int calls = 0;
  EXPECT_TRUE(run_suite(cfg, [&](const ExperimentReport&) { ++calls; }).empty());
  EXPECT_EQ(calls, 0);
}

TEST(Suite, DuplicateNamesRejectedBeforeRunning) {
  SuiteConfig cfg;
  cfg.experiments = {{"x", "simulate", {{"n", "100"}}}, {"x", "simulate", {{"n", "100"}}}};
  int calls = 0;
  EXPECT_THROW(run_suite(cfg, [&](const ExperimentReport&) { ++calls; }), DomainError);
  EXPECT_EQ(calls, 0);
}

TEST(RunExperiment, SimulateRecordsParamsAndSeed) {
  const auto r = run_experiment({"sim", "simulate", {{"n", "2^8"}, {"process", "lsv"}}}, small_ctx());
  EXPECT_EQ(r.name, "sim");
  EXPECT_EQ(r.kind, "simulate");
  EXPECT_EQ(r.table("trajectory").rows.size(), 256u);
  EXPECT_FALSE(r.seeds.empty());
  EXPECT_FALSE(r.note.empty());
  const auto has = [&](const std::string& k, const std::string& v) {
    return std::find(r.params.begin(), r.params.end(), std::make_pair(k, v)) != r.params.end();
  };
  EXPECT_TRUE(has("n", "256"));
  EXPECT_TRUE(has("process", "lsv"));
}

TEST(RunExperiment, IidLambdaNearBridge) {
  const auto r = run_experiment({"lam", "lambda", {{"n", "2^18"}, {"r", "2"}}}, small_ctx());
  EXPECT_TRUE(r.passed()) << r.criteria.front().detail;
  const auto& s = r.statistic("lambda@0.5/0.5");
  EXPECT_NEAR(s.value, 0.25, 5 * s.se);
}

TEST(RunExperiment, SeedsDependOnName) {
  const auto a = run_experiment({"a", "simulate", {{"n", "64"}}}, small_ctx());
  const auto b = run_experiment({"b", "simulate", {{"n", "64"}}}, small_ctx());
  EXPECT_NE(a.table("trajectory").rows, b.table("trajectory").rows);
}

TEST(RunExperiment, ThreadCountDoesNotChangeResults) {
  const ExperimentSpec spec{"clt", "clt",
                            {{"n", "2^10"}, {"replicates", "500"}, {"lambda_n", "2^16"}, {"r", "2"}}};
  const auto one = run_experiment(spec, small_ctx(1));
  const auto three = run_experiment(spec, small_ctx(3));
  EXPECT_EQ(statistics_csv(one), statistics_csv(three));
  ASSERT_EQ(one.tables.size(), three.tables.size());
  for (std::size_t i = 0; i < one.tables.size(); ++i) EXPECT_EQ(to_csv(one.tables[i]), to_csv(three.tables[i]));
}

TEST(Boundary, ZeroLevelExcluded) {
  BoundaryOptions opt;
  opt.levels = {0.0, 0.3, 0.6};
  opt.n_values = {1 << 8, 1 << 10};
  opt.replicates = 40;
  opt.burn_in = 1000;
  const auto r = boundary_degeneracy(opt, small_ctx());
  EXPECT_NE(std::find(r.params.begin(), r.params.end(), std::make_pair(std::string("excluded_level"), std::string("0"))),
            r.params.end());
  opt.levels = {0.0, 0.3};
  EXPECT_THROW(boundary_degeneracy(opt, small_ctx()), DomainError);
}
