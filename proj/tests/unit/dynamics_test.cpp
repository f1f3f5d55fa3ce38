#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kiefer/dynamics.hpp"
#include "kiefer/error.hpp"
#include "kiefer/stats.hpp"

using namespace kiefer;

class LsvBranches : public ::testing::TestWithParam<double> {};

TEST_P(LsvBranches, ExactIdentities) {
  const double g = GetParam();
  EXPECT_EQ(lsv_apply(0.5, g), 1.0);
  EXPECT_EQ(lsv_apply(0.75, g), 0.5);
  EXPECT_EQ(lsv_apply(0.0, g), 0.0);
  EXPECT_EQ(lsv_apply(1.0, g), 1.0);
}

TEST_P(LsvBranches, MonotoneOnEachBranchAndExpanding) {
  const double g = GetParam();
  double prev = lsv_apply(0.0, g);
  for (int i = 1; i <= 5000; ++i) {
    const double x = 0.5 * i / 5000.0;
    const double y = lsv_apply(x, g);
    ASSERT_GT(y, prev) << x;
    ASSERT_GT(y, x) << x;
    prev = y;
  }
  prev = -1.0;
  for (int i = 1; i <= 5000; ++i) {
    const double x = 0.5 + 0.5 * i / 5000.0;
    const double y = lsv_apply(x, g);
    ASSERT_GT(y, prev) << x;
    ASSERT_GE(y, 0.0);
    ASSERT_LE(y, 1.0);
    prev = y;
  }
}

TEST_P(LsvBranches, LeftBranchFormula) {
  const double g = GetParam();
  for (double x : {0.01, 0.1, 0.25, 0.4}) {
    EXPECT_DOUBLE_EQ(lsv_apply(x, g), x * (1.0 + std::pow(2.0 * x, g)));
  }
}

INSTANTIATE_TEST_SUITE_P(Gammas, LsvBranches, ::testing::Values(0.1, 0.3, 0.5, 0.9));

TEST(LsvApply, DomainErrors) {
  EXPECT_THROW(lsv_apply(-0.1, 0.3), DomainError);
  EXPECT_THROW(lsv_apply(1.1, 0.3), DomainError);
  EXPECT_THROW(lsv_apply(0.3, 0.0), DomainError);
  EXPECT_THROW(lsv_apply(0.3, 1.0), DomainError);
  EXPECT_THROW(lsv_apply(std::nan(""), 0.3), DomainError);
}

TEST(ProcessSpec, Validation) {
  EXPECT_THROW(ProcessSpec::lsv(0.0, 1).validate(), DomainError);
  EXPECT_THROW(ProcessSpec::lsv(1.0, 1).validate(), DomainError);
  EXPECT_THROW(ProcessSpec::linear(1.0, 1).validate(), DomainError);
  EXPECT_NO_THROW(ProcessSpec::linear(0.5, 1).validate());
  EXPECT_EQ(parse_process_kind("lsv"), ProcessKind::Lsv);
  EXPECT_EQ(parse_process_kind(to_string(ProcessKind::Linear)), ProcessKind::Linear);
  EXPECT_THROW(parse_process_kind("gauss"), DomainError);
}

TEST(ProcessSpec, TruncationMeetsMachineEpsilon) {
  const auto spec = ProcessSpec::linear(0.9, 1);
  const auto K = spec.truncation();
  EXPECT_LT(std::pow(0.9, static_cast<double>(K)), std::ldexp(1.0, -52));
  EXPECT_GE(std::pow(0.9, static_cast<double>(K - 1)), std::ldexp(1.0, -52));
}

TEST(Trajectory, DeterministicGivenSeed) {
  const auto spec = ProcessSpec::iid(123);
  const auto a = generate_trajectory(spec, 5);
  const auto b = generate_trajectory(spec, 5);
  ASSERT_EQ(a.size(), 5u);
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  const auto c = generate_trajectory(spec.reseeded(124), 5);
  EXPECT_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}

TEST(Trajectory, LsvDeterministicAndInRange) {
  const auto spec = ProcessSpec::lsv(0.3, 7);
  const auto a = generate_trajectory(spec, 1'000'000);
  const auto b = generate_trajectory(spec, 1'000'000);
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  double sum = 0.0;
  for (double x : a.values()) {
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 1.0);
    sum += x;
  }
  EXPECT_TRUE(std::isfinite(sum / static_cast<double>(a.size())));
}

TEST(Trajectory, LsvFollowsTheMap) {
  const auto t = generate_trajectory(ProcessSpec::lsv(0.3, 11, 100), 1000);
  for (std::size_t i = 1; i < t.size(); ++i) ASSERT_EQ(t[i], lsv_apply(t[i - 1], 0.3));
}

TEST(Trajectory, LsvMassNearNeutralFixedPoint) {
  const auto t = generate_trajectory(ProcessSpec::lsv(0.3, 5), 10'000'000);
  const auto near = std::count_if(t.values().begin(), t.values().end(), [](double x) { return x <= 0.1; });
  EXPECT_GT(static_cast<double>(near) / static_cast<double>(t.size()), 0.1);
}

TEST(Trajectory, IidUniformMoments) {
  const auto t = generate_trajectory(ProcessSpec::iid(8), 200'000);
  const Moments m = moments(t.values());
  EXPECT_NEAR(m.mean, 0.5, 5 * m.mean_se());
  EXPECT_NEAR(m.variance, 1.0 / 12.0, 5 * m.variance_se);
}

TEST(Trajectory, LinearProcessStationaryMoments) {
  // X = sum rho^k eps_k with eps uniform(-1/2, 1/2): Var = (1/12) / (1 - rho^2),
  // lag-1 autocorrelation rho.
  const double rho = 0.6;
  const auto t = generate_trajectory(ProcessSpec::linear(rho, 9), 400'000);
  const auto v = t.values();
  const Moments m = moments(v);
  EXPECT_NEAR(m.mean, 0.0, 0.01);
  EXPECT_NEAR(m.variance, (1.0 / 12.0) / (1.0 - rho * rho), 0.005);
  const std::vector<double> x(v.begin(), v.end() - 1), y(v.begin() + 1, v.end());
  EXPECT_NEAR(correlation(x, y), rho, 0.01);
}

TEST(Trajectory, LinearRecursionMatchesTruncatedSum) {
  // The lag-k autocorrelation of the truncated sum is rho^k exactly up to
  // the truncation error; compare against the analytic value.
  const double rho = 0.3;
  const auto t = generate_trajectory(ProcessSpec::linear(rho, 10), 400'000);
  const auto v = t.values();
  for (std::size_t k : {2u, 3u}) {
    const std::vector<double> x(v.begin(), v.end() - static_cast<std::ptrdiff_t>(k));
    const std::vector<double> y(v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    EXPECT_NEAR(correlation(x, y), std::pow(rho, static_cast<double>(k)), 0.01);
  }
}

TEST(Trajectory, Reversed) {
  const auto t = generate_trajectory(ProcessSpec::iid(1), 10);
  const auto r = t.reversed();
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(r[i], t[9 - i]);
}

TEST(Trajectory, Errors) {
  EXPECT_THROW(generate_trajectory(ProcessSpec::iid(1), 0), RangeError);
  EXPECT_THROW(Trajectory({}, ProcessSpec::iid(1)), RangeError);
  EXPECT_THROW(generate_trajectory(ProcessSpec::lsv(1.5, 1), 10), DomainError);
}
