#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kiefer/dependence.hpp"
#include "kiefer/error.hpp"
#include "kiefer/rng.hpp"

using namespace kiefer;

namespace {

Trajectory iid(std::size_t n, std::uint64_t seed) { return generate_trajectory(ProcessSpec::iid(seed), n); }

}  // namespace

TEST(LagCovariance, MatchesBruteForce) {
  const auto t = generate_trajectory(ProcessSpec::lsv(0.3, 4), 5000);
  const EcdfModel F = EcdfModel::fit(generate_trajectory(ProcessSpec::lsv(0.3, 5), 5000));
  const auto x = t.values();
  for (std::size_t k : {0u, 1u, 7u}) {
    // orbit convention: 1{X <= s} at the later index, 1{X <= s2} at the earlier
    double acc = 0.0;
    for (std::size_t i = 0; i + k < x.size(); ++i) {
      acc += ((x[i + k] <= 0.3) - F(0.3)) * ((x[i] <= 0.6) - F(0.6));
    }
    EXPECT_NEAR(lag_covariance(t, F, 0.3, 0.6, k), acc / static_cast<double>(x.size() - k), 1e-12);
  }
  const Trajectory fwd(std::vector<double>(x.begin(), x.end()), ProcessSpec::iid(0));
  double acc = 0.0;
  for (std::size_t i = 0; i + 3 < x.size(); ++i) {
    acc += ((x[i] <= 0.3) - F(0.3)) * ((x[i + 3] <= 0.6) - F(0.6));
  }
  EXPECT_NEAR(lag_covariance(fwd, F, 0.3, 0.6, 3), acc / static_cast<double>(x.size() - 3), 1e-12);
}

TEST(LagCovariance, IidExamples) {
  const auto t = iid(1'000'000, 6);
  const EcdfModel F = EcdfModel::fit(iid(1'000'000, 7));
  const std::vector<std::size_t> lags{0, 1};
  const auto p = lag_covariance_profile(t, F, 0.5, 0.5, lags);
  EXPECT_NEAR(p.values[0], 0.25, 3 * p.se[0] + 1e-3);
  EXPECT_NEAR(p.values[1], 0.0, 3 * p.se[1]);
  EXPECT_NEAR(p.values[1], lag_covariance(t, F, 0.5, 0.5, 1), 1e-12);
}

TEST(LagCovariance, LsvPositiveDecaying) {
  const auto t = generate_trajectory(ProcessSpec::lsv(0.3, 8), 10'000'000);
  const EcdfModel F = EcdfModel::fit(generate_trajectory(ProcessSpec::lsv(0.3, 9), 10'000'000));
  const std::vector<std::size_t> lags{1, 2, 4, 8, 16, 32};
  const auto p = lag_covariance_profile(t, F, 0.5, 0.5, lags);
  for (std::size_t k = 0; k < lags.size(); ++k) {
    EXPECT_GT(p.values[k], 0.0) << lags[k];
    if (k > 0) EXPECT_LT(p.values[k], p.values[k - 1]) << lags[k];
  }
}

TEST(LagCovariance, Errors) {
  const auto t = iid(10, 1);
  const EcdfModel F({0.5});
  EXPECT_THROW(lag_covariance(t, F, 0.5, 0.5, 9), RangeError);
  const std::vector<std::size_t> lags{1};
  EXPECT_THROW(lag_covariance_profile(t, F, 0.5, 0.5, lags, 1), DomainError);
}

TEST(Beta, IidBelowNoiseFloor) {
  const auto t = iid(1'000'000, 10);
  const auto b = estimate_beta(t, 1, 16);
  EXPECT_LT(b.value, independence_noise_floor(16, b.pairs));
  EXPECT_EQ(b.pairs, 999'999u);
  EXPECT_EQ(b.bins, 16u);
}

TEST(Beta, UnitIntervalAndDeterministicCase) {
  // x_{i+1} a function of x_i with many bins: close to the maximal dependence
  std::vector<double> v(20000);
  Rng rng(3);
  for (auto& x : v) x = rng.uniform();
  const Trajectory t(v, ProcessSpec::iid(0));
  for (std::size_t k : {1u, 5u}) {
    const auto b = estimate_beta(t, k, 8);
    EXPECT_GE(b.value, 0.0);
    EXPECT_LE(b.value, 1.0);
  }
  std::vector<double> copy(20000);
  for (std::size_t i = 0; i < copy.size(); ++i) copy[i] = static_cast<double>(i % 2);
  const auto b = estimate_beta(Trajectory(copy, ProcessSpec::iid(0)), 1, 2);
  EXPECT_GE(b.value, 0.0);
  EXPECT_LE(b.value, 1.0);
}

TEST(Beta, InvariantUnderMonotoneRelabeling) {
  const auto t = generate_trajectory(ProcessSpec::lsv(0.3, 11), 200'000);
  std::vector<double> y(t.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::exp(3.0 * t[i]);
  const Trajectory u(y, t.spec());
  for (std::size_t k : {1u, 4u}) EXPECT_EQ(estimate_beta(t, k, 32).value, estimate_beta(u, k, 32).value);
}

TEST(Beta, ProfileMatchesSingleCalls) {
  const auto t = generate_trajectory(ProcessSpec::lsv(0.3, 12), 100'000);
  const std::vector<std::size_t> lags{1, 3, 9};
  const auto p = estimate_beta_profile(t, lags, 16);
  const auto s = shuffled_beta_profile(t, lags, 16, 77);
  for (std::size_t k = 0; k < lags.size(); ++k) {
    EXPECT_EQ(p[k].value, estimate_beta(t, lags[k], 16).value);
    EXPECT_EQ(s[k].value, shuffled_beta_floor(t, lags[k], 16, 77).value);
  }
}

TEST(Beta, LsvDecaysToShuffledFloor) {
  const auto t = generate_trajectory(ProcessSpec::lsv(0.3, 13), 10'000'000);
  const std::vector<std::size_t> lags{1, 2, 4, 8, 16, 32, 64, 128};
  const auto p = estimate_beta_profile(t, lags, 32);
  const auto f = shuffled_beta_profile(t, lags, 32, 14);
  std::vector<std::pair<double, double>> excess;
  for (std::size_t k = 0; k < lags.size(); ++k) {
    const double e = p[k].value - f[k].value;
    if (e > 0.0) excess.emplace_back(static_cast<double>(lags[k]), e);
  }
  ASSERT_GE(excess.size(), 3u);
  EXPECT_LT(fit_decay(excess).slope, 0.0);
  EXPECT_GT(p.front().value, 10 * f.front().value);
}

TEST(Beta, TooFewPairs) {
  const auto t = iid(1000, 1);
  EXPECT_THROW(estimate_beta(t, 1, 16), EstimationError);
  try {
    estimate_beta(t, 1, 16);
  } catch (const EstimationError& e) {
    EXPECT_EQ(e.pairs(), 999u);
    EXPECT_EQ(e.bins(), 16u);
  }
  EXPECT_THROW(estimate_beta(t, 0, 1), DomainError);
}

TEST(NoiseFloor, ShrinksWithPairs) {
  EXPECT_GT(independence_noise_floor(16, 10'000), independence_noise_floor(16, 1'000'000));
  EXPECT_GT(independence_noise_floor(64, 1'000'000), independence_noise_floor(16, 1'000'000));
  EXPECT_THROW(independence_noise_floor(0, 10), DomainError);
}

TEST(FitDecay, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (double k = 1; k <= 50; ++k) pts.emplace_back(k, std::pow(k, -2.0));
  const auto fit = fit_decay(pts);
  EXPECT_NEAR(fit.slope, -2.0, 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(fit.points, 50u);
  EXPECT_EQ(fit.min_lag, 1.0);
  EXPECT_EQ(fit.max_lag, 50.0);
}

TEST(FitDecay, FlatAndErrors) {
  std::vector<std::pair<double, double>> flat{{1, 0.3}, {2, 0.3}, {5, 0.3}};
  EXPECT_NEAR(fit_decay(flat).slope, 0.0, 1e-12);
  std::vector<std::pair<double, double>> two{{1, 0.3}, {2, 0.3}};
  EXPECT_THROW(fit_decay(two), DomainError);
  std::vector<std::pair<double, double>> neg{{1, 0.3}, {2, -0.3}, {3, 0.1}};
  EXPECT_THROW(fit_decay(neg), DomainError);
}
