#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "kiefer/error.hpp"
#include "kiefer/stats.hpp"

using namespace kiefer;

TEST(Moments, SmallExample) {
  const std::vector<double> x{1, 2, 3, 4};
  const auto m = moments(x);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.variance, 5.0 / 3.0);
  EXPECT_NEAR(m.skewness, 0.0, 1e-15);
  EXPECT_NEAR(m.excess_kurtosis, 1.64 - 3.0, 1e-12);
  EXPECT_EQ(m.count, 4u);
  EXPECT_THROW(moments(std::vector<double>{1.0}), DomainError);
}

TEST(Moments, ConstantSample) {
  const auto m = moments(std::vector<double>(10, 3.0));
  EXPECT_EQ(m.variance, 0.0);
  EXPECT_EQ(m.skewness, 0.0);
  EXPECT_EQ(m.excess_kurtosis, 0.0);
}

TEST(Moments, NormalSampleWithinSe) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> z(1.0, 2.0);
  std::vector<double> x(20000);
  for (auto& v : x) v = z(gen);
  const auto m = moments(x);
  EXPECT_NEAR(m.mean, 1.0, 5 * m.mean_se());
  EXPECT_NEAR(m.variance, 4.0, 5 * m.variance_se);
  EXPECT_NEAR(m.skewness, 0.0, 5 * m.skewness_se());
  EXPECT_NEAR(m.excess_kurtosis, 0.0, 5 * m.kurtosis_se());
}

TEST(Covariance, ExactAndSymmetric) {
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8};
  EXPECT_DOUBLE_EQ(covariance_with_se(x, y).first, 10.0 / 3.0);
  EXPECT_DOUBLE_EQ(covariance_with_se(x, y).first, covariance_with_se(y, x).first);
  EXPECT_DOUBLE_EQ(correlation(x, y), 1.0);
  EXPECT_THROW(covariance_with_se(x, std::vector<double>{1, 2}), DimensionError);
  EXPECT_EQ(correlation(x, std::vector<double>(4, 1.0)), 0.0);
}

TEST(Quantile, Type7) {
  const std::vector<double> x{4, 1, 3, 2};
  EXPECT_EQ(quantile(x, 0.0), 1.0);
  EXPECT_EQ(quantile(x, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile(x, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(x, 0.25), 1.75);
  EXPECT_THROW(quantile({}, 0.5), DomainError);
}

TEST(IqrVariance, NormalConsistentAndRobust) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> z(0.0, 3.0);
  std::vector<double> x(100000);
  for (auto& v : x) v = z(gen);
  EXPECT_NEAR(iqr_variance(x), 9.0, 0.3);
  x[0] = 1e12;
  EXPECT_NEAR(iqr_variance(x), 9.0, 0.3);
}

TEST(Jackknife, MeanMatchesClassicalSe) {
  // For the sample mean with one value per group the jackknife SE is s / sqrt(n).
  const std::vector<double> x{3, 1, 4, 1, 5, 9, 2, 6, 5, 3};
  const auto se = jackknife_se(x.size(), x.size(), [&](const std::vector<std::size_t>& idx) {
    double s = 0;
    for (auto i : idx) s += x[i];
    return s / static_cast<double>(idx.size());
  });
  const auto m = moments(x);
  EXPECT_NEAR(se, std::sqrt(m.variance / 10.0), 1e-12);
  EXPECT_THROW(jackknife_se(3, 4, [](const auto&) { return 0.0; }), DomainError);
}

TEST(FitLine, ExactLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = fit_line(x, y);
  EXPECT_DOUBLE_EQ(f.slope, 2.0);
  EXPECT_DOUBLE_EQ(f.intercept, 1.0);
  EXPECT_DOUBLE_EQ(f.r_squared, 1.0);
  EXPECT_THROW(fit_line(std::vector<double>{1, 1}, std::vector<double>{0, 1}), DomainError);
}
