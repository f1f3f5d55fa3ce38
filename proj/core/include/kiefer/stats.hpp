#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kiefer {

/// Sample moments of one replicate column.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  std::size_t count = 0;

  double mean_se() const;
  /// sqrt((m4 - s^4) / N), the large-sample SE of the sample variance.
  double variance_se = 0.0;
  /// Normal-theory SEs sqrt(6/N), sqrt(24/N).
  double skewness_se() const;
  double kurtosis_se() const;
};

Moments moments(std::span<const double> x);

/// Sample covariance of two equally long columns (unbiased) and the SE of
/// the estimate, sqrt(Var((x - xbar)(y - ybar)) / N).
std::pair<double, double> covariance_with_se(std::span<const double> x, std::span<const double> y);

double correlation(std::span<const double> x, std::span<const double> y);

/// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> x, double p);

/// (IQR / 1.3489795)^2: consistent for the variance of a normal law and
/// insensitive to heavy tails.
double iqr_variance(std::span<const double> x);

/// Delete-a-group jackknife SE of `stat`, applied to index subsets.
double jackknife_se(std::size_t n, std::size_t groups,
                    const std::function<double(const std::vector<std::size_t>&)>& stat);

/// Ordinary least squares y = slope x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace kiefer
