#include "kiefer/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kiefer/error.hpp"

namespace kiefer {

double Moments::mean_se() const {
  return count > 0 ? std::sqrt(variance / static_cast<double>(count)) : 0.0;
}
double Moments::skewness_se() const { return std::sqrt(6.0 / static_cast<double>(count)); }
double Moments::kurtosis_se() const { return std::sqrt(24.0 / static_cast<double>(count)); }

Moments moments(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("moments: need at least 2 values");
  Moments m;
  m.count = x.size();
  const double n = static_cast<double>(x.size());
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.variance = m2 * n / (n - 1.0);
  m.variance_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

std::pair<double, double> covariance_with_se(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DimensionError("covariance: equal lengths >= 2 required");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double s = 0, s2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = (x[i] - mx) * (y[i] - my);
    s += p;
    s2 += p * p;
  }
  const double mean_p = s / n;
  const double var_p = std::max(s2 / n - mean_p * mean_p, 0.0);
  return {s / (n - 1.0), std::sqrt(var_p / n)};
}

double correlation(std::span<const double> x, std::span<const double> y) {
  const auto [cxy, se] = covariance_with_se(x, y);
  (void)se;
  const double vx = covariance_with_se(x, x).first;
  const double vy = covariance_with_se(y, y).first;
  if (!(vx > 0.0 && vy > 0.0)) return 0.0;
  return cxy / std::sqrt(vx * vy);
}

double quantile(std::vector<double> x, double p) {
  if (x.empty()) throw DomainError("quantile: empty sample");
  std::sort(x.begin(), x.end());
  const double h = static_cast<double>(x.size() - 1) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double iqr_variance(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  const double sigma = iqr / 1.3489795003921634;
  return sigma * sigma;
}

double jackknife_se(std::size_t n, std::size_t groups,
                    const std::function<double(const std::vector<std::size_t>&)>& stat) {
  if (groups < 2 || n < groups) throw DomainError("jackknife_se: need n >= groups >= 2");
  std::vector<double> leave_out(groups);
  std::vector<std::size_t> idx;
  idx.reserve(n);
  for (std::size_t g = 0; g < groups; ++g) {
    idx.clear();
    const std::size_t lo = n * g / groups;
    const std::size_t hi = n * (g + 1) / groups;
    for (std::size_t i = 0; i < n; ++i) {
      if (i < lo || i >= hi) idx.push_back(i);
    }
    leave_out[g] = stat(idx);
  }
  const double G = static_cast<double>(groups);
  const double mean = std::accumulate(leave_out.begin(), leave_out.end(), 0.0) / G;
  double ss = 0.0;
  for (double v : leave_out) ss += (v - mean) * (v - mean);
  return std::sqrt((G - 1.0) / G * ss);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DimensionError("fit_line: equal lengths >= 2 required");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double cxx = 0, cxy = 0, cyy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cxx += (x[i] - mx) * (x[i] - mx);
    cxy += (x[i] - mx) * (y[i] - my);
    cyy += (y[i] - my) * (y[i] - my);
  }
  if (!(cxx > 0.0)) throw DomainError("fit_line: abscissae must not all coincide");
  LineFit f;
  f.slope = cxy / cxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = cyy > 1e-300 ? std::clamp(cxy * cxy / (cxx * cyy), 0.0, 1.0) : 1.0;
  return f;
}

}  // namespace kiefer
