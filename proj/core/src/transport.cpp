#include "kiefer/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "kiefer/error.hpp"
#include "kiefer/gaussian.hpp"
#include "kiefer/parallel.hpp"
#include "kiefer/rng.hpp"

namespace kiefer {

double supnorm_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) {
    throw DimensionError("supnorm_cost: lengths " + std::to_string(x.size()) + " and " +
                         std::to_string(y.size()) + " differ");
  }
  if (x.size() == 0) return 0.0;
  return (x - y).cwiseAbs().maxCoeff();
}

namespace {

std::size_t check_samples(const Sample& a, const Sample& b) {
  if (a.empty() || a.size() != b.size()) {
    throw DimensionError("wasserstein: samples must be nonempty and of equal size");
  }
  const auto dim = a.front().size();
  for (const auto& v : a) {
    if (v.size() != dim) throw DimensionError("wasserstein: inconsistent vector dimension");
  }
  for (const auto& v : b) {
    if (v.size() != dim) throw DimensionError("wasserstein: inconsistent vector dimension");
  }
  return static_cast<std::size_t>(dim);
}

Eigen::MatrixXd cost_matrix(const Sample& a, const Sample& b) {
  const auto M = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd cost(M, M);
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = 0; j < M; ++j) {
      cost(i, j) = supnorm_cost(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)]);
    }
  }
  return cost;
}

__extension__ using Int128 = __int128;

// Costs as exact integers: cost = value * 2^exponent. Every double cost is
// an integer multiple of the smallest ulp among them, so this is lossless
// unless the costs span more than ~115 binary orders of magnitude, in which
// case the tiniest bits are rounded away.
struct FixedCosts {
  std::vector<Int128> value;  // row-major M x M
  int exponent = 0;
  std::size_t n = 0;

  Int128 at(std::size_t i, std::size_t j) const { return value[i * n + j]; }
};

FixedCosts fixed_costs(const Eigen::MatrixXd& cost) {
  FixedCosts f;
  f.n = static_cast<std::size_t>(cost.rows());
  f.value.assign(f.n * f.n, 0);
  double cmax = 0.0;
  int low = std::numeric_limits<int>::max();
  for (Eigen::Index i = 0; i < cost.size(); ++i) {
    const double c = cost.data()[i];
    if (!std::isfinite(c)) throw DomainError("wasserstein: non-finite cost");
    if (c == 0.0) continue;
    cmax = std::max(cmax, c);
    int e = 0;
    std::frexp(c, &e);
    low = std::min(low, e - std::numeric_limits<double>::digits);
  }
  if (cmax == 0.0) return f;
  int top = 0;
  std::frexp(cmax, &top);
  // room for sums of n costs and the potentials of the assignment solver
  const int sum_bits = static_cast<int>(std::ceil(std::log2(static_cast<double>(f.n) + 1.0))) + 3;
  f.exponent = std::max(low, top + sum_bits - 120);
  for (std::size_t i = 0; i < f.n; ++i) {
    for (std::size_t j = 0; j < f.n; ++j) {
      const double c = cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      f.value[i * f.n + j] = static_cast<Int128>(std::nearbyint(std::ldexp(c, -f.exponent)));
    }
  }
  return f;
}

double to_double(Int128 total, int exponent) {
  return std::ldexp(static_cast<double>(total), exponent);
}

// assignment[i] = column matched to row i
std::vector<std::size_t> hungarian(const FixedCosts& cost) {
  const std::size_t n = cost.n;
  const Int128 inf = ~(Int128{1} << 127);
  std::vector<Int128> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      Int128 delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Int128 cur = cost.at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

}  // namespace

CouplingReport wasserstein_empirical(const Sample& a, const Sample& b, std::size_t cap) {
  const std::size_t dim = check_samples(a, b);
  if (a.size() > cap) {
    throw SizeError("wasserstein_empirical: sample size " + std::to_string(a.size()) +
                    " exceeds cap " + std::to_string(cap));
  }
  const Eigen::MatrixXd cost = cost_matrix(a, b);
  const FixedCosts fixed = fixed_costs(cost);
  const auto assignment = hungarian(fixed);
  Int128 total = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    total += fixed.at(i, assignment[i]);
    const double c = cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(assignment[i]));
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  CouplingReport report;
  report.sample_size = a.size();
  report.dimension = dim;
  report.min_cost = lo;
  report.max_cost = hi;
  report.w1 = to_double(total, fixed.exponent) / static_cast<double>(a.size());
  report.mean_cost = report.w1;
  report.w1_normalized = report.w1;
  return report;
}

double wasserstein_oracle(const Sample& a, const Sample& b) {
  check_samples(a, b);
  if (a.size() > 8) throw SizeError("wasserstein_oracle: at most 8 points");
  const FixedCosts fixed = fixed_costs(cost_matrix(a, b));
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Int128 best = ~(Int128{1} << 127);
  do {
    Int128 total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) total += fixed.at(i, perm[i]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double best_value = to_double(best, fixed.exponent);
  return best_value / static_cast<double>(a.size());
}

std::vector<CouplingReport> coupling_scaling(const TrajectorySource& source, const EcdfModel& F,
                                             const LambdaEstimate& lambda,
                                             std::span<const int> L_values,
                                             const CouplingScalingOptions& options) {
  const std::size_t M = options.sample_size;
  if (M == 0) throw DomainError("coupling_scaling: sample size must be positive");
  std::vector<CouplingReport> reports;
  for (int L : L_values) {
    const BlockSchedule schedule = block_schedule(L, options.epsilon);
    if (schedule.flagged()) {
      throw DomainError("coupling_scaling: L = " + std::to_string(L) + " gives 4r > m");
    }
    if (schedule.r > lambda.grid.resolution()) {
      throw DimensionError("coupling_scaling: lambda resolution below r(L) for L = " + std::to_string(L));
    }
    const LambdaEstimate restricted = restrict_lambda(lambda, schedule.r);
    const PsdFactor factor = psd_factor(restricted.matrix);
    const double scale = std::sqrt(std::ldexp(1.0, schedule.m));
    const std::uint64_t seed_L = derive_seed(options.seed, static_cast<std::uint64_t>(L));
    const std::size_t length = schedule.origin() + schedule.block_length();

    Sample data(M);
    parallel_for(M, options.threads, [&](std::size_t i) {
      const auto values = source(derive_seed(seed_L, i), length);
      data[i] = first_block_sum(values, F, schedule);
    });
    const Sample gauss = gaussian_vectors(factor, scale, M, derive_seed(seed_L ^ 0xa5a5a5a5ULL, 0));

    CouplingReport report = wasserstein_empirical(data, gauss, std::max(M, kDefaultAssignmentCap));
    report.schedule = schedule;
    report.w1_normalized = report.w1 / scale;

    std::vector<double> control(options.control_repetitions);
    parallel_for(control.size(), options.threads, [&](std::size_t c) {
      const std::uint64_t cs = derive_seed(seed_L ^ 0x3c3c3c3cULL, c);
      const Sample x = gaussian_vectors(factor, scale, M, derive_seed(cs, 1));
      const Sample y = gaussian_vectors(factor, scale, M, derive_seed(cs, 2));
      control[c] = wasserstein_empirical(x, y, std::max(M, kDefaultAssignmentCap)).w1 / scale;
    });
    if (control.size() >= 2) {
      const double mean = std::accumulate(control.begin(), control.end(), 0.0) /
                          static_cast<double>(control.size());
      double ss = 0.0;
      for (double c : control) ss += (c - mean) * (c - mean);
      const double sd = std::sqrt(ss / static_cast<double>(control.size() - 1));
      report.control_band_lo = std::max(0.0, mean - 3.0 * sd);
      report.control_band_hi = mean + 3.0 * sd;
    }
    reports.push_back(report);
  }
  return reports;
}

std::vector<CouplingReport> coupling_scaling(const ProcessSpec& spec, const EcdfModel& F,
                                             const LambdaEstimate& lambda,
                                             std::span<const int> L_values,
                                             const CouplingScalingOptions& options) {
  TrajectorySource source = [spec](std::uint64_t seed, std::size_t n) {
    const Trajectory t = generate_trajectory(spec.reseeded(seed), n);
    return std::vector<double>(t.values().begin(), t.values().end());
  };
  return coupling_scaling(source, F, lambda, L_values, options);
}

}  // namespace kiefer
