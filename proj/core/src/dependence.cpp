#include "kiefer/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kiefer/error.hpp"
#include "kiefer/rng.hpp"

namespace kiefer {

namespace {

std::vector<double> centered_indicator(std::span<const double> x, double s, double Fs) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] <= s ? 1.0 : 0.0) - Fs;
  return out;
}

// mean over i of head[i] * tail[i + k], with (first, second) already
// arranged so that `head` is the earlier trajectory index.
double lagged_mean(const std::vector<double>& head, const std::vector<double>& tail,
                   std::size_t k, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += head[i] * tail[i + k];
  return acc / static_cast<double>(end - begin);
}

}  // namespace

double lag_covariance(const Trajectory& traj, const EcdfModel& F, double s, double s2,
                      std::size_t k) {
  if (k + 1 >= traj.size()) {
    throw RangeError("lag_covariance: lag " + std::to_string(k) + " too large for length " +
                     std::to_string(traj.size()));
  }
  const auto a = centered_indicator(traj.values(), s, F(s));
  const auto b = centered_indicator(traj.values(), s2, F(s2));
  const std::size_t pairs = traj.size() - k;
  // chain X_0 carries s; for orbits X_0 is the later index
  return traj.spec().is_orbit() ? lagged_mean(b, a, k, 0, pairs) : lagged_mean(a, b, k, 0, pairs);
}

LagCovarianceProfile lag_covariance_profile(const Trajectory& traj, const EcdfModel& F,
                                            double s, double s2,
                                            std::span<const std::size_t> lags,
                                            std::size_t batches) {
  if (batches < 2) throw DomainError("lag_covariance_profile: need at least 2 batches");
  const auto a = centered_indicator(traj.values(), s, F(s));
  const auto b = centered_indicator(traj.values(), s2, F(s2));
  const auto& head = traj.spec().is_orbit() ? b : a;
  const auto& tail = traj.spec().is_orbit() ? a : b;
  LagCovarianceProfile out;
  out.lags.assign(lags.begin(), lags.end());
  for (std::size_t k : lags) {
    if (k + 1 >= traj.size()) throw RangeError("lag_covariance_profile: lag too large");
    const std::size_t pairs = traj.size() - k;
    if (pairs < batches) throw RangeError("lag_covariance_profile: fewer pairs than batches");
    std::vector<double> batch_means(batches);
    double total = 0.0;
    for (std::size_t bidx = 0; bidx < batches; ++bidx) {
      const std::size_t lo = pairs * bidx / batches;
      const std::size_t hi = pairs * (bidx + 1) / batches;
      batch_means[bidx] = lagged_mean(head, tail, k, lo, hi);
      total += batch_means[bidx] * static_cast<double>(hi - lo);
    }
    const double mean = total / static_cast<double>(pairs);
    double ss = 0.0;
    for (double m : batch_means) ss += (m - mean) * (m - mean);
    const double nb = static_cast<double>(batches);
    out.values.push_back(mean);
    out.se.push_back(std::sqrt(ss / (nb - 1.0) / nb));
  }
  return out;
}

namespace {

// Zero-based rank of each value; ties broken by position.
std::vector<std::size_t> ranks_of(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<std::size_t> rank(x.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  return rank;
}

void check_beta_args(std::size_t n, std::size_t k, std::size_t bins, int eval_r) {
  if (k == 0) throw DomainError("estimate_beta: lag must be positive");
  if (bins == 0) throw DomainError("estimate_beta: bins must be positive");
  if (eval_r < 1 || eval_r > 16) throw DomainError("estimate_beta: eval_r must lie in [1,16]");
  if (n >= (std::size_t{1} << 32)) throw SizeError("estimate_beta: at most 2^32 values");
  const std::size_t pairs = n > k ? n - k : 0;
  if (pairs < 100 * bins) {
    throw EstimationError("estimate_beta: " + std::to_string(pairs) + " pairs for " +
                              std::to_string(bins) + " bins (need >= 100 per bin)",
                          pairs, bins);
  }
}

// `rank` holds zero-based ranks over the whole trajectory; the pair subsets
// differ from it by k boundary points only. Rank-only processing keeps the
// estimate invariant under monotone relabeling.
BetaEstimate beta_from_ranks(const std::vector<std::size_t>& rank, bool orbit, std::size_t k,
                             std::size_t bins, int eval_r) {
  const std::size_t n = rank.size();
  check_beta_args(n, k, bins, eval_r);
  const std::size_t pairs = n - k;
  const std::size_t levels = std::size_t{1} << eval_r;
  const auto nn = static_cast<std::uint64_t>(n);

  auto cond_bin = [&](std::size_t idx) {
    return static_cast<std::size_t>(static_cast<std::uint64_t>(rank[idx]) * bins / nn);
  };
  // level cell c with 1{u <= j/levels} == (c <= j), u = (rank+1)/n
  auto target_cell = [&](std::size_t idx) {
    const auto num = static_cast<std::uint64_t>(rank[idx] + 1) * levels;
    return static_cast<std::size_t>((num + nn - 1) / nn);
  };

  std::vector<std::size_t> joint(bins * (levels + 1), 0);
  std::vector<std::size_t> bin_count(bins, 0);
  std::vector<std::size_t> marginal(levels + 1, 0);
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::size_t cond = orbit ? i + k : i;
    const std::size_t target = orbit ? i : i + k;
    const std::size_t b = cond_bin(cond);
    const std::size_t c = target_cell(target);
    ++joint[b * (levels + 1) + c];
    ++bin_count[b];
    ++marginal[c];
  }

  const double total = static_cast<double>(pairs);
  double weighted = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (bin_count[b] == 0) continue;
    const double nb = static_cast<double>(bin_count[b]);
    std::size_t cum_joint = 0;
    std::size_t cum_marg = 0;
    double sup = 0.0;
    for (std::size_t j = 0; j + 1 < levels + 1; ++j) {
      cum_joint += joint[b * (levels + 1) + j];
      cum_marg += marginal[j];
      if (j == 0) continue;  // level 0 carries no mass by construction
      const double gap = std::abs(static_cast<double>(cum_joint) / nb -
                                  static_cast<double>(cum_marg) / total);
      sup = std::max(sup, gap);
    }
    weighted += nb / total * sup;
  }
  return BetaEstimate{k, std::clamp(weighted, 0.0, 1.0), bins, pairs};
}

}  // namespace

BetaEstimate estimate_beta(const Trajectory& traj, std::size_t k, std::size_t bins, int eval_r) {
  check_beta_args(traj.size(), k, bins, eval_r);
  return beta_from_ranks(ranks_of(traj.values()), traj.spec().is_orbit(), k, bins, eval_r);
}

std::vector<BetaEstimate> estimate_beta_profile(const Trajectory& traj,
                                                std::span<const std::size_t> lags,
                                                std::size_t bins, int eval_r) {
  for (std::size_t k : lags) check_beta_args(traj.size(), k, bins, eval_r);
  const auto rank = ranks_of(traj.values());
  std::vector<BetaEstimate> out;
  for (std::size_t k : lags) out.push_back(beta_from_ranks(rank, traj.spec().is_orbit(), k, bins, eval_r));
  return out;
}

namespace {

std::vector<double> shuffled(std::span<const double> x, std::uint64_t seed) {
  std::vector<double> v(x.begin(), x.end());
  Rng rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
  return v;
}

}  // namespace

BetaEstimate shuffled_beta_floor(const Trajectory& traj, std::size_t k, std::size_t bins,
                                 std::uint64_t seed, int eval_r) {
  check_beta_args(traj.size(), k, bins, eval_r);
  return beta_from_ranks(ranks_of(shuffled(traj.values(), seed)), traj.spec().is_orbit(), k,
                         bins, eval_r);
}

std::vector<BetaEstimate> shuffled_beta_profile(const Trajectory& traj,
                                                std::span<const std::size_t> lags,
                                                std::size_t bins, std::uint64_t seed,
                                                int eval_r) {
  for (std::size_t k : lags) check_beta_args(traj.size(), k, bins, eval_r);
  const auto rank = ranks_of(shuffled(traj.values(), seed));
  std::vector<BetaEstimate> out;
  for (std::size_t k : lags) out.push_back(beta_from_ranks(rank, traj.spec().is_orbit(), k, bins, eval_r));
  return out;
}

double independence_noise_floor(std::size_t bins, std::size_t pairs, double alpha) {
  if (bins == 0 || pairs < bins) throw DomainError("independence_noise_floor: need pairs >= bins > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("independence_noise_floor: alpha in (0,1)");
  const double per_bin = static_cast<double>(pairs) / static_cast<double>(bins);
  const double cond = std::sqrt(std::log(2.0 * static_cast<double>(bins) / alpha) / (2.0 * per_bin));
  const double marg = std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(pairs)));
  return cond + marg;
}

DecayFit fit_decay(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw DomainError("fit_decay: need at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  DecayFit fit;
  fit.min_lag = points.front().first;
  fit.max_lag = points.front().first;
  for (const auto& [lag, value] : points) {
    if (!(lag > 0.0)) throw DomainError("fit_decay: lags must be positive");
    if (!(value > 0.0)) throw DomainError("fit_decay: values must be positive (floor at noise level first)");
    const double x = std::log(lag);
    const double y = std::log(value);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    fit.min_lag = std::min(fit.min_lag, lag);
    fit.max_lag = std::max(fit.max_lag, lag);
  }
  const double n = static_cast<double>(points.size());
  const double cxx = sxx - sx * sx / n;
  const double cxy = sxy - sx * sy / n;
  const double cyy = syy - sy * sy / n;
  if (!(cxx > 0.0)) throw DomainError("fit_decay: lags must not all coincide");
  fit.slope = cxy / cxx;
  fit.intercept = (sy - fit.slope * sx) / n;
  // a flat line is explained perfectly
  fit.r_squared = cyy > 1e-300 ? std::clamp(cxy * cxy / (cxx * cyy), 0.0, 1.0) : 1.0;
  fit.points = points.size();
  return fit;
}

}  // namespace kiefer
