#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "kiefer/dynamics.hpp"
#include "kiefer/empirical.hpp"

namespace kiefer {

/// Estimate of beta(sigma(X_0), X_k) = E b(X_0, k), where
/// b(X_0, k) = sup_t |P(X_k <= t | X_0) - P(X_k <= t)|.
///
/// This pairwise coefficient is a lower bound for the coefficients
/// beta_1(k) <= beta_2(k) that condition on the whole past; those are not
/// estimated from a single realization.
struct BetaEstimate {
  std::size_t lag = 1;
  double value = 0.0;
  std::size_t bins = 1;
  std::size_t pairs = 0;
};

/// OLS fit of log(value) on log(lag).
struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double min_lag = 0.0;
  double max_lag = 0.0;
  std::size_t points = 0;
};

/// Average over i of (1{X_0 <= s} - F(s)) (1{X_k <= s2} - F(s2)) in chain
/// time. For i.i.d. and linear processes chain time is trajectory time, so
/// X_0 = traj[i], X_k = traj[i+k]. LSV orbits run backwards relative to
/// their Markov chain, so X_0 = traj[i+k] and X_k = traj[i]. Either way the
/// value equals the orbit covariance nu(f_s^(0) . f_s2^(0) o T^k) estimator
/// with the roles of s, s2 fixed by that convention. Needs k + 1 < size.
double lag_covariance(const Trajectory& traj, const EcdfModel& F, double s, double s2,
                      std::size_t k);

/// lag_covariance for each lag in `lags`, with batch-means standard errors.
struct LagCovarianceProfile {
  std::vector<std::size_t> lags;
  std::vector<double> values;
  std::vector<double> se;
};
LagCovarianceProfile lag_covariance_profile(const Trajectory& traj, const EcdfModel& F,
                                            double s, double s2,
                                            std::span<const std::size_t> lags,
                                            std::size_t batches = 32);

/// Binned estimator of beta(sigma(X_0), X_k).
///
/// The conditioning coordinate (X_0 in chain time, so the later orbit point
/// for LSV) is split into `bins` equal-count bins by rank. In each bin the
/// conditional ECDF of the other coordinate is compared with its marginal
/// ECDF at the 2^-eval_r quantile levels; the sup of the absolute gap is
/// averaged with bin-probability weights. Only ranks enter, so the estimate
/// is invariant under strictly increasing relabelings of the data, and the
/// restricted sup makes it a lower-bound estimator of the population sup.
///
/// Throws EstimationError when fewer than 100 pairs per bin are available.
BetaEstimate estimate_beta(const Trajectory& traj, std::size_t k, std::size_t bins,
                           int eval_r = 8);

/// estimate_beta for several lags, ranking the trajectory once.
std::vector<BetaEstimate> estimate_beta_profile(const Trajectory& traj,
                                                std::span<const std::size_t> lags,
                                                std::size_t bins, int eval_r = 8);

/// estimate_beta on a seeded random permutation of the trajectory: the value
/// the estimator returns when the population coefficient is zero.
BetaEstimate shuffled_beta_floor(const Trajectory& traj, std::size_t k, std::size_t bins,
                                 std::uint64_t seed, int eval_r = 8);

/// shuffled_beta_floor for several lags from one permutation.
std::vector<BetaEstimate> shuffled_beta_profile(const Trajectory& traj,
                                                std::span<const std::size_t> lags,
                                                std::size_t bins, std::uint64_t seed,
                                                int eval_r = 8);

/// Independence noise floor tau(bins, pairs). Under independence each bin's
/// conditional ECDF deviates from the truth by more than
/// sqrt(log(2 bins / alpha) / (2 n_bin)) with probability at most alpha/bins
/// (DKW inequality + union bound), and the marginal by more than
/// sqrt(log(2 / alpha) / (2 pairs)) with probability at most alpha/2.
double independence_noise_floor(std::size_t bins, std::size_t pairs, double alpha = 1e-3);

/// Requires >= 3 points with positive lag and value; DomainError otherwise.
DecayFit fit_decay(std::span<const std::pair<double, double>> points);

}  // namespace kiefer
