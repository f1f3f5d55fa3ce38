#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "kiefer/dynamics.hpp"
#include "kiefer/empirical.hpp"

namespace kiefer {

/// Truncated estimate of the long-run covariance
///   Lambda(s, s') = sum_{k >= 0} Cov(1{X_0 <= s}, 1{X_k <= s'})
///                 + sum_{k > 0}  Cov(1{X_0 <= s'}, 1{X_k <= s})
/// on a dyadic grid, with batch-means standard errors.
struct LambdaEstimate {
  DyadicGrid grid{1};
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd se;
  std::size_t max_lag = 0;
  std::size_t batches = 0;
  std::size_t samples = 0;
  bool psd_repaired = false;
};

/// ceil(n^(1/3)) capped at 1000.
std::size_t default_max_lag(std::size_t n);

/// Requires traj.size() >= 100 * max_lag and batches >= 2.
LambdaEstimate estimate_lambda(const Trajectory& traj, const EcdfModel& F,
                               const DyadicGrid& grid, std::size_t max_lag,
                               std::size_t batches = 32);

/// s min s' - s s': the long-run covariance of an i.i.d. uniform sequence
/// (Brownian-bridge covariance).
Eigen::MatrixXd brownian_bridge_covariance(const DyadicGrid& grid);

/// Sub-grid of resolution r <= lambda.grid.resolution().
LambdaEstimate restrict_lambda(const LambdaEstimate& lambda, int r);

/// Lower-triangular G with G G^T = Lambda + jitter I.
struct PsdFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
  bool repaired() const noexcept { return jitter > 0.0; }
};

/// Semidefinite Cholesky. Zero pivots are accepted when the remaining column
/// vanishes, so rank-deficient PSD input factors without jitter. Otherwise a
/// ridge delta I is added with delta doubling from 1e-12 trace; past
/// 1e-4 trace a FactorizationError is thrown.
PsdFactor psd_factor(const Eigen::MatrixXd& matrix);
/// Same, and records the repair in lambda.psd_repaired.
PsdFactor psd_factor(LambdaEstimate& lambda);

}  // namespace kiefer
