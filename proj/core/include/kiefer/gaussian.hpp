#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "kiefer/covariance.hpp"
#include "kiefer/empirical.hpp"

namespace kiefer {

/// Kiefer-process skeleton on the block boundaries t_l = 2^L + l 2^m,
/// l = 0 .. 2^(L-m). Column l holds K(s_j, t_l) - K(s_j, t_0), so column 0
/// is zero and consecutive columns differ by independent N(0, 2^m Lambda)
/// vectors.
struct KieferPath {
  DyadicGrid grid{1};
  BlockSchedule schedule;
  std::vector<std::size_t> times;
  Eigen::MatrixXd values;  // grid.size() x (block_count + 1)
  std::uint64_t seed = 0;

  /// V_l = K(., t_l) - K(., t_{l-1}), l >= 1.
  Eigen::VectorXd increment(std::size_t l) const;
};

/// Draws `count` independent vectors scale * G z with z standard normal;
/// vector i uses the engine seeded with derive_seed(seed, i).
std::vector<Eigen::VectorXd> gaussian_vectors(const PsdFactor& factor, double scale,
                                              std::size_t count, std::uint64_t seed);

/// Requires lambda.grid.resolution() == schedule.r (DimensionError) and a
/// factorizable lambda (FactorizationError propagates).
KieferPath simulate_kiefer(const LambdaEstimate& lambda, const BlockSchedule& schedule,
                           std::uint64_t seed);

}  // namespace kiefer
