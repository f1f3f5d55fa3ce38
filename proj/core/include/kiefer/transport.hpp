#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kiefer/covariance.hpp"
#include "kiefer/dynamics.hpp"
#include "kiefer/empirical.hpp"

namespace kiefer {

using Sample = std::vector<Eigen::VectorXd>;

/// d_r(x, y) = max_j |x_j - y_j|.
double supnorm_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Empirical W1 between two equal-size samples under the sup-norm cost.
struct CouplingReport {
  double w1 = 0.0;
  std::size_t sample_size = 0;
  std::size_t dimension = 0;
  std::optional<BlockSchedule> schedule;
  /// Per-pair costs of the optimal assignment.
  double min_cost = 0.0;
  double mean_cost = 0.0;
  double max_cost = 0.0;
  /// w1 / 2^(m/2) when a schedule is attached, else w1.
  double w1_normalized = 0.0;
  /// Gaussian-vs-Gaussian control band, filled by coupling_scaling.
  double control_band_lo = 0.0;
  double control_band_hi = 0.0;
};

inline constexpr std::size_t kDefaultAssignmentCap = 1024;

/// Exact minimum-cost perfect matching (shortest augmenting path Hungarian
/// method, O(M^3)). Costs are rescaled to 128-bit integers on a common
/// binary exponent and the solver runs on those, so the optimum and its sum
/// are exact and independent of sample order; w1 is the sum rounded once.
CouplingReport wasserstein_empirical(const Sample& a, const Sample& b,
                                     std::size_t cap = kDefaultAssignmentCap);

/// Brute force over all M! permutations; M <= 8. Same integer costs as
/// wasserstein_empirical.
double wasserstein_oracle(const Sample& a, const Sample& b);

/// Produces a trajectory of at least the requested length for a seed.
using TrajectorySource = std::function<std::vector<double>(std::uint64_t seed, std::size_t n)>;

struct CouplingScalingOptions {
  double epsilon = 0.02;
  std::size_t sample_size = 512;
  std::size_t control_repetitions = 20;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// For each L: M independent trajectories contribute their first block vector
/// U_{L,1}; M independent N(0, 2^m Lambda_L) vectors form the Gaussian side;
/// the report holds their empirical W1 and w1 / 2^(m/2). The control band is
/// mean +- 3 sd of the normalized W1 over `control_repetitions`
/// Gaussian-vs-Gaussian pairs.
/// Lambda must be given at a resolution >= every r(L); it is restricted to
/// each r(L).
std::vector<CouplingReport> coupling_scaling(const TrajectorySource& source, const EcdfModel& F,
                                             const LambdaEstimate& lambda,
                                             std::span<const int> L_values,
                                             const CouplingScalingOptions& options);

/// Convenience overload drawing replicate r from spec.reseeded(derive_seed(seed, r)).
std::vector<CouplingReport> coupling_scaling(const ProcessSpec& spec, const EcdfModel& F,
                                             const LambdaEstimate& lambda,
                                             std::span<const int> L_values,
                                             const CouplingScalingOptions& options);

}  // namespace kiefer
