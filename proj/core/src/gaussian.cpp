#include "kiefer/gaussian.hpp"

#include <cmath>

#include "kiefer/error.hpp"
#include "kiefer/rng.hpp"

namespace kiefer {

Eigen::VectorXd KieferPath::increment(std::size_t l) const {
  if (l == 0 || l >= times.size()) throw RangeError("KieferPath::increment: block index out of range");
  return values.col(static_cast<Eigen::Index>(l)) - values.col(static_cast<Eigen::Index>(l - 1));
}

std::vector<Eigen::VectorXd> gaussian_vectors(const PsdFactor& factor, double scale,
                                              std::size_t count, std::uint64_t seed) {
  const auto dim = factor.lower.rows();
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  Eigen::VectorXd z(dim);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    for (Eigen::Index d = 0; d < dim; ++d) z(d) = rng.normal();
    out.emplace_back(scale * (factor.lower * z));
  }
  return out;
}

KieferPath simulate_kiefer(const LambdaEstimate& lambda, const BlockSchedule& schedule,
                           std::uint64_t seed) {
  if (lambda.grid.resolution() != schedule.r) {
    throw DimensionError("simulate_kiefer: lambda grid resolution " +
                         std::to_string(lambda.grid.resolution()) + " != schedule r " +
                         std::to_string(schedule.r));
  }
  const PsdFactor factor = psd_factor(lambda.matrix);
  const std::size_t blocks = schedule.block_count();
  const auto increments =
      gaussian_vectors(factor, std::sqrt(std::ldexp(1.0, schedule.m)), blocks, seed);

  KieferPath path;
  path.grid = lambda.grid;
  path.schedule = schedule;
  path.seed = seed;
  path.times.resize(blocks + 1);
  const auto dim = static_cast<Eigen::Index>(lambda.grid.size());
  path.values = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(blocks + 1));
  for (std::size_t l = 0; l <= blocks; ++l) {
    path.times[l] = schedule.origin() + l * schedule.block_length();
    if (l > 0) {
      path.values.col(static_cast<Eigen::Index>(l)) =
          path.values.col(static_cast<Eigen::Index>(l - 1)) + increments[l - 1];
    }
  }
  return path;
}

}  // namespace kiefer
