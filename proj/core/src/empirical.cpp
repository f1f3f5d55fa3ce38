#include "kiefer/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kiefer/error.hpp"

namespace kiefer {

DyadicGrid::DyadicGrid(int r) : r_(r) {
  if (r < 1 || r > 20) throw DomainError("dyadic grid resolution must lie in [1, 20]");
}

std::vector<double> DyadicGrid::points() const {
  std::vector<double> pts(size());
  for (std::size_t j = 0; j < pts.size(); ++j) pts[j] = point(j);
  return pts;
}

std::size_t DyadicGrid::cell_index(double x) const noexcept {
  const double scaled = std::ceil(x * cells());
  if (!(scaled > 0.0)) return 0;
  const auto top = std::size_t{1} << r_;
  if (scaled >= static_cast<double>(top)) return top;
  return static_cast<std::size_t>(scaled);
}

std::size_t DyadicGrid::index_of(double s) const noexcept {
  const double scaled = s * cells();
  if (scaled != std::floor(scaled) || scaled < 1.0 || scaled > static_cast<double>(size())) {
    return npos;
  }
  return static_cast<std::size_t>(scaled) - 1;
}

EcdfModel::EcdfModel(std::vector<double> sample) : sorted_(std::move(sample)) {
  if (sorted_.empty()) throw DomainError("ECDF needs a nonempty calibration sample");
  std::sort(sorted_.begin(), sorted_.end());
}

EcdfModel EcdfModel::fit(const Trajectory& calibration) {
  return EcdfModel(std::vector<double>(calibration.values().begin(), calibration.values().end()));
}

double EcdfModel::operator()(double s) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), s);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

namespace {

std::vector<double> grid_cdf(const DyadicGrid& grid, const EcdfModel& F) {
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = F(grid.point(j));
  return out;
}

}  // namespace

EmpiricalField empirical_process(const Trajectory& traj, const EcdfModel& F,
                                 const DyadicGrid& grid, std::span<const std::size_t> times) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] > traj.size()) {
      throw RangeError("empirical_process: time " + std::to_string(times[k]) +
                       " exceeds trajectory length " + std::to_string(traj.size()));
    }
    if (k > 0 && times[k] < times[k - 1]) throw DomainError("empirical_process: times must be nondecreasing");
  }
  const std::size_t npts = grid.size();
  const auto Fs = grid_cdf(grid, F);
  EmpiricalField field{grid, std::vector<std::size_t>(times.begin(), times.end()),
                       Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(npts),
                                             static_cast<Eigen::Index>(times.size()))};

  // hist[c] counts observations with cell_index == c
  std::vector<std::size_t> hist(npts + 2, 0);
  const auto vals = traj.values();
  std::size_t i = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (; i < times[k]; ++i) ++hist[grid.cell_index(vals[i])];
    std::size_t below = hist[0];
    const double t = static_cast<double>(times[k]);
    for (std::size_t j = 0; j < npts; ++j) {
      below += hist[j + 1];
      field.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          static_cast<double>(below) - t * Fs[j];
    }
  }
  return field;
}

Eigen::MatrixXd empirical_values(const Trajectory& traj, const EcdfModel& F,
                                 std::span<const double> levels,
                                 std::span<const std::size_t> times) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] > traj.size()) throw RangeError("empirical_values: time exceeds trajectory length");
    if (k > 0 && times[k] < times[k - 1]) throw DomainError("empirical_values: times must be nondecreasing");
  }
  const auto rows = static_cast<Eigen::Index>(levels.size());
  Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(times.size()));
  std::vector<std::size_t> count(levels.size(), 0);
  std::vector<double> Fs(levels.size());
  for (std::size_t a = 0; a < levels.size(); ++a) Fs[a] = F(levels[a]);
  const auto vals = traj.values();
  std::size_t i = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (; i < times[k]; ++i) {
      for (std::size_t a = 0; a < levels.size(); ++a) count[a] += vals[i] <= levels[a];
    }
    for (std::size_t a = 0; a < levels.size(); ++a) {
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) =
          static_cast<double>(count[a]) - static_cast<double>(times[k]) * Fs[a];
    }
  }
  return out;
}

double dyadic_projection(double s, int K) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("dyadic_projection: s outside [0,1]");
  if (K < 0) throw DomainError("dyadic_projection: K must be nonnegative");
  const double scale = std::ldexp(1.0, K);
  return std::floor(s * scale) / scale;
}

BlockSchedule block_schedule(int L, double epsilon) {
  if (L < 1) throw DomainError("block_schedule: L must be positive");
  if (!(epsilon > 0.0 && epsilon < 0.1)) throw DomainError("block_schedule: epsilon must lie in (0, 1/10)");
  const int by_fifth = L / 5;
  const int by_rate = static_cast<int>(std::floor(2.0 * epsilon * L + 5.0 * std::log2(static_cast<double>(L))));
  BlockSchedule s;
  s.L = L;
  s.r = std::max(std::min(by_fifth, by_rate), 1);
  s.m = L - s.r;
  s.epsilon = epsilon;
  return s;
}

namespace {

Eigen::VectorXd block_vector(std::span<const double> block, const DyadicGrid& grid,
                             const std::vector<double>& Fs) {
  const std::size_t npts = grid.size();
  std::vector<std::size_t> hist(npts + 2, 0);
  for (double x : block) ++hist[grid.cell_index(x)];
  Eigen::VectorXd u(static_cast<Eigen::Index>(npts));
  std::size_t below = hist[0];
  const double len = static_cast<double>(block.size());
  for (std::size_t j = 0; j < npts; ++j) {
    below += hist[j + 1];
    u(static_cast<Eigen::Index>(j)) = static_cast<double>(below) - len * Fs[j];
  }
  return u;
}

}  // namespace

BlockSumSample block_sums(const Trajectory& traj, const EcdfModel& F,
                          const BlockSchedule& schedule) {
  const std::size_t need = std::size_t{1} << (schedule.L + 1);
  if (traj.size() < need) {
    throw RangeError("block_sums: trajectory of length " + std::to_string(traj.size()) +
                     " shorter than 2^(L+1) = " + std::to_string(need));
  }
  const DyadicGrid grid(schedule.r);
  const auto Fs = grid_cdf(grid, F);
  BlockSumSample out{schedule, {}};
  out.vectors.reserve(schedule.block_count());
  const auto vals = traj.values();
  for (std::size_t l = 0; l < schedule.block_count(); ++l) {
    // one-based ]2^L + l 2^m, 2^L + (l+1) 2^m] is zero-based [2^L + l 2^m, ...)
    const std::size_t start = schedule.origin() + l * schedule.block_length();
    out.vectors.push_back(block_vector(vals.subspan(start, schedule.block_length()), grid, Fs));
  }
  return out;
}

Eigen::VectorXd first_block_sum(std::span<const double> values, const EcdfModel& F,
                                const BlockSchedule& schedule) {
  const std::size_t need = schedule.origin() + schedule.block_length();
  if (values.size() < need) throw RangeError("first_block_sum: trajectory too short");
  const DyadicGrid grid(schedule.r);
  return block_vector(values.subspan(schedule.origin(), schedule.block_length()), grid,
                      grid_cdf(grid, F));
}

}  // namespace kiefer
