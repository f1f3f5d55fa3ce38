#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kiefer/dynamics.hpp"

namespace kiefer {

/// Points s_j = j 2^-r, j = 1 .. 2^r - 1.
class DyadicGrid {
 public:
  explicit DyadicGrid(int r);

  int resolution() const noexcept { return r_; }
  std::size_t size() const noexcept { return (std::size_t{1} << r_) - 1; }
  double point(std::size_t j) const { return static_cast<double>(j + 1) / cells(); }
  std::vector<double> points() const;
  /// Number of cells 2^r.
  double cells() const noexcept { return static_cast<double>(std::size_t{1} << r_); }

  /// Smallest c in {0, ..., 2^r} with x <= c 2^-r (0 for x <= 0, 2^r above
  /// the last cell). Then 1{x <= s_j} == (cell_index(x) <= j + 1) for the
  /// zero-based point index j.
  std::size_t cell_index(double x) const noexcept;

  /// Zero-based index of s in this grid, or npos when s is not a grid point.
  std::size_t index_of(double s) const noexcept;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  bool operator==(const DyadicGrid&) const = default;

 private:
  int r_;
};

/// Right-continuous empirical distribution function of a calibration sample.
class EcdfModel {
 public:
  explicit EcdfModel(std::vector<double> sample);
  static EcdfModel fit(const Trajectory& calibration);

  /// (count of sample values <= s) / size.
  double operator()(double s) const;
  double eval(double s) const { return (*this)(s); }
  std::size_t size() const noexcept { return sorted_.size(); }
  std::span<const double> sorted() const noexcept { return sorted_; }

 private:
  std::vector<double> sorted_;
};

/// R(s_j, t_k) = sum_{1 <= i <= t_k} (1{x_i <= s_j} - F(s_j)).
struct EmpiricalField {
  DyadicGrid grid;
  std::vector<std::size_t> times;
  Eigen::MatrixXd values;  // grid.size() x times.size()

  double at(std::size_t j, std::size_t k) const { return values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)); }
};

/// Single cumulative pass; `times` must be nondecreasing and <= traj.size().
EmpiricalField empirical_process(const Trajectory& traj, const EcdfModel& F,
                                 const DyadicGrid& grid, std::span<const std::size_t> times);

/// R(s, t) for arbitrary (not necessarily dyadic) levels: one row per
/// entry of `levels`, one column per entry of `times` (nondecreasing).
Eigen::MatrixXd empirical_values(const Trajectory& traj, const EcdfModel& F,
                                 std::span<const double> levels,
                                 std::span<const std::size_t> times);

/// 2^-K floor(2^K s) for s in [0, 1].
double dyadic_projection(double s, int K);

/// Block layout (r(L), m(L)): 2^(L-m) blocks of length 2^m after time 2^L,
/// spatial resolution 2^-r.
struct BlockSchedule {
  int L = 1;
  int r = 1;
  int m = 0;
  double epsilon = 0.0;

  /// The constraint 4r <= m fails (happens for small L).
  bool flagged() const noexcept { return 4 * r > m; }
  std::size_t block_count() const noexcept { return std::size_t{1} << (L - m); }
  std::size_t block_length() const noexcept { return std::size_t{1} << m; }
  /// Start time 2^L of the dyadic window.
  std::size_t origin() const noexcept { return std::size_t{1} << L; }

  bool operator==(const BlockSchedule&) const = default;
};

/// r(L) = (floor(L/5) min floor(2 eps L + 5 log2 L)) max 1,  m(L) = L - r(L).
/// epsilon must lie in (0, 1/10).
BlockSchedule block_schedule(int L, double epsilon);

/// One block-sum vector per block l = 1 .. 2^(L-m):
///   U_l^(j) = sum over i in ]2^L + (l-1) 2^m, 2^L + l 2^m] of (1{x_i <= s_j} - F(s_j)),
/// with s_j on the resolution-r grid and i one-based.
struct BlockSumSample {
  BlockSchedule schedule;
  std::vector<Eigen::VectorXd> vectors;
};

/// Requires traj.size() >= 2^(L+1).
BlockSumSample block_sums(const Trajectory& traj, const EcdfModel& F,
                          const BlockSchedule& schedule);

/// U_{L,1} only; needs 2^L + 2^m values.
Eigen::VectorXd first_block_sum(std::span<const double> values, const EcdfModel& F,
                                const BlockSchedule& schedule);

}  // namespace kiefer
