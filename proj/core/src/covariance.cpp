#include "kiefer/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kiefer/error.hpp"

namespace kiefer {

std::size_t default_max_lag(std::size_t n) {
  const auto lag = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-9));
  return std::clamp<std::size_t>(lag, 1, 1000);
}

namespace {

using Index = Eigen::Index;

// Lag-k covariance matrix C[j][j'] = E (1{X_0 <= s_j} - F_j)(1{X_k <= s_j'} - F_j')
// from joint cell counts over `pairs` pairs.
Eigen::MatrixXd covariance_from_counts(const std::vector<std::size_t>& counts, std::size_t cells,
                                       std::size_t pairs, const Eigen::VectorXd& Fs) {
  const std::size_t npts = cells - 2;
  // prefix[a][b]: pairs with first cell <= a and second cell <= b
  std::vector<double> prefix(cells * cells, 0.0);
  for (std::size_t a = 0; a < cells; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < cells; ++b) {
      row += static_cast<double>(counts[a * cells + b]);
      prefix[a * cells + b] = row + (a > 0 ? prefix[(a - 1) * cells + b] : 0.0);
    }
  }
  const double inv = 1.0 / static_cast<double>(pairs);
  Eigen::MatrixXd C(static_cast<Index>(npts), static_cast<Index>(npts));
  for (std::size_t j = 0; j < npts; ++j) {
    const double p0 = prefix[(j + 1) * cells + (cells - 1)] * inv;
    for (std::size_t jj = 0; jj < npts; ++jj) {
      const double pk = prefix[(cells - 1) * cells + (jj + 1)] * inv;
      const double joint = prefix[(j + 1) * cells + (jj + 1)] * inv;
      const double fj = Fs(static_cast<Index>(j));
      const double fjj = Fs(static_cast<Index>(jj));
      C(static_cast<Index>(j), static_cast<Index>(jj)) = joint - fjj * p0 - fj * pk + fj * fjj;
    }
  }
  return C;
}

}  // namespace

LambdaEstimate estimate_lambda(const Trajectory& traj, const EcdfModel& F,
                               const DyadicGrid& grid, std::size_t max_lag,
                               std::size_t batches) {
  if (max_lag == 0) throw DomainError("estimate_lambda: max_lag must be positive");
  if (batches < 2) throw DomainError("estimate_lambda: need at least 2 batches");
  const std::size_t n = traj.size();
  if (n < 100 * max_lag) {
    throw RangeError("estimate_lambda: max_lag " + std::to_string(max_lag) +
                     " needs a trajectory of length >= " + std::to_string(100 * max_lag) +
                     ", got " + std::to_string(n));
  }
  const std::size_t npts = grid.size();
  const std::size_t cells = npts + 2;  // cell indices 0 .. 2^r
  Eigen::VectorXd Fs(static_cast<Index>(npts));
  for (std::size_t j = 0; j < npts; ++j) Fs(static_cast<Index>(j)) = F(grid.point(j));

  std::vector<std::uint16_t> cell(n);
  for (std::size_t i = 0; i < n; ++i) cell[i] = static_cast<std::uint16_t>(grid.cell_index(traj[i]));

  const auto dim = static_cast<Index>(npts);
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(dim, dim);
  std::vector<Eigen::MatrixXd> per_batch(batches, Eigen::MatrixXd::Zero(dim, dim));
  std::vector<std::size_t> counts(cells * cells);
  std::vector<std::size_t> all_counts(cells * cells);

  for (std::size_t k = 0; k <= max_lag; ++k) {
    const std::size_t pairs = n - k;
    std::fill(all_counts.begin(), all_counts.end(), 0);
    for (std::size_t b = 0; b < batches; ++b) {
      std::fill(counts.begin(), counts.end(), 0);
      const std::size_t lo = pairs * b / batches;
      const std::size_t hi = pairs * (b + 1) / batches;
      for (std::size_t i = lo; i < hi; ++i) ++counts[cell[i] * cells + cell[i + k]];
      for (std::size_t c = 0; c < counts.size(); ++c) all_counts[c] += counts[c];
      const Eigen::MatrixXd C = covariance_from_counts(counts, cells, hi - lo, Fs);
      per_batch[b] += k == 0 ? C : Eigen::MatrixXd(C + C.transpose());
    }
    const Eigen::MatrixXd C = covariance_from_counts(all_counts, cells, pairs, Fs);
    total += k == 0 ? C : Eigen::MatrixXd(C + C.transpose());
  }

  LambdaEstimate est;
  est.grid = grid;
  est.matrix = 0.5 * (total + total.transpose());
  est.max_lag = max_lag;
  est.batches = batches;
  est.samples = n;
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(dim, dim);
  for (auto& m : per_batch) {
    m = 0.5 * (m + m.transpose()).eval();
    mean += m;
  }
  mean /= static_cast<double>(batches);
  Eigen::MatrixXd ss = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& m : per_batch) ss += (m - mean).cwiseAbs2();
  const double nb = static_cast<double>(batches);
  est.se = (ss / ((nb - 1.0) * nb)).cwiseSqrt();
  return est;
}

Eigen::MatrixXd brownian_bridge_covariance(const DyadicGrid& grid) {
  const auto dim = static_cast<Index>(grid.size());
  Eigen::MatrixXd out(dim, dim);
  for (Index a = 0; a < dim; ++a) {
    for (Index b = 0; b < dim; ++b) {
      const double s = grid.point(static_cast<std::size_t>(a));
      const double t = grid.point(static_cast<std::size_t>(b));
      out(a, b) = std::min(s, t) - s * t;
    }
  }
  return out;
}

LambdaEstimate restrict_lambda(const LambdaEstimate& lambda, int r) {
  const int fine = lambda.grid.resolution();
  if (r < 1 || r > fine) throw DimensionError("restrict_lambda: target resolution must be in [1, source]");
  const DyadicGrid coarse(r);
  const std::size_t stride = std::size_t{1} << (fine - r);
  const auto dim = static_cast<Index>(coarse.size());
  LambdaEstimate out = lambda;
  out.grid = coarse;
  out.matrix.resize(dim, dim);
  out.se.resize(dim, dim);
  for (Index a = 0; a < dim; ++a) {
    for (Index b = 0; b < dim; ++b) {
      const auto fa = static_cast<Index>((static_cast<std::size_t>(a) + 1) * stride - 1);
      const auto fb = static_cast<Index>((static_cast<std::size_t>(b) + 1) * stride - 1);
      out.matrix(a, b) = lambda.matrix(fa, fb);
      out.se(a, b) = lambda.se.size() > 0 ? lambda.se(fa, fb) : 0.0;
    }
  }
  return out;
}

namespace {

std::optional<Eigen::MatrixXd> semidefinite_cholesky(const Eigen::MatrixXd& A, double tol) {
  if (A.rows() == 0) return Eigen::MatrixXd(0, 0);
  // |A_ij|^2 <= A_ii A_jj for PSD input, so a vanishing pivot bounds its column
  const double column_tol = 10.0 * std::sqrt(tol * std::max(A.diagonal().maxCoeff(), 0.0)) + 1e-300;
  const Index n = A.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double d = A(j, j) - L.row(j).head(j).squaredNorm();
    if (d < -tol) return std::nullopt;
    if (d <= tol) {
      // zero pivot: the rest of the column must already be explained
      for (Index i = j + 1; i < n; ++i) {
        const double rest = A(i, j) - L.row(i).head(j).dot(L.row(j).head(j));
        if (std::abs(rest) > column_tol) return std::nullopt;
      }
      continue;
    }
    const double pivot = std::sqrt(d);
    L(j, j) = pivot;
    for (Index i = j + 1; i < n; ++i) {
      L(i, j) = (A(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / pivot;
    }
  }
  return L;
}

}  // namespace

PsdFactor psd_factor(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) throw DimensionError("psd_factor: matrix must be square");
  const double scale = matrix.cwiseAbs().maxCoeff();
  if (matrix.size() > 0 && (matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + scale)) {
    throw DomainError("psd_factor: matrix must be symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  const double trace = sym.trace();
  const double tol = 1e-14 * std::max(trace, scale);
  if (auto L = semidefinite_cholesky(sym, tol)) return PsdFactor{*L, 0.0};
  if (!(trace > 0.0)) throw FactorizationError("psd_factor: indefinite matrix with nonpositive trace", 0.0);
  const double limit = 1e-4 * trace;
  const auto eye = Eigen::MatrixXd::Identity(sym.rows(), sym.cols());
  for (double delta = 1e-12 * trace; delta <= limit; delta *= 2.0) {
    if (auto L = semidefinite_cholesky(sym + delta * eye, tol)) return PsdFactor{*L, delta};
  }
  throw FactorizationError("psd_factor: jitter would exceed 1e-4 * trace; estimate too noisy", limit);
}

PsdFactor psd_factor(LambdaEstimate& lambda) {
  auto f = psd_factor(lambda.matrix);
  lambda.psd_repaired = f.repaired();
  return f;
}

}  // namespace kiefer
