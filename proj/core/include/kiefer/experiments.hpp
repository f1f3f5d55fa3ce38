#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kiefer/covariance.hpp"
#include "kiefer/dynamics.hpp"
#include "kiefer/empirical.hpp"
#include "kiefer/report.hpp"

namespace kiefer {

// Statistical verification suites. The almost-sure approximation rate of the
// empirical process by a Kiefer process cannot be observed directly (the
// coupled pair is not constructive), so each experiment checks a
// distributional proxy: marginal CLT, LIL envelope, variance growth,
// correlation decay, coupling scaling, the gamma = 1/2 boundary.

inline constexpr const char* kProxyNote =
    "distributional proxy: the almost-sure approximation rate is not directly "
    "observable because the coupling of R and K is not constructive";

/// Shared by every experiment of a run.
struct ExperimentContext {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Length of the independent trajectory the centering ECDF is fitted on.
  std::size_t calibration_length = 1'000'000;
};

/// ECDF of an independent trajectory of length max(ctx.calibration_length,
/// min_length), seeded from ctx.seed.
EcdfModel calibration_ecdf(const ProcessSpec& spec, const ExperimentContext& ctx,
                           std::size_t min_length = 0);

/// Replicate i of `spec`: independent uniform start, same burn-in.
ProcessSpec replicate_spec(const ProcessSpec& spec, std::uint64_t seed, std::size_t i);

/// Log-log growth fit of a statistic against n.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
  std::string statistic;
};

// --- data products -------------------------------------------------------

ExperimentReport simulate_experiment(const ProcessSpec& spec, std::size_t n,
                                     const ExperimentContext& ctx);

/// Lambda-hat on the resolution-r grid from a trajectory of length n.
/// max_lag = 0 selects default_max_lag(n).
ExperimentReport lambda_experiment(const ProcessSpec& spec, int r, std::size_t n,
                                   std::size_t max_lag, std::size_t batches,
                                   const ExperimentContext& ctx);

/// Lambda-hat at resolution r(L), one simulated Kiefer skeleton, and, when
/// check_seeds > 0, kiefer_validation over that many seeds.
ExperimentReport kiefer_experiment(const ProcessSpec& spec, int L, double epsilon,
                                   std::size_t lambda_n, std::size_t check_seeds,
                                   const ExperimentContext& ctx);

/// Distributional checks of simulate_kiefer over `seeds` independent paths:
/// increment covariance against 2^m Lambda, independence of disjoint blocks,
/// the continuity modulus Var(K(u,t) - K(v,t)) <= C t |u - v|, and linear
/// growth of Var K(s, t) in t.
ExperimentReport kiefer_validation(const LambdaEstimate& lambda, const BlockSchedule& schedule,
                                   std::size_t seeds, const ExperimentContext& ctx);

/// coupling_scaling over L_values with Lambda-hat from a length-lambda_n
/// trajectory. Criterion: the normalized W1 at the largest m is at most half
/// its value at the smallest m.
ExperimentReport coupling_experiment(const ProcessSpec& spec, std::span<const int> L_values,
                                     double epsilon, std::size_t sample_size,
                                     std::size_t control_repetitions, std::size_t lambda_n,
                                     const ExperimentContext& ctx);

/// beta-hat and the shuffled noise floor per lag; criterion: the fitted
/// log-log slope of (beta - floor) over lags where it is positive is <= 0.
ExperimentReport beta_experiment(const ProcessSpec& spec, std::span<const std::size_t> lags,
                                 std::size_t bins, std::size_t n, const ExperimentContext& ctx);

/// Lag covariance of 1{X <= s}, 1{X <= s2} for lags 1..max_lag. The decay
/// fit uses the leading run of lags whose value exceeds 3 batch SEs.
/// Criterion: slope <= slope_max.
ExperimentReport decay_experiment(const ProcessSpec& spec, double s, double s2,
                                  std::size_t max_lag, std::size_t n, double slope_max,
                                  const ExperimentContext& ctx);

// --- verification suites ---------------------------------------------------

struct CltOptions {
  std::size_t n = 1 << 14;
  std::size_t replicates = 2000;
  /// Length of the trajectory Lambda-hat is estimated from.
  std::size_t lambda_n = 1 << 20;
  std::size_t max_lag = 0;
  /// Optional criterion: Var of n^-1/2 R(band_level, n) inside [lo, hi].
  std::optional<std::pair<double, double>> variance_band;
  double band_level = 0.5;
};

/// Replicate distribution of n^-1/2 R(s_j, n): mean against 0 (SE includes
/// the calibration ECDF error), skewness and excess kurtosis within 5 SE of
/// 0, covariance against Lambda-hat within 5 combined SE, and PSD
/// repairability of the sample covariance with jitter <= 1e-6 trace.
ExperimentReport clt_marginals(const ProcessSpec& spec, const DyadicGrid& grid,
                               const CltOptions& options, const ExperimentContext& ctx);

struct LilOptions {
  std::size_t n_max = 1 << 22;
  double overshoot = 1.6;
  std::optional<double> band_lo;
  std::optional<double> band_hi;
};

/// S_n = sup_j |R(s_j, n)| / sqrt(2 n ln ln n) along n = 2^10, 2^11, ..,
/// n_max on one trajectory; running max against sqrt(max_j Lambda-hat_jj).
ExperimentReport lil_envelope(const ProcessSpec& spec, const DyadicGrid& grid,
                              const LilOptions& options, const ExperimentContext& ctx);

struct VarianceGrowth {
  std::vector<std::size_t> n_values;
  std::vector<double> variance;         // sample variance of R(s, n)
  std::vector<double> variance_se;
  std::vector<double> robust_variance;  // iqr_variance of R(s, n)
  std::vector<double> robust_variance_se;
  RateFit fit;
  RateFit robust_fit;
};

/// Replicate variance of R(s, n) at each n (prefixes of one trajectory per
/// replicate) and log-log fits against n.
VarianceGrowth variance_growth(const ProcessSpec& spec, double s,
                               std::span<const std::size_t> n_values, std::size_t replicates,
                               const ExperimentContext& ctx);

struct VarianceCheck {
  /// Criterion on the sample-variance slope, when set: |slope - 1| <= tol.
  std::optional<double> slope_tolerance;
  /// Criterion: robust Var/n strictly increasing across n_values.
  bool require_increasing = false;
};

ExperimentReport variance_growth_report(const ProcessSpec& spec, double s,
                                        std::span<const std::size_t> n_values,
                                        std::size_t replicates, const VarianceCheck& check,
                                        const ExperimentContext& ctx);

struct BoundaryOptions {
  std::vector<double> levels{0.3, 0.6};
  std::vector<std::size_t> n_values{1 << 12, 1 << 20};
  std::size_t replicates = 500;
  double ratio_tolerance = 0.15;
  std::size_t burn_in = 10'000;
};

/// LSV with gamma = 1/2: cross-replicate correlation of R(s, n), R(s', n)
/// per level pair and n, and std ratios against
/// (1 - F-hat(s)) / (1 - F-hat(s')). Level 0 is excluded (the limit vanishes
/// there). Criteria use the first two levels: correlation at the largest n
/// exceeds that at the smallest n, and the std ratio at the largest n is
/// within ratio_tolerance (relative) of the prediction.
ExperimentReport boundary_degeneracy(const BoundaryOptions& options, const ExperimentContext& ctx);

// --- suites ------------------------------------------------------------

/// One experiment of a suite: `kind` selects the function above and
/// `params` its arguments as strings.
struct ExperimentSpec {
  std::string name;
  std::string kind;
  std::map<std::string, std::string> params;

  bool operator==(const ExperimentSpec&) const = default;
};

struct SuiteConfig {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t calibration_length = 1'000'000;
  std::vector<ExperimentSpec> experiments;
};

/// Experiment kinds understood by run_experiment.
std::vector<std::string> experiment_kinds();
/// Parameter keys accepted by `kind`; throws DomainError for unknown kinds.
std::vector<std::string> allowed_params(const std::string& kind);
/// Throws DomainError naming the first unknown kind, key, or bad value.
void validate_experiment(const ExperimentSpec& spec);

/// Runs one experiment with seed derive_seed(ctx.seed, hash(name)).
ExperimentReport run_experiment(const ExperimentSpec& spec, const ExperimentContext& ctx);

/// Validates every experiment first, then runs them in order. On a hard
/// error the reports finished so far are passed to `on_report` already.
std::vector<ExperimentReport> run_suite(
    const SuiteConfig& config,
    const std::function<void(const ExperimentReport&)>& on_report = {});

/// Named experiment lists ("iid-anchors", "lsv", "boundary", "coupling",
/// "kiefer").
std::vector<ExperimentSpec> preset_suite(const std::string& name);

}  // namespace kiefer
