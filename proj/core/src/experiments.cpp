#include "kiefer/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string_view>

#include "kiefer/dependence.hpp"
#include "kiefer/error.hpp"
#include "kiefer/gaussian.hpp"
#include "kiefer/parallel.hpp"
#include "kiefer/rng.hpp"
#include "kiefer/stats.hpp"
#include "kiefer/transport.hpp"

namespace kiefer {

namespace {

// Seed streams below an experiment seed.
constexpr std::uint64_t kCalibrationStream = 0xc0ffee;
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kReplicateStream = 2;
constexpr std::uint64_t kGaussianStream = 3;
constexpr std::uint64_t kShuffleStream = 4;
constexpr std::uint64_t kBootstrapStream = 5;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string label(double v) { return format_double(v); }

std::string label(double a, double b) { return format_double(a) + "/" + format_double(b); }

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Trajectory data_trajectory(const ProcessSpec& spec, const ExperimentContext& ctx, std::size_t n) {
  return generate_trajectory(spec.reseeded(derive_seed(ctx.seed, kDataStream)), n);
}

// Standard error of an OLS slope; NaN with fewer than 3 points.
double slope_se(std::span<const double> x, std::span<const double> y, const LineFit& fit) {
  const std::size_t n = x.size();
  if (n < 3) return kNaN;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ssr += e * e;
  }
  if (sxx <= 0.0) return kNaN;
  return std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
}

// Batch-means standard error of the mean of a dependent series.
double batch_mean_se(std::span<const double> x, std::size_t batches = 32) {
  if (x.size() < 2 * batches) return kNaN;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t lo = x.size() * b / batches;
    const std::size_t hi = x.size() * (b + 1) / batches;
    means[b] = std::accumulate(x.begin() + static_cast<std::ptrdiff_t>(lo),
                               x.begin() + static_cast<std::ptrdiff_t>(hi), 0.0) /
               static_cast<double>(hi - lo);
  }
  return moments(means).mean_se();
}

// Bootstrap SE of iqr_variance.
double iqr_variance_se(std::span<const double> x, std::uint64_t seed, std::size_t resamples = 200) {
  Rng rng(seed);
  std::vector<double> boot(resamples);
  std::vector<double> draw(x.size());
  for (auto& b : boot) {
    for (auto& d : draw) d = x[rng.below(x.size())];
    b = iqr_variance(draw);
  }
  return std::sqrt(moments(boot).variance);
}

std::string fail_detail(const std::string& what, double value, double limit) {
  return what + " " + format_double(value) + " vs limit " + format_double(limit);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

}  // namespace

EcdfModel calibration_ecdf(const ProcessSpec& spec, const ExperimentContext& ctx,
                           std::size_t min_length) {
  const std::size_t length = std::max(ctx.calibration_length, min_length);
  require(length > 0, "calibration length must be positive");
  return EcdfModel::fit(
      generate_trajectory(spec.reseeded(derive_seed(ctx.seed, kCalibrationStream)), length));
}

ProcessSpec replicate_spec(const ProcessSpec& spec, std::uint64_t seed, std::size_t i) {
  return spec.reseeded(derive_seed(seed, i));
}

ExperimentReport simulate_experiment(const ProcessSpec& spec, std::size_t n,
                                     const ExperimentContext& ctx) {
  require(n > 0, "simulate: n must be positive");
  const Trajectory traj = data_trajectory(spec, ctx, n);
  ExperimentReport report;
  report.kind = "simulate";
  Table table{"trajectory", {"i", "x"}, {}};
  for (std::size_t i = 0; i < traj.size(); ++i) table.add_row({static_cast<double>(i), traj[i]});
  report.tables.push_back(std::move(table));
  const auto v = traj.values();
  report.add_statistic("mean", std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n),
                       batch_mean_se(v));
  report.add_statistic("min", *std::min_element(v.begin(), v.end()), kNaN);
  report.add_statistic("max", *std::max_element(v.begin(), v.end()), kNaN);
  return report;
}

ExperimentReport lambda_experiment(const ProcessSpec& spec, int r, std::size_t n,
                                   std::size_t max_lag, std::size_t batches,
                                   const ExperimentContext& ctx) {
  const DyadicGrid grid(r);
  const EcdfModel F = calibration_ecdf(spec, ctx);
  const Trajectory traj = data_trajectory(spec, ctx, n);
  LambdaEstimate est =
      estimate_lambda(traj, F, grid, max_lag == 0 ? default_max_lag(n) : max_lag, batches);
  const PsdFactor factor = psd_factor(est);

  ExperimentReport report;
  report.kind = "lambda";
  Table table{"lambda", {"s", "s2", "value", "se"}, {}};
  const auto pts = grid.points();
  const auto d = static_cast<Eigen::Index>(grid.size());
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      table.add_row({pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)],
                     est.matrix(i, j), est.se(i, j)});
    }
  }
  report.tables.push_back(std::move(table));
  if (grid.size() <= 15) {
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i; j < d; ++j) {
        report.add_statistic(
            "lambda@" + label(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]),
            est.matrix(i, j), est.se(i, j));
      }
    }
  }
  report.add_statistic("max_lag", static_cast<double>(est.max_lag), 0.0);
  report.add_statistic("jitter", factor.jitter, 0.0);
  report.add_statistic("psd_repaired", est.psd_repaired ? 1.0 : 0.0, 0.0);

  if (spec.kind == ProcessKind::Iid) {
    const Eigen::MatrixXd bridge = brownian_bridge_covariance(grid);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        worst = std::max(worst, std::abs(est.matrix(i, j) - bridge(i, j)) / est.se(i, j));
      }
    }
    report.add_statistic("max_bridge_z", worst, kNaN);
    report.add_criterion("bridge_within_5se", worst <= 5.0,
                         fail_detail("max |lambda - (s^s' - ss')| / SE", worst, 5.0));
  }
  return report;
}

ExperimentReport kiefer_validation(const LambdaEstimate& lambda, const BlockSchedule& schedule,
                                   std::size_t seeds, const ExperimentContext& ctx) {
  require(seeds >= 10, "kiefer validation: at least 10 seeds");
  const std::size_t blocks = schedule.block_count();
  const auto dim = static_cast<Eigen::Index>(lambda.grid.size());
  const auto cols = static_cast<Eigen::Index>(blocks + 1);
  const PsdFactor factor = psd_factor(lambda.matrix);
  // The covariance actually sampled: Lambda plus any jitter of the repair.
  const Eigen::MatrixXd target = factor.lower * factor.lower.transpose();
  const double block_scale = std::ldexp(1.0, schedule.m);

  std::vector<Eigen::MatrixXd> paths(seeds);
  parallel_for(seeds, ctx.threads, [&](std::size_t i) {
    paths[i] = simulate_kiefer(lambda, schedule, derive_seed(ctx.seed, i)).values;
  });
  auto series = [&](Eigen::Index row, Eigen::Index col, Eigen::Index base) {
    std::vector<double> v(seeds);
    for (std::size_t i = 0; i < seeds; ++i) v[i] = paths[i](row, col) - paths[i](row, base);
    return v;
  };

  ExperimentReport report;
  report.kind = "kiefer_validation";
  report.add_statistic("jitter", factor.jitter, 0.0);

  double worst_inc = 0.0;
  Table inc{"increment_covariance", {"s", "s2", "sample", "se", "expected"}, {}};
  const auto pts = lambda.grid.points();
  for (Eigen::Index a = 0; a < dim; ++a) {
    const auto xa = series(a, 1, 0);
    for (Eigen::Index b = a; b < dim; ++b) {
      const auto xb = series(b, 1, 0);
      const auto [c, se] = covariance_with_se(xa, xb);
      const double expected = block_scale * target(a, b);
      worst_inc = std::max(worst_inc, std::abs(c - expected) / se);
      inc.add_row({pts[static_cast<std::size_t>(a)], pts[static_cast<std::size_t>(b)], c, se,
                   expected});
    }
  }
  report.tables.push_back(std::move(inc));
  report.add_statistic("increment_max_z", worst_inc, kNaN);
  report.add_criterion("increment_covariance", worst_inc <= 5.0,
                       fail_detail("max |cov - 2^m Lambda| / SE", worst_inc, 5.0));

  if (blocks >= 2) {
    double worst_cross = 0.0;
    for (Eigen::Index a = 0; a < dim; ++a) {
      const auto xa = series(a, 1, 0);
      for (Eigen::Index b = 0; b < dim; ++b) {
        const auto xb = series(b, 2, 1);
        const auto [c, se] = covariance_with_se(xa, xb);
        worst_cross = std::max(worst_cross, std::abs(c) / se);
      }
    }
    report.add_statistic("cross_block_max_z", worst_cross, kNaN);
    report.add_criterion("disjoint_blocks_uncorrelated", worst_cross <= 5.0,
                         fail_detail("max |cross cov| / SE", worst_cross, 5.0));
  }

  // Modulus: Var(K(u,t) - K(v,t)) <= C t |u - v| with C = 4 max Lambda_jj /
  // min grid gap, t the time elapsed since the skeleton origin.
  const double gap = 1.0 / lambda.grid.cells();
  const double c_hat = 4.0 * target.diagonal().maxCoeff() / gap;
  double worst_excess = -std::numeric_limits<double>::infinity();
  double calibrated = 0.0;
  std::vector<double> diff(seeds);
  for (Eigen::Index l = 1; l < cols; ++l) {
    const double elapsed = static_cast<double>(l) * block_scale;
    for (Eigen::Index a = 0; a < dim; ++a) {
      for (Eigen::Index b = a + 1; b < dim; ++b) {
        for (std::size_t i = 0; i < seeds; ++i) {
          diff[i] = (paths[i](a, l) - paths[i](a, 0)) - (paths[i](b, l) - paths[i](b, 0));
        }
        const Moments mo = moments(diff);
        const double du = static_cast<double>(b - a) * gap;
        const double bound = c_hat * elapsed * du;
        worst_excess = std::max(worst_excess, (mo.variance - bound) / mo.variance_se);
        calibrated = std::max(calibrated, mo.variance / (elapsed * du));
      }
    }
  }
  report.add_statistic("modulus_constant_bound", c_hat, 0.0);
  report.add_statistic("modulus_constant_observed", calibrated, kNaN);
  const bool modulus_ok = dim < 2 || worst_excess <= 5.0;
  report.add_criterion("modulus", modulus_ok,
                       dim < 2 ? "single grid point"
                               : fail_detail("max (Var - C t |u-v|) / SE", worst_excess, 5.0));

  // Var K(s, t) grows linearly: terminal variance against blocks 2^m Lambda_jj.
  double worst_lin = 0.0;
  for (Eigen::Index a = 0; a < dim; ++a) {
    const Moments mo = moments(series(a, cols - 1, 0));
    const double expected = static_cast<double>(blocks) * block_scale * target(a, a);
    worst_lin = std::max(worst_lin, std::abs(mo.variance - expected) / mo.variance_se);
  }
  report.add_statistic("terminal_variance_max_z", worst_lin, kNaN);
  report.add_criterion("linear_variance_growth", worst_lin <= 5.0,
                       fail_detail("max |Var K(s,t) - t Lambda_ss| / SE", worst_lin, 5.0));
  return report;
}

ExperimentReport kiefer_experiment(const ProcessSpec& spec, int L, double epsilon,
                                   std::size_t lambda_n, std::size_t check_seeds,
                                   const ExperimentContext& ctx) {
  const BlockSchedule schedule = block_schedule(L, epsilon);
  const EcdfModel F = calibration_ecdf(spec, ctx);
  const Trajectory traj = data_trajectory(spec, ctx, lambda_n);
  LambdaEstimate est = estimate_lambda(traj, F, DyadicGrid(schedule.r), default_max_lag(lambda_n));
  const KieferPath path = simulate_kiefer(est, schedule, derive_seed(ctx.seed, kGaussianStream));

  ExperimentReport report;
  if (check_seeds > 0) {
    ExperimentContext sub = ctx;
    sub.seed = derive_seed(ctx.seed, kReplicateStream);
    report = kiefer_validation(est, schedule, check_seeds, sub);
  }
  report.kind = "kiefer";
  Table table{"kiefer", {"s", "t", "value"}, {}};
  const auto pts = path.grid.points();
  for (std::size_t l = 0; l < path.times.size(); ++l) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      table.add_row({pts[j], static_cast<double>(path.times[l]),
                     path.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l))});
    }
  }
  report.tables.insert(report.tables.begin(), std::move(table));
  report.add_statistic("r", schedule.r, 0.0);
  report.add_statistic("m", schedule.m, 0.0);
  report.add_statistic("blocks", static_cast<double>(schedule.block_count()), 0.0);
  report.add_criterion("schedule_unflagged", !schedule.flagged(),
                       "4r = " + std::to_string(4 * schedule.r) + ", m = " +
                           std::to_string(schedule.m));
  return report;
}

ExperimentReport coupling_experiment(const ProcessSpec& spec, std::span<const int> L_values,
                                     double epsilon, std::size_t sample_size,
                                     std::size_t control_repetitions, std::size_t lambda_n,
                                     const ExperimentContext& ctx) {
  require(L_values.size() >= 2, "couple: at least two L values");
  int r_max = 1;
  int m_max = 0;
  for (int L : L_values) {
    const BlockSchedule s = block_schedule(L, epsilon);
    r_max = std::max(r_max, s.r);
    m_max = std::max(m_max, s.m);
  }
  // Centering error of F enters every block sum as 2^m (F-hat - F).
  const EcdfModel F = calibration_ecdf(spec, ctx, std::size_t{64} << m_max);
  const Trajectory traj = data_trajectory(spec, ctx, lambda_n);
  const LambdaEstimate est = estimate_lambda(traj, F, DyadicGrid(r_max), default_max_lag(lambda_n));

  CouplingScalingOptions options;
  options.epsilon = epsilon;
  options.sample_size = sample_size;
  options.control_repetitions = control_repetitions;
  options.seed = derive_seed(ctx.seed, kReplicateStream);
  options.threads = ctx.threads;
  const auto results = coupling_scaling(spec, F, est, L_values, options);

  ExperimentReport report;
  report.kind = "couple";
  Table table{"coupling",
              {"L", "r", "m", "sample_size", "w1", "w1_normalized", "control_band_lo",
               "control_band_hi", "min_cost", "mean_cost", "max_cost"},
              {}};
  bool controls_ok = true;
  std::string controls_detail = "all L";
  for (const auto& c : results) {
    const auto& s = *c.schedule;
    table.add_row({static_cast<double>(s.L), static_cast<double>(s.r), static_cast<double>(s.m),
                   static_cast<double>(c.sample_size), c.w1, c.w1_normalized, c.control_band_lo,
                   c.control_band_hi, c.min_cost, c.mean_cost, c.max_cost});
    // Band = control mean +- 3 sd, so sd is its width / 6.
    const double control_sd = (c.control_band_hi - c.control_band_lo) / 6.0;
    report.add_statistic("w1_normalized@L=" + std::to_string(s.L), c.w1_normalized, control_sd);
    report.add_statistic("control_mid@L=" + std::to_string(s.L),
                         0.5 * (c.control_band_lo + c.control_band_hi), control_sd);
    const bool ok = std::isfinite(c.control_band_lo) && std::isfinite(c.control_band_hi) &&
                    c.control_band_lo <= c.control_band_hi && c.w1_normalized >= c.control_band_lo;
    if (!ok && controls_ok) {
      controls_ok = false;
      controls_detail = "L = " + std::to_string(s.L) + ": w1/2^(m/2) " +
                        format_double(c.w1_normalized) + " below control band [" +
                        format_double(c.control_band_lo) + ", " +
                        format_double(c.control_band_hi) + "]";
    }
  }
  report.tables.push_back(std::move(table));

  auto by_m = [](const CouplingReport& a, const CouplingReport& b) {
    return a.schedule->m < b.schedule->m;
  };
  const auto lo = std::min_element(results.begin(), results.end(), by_m);
  const auto hi = std::max_element(results.begin(), results.end(), by_m);
  const double ratio = hi->w1_normalized / lo->w1_normalized;
  report.add_statistic("normalized_ratio", ratio, kNaN);
  report.add_criterion("normalized_w1_halves", ratio <= 0.5,
                       "w1/2^(m/2) at m = " + std::to_string(hi->schedule->m) + " over m = " +
                           std::to_string(lo->schedule->m) + ": " + format_double(ratio) +
                           " vs limit 0.5");
  report.add_criterion("controls_bound_noise_floor", controls_ok, controls_detail);
  return report;
}

ExperimentReport beta_experiment(const ProcessSpec& spec, std::span<const std::size_t> lags,
                                 std::size_t bins, std::size_t n, const ExperimentContext& ctx) {
  require(!lags.empty(), "beta: no lags");
  const Trajectory traj = data_trajectory(spec, ctx, n);
  const auto est = estimate_beta_profile(traj, lags, bins);
  const auto floor = shuffled_beta_profile(traj, lags, bins, derive_seed(ctx.seed, kShuffleStream));

  // SE from four disjoint quarters, when each supports the largest lag.
  constexpr std::size_t kParts = 4;
  const std::size_t max_lag = *std::max_element(lags.begin(), lags.end());
  std::vector<double> se(lags.size(), kNaN);
  if (n / kParts >= max_lag + 100 * bins) {
    std::vector<std::vector<BetaEstimate>> parts;
    const auto v = traj.values();
    for (std::size_t p = 0; p < kParts; ++p) {
      const std::size_t lo = n * p / kParts;
      const std::size_t hi = n * (p + 1) / kParts;
      const Trajectory part(std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(lo),
                                                v.begin() + static_cast<std::ptrdiff_t>(hi)),
                            traj.spec());
      parts.push_back(estimate_beta_profile(part, lags, bins));
    }
    for (std::size_t k = 0; k < lags.size(); ++k) {
      std::vector<double> x(kParts);
      for (std::size_t p = 0; p < kParts; ++p) x[p] = parts[p][k].value;
      // Each quarter carries 4x the variance of the full-length estimate.
      se[k] = std::sqrt(moments(x).variance / static_cast<double>(kParts));
    }
  }

  ExperimentReport report;
  report.kind = "beta";
  Table table{"beta", {"lag", "beta", "se", "shuffled_floor", "noise_floor", "pairs"}, {}};
  bool in_unit = true;
  std::vector<std::pair<double, double>> excess;
  for (std::size_t k = 0; k < lags.size(); ++k) {
    const double nf = independence_noise_floor(bins, est[k].pairs);
    table.add_row({static_cast<double>(lags[k]), est[k].value, se[k], floor[k].value, nf,
                   static_cast<double>(est[k].pairs)});
    report.add_statistic("beta@" + std::to_string(lags[k]), est[k].value, se[k]);
    report.add_statistic("shuffled_floor@" + std::to_string(lags[k]), floor[k].value, kNaN);
    in_unit = in_unit && est[k].value >= 0.0 && est[k].value <= 1.0;
    const double e = est[k].value - floor[k].value;
    if (e > 0.0) excess.emplace_back(static_cast<double>(lags[k]), e);
  }
  report.tables.push_back(std::move(table));
  report.add_criterion("beta_in_unit_interval", in_unit);
  if (excess.size() >= 3) {
    const DecayFit fit = fit_decay(excess);
    report.add_statistic("excess_slope", fit.slope, kNaN);
    report.add_criterion("excess_nonincreasing", fit.slope <= 0.0,
                         fail_detail("log-log slope of beta - floor", fit.slope, 0.0));
  } else {
    report.add_criterion("excess_nonincreasing", true,
                         "fewer than 3 lags above the shuffled floor");
  }
  return report;
}

ExperimentReport decay_experiment(const ProcessSpec& spec, double s, double s2,
                                  std::size_t max_lag, std::size_t n, double slope_max,
                                  const ExperimentContext& ctx) {
  require(max_lag >= 3, "decay: max_lag >= 3");
  const EcdfModel F = calibration_ecdf(spec, ctx);
  const Trajectory traj = data_trajectory(spec, ctx, n);
  std::vector<std::size_t> lags(max_lag);
  std::iota(lags.begin(), lags.end(), std::size_t{1});
  const auto profile = lag_covariance_profile(traj, F, s, s2, lags);

  std::size_t used = 0;
  while (used < lags.size() && profile.values[used] > 3.0 * profile.se[used]) ++used;

  ExperimentReport report;
  report.kind = "decay";
  Table table{"lag_covariance", {"lag", "value", "se", "in_fit"}, {}};
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < lags.size(); ++k) {
    table.add_row({static_cast<double>(lags[k]), profile.values[k], profile.se[k],
                   k < used ? 1.0 : 0.0});
    if (k < used) pts.emplace_back(static_cast<double>(lags[k]), profile.values[k]);
  }
  report.tables.push_back(std::move(table));
  report.add_statistic("fit_points", static_cast<double>(used), 0.0);
  if (used >= 3) {
    const DecayFit fit = fit_decay(pts);
    std::vector<double> lx, ly;
    for (const auto& [x, y] : pts) {
      lx.push_back(std::log(x));
      ly.push_back(std::log(y));
    }
    report.add_statistic("slope", fit.slope,
                         slope_se(lx, ly, LineFit{fit.slope, fit.intercept, fit.r_squared}));
    report.add_statistic("r_squared", fit.r_squared, kNaN);
    report.add_statistic("fit_max_lag", fit.max_lag, 0.0);
    report.add_criterion("decay_slope", fit.slope <= slope_max,
                         fail_detail("log-log slope", fit.slope, slope_max));
  } else {
    report.add_criterion("decay_slope", false,
                         "only " + std::to_string(used) + " leading lags exceed 3 SE");
  }
  return report;
}

ExperimentReport clt_marginals(const ProcessSpec& spec, const DyadicGrid& grid,
                               const CltOptions& options, const ExperimentContext& ctx) {
  require(options.n >= (1u << 10), "clt: n >= 2^10");
  require(options.replicates >= 500, "clt: replicates >= 500");
  const std::size_t N = options.replicates;
  const std::size_t d = grid.size();
  const EcdfModel F = calibration_ecdf(spec, ctx);

  std::vector<std::vector<double>> rows(N);
  const std::uint64_t rep_seed = derive_seed(ctx.seed, kReplicateStream);
  const std::vector<std::size_t> times{options.n};
  const double norm = 1.0 / std::sqrt(static_cast<double>(options.n));
  parallel_for(N, ctx.threads, [&](std::size_t i) {
    const Trajectory t = generate_trajectory(replicate_spec(spec, rep_seed, i), options.n);
    const EmpiricalField f = empirical_process(t, F, grid, times);
    rows[i].resize(d);
    for (std::size_t j = 0; j < d; ++j) rows[i][j] = f.at(j, 0) * norm;
  });
  std::vector<std::vector<double>> cols(d, std::vector<double>(N));
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < d; ++j) cols[j][i] = rows[i][j];
  }

  const Trajectory long_traj = data_trajectory(spec, ctx, options.lambda_n);
  const LambdaEstimate est = estimate_lambda(
      long_traj, F, grid,
      options.max_lag == 0 ? default_max_lag(options.lambda_n) : options.max_lag);

  ExperimentReport report;
  report.kind = "clt";
  const auto pts = grid.points();
  const double n_cal = static_cast<double>(std::max(ctx.calibration_length, std::size_t{1}));
  Table marg{"marginals",
             {"s", "mean", "mean_se", "variance", "variance_se", "skewness", "skewness_se",
              "excess_kurtosis", "kurtosis_se"},
             {}};
  double worst_mean = 0.0, worst_skew = 0.0, worst_kurt = 0.0;
  std::vector<Moments> mom(d);
  for (std::size_t j = 0; j < d; ++j) {
    const Moments m = moments(cols[j]);
    mom[j] = m;
    marg.add_row({pts[j], m.mean, m.mean_se(), m.variance, m.variance_se, m.skewness,
                  m.skewness_se(), m.excess_kurtosis, m.kurtosis_se()});
    const auto jj = static_cast<Eigen::Index>(j);
    // The centering F-hat is shared by all replicates: its error adds
    // n Lambda_ss / n_cal to the variance of the replicate mean.
    const double cal_var = static_cast<double>(options.n) * std::max(est.matrix(jj, jj), 0.0) / n_cal;
    const double mean_se = std::sqrt(m.mean_se() * m.mean_se() + cal_var);
    worst_mean = std::max(worst_mean, std::abs(m.mean) / mean_se);
    worst_skew = std::max(worst_skew, std::abs(m.skewness) / m.skewness_se());
    worst_kurt = std::max(worst_kurt, std::abs(m.excess_kurtosis) / m.kurtosis_se());
    report.add_statistic("mean@" + label(pts[j]), m.mean, mean_se);
    report.add_statistic("variance@" + label(pts[j]), m.variance, m.variance_se);
    report.add_statistic("skewness@" + label(pts[j]), m.skewness, m.skewness_se());
    report.add_statistic("kurtosis@" + label(pts[j]), m.excess_kurtosis, m.kurtosis_se());
  }
  report.tables.push_back(std::move(marg));

  Table cov{"covariance", {"s", "s2", "sample", "sample_se", "lambda", "lambda_se", "z"}, {}};
  Eigen::MatrixXd sample(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  double worst_cov = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      const auto [c, se] = covariance_with_se(cols[a], cols[b]);
      const auto ia = static_cast<Eigen::Index>(a);
      const auto ib = static_cast<Eigen::Index>(b);
      sample(ia, ib) = sample(ib, ia) = c;
      const double lam = est.matrix(ia, ib);
      const double lse = est.se(ia, ib);
      const double z = std::abs(c - lam) / std::sqrt(se * se + lse * lse);
      worst_cov = std::max(worst_cov, z);
      cov.add_row({pts[a], pts[b], c, se, lam, lse, z});
      if (d <= 15 && a != b) report.add_statistic("cov@" + label(pts[a], pts[b]), c, se);
      if (d <= 15) report.add_statistic("lambda@" + label(pts[a], pts[b]), lam, lse);
    }
  }
  report.tables.push_back(std::move(cov));

  report.add_criterion("mean_zero", worst_mean <= 3.0,
                       fail_detail("max |mean| / SE", worst_mean, 3.0));
  report.add_criterion("skewness_zero", worst_skew <= 5.0,
                       fail_detail("max |skewness| / SE", worst_skew, 5.0));
  report.add_criterion("kurtosis_zero", worst_kurt <= 5.0,
                       fail_detail("max |excess kurtosis| / SE", worst_kurt, 5.0));
  report.add_criterion("covariance_matches_lambda", worst_cov <= 5.0,
                       fail_detail("max |cov - Lambda-hat| / combined SE", worst_cov, 5.0));
  try {
    const PsdFactor f = psd_factor(sample);
    const double limit = 1e-6 * sample.trace();
    report.add_statistic("sample_cov_jitter", f.jitter, 0.0);
    report.add_criterion("sample_cov_psd", f.jitter <= limit,
                         fail_detail("jitter", f.jitter, limit));
  } catch (const FactorizationError& e) {
    report.add_criterion("sample_cov_psd", false, e.what());
  }
  if (options.variance_band) {
    const std::size_t j = grid.index_of(options.band_level);
    require(j != DyadicGrid::npos, "clt: band_level is not a grid point");
    const auto [lo, hi] = *options.variance_band;
    const double v = mom[j].variance;
    report.add_criterion("variance_band", v >= lo && v <= hi,
                         "Var at s = " + label(options.band_level) + ": " + format_double(v) +
                             " vs [" + format_double(lo) + ", " + format_double(hi) + "]");
  }
  return report;
}

ExperimentReport lil_envelope(const ProcessSpec& spec, const DyadicGrid& grid,
                              const LilOptions& options, const ExperimentContext& ctx) {
  require(options.n_max >= (1u << 16), "lil: n_max >= 2^16");
  // The centering error n (F-hat - F) must stay small against sqrt(n ln ln n).
  const EcdfModel F = calibration_ecdf(spec, ctx, 16 * options.n_max);
  const Trajectory traj = data_trajectory(spec, ctx, options.n_max);
  std::vector<std::size_t> times;
  for (std::size_t t = 1u << 10; t <= options.n_max; t *= 2) times.push_back(t);
  if (times.back() != options.n_max) times.push_back(options.n_max);
  const EmpiricalField field = empirical_process(traj, F, grid, times);
  const LambdaEstimate est = estimate_lambda(traj, F, grid, default_max_lag(options.n_max));

  ExperimentReport report;
  report.kind = "lil";
  Table table{"lil", {"n", "S_n", "running_max"}, {}};
  double running = 0.0;
  bool finite = true;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double n = static_cast<double>(times[k]);
    const double s_n = field.values.col(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff() /
                       std::sqrt(2.0 * n * std::log(std::log(n)));
    finite = finite && std::isfinite(s_n) && s_n >= 0.0;
    running = std::max(running, s_n);
    table.add_row({n, s_n, running});
  }
  report.tables.push_back(std::move(table));

  Eigen::Index jmax = 0;
  const double max_diag = est.matrix.diagonal().maxCoeff(&jmax);
  const double envelope = std::sqrt(std::max(max_diag, 0.0));
  const double envelope_se = envelope > 0.0 ? est.se(jmax, jmax) / (2.0 * envelope) : kNaN;
  // One path: the running maximum has no Monte Carlo replicate to take an SE from.
  report.add_statistic("running_max", running, kNaN);
  report.add_statistic("envelope", envelope, envelope_se);
  report.add_criterion("finite_nonnegative", finite);
  const double limit = options.overshoot * envelope;
  report.add_criterion("within_overshoot", running <= limit,
                       fail_detail("running max", running, limit));
  if (options.band_lo || options.band_hi) {
    const double lo = options.band_lo.value_or(0.0);
    const double hi = options.band_hi.value_or(std::numeric_limits<double>::infinity());
    report.add_criterion("within_band", running >= lo && running <= hi,
                         "running max " + format_double(running) + " vs [" + format_double(lo) +
                             ", " + format_double(hi) + "]");
  }
  return report;
}

VarianceGrowth variance_growth(const ProcessSpec& spec, double s,
                               std::span<const std::size_t> n_values, std::size_t replicates,
                               const ExperimentContext& ctx) {
  require(n_values.size() >= 3, "variance growth: at least 3 n values");
  require(replicates >= 10, "variance growth: at least 10 replicates");
  for (std::size_t k = 0; k < n_values.size(); ++k) require(n_values[k] >= 2, "variance growth: n >= 2");
  const double ratio = static_cast<double>(n_values[1]) / static_cast<double>(n_values[0]);
  require(ratio > 1.0, "variance growth: n values must increase");
  for (std::size_t k = 1; k < n_values.size(); ++k) {
    const double q = static_cast<double>(n_values[k]) / static_cast<double>(n_values[k - 1]);
    require(std::abs(q / ratio - 1.0) <= 1e-9, "variance growth: n values must be geometric");
  }

  const EcdfModel F = calibration_ecdf(spec, ctx);
  const std::size_t n_max = n_values.back();
  const std::size_t K = n_values.size();
  std::vector<std::vector<double>> per_rep(replicates);
  const std::uint64_t rep_seed = derive_seed(ctx.seed, kReplicateStream);
  const std::vector<double> levels{s};
  parallel_for(replicates, ctx.threads, [&](std::size_t i) {
    const Trajectory t = generate_trajectory(replicate_spec(spec, rep_seed, i), n_max);
    const Eigen::MatrixXd v = empirical_values(t, F, levels, n_values);
    per_rep[i].assign(v.data(), v.data() + K);
  });

  VarianceGrowth out;
  out.n_values.assign(n_values.begin(), n_values.end());
  std::vector<double> lx, ly, lr;
  std::vector<double> x(replicates);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < replicates; ++i) x[i] = per_rep[i][k];
    const Moments m = moments(x);
    out.variance.push_back(m.variance);
    out.variance_se.push_back(m.variance_se);
    out.robust_variance.push_back(iqr_variance(x));
    out.robust_variance_se.push_back(iqr_variance_se(x, derive_seed(ctx.seed, kBootstrapStream + k)));
    lx.push_back(std::log(static_cast<double>(n_values[k])));
    ly.push_back(std::log(m.variance));
    lr.push_back(std::log(out.robust_variance.back()));
  }
  const LineFit f = fit_line(lx, ly);
  const LineFit g = fit_line(lx, lr);
  out.fit = RateFit{f.slope, f.intercept, f.r_squared, K, "variance"};
  out.robust_fit = RateFit{g.slope, g.intercept, g.r_squared, K, "robust_variance"};
  return out;
}

ExperimentReport variance_growth_report(const ProcessSpec& spec, double s,
                                        std::span<const std::size_t> n_values,
                                        std::size_t replicates, const VarianceCheck& check,
                                        const ExperimentContext& ctx) {
  const VarianceGrowth g = variance_growth(spec, s, n_values, replicates, ctx);
  ExperimentReport report;
  report.kind = "rates";
  Table table{"variance",
              {"n", "variance", "variance_se", "variance_over_n", "robust_variance",
               "robust_variance_se", "robust_variance_over_n"},
              {}};
  std::vector<double> lx, ly, lr;
  for (std::size_t k = 0; k < g.n_values.size(); ++k) {
    const double n = static_cast<double>(g.n_values[k]);
    table.add_row({n, g.variance[k], g.variance_se[k], g.variance[k] / n, g.robust_variance[k],
                   g.robust_variance_se[k], g.robust_variance[k] / n});
    report.add_statistic("variance_over_n@" + std::to_string(g.n_values[k]), g.variance[k] / n,
                         g.variance_se[k] / n);
    report.add_statistic("robust_variance_over_n@" + std::to_string(g.n_values[k]),
                         g.robust_variance[k] / n, g.robust_variance_se[k] / n);
    lx.push_back(std::log(n));
    ly.push_back(std::log(g.variance[k]));
    lr.push_back(std::log(g.robust_variance[k]));
  }
  report.tables.push_back(std::move(table));
  report.add_statistic("slope", g.fit.slope,
                       slope_se(lx, ly, LineFit{g.fit.slope, g.fit.intercept, g.fit.r_squared}));
  report.add_statistic("robust_slope", g.robust_fit.slope,
                       slope_se(lx, lr,
                                LineFit{g.robust_fit.slope, g.robust_fit.intercept,
                                        g.robust_fit.r_squared}));
  if (check.slope_tolerance) {
    const double dev = std::abs(g.fit.slope - 1.0);
    report.add_criterion("slope_near_one", dev <= *check.slope_tolerance,
                         fail_detail("|slope - 1|", dev, *check.slope_tolerance));
  }
  if (check.require_increasing) {
    bool inc = true;
    std::string detail = "robust Var/n:";
    for (std::size_t k = 0; k < g.n_values.size(); ++k) {
      const double v = g.robust_variance[k] / static_cast<double>(g.n_values[k]);
      detail += " " + format_double(v);
      if (k > 0 && !(v > g.robust_variance[k - 1] / static_cast<double>(g.n_values[k - 1]))) {
        inc = false;
      }
    }
    report.add_criterion("variance_over_n_increasing", inc, detail);
  }
  return report;
}

ExperimentReport boundary_degeneracy(const BoundaryOptions& options, const ExperimentContext& ctx) {
  require(options.n_values.size() >= 2, "boundary: at least 2 n values");
  require(options.replicates >= 20, "boundary: at least 20 replicates");
  std::vector<double> levels;
  std::vector<double> excluded;
  for (double s : options.levels) {
    require(s >= 0.0 && s < 1.0, "boundary: levels must lie in [0, 1)");
    (s > 0.0 ? levels : excluded).push_back(s);
  }
  require(levels.size() >= 2, "boundary: at least 2 positive levels");
  std::vector<std::size_t> n_values = options.n_values;
  require(std::is_sorted(n_values.begin(), n_values.end()) && n_values.front() >= 2,
          "boundary: n values must be ascending and >= 2");

  const ProcessSpec spec = ProcessSpec::lsv(0.5, 0, options.burn_in);
  const EcdfModel F = calibration_ecdf(spec, ctx);
  const std::size_t N = options.replicates;
  const std::size_t L = levels.size();
  const std::size_t K = n_values.size();
  std::vector<Eigen::MatrixXd> reps(N);
  const std::uint64_t rep_seed = derive_seed(ctx.seed, kReplicateStream);
  parallel_for(N, ctx.threads, [&](std::size_t i) {
    const Trajectory t = generate_trajectory(replicate_spec(spec, rep_seed, i), n_values.back());
    reps[i] = empirical_values(t, F, levels, n_values);
  });
  auto series = [&](std::size_t level, std::size_t k) {
    std::vector<double> v(N);
    for (std::size_t i = 0; i < N; ++i) {
      v[i] = reps[i](static_cast<Eigen::Index>(level), static_cast<Eigen::Index>(k));
    }
    return v;
  };
  auto subset = [](const std::vector<double>& v, const std::vector<std::size_t>& idx) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(v[i]);
    return out;
  };
  auto sd_ratio = [](const std::vector<double>& a, const std::vector<double>& b) {
    return std::sqrt(moments(a).variance / moments(b).variance);
  };

  ExperimentReport report;
  report.kind = "boundary";
  for (double s : excluded) {
    report.add_param("excluded_level", label(s));
  }
  Table table{"boundary",
              {"s", "s2", "n", "corr", "corr_se", "sd_ratio", "sd_ratio_se", "predicted_ratio"},
              {}};
  constexpr std::size_t kGroups = 20;
  double corr_first = 0.0, corr_last = 0.0, ratio_last = 0.0, predicted_first_pair = 0.0;
  for (std::size_t a = 0; a < L; ++a) {
    for (std::size_t b = a + 1; b < L; ++b) {
      const double predicted = (1.0 - F(levels[a])) / (1.0 - F(levels[b]));
      for (std::size_t k = 0; k < K; ++k) {
        const auto xa = series(a, k);
        const auto xb = series(b, k);
        const double c = correlation(xa, xb);
        const double c_se = jackknife_se(N, kGroups, [&](const std::vector<std::size_t>& idx) {
          return correlation(subset(xa, idx), subset(xb, idx));
        });
        const double q = sd_ratio(xa, xb);
        const double q_se = jackknife_se(N, kGroups, [&](const std::vector<std::size_t>& idx) {
          return sd_ratio(subset(xa, idx), subset(xb, idx));
        });
        table.add_row({levels[a], levels[b], static_cast<double>(n_values[k]), c, c_se, q, q_se,
                       predicted});
        const std::string tag = label(levels[a], levels[b]) + "@" + std::to_string(n_values[k]);
        report.add_statistic("corr@" + tag, c, c_se);
        report.add_statistic("sd_ratio@" + tag, q, q_se);
        if (a == 0 && b == 1) {
          if (k == 0) corr_first = c;
          if (k + 1 == K) {
            corr_last = c;
            ratio_last = q;
          }
        }
      }
      if (a == 0 && b == 1) predicted_first_pair = predicted;
      report.add_statistic("predicted_ratio@" + label(levels[a], levels[b]), predicted, kNaN);
    }
  }
  report.tables.push_back(std::move(table));
  report.add_criterion("correlation_increases", corr_last > corr_first,
                       "corr at n = " + std::to_string(n_values.back()) + ": " +
                           format_double(corr_last) + ", at n = " +
                           std::to_string(n_values.front()) + ": " + format_double(corr_first));
  const double rel = std::abs(ratio_last / predicted_first_pair - 1.0);
  report.add_criterion("std_ratio_matches", rel <= options.ratio_tolerance,
                       fail_detail("relative deviation of sd ratio", rel, options.ratio_tolerance));
  return report;
}

// --- suites --------------------------------------------------------------

namespace {

const std::vector<std::string> kProcessKeys{"process", "gamma", "rho", "burn_in", "coefficients"};

const std::map<std::string, std::vector<std::string>>& kind_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"simulate", {"n"}},
      {"lambda", {"r", "n", "max_lag", "batches"}},
      {"kiefer", {"L", "epsilon", "lambda_n", "check_seeds"}},
      {"couple", {"L", "epsilon", "sample_size", "control_reps", "lambda_n"}},
      {"beta", {"lags", "bins", "n"}},
      {"decay", {"s", "s2", "max_lag", "n", "slope_max"}},
      {"clt", {"r", "n", "replicates", "lambda_n", "max_lag", "variance_band", "band_level"}},
      {"lil", {"r", "n_max", "overshoot", "band"}},
      {"rates", {"s", "n_values", "replicates", "slope_tolerance", "require_increasing"}},
      {"boundary", {"levels", "n_values", "replicates", "ratio_tolerance", "burn_in"}},
  };
  return keys;
}

bool uses_process(const std::string& kind) { return kind != "boundary"; }

double parse_real(const std::string& key, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw DomainError("parameter '" + key + "': not a number: '" + std::string(text) + "'");
  }
  return v;
}

// Integers, with 2^k and exact scientific forms (1e7) accepted.
std::uint64_t parse_count(const std::string& key, std::string_view text) {
  if (const auto caret = text.find('^'); caret != std::string_view::npos) {
    const auto base = parse_count(key, text.substr(0, caret));
    const auto exp = parse_count(key, text.substr(caret + 1));
    if (base != 2 || exp > 62) throw DomainError("parameter '" + key + "': only 2^k with k <= 62");
    return std::uint64_t{1} << exp;
  }
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec == std::errc{} && ptr == end) return v;
  const double d = parse_real(key, text);
  if (d < 0.0 || d > 9.0e18 || d != std::floor(d)) {
    throw DomainError("parameter '" + key + "': not a nonnegative integer: '" + std::string(text) + "'");
  }
  return static_cast<std::uint64_t>(d);
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    out.push_back(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Typed access to ExperimentSpec::params; records the effective value of
// every key it reads.
class Params {
 public:
  explicit Params(const ExperimentSpec& spec) : spec_(spec) {}

  double real(const std::string& key, double fallback) {
    const auto* t = find(key);
    const double v = t ? parse_real(key, *t) : fallback;
    record(key, format_double(v));
    return v;
  }
  std::size_t count(const std::string& key, std::size_t fallback) {
    const auto* t = find(key);
    const std::size_t v = t ? static_cast<std::size_t>(parse_count(key, *t)) : fallback;
    record(key, std::to_string(v));
    return v;
  }
  int integer(const std::string& key, int fallback) {
    const std::size_t v = count(key, static_cast<std::size_t>(fallback));
    if (v > 1000) throw DomainError("parameter '" + key + "': out of range");
    return static_cast<int>(v);
  }
  bool flag(const std::string& key, bool fallback) {
    const auto* t = find(key);
    bool v = fallback;
    if (t) {
      if (*t == "true" || *t == "1") v = true;
      else if (*t == "false" || *t == "0") v = false;
      else throw DomainError("parameter '" + key + "': expected true or false");
    }
    record(key, v ? "true" : "false");
    return v;
  }
  std::string text(const std::string& key, const std::string& fallback) {
    const auto* t = find(key);
    const std::string v = t ? *t : fallback;
    record(key, v);
    return v;
  }
  std::vector<double> reals(const std::string& key, std::vector<double> fallback) {
    if (const auto* t = find(key)) {
      fallback.clear();
      for (auto part : split_list(*t)) fallback.push_back(parse_real(key, part));
    }
    std::string echo;
    for (double v : fallback) echo += (echo.empty() ? "" : ",") + format_double(v);
    record(key, echo);
    return fallback;
  }
  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) {
    if (const auto* t = find(key)) {
      fallback.clear();
      for (auto part : split_list(*t)) fallback.push_back(static_cast<std::size_t>(parse_count(key, part)));
    }
    std::string echo;
    for (auto v : fallback) echo += (echo.empty() ? "" : ",") + std::to_string(v);
    record(key, echo);
    return fallback;
  }
  std::vector<int> integers(const std::string& key, std::vector<int> fallback) {
    std::vector<std::size_t> c(fallback.begin(), fallback.end());
    c = counts(key, c);
    std::vector<int> out;
    for (auto v : c) {
      if (v > 1000) throw DomainError("parameter '" + key + "': out of range");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }
  bool has(const std::string& key) const { return spec_.params.count(key) > 0; }

  ProcessSpec process() {
    const ProcessKind kind = [&] {
      try {
        return parse_process_kind(text("process", "iid"));
      } catch (const std::exception& e) {
        throw DomainError(std::string("parameter 'process': ") + e.what());
      }
    }();
    ProcessSpec p;
    p.kind = kind;
    if (kind == ProcessKind::Lsv) p.gamma = real("gamma", 0.3);
    if (kind == ProcessKind::Linear) {
      p.rho = real("rho", 0.5);
      p.coefficient_count = count("coefficients", 0);
    }
    p.burn_in = count("burn_in", kind == ProcessKind::Iid ? 0 : 10'000);
    try {
      p.validate();
    } catch (const std::exception& e) {
      throw DomainError(std::string("process parameters: ") + e.what());
    }
    return p;
  }

  const std::vector<std::pair<std::string, std::string>>& effective() const { return used_; }

 private:
  const std::string* find(const std::string& key) const {
    const auto it = spec_.params.find(key);
    return it == spec_.params.end() ? nullptr : &it->second;
  }
  void record(const std::string& key, std::string value) {
    for (auto& [k, v] : used_) {
      if (k == key) {
        v = std::move(value);
        return;
      }
    }
    used_.emplace_back(key, std::move(value));
  }

  const ExperimentSpec& spec_;
  std::vector<std::pair<std::string, std::string>> used_;
};

std::optional<std::pair<double, double>> pair_of(Params& p, const std::string& key) {
  if (!p.has(key)) return std::nullopt;
  const auto v = p.reals(key, {});
  if (v.size() != 2 || v[0] > v[1]) {
    throw DomainError("parameter '" + key + "': expected lo,hi with lo <= hi");
  }
  return std::make_pair(v[0], v[1]);
}

// Runs (or, with ctx == nullptr, only parses) an experiment.
ExperimentReport dispatch(const ExperimentSpec& spec, const ExperimentContext* ctx,
                          std::vector<std::pair<std::string, std::string>>& effective) {
  Params p(spec);
  const std::string& kind = spec.kind;
  const ProcessSpec process = uses_process(kind) ? p.process() : ProcessSpec{};
  const bool run = ctx != nullptr;
  ExperimentReport report;
  auto grid_of = [&](int fallback) {
    const int r = p.integer("r", fallback);
    if (r < 1 || r > 20) throw DomainError("parameter 'r': must lie in [1, 20]");
    return DyadicGrid(r);
  };
  auto level = [&](const std::string& key, double fallback) {
    const double s = p.real(key, fallback);
    if (s < 0.0 || s > 1.0) throw DomainError("parameter '" + key + "': must lie in [0, 1]");
    return s;
  };
  auto positive = [&](const std::string& key, std::size_t v) {
    if (v == 0) throw DomainError("parameter '" + key + "': must be positive");
    return v;
  };

  if (kind == "simulate") {
    const std::size_t n = positive("n", p.count("n", 1000));
    if (run) report = simulate_experiment(process, n, *ctx);
  } else if (kind == "lambda") {
    const DyadicGrid grid = grid_of(3);
    const std::size_t n = positive("n", p.count("n", 1u << 20));
    const std::size_t max_lag = p.count("max_lag", 0);
    const std::size_t batches = positive("batches", p.count("batches", 32));
    if (run) report = lambda_experiment(process, grid.resolution(), n, max_lag, batches, *ctx);
  } else if (kind == "kiefer") {
    const int L = p.integer("L", 20);
    const double eps = p.real("epsilon", 0.02);
    const std::size_t lambda_n = positive("lambda_n", p.count("lambda_n", 1u << 22));
    const std::size_t seeds = p.count("check_seeds", 0);
    const BlockSchedule s = block_schedule(L, eps);
    if (s.L > 40) throw DomainError("parameter 'L': at most 40");
    if (run) report = kiefer_experiment(process, L, eps, lambda_n, seeds, *ctx);
  } else if (kind == "couple") {
    const auto Ls = p.integers("L", {10, 20});
    const double eps = p.real("epsilon", 0.02);
    const std::size_t M = positive("sample_size", p.count("sample_size", 512));
    const std::size_t reps = p.count("control_reps", 20);
    const std::size_t lambda_n = positive("lambda_n", p.count("lambda_n", 1u << 22));
    for (int L : Ls) {
      if (L > 30) throw DomainError("parameter 'L': at most 30");
      if (block_schedule(L, eps).flagged()) {
        throw DomainError("parameter 'L': " + std::to_string(L) + " gives a flagged schedule (4r > m)");
      }
    }
    if (run) report = coupling_experiment(process, Ls, eps, M, reps, lambda_n, *ctx);
  } else if (kind == "beta") {
    const auto lags = p.counts("lags", {1, 2, 4, 8, 16, 32, 64, 128});
    const std::size_t bins = positive("bins", p.count("bins", 32));
    const std::size_t n = positive("n", p.count("n", 10'000'000));
    for (auto k : lags) positive("lags", k);
    if (run) report = beta_experiment(process, lags, bins, n, *ctx);
  } else if (kind == "decay") {
    const double s = level("s", 0.5);
    const double s2 = level("s2", s);
    const std::size_t max_lag = p.count("max_lag", 200);
    const std::size_t n = positive("n", p.count("n", 10'000'000));
    const double slope_max = p.real("slope_max", -1.0);
    if (run) report = decay_experiment(process, s, s2, max_lag, n, slope_max, *ctx);
  } else if (kind == "clt") {
    const DyadicGrid grid = grid_of(2);
    CltOptions o;
    o.n = p.count("n", o.n);
    o.replicates = p.count("replicates", o.replicates);
    o.lambda_n = positive("lambda_n", p.count("lambda_n", o.lambda_n));
    o.max_lag = p.count("max_lag", 0);
    o.variance_band = pair_of(p, "variance_band");
    o.band_level = level("band_level", o.band_level);
    if (o.n < (1u << 10)) throw DomainError("parameter 'n': must be >= 2^10");
    if (o.replicates < 500) throw DomainError("parameter 'replicates': must be >= 500");
    if (o.variance_band && grid.index_of(o.band_level) == DyadicGrid::npos) {
      throw DomainError("parameter 'band_level': not a grid point");
    }
    if (run) report = clt_marginals(process, grid, o, *ctx);
  } else if (kind == "lil") {
    const DyadicGrid grid = grid_of(4);
    LilOptions o;
    o.n_max = p.count("n_max", o.n_max);
    o.overshoot = p.real("overshoot", o.overshoot);
    if (const auto band = pair_of(p, "band")) {
      o.band_lo = band->first;
      o.band_hi = band->second;
    }
    if (o.n_max < (1u << 16)) throw DomainError("parameter 'n_max': must be >= 2^16");
    if (run) report = lil_envelope(process, grid, o, *ctx);
  } else if (kind == "rates") {
    const double s = level("s", 0.5);
    const auto n_values = p.counts("n_values", {1u << 14, 1u << 16, 1u << 18, 1u << 20});
    const std::size_t reps = p.count("replicates", 2000);
    VarianceCheck check;
    if (p.has("slope_tolerance")) check.slope_tolerance = p.real("slope_tolerance", 0.0);
    check.require_increasing = p.flag("require_increasing", false);
    if (n_values.size() < 3) throw DomainError("parameter 'n_values': at least 3 values");
    if (run) report = variance_growth_report(process, s, n_values, reps, check, *ctx);
  } else if (kind == "boundary") {
    BoundaryOptions o;
    o.levels = p.reals("levels", o.levels);
    o.n_values = p.counts("n_values", o.n_values);
    o.replicates = p.count("replicates", o.replicates);
    o.ratio_tolerance = p.real("ratio_tolerance", o.ratio_tolerance);
    o.burn_in = p.count("burn_in", o.burn_in);
    if (o.n_values.size() < 2) throw DomainError("parameter 'n_values': at least 2 values");
    if (run) report = boundary_degeneracy(o, *ctx);
  } else {
    throw DomainError("unknown experiment kind '" + kind + "'");
  }
  effective = p.effective();
  return report;
}

}  // namespace

std::vector<std::string> experiment_kinds() {
  std::vector<std::string> out;
  for (const auto& [k, _] : kind_keys()) out.push_back(k);
  return out;
}

std::vector<std::string> allowed_params(const std::string& kind) {
  const auto it = kind_keys().find(kind);
  if (it == kind_keys().end()) throw DomainError("unknown experiment kind '" + kind + "'");
  std::vector<std::string> out = it->second;
  if (uses_process(kind)) out.insert(out.begin(), kProcessKeys.begin(), kProcessKeys.end());
  return out;
}

void validate_experiment(const ExperimentSpec& spec) {
  if (spec.name.empty()) throw DomainError("experiment name must be nonempty");
  const auto allowed = allowed_params(spec.kind);
  for (const auto& [key, _] : spec.params) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw DomainError("experiment '" + spec.name + "': unknown parameter '" + key + "' for kind '" +
                        spec.kind + "'");
    }
  }
  std::vector<std::pair<std::string, std::string>> effective;
  try {
    dispatch(spec, nullptr, effective);
  } catch (const DomainError& e) {
    throw DomainError("experiment '" + spec.name + "': " + e.what());
  }
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const ExperimentContext& ctx) {
  validate_experiment(spec);
  ExperimentContext sub = ctx;
  sub.seed = derive_seed(ctx.seed, fnv1a(spec.name));
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, std::string>> effective;
  ExperimentReport report = dispatch(spec, &sub, effective);
  const auto stop = std::chrono::steady_clock::now();
  report.name = spec.name;
  report.kind = spec.kind;
  auto extra = std::move(report.params);
  report.params = std::move(effective);
  report.params.insert(report.params.end(), extra.begin(), extra.end());
  report.seeds.insert(report.seeds.begin(), sub.seed);
  report.wall_time_s = std::chrono::duration<double>(stop - start).count();
  report.note = kProxyNote;
  return report;
}

std::vector<ExperimentReport> run_suite(
    const SuiteConfig& config, const std::function<void(const ExperimentReport&)>& on_report) {
  std::set<std::string> names;
  for (const auto& e : config.experiments) {
    validate_experiment(e);
    if (!names.insert(e.name).second) throw DomainError("duplicate experiment name '" + e.name + "'");
  }
  const ExperimentContext ctx{config.seed, std::max(config.threads, 1u), config.calibration_length};
  std::vector<ExperimentReport> reports;
  for (const auto& e : config.experiments) {
    reports.push_back(run_experiment(e, ctx));
    if (on_report) on_report(reports.back());
  }
  return reports;
}

std::vector<ExperimentSpec> preset_suite(const std::string& name) {
  using P = std::map<std::string, std::string>;
  if (name == "iid-anchors") {
    return {
        {"iid_lambda", "lambda", P{{"process", "iid"}, {"r", "3"}, {"n", "2^20"}}},
        {"iid_clt", "clt",
         P{{"process", "iid"}, {"r", "2"}, {"n", "2^14"}, {"replicates", "2000"},
           {"variance_band", "0.225,0.275"}, {"band_level", "0.5"}}},
        {"iid_rates", "rates",
         P{{"process", "iid"}, {"s", "0.5"}, {"n_values", "2^10,2^12,2^14,2^16"},
           {"replicates", "500"}, {"slope_tolerance", "0.1"}}},
        {"iid_lil", "lil", P{{"process", "iid"}, {"r", "4"}, {"n_max", "2^22"}, {"band", "0.25,0.8"}}},
    };
  }
  if (name == "lsv") {
    return {
        {"lsv_clt", "clt",
         P{{"process", "lsv"}, {"gamma", "0.3"}, {"r", "2"}, {"n", "2^14"}, {"replicates", "2000"},
           {"lambda_n", "1e7"}}},
        {"lsv_decay", "decay",
         P{{"process", "lsv"}, {"gamma", "0.3"}, {"s", "0.5"}, {"max_lag", "200"}, {"n", "1e7"},
           {"slope_max", "-1"}}},
        {"lsv_lil", "lil",
         P{{"process", "lsv"}, {"gamma", "0.3"}, {"r", "4"}, {"n_max", "2^22"}, {"overshoot", "1.6"}}},
        {"lsv_rates_quarter", "rates",
         P{{"process", "lsv"}, {"gamma", "0.25"}, {"s", "0.5"},
           {"n_values", "2^14,2^16,2^18,2^20"}, {"replicates", "500"}, {"slope_tolerance", "0.15"}}},
        {"lsv_rates_half", "rates",
         P{{"process", "lsv"}, {"gamma", "0.5"}, {"s", "0.3"},
           {"n_values", "2^14,2^16,2^18,2^20"}, {"replicates", "2000"},
           {"require_increasing", "true"}}},
        {"lsv_beta", "beta", P{{"process", "lsv"}, {"gamma", "0.3"}, {"n", "1e7"}}},
    };
  }
  if (name == "boundary") {
    return {{"boundary", "boundary", P{}}};
  }
  if (name == "coupling") {
    return {{"iid_coupling", "couple",
             P{{"process", "iid"}, {"L", "10,20"}, {"sample_size", "512"}, {"control_reps", "20"}}}};
  }
  if (name == "kiefer") {
    return {{"lsv_kiefer", "kiefer",
             P{{"process", "lsv"}, {"gamma", "0.3"}, {"L", "20"}, {"lambda_n", "2^22"},
               {"check_seeds", "10000"}}}};
  }
  throw DomainError("unknown preset suite '" + name + "'");
}

}  // namespace kiefer
