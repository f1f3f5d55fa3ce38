#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kiefer/dynamics.hpp"
#include "kiefer/empirical.hpp"
#include "kiefer/error.hpp"
#include "kiefer/rng.hpp"
#include "kiefer/stats.hpp"

using namespace kiefer;

namespace {

double brute_R(std::span<const double> x, const EcdfModel& F, double s, std::size_t t) {
  double count = 0.0;
  for (std::size_t i = 0; i < t; ++i) count += x[i] <= s ? 1.0 : 0.0;
  return count - static_cast<double>(t) * F(s);
}

// Values that hit grid points exactly as well as generic ones.
std::vector<double> mixed_values(std::size_t n, int r, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) {
    x = rng.below(3) == 0 ? std::ldexp(static_cast<double>(rng.below((1u << r) + 1)), -r)
                          : rng.uniform();
  }
  return v;
}

}  // namespace

TEST(DyadicGrid, Points) {
  const DyadicGrid g(3);
  ASSERT_EQ(g.size(), 7u);
  EXPECT_EQ(g.point(0), 0.125);
  EXPECT_EQ(g.point(6), 0.875);
  EXPECT_EQ(g.index_of(0.25), 1u);
  EXPECT_EQ(g.index_of(0.3), DyadicGrid::npos);
  EXPECT_EQ(g.index_of(0.0), DyadicGrid::npos);
  EXPECT_EQ(g.index_of(1.0), DyadicGrid::npos);
  EXPECT_THROW(DyadicGrid(0), DomainError);
  EXPECT_THROW(DyadicGrid(21), DomainError);
}

TEST(DyadicGrid, CellIndexMatchesIndicator) {
  for (int r : {1, 3, 6}) {
    const DyadicGrid g(r);
    for (double x : mixed_values(5000, r, 77 + r)) {
      const auto c = g.cell_index(x);
      for (std::size_t j = 0; j < g.size(); ++j) {
        ASSERT_EQ(x <= g.point(j), c <= j + 1) << "x=" << x << " j=" << j;
      }
    }
  }
}

TEST(Ecdf, Examples) {
  const EcdfModel F({0.2, 0.4, 0.6, 0.8});
  EXPECT_EQ(F(0.5), 0.5);
  EXPECT_EQ(F(0.1), 0.0);
  EXPECT_EQ(F(-1e300), 0.0);
  EXPECT_EQ(F(0.8), 1.0);
  EXPECT_EQ(F(5.0), 1.0);
  EXPECT_EQ(F(0.4), 0.5);  // right-continuous
  EXPECT_THROW(EcdfModel({}), DomainError);
}

TEST(Ecdf, MatchesCountOracle) {
  const auto v = mixed_values(997, 4, 3);
  const EcdfModel F(v);
  for (double s : mixed_values(200, 4, 4)) {
    double c = 0.0;
    for (double x : v) c += x <= s;
    ASSERT_EQ(F(s), c / 997.0);
  }
}

TEST(EmpiricalProcess, SmallExample) {
  const Trajectory t({0.1, 0.9, 0.3}, ProcessSpec::iid(0));
  const EcdfModel F({0.25, 0.75});  // F(0.5) = 0.5
  const std::vector<std::size_t> times{0, 3};
  const auto f = empirical_process(t, F, DyadicGrid(1), times);
  EXPECT_EQ(f.at(0, 0), 0.0);
  EXPECT_EQ(f.at(0, 1), 0.5);
}

TEST(EmpiricalProcess, MatchesBruteForce) {
  const Trajectory t(mixed_values(3000, 4, 5), ProcessSpec::iid(0));
  const EcdfModel F(mixed_values(500, 4, 6));
  const DyadicGrid g(4);
  const std::vector<std::size_t> times{1, 17, 17, 1024, 3000};
  const auto f = empirical_process(t, F, g, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      ASSERT_NEAR(f.at(j, k), brute_R(t.values(), F, g.point(j), times[k]), 1e-9);
    }
  }
  const std::vector<double> levels{0.0, 0.3, g.point(3), 1.0};
  const auto e = empirical_values(t, F, levels, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t a = 0; a < levels.size(); ++a) {
      ASSERT_NEAR(e(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)),
                  brute_R(t.values(), F, levels[a], times[k]), 1e-9);
    }
  }
}

TEST(EmpiricalProcess, CountStructure) {
  const Trajectory t(mixed_values(400, 3, 8), ProcessSpec::iid(0));
  const EcdfModel F(mixed_values(100, 3, 9));
  const DyadicGrid g(3);
  std::vector<std::size_t> times(401);
  for (std::size_t i = 0; i <= 400; ++i) times[i] = i;
  const auto f = empirical_process(t, F, g, times);
  for (std::size_t k = 0; k <= 400; ++k) {
    double prev = -1.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double count = f.at(j, k) + static_cast<double>(k) * F(g.point(j));
      ASSERT_NEAR(count, std::round(count), 1e-9);
      ASSERT_GE(count, prev - 1e-9);
      prev = count;
      if (k > 0) ASSERT_LE(std::abs(f.at(j, k) - f.at(j, k - 1)), 1.0 + 1e-12);
    }
  }
}

TEST(EmpiricalProcess, Errors) {
  const Trajectory t({0.1, 0.2}, ProcessSpec::iid(0));
  const EcdfModel F({0.5});
  const std::vector<std::size_t> too_long{3};
  EXPECT_THROW(empirical_process(t, F, DyadicGrid(2), too_long), RangeError);
  const std::vector<std::size_t> decreasing{2, 1};
  EXPECT_THROW(empirical_process(t, F, DyadicGrid(2), decreasing), DomainError);
}

TEST(EmpiricalProcess, IidVarianceOverN) {
  const std::size_t n = 1 << 14;
  const EcdfModel F = EcdfModel::fit(generate_trajectory(ProcessSpec::iid(99), 1'000'000));
  const std::vector<std::size_t> times{n};
  const std::vector<double> level{0.5};
  std::vector<double> r(2000);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto t = generate_trajectory(ProcessSpec::iid(derive_seed(100, i)), n);
    r[i] = empirical_values(t, F, level, times)(0, 0);
  }
  EXPECT_NEAR(moments(r).variance / static_cast<double>(n), 0.25, 0.025);
}

TEST(DyadicProjection, Examples) {
  EXPECT_EQ(dyadic_projection(0.3, 2), 0.25);
  EXPECT_EQ(dyadic_projection(1.0, 3), 1.0);
  EXPECT_EQ(dyadic_projection(0.7, 0), 0.0);
  EXPECT_THROW(dyadic_projection(1.5, 2), DomainError);
  EXPECT_THROW(dyadic_projection(0.5, -1), DomainError);
}

TEST(DyadicProjection, LatticeBracket) {
  Rng rng(12);
  for (int i = 0; i < 10000; ++i) {
    const double s = rng.uniform();
    const int K = static_cast<int>(rng.below(30));
    const double p = dyadic_projection(s, K);
    const double step = std::ldexp(1.0, -K);
    ASSERT_LE(p, s);
    ASSERT_LT(s, p + step);
    ASSERT_EQ(std::ldexp(p, K), std::floor(std::ldexp(p, K)));
  }
}

TEST(BlockSchedule, Examples) {
  const auto a = block_schedule(20, 0.02);
  EXPECT_EQ(a.r, 4);
  EXPECT_EQ(a.m, 16);
  EXPECT_FALSE(a.flagged());
  const auto b = block_schedule(40, 0.02);
  EXPECT_EQ(b.r, 8);
  EXPECT_EQ(b.m, 32);
  EXPECT_FALSE(b.flagged());
  const auto c = block_schedule(2, 0.01);
  EXPECT_EQ(c.r, 1);
  EXPECT_EQ(c.m, 1);
  EXPECT_TRUE(c.flagged());
  EXPECT_EQ(a.block_count(), 16u);
  EXPECT_EQ(a.block_length(), 1u << 16);
  EXPECT_THROW(block_schedule(20, 0.0), DomainError);
  EXPECT_THROW(block_schedule(20, 0.1), DomainError);
  EXPECT_THROW(block_schedule(0, 0.02), DomainError);
}

TEST(BlockSchedule, FormulaOracle) {
  for (int L = 1; L <= 300; ++L) {
    for (double eps : {0.01, 0.02, 0.05, 0.09}) {
      const auto s = block_schedule(L, eps);
      const int expected = std::max(
          std::min(L / 5, static_cast<int>(std::floor(2 * eps * L + 5 * std::log2(L)))), 1);
      ASSERT_EQ(s.r, expected) << L;
      ASSERT_EQ(s.r + s.m, L);
      ASSERT_EQ(s.flagged(), 4 * s.r > s.m);
    }
  }
}

TEST(BlockSums, AllIndicatorsOne) {
  const auto sched = block_schedule(6, 0.05);  // r = 1, m = 5
  std::vector<double> v(1u << 7, 0.1);
  const Trajectory t(v, ProcessSpec::iid(0));
  const EcdfModel F({1.0});  // F(s_j) = 0
  const auto sums = block_sums(t, F, sched);
  ASSERT_EQ(sums.vectors.size(), sched.block_count());
  for (const auto& u : sums.vectors) {
    for (Eigen::Index j = 0; j < u.size(); ++j) EXPECT_EQ(u(j), std::ldexp(1.0, sched.m));
  }
}

TEST(BlockSums, BruteForceAndTelescoping) {
  for (int L : {8, 11}) {
    const auto sched = block_schedule(L, 0.05);
    const Trajectory t(mixed_values((std::size_t{1} << (L + 1)) + 5, sched.r, L), ProcessSpec::iid(0));
    const EcdfModel F(mixed_values(300, sched.r, 1000 + L));
    const DyadicGrid g(sched.r);
    const auto sums = block_sums(t, F, sched);
    const auto x = t.values();
    const std::vector<std::size_t> times{sched.origin(), 2 * sched.origin()};
    const auto field = empirical_process(t, F, g, times);
    for (std::size_t j = 0; j < g.size(); ++j) {
      double total = 0.0;
      for (std::size_t l = 1; l <= sched.block_count(); ++l) {
        // one-based ]2^L + (l-1) 2^m, 2^L + l 2^m]
        double brute = 0.0;
        for (std::size_t i = sched.origin() + (l - 1) * sched.block_length() + 1;
             i <= sched.origin() + l * sched.block_length(); ++i) {
          brute += (x[i - 1] <= g.point(j) ? 1.0 : 0.0) - F(g.point(j));
        }
        const double u = sums.vectors[l - 1](static_cast<Eigen::Index>(j));
        ASSERT_NEAR(u, brute, 1e-9);
        ASSERT_LE(std::abs(u), std::ldexp(1.0, sched.m));
        total += u;
      }
      ASSERT_NEAR(total, field.at(j, 1) - field.at(j, 0), 1e-9);
    }
    const auto first = first_block_sum(x, F, sched);
    EXPECT_TRUE(first.isApprox(sums.vectors[0]) || (first - sums.vectors[0]).norm() == 0.0);
  }
}

TEST(BlockSums, TooShort) {
  const auto sched = block_schedule(8, 0.05);
  const Trajectory t(std::vector<double>(511, 0.5), ProcessSpec::iid(0));
  EXPECT_THROW(block_sums(t, EcdfModel({0.5}), sched), RangeError);
  EXPECT_THROW(first_block_sum(std::vector<double>(256 + 10, 0.5), EcdfModel({0.5}), sched),
               RangeError);
}

TEST(BlockSums, LsvFirstBlockCentered) {
  // Mean of U_{L,1} over independent orbits; the shared centering F-hat adds
  // a bias of variance 2^{2m} Lambda_jj / n_cal, bounded with Lambda_jj <= 1.
  const auto sched = block_schedule(16, 0.02);
  const std::size_t n_cal = 4'000'000;
  const EcdfModel F = EcdfModel::fit(generate_trajectory(ProcessSpec::lsv(0.3, 501), n_cal));
  const std::size_t reps = 200;
  const std::size_t d = DyadicGrid(sched.r).size();
  std::vector<std::vector<double>> cols(d, std::vector<double>(reps));
  for (std::size_t i = 0; i < reps; ++i) {
    const auto t = generate_trajectory(ProcessSpec::lsv(0.3, derive_seed(502, i)),
                                       sched.origin() + sched.block_length());
    const auto u = first_block_sum(t.values(), F, sched);
    for (std::size_t j = 0; j < d; ++j) cols[j][i] = u(static_cast<Eigen::Index>(j));
  }
  const double cal_sd = std::ldexp(1.0, sched.m) / std::sqrt(static_cast<double>(n_cal));
  for (std::size_t j = 0; j < d; ++j) {
    const Moments m = moments(cols[j]);
    EXPECT_LE(std::abs(m.mean), 3.0 * std::hypot(m.mean_se(), cal_sd)) << j;
  }
}
