#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <stdexcept>
#include <vector>

#include "kiefer/parallel.hpp"
#include "kiefer/rng.hpp"
#include "kiefer/stats.hpp"

using namespace kiefer;

TEST(Rng, DerivedSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 4; ++m) {
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(m, i));
  }
  EXPECT_EQ(seen.size(), 4000u);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformRange) {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = rng.uniform_open();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

TEST(Rng, BelowIsInRangeAndCoversIt) {
  Rng rng(2);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto k = rng.below(7);
    ASSERT_LT(k, 7u);
    ++hits[k];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, NormalMoments) {
  Rng rng(3);
  std::vector<double> x(200000);
  for (auto& v : x) v = rng.normal();
  const Moments m = moments(x);
  EXPECT_NEAR(m.mean, 0.0, 5 * m.mean_se());
  EXPECT_NEAR(m.variance, 1.0, 5 * m.variance_se);
  EXPECT_NEAR(m.skewness, 0.0, 5 * m.skewness_se());
  EXPECT_NEAR(m.excess_kurtosis, 0.0, 5 * m.kurtosis_se());
}

TEST(Parallel, ResultsIndependentOfThreadCount) {
  auto run = [](unsigned threads) {
    std::vector<double> out(257);
    parallel_for(out.size(), threads, [&](std::size_t i) {
      Rng rng(derive_seed(9, i));
      out[i] = rng.normal();
    });
    return out;
  };
  const auto one = run(1);
  EXPECT_EQ(one, run(3));
  EXPECT_EQ(one, run(8));
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 37) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}
