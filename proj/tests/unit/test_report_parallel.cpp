#include <atomic>
#include <numeric>
#include <stdexcept>

#include <gtest/gtest.h>

#include "arw/parallel.hpp"
#include "arw/report.hpp"

TEST(Wilson, TabulatedValue) {
  const auto ci = arw::wilson_interval(5, 10);
  EXPECT_NEAR(ci.lo, 0.2366, 1e-4);
  EXPECT_NEAR(ci.hi, 0.7634, 1e-4);
}

TEST(Wilson, ContainsPointAtExtremes) {
  for (std::uint64_t s : {0u, 1u, 50u, 99u, 100u}) {
    const auto r = arw::proportion_report(s, 100, 7);
    EXPECT_LE(r.ci95.lo, r.point);
    EXPECT_GE(r.ci95.hi, r.point);
    EXPECT_GE(r.std_error, 0.0);
    EXPECT_EQ(r.replicas, 100u);
    EXPECT_EQ(r.root_seed, 7u);
  }
  const auto zero = arw::proportion_report(0, 100, 0);
  EXPECT_EQ(zero.ci95.lo, 0.0);
  EXPECT_GT(zero.ci95.hi, 0.0);
}

TEST(MeanReport, SampleStatistics) {
  // samples 1, 2, 3, 4
  const auto r = arw::mean_report(10.0, 30.0, 4, 1);
  EXPECT_DOUBLE_EQ(r.point, 2.5);
  EXPECT_NEAR(r.std_error, std::sqrt((5.0 / 3.0) / 4.0), 1e-15);
  EXPECT_LT(r.ci95.lo, r.point);
  EXPECT_GT(r.ci95.hi, r.point);
}

TEST(ReportJson, Fields) {
  auto r = arw::proportion_report(3, 10, 42);
  r.diagnostics["bias"] = 0.5;
  const auto j = arw::to_json(r);
  for (const char* key : {"point", "stderr", "ci95", "replicas", "root_seed", "failed", "params", "diagnostics"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["diagnostics"]["bias"], 0.5);
  EXPECT_EQ(arw::seed_provenance(42, 9)["replica"], 9);
}

TEST(DeriveSeed, PureAndDistinct) {
  static_assert(arw::derive_seed(1, 2, 3) == arw::derive_seed(1, 2, 3));
  EXPECT_NE(arw::derive_seed(1, 2, 3), arw::derive_seed(1, 3, 2));
  EXPECT_NE(arw::derive_seed(1, 0, 0), arw::derive_seed(2, 0, 0));
  EXPECT_NE(arw::derive_seed(0, 0, 1), arw::derive_seed(0, 1, 0));
}

TEST(ParallelFor, CoversEveryIndexOnce) {
  for (unsigned workers : {1u, 2u, 3u, 8u}) {
    std::vector<std::atomic<int>> hits(101);
    arw::parallel_for(0, hits.size(), workers, [&](std::size_t i, unsigned) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(ParallelFor, ResultsIndependentOfWorkers) {
  auto run = [](unsigned workers) {
    std::vector<double> out(1000);
    arw::parallel_for(0, out.size(), workers, [&](std::size_t i, unsigned) {
      out[i] = arw::to_unit(arw::derive_seed(5, 0, i));
    });
    return std::accumulate(out.begin(), out.end(), 0.0);
  };
  EXPECT_EQ(run(1), run(4));
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(arw::parallel_for(0, 10, 3,
                                 [](std::size_t i, unsigned) {
                                   if (i == 7) throw std::runtime_error("boom");
                                 }),
               std::runtime_error);
  EXPECT_NO_THROW(arw::parallel_for(5, 5, 3, [](std::size_t, unsigned) { FAIL(); }));
}
