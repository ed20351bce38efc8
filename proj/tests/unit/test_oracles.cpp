#include <cmath>

#include <gtest/gtest.h>

#include "arw/kernel.hpp"
#include "frozen.hpp"
#include "oracles.hpp"

namespace t = arw::testing;
namespace f = arw::testing::frozen;

TEST(ReferenceValues, WatsonG3) { EXPECT_NEAR(t::watson_g3(), f::kG3, 1e-14); }

TEST(ReferenceValues, SeriesAtUnitArgumentApproachesG3) {
  EXPECT_NEAR(t::ssrw_return_series(3, 1.0 - 1e-12), f::kG3, 1e-5);
}

TEST(ReferenceValues, SeriesMatchesClosedFormInOneDimension) {
  for (double lambda : {0.1, 1.0, 10.0}) {
    const double ls = lambda / (1.0 + lambda);
    EXPECT_NEAR(ls * t::ssrw_return_series(1, 1.0 - ls), t::q_closed_form_d1(lambda), 1e-10);
  }
}

TEST(ReferenceValues, ClosedFormD1) {
  EXPECT_NEAR(t::q_closed_form_d1(0.1), f::kQd1Lambda01, 1e-15);
  EXPECT_NEAR(t::q_closed_form_d1(1.0), f::kQd1Lambda1, 1e-15);
  EXPECT_NEAR(t::q_closed_form_d1(10.0), f::kQd1Lambda10, 1e-15);
  EXPECT_NEAR(f::kQd1Lambda1, 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(ReferenceValues, SeriesD3) {
  for (auto [lambda, frozen] : {std::pair{0.01, f::kQd3Lambda001}, std::pair{0.001, f::kQd3Lambda0001},
                                std::pair{0.1, f::kQd3Lambda01}}) {
    const double ls = lambda / (1.0 + lambda);
    EXPECT_NEAR(ls * t::ssrw_return_series(3, 1.0 - ls), frozen, 1e-12 * frozen) << lambda;
  }
}

TEST(ReferenceValues, EnumeratedReturnsAreCentralBinomials) {
  const auto p = t::ssrw1_enumerated_returns(20);
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[2], 0.5);
  EXPECT_DOUBLE_EQ(p[4], 6.0 / 16.0);
  EXPECT_DOUBLE_EQ(p[3], 0.0);
  EXPECT_DOUBLE_EQ(p[20], 184756.0 / 1048576.0);
}

TEST(ReferenceValues, BruteForcePathsAgreeWithBitCounting) {
  const auto kernel = arw::make_ssrw_kernel(1);
  const auto p = t::ssrw1_enumerated_returns(12);
  for (int n = 0; n <= 12; ++n) EXPECT_NEAR(t::brute_force_return_probability(kernel, n), p[n], 1e-15);
}

TEST(ReferenceValues, DenseGamblersRuin) {
  for (int r = 0; r <= 30; ++r) EXPECT_NEAR(t::gamblers_ruin_dense(r), 1.0 / (r + 1), 1e-12);
}

TEST(ReferenceValues, GeometricCdf) {
  EXPECT_DOUBLE_EQ(t::geom_cdf(0.25, 1), 0.25);
  EXPECT_DOUBLE_EQ(t::geom_cdf(0.5, 2), 0.75);
}
