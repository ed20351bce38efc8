#include <cmath>

#include <gtest/gtest.h>

#include "arw/errors.hpp"
#include "arw/walk.hpp"
#include "frozen.hpp"
#include "oracles.hpp"

namespace t = arw::testing;
namespace f = arw::testing::frozen;
using arw::JumpKernel;
using arw::Params;
using arw::Volume;

TEST(ReturnProbability, SmallCases) {
  const auto k1 = arw::make_ssrw_kernel(1);
  EXPECT_DOUBLE_EQ(arw::return_probability(k1, 0), 1.0);
  EXPECT_DOUBLE_EQ(arw::return_probability(k1, 2), 0.5);
  EXPECT_DOUBLE_EQ(arw::return_probability(k1, 3), 0.0);
  EXPECT_DOUBLE_EQ(arw::return_probability(arw::make_ssrw_kernel(2), 2), 0.25);
}

TEST(ReturnProbability, MatchesPathEnumeration) {
  const std::vector<std::pair<JumpKernel, int>> cases = {
      {arw::make_ssrw_kernel(1), 14},
      {arw::make_ssrw_kernel(2), 8},
      {arw::make_ssrw_kernel(3), 6},
      {JumpKernel(1, {{{2}, 0.3}, {{-1}, 0.7}}), 12},
      {JumpKernel(2, {{{1, 1}, 0.2}, {{-1, 0}, 0.5}, {{0, -1}, 0.3}}), 8},
  };
  for (const auto& [kernel, depth] : cases) {
    const auto all = arw::return_probabilities(kernel, depth);
    ASSERT_EQ(all.size(), static_cast<std::size_t>(depth) + 1);
    for (int n = 0; n <= depth; ++n) {
      const double expected = t::brute_force_return_probability(kernel, n);
      EXPECT_NEAR(all[n], expected, 1e-14) << kernel.name() << " n=" << n;
      EXPECT_NEAR(arw::return_probability(kernel, n), expected, 1e-14);
    }
  }
}

TEST(ReturnProbability, CentralBinomialToThirty) {
  const auto all = arw::return_probabilities(arw::make_ssrw_kernel(1), 30);
  EXPECT_NEAR(all[30], f::kP30d1, 1e-15);
}

TEST(ReturnProbability, ParityAndRange) {
  for (int d = 1; d <= 3; ++d) {
    const auto all = arw::return_probabilities(arw::make_ssrw_kernel(d), 60);
    for (std::size_t n = 0; n < all.size(); ++n) {
      EXPECT_GE(all[n], 0.0);
      EXPECT_LE(all[n], 1.0);
      if (n % 2 == 1) EXPECT_EQ(all[n], 0.0);
    }
  }
}

TEST(ReturnProbability, ResourceErrorCarriesLimit) {
  try {
    arw::return_probabilities(arw::make_ssrw_kernel(3), 400, 10'000);
    FAIL() << "expected ResourceError";
  } catch (const arw::ResourceError& e) {
    EXPECT_GT(e.limit(), 0);
    EXPECT_LT(e.limit(), 400);
    EXPECT_NO_THROW(arw::return_probabilities(arw::make_ssrw_kernel(3), static_cast<int>(e.limit()), 10'000));
  }
  EXPECT_THROW(arw::return_probability(arw::make_ssrw_kernel(1), -1), arw::InvalidArgument);
}

TEST(GreenFunction, RecurrentWalksAreDivergent) {
  EXPECT_TRUE(arw::green_function(arw::make_ssrw_kernel(1), 400, 1).divergent);
  EXPECT_TRUE(arw::green_function(arw::make_ssrw_kernel(2), 200, 1).divergent);
  EXPECT_EQ(arw::green_function(arw::make_ssrw_kernel(1), 400, 1).escape_prob, 0.0);
}

TEST(GreenFunction, ThreeDimensionsWithinErrorBound) {
  arw::GreenOptions opt;
  opt.mc_tail_samples = 4000;
  opt.horizon = 5000;
  const auto g = arw::green_function(arw::make_ssrw_kernel(3), 100, 11, opt);
  ASSERT_FALSE(g.divergent);
  EXPECT_NEAR(g.green_estimate, f::kG3, g.error_bound);
  EXPECT_LT(g.error_bound, 0.05);
  EXPECT_NEAR(g.escape_prob, 1.0 / g.green_estimate, 1e-15);
  EXPECT_NEAR(g.decay_exponent, 1.5, 0.1);
  EXPECT_NEAR(g.green_estimate, g.partial_sum + g.tail_estimate, 1e-12);
}

TEST(GreenFunction, ZeroTruncationKeepsTheFirstTerm) {
  arw::GreenOptions opt;
  opt.mc_tail_samples = 2000;
  opt.horizon = 2000;
  const auto g = arw::green_function(arw::make_ssrw_kernel(3), 0, 3, opt);
  EXPECT_EQ(g.partial_sum, 1.0);
  EXPECT_GT(g.tail_estimate, 0.0);
}

TEST(SingleParticleQ, ClosedFormInOneDimension) {
  const auto k = arw::make_ssrw_kernel(1);
  for (auto [lambda, expected] : {std::pair{0.1, f::kQd1Lambda01}, std::pair{1.0, f::kQd1Lambda1},
                                  std::pair{10.0, f::kQd1Lambda10}}) {
    const auto params = Params::with_rate(lambda);
    const auto q = arw::single_particle_q(k, params, arw::default_q_truncation(k, params));
    EXPECT_LE(q.truncation_bound, 1e-8) << lambda;
    EXPECT_NEAR(q.value, expected, q.truncation_bound + 1e-12) << lambda;
  }
}

TEST(SingleParticleQ, MatchesEnumeratedPartialSum) {
  const auto p = t::ssrw1_enumerated_returns(30);
  const auto params = Params::with_rate(1.0);
  double partial = 0.0, w = params.sleep_prob();
  for (int n = 0; n <= 30; ++n, w *= params.jump_prob()) partial += w * p[n];
  const auto q = arw::single_particle_q(arw::make_ssrw_kernel(1), params, 30);
  EXPECT_NEAR(q.value, partial, 1e-15);
  EXPECT_NEAR(q.value, f::kQd1Lambda1, q.truncation_bound);
}

TEST(SingleParticleQ, LargeRateApproachesSleepProbability) {
  for (int d = 1; d <= 3; ++d) {
    const auto k = arw::make_ssrw_kernel(d);
    const auto params = Params::with_rate(1e6);
    const auto q = arw::single_particle_q(k, params, arw::default_q_truncation(k, params));
    EXPECT_NEAR(q.value, params.sleep_prob(), 1e-5);
  }
}

TEST(SingleParticleQ, ThreeDimensionsMatchesSeries) {
  const auto k = arw::make_ssrw_kernel(3);
  for (auto [lambda, expected] : {std::pair{0.01, f::kQd3Lambda001}, std::pair{0.1, f::kQd3Lambda01}}) {
    const auto params = Params::with_rate(lambda);
    const auto q = arw::single_particle_q(k, params, arw::default_q_truncation(k, params));
    EXPECT_NEAR(q.value, expected, q.truncation_bound + 1e-12) << lambda;
    EXPECT_LE(q.value, expected);
  }
}

TEST(SingleParticleQ, LowRateSlopeTendsToGreenFunction) {
  // q / (G lambda) = 0.7453, 0.9206, 0.9753 at lambda = 0.1, 0.01, 0.001.
  const double r1 = f::kQd3Lambda01 / (f::kG3 * 0.1);
  const double r2 = f::kQd3Lambda001 / (f::kG3 * 0.01);
  const double r3 = f::kQd3Lambda0001 / (f::kG3 * 0.001);
  EXPECT_LT(r1, r2);
  EXPECT_LT(r2, r3);
  EXPECT_LT(1.0 - r3, 0.5 * (1.0 - r2));
}

TEST(SingleParticleQ, TruncationBoundCoversRemainder) {
  const auto k = arw::make_ssrw_kernel(2);
  const auto params = Params::with_rate(0.2);
  const auto coarse = arw::single_particle_q(k, params, 20);
  const auto fine = arw::single_particle_q(k, params, 400);
  EXPECT_LE(fine.value - coarse.value, coarse.truncation_bound);
  EXPECT_GE(fine.value, coarse.value);
}

TEST(SingleParticleQ, MonotoneInRate) {
  for (int d = 1; d <= 3; ++d) {
    const auto k = arw::make_ssrw_kernel(d);
    double prev = 0.0;
    for (double lambda : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0}) {
      const auto params = Params::with_rate(lambda);
      const double q = arw::single_particle_q(k, params, 150).value;
      EXPECT_GT(q, prev) << d << " " << lambda;
      prev = q;
    }
  }
}

TEST(SingleParticleQ, DegenerateModes) {
  const auto k = arw::make_ssrw_kernel(2);
  EXPECT_EQ(arw::single_particle_q(k, Params::always_sleep(), 10).value, 1.0);
  EXPECT_EQ(arw::single_particle_q(k, Params::never_sleep(), 10).value, 0.0);
}

TEST(EscapeBeforeReturn, CertainSleepAlwaysEscapes) {
  const auto r = arw::escape_before_return_mc(arw::make_ssrw_kernel(1), Params::always_sleep(),
                                              Volume::ball(1, 5), 1000, 1);
  EXPECT_EQ(r.point, 1.0);
}

TEST(EscapeBeforeReturn, FirstStepAnalysisOnB1) {
  const auto r = arw::escape_before_return_mc(arw::make_ssrw_kernel(1), Params::with_rate(1.0),
                                              Volume::ball(1, 1), 40'000, 2);
  EXPECT_NEAR(r.point, 0.75, 4 * r.std_error);
  EXPECT_LE(r.ci95.lo, r.point);
  EXPECT_GE(r.ci95.hi, r.point);
}

TEST(EscapeBeforeReturn, LargeVolumeApproachesEscapeProbability) {
  const auto r = arw::escape_before_return_mc(arw::make_ssrw_kernel(3), Params::never_sleep(),
                                              Volume::ball(3, 30), 20'000, 3);
  const double pesc = 1.0 / f::kG3;
  EXPECT_GE(r.point, pesc - 4 * r.std_error);
  EXPECT_LE(r.point, pesc + 0.05 + 4 * r.std_error);
}

TEST(EscapeBeforeReturn, NonincreasingInRadius) {
  const auto k = arw::make_ssrw_kernel(1);
  const auto params = Params::with_rate(1.0);
  arw::EstimateReport prev;
  for (int r : {1, 2, 4, 8, 16}) {
    const auto cur = arw::escape_before_return_mc(k, params, Volume::ball(1, r), 20'000, 10 + r);
    if (r > 1) EXPECT_LE(cur.point, prev.point + 3 * std::hypot(cur.std_error, prev.std_error)) << r;
    prev = cur;
  }
}

TEST(EscapeBeforeReturn, UnboundedReportsHorizonBias) {
  const auto r = arw::escape_before_return_mc(arw::make_ssrw_kernel(1), Params::with_rate(0.5),
                                              Volume::unbounded(1), 5000, 4, 200);
  ASSERT_TRUE(r.diagnostics.count("horizon_bias_bound"));
  EXPECT_NEAR(r.diagnostics.at("horizon_bias_bound"), std::pow(2.0 / 3.0, 200), 1e-40);
  // q = ls / (ls + lj p) with p the escape probability after the forced jump.
  const double ls = 1.0 / 3.0, lj = 2.0 / 3.0;
  const double expected = ls * (1.0 / t::q_closed_form_d1(0.5) - 1.0) / lj;
  EXPECT_NEAR(r.point, expected, 4 * r.std_error + 1e-3);
}

TEST(EscapeBeforeReturn, ValidatesInputs) {
  const auto k = arw::make_ssrw_kernel(1);
  EXPECT_THROW(arw::escape_before_return_mc(k, Params::with_rate(1), Volume::ball(1, 1), 0, 1),
               arw::InvalidArgument);
  EXPECT_THROW(arw::escape_before_return_mc(k, Params::with_rate(1), Volume::ball(2, 1), 10, 1),
               arw::InvalidArgument);
}
