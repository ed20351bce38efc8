#include <cmath>

#include <gtest/gtest.h>

#include "arw/estimators.hpp"
#include "arw/procedures.hpp"
#include "arw/walk.hpp"
#include "oracles.hpp"

namespace t = arw::testing;
using arw::CarpetRunRecord;
using arw::Configuration;
using arw::InstructionStream;
using arw::Params;
using arw::Rational;
using arw::Site;
using arw::Volume;

namespace {

InstructionStream stream(std::uint64_t seed, int dim, Params params) {
  return InstructionStream(seed, arw::make_ssrw_kernel(dim), params);
}

double se_of(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

void check_record_shape(const CarpetRunRecord& rec) {
  ASSERT_EQ(rec.step1_success.size(), rec.ch_prime);
  for (std::size_t i = 0; i + 1 < rec.step1_success.size(); ++i) EXPECT_EQ(rec.step1_success[i], 1);
  if (rec.end_reason == CarpetRunRecord::EndReason::kStep1Jump) {
    EXPECT_EQ(rec.step1_success.back(), 0);
    EXPECT_EQ(rec.return_success.size(), rec.ch_prime - 1);
  } else {
    ASSERT_EQ(rec.end_reason, CarpetRunRecord::EndReason::kEscaped);
    EXPECT_EQ(rec.step1_success.back(), 1);
    ASSERT_EQ(rec.return_success.size(), rec.ch_prime);
    EXPECT_EQ(rec.return_success.back(), 0);
  }
  for (std::size_t i = 0; i + 1 < rec.return_success.size(); ++i) EXPECT_EQ(rec.return_success[i], 1);
}

}  // namespace

TEST(GamblersRuin, SmallRadii) {
  EXPECT_EQ(arw::gamblers_ruin_escape(0), Rational(1));
  EXPECT_EQ(arw::gamblers_ruin_escape(3), Rational(1, 4));
  EXPECT_EQ(arw::gamblers_ruin_escape(9), Rational(1, 10));
}

TEST(GamblersRuin, ExactReciprocalUpToHundred) {
  for (int r = 0; r <= 100; ++r) {
    const Rational g = arw::gamblers_ruin_escape(r);
    EXPECT_EQ(g * (r + 1), Rational(1)) << r;
    if (r <= 30) EXPECT_NEAR(static_cast<double>(g), t::gamblers_ruin_dense(r), 1e-12);
  }
}

TEST(GamblersRuin, KernelCheck) {
  EXPECT_EQ(arw::gamblers_ruin_escape(arw::make_ssrw_kernel(1), 4), Rational(1, 5));
  EXPECT_THROW(arw::gamblers_ruin_escape(arw::make_ssrw_kernel(2), 4), arw::UnsupportedError);
  EXPECT_THROW(arw::gamblers_ruin_escape(arw::JumpKernel(1, {{{1}, 0.6}, {{-1}, 0.4}}), 4),
               arw::UnsupportedError);
  EXPECT_THROW(arw::gamblers_ruin_escape(-1), arw::InvalidArgument);
}

TEST(Carpet, EmptyCarpetEndsAtFirstIteration) {
  for (double lambda : {0.5, 5.0}) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto rec = arw::carpet_procedure(stream(seed, 1, Params::with_rate(lambda)), Volume::ball(1, 3), 0, 100);
      EXPECT_EQ(rec.ch_prime, 1u);
      EXPECT_EQ(rec.end_reason, CarpetRunRecord::EndReason::kEscaped);
      check_record_shape(rec);
    }
  }
}

TEST(Carpet, CertainSleepEscapeMatchesGamblersRuin) {
  const int n = 10'000;
  std::uint64_t escapes = 0, attempts = 0;
  for (int i = 0; i < n; ++i) {
    const auto rec = arw::carpet_procedure(stream(static_cast<std::uint64_t>(i), 1, Params::always_sleep()),
                                           Volume::ball(1, 6), 3, 1'000'000);
    ASSERT_EQ(rec.end_reason, CarpetRunRecord::EndReason::kEscaped);
    check_record_shape(rec);
    for (auto s : rec.return_success) {
      ++attempts;
      escapes += s == 0;
    }
  }
  const double p = static_cast<double>(escapes) / static_cast<double>(attempts);
  EXPECT_NEAR(p, 0.25, 4 * se_of(0.25, static_cast<double>(attempts)));
}

TEST(Carpet, RecordShape) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    check_record_shape(arw::carpet_procedure(stream(seed, 1, Params::with_rate(3.0)), Volume::ball(1, 8), 4, 10'000));
  }
}

TEST(Carpet, NeverExceedsCoupledChances) {
  for (int r : {1, 2, 5}) {
    for (double lambda : {1.0, 10.0, 50.0}) {
      const auto v = Volume::ball(1, r + 5);
      for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto s = stream(seed, 1, Params::with_rate(lambda));
        const auto carpet = arw::carpet_procedure(s, v, r, 1'000'000);
        const auto strong = arw::strong_via_weak(Configuration::filled_ball(v, r), s);
        ASSERT_LE(carpet.ch_prime, strong.chances) << r << " " << lambda << " " << seed;
      }
    }
  }
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto s = stream(seed, 2, Params::with_rate(20.0));
    const auto v = Volume::ball(2, 4);
    const auto carpet = arw::carpet_procedure(s, v, 2, 1'000'000);
    EXPECT_LE(carpet.ch_prime, arw::strong_via_weak(Configuration::filled_ball(v, 2), s).chances);
  }
}

TEST(Carpet, GeometricSandwichSmall) {
  const int r = 5;
  const auto params = Params::with_rate(50.0);
  const double p_lo = std::min(1.0, 2 * r * params.jump_prob() + 1.0 / (r + 1));
  const double p_hi = 1.0 / (r + 1);
  const int n = 4000;
  std::vector<int> counts(21, 0);
  for (int i = 0; i < n; ++i) {
    const auto rec = arw::carpet_procedure(stream(static_cast<std::uint64_t>(i), 1, params), Volume::ball(1, r + 3), r,
                                           1'000'000);
    ++counts[std::min<std::size_t>(rec.ch_prime, 20)];
  }
  double cum = 0;
  for (int k = 1; k <= 20; ++k) {
    cum += counts[k];
    const double cdf = k == 20 ? cum / n : cum / n;
    const double se = std::max(se_of(cdf, n), 1.0 / n);
    if (k < 20) {
      EXPECT_LE(cdf, t::geom_cdf(p_lo, k) + 4 * se) << k;
      EXPECT_GE(cdf, t::geom_cdf(p_hi, k) - 4 * se) << k;
    }
  }
}

TEST(Carpet, Validation) {
  const auto s = stream(1, 1, Params::with_rate(1.0));
  EXPECT_THROW(arw::carpet_procedure(s, Volume::ball(1, 2), 3, 10), arw::InvalidArgument);
  EXPECT_THROW(arw::carpet_procedure(s, Volume::ball(1, 5), -1, 10), arw::InvalidArgument);
  EXPECT_THROW(arw::carpet_procedure(s, Volume::ball(1, 5), 1, 0), arw::InvalidArgument);
  Configuration partial(Volume::ball(1, 5));
  partial.set(Site{0}, 1);
  EXPECT_THROW(arw::carpet_procedure(s, Volume::ball(1, 5), 1, 10, &partial), arw::InvalidArgument);
  partial.set(Site{1}, 2);
  partial.set(Site{-1}, 1);
  EXPECT_NO_THROW(arw::carpet_procedure(s, Volume::ball(1, 5), 1, 10'000, &partial));
}

TEST(Carpet, IterationCapRaisesWithPartialRecord) {
  int raised = 0;
  for (std::uint64_t seed = 0; seed < 200 && raised == 0; ++seed) {
    try {
      arw::carpet_procedure(stream(seed, 1, Params::always_sleep()), Volume::ball(1, 6), 3, 1);
    } catch (const arw::CarpetBudgetExceeded& e) {
      ++raised;
      EXPECT_EQ(e.partial().end_reason, CarpetRunRecord::EndReason::kBudget);
      EXPECT_EQ(e.partial().ch_prime, 1u);
      EXPECT_EQ(arw::to_string(e.partial().end_reason), "BUDGET");
    }
  }
  EXPECT_EQ(raised, 1);
}

TEST(CarpetRadius, LargestHoleFreeBall) {
  const std::vector<Site> sites{{-3}, {-2}, {-1}, {0}, {1}, {2}, {3}};
  EXPECT_EQ(arw::carpet_radius(sites, std::vector<std::uint8_t>(7, 0), 3), 3);
  EXPECT_EQ(arw::carpet_radius(sites, std::vector<std::uint8_t>{0, 0, 0, 0, 0, 1, 0}, 3), 1);
  EXPECT_EQ(arw::carpet_radius(sites, std::vector<std::uint8_t>{0, 0, 1, 0, 0, 0, 0}, 3), 0);
  EXPECT_EQ(arw::carpet_radius(sites, std::vector<std::uint8_t>{1, 0, 0, 0, 0, 0, 0}, 3), 2);
}

TEST(Holes, CertainSleepLeavesNoHoles) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto stats = arw::hole_statistics(stream(seed, 1, Params::always_sleep()), Volume::ball(1, 8), 5, 1);
    ASSERT_EQ(stats.size(), 1u);
    EXPECT_EQ(stats[0].j, 1u);
    EXPECT_EQ(stats[0].carpet_radius, 5);
    for (auto h : stats[0].holes) EXPECT_EQ(h, 0);
  }
}

TEST(Holes, RecordedOnlyWhileOriginOccupied) {
  const auto v = Volume::ball(1, 12);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto s = stream(seed, 1, Params::with_rate(2.0));
    const auto stats = arw::hole_statistics(s, v, 6, 8);
    const auto ch = arw::strong_via_weak(Configuration::filled_ball(v, 6), s).chances;
    ASSERT_EQ(stats.size(), std::min<std::uint64_t>(ch, 8)) << seed;
    for (std::size_t j = 0; j < stats.size(); ++j) {
      EXPECT_EQ(stats[j].j, j + 1);
      EXPECT_EQ(stats[j].sites.size(), 13u);
      EXPECT_EQ(stats[j].carpet_radius, arw::carpet_radius(stats[j].sites, stats[j].holes, 6));
    }
  }
}

TEST(Holes, FirstSnapshotHoleRateBound) {
  const auto params = Params::with_rate(20.0);
  const int n = 5000;
  std::vector<int> holes(41, 0), radius(21, 0);
  int trials = 0;
  for (int i = 0; i < n; ++i) {
    const auto stats = arw::hole_statistics(stream(static_cast<std::uint64_t>(i), 1, params), Volume::ball(1, 25), 20, 1);
    if (stats.empty()) continue;
    ++trials;
    for (std::size_t k = 0; k < stats[0].holes.size(); ++k) holes[k] += stats[0].holes[k];
    ++radius[static_cast<std::size_t>(stats[0].carpet_radius)];
  }
  ASSERT_GT(trials, n / 2);
  const double lj = params.jump_prob();
  for (std::size_t k = 0; k < holes.size(); ++k) {
    if (k == 20) continue;
    const double p = static_cast<double>(holes[k]) / trials;
    EXPECT_LE(p, lj + 4 * std::max(se_of(p, trials), 1.0 / trials)) << k;
  }
  for (int i = 0; i < 20; ++i) {
    const double p = static_cast<double>(radius[i]) / trials;
    EXPECT_LE(p, 2 * lj + 4 * std::max(se_of(p, trials), 1.0 / trials)) << i;
  }
}

TEST(SingleExcursion, TrivialVolumes) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EXPECT_EQ(arw::single_excursion_chances(stream(seed, 1, Params::with_rate(1.0)), Volume::sites(1, {{0}})), 1u);
  }
}

TEST(SingleExcursion, GeometricOnB1) {
  const int n = 50'000;
  double sum = 0, sum_sq = 0;
  for (int i = 0; i < n; ++i) {
    const auto ch = static_cast<double>(
        arw::single_excursion_chances(stream(static_cast<std::uint64_t>(i), 1, Params::with_rate(1.0)), Volume::ball(1, 1)));
    sum += ch;
    sum_sq += ch * ch;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 4.0 / 3.0, 4 * std::sqrt((sum_sq / n - mean * mean) / n));
}

TEST(SingleExcursion, PgfBoundFromEscapeProbability) {
  const auto params = Params::with_rate(1.0);
  const auto v = Volume::ball(1, 10);
  const int n = 20'000;
  double acc = 0, acc_sq = 0;
  for (int i = 0; i < n; ++i) {
    const double w = std::pow(params.jump_prob(),
                              static_cast<double>(arw::single_excursion_chances(stream(static_cast<std::uint64_t>(i), 1, params), v)));
    acc += w;
    acc_sq += w * w;
  }
  const double mean = acc / n;
  const double se = std::sqrt((acc_sq / n - mean * mean) / n);
  const auto pesc = arw::escape_before_return_mc(arw::make_ssrw_kernel(1), params, v, 20'000, 77);
  const double bound = params.sleep_prob() / (params.sleep_prob() + params.jump_prob() * pesc.point);
  EXPECT_GE(1.0 - mean, bound - 4 * se);
}

TEST(SingleParticle, OccupationAboveQ) {
  const auto k = arw::make_ssrw_kernel(3);
  const auto params = Params::with_rate(0.1);
  const double q = arw::single_particle_q(k, params, 100).value;
  const auto v = Volume::ball(3, 6);
  const auto c = Configuration::single_particle(v);
  arw::Engine engine(v, InstructionStream(0, k, params));
  const int n = 20'000;
  int occupied = 0;
  for (int i = 0; i < n; ++i) {
    engine.reset(static_cast<std::uint64_t>(i));
    engine.load(c);
    engine.stabilize(arw::Mode::legal());
    occupied += engine.origin_state() == Configuration::kSleeping;
  }
  const double p = static_cast<double>(occupied) / n;
  EXPECT_GE(p, q - 4 * se_of(p, n));
}
