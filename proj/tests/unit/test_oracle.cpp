#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "arw/engine.hpp"
#include "arw/errors.hpp"
#include "arw/oracle.hpp"
#include "frozen.hpp"

namespace o = arw::oracle;
using arw::Configuration;
using arw::Mode;
using arw::Params;
using arw::Rational;
using arw::Site;
using arw::Volume;

namespace {

struct Tiny {
  Configuration config;
  Params params;
  arw::JumpKernel kernel;
};

Tiny random_tiny(std::mt19937_64& rng, std::uint64_t max_mass) {
  static const std::vector<Volume> volumes = {
      Volume::sites(1, {{0}}),  Volume::ball(1, 1),          Volume::ball(1, 2),
      Volume::box({1, 0}),      Volume::sites(2, {{0, 0}, {1, 0}, {0, 1}, {-1, 0}}),
      Volume::sites(1, {{-1}, {0}, {2}})};
  const auto& v = volumes[std::uniform_int_distribution<std::size_t>(0, volumes.size() - 1)(rng)];
  Configuration c(v);
  const auto sites = v.enumerate();
  const auto mass = std::uniform_int_distribution<std::uint64_t>(1, max_mass)(rng);
  for (std::uint64_t i = 0; i < mass; ++i) {
    c.add_active(sites[std::uniform_int_distribution<std::size_t>(0, sites.size() - 1)(rng)]);
  }
  const double lambdas[] = {0.5, 1.0, 2.0};
  return {c, Params::with_rate(lambdas[std::uniform_int_distribution<int>(0, 2)(rng)]),
          arw::make_ssrw_kernel(v.dim())};
}

double total(const o::Distribution& d) {
  double s = 0.0;
  for (const auto& out : d.outcomes) s += out.probability;
  return s;
}

}  // namespace

TEST(ExactDistribution, SingleSite) {
  const auto v = Volume::sites(1, {{0}});
  const auto d = o::exact_stab_distribution(Configuration::single_particle(v), Params::with_rate(1.0),
                                            arw::make_ssrw_kernel(1), Mode::legal());
  ASSERT_EQ(d.outcomes.size(), 2u);
  ASSERT_TRUE(d.rational);
  for (const auto& out : d.outcomes) {
    EXPECT_EQ(*out.exact, Rational(1, 2));
    EXPECT_TRUE(out.config.at(Site{0}) == Configuration::kSleeping || out.config.empty());
  }
}

TEST(ExactDistribution, ThreeSitesFourSevenths) {
  const auto c = Configuration::single_particle(Volume::ball(1, 1));
  const auto params = Params::with_rate(1.0);
  const auto k = arw::make_ssrw_kernel(1);
  const auto occupied = o::exact_quantity(c, params, k, o::Quantity::kOriginOccupied);
  ASSERT_TRUE(occupied.exact);
  EXPECT_EQ(*occupied.exact, Rational(4, 7));
  EXPECT_NEAR(occupied.value, arw::testing::frozen::kOccupiedB1, 1e-15);
  const auto mean = o::exact_quantity(c, params, k, o::Quantity::kMeanCh);
  EXPECT_EQ(*mean.exact, Rational(4, 3));
  const auto pgf = o::exact_quantity(c, params, k, o::Quantity::kChPgf, params.jump_prob());
  EXPECT_EQ(1 - *pgf.exact, Rational(4, 7));
}

TEST(ExactDistribution, EmptyInitial) {
  const auto v = Volume::ball(1, 2);
  const auto d = o::exact_stab_distribution(Configuration(v), Params::with_rate(1.0), arw::make_ssrw_kernel(1),
                                            Mode::legal());
  ASSERT_EQ(d.outcomes.size(), 1u);
  EXPECT_TRUE(d.outcomes[0].config.empty());
  EXPECT_EQ(d.outcomes[0].probability, 1.0);
}

TEST(ExactDistribution, CertainSleepKeepsFilledInstance) {
  const auto v = Volume::ball(1, 1);
  const auto c = Configuration::filled_ball(v, 1);
  const auto occupied = o::exact_quantity(c, Params::always_sleep(), arw::make_ssrw_kernel(1),
                                          o::Quantity::kOriginOccupied);
  EXPECT_EQ(occupied.value, 1.0);
}

TEST(ExactDistribution, SortedAndNormalized) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const auto t = random_tiny(rng, 3);
    const auto d = o::exact_stab_distribution(t.config, t.params, t.kernel, Mode::legal());
    EXPECT_NEAR(total(d), 1.0, 1e-10);
    EXPECT_LE(d.residual, 1e-12);
    for (std::size_t k = 1; k < d.outcomes.size(); ++k) {
      EXPECT_GE(d.outcomes[k - 1].probability, d.outcomes[k].probability);
    }
    if (d.rational) {
      Rational sum = 0;
      for (const auto& out : d.outcomes) sum += *out.exact;
      EXPECT_EQ(sum, Rational(1));
    }
    for (const auto& out : d.outcomes) {
      for (auto s : out.config.states()) EXPECT_LT(s, 1);
    }
  }
}

TEST(ExactDistribution, PolicyIndependent) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const auto t = random_tiny(rng, 4);
    o::Options first, last;
    first.arithmetic = last.arithmetic = o::Arithmetic::kFloating;
    last.order = o::ToppleOrder::kLexLast;
    const auto a = o::exact_stab_distribution(t.config, t.params, t.kernel, Mode::legal(), first);
    const auto b = o::exact_stab_distribution(t.config, t.params, t.kernel, Mode::legal(), last);
    std::map<std::vector<std::int32_t>, double> pa, pb;
    for (const auto& out : a.outcomes) pa[{out.config.states().begin(), out.config.states().end()}] += out.probability;
    for (const auto& out : b.outcomes) pb[{out.config.states().begin(), out.config.states().end()}] += out.probability;
    for (const auto& [state, p] : pa) {
      const double q = pb.count(state) ? pb[state] : 0.0;
      EXPECT_NEAR(p, q, 1e-10) << i;
    }
    for (const auto& [state, p] : pb) EXPECT_TRUE(pa.count(state) || p < 1e-10);
  }
}

TEST(ExactDistribution, RationalAndFloatingAgree) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10; ++i) {
    const auto t = random_tiny(rng, 2);
    o::Options fl, ra;
    fl.arithmetic = o::Arithmetic::kFloating;
    ra.arithmetic = o::Arithmetic::kRational;
    const auto a = o::exact_quantity(t.config, t.params, t.kernel, o::Quantity::kOriginOccupied, 0.0, fl);
    const auto b = o::exact_quantity(t.config, t.params, t.kernel, o::Quantity::kOriginOccupied, 0.0, ra);
    ASSERT_TRUE(b.exact);
    EXPECT_NEAR(a.value, static_cast<double>(*b.exact), 1e-12);
  }
}

TEST(ExactDistribution, PgfIdentity) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 30; ++i) {
    const auto t = random_tiny(rng, 4);
    const auto occ = o::exact_quantity(t.config, t.params, t.kernel, o::Quantity::kOriginOccupied);
    const auto pgf = o::exact_quantity(t.config, t.params, t.kernel, o::Quantity::kChPgf, t.params.jump_prob());
    EXPECT_NEAR(occ.value, 1.0 - pgf.value, 1e-10) << i;
    if (occ.exact && pgf.exact) EXPECT_EQ(*occ.exact, 1 - *pgf.exact);
  }
}

TEST(ExactDistribution, MassRetainedMatchesDistribution) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10; ++i) {
    const auto t = random_tiny(rng, 3);
    const auto d = o::exact_stab_distribution(t.config, t.params, t.kernel, Mode::legal());
    double mass = 0.0;
    for (const auto& out : d.outcomes) mass += out.probability * static_cast<double>(out.config.mass());
    EXPECT_NEAR(o::exact_quantity(t.config, t.params, t.kernel, o::Quantity::kMassRetained).value, mass, 1e-10);
  }
}

TEST(ExactDistribution, WeakAndStrongModes) {
  const auto v = Volume::ball(1, 1);
  Configuration c(v);
  c.set(Site{0}, 2);
  c.set(Site{1}, 1);
  const auto params = Params::with_rate(1.0);
  const auto k = arw::make_ssrw_kernel(1);
  const auto weak = o::exact_stab_distribution(c, params, k, Mode::weak_origin(1));
  EXPECT_NEAR(total(weak), 1.0, 1e-12);
  for (const auto& out : weak.outcomes) {
    EXPECT_LE(out.config.at(Site{0}), 1);
    EXPECT_LT(out.config.at(Site{1}), 1);
  }
  const auto strong = o::exact_stab_distribution(c, params, k, Mode::strong_origin(1));
  for (const auto& out : strong.outcomes) EXPECT_EQ(out.config.at(Site{0}), 0);
}

TEST(ExactDistribution, MatchesMonteCarlo) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 3; ++i) {
    const auto t = random_tiny(rng, 3);
    const double exact = o::exact_quantity(t.config, t.params, t.kernel, o::Quantity::kOriginOccupied).value;
    arw::Engine engine(t.config.volume(), arw::InstructionStream(0, t.kernel, t.params));
    const int n = 20'000;
    int hits = 0;
    for (int r = 0; r < n; ++r) {
      engine.reset(static_cast<std::uint64_t>(r) + 1000 * static_cast<std::uint64_t>(i));
      engine.load(t.config);
      engine.stabilize(Mode::legal());
      hits += engine.origin_state() != 0;
    }
    const double p = static_cast<double>(hits) / n;
    EXPECT_NEAR(p, exact, 4 * std::sqrt(exact * (1 - exact) / n) + 1e-12) << i;
  }
}

TEST(ExactDistribution, Limits) {
  const auto k = arw::make_ssrw_kernel(1);
  const auto params = Params::with_rate(1.0);
  EXPECT_THROW(o::exact_stab_distribution(Configuration::filled_ball(Volume::ball(1, 6), 6), params, k, Mode::legal()),
               arw::ResourceError);
  Configuration heavy(Volume::ball(1, 1));
  heavy.set(Site{0}, 5);
  EXPECT_THROW(o::exact_stab_distribution(heavy, params, k, Mode::legal()), arw::ResourceError);
  o::Options small;
  small.limits.max_states = 3;
  heavy.set(Site{0}, 3);
  EXPECT_THROW(o::exact_stab_distribution(heavy, params, k, Mode::legal(), small), arw::ResourceError);
}

TEST(ExactDistribution, ChanceQuantitiesNeedActiveStart) {
  Configuration c(Volume::ball(1, 1));
  c.set(Site{0}, Configuration::kSleeping);
  EXPECT_THROW(o::exact_quantity(c, Params::with_rate(1.0), arw::make_ssrw_kernel(1), o::Quantity::kMeanCh),
               arw::InvalidArgument);
}

TEST(ToRational, SimpleFractionsAndBinaryFallback) {
  EXPECT_EQ(o::to_rational(0.5), Rational(1, 2));
  EXPECT_EQ(o::to_rational(1.0 / 3.0), Rational(1, 3));
  EXPECT_EQ(o::to_rational(4.0 / 7.0), Rational(4, 7));
  const Rational pi = o::to_rational(M_PI);
  EXPECT_EQ(static_cast<double>(pi), M_PI);
  const auto den = boost::multiprecision::denominator(pi);
  EXPECT_EQ(den & (den - 1), 0);  // power of two
}
