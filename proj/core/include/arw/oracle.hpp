#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "arw/configuration.hpp"
#include "arw/engine.hpp"
#include "arw/kernel.hpp"
#include "arw/params.hpp"

namespace arw {

using Rational = boost::multiprecision::cpp_rational;

/// Exact outcome distributions for tiny volumes, from the absorbing Markov
/// chain induced by a fixed toppling order where every toppling branches over
/// the instruction marginals.
namespace oracle {

/// A chain state: per-site states (kSleeping or a count) plus the phase of
/// the strong-via-weak instrumentation.
struct ChainState {
  enum class Phase : std::int8_t { kStabilizing, kWeakViaOrigin };
  std::vector<std::int8_t> states;
  Phase phase = Phase::kStabilizing;

  bool operator==(const ChainState&) const = default;
};

struct Limits {
  std::size_t max_sites = 10;
  std::uint64_t max_mass = 4;
  /// Auto arithmetic switches to rationals at or below these sizes.
  std::size_t rational_max_sites = 5;
  std::uint64_t rational_max_mass = 2;
  std::size_t max_states = 2'000'000;
};

enum class ToppleOrder { kLexFirst, kLexLast };
enum class Arithmetic { kAuto, kFloating, kRational };

struct Options {
  Limits limits;
  ToppleOrder order = ToppleOrder::kLexFirst;
  Arithmetic arithmetic = Arithmetic::kAuto;
};

struct StableOutcome {
  Configuration config;
  double probability = 0.0;
  std::optional<Rational> exact;
};

struct Distribution {
  /// Sorted by decreasing probability, ties in lexicographic state order.
  std::vector<StableOutcome> outcomes;
  std::size_t transient_states = 0;
  bool rational = false;
  /// Max-norm residual of the floating solve (0 for rationals).
  double residual = 0.0;
};

Distribution exact_stab_distribution(const Configuration& initial, const Params& params,
                                     const JumpKernel& kernel, const Mode& mode,
                                     const Options& options = {});

enum class Quantity { kOriginOccupied, kMeanCh, kChPgf, kMassRetained };

struct Value {
  double value = 0.0;
  std::optional<Rational> exact;
};

/// Exact expectation of `quantity`. kChPgf evaluates E[s^Ch] at `s`; the
/// chance quantities require an all-active initial configuration.
Value exact_quantity(const Configuration& initial, const Params& params,
                     const JumpKernel& kernel, Quantity quantity, double s = 0.0,
                     const Options& options = {});

/// Closest rational with denominator <= max_den, accepted only if it matches
/// `x` to 1e-14 relative; otherwise the exact binary value of x.
Rational to_rational(double x, std::int64_t max_den = 1'000'000);

}  // namespace oracle
}  // namespace arw
