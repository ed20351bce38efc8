#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "arw/configuration.hpp"
#include "arw/engine.hpp"
#include "arw/errors.hpp"
#include "arw/randomness.hpp"
#include "arw/volume.hpp"

namespace arw {

using Rational = boost::multiprecision::cpp_rational;

/// Outcome of one run of the carpet procedure.
struct CarpetRunRecord {
  enum class EndReason { kStep1Jump, kEscaped, kBudget };
  int r = 0;
  /// Iteration index at which the procedure ended (>= 1).
  std::uint64_t ch_prime = 0;
  EndReason end_reason = EndReason::kBudget;
  /// Per iteration: the carpet-establishment step drew only sleeps.
  std::vector<std::uint8_t> step1_success;
  /// Per iteration: the particle jumped out of 0 came back before leaving B_r.
  std::vector<std::uint8_t> return_success;
};

std::string to_string(CarpetRunRecord::EndReason reason);

class CarpetBudgetExceeded : public Error {
 public:
  CarpetBudgetExceeded(const std::string& what, CarpetRunRecord partial)
      : Error(what), partial_(std::move(partial)) {}
  const CarpetRunRecord& partial() const noexcept { return partial_; }

 private:
  CarpetRunRecord partial_;
};

/// Carpet procedure on B_r (sup-norm ball) inside `volume`.
///
/// The start configuration is `initial` if given (it must put at least one
/// active particle on every site of B_r), otherwise one active particle per
/// site of B_r. Pre-step: weak stabilization w.r.t. B_r. Then per iteration:
///   1. topple every active particle of B_r \ {0} once, in lexicographic
///      order; any jump ends the run (kStep1Jump);
///   2. jump the origin particle out and keep moving it until it re-enters 0
///      (next iteration) or leaves B_r (kEscaped).
/// Uses the same instruction stacks as strong_via_weak, so the returned
/// ch_prime never exceeds the chance count of a coupled run.
CarpetRunRecord carpet_procedure(const InstructionStream& stream, const Volume& volume,
                                 int r, std::uint64_t max_iters,
                                 const Configuration* initial = nullptr,
                                 std::uint64_t max_topplings = kDefaultBudget);

/// Probability that a one-dimensional simple random walk started at +-1 hits
/// +-(r+1) before 0, from an exact rational solve of the hitting system.
Rational gamblers_ruin_escape(int r);
/// Same, after checking that `kernel` is the 1-d simple random walk
/// (UnsupportedError otherwise).
Rational gamblers_ruin_escape(const JumpKernel& kernel, int r);

/// Hole indicators E_{x,j} = [eta^W_j(x) = 0] over the tracked ball after
/// weak stabilization j, and the derived carpet radius.
struct HoleStats {
  std::uint64_t j = 0;
  /// Tracked-ball sites in lexicographic order, parallel to `holes`.
  std::vector<Site> sites;
  std::vector<std::uint8_t> holes;
  /// Largest i <= tracked radius with no hole in B_i.
  int carpet_radius = 0;
};

/// Largest i <= tracked_radius such that no hole has sup-norm <= i.
int carpet_radius(std::span<const Site> sites, std::span<const std::uint8_t> holes,
                  int tracked_radius);

/// Runs strong_via_weak from one active particle per site of the tracked
/// ball and records HoleStats for j = 1 .. min(Ch, max_j). Indices with
/// j > Ch are absent (missing, not imputed).
std::vector<HoleStats> hole_statistics(const InstructionStream& stream, const Volume& volume,
                                       int tracked_radius, std::uint64_t max_j = 8,
                                       std::uint64_t max_topplings = kDefaultBudget);

/// Chance count of strong_via_weak for a lone particle at the origin.
std::uint64_t single_excursion_chances(const InstructionStream& stream, const Volume& volume,
                                       std::uint64_t max_topplings = kDefaultBudget);

}  // namespace arw
