#pragma once

#include <cstdint>
#include <vector>

#include "arw/kernel.hpp"
#include "arw/params.hpp"
#include "arw/report.hpp"
#include "arw/volume.hpp"

namespace arw {

/// Exact P(S_n = 0) for the walk driven by `kernel`, by iterated
/// convolution over the reachable box. Throws ResourceError (carrying the
/// largest feasible n) when the box would exceed `max_cells`.
double return_probability(const JumpKernel& kernel, int n,
                          std::size_t max_cells = 50'000'000);

/// P(S_k = 0) for k = 0..n in one pass. Uses the meet-in-the-middle identity
/// P(S_{a+b} = 0) = sum_x P(S_a = x) P(S_b = -x) so the box only needs radius
/// about n/2 times the kernel reach.
std::vector<double> return_probabilities(const JumpKernel& kernel, int n,
                                         std::size_t max_cells = 50'000'000);

/// Green's function G = sum_n P(S_n = 0) and escape probability 1/G.
struct WalkAnalytics {
  bool divergent = false;
  double green_estimate = 0.0;  // meaningless when divergent
  double escape_prob = 0.0;     // 0 when divergent
  int truncation_n = 0;
  double partial_sum = 0.0;     // exact prefix sum up to truncation_n
  double tail_estimate = 0.0;   // Monte Carlo tail beyond truncation_n
  double tail_std_error = 0.0;
  double horizon_bound = 0.0;   // asymptotic bound on returns past the horizon
  double decay_exponent = 0.0;  // fitted alpha in P(S_n=0) ~ n^-alpha
  /// 4 tail standard errors plus the horizon bound.
  double error_bound = 0.0;
};

struct GreenOptions {
  std::uint64_t mc_tail_samples = 20'000;
  std::uint64_t horizon = 20'000;
  /// Partial sums above this classify the kernel as recurrent.
  double divergence_threshold = 50.0;
  /// Decay exponents at or below 1 + slack classify the kernel as recurrent.
  double exponent_slack = 0.1;
  unsigned workers = 0;
};

WalkAnalytics green_function(const JumpKernel& kernel, int truncation_n,
                             std::uint64_t seed, const GreenOptions& options = {});

/// Probability q that a lone particle started at 0 falls asleep at 0.
struct QEstimate {
  double value = 0.0;
  /// Bound on the neglected series tail: jump_prob^(truncation_n + 1).
  double truncation_bound = 0.0;
  int truncation_n = 0;
};

QEstimate single_particle_q(const JumpKernel& kernel, const Params& params,
                            int truncation_n);

/// Smallest N with jump_prob^(N+1) <= 1e-13, capped per dimension so the
/// exact return probabilities stay cheap (20000 in d=1, 600 in d=2, 200 above).
int default_q_truncation(const JumpKernel& kernel, const Params& params);

/// Fraction of excursions that, after the forced jump out of the origin,
/// fall asleep or leave `volume` before re-entering the origin. With an
/// unbounded volume the walk is cut at `horizon` steps (counted as an
/// escape) and the bias bound jump_prob^horizon is reported in the
/// diagnostics as "horizon_bias_bound".
EstimateReport escape_before_return_mc(const JumpKernel& kernel,
                                       const Params& params, const Volume& volume,
                                       std::uint64_t replicas, std::uint64_t seed,
                                       std::uint64_t horizon = 1'000'000,
                                       unsigned workers = 0);

}  // namespace arw
