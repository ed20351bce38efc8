#pragma once

// Independent reference computations used only by the tests. None of them
// shares code with the library.

#include <cstdint>
#include <vector>

#include "arw/kernel.hpp"

namespace arw::testing {

/// P(S_n = 0) by enumerating all |support|^n paths.
double brute_force_return_probability(const JumpKernel& kernel, int n);

/// P(S_k = 0) for the 1-d simple walk, k = 0..n, by counting bit strings
/// (bit set = step right). n <= 30.
std::vector<double> ssrw1_enumerated_returns(int n);

/// lambda_s / sqrt(1 - lambda_J^2).
double q_closed_form_d1(double lambda);

/// sum_n s^n P(S_n = 0) for the d-dimensional simple walk, from
/// int_0^inf e^{-t} I_0(s t / d)^d dt.
double ssrw_return_series(int dim, double s);

/// Watson's closed form for the 3-d simple walk Green's function.
double watson_g3();

/// Hitting probability of r+1 before 0 from 1 for the 1-d simple walk, by
/// dense Gaussian elimination in doubles.
double gamblers_ruin_dense(int r);

/// Geom(p) on {1,2,...}: P(X <= k).
double geom_cdf(double p, int k);

}  // namespace arw::testing
