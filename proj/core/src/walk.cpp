#include "arw/walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arw/errors.hpp"
#include "arw/parallel.hpp"

namespace arw {

namespace {

std::size_t box_cells(int dim, std::int64_t radius) {
  double cells = 1.0;
  for (int i = 0; i < dim; ++i) cells *= static_cast<double>(2 * radius + 1);
  return cells > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(cells);
}

// Largest n whose meet-in-the-middle box fits in max_cells.
int feasible_n(const JumpKernel& kernel, std::size_t max_cells) {
  int half = 0;
  while (box_cells(kernel.dim(), static_cast<std::int64_t>(half + 1) * kernel.reach()) <= max_cells) {
    ++half;
    if (half > (1 << 28)) break;
  }
  return 2 * half;
}

// Row-major index helpers for the centered box of a given radius.
struct Box {
  int dim;
  int radius;
  std::size_t width;
  std::size_t size;
  std::vector<std::size_t> stride;

  Box(int d, int r) : dim(d), radius(r), width(static_cast<std::size_t>(2 * r + 1)), stride(d) {
    size = 1;
    for (int i = d - 1; i >= 0; --i) {
      stride[i] = size;
      size *= width;
    }
  }

  std::ptrdiff_t delta(const Site& o) const {
    std::ptrdiff_t out = 0;
    for (int i = 0; i < dim; ++i) out += static_cast<std::ptrdiff_t>(o[i]) * static_cast<std::ptrdiff_t>(stride[i]);
    return out;
  }
};

}  // namespace

std::vector<double> return_probabilities(const JumpKernel& kernel, int n, std::size_t max_cells) {
  if (n < 0) throw InvalidArgument("n must be nonnegative");
  const int dim = kernel.dim();
  const int reach = kernel.reach();
  const int half = (n + 1) / 2;
  if (box_cells(dim, static_cast<std::int64_t>(half) * reach) > max_cells) {
    const int limit = feasible_n(kernel, max_cells);
    throw ResourceError("return probability array exceeds the cell budget beyond n = " +
                            std::to_string(limit),
                        limit);
  }
  std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
  out[0] = 1.0;
  if (n == 0) return out;

  std::vector<double> prev(1, 1.0);
  int prev_r = 0;
  std::vector<std::ptrdiff_t> deltas;
  std::vector<double> probs;
  for (int a = 1; a <= half; ++a) {
    const Box cur_box(dim, a * reach);
    const Box prev_box(dim, prev_r);
    deltas.clear();
    probs.clear();
    for (const auto& e : kernel.support()) {
      deltas.push_back(cur_box.delta(e.offset));
      probs.push_back(e.prob);
    }
    std::vector<double> cur(cur_box.size, 0.0);
    const std::size_t row = prev_box.width;                 // last axis is contiguous
    const std::size_t rows = prev_box.size / row;
    const auto shift = static_cast<std::size_t>(cur_box.radius - prev_r);
    // Start of each prev row inside cur: rows are visited in row-major order.
    std::vector<std::size_t> row_start(rows);
    {
      std::vector<int> coord(static_cast<std::size_t>(dim), 0);
      for (std::size_t r = 0; r < rows; ++r) {
        std::size_t c = shift * cur_box.stride[static_cast<std::size_t>(dim - 1)];
        for (int k = 0; k + 1 < dim; ++k) c += (static_cast<std::size_t>(coord[k]) + shift) * cur_box.stride[k];
        row_start[r] = c;
        for (int k = dim - 2; k >= 0; --k) {
          if (++coord[k] < static_cast<int>(prev_box.width)) break;
          coord[k] = 0;
        }
      }
    }
    for (std::size_t r = 0; r < rows; ++r) {
      const double* src = prev.data() + r * row;
      for (std::size_t s = 0; s < deltas.size(); ++s) {
        double* dst = cur.data() + static_cast<std::ptrdiff_t>(row_start[r]) + deltas[s];
        const double w = probs[s];
        for (std::size_t j = 0; j < row; ++j) dst[j] += w * src[j];
      }
    }
    // P(S_{2a-1} = 0) = sum_y P_{a-1}(y) P_a(-y); P(S_{2a} = 0) = sum_x P_a(x) P_a(-x).
    if (2 * a - 1 <= n) {
      double odd = 0.0;
      const std::size_t last = cur_box.size - 1;
      for (std::size_t r = 0; r < rows; ++r) {
        const double* src = prev.data() + r * row;
        for (std::size_t j = 0; j < row; ++j) odd += src[j] * cur[last - (row_start[r] + j)];
      }
      out[static_cast<std::size_t>(2 * a - 1)] = odd;
    }
    if (2 * a <= n) {
      double even = 0.0;
      const std::size_t size = cur_box.size;
      for (std::size_t i = 0; i < size; ++i) even += cur[i] * cur[size - 1 - i];
      out[static_cast<std::size_t>(2 * a)] = even;
    }
    prev.swap(cur);
    prev_r = cur_box.radius;
  }
  return out;
}

double return_probability(const JumpKernel& kernel, int n, std::size_t max_cells) {
  return return_probabilities(kernel, n, max_cells).back();
}

WalkAnalytics green_function(const JumpKernel& kernel, int truncation_n, std::uint64_t seed,
                             const GreenOptions& options) {
  if (truncation_n < 0) throw InvalidArgument("truncation_n must be nonnegative");
  WalkAnalytics out;
  out.truncation_n = truncation_n;
  // The decay fit needs a few dozen exact terms even for tiny truncations.
  const int fit_n = std::max(truncation_n, 64) & ~1;
  const auto probs = return_probabilities(kernel, std::max(truncation_n, fit_n));
  for (int k = 0; k <= truncation_n; ++k) out.partial_sum += probs[static_cast<std::size_t>(k)];

  // Pair sums smooth out periodicity.
  auto pair = [&](int m) { return probs[static_cast<std::size_t>(m)] + probs[static_cast<std::size_t>(m - 1)]; };
  const double s_full = pair(fit_n);
  const double s_half = pair(fit_n / 2);
  if (s_full <= 0.0) {
    out.decay_exponent = std::numeric_limits<double>::infinity();
  } else {
    out.decay_exponent = std::log2(s_half / s_full);
  }
  out.divergent = out.partial_sum > options.divergence_threshold ||
                  out.decay_exponent <= 1.0 + options.exponent_slack;
  if (out.divergent) return out;

  // Monte Carlo count of returns in (truncation_n, horizon].
  const std::uint64_t horizon = std::max<std::uint64_t>(options.horizon, static_cast<std::uint64_t>(truncation_n));
  const std::uint64_t samples = options.mc_tail_samples;
  if (samples > 0 && horizon > static_cast<std::uint64_t>(truncation_n) && s_full > 0.0) {
    std::vector<std::uint32_t> counts(samples, 0);
    const auto& support = kernel.support();
    const int dim = kernel.dim();
    std::vector<int> flat;
    for (const auto& e : support) flat.insert(flat.end(), e.offset.begin(), e.offset.end());
    const auto& cdf = kernel.cdf();
    parallel_for(0, samples, resolve_workers(options.workers), [&](std::size_t i, unsigned) {
      const std::uint64_t s = derive_seed(seed, 0, i);
      std::vector<int> pos(static_cast<std::size_t>(dim), 0);
      std::uint32_t returns = 0;
      for (std::uint64_t t = 1; t <= horizon; ++t) {
        const double u = to_unit(mix64(s + t * kGolden));
        std::size_t idx = 0;
        for (std::size_t k = 0; k + 1 < cdf.size(); ++k) idx += u >= cdf[k];
        const int* o = flat.data() + idx * static_cast<std::size_t>(dim);
        int nonzero = 0;
        for (int k = 0; k < dim; ++k) {
          pos[k] += o[k];
          nonzero |= pos[k];
        }
        returns += (nonzero == 0) & (t > static_cast<std::uint64_t>(truncation_n));
      }
      counts[i] = returns;
    });
    double sum = 0.0, sum_sq = 0.0;
    for (auto c : counts) {
      sum += c;
      sum_sq += static_cast<double>(c) * c;
    }
    const double n = static_cast<double>(samples);
    out.tail_estimate = sum / n;
    if (samples > 1) {
      const double var = std::max(0.0, (sum_sq - n * out.tail_estimate * out.tail_estimate) / (n - 1.0));
      out.tail_std_error = std::sqrt(var / n);
    }
  }

  // Returns beyond the horizon: pair sums behave like C m^-alpha, so the
  // remainder is about C H^(1-alpha) / (2 (alpha - 1)); doubled for safety.
  if (s_full > 0.0 && std::isfinite(out.decay_exponent)) {
    const double alpha = out.decay_exponent;
    const double c = s_full * std::pow(static_cast<double>(fit_n), alpha);
    const double h = static_cast<double>(std::max<std::uint64_t>(horizon, static_cast<std::uint64_t>(truncation_n)));
    out.horizon_bound = c * std::pow(h, 1.0 - alpha) / (alpha - 1.0);
  }
  out.green_estimate = out.partial_sum + out.tail_estimate;
  out.escape_prob = 1.0 / out.green_estimate;
  out.error_bound = 4.0 * out.tail_std_error + out.horizon_bound;
  return out;
}

QEstimate single_particle_q(const JumpKernel& kernel, const Params& params, int truncation_n) {
  if (truncation_n < 0) throw InvalidArgument("truncation_n must be nonnegative");
  QEstimate out;
  out.truncation_n = truncation_n;
  const double ls = params.sleep_prob();
  const double lj = params.jump_prob();
  if (params.sleep_certain()) {
    out.value = 1.0;
    return out;
  }
  if (params.sleep_disabled()) return out;
  const auto probs = return_probabilities(kernel, truncation_n);
  double weight = ls;
  double sum = 0.0;
  for (int k = 0; k <= truncation_n; ++k) {
    sum += weight * probs[static_cast<std::size_t>(k)];
    weight *= lj;
  }
  out.value = sum;
  // Tail sum_{m>N} ls lj^m P(S_m=0) <= lj^(N+1) sup_{m>N} P(S_m=0). For
  // symmetric kernels the even-step return probabilities are nonincreasing
  // and dominate the odd ones, so the sup is at most P(S_N'=0) with N' the
  // largest even number <= N.
  double sup = 1.0;
  if (kernel.symmetric()) sup = probs[static_cast<std::size_t>(truncation_n & ~1)];
  out.truncation_bound = std::pow(lj, truncation_n + 1) * sup;
  return out;
}

int default_q_truncation(const JumpKernel& kernel, const Params& params) {
  const int cap = kernel.dim() == 1 ? 20000 : kernel.dim() == 2 ? 600 : 200;
  const double lj = params.jump_prob();
  if (lj <= 0.0) return 0;
  if (lj >= 1.0) return cap;
  const double needed = std::ceil(std::log(1e-13) / std::log(lj)) - 1.0;
  return static_cast<int>(std::clamp(needed, 0.0, static_cast<double>(cap)));
}

EstimateReport escape_before_return_mc(const JumpKernel& kernel, const Params& params,
                                       const Volume& volume, std::uint64_t replicas,
                                       std::uint64_t seed, std::uint64_t horizon,
                                       unsigned workers) {
  if (replicas == 0) throw InvalidArgument("replicas must be >= 1");
  if (volume.dim() != kernel.dim()) throw InvalidArgument("kernel dimension does not match the volume");
  const bool bounded = volume.bounded();
  if (!bounded && horizon == 0) throw InvalidArgument("horizon must be >= 1 for an unbounded volume");
  const double ls = params.sleep_prob();
  const double lj = params.jump_prob();
  const auto& support = kernel.support();
  const int dim = kernel.dim();
  std::vector<std::uint8_t> escaped(replicas, 0);
  std::vector<std::uint8_t> cut(replicas, 0);
  parallel_for(0, replicas, resolve_workers(workers), [&](std::size_t i, unsigned) {
    const std::uint64_t s = derive_seed(seed, 0, i);
    std::vector<int> pos(static_cast<std::size_t>(dim), 0);
    auto step = [&](std::size_t idx) {
      bool zero = true;
      for (int k = 0; k < dim; ++k) {
        pos[k] += support[idx].offset[k];
        zero = zero && pos[k] == 0;
      }
      return zero;
    };
    // Forced jump out of the origin.
    bool at_origin = step(kernel.sample_index(to_unit(mix64(s))));
    for (std::uint64_t t = 1;; ++t) {
      if (at_origin) return;
      if (!volume.contains(pos)) break;
      if (!bounded && t > horizon) {
        cut[i] = 1;
        break;
      }
      const double u = to_unit(mix64(s + t * kGolden));
      if (u < ls) break;
      at_origin = step(kernel.sample_index((u - ls) / lj));
    }
    escaped[i] = 1;
  });
  std::uint64_t successes = 0, cuts = 0;
  for (std::size_t i = 0; i < replicas; ++i) {
    successes += escaped[i];
    cuts += cut[i];
  }
  EstimateReport report = proportion_report(successes, replicas, seed);
  report.params = {{"lambda", params.label()},
                   {"kernel", kernel.name()},
                   {"volume", volume.describe()}};
  if (!bounded) {
    report.diagnostics["horizon_bias_bound"] = std::pow(lj, static_cast<double>(horizon));
    report.diagnostics["horizon_cuts"] = static_cast<double>(cuts);
  }
  return report;
}

}  // namespace arw
