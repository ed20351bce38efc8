#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "arw/kernel.hpp"
#include "arw/params.hpp"

namespace arw {

struct Instruction {
  enum class Tag { kSleep, kJump };
  Tag tag = Tag::kSleep;
  Site offset;  // empty for sleep

  bool is_sleep() const noexcept { return tag == Tag::kSleep; }
  bool operator==(const Instruction&) const = default;
};

/// Result of consuming instructions at one site until the first jump.
struct JumpDraw {
  std::size_t support_index = 0;
  std::uint64_t consumed = 0;
  bool first_was_sleep = false;
};

/// Stateless instruction stacks I_x(k).
///
/// instruction(x, k) is a pure function of (seed, x, k, params, kernel):
///   key(x) = mix(... mix(mix(seed + golden) ^ (x_1 + 2^20)) ... ^ (x_d + 2^20))
///   u      = top53(mix(key(x) + k * golden)) / 2^53
/// with mix the SplitMix64 finalizer and golden = 0x9e3779b97f4a7c15.
/// u < sleep_prob gives a sleep; otherwise the jump offset is the first
/// support entry i with u < sleep_prob + jump_prob * cdf_i.
class InstructionStream {
 public:
  /// Coordinates must satisfy |x_i| < 2^20.
  static constexpr int kCoordinateLimit = 1 << 20;
  static constexpr std::int32_t kSleep = -1;

  InstructionStream(std::uint64_t seed, JumpKernel kernel, Params params);

  std::uint64_t seed() const noexcept { return seed_; }
  const JumpKernel& kernel() const noexcept { return kernel_; }
  const Params& params() const noexcept { return params_; }

  Instruction instruction(std::span<const int> site, std::uint64_t k) const;

  /// Per-site key; throws RangeError outside the addressable range.
  std::uint64_t site_key(std::span<const int> site) const;

  /// Hot path: kSleep or the support index of the jump.
  std::int32_t draw(std::uint64_t key, std::uint64_t k) const noexcept {
    const std::uint64_t bits = mix(key + k * kGold);
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    if (u < sleep_prob_) return kSleep;
    const std::size_t n = thresholds_.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (u < thresholds_[i]) return static_cast<std::int32_t>(i);
    }
    return static_cast<std::int32_t>(n - 1);
  }

  /// Branch-free variant of draw(): 0 for a sleep, 1 + support index for a jump.
  std::uint32_t draw_index(std::uint64_t key, std::uint64_t k) const noexcept {
    const std::uint64_t bits = mix(key + k * kGold);
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    std::uint32_t idx = u >= sleep_prob_;
    const double* t = thresholds_.data();
    const std::size_t n = thresholds_.size() - 1;
    for (std::size_t i = 0; i < n; ++i) idx += u >= t[i];
    return idx;
  }

  /// Consumes entries k, k+1, ... until a jump. In always-sleep mode no
  /// entry is ever a jump; there the move is the kernel-marginal draw of entry
  /// k (the limit of skipping the ineffective sleeps), consuming one entry.
  JumpDraw next_jump(std::uint64_t key, std::uint64_t k) const noexcept;

  /// Kernel-marginal support index for entry k, ignoring sleeps.
  std::size_t jump_marginal(std::uint64_t key, std::uint64_t k) const noexcept;

  InstructionStream reseeded(std::uint64_t seed) const;

 private:
  static constexpr std::uint64_t kGold = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t mix(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t seed_;
  std::uint64_t seed_key_;
  JumpKernel kernel_;
  Params params_;
  double sleep_prob_;
  std::vector<double> thresholds_;
};

struct ChiSquareReport {
  enum class Status { kPass, kFail, kSkipped };
  Status status = Status::kSkipped;
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  std::uint64_t samples = 0;
  /// Category counts: index 0 is sleep, then support order.
  std::vector<std::uint64_t> observed;
  std::vector<double> expected;
};

/// Pearson chi-square of the empirical sleep / jump-offset frequencies over
/// `sites` x [0, depth) against (sleep_prob, jump_prob * p(o)). Categories
/// with zero expected mass are dropped; fewer than two remaining categories
/// yields kSkipped. kPass iff p-value > alpha.
ChiSquareReport chi_square_marginals(const InstructionStream& stream,
                                     std::span<const Site> sites,
                                     std::uint64_t depth, double alpha = 1e-3);

}  // namespace arw
