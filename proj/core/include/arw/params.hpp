#pragma once

#include <string>

namespace arw {

/// Sleep rate and the normalized rates derived from it.
///
/// Two degenerate modes are explicit rather than limits: `never_sleep()`
/// (rate 0, every instruction is a jump) and `always_sleep()` (infinite rate,
/// every instruction is a sleep).
class Params {
 public:
  enum class Mode { kFinite, kNeverSleep, kAlwaysSleep };

  /// Finite positive rate. Throws InvalidArgument otherwise.
  static Params with_rate(double lambda);
  static Params never_sleep();
  static Params always_sleep();

  Mode mode() const noexcept { return mode_; }
  /// Infinity in always-sleep mode, 0 in never-sleep mode.
  double lambda() const noexcept { return lambda_; }
  /// lambda / (1 + lambda).
  double sleep_prob() const noexcept { return sleep_prob_; }
  /// 1 - sleep_prob(), so the two sum to one exactly.
  double jump_prob() const noexcept { return jump_prob_; }

  bool sleep_certain() const noexcept { return mode_ == Mode::kAlwaysSleep; }
  bool sleep_disabled() const noexcept { return mode_ == Mode::kNeverSleep; }

  /// "1.5", "0" or "inf".
  std::string label() const;

 private:
  Params(Mode mode, double lambda, double sleep_prob);

  Mode mode_;
  double lambda_;
  double sleep_prob_;
  double jump_prob_;
};

}  // namespace arw
