#include "arw/params.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "arw/errors.hpp"

namespace arw {

Params::Params(Mode mode, double lambda, double sleep_prob)
    : mode_(mode), lambda_(lambda), sleep_prob_(sleep_prob), jump_prob_(1.0 - sleep_prob) {}

Params Params::with_rate(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("sleep rate must be positive and finite");
  }
  return Params(Mode::kFinite, lambda, lambda / (1.0 + lambda));
}

Params Params::never_sleep() { return Params(Mode::kNeverSleep, 0.0, 0.0); }

Params Params::always_sleep() {
  return Params(Mode::kAlwaysSleep, std::numeric_limits<double>::infinity(), 1.0);
}

std::string Params::label() const {
  switch (mode_) {
    case Mode::kNeverSleep:
      return "0";
    case Mode::kAlwaysSleep:
      return "inf";
    case Mode::kFinite:
      break;
  }
  std::ostringstream out;
  out.precision(17);
  out << lambda_;
  return out.str();
}

}  // namespace arw
