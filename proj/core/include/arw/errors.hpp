#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace arw {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A coordinate or index outside the addressable range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A computation would exceed a memory or size cap. `limit` carries the
/// largest parameter value that still fits (e.g. the largest step count).
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, std::int64_t limit)
      : Error(what), limit_(limit) {}
  std::int64_t limit() const noexcept { return limit_; }

 private:
  std::int64_t limit_;
};

/// Toppling a site that is stable for the requested mode.
class IllegalToppling : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// The model cannot reach a stable state (only possible through a bug or a
/// degenerate parameter choice such as certain sleep with stacked particles).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Monte Carlo estimator produced inconsistent results beyond noise, or too
/// many replicas hit their toppling budget.
class EstimatorUnstable : public Error {
 public:
  using Error::Error;
};

}  // namespace arw
