#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace arw {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Monte Carlo point estimate with its uncertainty and seed provenance.
struct EstimateReport {
  double point = 0.0;
  double std_error = 0.0;
  /// Wilson interval for proportions, normal interval for means.
  Interval ci95;
  std::uint64_t replicas = 0;
  std::uint64_t root_seed = 0;
  /// Replicas excluded from the estimate (toppling budget exhausted).
  std::uint64_t failed = 0;
  /// Echo of the inputs: lambda, kernel id, volume, density, initial law.
  nlohmann::json params = nlohmann::json::object();
  /// Operation-specific extras, e.g. a horizon bias bound.
  std::map<std::string, double> diagnostics;
};

inline constexpr double kZ95 = 1.959963984540054;

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                         double z = kZ95);

EstimateReport proportion_report(std::uint64_t successes, std::uint64_t trials,
                                 std::uint64_t root_seed);
EstimateReport mean_report(double sum, double sum_sq, std::uint64_t n,
                           std::uint64_t root_seed);

nlohmann::json to_json(const EstimateReport& report);

/// Provenance attached to every per-replica output record.
nlohmann::json seed_provenance(std::uint64_t root_seed, std::uint64_t replica);

}  // namespace arw
