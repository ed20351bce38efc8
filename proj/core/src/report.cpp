#include "arw/report.hpp"

#include <algorithm>
#include <cmath>

namespace arw {

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // Rounding can push the bounds past p at the extremes.
  return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

EstimateReport proportion_report(std::uint64_t successes, std::uint64_t trials,
                                 std::uint64_t root_seed) {
  EstimateReport r;
  r.replicas = trials;
  r.root_seed = root_seed;
  if (trials > 0) {
    const double n = static_cast<double>(trials);
    r.point = static_cast<double>(successes) / n;
    r.std_error = std::sqrt(r.point * (1.0 - r.point) / n);
  }
  r.ci95 = wilson_interval(successes, trials);
  return r;
}

EstimateReport mean_report(double sum, double sum_sq, std::uint64_t n, std::uint64_t root_seed) {
  EstimateReport r;
  r.replicas = n;
  r.root_seed = root_seed;
  if (n == 0) return r;
  const double nn = static_cast<double>(n);
  r.point = sum / nn;
  if (n > 1) {
    const double var = std::max(0.0, (sum_sq - nn * r.point * r.point) / (nn - 1.0));
    r.std_error = std::sqrt(var / nn);
  }
  r.ci95 = {r.point - kZ95 * r.std_error, r.point + kZ95 * r.std_error};
  return r;
}

nlohmann::json to_json(const EstimateReport& report) {
  nlohmann::json j;
  j["point"] = report.point;
  j["stderr"] = report.std_error;
  j["ci95"] = {report.ci95.lo, report.ci95.hi};
  j["replicas"] = report.replicas;
  j["root_seed"] = report.root_seed;
  j["failed"] = report.failed;
  j["params"] = report.params;
  j["diagnostics"] = report.diagnostics;
  return j;
}

nlohmann::json seed_provenance(std::uint64_t root_seed, std::uint64_t replica) {
  return {{"root_seed", root_seed}, {"replica", replica}};
}

}  // namespace arw
