#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arw/configuration.hpp"
#include "arw/engine.hpp"
#include "arw/kernel.hpp"
#include "arw/params.hpp"
#include "arw/report.hpp"
#include "arw/volume.hpp"

namespace arw {

/// Law of the initial (all-active) configuration.
struct InitialLaw {
  enum class Kind { kBernoulli, kPoisson, kFilledBall, kLiteral };
  Kind kind = Kind::kBernoulli;
  double density = 0.0;  // Bernoulli / Poisson
  int radius = 0;        // filled ball
  std::optional<Configuration> literal;

  static InitialLaw bernoulli(double rho);
  static InitialLaw poisson(double rho);
  static InitialLaw filled_ball(int radius);
  static InitialLaw from_literal(Configuration config);

  /// Same kind with a different density (Bernoulli / Poisson only).
  InitialLaw with_density(double rho) const;
  std::string label() const;
};

/// Draws an initial configuration into a freshly reset engine. Uses
/// std::mt19937_64 seeded with `seed` and hand-rolled uniform / Poisson
/// transforms so draws are identical across standard libraries.
void sample_initial(const InitialLaw& law, Engine& engine, std::uint64_t seed);

struct CampaignOptions {
  unsigned workers = 0;
  std::uint64_t max_topplings = kDefaultBudget;
  /// Budget failures above this fraction raise EstimatorUnstable.
  double max_failure_rate = 1e-3;
  /// Policy used by Monte Carlo campaigns; by the abelian property the
  /// results do not depend on it.
  Scheduler scheduler{SchedulerPolicy::kLifo, 0};
};

/// Frequency of an occupied origin after legal stabilization, one point.
/// Replica i of cell `cell` uses derive_seed(seed, cell, i).
EstimateReport occupation_point(const JumpKernel& kernel, const Params& params,
                                const Volume& volume, const InitialLaw& law,
                                std::uint64_t replicas, std::uint64_t seed,
                                std::uint64_t cell = 0, const CampaignOptions& options = {});

/// occupation_point for each density of the grid (cell index = grid index).
/// Requires at least 100 replicas per point.
std::vector<EstimateReport> occupation_curve(const JumpKernel& kernel, const Params& params,
                                             const Volume& volume, const InitialLaw& law,
                                             std::span<const double> rho_grid,
                                             std::uint64_t replicas, std::uint64_t seed,
                                             const CampaignOptions& options = {});

struct CurvePoint {
  double rho = 0.0;
  double p = 0.0;
  double std_error = 0.0;
  std::uint64_t replicas = 0;
  bool retained = false;  // p >= rho - epsilon
};

struct RhoCEstimate {
  double lambda = 0.0;
  int n = 0;
  double rho_hat = 0.0;
  Interval bracket;
  double epsilon = 0.0;
  double tol = 0.0;
  std::uint64_t replicas_per_point = 0;
  std::uint64_t root_seed = 0;
  /// Probes in the order they were made.
  std::vector<CurvePoint> curve;
};

struct RhoCOptions {
  double epsilon = 0.02;
  double tol = 0.01;
  std::uint64_t replicas_per_point = 2000;
  /// When > 0, a probe stops early once |p - (rho - epsilon)| exceeds this
  /// many standard errors (checked after each batch of `batch` replicas,
  /// with at least `min_replicas`). 0 runs every probe to full length.
  double sequential_z = 0.0;
  std::uint64_t batch = 100;
  std::uint64_t min_replicas = 200;
  CampaignOptions campaign;
};

/// Bisection on rho in [0, 1] for the mass-retention criterion
/// p_n(rho) >= rho - epsilon, with p_n from Bernoulli(rho) on B_n. Throws
/// EstimatorUnstable when the probed mass deficits rho - p_n are
/// non-monotone beyond 4 combined standard errors.
RhoCEstimate estimate_rho_c(const JumpKernel& kernel, const Params& params, int n,
                            const RhoCOptions& options, std::uint64_t seed);

/// min(q, 1 - q) with q the single-particle lower bound: the scale on which
/// rho_c is resolved at small (rho_c ~ q) and large (1 - rho_c <= 1 - q) rates.
double rho_c_scale(const JumpKernel& kernel, const Params& params);

struct SweepSettings {
  /// Volume radius per rate.
  std::function<int(double lambda)> n = [](double) { return 100; };
  RhoCOptions base;
  /// When > 0, epsilon and tol become these multiples of rho_c_scale.
  double epsilon_rel = 0.0;
  double tol_rel = 0.0;
};

struct SweepRow {
  double lambda = 0.0;
  int n = 0;
  std::optional<RhoCEstimate> estimate;
  std::string error;
};

/// One estimate_rho_c per rate; cell k uses root seed derive_seed(seed, k, 0).
/// Failures are recorded per row and the sweep continues.
std::vector<SweepRow> lambda_sweep(const JumpKernel& kernel, std::span<const double> lambdas,
                                   const SweepSettings& settings, std::uint64_t seed);

/// CSV: lambda,rho_hat,lo,hi,n,replicas,epsilon,tol,rho_over_lambda,
/// rho_over_sqrt_lambda,gap_times_lambda,error (17 significant digits).
std::string sweep_to_csv(std::span<const SweepRow> rows);

struct MassCheckRow {
  int n = 0;
  double p = 0.0;
  double std_error = 0.0;
  double deviation = 0.0;  // |p - rho|
  std::uint64_t replicas = 0;
};

/// |p_n(rho) - rho| for each radius. Requires rho < sleep_prob (or rho < 1
/// in always-sleep mode), which guarantees subcriticality.
std::vector<MassCheckRow> mass_conservation_check(const JumpKernel& kernel, const Params& params,
                                                  double rho, std::span<const int> n_list,
                                                  std::uint64_t replicas, std::uint64_t seed,
                                                  const CampaignOptions& options = {});

std::string mass_check_to_csv(std::span<const MassCheckRow> rows, double rho);

nlohmann::json to_json(const RhoCEstimate& estimate);

/// "%.17g".
std::string format_double(double x);

}  // namespace arw
