#include "arw/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <sstream>

#include "arw/errors.hpp"
#include "arw/io.hpp"
#include "arw/parallel.hpp"
#include "arw/walk.hpp"

namespace arw {

InitialLaw InitialLaw::bernoulli(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidArgument("Bernoulli density must lie in [0, 1]");
  InitialLaw law;
  law.kind = Kind::kBernoulli;
  law.density = rho;
  return law;
}

InitialLaw InitialLaw::poisson(double rho) {
  if (!(rho >= 0.0) || rho > 700.0) throw InvalidArgument("Poisson density must lie in [0, 700]");
  InitialLaw law;
  law.kind = Kind::kPoisson;
  law.density = rho;
  return law;
}

InitialLaw InitialLaw::filled_ball(int radius) {
  if (radius < 0) throw InvalidArgument("filled-ball radius must be >= 0");
  InitialLaw law;
  law.kind = Kind::kFilledBall;
  law.radius = radius;
  return law;
}

InitialLaw InitialLaw::from_literal(Configuration config) {
  if (!config.all_active()) throw InvalidArgument("initial configurations must be all active");
  InitialLaw law;
  law.kind = Kind::kLiteral;
  law.literal = std::move(config);
  return law;
}

InitialLaw InitialLaw::with_density(double rho) const {
  switch (kind) {
    case Kind::kBernoulli:
      return bernoulli(rho);
    case Kind::kPoisson:
      return poisson(rho);
    default:
      throw InvalidArgument("only Bernoulli and Poisson laws have a density");
  }
}

std::string InitialLaw::label() const {
  switch (kind) {
    case Kind::kBernoulli:
      return "bernoulli(" + format_double(density) + ")";
    case Kind::kPoisson:
      return "poisson(" + format_double(density) + ")";
    case Kind::kFilledBall:
      return "filled_ball(" + std::to_string(radius) + ")";
    case Kind::kLiteral:
      return "literal";
  }
  return "?";
}

void sample_initial(const InitialLaw& law, Engine& engine, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto uniform = [&gen] { return to_unit(gen()); };
  switch (law.kind) {
    case InitialLaw::Kind::kBernoulli:
      for (std::size_t c : engine.cells()) {
        if (uniform() < law.density) engine.add_active(c, 1);
      }
      break;
    case InitialLaw::Kind::kPoisson: {
      const double p0 = std::exp(-law.density);
      for (std::size_t c : engine.cells()) {
        // Inversion by sequential search.
        const double u = uniform();
        double p = p0, cdf = p0;
        std::int32_t k = 0;
        while (u >= cdf && k < 100000) {
          ++k;
          p *= law.density / k;
          cdf += p;
        }
        engine.add_active(c, k);
      }
      break;
    }
    case InitialLaw::Kind::kFilledBall:
      for (std::size_t c : engine.cells()) {
        if (engine.cell_norm(c) <= law.radius) engine.add_active(c, 1);
      }
      break;
    case InitialLaw::Kind::kLiteral:
      engine.load(*law.literal);
      break;
  }
}

namespace {

struct PointCounts {
  std::uint64_t occupied = 0;
  std::uint64_t trials = 0;
  std::uint64_t failed = 0;
};

// Seeds of replica i: the stream uses derive_seed(seed, cell, i); the initial
// configuration a second, decorrelated value.
constexpr std::uint64_t kInitialSalt = 0x5851f42d4c957f2dULL;

class PointRunner {
 public:
  PointRunner(const JumpKernel& kernel, const Params& params, const Volume& volume,
              const InitialLaw& law, std::uint64_t seed, std::uint64_t cell,
              const CampaignOptions& options)
      : kernel_(kernel), params_(params), volume_(volume), law_(law), seed_(seed), cell_(cell),
        options_(options), workers_(resolve_workers(options.workers)), engines_(workers_) {
    if (law.kind == InitialLaw::Kind::kLiteral && !(law.literal->volume() == volume)) {
      throw InvalidArgument("literal initial configuration is on another volume");
    }
    if (!volume.bounded()) throw InvalidArgument("occupation estimates need a bounded volume");
    if (!volume.contains(Site(static_cast<std::size_t>(volume.dim()), 0))) {
      throw InvalidArgument("volume must contain the origin");
    }
  }

  // Runs replicas [begin, end) and adds them to `counts`.
  void run(std::uint64_t begin, std::uint64_t end, PointCounts& counts) {
    std::vector<std::uint8_t> occupied(end - begin, 0), failed(end - begin, 0);
    const Mode legal = Mode::legal();
    parallel_for(begin, end, workers_, [&](std::size_t i, unsigned w) {
      auto& engine = engines_[w];
      const std::uint64_t s = derive_seed(seed_, cell_, i);
      if (!engine) engine = std::make_unique<Engine>(volume_, InstructionStream(s, kernel_, params_));
      engine->reset(s);
      sample_initial(law_, *engine, mix64(s ^ kInitialSalt));
      try {
        engine->stabilize(legal, options_.scheduler, options_.max_topplings);
        occupied[i - begin] = engine->origin_state() != 0 ? 1 : 0;
      } catch (const BudgetExhausted&) {
        failed[i - begin] = 1;
      }
    });
    for (std::size_t k = 0; k < occupied.size(); ++k) {
      if (failed[k]) {
        ++counts.failed;
      } else {
        ++counts.trials;
        counts.occupied += occupied[k];
      }
    }
  }

  EstimateReport report(const PointCounts& counts) const {
    const std::uint64_t total = counts.trials + counts.failed;
    if (total > 0 && static_cast<double>(counts.failed) > options_.max_failure_rate * static_cast<double>(total)) {
      throw EstimatorUnstable(std::to_string(counts.failed) + " of " + std::to_string(total) +
                              " replicas exhausted the toppling budget");
    }
    EstimateReport r = proportion_report(counts.occupied, counts.trials, seed_);
    r.failed = counts.failed;
    r.params = {{"lambda", params_.label()},
                {"kernel", kernel_.name()},
                {"volume", volume_to_json(volume_)},
                {"initial_law", law_.label()},
                {"cell", cell_}};
    if (law_.kind == InitialLaw::Kind::kBernoulli || law_.kind == InitialLaw::Kind::kPoisson) {
      r.params["density"] = law_.density;
    }
    return r;
  }

 private:
  const JumpKernel& kernel_;
  const Params& params_;
  const Volume& volume_;
  const InitialLaw& law_;
  std::uint64_t seed_;
  std::uint64_t cell_;
  CampaignOptions options_;
  unsigned workers_;
  std::vector<std::unique_ptr<Engine>> engines_;
};

}  // namespace

EstimateReport occupation_point(const JumpKernel& kernel, const Params& params, const Volume& volume,
                                const InitialLaw& law, std::uint64_t replicas, std::uint64_t seed,
                                std::uint64_t cell, const CampaignOptions& options) {
  if (replicas == 0) throw InvalidArgument("replicas must be >= 1");
  PointRunner runner(kernel, params, volume, law, seed, cell, options);
  PointCounts counts;
  runner.run(0, replicas, counts);
  return runner.report(counts);
}

std::vector<EstimateReport> occupation_curve(const JumpKernel& kernel, const Params& params,
                                             const Volume& volume, const InitialLaw& law,
                                             std::span<const double> rho_grid, std::uint64_t replicas,
                                             std::uint64_t seed, const CampaignOptions& options) {
  if (rho_grid.empty()) throw InvalidArgument("density grid is empty");
  if (replicas < 100) throw InvalidArgument("occupation curves need at least 100 replicas per point");
  std::vector<EstimateReport> out;
  for (std::size_t k = 0; k < rho_grid.size(); ++k) {
    const InitialLaw point_law = law.with_density(rho_grid[k]);
    out.push_back(occupation_point(kernel, params, volume, point_law, replicas, seed, k, options));
  }
  return out;
}

RhoCEstimate estimate_rho_c(const JumpKernel& kernel, const Params& params, int n,
                            const RhoCOptions& options, std::uint64_t seed) {
  if (!(options.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (!(options.tol > 0.0)) throw InvalidArgument("tol must be positive");
  if (n < 0) throw InvalidArgument("volume radius must be >= 0");
  if (options.replicas_per_point == 0) throw InvalidArgument("replicas_per_point must be >= 1");
  const Volume volume = Volume::ball(kernel.dim(), n);
  RhoCEstimate est;
  est.lambda = params.lambda();
  est.n = n;
  est.epsilon = options.epsilon;
  est.tol = options.tol;
  est.replicas_per_point = options.replicas_per_point;
  est.root_seed = seed;

  std::uint64_t probe = 0;
  auto evaluate = [&](double rho) {
    const InitialLaw law = InitialLaw::bernoulli(rho);
    PointRunner runner(kernel, params, volume, law, seed, probe++, options.campaign);
    PointCounts counts;
    const double target = rho - options.epsilon;
    if (options.sequential_z > 0.0) {
      const std::uint64_t batch = std::max<std::uint64_t>(1, options.batch);
      std::uint64_t done = 0;
      while (done < options.replicas_per_point) {
        const std::uint64_t next = std::min(options.replicas_per_point, done + batch);
        runner.run(done, next, counts);
        done = next;
        if (done < options.min_replicas || counts.trials == 0) continue;
        const double p = static_cast<double>(counts.occupied) / static_cast<double>(counts.trials);
        // Floor the standard error at one success in the sample, so that
        // p = 0 or 1 does not stop a probe on a degenerate estimate.
        const double pf = std::clamp(p, 1.0 / counts.trials, 1.0 - 1.0 / counts.trials);
        const double se = std::sqrt(pf * (1.0 - pf) / static_cast<double>(counts.trials));
        if (std::abs(p - target) > options.sequential_z * se) break;
      }
    } else {
      runner.run(0, options.replicas_per_point, counts);
    }
    const EstimateReport r = runner.report(counts);
    CurvePoint pt{rho, r.point, r.std_error, r.replicas, r.point >= target};
    est.curve.push_back(pt);
    return pt.retained;
  };

  double lo = 0.0, hi = 1.0;
  while (hi - lo > options.tol) {
    const double mid = 0.5 * (lo + hi);
    if (evaluate(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  est.bracket = {lo, hi};
  est.rho_hat = 0.5 * (lo + hi);

  // Mass deficits rho - p should not decrease with rho beyond noise.
  auto sorted = est.curve;
  std::sort(sorted.begin(), sorted.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.rho < b.rho; });
  for (std::size_t a = 0; a < sorted.size(); ++a) {
    for (std::size_t b = a + 1; b < sorted.size(); ++b) {
      const double da = sorted[a].rho - sorted[a].p;
      const double db = sorted[b].rho - sorted[b].p;
      const double se = std::hypot(sorted[a].std_error, sorted[b].std_error);
      if (da - db > 4.0 * se + 1e-12) {
        std::ostringstream msg;
        msg << "mass deficit not monotone in the density: deficit " << format_double(da) << " at rho "
            << format_double(sorted[a].rho) << " exceeds " << format_double(db) << " at rho "
            << format_double(sorted[b].rho) << " by more than 4 standard errors";
        throw EstimatorUnstable(msg.str());
      }
    }
  }
  return est;
}

double rho_c_scale(const JumpKernel& kernel, const Params& params) {
  const double q = single_particle_q(kernel, params, default_q_truncation(kernel, params)).value;
  return std::min(q, 1.0 - q);
}

std::vector<SweepRow> lambda_sweep(const JumpKernel& kernel, std::span<const double> lambdas,
                                   const SweepSettings& settings, std::uint64_t seed) {
  if (lambdas.empty()) throw InvalidArgument("rate grid is empty");
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    SweepRow row;
    row.lambda = lambdas[k];
    try {
      const Params params = Params::with_rate(lambdas[k]);
      row.n = settings.n(lambdas[k]);
      RhoCOptions options = settings.base;
      if (settings.epsilon_rel > 0.0 || settings.tol_rel > 0.0) {
        const double scale = rho_c_scale(kernel, params);
        if (settings.epsilon_rel > 0.0) options.epsilon = settings.epsilon_rel * scale;
        if (settings.tol_rel > 0.0) options.tol = settings.tol_rel * scale;
      }
      row.estimate = estimate_rho_c(kernel, params, row.n, options, derive_seed(seed, k, 0));
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "lambda,rho_hat,lo,hi,n,replicas,epsilon,tol,rho_over_lambda,rho_over_sqrt_lambda,"
         "gap_times_lambda,error\n";
  for (const auto& row : rows) {
    out << format_double(row.lambda) << ',';
    if (row.estimate) {
      const auto& e = *row.estimate;
      out << format_double(e.rho_hat) << ',' << format_double(e.bracket.lo) << ','
          << format_double(e.bracket.hi) << ',' << e.n << ',' << e.replicas_per_point << ','
          << format_double(e.epsilon) << ',' << format_double(e.tol) << ','
          << format_double(e.rho_hat / row.lambda) << ',' << format_double(e.rho_hat / std::sqrt(row.lambda))
          << ',' << format_double((1.0 - e.rho_hat) * row.lambda) << ",\n";
    } else {
      out << ",,," << row.n << ",,,,,,," << csv_field(row.error) << '\n';
    }
  }
  return out.str();
}

std::vector<MassCheckRow> mass_conservation_check(const JumpKernel& kernel, const Params& params, double rho,
                                                  std::span<const int> n_list, std::uint64_t replicas,
                                                  std::uint64_t seed, const CampaignOptions& options) {
  if (n_list.empty()) throw InvalidArgument("radius list is empty");
  const double bound = params.sleep_certain() ? 1.0 : params.sleep_prob();
  if (!(rho >= 0.0 && rho < bound)) {
    throw InvalidArgument("density must lie below the sleep probability " + format_double(bound) +
                          " so that the system is subcritical");
  }
  std::vector<MassCheckRow> rows;
  const InitialLaw law = InitialLaw::bernoulli(rho);
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (n_list[k] < 0) throw InvalidArgument("radii must be >= 0");
    const auto r = occupation_point(kernel, params, Volume::ball(kernel.dim(), n_list[k]), law, replicas,
                                    seed, k, options);
    rows.push_back({n_list[k], r.point, r.std_error, std::abs(r.point - rho), r.replicas});
  }
  return rows;
}

std::string mass_check_to_csv(std::span<const MassCheckRow> rows, double rho) {
  std::ostringstream out;
  out << "n,rho,p,stderr,deviation,replicas\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(rho) << ',' << format_double(r.p) << ',' << format_double(r.std_error)
        << ',' << format_double(r.deviation) << ',' << r.replicas << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const RhoCEstimate& e) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : e.curve) {
    curve.push_back({{"rho", p.rho}, {"p", p.p}, {"stderr", p.std_error}, {"replicas", p.replicas},
                     {"retained", p.retained}});
  }
  return {{"lambda", e.lambda},   {"n", e.n},
          {"rho_hat", e.rho_hat}, {"bracket", {e.bracket.lo, e.bracket.hi}},
          {"epsilon", e.epsilon}, {"tol", e.tol},
          {"replicas_per_point", e.replicas_per_point},
          {"root_seed", e.root_seed}, {"curve", curve}};
}

}  // namespace arw
