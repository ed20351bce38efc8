#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include "arw/configuration.hpp"
#include "arw/engine.hpp"
#include "arw/errors.hpp"
#include "arw/estimators.hpp"
#include "arw/io.hpp"
#include "arw/kernel.hpp"
#include "arw/oracle.hpp"
#include "arw/parallel.hpp"
#include "arw/params.hpp"
#include "arw/procedures.hpp"
#include "arw/randomness.hpp"
#include "arw/report.hpp"
#include "arw/version.hpp"
#include "arw/volume.hpp"
#include "arw/walk.hpp"

namespace arw::cli {

namespace {

using nlohmann::json;

constexpr std::uint64_t kInitialCell = 1;  // cell for initial-configuration draws

// Output sinks

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw ValidationError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

json header(const std::string& command, const json& cfg) {
  json embedded = json::object();
  for (const auto& [k, v] : cfg.items()) {
    if (!is_destination_key(k)) embedded[k] = v;
  }
  return {{"arw_version", kVersion},
          {"command", command},
          {"seed", cfg.at("seed")},
          {"config", embedded}};
}

void write_csv_header(std::ostream& os, const json& head) {
  os << "# arw " << head.at("arw_version").get<std::string>() << '\n'
     << "# command " << head.at("command").get<std::string>() << '\n'
     << "# seed " << head.at("seed").dump() << '\n'
     << "# config " << head.at("config").dump() << '\n';
}

void write_json_document(const std::string& command, const json& cfg, const json& result) {
  Sink sink(get_string(cfg, "out"));
  json doc = header(command, cfg);
  doc["result"] = result;
  sink.os() << doc.dump(2) << '\n';
}

void write_csv_document(const std::string& command, const json& cfg, const std::string& table) {
  Sink sink(get_string(cfg, "out"));
  write_csv_header(sink.os(), header(command, cfg));
  sink.os() << table;
}

bool csv_format(const json& cfg) {
  const auto f = get_string(cfg, "format");
  if (f == "csv") return true;
  if (f == "json") return false;
  throw ValidationError("--format must be json or csv, got '" + f + "'");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

// Parameter builders

Params make_params(const json& cfg) {
  const double lambda = get_double(cfg, "lambda");
  if (std::isinf(lambda)) return Params::always_sleep();
  if (lambda == 0.0) return Params::never_sleep();
  return Params::with_rate(lambda);
}

JumpKernel make_kernel(const json& cfg) {
  const auto dim = static_cast<int>(get_int(cfg, "dim"));
  const auto spec = get_string(cfg, "kernel");
  if (dim < 1) throw ValidationError("--dim must be at least 1");
  if (spec == "ssrw") return make_ssrw_kernel(dim);
  auto kernel = load_kernel_file(spec);
  if (kernel.dim() != dim) {
    throw ValidationError("kernel file '" + spec + "' has dimension " + std::to_string(kernel.dim()) +
                          " but --dim is " + std::to_string(dim));
  }
  return kernel;
}

Volume make_volume(const json& cfg, const std::string& key = "radius") {
  const auto r = get_int(cfg, key);
  if (r < 0) throw ValidationError("--" + key + " must be nonnegative");
  return Volume::ball(static_cast<int>(get_int(cfg, "dim")), static_cast<int>(r));
}

Configuration read_configuration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open configuration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return configuration_from_json(ss.str());
}

InitialLaw make_law(const json& cfg) {
  const auto law = get_string(cfg, "law");
  if (law == "bernoulli") return InitialLaw::bernoulli(get_double(cfg, "density"));
  if (law == "poisson") return InitialLaw::poisson(get_double(cfg, "density"));
  if (law == "filled") return InitialLaw::filled_ball(static_cast<int>(get_int(cfg, "fill_radius")));
  if (law == "file") {
    const auto path = get_string(cfg, "initial");
    if (path.empty()) throw ValidationError("--law file requires --initial PATH");
    return InitialLaw::from_literal(read_configuration(path));
  }
  throw ValidationError("--law must be bernoulli, poisson, filled or file, got '" + law + "'");
}

Mode make_mode(const json& cfg) {
  const auto m = get_string(cfg, "mode");
  const int dim = static_cast<int>(get_int(cfg, "dim"));
  if (m == "legal") return Mode::legal();
  if (m == "weak") return Mode::weak_origin(dim);
  if (m == "strong") return Mode::strong_origin(dim);
  throw ValidationError("--mode must be legal, weak or strong, got '" + m + "'");
}

Scheduler make_scheduler(const json& cfg) {
  try {
    return {scheduler_from_string(get_string(cfg, "scheduler")), get_uint(cfg, "seed")};
  } catch (const InvalidArgument& e) {
    throw ValidationError(std::string("--scheduler: ") + e.what());
  }
}

unsigned workers(const json& cfg) { return resolve_workers(static_cast<unsigned>(get_uint(cfg, "workers"))); }

CampaignOptions campaign(const json& cfg) {
  CampaignOptions o;
  o.workers = workers(cfg);
  o.max_topplings = get_uint(cfg, "budget");
  return o;
}

std::vector<ParamSpec> kernel_specs(int dim) {
  return {{"dim", dim, "lattice dimension"},
          {"kernel", "ssrw", "ssrw or a kernel JSON file"}};
}

std::vector<ParamSpec> law_specs(const std::string& law) {
  return {{"law", law, "initial law: bernoulli, poisson, filled or file"},
          {"density", 0.5, "density for bernoulli and poisson"},
          {"fill_radius", 0, "radius of the filled ball for --law filled"},
          {"initial", "", "configuration literal file for --law file"}};
}

std::vector<ParamSpec> concat(std::vector<std::vector<ParamSpec>> parts) {
  std::vector<ParamSpec> out;
  for (auto& p : parts) {
    for (auto& s : p) out.push_back(std::move(s));
  }
  return out;
}

const ParamSpec kBudget{"budget", static_cast<std::int64_t>(kDefaultBudget), "toppling budget per replica"};

// Replica seeds: replica i of a per-replica command uses derive_seed(seed, 0, i)
// for its instruction stacks and derive_seed(seed, 1, i) for its initial draw.
std::uint64_t stream_seed(const json& cfg, std::uint64_t i) { return derive_seed(get_uint(cfg, "seed"), 0, i); }
std::uint64_t initial_seed(const json& cfg, std::uint64_t i) {
  return derive_seed(get_uint(cfg, "seed"), kInitialCell, i);
}

// stabilize

int run_stabilize(const json& cfg) {
  const auto kernel = make_kernel(cfg);
  const auto params = make_params(cfg);
  const auto volume = make_volume(cfg);
  const auto law = make_law(cfg);
  const auto mode = make_mode(cfg);
  const auto scheduler = make_scheduler(cfg);
  const auto replicas = get_uint(cfg, "replicas");
  const auto budget = get_uint(cfg, "budget");
  const bool csv = csv_format(cfg);

  Sink sink(get_string(cfg, "out"));
  auto& os = sink.os();
  const json head = header("stabilize", cfg);
  if (csv) {
    write_csv_header(os, head);
    os << "replica,stream_seed,topplings,killed,final_mass,origin_state\n";
  } else {
    os << json{{"header", head}}.dump() << '\n';
  }
  Engine engine(volume, InstructionStream(stream_seed(cfg, 0), kernel, params));
  std::uint64_t occupied = 0;
  double topplings = 0;
  for (std::uint64_t i = 0; i < replicas; ++i) {
    engine.reset(stream_seed(cfg, i));
    sample_initial(law, engine, initial_seed(cfg, i));
    engine.stabilize(mode, scheduler, budget);
    occupied += engine.origin_state() != 0;
    topplings += static_cast<double>(engine.topplings());
    if (csv) {
      os << i << ',' << stream_seed(cfg, i) << ',' << engine.topplings() << ',' << engine.killed() << ','
         << engine.mass() << ',' << engine.origin_state() << '\n';
    } else {
      json line = {{"replica", i}, {"provenance", seed_provenance(get_uint(cfg, "seed"), i)},
                   {"stream_seed", stream_seed(cfg, i)}, {"record", record_to_json(engine.record(mode))}};
      os << line.dump() << '\n';
    }
  }
  if (!csv) {
    const double n = static_cast<double>(replicas);
    os << json{{"summary",
                {{"replicas", replicas},
                 {"origin_occupied", replicas ? static_cast<double>(occupied) / n : 0.0},
                 {"mean_topplings", replicas ? topplings / n : 0.0}}}}
              .dump()
       << '\n';
  }
  return 0;
}

// chances

int run_chances(const json& cfg) {
  const auto kernel = make_kernel(cfg);
  const auto params = make_params(cfg);
  const auto volume = make_volume(cfg);
  const auto law = make_law(cfg);
  const auto replicas = get_uint(cfg, "replicas");
  const auto budget = get_uint(cfg, "budget");
  StrongViaWeakOptions options;
  options.tracked_radius = static_cast<int>(get_int(cfg, "tracked_radius"));
  const bool csv = csv_format(cfg);

  Sink sink(get_string(cfg, "out"));
  auto& os = sink.os();
  const json head = header("chances", cfg);
  if (csv) {
    write_csv_header(os, head);
    os << "replica,stream_seed,chances,sleep_trials\n";
  } else {
    os << json{{"header", head}}.dump() << '\n';
  }
  Engine engine(volume, InstructionStream(stream_seed(cfg, 0), kernel, params));
  std::vector<std::uint64_t> samples;
  samples.reserve(replicas);
  double sum = 0, sum_sq = 0;
  for (std::uint64_t i = 0; i < replicas; ++i) {
    engine.reset(stream_seed(cfg, i));
    sample_initial(law, engine, initial_seed(cfg, i));
    const auto out = engine.strong_via_weak(budget, options);
    samples.push_back(out.chances);
    const double ch = static_cast<double>(out.chances);
    sum += ch;
    sum_sq += ch * ch;
    std::string trials;
    for (auto b : out.sleep_trials) trials += b ? '1' : '0';
    if (csv) {
      os << i << ',' << stream_seed(cfg, i) << ',' << out.chances << ',' << trials << '\n';
    } else {
      json line = {{"replica", i}, {"provenance", seed_provenance(get_uint(cfg, "seed"), i)},
                   {"stream_seed", stream_seed(cfg, i)}, {"chances", out.chances}, {"sleep_trials", trials}};
      if (options.tracked_radius >= 0) {
        json snaps = json::array();
        for (const auto& s : out.snapshots) {
          json holes = json::array();
          for (const auto& h : s.holes) holes.push_back(format_site(h));
          snaps.push_back({{"origin", s.origin_state}, {"holes", holes}});
        }
        line["snapshots"] = snaps;
      }
      os << line.dump() << '\n';
    }
  }
  if (!csv && replicas > 0) {
    const auto mean = mean_report(sum, sum_sq, replicas, get_uint(cfg, "seed"));
    os << json{{"summary",
                {{"replicas", replicas},
                 {"mean_chances", to_json(mean)},
                 {"occupation_pgf", occupation_probability_pgf(samples, params)}}}}
              .dump()
       << '\n';
  }
  return 0;
}

// carpet

void write_summary_csv(const json& cfg, const std::string& command, const std::string& table) {
  const auto path = get_string(cfg, "summary");
  if (path.empty()) return;
  Sink sink(path);
  write_csv_header(sink.os(), header(command, cfg));
  sink.os() << table;
}

int run_carpet(const json& cfg) {
  const auto kernel = make_kernel(cfg);
  const auto params = make_params(cfg);
  const int r = static_cast<int>(get_int(cfg, "r"));
  if (r < 0) throw ValidationError("--r must be nonnegative");
  const auto radius = get_int(cfg, "radius");
  const auto volume = Volume::ball(kernel.dim(), radius < 0 ? r + 5 : static_cast<int>(radius));
  const auto replicas = get_uint(cfg, "replicas");
  const auto max_iters = get_uint(cfg, "max_iters");
  const auto budget = get_uint(cfg, "budget");
  const bool csv = csv_format(cfg);

  std::ostringstream table;
  table << "r,lambda,ch_prime,end_reason\n";
  Sink sink(get_string(cfg, "out"));
  auto& os = sink.os();
  const json head = header("carpet", cfg);
  if (csv) {
    write_csv_header(os, head);
  } else {
    os << json{{"header", head}}.dump() << '\n';
  }
  double sum = 0, sum_sq = 0;
  for (std::uint64_t i = 0; i < replicas; ++i) {
    const InstructionStream stream(stream_seed(cfg, i), kernel, params);
    const auto rec = carpet_procedure(stream, volume, r, max_iters, nullptr, budget);
    const double c = static_cast<double>(rec.ch_prime);
    sum += c;
    sum_sq += c * c;
    table << r << ',' << params.label() << ',' << rec.ch_prime << ',' << to_string(rec.end_reason) << '\n';
    if (!csv) {
      std::string step1, ret;
      for (auto b : rec.step1_success) step1 += b ? '1' : '0';
      for (auto b : rec.return_success) ret += b ? '1' : '0';
      json line = {{"replica", i},
                   {"provenance", seed_provenance(get_uint(cfg, "seed"), i)},
                   {"stream_seed", stream_seed(cfg, i)},
                   {"r", r},
                   {"lambda", params.label()},
                   {"ch_prime", rec.ch_prime},
                   {"end_reason", to_string(rec.end_reason)},
                   {"step1_success", step1},
                   {"return_success", ret}};
      os << line.dump() << '\n';
    }
  }
  if (csv) {
    os << table.str();
  } else if (replicas > 0) {
    os << json{{"summary",
                {{"replicas", replicas}, {"mean_ch_prime", to_json(mean_report(sum, sum_sq, replicas, get_uint(cfg, "seed")))}}}}
              .dump()
       << '\n';
  }
  write_summary_csv(cfg, "carpet", table.str());
  return 0;
}

// holes

int run_holes(const json& cfg) {
  const auto kernel = make_kernel(cfg);
  const auto params = make_params(cfg);
  const int tracked = static_cast<int>(get_int(cfg, "tracked_radius"));
  if (tracked < 0) throw ValidationError("--tracked-radius must be nonnegative");
  const auto radius = get_int(cfg, "radius");
  const auto volume = Volume::ball(kernel.dim(), radius < 0 ? tracked : static_cast<int>(radius));
  const auto replicas = get_uint(cfg, "replicas");
  const auto max_j = get_uint(cfg, "max_j");
  const auto budget = get_uint(cfg, "budget");
  const bool csv = csv_format(cfg);

  Sink sink(get_string(cfg, "out"));
  auto& os = sink.os();
  const json head = header("holes", cfg);
  if (!csv) os << json{{"header", head}}.dump() << '\n';
  std::vector<Site> sites;
  std::vector<std::vector<double>> counts;  // [j-1][site]
  std::vector<std::uint64_t> present;       // replicas reaching j
  for (std::uint64_t i = 0; i < replicas; ++i) {
    const InstructionStream stream(stream_seed(cfg, i), kernel, params);
    const auto stats = hole_statistics(stream, volume, tracked, max_j, budget);
    json snaps = json::array();
    for (const auto& s : stats) {
      const auto j = static_cast<std::size_t>(s.j);
      if (sites.empty()) sites = s.sites;
      if (counts.size() < j) {
        counts.resize(j, std::vector<double>(s.sites.size(), 0.0));
        present.resize(j, 0);
      }
      ++present[j - 1];
      json holes = json::array();
      for (std::size_t k = 0; k < s.holes.size(); ++k) {
        counts[j - 1][k] += s.holes[k];
        if (s.holes[k]) holes.push_back(format_site(s.sites[k]));
      }
      snaps.push_back({{"j", s.j}, {"holes", holes}, {"carpet_radius", s.carpet_radius}});
    }
    if (!csv) {
      json line = {{"replica", i},
                   {"provenance", seed_provenance(get_uint(cfg, "seed"), i)},
                   {"stream_seed", stream_seed(cfg, i)},
                   {"snapshots", snaps}};
      os << line.dump() << '\n';
    }
  }
  std::ostringstream table;
  table << "j,x,hole_rate,replicas\n";
  for (std::size_t j = 0; j < counts.size(); ++j) {
    for (std::size_t k = 0; k < sites.size(); ++k) {
      table << j + 1 << ',' << csv_field(format_site(sites[k])) << ','
            << format_double(counts[j][k] / static_cast<double>(present[j])) << ',' << present[j] << '\n';
    }
  }
  if (csv) {
    write_csv_header(os, head);
    os << table.str();
  } else {
    os << json{{"summary", {{"replicas", replicas}, {"replicas_per_j", present}}}}.dump() << '\n';
  }
  write_summary_csv(cfg, "holes", table.str());
  return 0;
}

// oracle

std::string rational_text(const std::optional<Rational>& r) {
  if (!r) return "";
  return r->str();
}

int run_oracle(const json& cfg) {
  const auto path = get_string(cfg, "initial");
  if (path.empty()) throw ValidationError("oracle requires --initial PATH (configuration literal)");
  const auto config = read_configuration(path);
  json kcfg = cfg;
  kcfg["dim"] = config.volume().dim();
  const auto kernel = make_kernel(kcfg);
  const auto params = make_params(cfg);
  const auto mode = make_mode(kcfg);
  oracle::Options options;
  options.limits.max_sites = get_uint(cfg, "max_sites");
  options.limits.max_mass = get_uint(cfg, "max_mass");
  options.limits.max_states = get_uint(cfg, "max_states");
  const auto order = get_string(cfg, "order");
  if (order == "lex-first") {
    options.order = oracle::ToppleOrder::kLexFirst;
  } else if (order == "lex-last") {
    options.order = oracle::ToppleOrder::kLexLast;
  } else {
    throw ValidationError("--order must be lex-first or lex-last");
  }
  const auto arith = get_string(cfg, "arithmetic");
  if (arith == "auto") {
    options.arithmetic = oracle::Arithmetic::kAuto;
  } else if (arith == "rational") {
    options.arithmetic = oracle::Arithmetic::kRational;
  } else if (arith == "floating") {
    options.arithmetic = oracle::Arithmetic::kFloating;
  } else {
    throw ValidationError("--arithmetic must be auto, rational or floating");
  }

  const auto dist = oracle::exact_stab_distribution(config, params, kernel, mode, options);
  json outcomes = json::array();
  std::ostringstream table;
  table << "rank,probability,exact,configuration\n";
  std::size_t rank = 0;
  for (const auto& o : dist.outcomes) {
    outcomes.push_back({{"configuration", configuration_json(o.config)},
                        {"probability", o.probability},
                        {"exact", rational_text(o.exact)}});
    table << rank++ << ',' << format_double(o.probability) << ',' << rational_text(o.exact) << ','
          << csv_field(configuration_json(o.config).dump()) << '\n';
  }
  json quantities = json::object();
  auto add = [&](const char* name, oracle::Quantity q, double s) {
    const auto v = oracle::exact_quantity(config, params, kernel, q, s, options);
    quantities[name] = {{"value", v.value}, {"exact", rational_text(v.exact)}};
  };
  if (mode.kind == Mode::Kind::kLegal) {
    add("origin_occupied", oracle::Quantity::kOriginOccupied, 0.0);
    add("mass_retained", oracle::Quantity::kMassRetained, 0.0);
    if (config.all_active() && config.volume().contains(Site(static_cast<std::size_t>(config.volume().dim()), 0))) {
      add("mean_ch", oracle::Quantity::kMeanCh, 0.0);
      add("ch_pgf_at_jump_prob", oracle::Quantity::kChPgf, params.jump_prob());
    }
  }
  if (csv_format(cfg)) {
    write_csv_document("oracle", cfg, table.str());
  } else {
    write_json_document("oracle", cfg,
                        {{"initial", configuration_json(config)},
                         {"outcomes", outcomes},
                         {"quantities", quantities},
                         {"transient_states", dist.transient_states},
                         {"rational", dist.rational},
                         {"residual", dist.residual}});
  }
  return 0;
}

// green / q

int run_green(const json& cfg) {
  const auto kernel = make_kernel(cfg);
  GreenOptions options;
  options.mc_tail_samples = get_uint(cfg, "mc_tail_samples");
  options.horizon = get_uint(cfg, "horizon");
  options.workers = workers(cfg);
  const auto g = green_function(kernel, static_cast<int>(get_int(cfg, "truncation_n")), get_uint(cfg, "seed"), options);
  const json result = {{"divergent", g.divergent},       {"green_estimate", g.green_estimate},
                       {"escape_prob", g.escape_prob},   {"truncation_n", g.truncation_n},
                       {"partial_sum", g.partial_sum},   {"tail_estimate", g.tail_estimate},
                       {"tail_std_error", g.tail_std_error}, {"horizon_bound", g.horizon_bound},
                       {"decay_exponent", g.decay_exponent}, {"error_bound", g.error_bound}};
  if (csv_format(cfg)) {
    std::ostringstream t;
    t << "divergent,green_estimate,escape_prob,truncation_n,partial_sum,tail_estimate,tail_std_error,"
         "horizon_bound,decay_exponent,error_bound\n"
      << (g.divergent ? "true" : "false") << ',' << format_double(g.green_estimate) << ','
      << format_double(g.escape_prob) << ',' << g.truncation_n << ',' << format_double(g.partial_sum) << ','
      << format_double(g.tail_estimate) << ',' << format_double(g.tail_std_error) << ','
      << format_double(g.horizon_bound) << ',' << format_double(g.decay_exponent) << ','
      << format_double(g.error_bound) << '\n';
    write_csv_document("green", cfg, t.str());
  } else {
    write_json_document("green", cfg, result);
  }
  return 0;
}

int run_q(const json& cfg) {
  const auto kernel = make_kernel(cfg);
  const auto params = make_params(cfg);
  auto n = get_int(cfg, "truncation_n");
  if (n < 0) n = default_q_truncation(kernel, params);
  const auto q = single_particle_q(kernel, params, static_cast<int>(n));
  if (csv_format(cfg)) {
    std::ostringstream t;
    t << "lambda,q,truncation_bound,truncation_n\n"
      << params.label() << ',' << format_double(q.value) << ',' << format_double(q.truncation_bound) << ','
      << q.truncation_n << '\n';
    write_csv_document("q", cfg, t.str());
  } else {
    write_json_document("q", cfg,
                        {{"lambda", params.label()},
                         {"q", q.value},
                         {"truncation_bound", q.truncation_bound},
                         {"truncation_n", q.truncation_n}});
  }
  return 0;
}

// curve / rhoc / sweep / masscheck

int run_curve(const json& cfg) {
  const auto kernel = make_kernel(cfg);
  const auto params = make_params(cfg);
  const auto volume = make_volume(cfg, "n");
  const auto law = make_law(cfg);
  const auto grid = get_doubles(cfg, "rho_grid");
  auto options = campaign(cfg);
  options.max_failure_rate = get_double(cfg, "max_failure_rate");
  const auto reports =
      occupation_curve(kernel, params, volume, law, grid, get_uint(cfg, "replicas"), get_uint(cfg, "seed"), options);
  if (csv_format(cfg)) {
    std::ostringstream t;
    t << "rho,p,std_error,ci_lo,ci_hi,replicas,failed\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto& r = reports[k];
      t << format_double(grid[k]) << ',' << format_double(r.point) << ',' << format_double(r.std_error) << ','
        << format_double(r.ci95.lo) << ',' << format_double(r.ci95.hi) << ',' << r.replicas << ',' << r.failed
        << '\n';
    }
    write_csv_document("curve", cfg, t.str());
  } else {
    json points = json::array();
    for (const auto& r : reports) points.push_back(to_json(r));
    write_json_document("curve", cfg, {{"points", points}});
  }
  return 0;
}

RhoCOptions rho_options(const json& cfg) {
  RhoCOptions o;
  o.epsilon = get_double(cfg, "eps");
  o.tol = get_double(cfg, "tol");
  o.replicas_per_point = get_uint(cfg, "replicas");
  o.sequential_z = get_double(cfg, "sequential_z");
  o.campaign = campaign(cfg);
  return o;
}

int run_rhoc(const json& cfg) {
  const auto kernel = make_kernel(cfg);
  const auto params = make_params(cfg);
  const auto est = estimate_rho_c(kernel, params, static_cast<int>(get_int(cfg, "n")), rho_options(cfg),
                                  get_uint(cfg, "seed"));
  if (csv_format(cfg)) {
    std::ostringstream t;
    t << "rho,p,std_error,replicas,retained\n";
    for (const auto& c : est.curve) {
      t << format_double(c.rho) << ',' << format_double(c.p) << ',' << format_double(c.std_error) << ','
        << c.replicas << ',' << (c.retained ? "true" : "false") << '\n';
    }
    write_csv_document("rhoc", cfg, t.str());
  } else {
    write_json_document("rhoc", cfg, to_json(est));
  }
  return 0;
}

int run_sweep(const json& cfg) {
  const auto kernel = make_kernel(cfg);
  const auto grid = get_doubles(cfg, "lambda_grid");
  SweepSettings settings;
  settings.base = rho_options(cfg);
  settings.epsilon_rel = get_double(cfg, "eps_rel");
  settings.tol_rel = get_double(cfg, "tol_rel");
  const int n = static_cast<int>(get_int(cfg, "n"));
  const double n_scale = get_double(cfg, "n_scale");
  if (n_scale > 0.0) {
    settings.n = [n_scale](double lambda) { return static_cast<int>(std::ceil(n_scale / std::sqrt(lambda))); };
  } else {
    settings.n = [n](double) { return n; };
  }
  const auto rows = lambda_sweep(kernel, grid, settings, get_uint(cfg, "seed"));
  if (csv_format(cfg)) {
    write_csv_document("sweep", cfg, sweep_to_csv(rows));
  } else {
    json out = json::array();
    for (const auto& r : rows) {
      out.push_back(r.estimate ? to_json(*r.estimate) : json{{"lambda", r.lambda}, {"n", r.n}, {"error", r.error}});
    }
    write_json_document("sweep", cfg, {{"rows", out}});
  }
  bool any_failed = false;
  for (const auto& r : rows) any_failed = any_failed || !r.estimate;
  return any_failed ? 2 : 0;
}

int run_masscheck(const json& cfg) {
  const auto kernel = make_kernel(cfg);
  const auto params = make_params(cfg);
  const double rho = get_double(cfg, "rho");
  const auto n_list = get_ints(cfg, "n_list");
  const auto rows = mass_conservation_check(kernel, params, rho, n_list, get_uint(cfg, "replicas"),
                                            get_uint(cfg, "seed"), campaign(cfg));
  if (csv_format(cfg)) {
    write_csv_document("masscheck", cfg, mass_check_to_csv(rows, rho));
  } else {
    json out = json::array();
    for (const auto& r : rows) {
      out.push_back({{"n", r.n}, {"p", r.p}, {"std_error", r.std_error}, {"deviation", r.deviation},
                     {"replicas", r.replicas}});
    }
    write_json_document("masscheck", cfg, {{"rho", rho}, {"rows", out}});
  }
  return 0;
}

// selftest

json abelian_suite(std::uint64_t seed, std::uint64_t instances) {
  std::mt19937_64 rng(seed);
  std::uint64_t mismatches = 0;
  const std::vector<SchedulerPolicy> policies{SchedulerPolicy::kLexFirst, SchedulerPolicy::kLexLast,
                                              SchedulerPolicy::kFifo, SchedulerPolicy::kLifo,
                                              SchedulerPolicy::kRandom};
  for (std::uint64_t i = 0; i < instances; ++i) {
    const int dim = 1 + static_cast<int>(rng() % 2);
    const int r = dim == 1 ? static_cast<int>(rng() % 25) : static_cast<int>(rng() % 4);
    Configuration config(Volume::ball(dim, r));
    const auto sites = config.volume().enumerate();
    const auto mass = 1 + rng() % 20;
    for (std::uint64_t m = 0; m < mass; ++m) config.add_active(sites[rng() % sites.size()]);
    const InstructionStream stream(rng(), make_ssrw_kernel(dim), Params::with_rate(rng() % 2 ? 0.5 : 2.0));
    const auto ref = stabilize(config, stream, Mode::legal(), {policies[0], 0});
    for (std::size_t p = 1; p < policies.size(); ++p) {
      const auto rec = stabilize(config, stream, Mode::legal(), {policies[p], rng()});
      if (!(rec.final == ref.final) || !(rec.odometer == ref.odometer)) ++mismatches;
    }
  }
  return {{"instances", instances}, {"policies", policies.size()}, {"mismatches", mismatches},
          {"pass", mismatches == 0}};
}

json oracle_suite(std::uint64_t seed, std::uint64_t replicas) {
  struct Case {
    const char* label;
    Configuration config;
    double lambda;
  };
  const auto b1 = Volume::ball(1, 1);
  Configuration pair(Volume::ball(1, 2));
  pair.add_active(Site{0});
  pair.add_active(Site{1});
  const std::vector<Case> cases{{"d1 B1 single lambda=1", Configuration::single_particle(b1), 1.0},
                                {"d1 B2 {0,1} lambda=0.5", pair, 0.5},
                                {"d2 B1 single lambda=1", Configuration::single_particle(Volume::ball(2, 1)), 1.0}};
  json rows = json::array();
  bool pass = true;
  std::uint64_t cell = 0;
  for (const auto& c : cases) {
    const auto kernel = make_ssrw_kernel(c.config.volume().dim());
    const auto params = Params::with_rate(c.lambda);
    const auto exact = oracle::exact_quantity(c.config, params, kernel, oracle::Quantity::kOriginOccupied);
    const auto mc = occupation_point(kernel, params, c.config.volume(), InitialLaw::from_literal(c.config),
                                     replicas, seed, cell++);
    const double se = std::sqrt(exact.value * (1.0 - exact.value) / static_cast<double>(replicas));
    const double z = std::abs(mc.point - exact.value) / se;
    const bool ok = z <= 4.0;
    pass = pass && ok;
    rows.push_back({{"instance", c.label}, {"exact", exact.value}, {"exact_rational", rational_text(exact.exact)},
                    {"monte_carlo", mc.point}, {"z", z}, {"pass", ok}});
  }
  const auto b1_exact = oracle::exact_quantity(cases[0].config, Params::with_rate(1.0), make_ssrw_kernel(1),
                                               oracle::Quantity::kOriginOccupied);
  const bool four_sevenths = b1_exact.exact && *b1_exact.exact == Rational(4, 7);
  pass = pass && four_sevenths;
  return {{"cases", rows}, {"b1_is_four_sevenths", four_sevenths}, {"pass", pass}};
}

int run_selftest(const json& cfg) {
  const auto seed = get_uint(cfg, "seed");
  const auto abelian = abelian_suite(seed, get_uint(cfg, "instances"));
  const auto oracle = oracle_suite(seed, get_uint(cfg, "replicas"));
  const bool pass = abelian.at("pass").get<bool>() && oracle.at("pass").get<bool>();
  write_json_document("selftest", cfg, {{"abelian", abelian}, {"oracle", oracle}, {"pass", pass}});
  return pass ? 0 : kSelftestFailed;
}

}  // namespace

bool is_destination_key(const std::string& key) {
  return key == "out" || key == "summary" || key == "workers";
}

std::vector<Command> all_commands() {
  return {
      {"stabilize", "Stabilize sampled initial configurations and emit per-replica records (JSON lines).",
       concat({kernel_specs(1),
               {{"lambda", 1.0, "sleep rate; 0 never sleeps, inf always sleeps"},
                {"radius", 10, "volume radius (sup-norm box)"}},
               law_specs("filled"),
               {{"mode", "legal", "legal, weak or strong (w.r.t. the origin)"},
                {"scheduler", "lex-first", "lex-first, lex-last, fifo, lifo or random"},
                {"replicas", 1, "number of replicas"},
                kBudget}}),
       run_stabilize},
      {"chances", "Strong-via-weak stabilization: chance counts and sleep trials per replica.",
       concat({kernel_specs(1),
               {{"lambda", 1.0, "sleep rate; 0 never sleeps, inf always sleeps"},
                {"radius", 10, "volume radius (sup-norm box)"}},
               law_specs("filled"),
               {{"tracked_radius", -1, "record holes in this ball per snapshot; -1 disables"},
                {"replicas", 1000, "number of replicas"},
                kBudget}}),
       run_chances},
      {"carpet", "Carpet procedure on B_r: JSON line per replica, CSV r,lambda,ch_prime,end_reason.",
       concat({kernel_specs(1),
               {{"lambda", 10.0, "sleep rate; inf always sleeps"},
                {"r", 2, "carpet radius"},
                {"radius", -1, "volume radius; -1 means r + 5"},
                {"replicas", 1000, "number of replicas"},
                {"max_iters", 10'000'000, "iteration cap per replica"},
                {"summary", "", "also write the CSV summary to this path"},
                kBudget}}),
       run_carpet},
      {"holes", "Hole indicators after each weak stabilization: JSON line per replica, CSV j,x,hole_rate.",
       concat({kernel_specs(1),
               {{"lambda", 20.0, "sleep rate"},
                {"tracked_radius", 20, "radius of the filled, tracked ball"},
                {"radius", -1, "volume radius; -1 means the tracked radius"},
                {"max_j", 8, "largest weak stabilization index recorded"},
                {"replicas", 1000, "number of replicas"},
                {"summary", "", "also write the CSV summary to this path"},
                kBudget}}),
       run_holes},
      {"oracle", "Exact stabilization distribution of a tiny configuration literal.",
       {{"initial", "", "configuration literal file"},
        {"kernel", "ssrw", "ssrw or a kernel JSON file"},
        {"lambda", 1.0, "sleep rate; 0 never sleeps, inf always sleeps"},
        {"mode", "legal", "legal, weak or strong (w.r.t. the origin)"},
        {"order", "lex-first", "lex-first or lex-last"},
        {"arithmetic", "auto", "auto, rational or floating"},
        {"max_sites", 10, "largest volume accepted"},
        {"max_mass", 4, "largest mass accepted"},
        {"max_states", 2'000'000, "largest chain accepted"}},
       run_oracle},
      {"green", "Green's function and escape probability of the walk.",
       concat({kernel_specs(3),
               {{"truncation_n", 200, "exact prefix length"},
                {"mc_tail_samples", 20'000, "Monte Carlo walks for the tail"},
                {"horizon", 20'000, "steps per tail walk"}}}),
       run_green},
      {"q", "Probability that a lone particle falls asleep at the origin.",
       concat({kernel_specs(1),
               {{"lambda", 1.0, "sleep rate"},
                {"truncation_n", -1, "series length; -1 picks a default"}}}),
       run_q},
      {"curve", "Occupation probability of the origin over a density grid.",
       concat({kernel_specs(1),
               {{"lambda", 1.0, "sleep rate"},
                {"n", 100, "volume radius"},
                {"rho_grid", json::array({0.1, 0.2, 0.3, 0.4, 0.5}), "comma-separated densities"},
                {"replicas", 2000, "replicas per point"},
                {"max_failure_rate", 1e-3, "largest tolerated fraction of budget failures"},
                {"format", "csv", "json or csv"},
                kBudget},
               law_specs("bernoulli")}),
       run_curve},
      {"rhoc", "Critical density estimate by bisection on mass retention.",
       concat({kernel_specs(1),
               {{"lambda", 1.0, "sleep rate"},
                {"n", 100, "volume radius"},
                {"eps", 0.02, "mass-retention slack"},
                {"tol", 0.01, "bracket width"},
                {"replicas", 2000, "replicas per probe"},
                {"sequential_z", 0.0, "early-stop threshold in standard errors; 0 disables"},
                kBudget}}),
       run_rhoc},
      {"sweep", "Critical density estimates over a grid of sleep rates.",
       concat({kernel_specs(1),
               {{"lambda_grid", json::array({0.5, 1.0, 2.0}), "comma-separated sleep rates"},
                {"n", 100, "volume radius"},
                {"n_scale", 0.0, "if > 0 the radius is ceil(n_scale / sqrt(lambda))"},
                {"eps", 0.02, "mass-retention slack"},
                {"tol", 0.01, "bracket width"},
                {"eps_rel", 0.0, "if > 0 eps is this multiple of the rate's resolution scale"},
                {"tol_rel", 0.0, "if > 0 tol is this multiple of the rate's resolution scale"},
                {"replicas", 2000, "replicas per probe"},
                {"sequential_z", 0.0, "early-stop threshold in standard errors; 0 disables"},
                {"format", "csv", "json or csv"},
                kBudget}}),
       run_sweep},
      {"masscheck", "Deviation |p_n(rho) - rho| over volume radii in the subcritical regime.",
       concat({kernel_specs(1),
               {{"lambda", 1.0, "sleep rate"},
                {"rho", 0.25, "density, below lambda / (1 + lambda)"},
                {"n_list", json::array({50, 100, 200, 400}), "comma-separated radii"},
                {"replicas", 2000, "replicas per radius"},
                {"format", "csv", "json or csv"},
                kBudget}}),
       run_masscheck},
      {"selftest", "Abelian shuffle suite and oracle agreement suite.",
       {{"instances", 50, "random instances for the abelian suite"},
        {"replicas", 20'000, "Monte Carlo replicas per oracle case"}},
       run_selftest},
  };
}

json config_schema() {
  json variants = json::array();
  for (const auto& c : all_commands()) {
    json props = {{"command", {{"const", c.name}}},
                  {"arw_version", {{"type", "string"}, {"description", "ignored; written by arw"}}}};
    auto specs = c.params;
    for (const auto& common : common_params()) {
      const bool present = std::any_of(specs.begin(), specs.end(),
                                       [&](const ParamSpec& s) { return s.name == common.name; });
      if (!present) specs.push_back(common);
    }
    for (const auto& s : specs) {
      json p;
      const auto& fb = s.fallback;
      if (fb.is_boolean()) {
        p["type"] = "boolean";
      } else if (fb.is_number_integer()) {
        p["type"] = "integer";
      } else if (fb.is_number()) {
        p["anyOf"] = json::array({{{"type", "number"}}, {{"enum", {"inf", "infinity"}}}});
      } else if (fb.is_array()) {
        p["type"] = "array";
        p["items"] = {{"type", "number"}};
      } else {
        p["type"] = "string";
      }
      p["default"] = fb;
      p["description"] = s.help;
      props[s.name] = p;
    }
    variants.push_back({{"title", c.name},
                        {"description", c.help},
                        {"type", "object"},
                        {"properties", props},
                        {"additionalProperties", false}});
  }
  return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"title", "arw run config"},
          {"description",
           "Flat object of one subcommand's parameters. Command-line flags override these values, "
           "which override the defaults."},
          {"type", "object"},
          {"anyOf", variants}};
}

}  // namespace arw::cli
