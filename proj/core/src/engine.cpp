#include "arw/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <queue>

#include "arw/parallel.hpp"

namespace arw {

namespace {

bool region_contains(const Mode& mode, std::span<const int> site) {
  return std::any_of(mode.region.begin(), mode.region.end(), [&](const Site& s) {
    return std::equal(s.begin(), s.end(), site.begin(), site.end());
  });
}

// Worklists for the scheduler policies. push() is only called for cells not
// already queued.
class Worklist {
 public:
  explicit Worklist(const Scheduler& s) : policy_(s.policy), rng_state_(s.seed) {}

  bool empty() const {
    switch (policy_) {
      case SchedulerPolicy::kLexFirst:
        return min_heap_.empty();
      case SchedulerPolicy::kLexLast:
        return max_heap_.empty();
      case SchedulerPolicy::kFifo:
        return fifo_.empty();
      default:
        return items_.empty();
    }
  }

  void push(std::size_t c) {
    switch (policy_) {
      case SchedulerPolicy::kLexFirst:
        min_heap_.push(c);
        break;
      case SchedulerPolicy::kLexLast:
        max_heap_.push(c);
        break;
      case SchedulerPolicy::kFifo:
        fifo_.push_back(c);
        break;
      default:
        items_.push_back(c);
        break;
    }
  }

  std::size_t pop() {
    std::size_t c = 0;
    switch (policy_) {
      case SchedulerPolicy::kLexFirst:
        c = min_heap_.top();
        min_heap_.pop();
        break;
      case SchedulerPolicy::kLexLast:
        c = max_heap_.top();
        max_heap_.pop();
        break;
      case SchedulerPolicy::kFifo:
        c = fifo_.front();
        fifo_.pop_front();
        break;
      case SchedulerPolicy::kLifo:
        c = items_.back();
        items_.pop_back();
        break;
      case SchedulerPolicy::kRandom: {
        rng_state_ = mix64(rng_state_ + kGolden);
        const std::size_t i = static_cast<std::size_t>(rng_state_ % items_.size());
        c = items_[i];
        items_[i] = items_.back();
        items_.pop_back();
        break;
      }
    }
    return c;
  }

 private:
  SchedulerPolicy policy_;
  std::uint64_t rng_state_;
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> min_heap_;
  std::priority_queue<std::size_t> max_heap_;
  std::deque<std::size_t> fifo_;
  std::vector<std::size_t> items_;
};

}  // namespace

std::string Mode::label() const {
  std::string out;
  switch (kind) {
    case Kind::kLegal:
      return "legal";
    case Kind::kWeak:
      out = "weak{";
      break;
    case Kind::kStrong:
      out = "strong{";
      break;
  }
  for (std::size_t i = 0; i < region.size(); ++i) {
    if (i) out += ',';
    out += format_site(region[i]);
  }
  return out + "}";
}

std::string to_string(SchedulerPolicy policy) {
  switch (policy) {
    case SchedulerPolicy::kLexFirst:
      return "lex-first";
    case SchedulerPolicy::kLexLast:
      return "lex-last";
    case SchedulerPolicy::kFifo:
      return "fifo";
    case SchedulerPolicy::kLifo:
      return "lifo";
    case SchedulerPolicy::kRandom:
      return "random";
  }
  return "?";
}

SchedulerPolicy scheduler_from_string(std::string_view name) {
  for (auto p : {SchedulerPolicy::kLexFirst, SchedulerPolicy::kLexLast, SchedulerPolicy::kFifo,
                 SchedulerPolicy::kLifo, SchedulerPolicy::kRandom}) {
    if (to_string(p) == name) return p;
  }
  throw InvalidArgument("unknown scheduler policy: " + std::string(name));
}

Engine::Engine(Volume volume, InstructionStream stream)
    : volume_(std::move(volume)), stream_(std::move(stream)), dim_(volume_.dim()) {
  if (!volume_.bounded()) throw InvalidArgument("the engine needs a bounded volume");
  if (stream_.kernel().dim() != dim_) {
    throw InvalidArgument("kernel dimension does not match the volume");
  }
  const int reach = stream_.kernel().reach();
  lo_.resize(dim_);
  extent_.resize(dim_);
  stride_.resize(dim_);
  std::size_t total = 1;
  for (int i = dim_ - 1; i >= 0; --i) {
    lo_[i] = volume_.lower()[i] - reach;
    extent_[i] = volume_.upper()[i] - volume_.lower()[i] + 1 + 2 * reach;
    stride_[i] = total;
    total *= static_cast<std::size_t>(extent_[i]);
  }
  for (const auto& e : stream_.kernel().support()) {
    std::ptrdiff_t d = 0;
    for (int i = 0; i < dim_; ++i) d += static_cast<std::ptrdiff_t>(e.offset[i]) * static_cast<std::ptrdiff_t>(stride_[i]);
    delta_.push_back(d);
  }
  step_.push_back(0);
  step_.insert(step_.end(), delta_.begin(), delta_.end());
  mask_.assign(total, 0);
  region_.assign(total, 0);
  queued_.assign(total, 0);
  occ_.assign(total, 0);
  odo_.assign(total, 0);
  key_.assign(total, 0);
  for (const auto& site : volume_.enumerate()) {
    std::size_t c = 0;
    for (int i = 0; i < dim_; ++i) c += static_cast<std::size_t>(site[i] - lo_[i]) * stride_[i];
    mask_[c] = 1;
    cells_.push_back(c);
    coords_.insert(coords_.end(), site.begin(), site.end());
  }
  origin_ = cell_of(Site(static_cast<std::size_t>(dim_), 0));
  reset(stream_.seed());
}

void Engine::reset(std::uint64_t stream_seed) {
  if (stream_seed != stream_.seed()) stream_ = stream_.reseeded(stream_seed);
  const std::size_t d = static_cast<std::size_t>(dim_);
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const std::size_t c = cells_[i];
    key_[c] = stream_.site_key(std::span<const int>(coords_.data() + i * d, d));
    occ_[c] = 0;
    odo_[c] = 0;
  }
  killed_ = 0;
  topplings_ = 0;
}

void Engine::load(const Configuration& config, const OdometerMap* odometer) {
  if (!(config.volume() == volume_)) throw InvalidArgument("configuration volume does not match the engine");
  if (odometer && !(odometer->volume() == volume_)) {
    throw InvalidArgument("odometer volume does not match the engine");
  }
  const auto states = config.states();
  topplings_ = 0;
  killed_ = 0;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    occ_[cells_[i]] = states[i];
    odo_[cells_[i]] = odometer ? odometer->counts()[i] : 0;
    topplings_ += odo_[cells_[i]];
  }
}

Configuration Engine::configuration() const {
  Configuration config(volume_);
  auto states = config.states();
  for (std::size_t i = 0; i < cells_.size(); ++i) states[i] = occ_[cells_[i]];
  return config;
}

OdometerMap Engine::odometer() const {
  OdometerMap odo(volume_);
  auto counts = odo.counts();
  for (std::size_t i = 0; i < cells_.size(); ++i) counts[i] = odo_[cells_[i]];
  return odo;
}

std::int32_t Engine::state(std::span<const int> site) const {
  const std::size_t c = cell_of(site);
  if (c == kNoCell) throw RangeError("site " + format_site(site) + " is outside the volume");
  return occ_[c];
}

std::uint64_t Engine::mass() const noexcept {
  std::uint64_t m = 0;
  for (std::size_t c : cells_) m += occ_[c] == Configuration::kSleeping ? 1u : static_cast<std::uint64_t>(occ_[c]);
  return m;
}

std::size_t Engine::cell_of(std::span<const int> site) const {
  if (static_cast<int>(site.size()) != dim_) return kNoCell;
  std::size_t c = 0;
  for (int i = 0; i < dim_; ++i) {
    const int off = site[i] - lo_[i];
    if (off < 0 || off >= extent_[i]) return kNoCell;
    c += static_cast<std::size_t>(off) * stride_[i];
  }
  return mask_[c] ? c : kNoCell;
}

Site Engine::site_of(std::size_t cell) const {
  Site s(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    s[i] = static_cast<int>(cell / stride_[i]) + lo_[i];
    cell %= stride_[i];
  }
  return s;
}

int Engine::cell_norm(std::size_t cell) const { return sup_norm(site_of(cell)); }

void Engine::add_active(std::size_t cell, std::int32_t count) {
  auto& s = occ_[cell];
  if (count <= 0) return;
  s = (s == Configuration::kSleeping ? 1 : s) + count;
}

void Engine::move_particle(std::size_t from, std::size_t to) {
  --occ_[from];
  if (mask_[to]) {
    auto& t = occ_[to];
    t = t == Configuration::kSleeping ? 2 : t + 1;
  } else {
    ++killed_;
  }
}

std::size_t Engine::topple_cell(std::size_t cell) {
  auto& s = occ_[cell];
  if (s == Configuration::kSleeping) s = 1;
  const std::uint32_t idx = stream_.draw_index(key_[cell], odo_[cell]++);
  ++topplings_;
  if (idx == 0) {
    s = s == 1 ? Configuration::kSleeping : s;
    return kNoCell;
  }
  --s;
  const std::size_t to = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(cell) + step_[idx]);
  if (mask_[to]) {
    auto& t = occ_[to];
    t = t == Configuration::kSleeping ? 2 : t + 1;
  } else {
    ++killed_;
  }
  return to;
}

std::size_t Engine::jump_out(std::size_t cell, JumpDraw* draw) {
  if (occ_[cell] == Configuration::kSleeping) occ_[cell] = 1;
  const JumpDraw j = stream_.next_jump(key_[cell], odo_[cell]);
  odo_[cell] += j.consumed;
  topplings_ += j.consumed;
  const std::size_t to = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(cell) + delta_[j.support_index]);
  move_particle(cell, to);
  if (draw) *draw = j;
  return to;
}

void Engine::check_budget(std::uint64_t max_topplings, const Mode& mode) const {
  if (topplings_ > max_topplings) {
    throw BudgetExhausted("toppling budget of " + std::to_string(max_topplings) +
                              " exhausted; nontermination suspected",
                          record(mode));
  }
}

bool Engine::unstable(std::span<const int> site, const Mode& mode) const {
  const std::int32_t s = state(site);
  switch (mode.kind) {
    case Mode::Kind::kLegal:
      return s >= 1;
    case Mode::Kind::kWeak:
      return region_contains(mode, site) ? s >= 2 : s >= 1;
    case Mode::Kind::kStrong:
      return region_contains(mode, site) ? s != 0 : s >= 1;
  }
  return false;
}

bool Engine::stable(const Mode& mode) const {
  return std::none_of(cells_.begin(), cells_.end(),
                      [&](std::size_t c) { return unstable(site_of(c), mode); });
}

ToppleEvent Engine::topple(std::span<const int> site, const Mode& mode) {
  if (!unstable(site, mode)) {
    throw IllegalToppling("site " + format_site(site) + " is stable for mode " + mode.label());
  }
  const std::size_t c = cell_of(site);
  ToppleEvent ev;
  ev.instruction = stream_.instruction(site, odo_[c]);
  ev.woke_sleeper = occ_[c] == Configuration::kSleeping;
  const std::int32_t before = occ_[c] == Configuration::kSleeping ? 1 : occ_[c];
  const std::uint64_t killed_before = killed_;
  std::int32_t target_before = 0;
  if (!ev.instruction.is_sleep()) {
    ev.target = site_of(c);
    for (int i = 0; i < dim_; ++i) ev.target[i] = site[i] + ev.instruction.offset[i];
    const std::size_t t = cell_of(ev.target);
    if (t != kNoCell) target_before = occ_[t];
  }
  topple_cell(c);
  if (ev.instruction.is_sleep()) {
    ev.effect = before == 1 ? ToppleEvent::Effect::kSlept : ToppleEvent::Effect::kNoChange;
  } else {
    ev.effect = killed_ > killed_before ? ToppleEvent::Effect::kKilled : ToppleEvent::Effect::kMoved;
    if (target_before == Configuration::kSleeping) ev.woke_sleeper = true;
  }
  return ev;
}

void Engine::set_region(const Mode& mode) {
  clear_region();
  for (const auto& s : mode.region) {
    const std::size_t c = cell_of(s);
    if (c == kNoCell) continue;
    region_[c] = 1;
    region_cells_.push_back(c);
  }
}

void Engine::clear_region() {
  for (std::size_t c : region_cells_) region_[c] = 0;
  region_cells_.clear();
}

template <class Unstable>
void Engine::run(Unstable&& is_unstable, const Scheduler& scheduler,
                 std::span<const std::size_t> seeds, std::uint64_t max_topplings, const Mode& mode) {
  const bool sleep_certain = stream_.params().sleep_certain();
  if (scheduler.policy == SchedulerPolicy::kLifo) {
    // Depth-first: topple the most recently activated site until it is stable.
    stack_.clear();
    for (std::size_t c : seeds) {
      if (!queued_[c] && is_unstable(c)) {
        queued_[c] = 1;
        stack_.push_back(c);
      }
    }
    try {
      while (!stack_.empty()) {
        const std::size_t c = stack_.back();
        stack_.pop_back();
        queued_[c] = 0;
        while (is_unstable(c)) {
          const std::size_t to = topple_cell(c);
          if (to == kNoCell) {
            if (sleep_certain && is_unstable(c)) {
              throw ModelError("toppling " + format_site(site_of(c)) +
                               " cannot make progress when every instruction is a sleep");
            }
          } else if (mask_[to] && !queued_[to] && is_unstable(to)) {
            queued_[to] = 1;
            stack_.push_back(to);
          }
        }
        if (topplings_ > max_topplings) check_budget(max_topplings, mode);
      }
    } catch (...) {
      for (std::size_t c : stack_) queued_[c] = 0;
      stack_.clear();
      throw;
    }
    return;
  }
  Worklist work(scheduler);
  const bool drain = false;
  auto enqueue = [&](std::size_t c) {
    if (!queued_[c] && is_unstable(c)) {
      queued_[c] = 1;
      work.push(c);
    }
  };
  for (std::size_t c : seeds) enqueue(c);
  try {
    while (!work.empty()) {
      const std::size_t c = work.pop();
      queued_[c] = 0;
      while (is_unstable(c)) {
        const std::size_t to = topple_cell(c);
        if (topplings_ > max_topplings) check_budget(max_topplings, mode);
        if (to == kNoCell) {
          if (sleep_certain && is_unstable(c)) {
            throw ModelError("toppling " + format_site(site_of(c)) +
                             " cannot make progress when every instruction is a sleep");
          }
        } else if (mask_[to]) {
          enqueue(to);
        }
        if (!drain) {
          enqueue(c);
          break;
        }
      }
    }
  } catch (...) {
    while (!work.empty()) queued_[work.pop()] = 0;
    throw;
  }
}

void Engine::stabilize_from(const Mode& mode, const Scheduler& scheduler,
                            std::span<const std::size_t> seeds, std::uint64_t max_topplings) {
  switch (mode.kind) {
    case Mode::Kind::kLegal:
      run([this](std::size_t c) { return occ_[c] >= 1; }, scheduler, seeds, max_topplings, mode);
      break;
    case Mode::Kind::kWeak:
      run([this](std::size_t c) { return occ_[c] >= (region_[c] ? 2 : 1); }, scheduler, seeds,
          max_topplings, mode);
      break;
    case Mode::Kind::kStrong:
      run([this](std::size_t c) { return region_[c] ? occ_[c] != 0 : occ_[c] >= 1; }, scheduler,
          seeds, max_topplings, mode);
      break;
  }
}

void Engine::stabilize(const Mode& mode, const Scheduler& scheduler, std::uint64_t max_topplings) {
  if (max_topplings == 0) throw InvalidArgument("toppling budget must be positive");
  set_region(mode);
  try {
    stabilize_from(mode, scheduler, cells_, max_topplings);
  } catch (...) {
    clear_region();
    throw;
  }
  clear_region();
}

SnapshotSummary Engine::snapshot(const std::vector<std::size_t>& tracked) const {
  SnapshotSummary s;
  s.origin_state = occ_[origin_];
  for (std::size_t c : tracked) {
    if (occ_[c] == 0) s.holes.push_back(site_of(c));
  }
  return s;
}

Engine::StrongViaWeakOutcome Engine::strong_via_weak(std::uint64_t max_topplings,
                                                     const StrongViaWeakOptions& options,
                                                     const Scheduler& scheduler) {
  if (max_topplings == 0) throw InvalidArgument("toppling budget must be positive");
  for (std::size_t c : cells_) {
    if (occ_[c] == Configuration::kSleeping) {
      throw InvalidArgument("strong-via-weak needs an all-active configuration");
    }
  }
  std::vector<std::size_t> tracked;
  if (options.tracked_radius >= 0) {
    for (std::size_t c : cells_) {
      if (cell_norm(c) <= options.tracked_radius) tracked.push_back(c);
    }
  }
  const Mode weak = Mode::weak_origin(dim_);
  StrongViaWeakOutcome out;
  std::uint64_t weak_runs = 0;
  auto take_snapshot = [&] {
    ++weak_runs;
    if (options.tracked_radius >= 0) out.snapshots.push_back(snapshot(tracked));
    if (options.keep_full_snapshots) {
      out.full_snapshots.push_back(configuration());
      out.full_snapshot_odometers.push_back(odometer());
    }
  };

  set_region(weak);
  try {
    stabilize_from(weak, scheduler, cells_, max_topplings);
    take_snapshot();
    while (occ_[origin_] != 0) {
      if (options.max_weak_stabilizations != 0 && weak_runs >= options.max_weak_stabilizations) {
        out.completed = false;
        break;
      }
      ++out.chances;
      JumpDraw draw;
      const std::size_t to = jump_out(origin_, &draw);
      out.sleep_trials.push_back(draw.first_was_sleep ? 1 : 0);
      if (topplings_ > max_topplings) check_budget(max_topplings, Mode::strong_origin(dim_));
      if (mask_[to]) {
        const std::size_t seed[1] = {to};
        stabilize_from(weak, scheduler, seed, max_topplings);
      }
      take_snapshot();
    }
  } catch (BudgetExhausted& e) {
    clear_region();
    StabilizationRecord partial = e.partial();
    partial.mode = Mode::strong_origin(dim_);
    partial.chances = out.chances;
    partial.sleep_trials = out.sleep_trials;
    partial.weak_snapshots = out.snapshots;
    throw BudgetExhausted(e.what(), std::move(partial));
  } catch (...) {
    clear_region();
    throw;
  }
  clear_region();
  return out;
}

StabilizationRecord Engine::record(const Mode& mode) const {
  return StabilizationRecord{configuration(), odometer(), mode, topplings_, killed_, 0, {}, {}, {}, {}};
}

ToppleEvent topple(Configuration& config, OdometerMap& odometer, std::span<const int> site,
                   const InstructionStream& stream, const Mode& mode) {
  Engine engine(config.volume(), stream);
  engine.load(config, &odometer);
  ToppleEvent ev = engine.topple(site, mode);
  config = engine.configuration();
  odometer = engine.odometer();
  return ev;
}

StabilizationRecord stabilize(const Configuration& config, const InstructionStream& stream,
                              const Mode& mode, const Scheduler& scheduler,
                              std::uint64_t max_topplings) {
  Engine engine(config.volume(), stream);
  engine.load(config);
  engine.stabilize(mode, scheduler, max_topplings);
  return engine.record(mode);
}

StabilizationRecord strong_via_weak(const Configuration& config, const InstructionStream& stream,
                                    std::uint64_t max_topplings,
                                    const StrongViaWeakOptions& options) {
  if (!config.volume().contains(Site(static_cast<std::size_t>(config.volume().dim()), 0))) {
    throw InvalidArgument("volume must contain the origin");
  }
  Engine engine(config.volume(), stream);
  engine.load(config);
  auto out = engine.strong_via_weak(max_topplings, options);
  StabilizationRecord rec = engine.record(Mode::strong_origin(config.volume().dim()));
  rec.chances = out.chances;
  rec.sleep_trials = std::move(out.sleep_trials);
  rec.weak_snapshots = std::move(out.snapshots);
  rec.full_snapshots = std::move(out.full_snapshots);
  rec.full_snapshot_odometers = std::move(out.full_snapshot_odometers);
  return rec;
}

double occupation_probability_pgf(std::span<const std::uint64_t> ch_samples, const Params& params) {
  if (ch_samples.empty()) throw InvalidArgument("need at least one chance sample");
  const double lj = params.jump_prob();
  double acc = 0.0;
  for (auto ch : ch_samples) acc += std::pow(lj, static_cast<double>(ch));
  return 1.0 - acc / static_cast<double>(ch_samples.size());
}

}  // namespace arw
