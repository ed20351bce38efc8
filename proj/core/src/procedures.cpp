#include "arw/procedures.hpp"

#include <algorithm>

namespace arw {

std::string to_string(CarpetRunRecord::EndReason reason) {
  switch (reason) {
    case CarpetRunRecord::EndReason::kStep1Jump:
      return "STEP1_JUMP";
    case CarpetRunRecord::EndReason::kEscaped:
      return "ESCAPED";
    case CarpetRunRecord::EndReason::kBudget:
      return "BUDGET";
  }
  return "?";
}

CarpetRunRecord carpet_procedure(const InstructionStream& stream, const Volume& volume, int r,
                                 std::uint64_t max_iters, const Configuration* initial,
                                 std::uint64_t max_topplings) {
  if (r < 0) throw InvalidArgument("carpet radius must be >= 0");
  if (max_iters == 0) throw InvalidArgument("max_iters must be >= 1");
  if (!volume.bounded() || !volume.contains_ball(r)) {
    throw InvalidArgument("volume must contain the carpet ball B_" + std::to_string(r));
  }
  Engine engine(volume, stream);
  if (initial) {
    if (!(initial->volume() == volume)) throw InvalidArgument("initial configuration is on another volume");
    engine.load(*initial);
  } else {
    engine.load(Configuration::filled_ball(volume, r));
  }
  std::vector<std::size_t> carpet;  // B_r \ {0}, lexicographic
  std::vector<Site> ball;
  for (std::size_t c : engine.cells()) {
    if (engine.cell_norm(c) > r) continue;
    ball.push_back(engine.site_of(c));
    if (c != engine.origin_cell()) carpet.push_back(c);
  }
  for (std::size_t c : engine.cells()) {
    if (engine.cell_norm(c) <= r && engine.occupancy(c) < 1) {
      throw InvalidArgument("initial configuration must put an active particle on every site of B_r");
    }
  }
  const Mode weak_ball = Mode::weak(std::move(ball));
  engine.stabilize(weak_ball, Scheduler{SchedulerPolicy::kLifo, 0}, max_topplings);

  CarpetRunRecord rec;
  rec.r = r;
  auto inside = [&](std::size_t c) { return engine.in_volume(c) && engine.cell_norm(c) <= r; };
  for (std::uint64_t iter = 1;; ++iter) {
    if (iter > max_iters) {
      rec.ch_prime = max_iters;
      rec.end_reason = CarpetRunRecord::EndReason::kBudget;
      throw CarpetBudgetExceeded("carpet procedure exceeded " + std::to_string(max_iters) + " iterations",
                                 rec);
    }
    rec.ch_prime = iter;
    // Step 1: one toppling per active carpet particle.
    for (std::size_t c : carpet) {
      if (engine.occupancy(c) < 1) continue;
      const std::size_t to = engine.topple_cell(c);
      if (to != Engine::kNoCell) {
        rec.step1_success.push_back(0);
        rec.end_reason = CarpetRunRecord::EndReason::kStep1Jump;
        return rec;
      }
    }
    rec.step1_success.push_back(1);
    // Step 2: the walker sits on occupied carpet sites, so its sleeps are
    // no-ops and each move is the next jump in the local stack.
    std::size_t at = engine.jump_out(engine.origin_cell());
    while (inside(at) && at != engine.origin_cell()) {
      at = engine.jump_out(at);
      if (engine.topplings() > max_topplings) {
        rec.end_reason = CarpetRunRecord::EndReason::kBudget;
        throw CarpetBudgetExceeded("carpet procedure exhausted its toppling budget", rec);
      }
    }
    if (at != engine.origin_cell()) {
      rec.return_success.push_back(0);
      rec.end_reason = CarpetRunRecord::EndReason::kEscaped;
      return rec;
    }
    rec.return_success.push_back(1);
  }
}

Rational gamblers_ruin_escape(int r) {
  if (r < 0) throw InvalidArgument("r must be >= 0");
  // h(0) = 0, h(r+1) = 1, h(x) = (h(x-1) + h(x+1)) / 2 for 1 <= x <= r.
  // Forward elimination writes h(x) = a_x h(x+1) + b_x.
  const Rational half(1, 2);
  Rational a = 0, b = 0;  // x = 0
  std::vector<Rational> as, bs;
  for (int x = 1; x <= r; ++x) {
    // h(x) = half (a h(x) + b) + half h(x+1)
    const Rational denom = 1 - half * a;
    const Rational na = half / denom;
    const Rational nb = half * b / denom;
    a = na;
    b = nb;
    as.push_back(a);
    bs.push_back(b);
  }
  if (r == 0) return Rational(1);
  Rational h = 1;  // h(r+1)
  for (int x = r; x >= 1; --x) h = as[static_cast<std::size_t>(x - 1)] * h + bs[static_cast<std::size_t>(x - 1)];
  return h;
}

Rational gamblers_ruin_escape(const JumpKernel& kernel, int r) {
  if (kernel.dim() != 1 || !kernel.is_ssrw()) {
    throw UnsupportedError("gambler's ruin escape is only defined for the 1-d simple random walk");
  }
  return gamblers_ruin_escape(r);
}

int carpet_radius(std::span<const Site> sites, std::span<const std::uint8_t> holes, int tracked_radius) {
  int radius = tracked_radius;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (holes[i]) radius = std::min(radius, sup_norm(sites[i]) - 1);
  }
  return radius;
}

std::vector<HoleStats> hole_statistics(const InstructionStream& stream, const Volume& volume,
                                       int tracked_radius, std::uint64_t max_j,
                                       std::uint64_t max_topplings) {
  if (tracked_radius < 0) throw InvalidArgument("tracked radius must be >= 0");
  if (max_j == 0) throw InvalidArgument("max_j must be >= 1");
  if (!volume.bounded() || !volume.contains_ball(tracked_radius)) {
    throw InvalidArgument("volume must contain the tracked ball");
  }
  Engine engine(volume, stream);
  engine.load(Configuration::filled_ball(volume, tracked_radius));
  StrongViaWeakOptions options;
  options.tracked_radius = tracked_radius;
  options.max_weak_stabilizations = max_j;
  const auto outcome = engine.strong_via_weak(max_topplings, options, Scheduler{SchedulerPolicy::kLifo, 0});

  std::vector<Site> sites;
  for (std::size_t c : engine.cells()) {
    if (engine.cell_norm(c) <= tracked_radius) sites.push_back(engine.site_of(c));
  }
  std::vector<HoleStats> out;
  for (std::size_t j = 0; j < outcome.snapshots.size() && j < max_j; ++j) {
    const auto& snap = outcome.snapshots[j];
    // E_{x,j} is only defined while the origin is still occupied (j <= Ch).
    if (snap.origin_state == 0) break;
    HoleStats h;
    h.j = j + 1;
    h.sites = sites;
    h.holes.assign(sites.size(), 0);
    for (const auto& hole : snap.holes) {
      const auto it = std::lower_bound(sites.begin(), sites.end(), hole);
      if (it != sites.end() && *it == hole) h.holes[static_cast<std::size_t>(it - sites.begin())] = 1;
    }
    h.carpet_radius = carpet_radius(h.sites, h.holes, tracked_radius);
    out.push_back(std::move(h));
  }
  return out;
}

std::uint64_t single_excursion_chances(const InstructionStream& stream, const Volume& volume,
                                       std::uint64_t max_topplings) {
  Engine engine(volume, stream);
  engine.load(Configuration::single_particle(volume));
  return engine.strong_via_weak(max_topplings, {}, Scheduler{SchedulerPolicy::kLifo, 0}).chances;
}

}  // namespace arw
