#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arw/configuration.hpp"
#include "arw/errors.hpp"
#include "arw/params.hpp"
#include "arw/randomness.hpp"
#include "arw/volume.hpp"

namespace arw {

/// Stabilization mode. `region` is the set U for weak and strong modes.
///   legal:  unstable iff at least one active particle.
///   weak:   on U, unstable iff at least two active particles.
///   strong: on U, unstable iff any particle, sleeping or active; toppling a
///           sleeper wakes it before executing the instruction.
struct Mode {
  enum class Kind { kLegal, kWeak, kStrong };
  Kind kind = Kind::kLegal;
  std::vector<Site> region;

  static Mode legal() { return {}; }
  static Mode weak(std::vector<Site> region) { return {Kind::kWeak, std::move(region)}; }
  static Mode strong(std::vector<Site> region) { return {Kind::kStrong, std::move(region)}; }
  /// Weak or strong with respect to the origin of a d-dimensional lattice.
  static Mode weak_origin(int dim) { return weak({Site(static_cast<std::size_t>(dim), 0)}); }
  static Mode strong_origin(int dim) { return strong({Site(static_cast<std::size_t>(dim), 0)}); }

  std::string label() const;
};

enum class SchedulerPolicy { kLexFirst, kLexLast, kFifo, kLifo, kRandom };

/// Toppling order. Every policy yields the same final state for a fixed
/// instruction stream; kLexFirst is the default.
struct Scheduler {
  SchedulerPolicy policy = SchedulerPolicy::kLexFirst;
  std::uint64_t seed = 0;  // kRandom only
};

std::string to_string(SchedulerPolicy policy);
SchedulerPolicy scheduler_from_string(std::string_view name);

inline constexpr std::uint64_t kDefaultBudget = 1'000'000'000ULL;

/// Origin occupancy and hole set within the tracked ball after one weak
/// stabilization.
struct SnapshotSummary {
  std::int32_t origin_state = 0;
  std::vector<Site> holes;
};

struct StabilizationRecord {
  Configuration final;
  OdometerMap odometer;
  Mode mode;
  std::uint64_t topplings = 0;
  std::uint64_t killed = 0;
  /// Strong-via-weak only.
  std::uint64_t chances = 0;
  std::vector<std::uint8_t> sleep_trials;
  std::vector<SnapshotSummary> weak_snapshots;
  /// Optional full weak-stable states eta^W_1, eta^W_2, ... and odometers.
  std::vector<Configuration> full_snapshots;
  std::vector<OdometerMap> full_snapshot_odometers;
};

/// Raised when a run exceeds its toppling budget; carries the partial state.
class BudgetExhausted : public Error {
 public:
  BudgetExhausted(const std::string& what, StabilizationRecord partial)
      : Error(what), partial_(std::move(partial)) {}
  const StabilizationRecord& partial() const noexcept { return partial_; }

 private:
  StabilizationRecord partial_;
};

struct ToppleEvent {
  enum class Effect { kSlept, kNoChange, kMoved, kKilled };
  Instruction instruction;
  Effect effect = Effect::kNoChange;
  bool woke_sleeper = false;  // acceptable toppling of a sleeper, or arrival on one
  Site target;                // jump destination, empty for sleeps
};

struct StrongViaWeakOptions {
  /// Radius of the ball whose holes are recorded per snapshot; -1 disables.
  int tracked_radius = -1;
  bool keep_full_snapshots = false;
  /// Stop after this many weak stabilizations (0: run to completion). The
  /// outcome then reports `completed = false` when the origin was still
  /// occupied at the last snapshot.
  std::uint64_t max_weak_stabilizations = 0;
};

/// Mutable toppling state on a dense padded grid over the bounding box of a
/// volume. Cells outside the volume absorb (kill) arriving particles.
///
/// Methods taking a `cell` index are unchecked primitives for composite
/// procedures; everything else validates its inputs.
class Engine {
 public:
  static constexpr std::size_t kNoCell = static_cast<std::size_t>(-1);

  Engine(Volume volume, InstructionStream stream);

  const Volume& volume() const noexcept { return volume_; }
  const InstructionStream& stream() const noexcept { return stream_; }

  /// Empty configuration, zero odometer, counters cleared, new stream seed.
  void reset(std::uint64_t stream_seed);
  void reset() { reset(stream_.seed()); }
  /// Loads a configuration on the same volume; odometer defaults to zero.
  void load(const Configuration& config, const OdometerMap* odometer = nullptr);

  Configuration configuration() const;
  OdometerMap odometer() const;
  std::int32_t state(std::span<const int> site) const;
  std::int32_t origin_state() const noexcept { return occ_[origin_]; }
  std::uint64_t killed() const noexcept { return killed_; }
  std::uint64_t topplings() const noexcept { return topplings_; }
  std::uint64_t mass() const noexcept;

  bool unstable(std::span<const int> site, const Mode& mode) const;
  bool stable(const Mode& mode) const;

  /// One checked toppling. Throws IllegalToppling if the site is stable.
  ToppleEvent topple(std::span<const int> site, const Mode& mode);

  /// Topples until stable for `mode`. Throws BudgetExhausted once the total
  /// number of topplings since reset exceeds `max_topplings`.
  void stabilize(const Mode& mode, const Scheduler& scheduler = {},
                 std::uint64_t max_topplings = kDefaultBudget);

  struct StrongViaWeakOutcome {
    std::uint64_t chances = 0;
    std::vector<std::uint8_t> sleep_trials;
    std::vector<SnapshotSummary> snapshots;
    std::vector<Configuration> full_snapshots;
    std::vector<OdometerMap> full_snapshot_odometers;
    bool completed = true;
  };

  /// Strong stabilization with respect to the origin via successive weak
  /// stabilizations, starting from the current state. Requires no sleeping
  /// particles.
  StrongViaWeakOutcome strong_via_weak(std::uint64_t max_topplings = kDefaultBudget,
                                       const StrongViaWeakOptions& options = {},
                                       const Scheduler& scheduler = {});

  StabilizationRecord record(const Mode& mode) const;

  // Cell-level primitives.
  std::size_t origin_cell() const noexcept { return origin_; }
  std::size_t cell_of(std::span<const int> site) const;  // kNoCell if outside
  Site site_of(std::size_t cell) const;
  bool in_volume(std::size_t cell) const noexcept { return mask_[cell] != 0; }
  std::int32_t occupancy(std::size_t cell) const noexcept { return occ_[cell]; }
  /// Cells of the volume in lexicographic order.
  std::span<const std::size_t> cells() const noexcept { return cells_; }
  /// Adds active particles (wakes a sleeper if present).
  void add_active(std::size_t cell, std::int32_t count);
  void add_active_rank(std::size_t rank, std::int32_t count) { add_active(cells_[rank], count); }
  /// Executes the next instruction at a cell holding at least one particle
  /// (a sleeper is woken first). Returns the jump destination cell, or
  /// kNoCell for a sleep. Destinations outside the volume are killed.
  std::size_t topple_cell(std::size_t cell);
  /// Consumes instructions at `cell` until a jump and moves one particle.
  /// Returns the destination (possibly outside the volume, in which case the
  /// particle was killed).
  std::size_t jump_out(std::size_t cell, JumpDraw* draw = nullptr);
  std::uint64_t odometer_at(std::size_t cell) const noexcept { return odo_[cell]; }
  /// Sup-norm of a cell's site.
  int cell_norm(std::size_t cell) const;
  void check_budget(std::uint64_t max_topplings, const Mode& mode) const;

 private:
  void set_region(const Mode& mode);
  void clear_region();
  template <class Unstable>
  void run(Unstable&& unstable, const Scheduler& scheduler, std::span<const std::size_t> seeds,
           std::uint64_t max_topplings, const Mode& mode);
  void stabilize_from(const Mode& mode, const Scheduler& scheduler,
                      std::span<const std::size_t> seeds, std::uint64_t max_topplings);
  SnapshotSummary snapshot(const std::vector<std::size_t>& tracked) const;
  void move_particle(std::size_t from, std::size_t to);

  Volume volume_;
  InstructionStream stream_;
  int dim_;
  std::vector<int> lo_;          // padded grid lower corner
  std::vector<int> extent_;      // padded grid extent per axis
  std::vector<std::size_t> stride_;
  std::vector<std::ptrdiff_t> delta_;  // per support entry
  std::vector<std::ptrdiff_t> step_;   // by draw_index: 0 for sleep, then delta_
  std::vector<std::size_t> stack_;
  std::size_t origin_ = 0;
  std::vector<std::size_t> cells_;
  std::vector<int> coords_;  // site coordinates per cell, in cells_ order
  std::vector<std::uint8_t> mask_;
  std::vector<std::uint8_t> region_;
  std::vector<std::size_t> region_cells_;
  std::vector<std::uint8_t> queued_;
  std::vector<std::int32_t> occ_;
  std::vector<std::uint64_t> odo_;
  std::vector<std::uint64_t> key_;
  std::uint64_t killed_ = 0;
  std::uint64_t topplings_ = 0;
};

/// Checked single toppling on a (configuration, odometer) pair.
ToppleEvent topple(Configuration& config, OdometerMap& odometer,
                   std::span<const int> site, const InstructionStream& stream,
                   const Mode& mode);

/// Stabilizes a copy of `config` (odometer starting at zero).
StabilizationRecord stabilize(const Configuration& config, const InstructionStream& stream,
                              const Mode& mode, const Scheduler& scheduler = {},
                              std::uint64_t max_topplings = kDefaultBudget);

/// Strong stabilization w.r.t. the origin via successive weak stabilizations.
/// Requires an all-active configuration whose volume contains the origin.
StabilizationRecord strong_via_weak(const Configuration& config,
                                    const InstructionStream& stream,
                                    std::uint64_t max_topplings = kDefaultBudget,
                                    const StrongViaWeakOptions& options = {});

/// Plug-in estimate 1 - mean(jump_prob^Ch) of P(origin occupied).
double occupation_probability_pgf(std::span<const std::uint64_t> ch_samples,
                                  const Params& params);

}  // namespace arw
