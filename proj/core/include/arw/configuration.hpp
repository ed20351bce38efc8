#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arw/volume.hpp"

namespace arw {

/// Particle state on a finite volume: per site either one sleeping particle
/// (kSleeping) or a nonnegative count of active particles. States are stored
/// in the lexicographic site order of the volume.
class Configuration {
 public:
  static constexpr std::int32_t kSleeping = -1;

  /// Empty configuration. Throws InvalidArgument for unbounded volumes.
  explicit Configuration(Volume volume);

  /// One active particle on every site of B_radius inside the volume.
  static Configuration filled_ball(Volume volume, int radius);
  /// A single active particle at the origin.
  static Configuration single_particle(Volume volume);

  const Volume& volume() const noexcept { return volume_; }
  std::span<const std::int32_t> states() const noexcept { return states_; }
  std::span<std::int32_t> states() noexcept { return states_; }

  /// Throws RangeError for sites outside the volume.
  std::int32_t at(std::span<const int> site) const;
  void set(std::span<const int> site, std::int32_t state);
  void add_active(std::span<const int> site, std::int32_t count = 1);

  std::size_t rank(std::span<const int> site) const;

  std::uint64_t mass() const noexcept;
  bool all_active() const noexcept;
  bool empty() const noexcept { return mass() == 0; }

  bool operator==(const Configuration& other) const = default;

 private:
  Volume volume_;
  std::vector<std::int32_t> states_;
};

/// Number of instructions consumed per site.
class OdometerMap {
 public:
  explicit OdometerMap(Volume volume);

  const Volume& volume() const noexcept { return volume_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::span<std::uint64_t> counts() noexcept { return counts_; }
  std::uint64_t at(std::span<const int> site) const;
  std::uint64_t total() const noexcept;

  bool operator==(const OdometerMap& other) const = default;

 private:
  Volume volume_;
  std::vector<std::uint64_t> counts_;
};

/// Configuration literal: {"volume": {...}, "sites": {"(x,...)": n | "s"}}.
Configuration configuration_from_json(std::string_view text);
std::string configuration_to_json(const Configuration& config);

}  // namespace arw
