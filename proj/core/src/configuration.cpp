#include "arw/configuration.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "arw/errors.hpp"
#include "arw/io.hpp"

namespace arw {

namespace {

std::size_t site_rank(const Volume& volume, std::span<const int> site) {
  if (!volume.contains(site)) throw RangeError("site " + format_site(site) + " is outside the volume");
  if (volume.shape() == Volume::Shape::kBox) {
    std::size_t r = 0;
    for (int i = 0; i < volume.dim(); ++i) {
      const auto width = static_cast<std::size_t>(volume.upper()[i] - volume.lower()[i] + 1);
      r = r * width + static_cast<std::size_t>(site[i] - volume.lower()[i]);
    }
    return r;
  }
  const auto sites = volume.enumerate();
  return static_cast<std::size_t>(
      std::lower_bound(sites.begin(), sites.end(), Site(site.begin(), site.end())) - sites.begin());
}

}  // namespace

Configuration::Configuration(Volume volume) : volume_(std::move(volume)) {
  if (!volume_.bounded()) throw InvalidArgument("configurations need a bounded volume");
  states_.assign(volume_.size(), 0);
}

Configuration Configuration::filled_ball(Volume volume, int radius) {
  Configuration c(std::move(volume));
  if (radius < 0) return c;
  const auto sites = c.volume_.enumerate();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sup_norm(sites[i]) <= radius) c.states_[i] = 1;
  }
  return c;
}

Configuration Configuration::single_particle(Volume volume) {
  Configuration c(std::move(volume));
  c.add_active(Site(static_cast<std::size_t>(c.volume_.dim()), 0), 1);
  return c;
}

std::size_t Configuration::rank(std::span<const int> site) const { return site_rank(volume_, site); }

std::int32_t Configuration::at(std::span<const int> site) const { return states_[rank(site)]; }

void Configuration::set(std::span<const int> site, std::int32_t state) {
  if (state < kSleeping) throw InvalidArgument("invalid site state");
  states_[rank(site)] = state;
}

void Configuration::add_active(std::span<const int> site, std::int32_t count) {
  if (count < 0) throw InvalidArgument("particle count must be nonnegative");
  auto& s = states_[rank(site)];
  if (count == 0) return;
  // An arriving particle wakes a sleeper.
  s = (s == kSleeping ? 1 : s) + count;
}

std::uint64_t Configuration::mass() const noexcept {
  std::uint64_t m = 0;
  for (auto s : states_) m += s == kSleeping ? 1u : static_cast<std::uint64_t>(s);
  return m;
}

bool Configuration::all_active() const noexcept {
  return std::none_of(states_.begin(), states_.end(), [](auto s) { return s == kSleeping; });
}

OdometerMap::OdometerMap(Volume volume) : volume_(std::move(volume)) {
  if (!volume_.bounded()) throw InvalidArgument("odometers need a bounded volume");
  counts_.assign(volume_.size(), 0);
}

std::uint64_t OdometerMap::at(std::span<const int> site) const {
  return counts_[site_rank(volume_, site)];
}

std::uint64_t OdometerMap::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

Configuration configuration_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed configuration JSON: ") + e.what());
  }
  return configuration_from_value(j);
}

std::string configuration_to_json(const Configuration& config) {
  return configuration_json(config).dump();
}

}  // namespace arw
