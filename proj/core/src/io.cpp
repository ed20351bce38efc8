#include "arw/io.hpp"

#include <algorithm>

#include "arw/errors.hpp"

namespace arw {

nlohmann::json volume_to_json(const Volume& volume) {
  nlohmann::json j;
  j["dim"] = volume.dim();
  switch (volume.shape()) {
    case Volume::Shape::kBox: {
      const auto& r = volume.radii();
      if (std::all_of(r.begin(), r.end(), [&](int x) { return x == r[0]; })) {
        j["radius"] = r[0];
      } else {
        j["box"] = r;
      }
      break;
    }
    case Volume::Shape::kSites:
      j["sites"] = volume.enumerate();
      break;
    case Volume::Shape::kUnbounded:
      j["unbounded"] = true;
      break;
  }
  return j;
}

Volume volume_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dim") || !j["dim"].is_number_integer()) {
    throw InvalidArgument("volume needs an integer \"dim\"");
  }
  const int dim = j["dim"].get<int>();
  if (dim < 1) throw InvalidArgument("invalid dimension: must be >= 1");
  try {
    if (j.contains("radius")) return Volume::ball(dim, j["radius"].get<int>());
    if (j.contains("box")) {
      auto radii = j["box"].get<std::vector<int>>();
      if (static_cast<int>(radii.size()) != dim) throw InvalidArgument("box radii do not match dim");
      return Volume::box(std::move(radii));
    }
    if (j.contains("sites")) return Volume::sites(dim, j["sites"].get<std::vector<Site>>());
    if (j.value("unbounded", false)) return Volume::unbounded(dim);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed volume: ") + e.what());
  }
  throw InvalidArgument("volume needs one of \"radius\", \"box\" or \"sites\"");
}

nlohmann::json configuration_json(const Configuration& config) {
  nlohmann::json sites = nlohmann::json::object();
  const auto all = config.volume().enumerate();
  const auto states = config.states();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (states[i] == Configuration::kSleeping) {
      sites[format_site(all[i])] = "s";
    } else if (states[i] > 0) {
      sites[format_site(all[i])] = states[i];
    }
  }
  return {{"volume", volume_to_json(config.volume())}, {"sites", sites}};
}

Configuration configuration_from_value(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("volume")) {
    throw InvalidArgument("configuration needs a \"volume\"");
  }
  Configuration config(volume_from_json(j["volume"]));
  if (!j.contains("sites")) return config;
  if (!j["sites"].is_object()) throw InvalidArgument("\"sites\" must be an object");
  for (const auto& [key, value] : j["sites"].items()) {
    const Site site = parse_site(key);
    if (static_cast<int>(site.size()) != config.volume().dim()) {
      throw InvalidArgument("site " + key + " has wrong dimension");
    }
    if (!config.volume().contains(site)) throw InvalidArgument("site " + key + " is outside the volume");
    if (value.is_string()) {
      if (value.get<std::string>() != "s") throw InvalidArgument("site state must be a count or \"s\"");
      config.set(site, Configuration::kSleeping);
    } else if (value.is_number_integer() && value.get<std::int64_t>() >= 0 &&
               value.get<std::int64_t>() <= INT32_MAX) {
      config.set(site, value.get<std::int32_t>());
    } else {
      throw InvalidArgument("site state must be a nonnegative count or \"s\"");
    }
  }
  return config;
}

nlohmann::json odometer_json(const OdometerMap& odometer) {
  nlohmann::json sites = nlohmann::json::object();
  const auto all = odometer.volume().enumerate();
  const auto counts = odometer.counts();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (counts[i] > 0) sites[format_site(all[i])] = counts[i];
  }
  return sites;
}

nlohmann::json record_to_json(const StabilizationRecord& record) {
  nlohmann::json j;
  j["mode"] = record.mode.label();
  j["final"] = configuration_json(record.final);
  j["odometer"] = odometer_json(record.odometer);
  j["topplings"] = record.topplings;
  j["killed"] = record.killed;
  j["mass"] = record.final.mass();
  if (record.mode.kind == Mode::Kind::kStrong) {
    j["chances"] = record.chances;
    j["sleep_trials"] = record.sleep_trials;
  }
  if (!record.weak_snapshots.empty()) {
    auto& snaps = j["snapshots"] = nlohmann::json::array();
    for (const auto& s : record.weak_snapshots) {
      nlohmann::json holes = nlohmann::json::array();
      for (const auto& h : s.holes) holes.push_back(format_site(h));
      snaps.push_back({{"origin", s.origin_state}, {"holes", holes}});
    }
  }
  return j;
}

}  // namespace arw
