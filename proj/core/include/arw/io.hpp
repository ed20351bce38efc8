#pragma once

#include <nlohmann/json.hpp>

#include "arw/engine.hpp"
#include "arw/volume.hpp"

namespace arw {

/// {"dim": d, "box": [r_1, ..., r_d]} | {"dim": d, "radius": r} |
/// {"dim": d, "sites": [[...], ...]}.
nlohmann::json volume_to_json(const Volume& volume);
Volume volume_from_json(const nlohmann::json& j);

nlohmann::json configuration_json(const Configuration& config);
Configuration configuration_from_value(const nlohmann::json& j);

nlohmann::json odometer_json(const OdometerMap& odometer);

/// Every field of the record; snapshots as {"origin": state, "holes": [...]}.
nlohmann::json record_to_json(const StabilizationRecord& record);

}  // namespace arw
