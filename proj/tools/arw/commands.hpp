#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "run_config.hpp"

namespace arw::cli {

/// Exit status for a failed selftest (distinct from validation and
/// estimator failures).
inline constexpr int kSelftestFailed = 3;

struct Command {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
  /// Runs with the resolved config and returns the exit status.
  std::function<int(const nlohmann::json& cfg)> run;
};

std::vector<Command> all_commands();

/// JSON Schema (2020-12) of run config files for every command.
nlohmann::json config_schema();

/// Keys of the resolved config that only choose output destinations or
/// threading and never change results; they are left out of embedded headers.
bool is_destination_key(const std::string& key);

}  // namespace arw::cli
