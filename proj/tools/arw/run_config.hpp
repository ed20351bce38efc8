#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace arw::cli {

/// Raised for malformed flags, config files or parameter values (exit 1).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One tunable of a subcommand. The flag is `--name` with underscores
/// replaced by dashes; the config-file key is `name`.
struct ParamSpec {
  std::string name;
  nlohmann::json fallback;  // default value; its JSON type is the parameter type
  std::string help;
};

/// Parameters shared by every subcommand.
std::vector<ParamSpec> common_params();

/// Registers `specs` as string-valued flags on `app`.
class ParamSet {
 public:
  ParamSet(CLI::App* app, std::vector<ParamSpec> specs);

  /// defaults < config file < flags. Unknown config keys and type mismatches
  /// raise ValidationError.
  nlohmann::json resolve(const std::string& command) const;

  CLI::App* app() const { return app_; }

 private:
  CLI::App* app_;
  std::vector<ParamSpec> specs_;
  std::map<std::string, std::string> raw_;  // flag text per parameter
  std::string config_path_;
};

/// Converts flag text to the JSON type of `fallback`.
nlohmann::json parse_flag(const ParamSpec& spec, const std::string& text);

/// Accessors with validation.
double get_double(const nlohmann::json& cfg, const std::string& key);
std::int64_t get_int(const nlohmann::json& cfg, const std::string& key);
std::uint64_t get_uint(const nlohmann::json& cfg, const std::string& key);
std::string get_string(const nlohmann::json& cfg, const std::string& key);
std::vector<double> get_doubles(const nlohmann::json& cfg, const std::string& key);
std::vector<int> get_ints(const nlohmann::json& cfg, const std::string& key);

}  // namespace arw::cli
