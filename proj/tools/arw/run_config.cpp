#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace arw::cli {

namespace {

std::string flag_name(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

std::string describe_type(const nlohmann::json& fallback) {
  if (fallback.is_boolean()) return "boolean";
  if (fallback.is_number_integer()) return "integer";
  if (fallback.is_number()) return "number";
  if (fallback.is_array()) return "list of numbers";
  return "string";
}

bool is_inf_text(const std::string& s) { return s == "inf" || s == "infinity"; }

// A config value is acceptable if it has the fallback's type. Numbers may be
// the string "inf"; integers must be whole; lists hold numbers.
bool type_matches(const nlohmann::json& fallback, const nlohmann::json& value) {
  if (fallback.is_boolean()) return value.is_boolean();
  if (fallback.is_number_integer()) {
    if (value.is_number_integer()) return true;
    return value.is_number_float() && value.get<double>() == std::floor(value.get<double>());
  }
  if (fallback.is_number()) {
    return value.is_number() || (value.is_string() && is_inf_text(value.get<std::string>()));
  }
  if (fallback.is_array()) {
    return value.is_array() &&
           std::all_of(value.begin(), value.end(), [](const auto& v) { return v.is_number(); });
  }
  return value.is_string();
}

nlohmann::json normalize(const nlohmann::json& fallback, const nlohmann::json& value) {
  if (fallback.is_number_integer() && value.is_number_float()) {
    return static_cast<std::int64_t>(value.get<double>());
  }
  return value;
}

double parse_number(const std::string& name, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError("--" + name + ": expected a number, got '" + text + "'");
  }
  return v;
}

}  // namespace

std::vector<ParamSpec> common_params() {
  return {
      {"seed", 1, "root seed; every random draw derives from it"},
      {"out", "-", "output path, - for stdout"},
      {"format", "json", "json or csv"},
      {"workers", 1, "worker threads, 0 for all cores; results do not depend on it"},
  };
}

nlohmann::json parse_flag(const ParamSpec& spec, const std::string& text) {
  const auto& fb = spec.fallback;
  if (fb.is_boolean()) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ValidationError(flag_name(spec.name) + ": expected true or false, got '" + text + "'");
  }
  if (fb.is_number_integer()) {
    std::int64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
      throw ValidationError(flag_name(spec.name) + ": expected an integer, got '" + text + "'");
    }
    return v;
  }
  if (fb.is_number()) {
    if (is_inf_text(text)) return "inf";
    return parse_number(spec.name, text);
  }
  if (fb.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      out.push_back(parse_number(spec.name, item));
    }
    return out;
  }
  return text;
}

ParamSet::ParamSet(CLI::App* app, std::vector<ParamSpec> specs) : app_(app) {
  for (auto& s : common_params()) {
    const bool overridden = std::any_of(specs.begin(), specs.end(),
                                        [&](const ParamSpec& p) { return p.name == s.name; });
    if (!overridden) specs.push_back(std::move(s));
  }
  specs_ = std::move(specs);
  app_->add_option("--config", config_path_, "JSON config file; flags override its values");
  for (const auto& s : specs_) {
    auto* opt = app_->add_option(flag_name(s.name), raw_[s.name], s.help);
    opt->type_name(describe_type(s.fallback));
    opt->description(s.help + " [default: " + s.fallback.dump() + "]");
  }
}

nlohmann::json ParamSet::resolve(const std::string& command) const {
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& s : specs_) cfg[s.name] = s.fallback;

  if (!config_path_.empty()) {
    std::ifstream in(config_path_);
    if (!in) throw ValidationError("cannot open config file '" + config_path_ + "'");
    nlohmann::json file;
    try {
      file = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("config file '" + config_path_ + "': " + e.what());
    }
    if (!file.is_object()) throw ValidationError("config file must hold a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (key == "command") {
        if (!value.is_string() || value.get<std::string>() != command) {
          throw ValidationError("config file is for command " + value.dump() + ", not '" +
                                command + "'");
        }
        continue;
      }
      if (key == "arw_version") continue;
      const auto it = std::find_if(specs_.begin(), specs_.end(),
                                   [&](const ParamSpec& s) { return s.name == key; });
      if (it == specs_.end()) {
        throw ValidationError("config file: unknown key '" + key + "' for command '" + command + "'");
      }
      if (!type_matches(it->fallback, value)) {
        throw ValidationError("config file: '" + key + "' must be " + describe_type(it->fallback) +
                              ", got " + value.dump());
      }
      cfg[key] = normalize(it->fallback, value);
    }
  }

  for (const auto& s : specs_) {
    if (app_->get_option(flag_name(s.name))->count() > 0) cfg[s.name] = parse_flag(s, raw_.at(s.name));
  }
  return cfg;
}

double get_double(const nlohmann::json& cfg, const std::string& key) {
  const auto& v = cfg.at(key);
  if (v.is_string()) return std::numeric_limits<double>::infinity();
  return v.get<double>();
}

std::int64_t get_int(const nlohmann::json& cfg, const std::string& key) {
  return cfg.at(key).get<std::int64_t>();
}

std::uint64_t get_uint(const nlohmann::json& cfg, const std::string& key) {
  const auto v = get_int(cfg, key);
  if (v < 0) throw ValidationError(flag_name(key) + " must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

std::string get_string(const nlohmann::json& cfg, const std::string& key) {
  return cfg.at(key).get<std::string>();
}

std::vector<double> get_doubles(const nlohmann::json& cfg, const std::string& key) {
  return cfg.at(key).get<std::vector<double>>();
}

std::vector<int> get_ints(const nlohmann::json& cfg, const std::string& key) {
  std::vector<int> out;
  for (double v : get_doubles(cfg, key)) {
    if (v != std::floor(v)) throw ValidationError(flag_name(key) + " must hold integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace arw::cli
