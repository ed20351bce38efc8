// arw: command-line front end for the activated random walk library.
//
// Exit codes: 0 success, 1 validation error, 2 estimator-unstable or budget
// error, 3 failed selftest.

#include <cstdio>
#include <exception>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arw/engine.hpp"
#include "arw/errors.hpp"
#include "arw/procedures.hpp"
#include "arw/version.hpp"
#include "commands.hpp"
#include "run_config.hpp"

namespace {

constexpr int kValidation = 1;
constexpr int kUnstable = 2;

int fail(int code, const std::string& what) {
  std::fprintf(stderr, "arw: %s\n", what.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace arw::cli;
  CLI::App app{"Activated random walk simulator, exact oracle and estimators."};
  app.set_version_flag("--version", std::string(arw::kVersion));
  bool print_schema = false;
  app.add_flag("--print-config-schema", print_schema, "print the run config JSON Schema and exit");
  app.require_subcommand(0, 1);

  const auto commands = all_commands();
  std::vector<std::unique_ptr<ParamSet>> sets;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sets.push_back(std::make_unique<ParamSet>(sub, c.params));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  if (print_schema) {
    std::printf("%s\n", config_schema().dump(2).c_str());
    return 0;
  }
  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!sets[i]->app()->parsed()) continue;
    try {
      return commands[i].run(sets[i]->resolve(commands[i].name));
    } catch (const ValidationError& e) {
      return fail(kValidation, e.what());
    } catch (const arw::InvalidArgument& e) {
      return fail(kValidation, e.what());
    } catch (const arw::RangeError& e) {
      return fail(kValidation, e.what());
    } catch (const arw::UnsupportedError& e) {
      return fail(kValidation, e.what());
    } catch (const nlohmann::json::exception& e) {
      return fail(kValidation, e.what());
    } catch (const arw::EstimatorUnstable& e) {
      return fail(kUnstable, std::string("estimator unstable: ") + e.what());
    } catch (const arw::BudgetExhausted& e) {
      return fail(kUnstable, std::string("budget exhausted: ") + e.what());
    } catch (const arw::CarpetBudgetExceeded& e) {
      return fail(kUnstable, std::string("budget exhausted: ") + e.what());
    } catch (const arw::ResourceError& e) {
      return fail(kUnstable, std::string("resource limit: ") + e.what());
    } catch (const arw::ModelError& e) {
      return fail(kUnstable, std::string("model error: ") + e.what());
    } catch (const std::exception& e) {
      return fail(kUnstable, e.what());
    }
  }
  return fail(kValidation, "no subcommand given");
}
