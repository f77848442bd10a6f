#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "aptail/runner.hpp"

namespace {

std::string command_list() {
  std::string s;
  for (const char* c : aptail::kCommands) s += std::string(s.empty() ? "" : ", ") + c;
  return s;
}

void print_defaults() {
  for (const auto& k : aptail::default_table())
    std::printf("%-14s %-10s %s\n", k.key, *k.value ? k.value : "-", k.help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AP-count upper tails: exact combinatorics, rates, estimators and bounds"};
  std::string command;
  std::string config_path;
  app.add_option("command", command, "one of: " + command_list() + ", defaults")->required();
  app.add_option("--config", config_path, "key=value file, applied before flags");

  std::map<std::string, std::optional<std::string>> flags;
  for (const auto& k : aptail::default_table()) {
    auto& slot = flags[k.key];
    app.add_option(std::string("--") + k.key, slot, k.help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (command == "defaults") {
    print_defaults();
    return 0;
  }
  if (!aptail::is_command(command)) {
    std::cerr << "error: unknown command '" << command << "' (expected " << command_list()
              << ")\n";
    return 2;
  }

  aptail::Config cfg;
  try {
    if (!config_path.empty()) aptail::load_config_file(cfg, config_path);
    for (const auto& [key, value] : flags)
      if (value) cfg.set(key, *value);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return aptail::run_cli(command, cfg, std::cout, std::cerr);
}
