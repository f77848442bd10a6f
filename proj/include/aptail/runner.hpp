#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "aptail/error.hpp"

namespace aptail {

using json = nlohmann::json;

// Bad configuration: unknown key, unparsable value, missing required key.
class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct ConfigKey {
  const char* key;
  const char* value;  // default, "" when unset
  const char* help;
};

// Every tunable with its default. Printed by `aptail defaults`.
const std::vector<ConfigKey>& default_table();

// Layers: defaults, then a key=value file, then explicit overrides.
class Config {
 public:
  Config();

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;  // set to a non-empty value
  const std::string& raw(const std::string& key) const;

  std::string str(const std::string& key) const;  // required
  double num(const std::string& key) const;
  int integer(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  bool flag(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// '#' starts a comment; blank lines are skipped.
void load_config_file(Config& cfg, std::istream& is);
void load_config_file(Config& cfg, const std::string& path);

inline constexpr const char* kCommands[] = {
    "index",  "moments", "psi-star", "min-seed", "rates",    "phase",    "tail-exact", "tail-mc",
    "tail-is", "sprinkle", "freedman", "janson", "clusters", "emb", "fact-moment", "verify"};

bool is_command(const std::string& cmd);

// FNV-1a 64 over "N=..;k=..;p=.." as 16 hex digits.
std::string params_digest(const Config& cfg);

// Runs one command and returns its JSON output. `verify` sets
// out["ok"] = false on a gating violation. Throws on bad input.
json run_command(const std::string& cmd, const Config& cfg);

// Exit code for a finished command or a caught exception.
int exit_code_for(const std::string& cmd, const json& out);
int exit_code_for_exception(const std::exception& e);

// One line of the run store.
json make_record(const std::string& cmd, const Config& cfg, const json& out);
bool record_digest_matches(const json& record);

// Appends under an exclusive lock on the store file.
void append_record(const std::string& path, const json& record);
std::vector<json> read_store(const std::string& path);

// Re-runs the recorded command with its resolved config.
json replay_record(const json& record);

// Full front end used by the executable: runs, prints JSON to `out`,
// appends to the store when one is configured, returns the exit code.
int run_cli(const std::string& cmd, const Config& cfg, std::ostream& out, std::ostream& err);

}  // namespace aptail
