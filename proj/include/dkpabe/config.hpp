#pragma once

// Layered tool settings: a JSON config file, then DKPABE_* environment
// variables, then command-line flags. Later layers win.

#include <functional>
#include <optional>
#include <string>

namespace dkpabe::config {

struct Settings {
  std::optional<std::string> params;         // DKPABE_PARAMS
  std::optional<std::string> authority_key;  // DKPABE_AUTHORITY_KEY
  std::optional<std::string> listen;         // DKPABE_LISTEN
  std::optional<std::string> grants;         // DKPABE_GRANTS
  std::optional<std::string> home;           // DKPABE_HOME
  std::optional<std::string> log_level;      // DKPABE_LOG_LEVEL
};

using Getenv = std::function<const char*(const char*)>;

// Keys match the field names. MalformedInput for bad JSON or unknown keys.
Settings from_json(std::string_view text);
Settings from_file(const std::string& path);
Settings from_env(const Getenv& getenv);

// Fields set in `over` replace those in `base`.
Settings overlay(Settings base, const Settings& over);

// $DKPABE_HOME or ~/.dkpabe when home is unset.
std::string home_dir(const Settings& s, const Getenv& getenv);
std::string in_home(const Settings& s, const Getenv& getenv, const std::string& file);

}  // namespace dkpabe::config
