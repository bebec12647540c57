#include "dkpabe/config.hpp"

#include <json.hpp>

#include <array>
#include <utility>

#include "dkpabe/codec.hpp"
#include "dkpabe/error.hpp"

namespace dkpabe::config {
namespace {

using Field = std::optional<std::string> Settings::*;

constexpr std::array<std::pair<const char*, Field>, 6> kFields = {{
    {"params", &Settings::params},
    {"authority_key", &Settings::authority_key},
    {"listen", &Settings::listen},
    {"grants", &Settings::grants},
    {"home", &Settings::home},
    {"log_level", &Settings::log_level},
}};

std::string env_name(const char* key) {
  std::string out = "DKPABE_";
  for (const char* p = key; *p; ++p) out += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
  return out;
}

}  // namespace

Settings from_json(std::string_view text) {
  Settings s;
  try {
    auto doc = nlohmann::json::parse(text);
    if (!doc.is_object()) fail(ErrorCode::kMalformedInput, "config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      bool known = false;
      for (const auto& [name, field] : kFields) {
        if (key == name) {
          s.*field = value.get<std::string>();
          known = true;
        }
      }
      if (!known) fail(ErrorCode::kMalformedInput, "unknown config key " + key);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kMalformedInput, std::string("config: ") + e.what());
  }
  return s;
}

Settings from_file(const std::string& path) {
  auto bytes = codec::read_file(path);
  return from_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Settings from_env(const Getenv& getenv) {
  Settings s;
  for (const auto& [name, field] : kFields) {
    if (const char* v = getenv(env_name(name).c_str()); v && *v) s.*field = v;
  }
  return s;
}

Settings overlay(Settings base, const Settings& over) {
  for (const auto& [name, field] : kFields) {
    if (over.*field) base.*field = over.*field;
  }
  return base;
}

std::string home_dir(const Settings& s, const Getenv& getenv) {
  if (s.home) return *s.home;
  const char* home = getenv("HOME");
  return std::string(home && *home ? home : ".") + "/.dkpabe";
}

std::string in_home(const Settings& s, const Getenv& getenv, const std::string& file) {
  return home_dir(s, getenv) + "/" + file;
}

}  // namespace dkpabe::config
