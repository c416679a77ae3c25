#pragma once
// Run configuration: a small TOML subset (sections, strings, numbers,
// bools, scalar arrays, # comments) covering exactly what the tool needs.
// Secrets never live in the file: backends name an environment variable.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "silverforge/datamodel.hpp"

namespace silverforge::config {

struct TomlValue {
  enum class Kind { String, Number, Boolean, Array };
  Kind kind = Kind::String;
  std::string str;
  double num = 0.0;
  bool boolean = false;
  std::vector<TomlValue> array;
};

// Parses into a flat "section.key" -> value map. Throws ConfigError with a
// line number on anything outside the accepted subset.
std::map<std::string, TomlValue> parse_toml(const std::string& text);

struct Config {
  model::BackendConfig generator{
      "http://localhost:8000", "generator", "", 30.0, 4, 3, 100};
  model::BackendConfig judge{
      "http://localhost:8000", "judge", "", 30.0, 4, 3, 100};

  int k = 4;
  double base_temperature = 0.8;
  int max_tokens = 1024;
  int64_t seed = 0;
  std::string audit_log = "runs.log";

  std::string normalize = "standard";  // "standard" | "raw"

  double bucket_edge_short = 10.0;
  double bucket_edge_long = 30.0;
  std::string lexicon_path;   // empty = built-in lexicon
  std::string templates_dir;  // empty = embedded templates

  std::string config_digest;  // SHA-256 of the file bytes ("" hashed for defaults)
};

// Defaults when path is empty; otherwise parses the file and rejects
// unknown keys so typos fail loudly.
Config load_config(const std::string& path = {});

}  // namespace silverforge::config
