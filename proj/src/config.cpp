#include "silverforge/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "silverforge/errors.hpp"
#include "silverforge/text.hpp"

namespace silverforge::config {
namespace {

[[noreturn]] void fail(size_t line_no, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line_no) + ": " + what);
}

// Strips a trailing comment that starts outside any string literal.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string parse_string(const std::string& raw, size_t line_no) {
  if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
    fail(line_no, "malformed string literal " + raw);
  }
  std::string out;
  for (size_t i = 1; i + 1 < raw.size(); ++i) {
    if (raw[i] != '\\') {
      out += raw[i];
      continue;
    }
    if (i + 2 >= raw.size()) fail(line_no, "dangling escape");
    switch (raw[++i]) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      default: fail(line_no, std::string("unsupported escape \\") + raw[i]);
    }
  }
  return out;
}

TomlValue parse_scalar(const std::string& raw, size_t line_no) {
  TomlValue v;
  if (!raw.empty() && raw.front() == '"') {
    v.kind = TomlValue::Kind::String;
    v.str = parse_string(raw, line_no);
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = TomlValue::Kind::Boolean;
    v.boolean = raw == "true";
    return v;
  }
  try {
    size_t used = 0;
    v.num = std::stod(raw, &used);
    if (used != raw.size()) fail(line_no, "malformed number " + raw);
    v.kind = TomlValue::Kind::Number;
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail(line_no, "unrecognized value " + raw);
  }
}

TomlValue parse_value(const std::string& raw, size_t line_no) {
  if (!raw.empty() && raw.front() == '[') {
    if (raw.back() != ']') fail(line_no, "unterminated array");
    TomlValue v;
    v.kind = TomlValue::Kind::Array;
    std::string body = raw.substr(1, raw.size() - 2);
    std::string item;
    bool in_string = false;
    for (size_t i = 0; i <= body.size(); ++i) {
      const bool end = i == body.size();
      const char c = end ? ',' : body[i];
      if (!end && c == '"' && (i == 0 || body[i - 1] != '\\')) in_string = !in_string;
      if (c == ',' && !in_string) {
        std::string trimmed = text::trim(item);
        if (!trimmed.empty()) v.array.push_back(parse_scalar(trimmed, line_no));
        item.clear();
      } else {
        item += c;
      }
    }
    return v;
  }
  return parse_scalar(raw, line_no);
}

bool valid_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

double require_number(const std::map<std::string, TomlValue>& kv,
                      const std::string& key, double fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  if (it->second.kind != TomlValue::Kind::Number) {
    throw ConfigError("config key " + key + " must be a number");
  }
  return it->second.num;
}

std::string require_string(const std::map<std::string, TomlValue>& kv,
                           const std::string& key, const std::string& fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  if (it->second.kind != TomlValue::Kind::String) {
    throw ConfigError("config key " + key + " must be a string");
  }
  return it->second.str;
}

void apply_backend(const std::map<std::string, TomlValue>& kv,
                   const std::string& section, model::BackendConfig& be) {
  be.endpoint_url = require_string(kv, section + ".endpoint_url", be.endpoint_url);
  be.model_name = require_string(kv, section + ".model_name", be.model_name);
  be.api_key_env_var_name =
      require_string(kv, section + ".api_key_env_var_name", be.api_key_env_var_name);
  be.timeout_s = require_number(kv, section + ".timeout_s", be.timeout_s);
  be.max_concurrency = static_cast<int>(
      require_number(kv, section + ".max_concurrency", be.max_concurrency));
  be.max_retries =
      static_cast<int>(require_number(kv, section + ".max_retries", be.max_retries));
  be.backoff_base_ms = static_cast<int>(
      require_number(kv, section + ".backoff_base_ms", be.backoff_base_ms));
}

const char* const kKnownKeys[] = {
    "backend.generator.endpoint_url", "backend.generator.model_name",
    "backend.generator.api_key_env_var_name", "backend.generator.timeout_s",
    "backend.generator.max_concurrency", "backend.generator.max_retries",
    "backend.generator.backoff_base_ms",
    "backend.judge.endpoint_url", "backend.judge.model_name",
    "backend.judge.api_key_env_var_name", "backend.judge.timeout_s",
    "backend.judge.max_concurrency", "backend.judge.max_retries",
    "backend.judge.backoff_base_ms",
    "pipeline.k", "pipeline.base_temperature", "pipeline.max_tokens",
    "pipeline.seed", "pipeline.audit_log",
    "metrics.normalize",
    "diagnostics.bucket_edges", "diagnostics.lexicon_path",
    "templates.dir"};

}  // namespace

std::map<std::string, TomlValue> parse_toml(const std::string& text_in) {
  std::map<std::string, TomlValue> out;
  std::istringstream in(text_in);
  std::string raw_line;
  std::string section;
  size_t line_no = 0;

  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string line = text::trim(strip_comment(raw_line));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = text::trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(line_no, "empty section name");
      for (char c : section) {
        if (!valid_key_char(c)) fail(line_no, "bad section name " + section);
      }
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    std::string key = text::trim(line.substr(0, eq));
    if (key.empty()) fail(line_no, "empty key");
    for (char c : key) {
      if (!valid_key_char(c)) fail(line_no, "bad key " + key);
    }
    std::string value = text::trim(line.substr(eq + 1));
    if (value.empty()) fail(line_no, "empty value for " + key);

    std::string full = section.empty() ? key : section + "." + key;
    if (out.count(full)) fail(line_no, "duplicate key " + full);
    out[full] = parse_value(value, line_no);
  }
  return out;
}

Config load_config(const std::string& path) {
  Config cfg;
  std::string bytes;
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile("cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    bytes = buf.str();
  }
  cfg.config_digest = text::sha256_hex(bytes);
  if (path.empty()) return cfg;

  const auto kv = parse_toml(bytes);
  for (const auto& [key, value] : kv) {
    bool known = false;
    for (const char* k : kKnownKeys) known |= key == k;
    if (!known) throw ConfigError("unknown config key: " + key);
  }

  apply_backend(kv, "backend.generator", cfg.generator);
  apply_backend(kv, "backend.judge", cfg.judge);

  cfg.k = static_cast<int>(require_number(kv, "pipeline.k", cfg.k));
  cfg.base_temperature =
      require_number(kv, "pipeline.base_temperature", cfg.base_temperature);
  cfg.max_tokens =
      static_cast<int>(require_number(kv, "pipeline.max_tokens", cfg.max_tokens));
  cfg.seed = static_cast<int64_t>(
      require_number(kv, "pipeline.seed", static_cast<double>(cfg.seed)));
  cfg.audit_log = require_string(kv, "pipeline.audit_log", cfg.audit_log);

  cfg.normalize = require_string(kv, "metrics.normalize", cfg.normalize);
  if (cfg.normalize != "standard" && cfg.normalize != "raw") {
    throw ConfigError("metrics.normalize must be \"standard\" or \"raw\"");
  }

  if (auto it = kv.find("diagnostics.bucket_edges"); it != kv.end()) {
    const TomlValue& v = it->second;
    if (v.kind != TomlValue::Kind::Array || v.array.size() != 2 ||
        v.array[0].kind != TomlValue::Kind::Number ||
        v.array[1].kind != TomlValue::Kind::Number ||
        v.array[0].num >= v.array[1].num) {
      throw ConfigError("diagnostics.bucket_edges must be two ascending numbers");
    }
    cfg.bucket_edge_short = v.array[0].num;
    cfg.bucket_edge_long = v.array[1].num;
  }
  cfg.lexicon_path = require_string(kv, "diagnostics.lexicon_path", cfg.lexicon_path);
  cfg.templates_dir = require_string(kv, "templates.dir", cfg.templates_dir);

  if (cfg.k < 2) throw ConfigError("pipeline.k must be >= 2");
  if (cfg.generator.max_concurrency < 1 || cfg.judge.max_concurrency < 1) {
    throw ConfigError("max_concurrency must be >= 1");
  }
  return cfg;
}

}  // namespace silverforge::config
