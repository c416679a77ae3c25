#include "silverforge/store.hpp"

#include <cstdio>
#include <system_error>

#include "silverforge/errors.hpp"
#include "silverforge/text.hpp"

namespace silverforge::store {

namespace fs = std::filesystem;

void to_json(json& j, const Manifest& m) {
  j = json{{"path", m.path},
           {"record_count", m.record_count},
           {"schema_version", m.schema_version},
           {"stage", model::to_string(m.stage)},
           {"content_digest", m.content_digest}};
}

void from_json(const json& j, Manifest& m) {
  j.at("path").get_to(m.path);
  j.at("record_count").get_to(m.record_count);
  j.at("schema_version").get_to(m.schema_version);
  m.stage = model::stage_from(j.at("stage").get<std::string>());
  j.at("content_digest").get_to(m.content_digest);
}

fs::path manifest_path_for(const fs::path& data_path) {
  fs::path p = data_path;
  p += ".manifest.json";
  return p;
}

JsonlReader::JsonlReader(const fs::path& path) : path_(path) {
  if (!fs::exists(path)) throw MissingFile("no such file: " + path.string());
  in_.open(path, std::ios::binary);
  if (!in_) throw IoError("cannot open " + path.string());
}

bool JsonlReader::next(json& out) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.empty()) continue;
    json parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded()) {
      throw ParseError(line_, "malformed record in " + path_.string());
    }
    out = std::move(parsed);
    return true;
  }
  return false;
}

std::optional<Manifest> read_manifest(const fs::path& data_path) {
  fs::path mp = manifest_path_for(data_path);
  if (!fs::exists(mp)) return std::nullopt;
  std::ifstream in(mp, std::ios::binary);
  if (!in) throw IoError("cannot open " + mp.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError(1, "malformed manifest " + mp.string());
  return j.get<Manifest>();
}

std::vector<json> read_stream(const fs::path& path, model::Stage expected_stage) {
  if (auto m = read_manifest(path); m && m->stage != expected_stage) {
    throw StageMismatch("manifest stage " + model::to_string(m->stage) +
                        " does not match expected " + model::to_string(expected_stage) +
                        " for " + path.string());
  }
  std::vector<json> out;
  JsonlReader reader(path);
  json rec;
  while (reader.next(rec)) out.push_back(std::move(rec));
  return out;
}

Manifest write_stream(const std::vector<json>& records, const fs::path& path,
                      model::Stage stage) {
  std::string body;
  for (const json& rec : records) {
    body += rec.dump();  // compact, keys already lexicographic (std::map)
    body += '\n';
  }

  fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  std::error_code ec;
  fs::create_directories(dir, ec);
  fs::path tmp = dir / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename to " + path.string() + " failed: " + ec.message());

  Manifest m;
  m.path = path.filename().string();
  m.record_count = static_cast<long>(records.size());
  m.schema_version = 1;
  m.stage = stage;
  m.content_digest = text::sha256_hex(body);

  fs::path mp = manifest_path_for(path);
  fs::path mtmp = dir / (mp.filename().string() + ".tmp");
  {
    std::ofstream out(mtmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + mtmp.string());
    out << json(m).dump(2) << "\n";
  }
  fs::rename(mtmp, mp, ec);
  if (ec) throw IoError("rename to " + mp.string() + " failed: " + ec.message());
  return m;
}

std::vector<model::RawSample> read_raw_samples(const fs::path& path) {
  std::vector<model::RawSample> out;
  for (const json& j : read_stream(path, model::Stage::Raw)) {
    out.push_back(j.get<model::RawSample>());
  }
  return out;
}

std::vector<model::SilverRecord> read_silver(const fs::path& path) {
  std::vector<model::SilverRecord> out;
  for (const json& j : read_stream(path, model::Stage::Silver)) {
    out.push_back(j.get<model::SilverRecord>());
  }
  return out;
}

std::vector<model::EvalRow> read_eval_rows(const fs::path& path) {
  std::vector<model::EvalRow> out;
  for (const json& j : read_stream(path, model::Stage::Eval)) {
    out.push_back(j.get<model::EvalRow>());
  }
  return out;
}

void to_json(json& j, const Stats& s) {
  j = json{{"record_count", s.record_count},
           {"flag_counts", s.flag_counts},
           {"language_counts", s.language_counts},
           {"length_bound", s.length_bound},
           {"length_histogram",
            json{{"short", s.short_length_count}, {"long", s.long_length_count}}}};
}

Stats stats(const fs::path& path, long length_bound) {
  Stats s;
  s.length_bound = length_bound;
  JsonlReader reader(path);
  json rec;
  while (reader.next(rec)) {
    ++s.record_count;
    if (rec.contains("quality_flags")) {
      for (const auto& f : rec.at("quality_flags")) {
        ++s.flag_counts[f.get<std::string>()];
      }
    }
    if (rec.contains("language")) {
      ++s.language_counts[rec.at("language").get<std::string>()];
    }
    long len = 0;
    if (rec.contains("think_block")) {
      len = text::count_ws_tokens(rec.at("think_block").get<std::string>());
    } else if (rec.contains("est_length_tokens")) {
      len = rec.at("est_length_tokens").get<long>();
    }
    (len < length_bound ? s.short_length_count : s.long_length_count) += 1;
  }
  return s;
}

}  // namespace silverforge::store
