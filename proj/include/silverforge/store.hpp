#pragma once
// Line-delimited record storage: one JSON object per line, UTF-8, "\n"
// separators, no BOM, keys in lexicographic order. Every data file has a
// sibling manifest `<name>.manifest.json` carrying a content digest.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "silverforge/datamodel.hpp"

namespace silverforge::store {

using json = nlohmann::json;

struct Manifest {
  std::string path;
  long record_count = 0;
  int schema_version = 1;
  model::Stage stage = model::Stage::Raw;
  std::string content_digest;  // hex SHA-256 of file bytes

  bool operator==(const Manifest&) const = default;
};

void to_json(json& j, const Manifest& m);
void from_json(const json& j, Manifest& m);

std::filesystem::path manifest_path_for(const std::filesystem::path& data_path);

// Streaming reader; yields records in file order and reports malformed
// lines with their 1-based line number (ParseError).
class JsonlReader {
 public:
  explicit JsonlReader(const std::filesystem::path& path);
  // Fills `out` and returns true, or returns false at end of file.
  bool next(json& out);
  size_t line() const { return line_; }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
  size_t line_ = 0;
};

// Reads the whole stream. When a sibling manifest exists, its stage must
// equal expected_stage (StageMismatch otherwise); a missing manifest is
// accepted so hand-written fixtures stay usable.
std::vector<json> read_stream(const std::filesystem::path& path,
                              model::Stage expected_stage);

// Serializes records one per line (sorted keys), writes to a temp file in
// the destination directory, renames into place, then writes the sibling
// manifest. Byte-deterministic for identical inputs.
Manifest write_stream(const std::vector<json>& records,
                      const std::filesystem::path& path, model::Stage stage);

std::optional<Manifest> read_manifest(const std::filesystem::path& data_path);

// Typed conveniences.
std::vector<model::RawSample> read_raw_samples(const std::filesystem::path& path);
std::vector<model::SilverRecord> read_silver(const std::filesystem::path& path);
std::vector<model::EvalRow> read_eval_rows(const std::filesystem::path& path);

struct Stats {
  long record_count = 0;
  std::map<std::string, long> flag_counts;      // quality flag -> count
  std::map<std::string, long> language_counts;  // language tag -> count
  long short_length_count = 0;                  // think length < bound
  long long_length_count = 0;                   // think length ≥ bound
  long length_bound = 512;
};

void to_json(json& j, const Stats& s);

// Flag/length/language histograms over any stage file; records lacking a
// field simply do not contribute to that histogram, except the length
// histogram which buckets every record (records with no think text count
// as length 0). Bucket sums therefore equal record_count.
Stats stats(const std::filesystem::path& path, long length_bound = 512);

}  // namespace silverforge::store
