#pragma once
// Domain types shared across the pipeline. Pure data: immutable values
// after construction, JSON-serializable, validated but behavior-free.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace silverforge::model {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Enums

enum class MediaKind { Audio, Image, Video };
enum class Verdict { Confirmed, Blurred, Uncertain };
enum class QualityFlag { EmptyThink, AllUncertain, JudgeFallback };
enum class Metric { Wer, WerStar, Cer, TokenF1, Accuracy, Consistency };
enum class DurationBucket { Short, Mid, Long };
enum class Stage { Raw, Candidates, Silver, Eval };

std::string to_string(MediaKind k);        // "audio" | "image" | "video"
std::string to_string(Verdict v);          // "CONFIRMED" | "BLURRED" | "UNCERTAIN"
std::string to_string(QualityFlag f);      // "EMPTY_THINK" | "ALL_UNCERTAIN" | "JUDGE_FALLBACK"
std::string to_string(Metric m);           // "WER" | "WER_STAR" | "CER" | "TOKEN_F1" | "ACCURACY" | "CONSISTENCY"
std::string to_string(DurationBucket b);   // "SHORT" | "MID" | "LONG"
std::string to_string(Stage s);            // "RAW" | "CANDIDATES" | "SILVER" | "EVAL"

MediaKind media_kind_from(const std::string& s);
Verdict verdict_from(const std::string& s);
QualityFlag quality_flag_from(const std::string& s);
Metric metric_from(const std::string& s);
DurationBucket bucket_from(const std::string& s);
Stage stage_from(const std::string& s);

// ---------------------------------------------------------------------------
// Records

struct MediaRef {
  MediaKind kind = MediaKind::Audio;
  std::string uri;

  bool operator==(const MediaRef&) const = default;
};

struct RawSample {
  std::string id;
  std::string prompt;
  std::vector<MediaRef> media;
  std::optional<std::string> gold_answer;
  std::string language;  // BCP-47-style tag: "en", "id", "th", ...
  std::optional<double> audio_duration_s;

  bool operator==(const RawSample&) const = default;
};

struct CandidatePath {
  int index = 0;  // 0..K-1, unique within a candidate set
  std::string raw_text;
  std::optional<std::string> think;  // parsed deliberation segment, if delimited
  std::string answer;
  long est_length_tokens = 0;
  double temperature = 0.0;
  int64_t seed = 0;

  bool operator==(const CandidatePath&) const = default;
};

struct ClaimVerdict {
  std::string claim_text;  // normalized atomic assertion
  std::set<int> supporting_indices;
  Verdict verdict = Verdict::Uncertain;
  std::string replacement_text;  // equals claim_text when CONFIRMED

  bool operator==(const ClaimVerdict&) const = default;
};

struct SilverRecord {
  std::string sample_id;
  std::string think_block;  // stored without delimiters
  std::string final_answer;
  std::vector<ClaimVerdict> verdicts;
  int k_used = 0;
  std::string judge_model;
  std::string created_at;  // UTC RFC 3339
  std::set<QualityFlag> quality_flags;

  bool operator==(const SilverRecord&) const = default;
};

struct AlignmentCounts {
  long substitutions = 0;
  long deletions = 0;
  long insertions = 0;
  long ref_len = 0;  // N ≥ 1

  bool operator==(const AlignmentCounts&) const = default;
};

// WER = (S+D+I)/N; the insertion-forgiving variant WER* = (S+D)/N.
double wer(const AlignmentCounts& c);
double wer_star(const AlignmentCounts& c);

struct EvalRow {
  std::string sample_id;
  std::string system;
  Metric metric = Metric::Wer;
  double value = 0.0;
  std::optional<DurationBucket> duration_bucket;
  std::optional<long> reasoning_length_tokens;
  std::optional<bool> drift_flag;
  std::optional<double> audio_duration_s;  // needed by duration bucketing

  bool operator==(const EvalRow&) const = default;
};

struct CurriculumShard {
  int stage = 0;
  long length_bound = 0;  // exclusive upper token bound; -1 on the unbounded final stage
  std::vector<std::string> sample_ids;

  bool operator==(const CurriculumShard&) const = default;
};

struct BackendConfig {
  std::string endpoint_url;
  std::string model_name;
  std::string api_key_env_var_name;
  double timeout_s = 30.0;
  int max_concurrency = 4;
  int max_retries = 3;
  int backoff_base_ms = 100;

  bool operator==(const BackendConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Validation

// Returns human-readable invariant violations; empty means well-formed.
// Uniqueness of ids is a manifest-level check (see store module).
std::vector<std::string> validate_sample(const RawSample& s);

// ---------------------------------------------------------------------------
// JSON codecs (snake_case keys; absent optionals are omitted)

void to_json(json& j, const MediaRef& m);
void from_json(const json& j, MediaRef& m);
void to_json(json& j, const RawSample& s);
void from_json(const json& j, RawSample& s);
void to_json(json& j, const CandidatePath& c);
void from_json(const json& j, CandidatePath& c);
void to_json(json& j, const ClaimVerdict& v);
void from_json(const json& j, ClaimVerdict& v);
void to_json(json& j, const SilverRecord& r);
void from_json(const json& j, SilverRecord& r);
void to_json(json& j, const AlignmentCounts& c);
void from_json(const json& j, AlignmentCounts& c);
void to_json(json& j, const EvalRow& r);
void from_json(const json& j, EvalRow& r);
void to_json(json& j, const CurriculumShard& s);
void from_json(const json& j, CurriculumShard& s);
void to_json(json& j, const BackendConfig& c);
void from_json(const json& j, BackendConfig& c);

}  // namespace silverforge::model
