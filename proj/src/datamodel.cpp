#include "silverforge/datamodel.hpp"

#include "silverforge/delimiters.hpp"
#include "silverforge/errors.hpp"

namespace silverforge::model {
namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v.has_value()) j[key] = *v;
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
  if (j.contains(key) && !j.at(key).is_null()) {
    v = j.at(key).get<T>();
  } else {
    v.reset();
  }
}

[[noreturn]] void bad_enum(const char* what, const std::string& got) {
  throw ConfigError(std::string("unknown ") + what + ": \"" + got + "\"");
}

}  // namespace

std::string to_string(MediaKind k) {
  switch (k) {
    case MediaKind::Audio: return "audio";
    case MediaKind::Image: return "image";
    case MediaKind::Video: return "video";
  }
  return "audio";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Confirmed: return "CONFIRMED";
    case Verdict::Blurred: return "BLURRED";
    case Verdict::Uncertain: return "UNCERTAIN";
  }
  return "UNCERTAIN";
}

std::string to_string(QualityFlag f) {
  switch (f) {
    case QualityFlag::EmptyThink: return "EMPTY_THINK";
    case QualityFlag::AllUncertain: return "ALL_UNCERTAIN";
    case QualityFlag::JudgeFallback: return "JUDGE_FALLBACK";
  }
  return "JUDGE_FALLBACK";
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::Wer: return "WER";
    case Metric::WerStar: return "WER_STAR";
    case Metric::Cer: return "CER";
    case Metric::TokenF1: return "TOKEN_F1";
    case Metric::Accuracy: return "ACCURACY";
    case Metric::Consistency: return "CONSISTENCY";
  }
  return "WER";
}

std::string to_string(DurationBucket b) {
  switch (b) {
    case DurationBucket::Short: return "SHORT";
    case DurationBucket::Mid: return "MID";
    case DurationBucket::Long: return "LONG";
  }
  return "SHORT";
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::Raw: return "RAW";
    case Stage::Candidates: return "CANDIDATES";
    case Stage::Silver: return "SILVER";
    case Stage::Eval: return "EVAL";
  }
  return "RAW";
}

MediaKind media_kind_from(const std::string& s) {
  if (s == "audio") return MediaKind::Audio;
  if (s == "image") return MediaKind::Image;
  if (s == "video") return MediaKind::Video;
  bad_enum("media kind", s);
}

Verdict verdict_from(const std::string& s) {
  if (s == "CONFIRMED") return Verdict::Confirmed;
  if (s == "BLURRED") return Verdict::Blurred;
  if (s == "UNCERTAIN") return Verdict::Uncertain;
  bad_enum("verdict", s);
}

QualityFlag quality_flag_from(const std::string& s) {
  if (s == "EMPTY_THINK") return QualityFlag::EmptyThink;
  if (s == "ALL_UNCERTAIN") return QualityFlag::AllUncertain;
  if (s == "JUDGE_FALLBACK") return QualityFlag::JudgeFallback;
  bad_enum("quality flag", s);
}

Metric metric_from(const std::string& s) {
  if (s == "WER") return Metric::Wer;
  if (s == "WER_STAR") return Metric::WerStar;
  if (s == "CER") return Metric::Cer;
  if (s == "TOKEN_F1") return Metric::TokenF1;
  if (s == "ACCURACY") return Metric::Accuracy;
  if (s == "CONSISTENCY") return Metric::Consistency;
  bad_enum("metric", s);
}

DurationBucket bucket_from(const std::string& s) {
  if (s == "SHORT") return DurationBucket::Short;
  if (s == "MID") return DurationBucket::Mid;
  if (s == "LONG") return DurationBucket::Long;
  bad_enum("duration bucket", s);
}

Stage stage_from(const std::string& s) {
  if (s == "RAW") return Stage::Raw;
  if (s == "CANDIDATES") return Stage::Candidates;
  if (s == "SILVER") return Stage::Silver;
  if (s == "EVAL") return Stage::Eval;
  bad_enum("stage", s);
}

double wer(const AlignmentCounts& c) {
  return static_cast<double>(c.substitutions + c.deletions + c.insertions) /
         static_cast<double>(c.ref_len);
}

double wer_star(const AlignmentCounts& c) {
  return static_cast<double>(c.substitutions + c.deletions) /
         static_cast<double>(c.ref_len);
}

std::vector<std::string> validate_sample(const RawSample& s) {
  std::vector<std::string> violations;
  if (s.id.empty()) violations.push_back("id empty");
  if (s.audio_duration_s.has_value() && *s.audio_duration_s < 0) {
    violations.push_back("negative duration");
  }
  for (const auto& m : s.media) {
    if (m.uri.empty()) violations.push_back("media uri empty");
  }
  return violations;
}

void to_json(json& j, const MediaRef& m) {
  j = json{{"kind", to_string(m.kind)}, {"uri", m.uri}};
}

void from_json(const json& j, MediaRef& m) {
  m.kind = media_kind_from(j.at("kind").get<std::string>());
  j.at("uri").get_to(m.uri);
}

void to_json(json& j, const RawSample& s) {
  j = json{{"id", s.id},
           {"prompt", s.prompt},
           {"media", s.media},
           {"language", s.language}};
  put_optional(j, "gold_answer", s.gold_answer);
  put_optional(j, "audio_duration_s", s.audio_duration_s);
}

void from_json(const json& j, RawSample& s) {
  j.at("id").get_to(s.id);
  j.at("prompt").get_to(s.prompt);
  s.media = j.value("media", std::vector<MediaRef>{});
  s.language = j.value("language", std::string{});
  get_optional(j, "gold_answer", s.gold_answer);
  get_optional(j, "audio_duration_s", s.audio_duration_s);
}

void to_json(json& j, const CandidatePath& c) {
  j = json{{"index", c.index},
           {"raw_text", c.raw_text},
           {"answer", c.answer},
           {"est_length_tokens", c.est_length_tokens},
           {"temperature", c.temperature},
           {"seed", c.seed}};
  put_optional(j, "think", c.think);
}

void from_json(const json& j, CandidatePath& c) {
  j.at("index").get_to(c.index);
  j.at("raw_text").get_to(c.raw_text);
  j.at("answer").get_to(c.answer);
  j.at("est_length_tokens").get_to(c.est_length_tokens);
  j.at("temperature").get_to(c.temperature);
  j.at("seed").get_to(c.seed);
  get_optional(j, "think", c.think);
}

void to_json(json& j, const ClaimVerdict& v) {
  j = json{{"claim_text", v.claim_text},
           {"supporting_indices", v.supporting_indices},
           {"verdict", to_string(v.verdict)},
           {"replacement_text", v.replacement_text}};
}

void from_json(const json& j, ClaimVerdict& v) {
  j.at("claim_text").get_to(v.claim_text);
  j.at("supporting_indices").get_to(v.supporting_indices);
  v.verdict = verdict_from(j.at("verdict").get<std::string>());
  j.at("replacement_text").get_to(v.replacement_text);
}

void to_json(json& j, const SilverRecord& r) {
  std::vector<std::string> flags;
  for (QualityFlag f : r.quality_flags) flags.push_back(to_string(f));
  j = json{{"sample_id", r.sample_id},
           {"think_block", r.think_block},
           {"final_answer", r.final_answer},
           {"verdicts", r.verdicts},
           {"k_used", r.k_used},
           {"judge_model", r.judge_model},
           {"created_at", r.created_at},
           {"quality_flags", flags},
           // Derived: the training target with exactly one delimiter pair.
           {"target_text", delim::inject(r.think_block, r.final_answer)}};
}

void from_json(const json& j, SilverRecord& r) {
  j.at("sample_id").get_to(r.sample_id);
  j.at("think_block").get_to(r.think_block);
  j.at("final_answer").get_to(r.final_answer);
  j.at("verdicts").get_to(r.verdicts);
  j.at("k_used").get_to(r.k_used);
  j.at("judge_model").get_to(r.judge_model);
  j.at("created_at").get_to(r.created_at);
  r.quality_flags.clear();
  for (const auto& f : j.at("quality_flags")) {
    r.quality_flags.insert(quality_flag_from(f.get<std::string>()));
  }
}

void to_json(json& j, const AlignmentCounts& c) {
  j = json{{"substitutions", c.substitutions},
           {"deletions", c.deletions},
           {"insertions", c.insertions},
           {"ref_len", c.ref_len}};
}

void from_json(const json& j, AlignmentCounts& c) {
  j.at("substitutions").get_to(c.substitutions);
  j.at("deletions").get_to(c.deletions);
  j.at("insertions").get_to(c.insertions);
  j.at("ref_len").get_to(c.ref_len);
}

void to_json(json& j, const EvalRow& r) {
  j = json{{"sample_id", r.sample_id},
           {"system", r.system},
           {"metric", to_string(r.metric)},
           {"value", r.value}};
  if (r.duration_bucket) j["duration_bucket"] = to_string(*r.duration_bucket);
  put_optional(j, "reasoning_length_tokens", r.reasoning_length_tokens);
  put_optional(j, "drift_flag", r.drift_flag);
  put_optional(j, "audio_duration_s", r.audio_duration_s);
}

void from_json(const json& j, EvalRow& r) {
  j.at("sample_id").get_to(r.sample_id);
  j.at("system").get_to(r.system);
  r.metric = metric_from(j.at("metric").get<std::string>());
  j.at("value").get_to(r.value);
  if (j.contains("duration_bucket") && !j.at("duration_bucket").is_null()) {
    r.duration_bucket = bucket_from(j.at("duration_bucket").get<std::string>());
  } else {
    r.duration_bucket.reset();
  }
  get_optional(j, "reasoning_length_tokens", r.reasoning_length_tokens);
  get_optional(j, "drift_flag", r.drift_flag);
  get_optional(j, "audio_duration_s", r.audio_duration_s);
}

void to_json(json& j, const CurriculumShard& s) {
  j = json{{"stage", s.stage},
           {"length_bound", s.length_bound},
           {"sample_ids", s.sample_ids}};
}

void from_json(const json& j, CurriculumShard& s) {
  j.at("stage").get_to(s.stage);
  j.at("length_bound").get_to(s.length_bound);
  j.at("sample_ids").get_to(s.sample_ids);
}

void to_json(json& j, const BackendConfig& c) {
  j = json{{"endpoint_url", c.endpoint_url},
           {"model_name", c.model_name},
           {"api_key_env_var_name", c.api_key_env_var_name},
           {"timeout_s", c.timeout_s},
           {"max_concurrency", c.max_concurrency},
           {"max_retries", c.max_retries},
           {"backoff_base_ms", c.backoff_base_ms}};
}

void from_json(const json& j, BackendConfig& c) {
  j.at("endpoint_url").get_to(c.endpoint_url);
  j.at("model_name").get_to(c.model_name);
  c.api_key_env_var_name = j.value("api_key_env_var_name", std::string{});
  c.timeout_s = j.value("timeout_s", 30.0);
  c.max_concurrency = j.value("max_concurrency", 4);
  c.max_retries = j.value("max_retries", 3);
  c.backoff_base_ms = j.value("backoff_base_ms", 100);
}

}  // namespace silverforge::model
