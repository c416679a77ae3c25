#pragma once
// Diagnostic analyses: duration-bucketed drift comparison between two
// systems, reasoning-length-vs-accuracy regression, anchor-token counting,
// and the language-drift ablation for ASR scoring.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "silverforge/datamodel.hpp"
#include "silverforge/metrics.hpp"

namespace silverforge::diag {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Temporal drift

struct BucketStat {
  long count_a = 0;
  long count_b = 0;
  double mean_a = 0.0;  // meaningful only when count_a > 0
  double mean_b = 0.0;
  double delta = 0.0;   // mean_b - mean_a, when both sides present
  bool complete = false;  // both systems present in this bucket
};

struct DriftReport {
  std::string system_a;
  std::string system_b;
  BucketStat buckets[3];  // indexed by DurationBucket: SHORT, MID, LONG
  long total_rows = 0;
  // true iff system_b >= system_a on SHORT and system_b < system_a on LONG.
  bool crossover_flag = false;
};

void to_json(json& j, const DriftReport& r);

// Half-open buckets [0, edge_short), [edge_short, edge_long), [edge_long, inf).
model::DurationBucket bucket_for(double duration_s, double edge_short = 10.0,
                                 double edge_long = 30.0);

// Every row must carry audio_duration_s (MissingDuration) and a system
// label equal to system_a or system_b; the rows must cover exactly these
// two labels (SystemCountError).
DriftReport bucket_by_duration(const std::vector<model::EvalRow>& rows,
                               const std::string& system_a,
                               const std::string& system_b,
                               double edge_short = 10.0, double edge_long = 30.0);

// Convenience: the two labels present in the rows, in lexicographic order.
DriftReport bucket_by_duration(const std::vector<model::EvalRow>& rows,
                               double edge_short = 10.0, double edge_long = 30.0);

// ---------------------------------------------------------------------------
// Reasoning-length slope

struct SlopeReport {
  double slope = 0.0;
  double intercept = 0.0;
  int sign = 0;  // -1, 0, +1
  long n = 0;
};

void to_json(json& j, const SlopeReport& r);

// Ordinary least squares of metric value on reasoning_length_tokens over
// rows that carry a length. Throws DegenerateData with fewer than two
// distinct lengths.
SlopeReport length_accuracy_slope(const std::vector<model::EvalRow>& rows);

// One regression per system label (the grouping key available on EvalRow).
std::map<std::string, SlopeReport> slope_by_system(
    const std::vector<model::EvalRow>& rows);

// ---------------------------------------------------------------------------
// Anchor tokens

struct AnchorLexicon {
  std::vector<std::string> terms;  // lowercase, unique, insertion order
  std::string source;              // "default" or the file path
};

// 11 colors + 8 shapes + 12 spatial terms.
AnchorLexicon default_lexicon();

// One lowercase term per line; '#' starts a comment. Duplicates collapse,
// order is preserved. Throws ConfigError when no terms remain.
AnchorLexicon load_lexicon(const std::string& path);

// Occurrences (with multiplicity) of lexicon terms among the normalized
// tokens of think block + answer.
long count_anchor_tokens(const std::string& text, const AnchorLexicon& lexicon);

struct AnchorReport {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double ratio = 0.0;  // mean_b / mean_a
};

void to_json(json& j, const AnchorReport& r);

// Ratio of per-sample mean anchor counts. Throws ConfigError on an empty
// side and ZeroBaseline when side a has mean zero.
AnchorReport anchor_ratio(const std::vector<std::string>& texts_a,
                          const std::vector<std::string>& texts_b,
                          const AnchorLexicon& lexicon);

// ---------------------------------------------------------------------------
// Language drift

struct LangVerdict {
  bool drifted = false;
  bool low_confidence = false;  // either side's language is undecided
  std::string ref_lang;  // "en" | "id_ms" | "vi" | "han" | "thai" | "tamil" | "unknown"
  std::string hyp_lang;
};

void to_json(json& j, const LangVerdict& v);

// Dominant language per text via Unicode-script histogram (Han, Thai and
// Tamil scripts are decisive at >= 50% of letters); Latin-script texts are
// decided by stop-word profile scores for en / id+ms / vi with a winning
// margin >= 0.2. drifted only when both sides are confident and differ.
LangVerdict detect_language_drift(const std::string& ref_text,
                                  const std::string& hyp_text);

struct DriftAblation {
  double wer_all = 0.0;
  double wer_filtered = 0.0;  // over non-drifted pairs only
  long drift_count = 0;
  long total = 0;
  double drift_pct = 0.0;
};

void to_json(json& j, const DriftAblation& a);

// Corpus WER (pooled error counts over pooled reference lengths) with and
// without language-drifted pairs. Throws ConfigError on zero pairs and
// AllDrifted when no pair survives the filter.
DriftAblation wer_excluding_drift(
    const std::vector<std::pair<std::string, std::string>>& ref_hyp_pairs,
    metrics::NormPolicy policy = metrics::NormPolicy::Standard);

}  // namespace silverforge::diag
