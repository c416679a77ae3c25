#pragma once
// Scoring primitives: minimal-edit alignment with a pinned deterministic
// decomposition, WER and the insertion-forgiving WER*, character error
// rate, multiset token-F1, exact-match accuracy, and judge-based binary
// consistency scoring.

#include <string>
#include <utility>
#include <vector>

#include "silverforge/backend.hpp"
#include "silverforge/datamodel.hpp"

namespace silverforge::metrics {

// Minimal-edit alignment by dynamic programming with unit costs. Among
// equal-cost paths the backtrace prefers substitution, then deletion, then
// insertion, so the (S, D, I) split is deterministic and insertions are
// never overstated (WER* stays conservative). Throws EmptyReference when
// ref is empty.
model::AlignmentCounts align(const std::vector<std::string>& ref_tokens,
                             const std::vector<std::string>& hyp_tokens);

enum class NormPolicy { Standard, Raw };

NormPolicy norm_policy_from(const std::string& s);  // "standard" | "raw"

// Tokenization for ASR scoring. Any think block is stripped first (text
// that fails delimiter parsing is scored whole). Standard: NFC, lowercase,
// punctuation removed except intra-word apostrophes/hyphens, whitespace
// split. Raw: NFC + whitespace split only.
std::vector<std::string> normalize_for_asr(const std::string& text, NormPolicy policy);

// Word tokens for a ref/hyp pair, falling back to per-character tokens when
// the reference is a single unspaced run of Han or Thai script (whitespace
// WER is meaningless in scriptio continua).
std::pair<std::vector<std::string>, std::vector<std::string>> tokens_for_wer(
    const std::string& ref_text, const std::string& hyp_text, NormPolicy policy);

// Character-level edit distance over NFC scalar values with spaces removed,
// divided by reference character count. Throws EmptyReference.
double cer(const std::string& ref_text, const std::string& hyp_text);

// Bag-of-tokens F1 with multiplicity; both empty -> 1.0, one empty -> 0.0.
double token_f1(const std::string& ref_text, const std::string& hyp_text);

// 1.0 when the extracted option letters match, else exact normalized string
// match; MCQA extraction is the first standalone A-Z letter token.
double accuracy(const std::string& ref_text, const std::string& hyp_text);

// Binary judge verdict: the judge must reply "SCORE: 0" or "SCORE: 1"; one
// repair re-prompt, then MalformedJudgeOutput. Gold must be non-empty.
int consistency_score(const std::string& prediction, const std::string& gold,
                      backend::Backend& judge);

// Request builders (exposed for offline scenario keying).
backend::ChatRequest consistency_request(const std::string& prediction,
                                         const std::string& gold);
extern const char* const kConsistencyRepair;

// Mean of per-sample binary scores.
double consistency_mean(const std::vector<std::string>& predictions,
                        const std::vector<std::string>& golds,
                        backend::Backend& judge);

}  // namespace silverforge::metrics
