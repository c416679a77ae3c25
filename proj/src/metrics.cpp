#include "silverforge/metrics.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include <unicode/uchar.h>

#include "silverforge/delimiters.hpp"
#include "silverforge/errors.hpp"
#include "silverforge/text.hpp"

namespace silverforge::metrics {
namespace {

// Unit-cost edit alignment with the pinned backtrace preference
// substitution > deletion > insertion.
template <typename T>
model::AlignmentCounts align_seq(const std::vector<T>& ref, const std::vector<T>& hyp) {
  if (ref.empty()) throw EmptyReference("alignment reference must be non-empty");
  const size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = 1; i <= n; ++i) dp[i][0] = static_cast<int>(i);
  for (size_t j = 1; j <= m; ++j) dp[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const int sub = dp[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const int del = dp[i - 1][j] + 1;
      const int ins = dp[i][j - 1] + 1;
      dp[i][j] = std::min({sub, del, ins});
    }
  }

  model::AlignmentCounts counts;
  counts.ref_len = static_cast<long>(n);
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const int cost = ref[i - 1] == hyp[j - 1] ? 0 : 1;
      if (dp[i][j] == dp[i - 1][j - 1] + cost) {
        counts.substitutions += cost;
        --i, --j;
        continue;
      }
    }
    if (i > 0 && dp[i][j] == dp[i - 1][j] + 1) {
      ++counts.deletions;
      --i;
      continue;
    }
    ++counts.insertions;
    --j;
  }
  return counts;
}

bool is_kept_joiner(char32_t cp) {
  return cp == U'\'' || cp == U'-' || cp == U'’';
}

std::vector<char32_t> chars_no_space(const std::string& normalized) {
  std::vector<char32_t> out;
  for (char32_t cp : text::decode_utf8(normalized)) {
    if (!text::is_space(cp)) out.push_back(cp);
  }
  return out;
}

std::map<std::string, long> token_counts(const std::vector<std::string>& tokens) {
  std::map<std::string, long> counts;
  for (const auto& t : tokens) ++counts[t];
  return counts;
}

// First standalone single-letter token, uppercased: the MCQA option letter.
std::optional<char> option_letter(const std::vector<std::string>& tokens) {
  for (const auto& t : tokens) {
    if (t.size() == 1 && t[0] >= 'a' && t[0] <= 'z') {
      return static_cast<char>(t[0] - 'a' + 'A');
    }
    if (t.size() == 1 && t[0] >= 'A' && t[0] <= 'Z') return t[0];
  }
  return std::nullopt;
}

std::optional<int> parse_score_line(const std::string& reply) {
  size_t start = 0;
  while (start <= reply.size()) {
    size_t nl = reply.find('\n', start);
    if (nl == std::string::npos) nl = reply.size();
    std::string line = text::trim(reply.substr(start, nl - start));
    if (line == "SCORE: 0") return 0;
    if (line == "SCORE: 1") return 1;
    start = nl + 1;
  }
  return std::nullopt;
}

}  // namespace

model::AlignmentCounts align(const std::vector<std::string>& ref_tokens,
                             const std::vector<std::string>& hyp_tokens) {
  return align_seq(ref_tokens, hyp_tokens);
}

NormPolicy norm_policy_from(const std::string& s) {
  if (s == "standard") return NormPolicy::Standard;
  if (s == "raw") return NormPolicy::Raw;
  throw ConfigError("unknown normalization policy: \"" + s + "\"");
}

std::vector<std::string> normalize_for_asr(const std::string& text_in,
                                           NormPolicy policy) {
  const std::string answer = delim::parse_lenient(text_in).second;
  if (policy == NormPolicy::Raw) {
    return text::split_ws(text::nfc(answer));
  }
  const std::string lowered = text::lower(text::nfc(answer));
  const auto cps = text::decode_utf8(lowered);
  std::string kept;
  for (size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (text::is_alnum(cp) || text::is_space(cp)) {
      text::append_utf8(kept, cp);
    } else if (is_kept_joiner(cp) && i > 0 && i + 1 < cps.size() &&
               text::is_alnum(cps[i - 1]) && text::is_alnum(cps[i + 1])) {
      text::append_utf8(kept, cp);  // intra-word apostrophe/hyphen survives
    }
  }
  return text::split_ws(kept);
}

std::pair<std::vector<std::string>, std::vector<std::string>> tokens_for_wer(
    const std::string& ref_text, const std::string& hyp_text, NormPolicy policy) {
  std::vector<std::string> ref = normalize_for_asr(ref_text, policy);
  std::vector<std::string> hyp = normalize_for_asr(hyp_text, policy);

  // Scriptio continua: an unspaced Han/Thai reference is scored per
  // character, whitespace tokens being meaningless there.
  if (ref.size() == 1) {
    long letters = 0, continua = 0;
    for (char32_t cp : text::decode_utf8(ref.front())) {
      if (!text::is_letter(cp)) continue;
      ++letters;
      const text::Script sc = text::script_of(cp);
      if (sc == text::Script::Han || sc == text::Script::Thai) ++continua;
    }
    if (letters > 0 && 2 * continua >= letters) {
      auto to_chars = [](const std::vector<std::string>& tokens) {
        std::vector<std::string> out;
        for (const auto& tok : tokens) {
          for (char32_t cp : text::decode_utf8(tok)) {
            std::string one;
            text::append_utf8(one, cp);
            out.push_back(std::move(one));
          }
        }
        return out;
      };
      return {to_chars(ref), to_chars(hyp)};
    }
  }
  return {std::move(ref), std::move(hyp)};
}

double cer(const std::string& ref_text, const std::string& hyp_text) {
  const auto ref = chars_no_space(text::nfc(delim::parse_lenient(ref_text).second));
  const auto hyp = chars_no_space(text::nfc(delim::parse_lenient(hyp_text).second));
  if (ref.empty()) throw EmptyReference("CER reference empty after normalization");
  const model::AlignmentCounts counts = align_seq(ref, hyp);
  return static_cast<double>(counts.substitutions + counts.deletions +
                             counts.insertions) /
         static_cast<double>(counts.ref_len);
}

double token_f1(const std::string& ref_text, const std::string& hyp_text) {
  const auto ref = normalize_for_asr(ref_text, NormPolicy::Standard);
  const auto hyp = normalize_for_asr(hyp_text, NormPolicy::Standard);
  if (ref.empty() && hyp.empty()) return 1.0;
  if (ref.empty() || hyp.empty()) return 0.0;

  const auto ref_counts = token_counts(ref);
  const auto hyp_counts = token_counts(hyp);
  long overlap = 0;
  for (const auto& [tok, count] : ref_counts) {
    auto it = hyp_counts.find(tok);
    if (it != hyp_counts.end()) overlap += std::min(count, it->second);
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(hyp.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

double accuracy(const std::string& ref_text, const std::string& hyp_text) {
  const auto ref = normalize_for_asr(ref_text, NormPolicy::Standard);
  const auto hyp = normalize_for_asr(hyp_text, NormPolicy::Standard);
  const auto ref_letter = option_letter(ref);
  const auto hyp_letter = option_letter(hyp);
  if (ref_letter && hyp_letter) return *ref_letter == *hyp_letter ? 1.0 : 0.0;
  return ref == hyp ? 1.0 : 0.0;
}

const char* const kConsistencyRepair =
    "Your reply did not follow the required format. Reply with exactly one "
    "line: \"SCORE: 1\" or \"SCORE: 0\".";

backend::ChatRequest consistency_request(const std::string& prediction,
                                         const std::string& gold) {
  backend::ChatRequest req;
  req.temperature = 0.0;
  req.messages.push_back(
      {backend::Role::User,
       "Judge whether the prediction is consistent with the ground-truth "
       "answer: same meaning, no contradiction, no missing key fact. Reply "
       "with exactly one line: \"SCORE: 1\" if consistent, \"SCORE: 0\" if "
       "not.\n\nGround truth: " +
           gold + "\nPrediction: " + prediction + "\n"});
  return req;
}

int consistency_score(const std::string& prediction, const std::string& gold,
                      backend::Backend& judge) {
  if (gold.empty()) throw ConfigError("consistency scoring requires a gold answer");
  backend::ChatRequest req = consistency_request(prediction, gold);
  const std::string reply = backend::complete_text(judge, req);
  if (auto score = parse_score_line(reply)) return *score;

  backend::ChatRequest repair = req;
  repair.messages.push_back({backend::Role::Assistant, reply});
  repair.messages.push_back({backend::Role::User, kConsistencyRepair});
  const std::string retry = backend::complete_text(judge, repair);
  if (auto score = parse_score_line(retry)) return *score;
  throw MalformedJudgeOutput("judge reply carried no SCORE line after repair: " +
                             retry.substr(0, 120));
}

double consistency_mean(const std::vector<std::string>& predictions,
                        const std::vector<std::string>& golds,
                        backend::Backend& judge) {
  if (predictions.size() != golds.size()) {
    throw ConfigError("prediction/gold count mismatch");
  }
  if (predictions.empty()) throw ConfigError("consistency mean over zero samples");
  long total = 0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    total += consistency_score(predictions[i], golds[i], judge);
  }
  return static_cast<double>(total) / static_cast<double>(predictions.size());
}

}  // namespace silverforge::metrics
