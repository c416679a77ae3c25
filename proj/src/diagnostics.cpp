#include "silverforge/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "silverforge/delimiters.hpp"
#include "silverforge/errors.hpp"
#include "silverforge/text.hpp"

namespace silverforge::diag {
namespace {

const char* bucket_names[3] = {"SHORT", "MID", "LONG"};

// Small high-frequency word profiles; deliberately heuristic and
// dependency-free. id and ms share one cluster: their function words
// overlap too much to tell apart at this scale.
const std::set<std::string>& profile(const std::string& lang) {
  static const std::set<std::string> en = {
      "a",     "an",    "the",   "i",     "you",   "he",    "she",   "it",
      "we",    "they",  "is",    "are",   "was",   "were",  "be",    "been",
      "to",    "of",    "in",    "on",    "at",    "by",    "for",   "with",
      "and",   "or",    "but",   "not",   "no",    "yes",   "this",  "that",
      "these", "those", "my",    "your",  "his",   "her",   "its",   "our",
      "their", "do",    "does",  "did",   "have",  "has",   "had",   "will",
      "would", "can",   "could", "should", "like", "what",  "which", "who",
      "how",   "when",  "where", "why",   "there", "here",  "over",  "under",
      "after", "before", "every"};
  static const std::set<std::string> id_ms = {
      "saya",   "aku",    "kamu",  "anda",   "dia",    "ia",     "kami",
      "kita",   "mereka", "ini",   "itu",    "yang",   "dan",    "atau",
      "tidak",  "bukan",  "ada",   "akan",   "sudah",  "telah",  "belum",
      "bisa",   "boleh",  "harus", "mau",    "ingin",  "suka",   "makan",
      "minum",  "pergi",  "di",    "ke",     "dari",   "pada",   "untuk",
      "dengan", "dalam",  "adalah", "ialah", "jika",   "kalau",  "karena",
      "kerana", "tetapi", "tapi",  "juga",   "saja",   "sangat", "sekali",
      "setiap", "semua",  "banyak", "hari",  "pagi",   "malam"};
  static const std::set<std::string> vi = {
      "tôi",  "bạn",  "anh",  "chị",  "em",    "ông",  "bà",   "nó",
      "chúng", "là",  "của",  "và",   "hay",   "hoặc", "không", "có",
      "được", "bị",   "này",  "kia",  "đó",    "ở",    "tại",  "cho",
      "với",  "về",   "từ",   "đến",  "trong", "ngoài", "một", "hai",
      "nhiều", "ít",  "rất",  "quá",  "lắm",   "đã",   "đang", "sẽ",
      "vẫn",  "cũng", "chỉ",  "thì",  "mà",    "nếu",  "vì",   "nhưng",
      "người", "ngày", "đêm"};
  if (lang == "en") return en;
  if (lang == "id_ms") return id_ms;
  return vi;
}

// Dominant-language estimate for one text; "unknown" when undecided.
std::string estimate_language(const std::string& text_in) {
  const std::string normalized = text::lower(text::nfc(text_in));
  long letters = 0, han = 0, thai = 0, tamil = 0, latin = 0;
  for (char32_t cp : text::decode_utf8(normalized)) {
    if (!text::is_letter(cp)) continue;
    ++letters;
    switch (text::script_of(cp)) {
      case text::Script::Han: ++han; break;
      case text::Script::Thai: ++thai; break;
      case text::Script::Tamil: ++tamil; break;
      case text::Script::Latin: ++latin; break;
      case text::Script::Other: break;
    }
  }
  if (letters == 0) return "unknown";
  if (2 * han >= letters) return "han";
  if (2 * thai >= letters) return "thai";
  if (2 * tamil >= letters) return "tamil";
  if (2 * latin < letters) return "unknown";

  const auto tokens = text::split_ws(normalized);
  if (tokens.empty()) return "unknown";
  double best = -1.0, second = -1.0;
  std::string best_lang = "unknown";
  for (const char* lang : {"en", "id_ms", "vi"}) {
    long hits = 0;
    for (const auto& tok : tokens) {
      if (profile(lang).count(tok) > 0) ++hits;
    }
    const double score = static_cast<double>(hits) / static_cast<double>(tokens.size());
    if (score > best) {
      second = best;
      best = score;
      best_lang = lang;
    } else if (score > second) {
      second = score;
    }
  }
  if (best - second >= 0.2) return best_lang;
  return "unknown";
}

}  // namespace

void to_json(json& j, const DriftReport& r) {
  j = json{{"system_a", r.system_a},
           {"system_b", r.system_b},
           {"total_rows", r.total_rows},
           {"crossover_flag", r.crossover_flag}};
  for (int b = 0; b < 3; ++b) {
    const BucketStat& s = r.buckets[b];
    json stat{{"count_a", s.count_a}, {"count_b", s.count_b}, {"complete", s.complete}};
    if (s.count_a > 0) stat["mean_a"] = s.mean_a;
    if (s.count_b > 0) stat["mean_b"] = s.mean_b;
    if (s.complete) stat["delta"] = s.delta;
    j["buckets"][bucket_names[b]] = std::move(stat);
  }
}

model::DurationBucket bucket_for(double duration_s, double edge_short,
                                 double edge_long) {
  if (duration_s < edge_short) return model::DurationBucket::Short;
  if (duration_s < edge_long) return model::DurationBucket::Mid;
  return model::DurationBucket::Long;
}

DriftReport bucket_by_duration(const std::vector<model::EvalRow>& rows,
                               const std::string& system_a,
                               const std::string& system_b,
                               double edge_short, double edge_long) {
  if (system_a == system_b) throw SystemCountError("system labels must differ");
  DriftReport report;
  report.system_a = system_a;
  report.system_b = system_b;
  report.total_rows = static_cast<long>(rows.size());

  double sums[3][2] = {};
  long counts[3][2] = {};
  for (const auto& row : rows) {
    if (!row.audio_duration_s.has_value()) {
      throw MissingDuration("row " + row.sample_id + " has no audio_duration_s");
    }
    int side;
    if (row.system == system_a) {
      side = 0;
    } else if (row.system == system_b) {
      side = 1;
    } else {
      throw SystemCountError("unexpected system label \"" + row.system + "\"");
    }
    const int b =
        static_cast<int>(bucket_for(*row.audio_duration_s, edge_short, edge_long));
    sums[b][side] += row.value;
    counts[b][side] += 1;
  }

  for (int b = 0; b < 3; ++b) {
    BucketStat& s = report.buckets[b];
    s.count_a = counts[b][0];
    s.count_b = counts[b][1];
    if (s.count_a > 0) s.mean_a = sums[b][0] / static_cast<double>(s.count_a);
    if (s.count_b > 0) s.mean_b = sums[b][1] / static_cast<double>(s.count_b);
    s.complete = s.count_a > 0 && s.count_b > 0;
    if (s.complete) s.delta = s.mean_b - s.mean_a;
  }

  const BucketStat& s = report.buckets[0];
  const BucketStat& l = report.buckets[2];
  report.crossover_flag =
      s.complete && l.complete && s.mean_b >= s.mean_a && l.mean_b < l.mean_a;
  return report;
}

DriftReport bucket_by_duration(const std::vector<model::EvalRow>& rows,
                               double edge_short, double edge_long) {
  std::set<std::string> labels;
  for (const auto& row : rows) labels.insert(row.system);
  if (labels.size() != 2) {
    throw SystemCountError("expected exactly two system labels, found " +
                           std::to_string(labels.size()));
  }
  auto it = labels.begin();
  const std::string a = *it++;
  const std::string b = *it;
  return bucket_by_duration(rows, a, b, edge_short, edge_long);
}

void to_json(json& j, const SlopeReport& r) {
  j = json{{"slope", r.slope}, {"intercept", r.intercept}, {"sign", r.sign}, {"n", r.n}};
}

SlopeReport length_accuracy_slope(const std::vector<model::EvalRow>& rows) {
  std::vector<std::pair<double, double>> points;
  std::set<long> distinct;
  for (const auto& row : rows) {
    if (!row.reasoning_length_tokens.has_value()) continue;
    points.emplace_back(static_cast<double>(*row.reasoning_length_tokens), row.value);
    distinct.insert(*row.reasoning_length_tokens);
  }
  if (distinct.size() < 2) {
    throw DegenerateData("slope needs >= 2 distinct reasoning lengths, found " +
                         std::to_string(distinct.size()));
  }

  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& [x, y] : points) {
    mean_x += x;
    mean_y += y;
  }
  mean_x /= static_cast<double>(points.size());
  mean_y /= static_cast<double>(points.size());

  double num = 0.0, den = 0.0;
  for (const auto& [x, y] : points) {
    num += (x - mean_x) * (y - mean_y);
    den += (x - mean_x) * (x - mean_x);
  }

  SlopeReport report;
  report.slope = num / den;
  report.intercept = mean_y - report.slope * mean_x;
  report.sign = report.slope > 0 ? 1 : (report.slope < 0 ? -1 : 0);
  report.n = static_cast<long>(points.size());
  return report;
}

std::map<std::string, SlopeReport> slope_by_system(
    const std::vector<model::EvalRow>& rows) {
  std::map<std::string, std::vector<model::EvalRow>> groups;
  for (const auto& row : rows) groups[row.system].push_back(row);
  std::map<std::string, SlopeReport> out;
  for (const auto& [system, group] : groups) {
    out[system] = length_accuracy_slope(group);
  }
  return out;
}

AnchorLexicon default_lexicon() {
  AnchorLexicon lex;
  lex.source = "default";
  lex.terms = {
      // colors
      "red", "orange", "yellow", "green", "blue", "purple", "pink", "brown",
      "black", "white", "gray",
      // shapes
      "circle", "square", "triangle", "rectangle", "oval", "diamond", "star",
      "hexagon",
      // spatial
      "left", "right", "above", "below", "behind", "front", "inside",
      "outside", "near", "far", "between", "center"};
  return lex;
}

AnchorLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot open lexicon " + path);
  AnchorLexicon lex;
  lex.source = path;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (size_t hash = line.find('#'); hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    std::string term = text::lower(text::nfc(text::trim(line)));
    if (term.empty() || !seen.insert(term).second) continue;
    lex.terms.push_back(std::move(term));
  }
  if (lex.terms.empty()) throw ConfigError("lexicon " + path + " has no terms");
  return lex;
}

long count_anchor_tokens(const std::string& text_in, const AnchorLexicon& lexicon) {
  const std::set<std::string> terms(lexicon.terms.begin(), lexicon.terms.end());
  auto [think, answer] = delim::parse_lenient(text_in);
  long count = 0;
  for (const std::string* part : {&answer, think ? &*think : nullptr}) {
    if (part == nullptr) continue;
    for (const auto& tok : metrics::normalize_for_asr(*part, metrics::NormPolicy::Standard)) {
      if (terms.count(tok) > 0) ++count;
    }
  }
  return count;
}

void to_json(json& j, const AnchorReport& r) {
  j = json{{"mean_a", r.mean_a}, {"mean_b", r.mean_b}, {"ratio", r.ratio}};
}

AnchorReport anchor_ratio(const std::vector<std::string>& texts_a,
                          const std::vector<std::string>& texts_b,
                          const AnchorLexicon& lexicon) {
  if (texts_a.empty() || texts_b.empty()) {
    throw ConfigError("anchor ratio needs non-empty sample sets on both sides");
  }
  auto mean_count = [&](const std::vector<std::string>& texts) {
    long total = 0;
    for (const auto& t : texts) total += count_anchor_tokens(t, lexicon);
    return static_cast<double>(total) / static_cast<double>(texts.size());
  };
  AnchorReport report;
  report.mean_a = mean_count(texts_a);
  report.mean_b = mean_count(texts_b);
  if (report.mean_a == 0.0) {
    throw ZeroBaseline("baseline anchor mean is zero; ratio undefined");
  }
  report.ratio = report.mean_b / report.mean_a;
  return report;
}

void to_json(json& j, const LangVerdict& v) {
  j = json{{"drifted", v.drifted},
           {"low_confidence", v.low_confidence},
           {"ref_lang", v.ref_lang},
           {"hyp_lang", v.hyp_lang}};
}

LangVerdict detect_language_drift(const std::string& ref_text,
                                  const std::string& hyp_text) {
  LangVerdict v;
  v.ref_lang = estimate_language(ref_text);
  v.hyp_lang = estimate_language(hyp_text);
  v.low_confidence = v.ref_lang == "unknown" || v.hyp_lang == "unknown";
  v.drifted = !v.low_confidence && v.ref_lang != v.hyp_lang;
  return v;
}

void to_json(json& j, const DriftAblation& a) {
  j = json{{"wer_all", a.wer_all},
           {"wer_filtered", a.wer_filtered},
           {"drift_count", a.drift_count},
           {"total", a.total},
           {"drift_pct", a.drift_pct}};
}

DriftAblation wer_excluding_drift(
    const std::vector<std::pair<std::string, std::string>>& ref_hyp_pairs,
    metrics::NormPolicy policy) {
  if (ref_hyp_pairs.empty()) throw ConfigError("drift ablation needs >= 1 pair");

  DriftAblation ablation;
  ablation.total = static_cast<long>(ref_hyp_pairs.size());
  long err_all = 0, n_all = 0, err_clean = 0, n_clean = 0;
  for (const auto& [ref, hyp] : ref_hyp_pairs) {
    auto [ref_tokens, hyp_tokens] = metrics::tokens_for_wer(ref, hyp, policy);
    const model::AlignmentCounts counts = metrics::align(ref_tokens, hyp_tokens);
    const long errors = counts.substitutions + counts.deletions + counts.insertions;
    err_all += errors;
    n_all += counts.ref_len;
    if (detect_language_drift(ref, hyp).drifted) {
      ++ablation.drift_count;
    } else {
      err_clean += errors;
      n_clean += counts.ref_len;
    }
  }
  if (n_clean == 0) throw AllDrifted("every pair was language-drifted");

  ablation.wer_all = static_cast<double>(err_all) / static_cast<double>(n_all);
  ablation.wer_filtered = static_cast<double>(err_clean) / static_cast<double>(n_clean);
  ablation.drift_pct = 100.0 * static_cast<double>(ablation.drift_count) /
                       static_cast<double>(ablation.total);
  return ablation;
}

}  // namespace silverforge::diag
