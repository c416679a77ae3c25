#include "silverforge/refinery.hpp"

#include <algorithm>
#include <map>

#include <unicode/uchar.h>

#include "silverforge/errors.hpp"
#include "silverforge/templates.hpp"
#include "silverforge/text.hpp"

namespace silverforge::refinery {
namespace {

const std::vector<std::string> kCopulas = {"is", "are", "was", "were"};
const std::vector<std::string> kArticles = {"a", "an", "the"};

bool is_copula(const std::string& tok) {
  return std::find(kCopulas.begin(), kCopulas.end(), tok) != kCopulas.end();
}

bool is_article(const std::string& tok) {
  return std::find(kArticles.begin(), kArticles.end(), tok) != kArticles.end();
}

std::string join(const std::vector<std::string>& tokens, size_t begin, size_t end) {
  std::string out;
  for (size_t i = begin; i < end && i < tokens.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += tokens[i];
  }
  return out;
}

// Token with surrounding punctuation stripped, for banned-word matching.
std::string bare_token(const std::string& tok) {
  auto cps = text::decode_utf8(tok);
  size_t b = 0, e = cps.size();
  while (b < e && u_ispunct(static_cast<UChar32>(cps[b]))) ++b;
  while (e > b && u_ispunct(static_cast<UChar32>(cps[e - 1]))) --e;
  return text::encode_utf8({cps.begin() + static_cast<long>(b),
                            cps.begin() + static_cast<long>(e)});
}

bool contains_banned_token(const std::string& text_any_case,
                           const std::set<std::string>& banned) {
  if (banned.empty()) return false;
  for (const auto& tok : text::split_ws(text::lower(text::nfc(text_any_case)))) {
    if (banned.count(bare_token(tok)) > 0) return true;
  }
  return false;
}

bool contains_delimiter_literal(const std::string& s) {
  return s.find(delim::kOpen) != std::string::npos ||
         s.find(delim::kClose) != std::string::npos;
}

std::set<std::string> attribute_tokens(const ClaimClass& c) {
  auto toks = text::split_ws(c.attribute);
  return {toks.begin(), toks.end()};
}

std::vector<std::string> strip_tokens(const std::string& claim_text,
                                      const std::set<std::string>& drop) {
  std::vector<std::string> kept;
  for (const auto& tok : text::split_ws(claim_text)) {
    if (drop.count(tok) == 0) kept.push_back(tok);
  }
  while (!kept.empty() && is_copula(kept.back())) kept.pop_back();
  return kept;
}

}  // namespace

std::string normalize_claim(const std::string& raw) {
  std::string s = text::collapse_ws(text::lower(text::nfc(raw)));
  auto cps = text::decode_utf8(s);
  size_t e = cps.size();
  while (e > 0 && u_ispunct(static_cast<UChar32>(cps[e - 1]))) --e;
  cps.resize(e);
  return text::trim(text::encode_utf8(cps));
}

ParsedClaim parse_claim(const std::string& normalized) {
  ParsedClaim out;
  out.text = normalized;
  auto tokens = text::split_ws(normalized);

  // "the car is red" -> subject "the car", attribute "red".
  for (size_t i = 1; i + 1 < tokens.size(); ++i) {
    if (is_copula(tokens[i])) {
      out.subject = join(tokens, 0, i);
      out.attribute = join(tokens, i + 1, tokens.size());
      break;
    }
  }
  // "blue hat" -> subject "hat", attribute "blue".
  if (out.subject.empty()) {
    size_t b = 0;
    while (b < tokens.size() && is_article(tokens[b])) ++b;
    if (tokens.size() - b >= 2) {
      out.subject = tokens.back();
      out.attribute = join(tokens, b, tokens.size() - 1);
    } else if (tokens.size() - b == 1) {
      out.subject = tokens[b];
    }
  }

  auto subj_tokens = text::split_ws(out.subject);
  size_t b = 0;
  while (b < subj_tokens.size() && is_article(subj_tokens[b])) ++b;
  out.subject_key = join(subj_tokens, b, subj_tokens.size());
  return out;
}

std::vector<ClaimGroup> group_claims(const std::vector<JudgeExtraction>& extractions) {
  struct GroupAcc {
    std::string subject;
    std::map<std::string, ClaimClass> classes;  // attribute -> class
  };
  std::map<std::string, GroupAcc> acc;  // subject_key -> group

  for (const auto& ext : extractions) {
    for (const auto& claim : ext.claims) {
      if (claim.empty() || contains_delimiter_literal(claim)) continue;
      ParsedClaim parsed = parse_claim(claim);
      if (parsed.subject_key.empty()) continue;
      GroupAcc& g = acc[parsed.subject_key];
      if (g.subject.empty() || parsed.subject < g.subject) g.subject = parsed.subject;
      ClaimClass& cls = g.classes[parsed.attribute];
      if (cls.claim_text.empty() || parsed.text < cls.claim_text) {
        cls.claim_text = parsed.text;
      }
      cls.attribute = parsed.attribute;
      cls.support.insert(ext.candidate_index);
    }
  }

  std::vector<ClaimGroup> out;
  for (auto& [key, g] : acc) {
    ClaimGroup group;
    group.subject_key = key;
    group.subject = g.subject;
    for (auto& [attr, cls] : g.classes) group.classes.push_back(std::move(cls));
    out.push_back(std::move(group));
  }
  return out;  // map iteration: groups sorted by subject_key, classes by attribute
}

std::vector<std::string> banned_tokens(const ClaimGroup& group,
                                       const std::vector<size_t>& winner_indices) {
  if (group.classes.size() < 2 && winner_indices.empty()) return {};

  std::set<std::string> shared;  // tokens common to every class
  std::set<std::string> winners_keep;
  std::set<std::string> losers_union;
  std::set<size_t> winners(winner_indices.begin(), winner_indices.end());

  for (size_t i = 0; i < group.classes.size(); ++i) {
    std::set<std::string> toks = attribute_tokens(group.classes[i]);
    if (i == 0) {
      shared = toks;
    } else {
      std::set<std::string> kept;
      for (const auto& t : shared) {
        if (toks.count(t)) kept.insert(t);
      }
      shared = std::move(kept);
    }
    auto& dst = winners.count(i) ? winners_keep : losers_union;
    dst.insert(toks.begin(), toks.end());
  }

  std::vector<std::string> banned;
  for (const auto& t : losers_union) {
    if (winners_keep.count(t) == 0 && shared.count(t) == 0) banned.push_back(t);
  }
  return banned;  // sorted: std::set iteration order
}

model::ClaimVerdict adjudicate(const ClaimGroup& group, int k,
                               const std::optional<std::string>& blur_proposal) {
  if (group.classes.empty()) throw Error("adjudicate called on an empty group");

  const ClaimClass* best = &group.classes.front();
  for (const auto& cls : group.classes) {  // classes sorted by attribute: first wins ties
    if (cls.support.size() > best->support.size()) best = &cls;
  }

  model::ClaimVerdict v;
  if (2 * static_cast<long>(best->support.size()) > k) {
    v.verdict = model::Verdict::Confirmed;
    v.claim_text = best->claim_text;
    v.replacement_text = best->claim_text;
    v.supporting_indices = best->support;
    return v;
  }

  if (group.classes.size() >= 2) {
    // The disputed member texts must never reach the record, so the stored
    // claim is the uncertainty marker and the replacement carries the
    // attribute-free rewrite.
    v.verdict = model::Verdict::Blurred;
    v.claim_text = "uncertain: " + group.subject_key;
    std::string basis;  // lexicographically smallest member text
    for (const auto& cls : group.classes) {
      if (basis.empty() || cls.claim_text < basis) basis = cls.claim_text;
      v.supporting_indices.insert(cls.support.begin(), cls.support.end());
    }
    auto banned_vec = banned_tokens(group, {});
    std::set<std::string> banned(banned_vec.begin(), banned_vec.end());

    if (blur_proposal) {
      std::string proposed = normalize_claim(*blur_proposal);
      if (!proposed.empty() && proposed != v.claim_text &&
          !contains_banned_token(proposed, banned) &&
          !contains_delimiter_literal(proposed)) {
        v.replacement_text = proposed;
        return v;
      }
    }
    std::string stripped = join(strip_tokens(basis, banned), 0, SIZE_MAX);
    v.replacement_text =
        stripped.empty() ? "uncertain: " + group.subject_key : stripped;
    return v;
  }

  v.verdict = model::Verdict::Uncertain;
  v.claim_text = best->claim_text;
  v.replacement_text = "uncertain: " + group.subject_key;
  v.supporting_indices = best->support;
  return v;
}

GroupDecision adjudicate_group(const ClaimGroup& group, int k,
                               const std::optional<std::string>& blur_proposal) {
  GroupDecision out;
  std::vector<size_t> winners;
  for (size_t i = 0; i < group.classes.size(); ++i) {
    if (2 * static_cast<long>(group.classes[i].support.size()) > k) winners.push_back(i);
  }
  if (!winners.empty()) {
    for (size_t i : winners) {
      const ClaimClass& cls = group.classes[i];
      model::ClaimVerdict v;
      v.verdict = model::Verdict::Confirmed;
      v.claim_text = cls.claim_text;
      v.replacement_text = cls.claim_text;
      v.supporting_indices = cls.support;
      out.verdicts.push_back(std::move(v));
    }
    out.banned = banned_tokens(group, winners);
    return out;
  }
  out.verdicts.push_back(adjudicate(group, k, blur_proposal));
  if (group.classes.size() >= 2) out.banned = banned_tokens(group, {});
  return out;
}

backend::ChatRequest extraction_request(const std::string& candidate_text,
                                        const std::string& template_text) {
  backend::ChatRequest req;
  req.temperature = 0.0;
  req.messages.push_back(
      {backend::Role::User,
       tpl::render(template_text, {{"candidate", candidate_text}}, {"candidate"})});
  return req;
}

backend::ChatRequest blur_request(const std::vector<std::string>& claims,
                                  const std::string& template_text) {
  std::string listed;
  for (const auto& c : claims) listed += "- " + c + "\n";
  backend::ChatRequest req;
  req.temperature = 0.0;
  req.messages.push_back(
      {backend::Role::User,
       tpl::render(template_text, {{"claims", listed}}, {"claims"})});
  return req;
}

backend::ChatRequest rewrite_request(const std::vector<std::string>& facts,
                                     const std::string& answer,
                                     const std::string& template_text) {
  std::string listed;
  for (const auto& f : facts) listed += "- " + f + "\n";
  backend::ChatRequest req;
  req.temperature = 0.0;
  req.messages.push_back(
      {backend::Role::User,
       tpl::render(template_text, {{"facts", listed}, {"answer", answer}},
                   {"facts", "answer"})});
  return req;
}

backend::ChatRequest repair_request(const backend::ChatRequest& original,
                                    const std::string& bad_reply,
                                    const std::string& instruction) {
  backend::ChatRequest req = original;
  req.messages.push_back({backend::Role::Assistant, bad_reply});
  req.messages.push_back({backend::Role::User, instruction});
  return req;
}

std::optional<std::vector<std::string>> parse_extraction_reply(const std::string& reply) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start <= reply.size()) {
    size_t nl = reply.find('\n', start);
    if (nl == std::string::npos) nl = reply.size();
    lines.push_back(reply.substr(start, nl - start));
    start = nl + 1;
  }
  size_t header = lines.size();
  for (size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]) == kClaimsSentinel) {
      header = i;
      break;
    }
  }
  if (header == lines.size()) return std::nullopt;

  std::vector<std::string> claims;
  for (size_t i = header + 1; i < lines.size(); ++i) {
    std::string t = text::trim(lines[i]);
    if (!t.empty()) claims.push_back(t);
  }
  return claims;
}

std::vector<JudgeExtraction> extract_claims(
    const std::vector<model::CandidatePath>& candidates, backend::Backend& judge,
    const RefineParams& params) {
  if (candidates.size() < 2) throw Error("claim extraction needs >= 2 candidates");

  std::vector<JudgeExtraction> out;
  out.reserve(candidates.size());
  for (const auto& cand : candidates) {
    JudgeExtraction ext;
    ext.candidate_index = cand.index;

    backend::ChatRequest req =
        extraction_request(cand.raw_text, params.extraction_template);
    req.max_tokens = params.judge_max_tokens;

    std::optional<std::vector<std::string>> raw_claims;
    backend::Completion c = judge.complete(req);
    if (c.ok) {
      raw_claims = parse_extraction_reply(c.text);
      if (!raw_claims) {  // one repair re-prompt, then fall back
        backend::ChatRequest repair = repair_request(req, c.text, kExtractionRepair);
        repair.max_tokens = params.judge_max_tokens;
        backend::Completion c2 = judge.complete(repair);
        if (c2.ok) raw_claims = parse_extraction_reply(c2.text);
      }
    }

    if (raw_claims) {
      for (const auto& raw : *raw_claims) {
        std::string norm = normalize_claim(raw);
        if (!norm.empty() && !contains_delimiter_literal(norm)) {
          ext.claims.push_back(std::move(norm));
        }
      }
    } else {
      ext.fallback = true;
    }
    out.push_back(std::move(ext));
  }
  return out;
}

std::string majority_answer(const std::vector<model::CandidatePath>& candidates) {
  std::map<std::string, int> counts;
  for (const auto& c : candidates) ++counts[text::trim(c.answer)];
  std::string best;
  int best_count = -1;
  for (const auto& [answer, count] : counts) {  // sorted: lexicographic tie-break
    if (count > best_count) {
      best = answer;
      best_count = count;
    }
  }
  return best;
}

model::SilverRecord assemble_silver(const model::RawSample& sample,
                                    const std::vector<model::CandidatePath>& candidates,
                                    const std::vector<model::ClaimVerdict>& verdicts,
                                    const std::vector<std::string>& banned,
                                    bool prior_fallback, backend::Backend& judge,
                                    const RefineParams& params) {
  const std::set<std::string> banned_set(banned.begin(), banned.end());
  bool judge_fallback = prior_fallback;

  std::vector<std::string> facts;
  for (const auto& v : verdicts) {
    facts.push_back(v.verdict == model::Verdict::Confirmed ? v.claim_text
                                                           : v.replacement_text);
  }
  std::string answer = majority_answer(candidates);

  auto rewrite_valid = [&](const std::string& reply) {
    std::string t = text::trim(reply);
    if (t.empty() || contains_delimiter_literal(t)) return false;
    if (contains_banned_token(t, banned_set)) return false;
    std::string norm = text::collapse_ws(text::lower(text::nfc(t)));
    for (const auto& f : facts) {
      if (norm.find(f) == std::string::npos) return false;
    }
    return true;
  };

  std::string think;
  if (!facts.empty()) {
    backend::ChatRequest req =
        rewrite_request(facts, answer, params.rewrite_template);
    req.max_tokens = params.judge_max_tokens;
    bool ok = false;
    backend::Completion c = judge.complete(req);
    if (c.ok && rewrite_valid(c.text)) {
      think = text::trim(c.text);
      ok = true;
    } else if (c.ok) {  // one repair re-prompt
      backend::ChatRequest repair = repair_request(req, c.text, kRewriteRepair);
      repair.max_tokens = params.judge_max_tokens;
      backend::Completion c2 = judge.complete(repair);
      if (c2.ok && rewrite_valid(c2.text)) {
        think = text::trim(c2.text);
        ok = true;
      }
    }
    if (!ok) {  // deterministic fallback: the facts, joined as sentences
      judge_fallback = true;
      for (const auto& f : facts) {
        if (!think.empty()) think += ' ';
        think += f + ".";
      }
    }
  }

  // The final answer must not leak a detail the consensus rejected.
  std::vector<std::string> kept;
  for (const auto& tok : text::split_ws(answer)) {
    if (banned_set.count(bare_token(text::lower(text::nfc(tok)))) == 0) {
      kept.push_back(tok);
    }
  }
  std::string final_answer = join(kept, 0, SIZE_MAX);
  if (final_answer.empty()) final_answer = "uncertain";

  model::SilverRecord rec;
  rec.sample_id = sample.id;
  rec.think_block = think;
  rec.final_answer = final_answer;
  rec.verdicts = verdicts;
  rec.k_used = static_cast<int>(candidates.size());
  rec.judge_model = params.judge_model;
  rec.created_at = params.fixed_created_at.empty() ? text::now_rfc3339_utc()
                                                   : params.fixed_created_at;
  if (rec.think_block.empty()) rec.quality_flags.insert(model::QualityFlag::EmptyThink);
  bool any_confirmed = false;
  for (const auto& v : verdicts) {
    any_confirmed |= v.verdict == model::Verdict::Confirmed;
  }
  if (!verdicts.empty() && !any_confirmed) {
    rec.quality_flags.insert(model::QualityFlag::AllUncertain);
  }
  if (judge_fallback) rec.quality_flags.insert(model::QualityFlag::JudgeFallback);
  return rec;
}

model::SilverRecord refine_sample(const model::RawSample& sample,
                                  const std::vector<model::CandidatePath>& candidates,
                                  backend::Backend& judge, const RefineParams& params) {
  std::vector<JudgeExtraction> extractions = extract_claims(candidates, judge, params);
  bool fallback = false;
  for (const auto& e : extractions) fallback |= e.fallback;

  const int k = static_cast<int>(candidates.size());
  std::vector<model::ClaimVerdict> verdicts;
  std::vector<std::string> banned;

  for (const ClaimGroup& group : group_claims(extractions)) {
    bool has_majority = false;
    for (const auto& cls : group.classes) {
      has_majority |= 2 * static_cast<long>(cls.support.size()) > k;
    }

    std::optional<std::string> proposal;
    if (!has_majority && group.classes.size() >= 2) {
      std::vector<std::string> conflicting;
      for (const auto& cls : group.classes) conflicting.push_back(cls.claim_text);
      backend::ChatRequest req = blur_request(conflicting, params.blur_template);
      req.max_tokens = params.judge_max_tokens;
      backend::Completion c = judge.complete(req);
      if (c.ok) proposal = c.text;
    }

    GroupDecision decision = adjudicate_group(group, k, proposal);
    if (!has_majority && group.classes.size() >= 2) {
      const auto& blurred = decision.verdicts.front();
      bool used_proposal = proposal &&
                           blurred.replacement_text == normalize_claim(*proposal);
      fallback |= !used_proposal;
    }
    for (auto& v : decision.verdicts) verdicts.push_back(std::move(v));
    banned.insert(banned.end(), decision.banned.begin(), decision.banned.end());
  }

  std::sort(banned.begin(), banned.end());
  banned.erase(std::unique(banned.begin(), banned.end()), banned.end());
  return assemble_silver(sample, candidates, verdicts, banned, fallback, judge, params);
}

}  // namespace silverforge::refinery
