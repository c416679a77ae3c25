#pragma once
// Judge-driven refinement: claim extraction, consensus grouping, the
// blur-and-confirm adjudication rule, and silver-record assembly with
// reasoning-delimiter injection.
//
// The consensus core (group/adjudicate) is a deterministic surface-form
// rule so results are reproducible; judge calls layer rewrites on top and
// always degrade to deterministic fallbacks.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "silverforge/backend.hpp"
#include "silverforge/datamodel.hpp"
#include "silverforge/delimiters.hpp"

namespace silverforge::refinery {

// ---------------------------------------------------------------------------
// Claim algebra

// NFC, lowercase, collapse whitespace, strip terminal punctuation.
std::string normalize_claim(const std::string& raw);

struct ParsedClaim {
  std::string text;         // normalized claim
  std::string subject;      // e.g. "the car"
  std::string subject_key;  // subject minus leading articles: "car"
  std::string attribute;    // e.g. "red"; may be empty
};

// Splits a normalized claim at its first copula ("is/are/was/were"); when
// none is present the final token is the subject and the preceding tokens
// are the attribute ("blue hat" -> subject "hat", attribute "blue").
ParsedClaim parse_claim(const std::string& normalized);

struct JudgeExtraction {
  int candidate_index = 0;
  std::vector<std::string> claims;  // normalized
  bool fallback = false;  // judge output stayed malformed after one repair
};

struct ClaimClass {
  std::string attribute;
  std::string claim_text;  // lexicographically smallest member text
  std::set<int> support;   // candidate indices asserting this class
};

struct ClaimGroup {
  std::string subject_key;
  std::string subject;                  // representative surface subject
  std::vector<ClaimClass> classes;      // sorted by attribute
};

// Groups claims by normalized subject key; identical attribute strings form
// one equivalence class, differing attributes on one subject conflict.
std::vector<ClaimGroup> group_claims(const std::vector<JudgeExtraction>& extractions);

// ---------------------------------------------------------------------------
// Adjudication

// Attribute tokens that lost a consensus decision and must never reach the
// final record: tokens of losing classes minus tokens kept by winning
// classes minus tokens common to every class in the group.
std::vector<std::string> banned_tokens(const ClaimGroup& group,
                                       const std::vector<size_t>& winner_indices);

// One verdict for one group: CONFIRMED when the best-supported class holds
// a strict majority (> K/2) of the k surviving candidates, BLURRED when two
// or more classes conflict without a majority, UNCERTAIN for a lone
// unsupported class. blur_proposal, when given, is a judge-produced generic
// rewrite used as the BLURRED replacement if it avoids every banned token;
// the deterministic fallback strips the disputed attribute tokens instead.
model::ClaimVerdict adjudicate(const ClaimGroup& group, int k,
                               const std::optional<std::string>& blur_proposal =
                                   std::nullopt);

// Pipeline form: every majority class in the group becomes its own
// CONFIRMED verdict (minority classes are subsumed by the winners); with no
// majority the group collapses to the single BLURRED/UNCERTAIN verdict of
// adjudicate(). Also returns the group's banned tokens.
struct GroupDecision {
  std::vector<model::ClaimVerdict> verdicts;
  std::vector<std::string> banned;
};
GroupDecision adjudicate_group(const ClaimGroup& group, int k,
                               const std::optional<std::string>& blur_proposal =
                                   std::nullopt);

// ---------------------------------------------------------------------------
// Judge request builders (exposed so offline scenario tables can be keyed)

inline constexpr const char* kClaimsSentinel = "CLAIMS:";
inline constexpr const char* kExtractionRepair =
    "Your reply did not follow the required format. Reply with the header "
    "line \"CLAIMS:\" followed by one lowercase subject-attribute claim per "
    "line, and nothing else.";
inline constexpr const char* kRewriteRepair =
    "Your reply did not follow the required format. Reply with the rewritten "
    "paragraph only, using every given fact verbatim and no other sensory "
    "detail.";

backend::ChatRequest extraction_request(const std::string& candidate_text,
                                        const std::string& template_text);
backend::ChatRequest blur_request(const std::vector<std::string>& claims,
                                  const std::string& template_text);
backend::ChatRequest rewrite_request(const std::vector<std::string>& facts,
                                     const std::string& answer,
                                     const std::string& template_text);
// original + the judge's bad reply + a corrective user instruction.
backend::ChatRequest repair_request(const backend::ChatRequest& original,
                                    const std::string& bad_reply,
                                    const std::string& instruction);

// Parses a judge extraction reply: the sentinel header line, then one claim
// per line. Returns nullopt when the sentinel is missing (malformed).
std::optional<std::vector<std::string>> parse_extraction_reply(const std::string& reply);

// ---------------------------------------------------------------------------
// Pipeline steps

struct RefineParams {
  std::string extraction_template;
  std::string rewrite_template;
  std::string blur_template;
  std::string judge_model;
  int judge_max_tokens = 1024;
  // Fixed timestamp for reproducible runs (mock mode); empty = wall clock.
  std::string fixed_created_at;
};

// One judge extraction per candidate, with one repair re-prompt before
// falling back to an empty, fallback-flagged extraction.
std::vector<JudgeExtraction> extract_claims(
    const std::vector<model::CandidatePath>& candidates, backend::Backend& judge,
    const RefineParams& params);

// Majority answer string across candidates (ties break lexicographically).
std::string majority_answer(const std::vector<model::CandidatePath>& candidates);

// Judge-rewritten think block from confirmed facts and replacements, wrapped
// by delimiter injection; deterministic fact-concatenation fallback when the
// judge reply is unusable (JUDGE_FALLBACK). Sets EMPTY_THINK/ALL_UNCERTAIN.
model::SilverRecord assemble_silver(const model::RawSample& sample,
                                    const std::vector<model::CandidatePath>& candidates,
                                    const std::vector<model::ClaimVerdict>& verdicts,
                                    const std::vector<std::string>& banned,
                                    bool extraction_fallback, backend::Backend& judge,
                                    const RefineParams& params);

// extract -> group -> adjudicate (with judge blur proposals) -> assemble.
model::SilverRecord refine_sample(const model::RawSample& sample,
                                  const std::vector<model::CandidatePath>& candidates,
                                  backend::Backend& judge, const RefineParams& params);

}  // namespace silverforge::refinery
