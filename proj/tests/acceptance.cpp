// Acceptance suite: one self-contained check per shipping criterion, each
// reported as a single PASS/FAIL line. Unlike the unit suites these drive
// whole behaviors end to end (library + CLI binary) against independent
// oracles computed in this file.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>
#include <sys/wait.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "silverforge/backend.hpp"
#include "silverforge/curriculum.hpp"
#include "silverforge/datamodel.hpp"
#include "silverforge/delimiters.hpp"
#include "silverforge/diagnostics.hpp"
#include "silverforge/divergen.hpp"
#include "silverforge/errors.hpp"
#include "silverforge/metrics.hpp"
#include "silverforge/pipeline.hpp"
#include "silverforge/refinery.hpp"
#include "silverforge/store.hpp"
#include "silverforge/templates.hpp"

using namespace silverforge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Shared helpers

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args, const fs::path& cwd) {
  const std::string cmd =
      "cd '" + cwd.string() + "' && '" + SILVERFORGE_BIN + "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  RunResult r;
  if (!pipe) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

refinery::RefineParams default_refine_params() {
  refinery::RefineParams p;
  p.extraction_template = tpl::default_text("judge_extraction");
  p.rewrite_template = tpl::default_text("judge_rewrite");
  p.blur_template = tpl::default_text("judge_blur");
  p.judge_model = "judge";
  p.fixed_created_at = pipeline::kFixedTimestamp;
  return p;
}

model::CandidatePath make_path(int index, std::string raw_text, std::string answer) {
  model::CandidatePath p;
  p.index = index;
  p.raw_text = std::move(raw_text);
  p.answer = std::move(answer);
  return p;
}

// Independent token edit distance (plain Wagner-Fischer, no backtrace).
long edit_distance(const std::vector<std::string>& a,
                   const std::vector<std::string>& b, std::vector<long>& prev,
                   std::vector<long>& cur) {
  prev.assign(b.size() + 1, 0);
  cur.assign(b.size() + 1, 0);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<long>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<long>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      const long sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// ---------------------------------------------------------------------------
// 1. Alignment decomposition vs an exhaustive independent oracle.

bool crit_alignment_oracle(std::string& why) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::string> alphabet = {"a", "b", "c"};

  std::vector<std::vector<std::vector<std::string>>> by_len(7);
  by_len[0] = {{}};
  for (size_t len = 1; len < by_len.size(); ++len) {
    for (const auto& shorter : by_len[len - 1]) {
      for (const auto& sym : alphabet) {
        auto seq = shorter;
        seq.push_back(sym);
        by_len[len].push_back(std::move(seq));
      }
    }
  }

  std::vector<long> prev, cur;
  long pairs = 0;
  for (size_t rl = 1; rl < by_len.size(); ++rl) {
    for (const auto& ref : by_len[rl]) {
      for (size_t hl = 0; hl < by_len.size(); ++hl) {
        for (const auto& hyp : by_len[hl]) {
          const auto c = metrics::align(ref, hyp);
          const long dist = edit_distance(ref, hyp, prev, cur);
          if (c.substitutions + c.deletions + c.insertions != dist ||
              c.ref_len != static_cast<long>(ref.size())) {
            why = "decomposition mismatch at ref_len=" + std::to_string(rl) +
                  " hyp_len=" + std::to_string(hl);
            return false;
          }
          ++pairs;
        }
      }
    }
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (pairs != 1092L * 1093L) {
    why = "enumerated " + std::to_string(pairs) + " pairs";
    return false;
  }
  if (secs > 60.0) {
    why = "took " + std::to_string(secs) + "s";
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 2. WER* identity and ordering on random pairs.

bool crit_wer_star_identity(std::string& why) {
  std::mt19937 rng(4242);
  const std::vector<std::string> alphabet = {"w0", "w1", "w2", "w3"};
  std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> ref_len(1, 8);
  std::uniform_int_distribution<int> hyp_len(0, 8);

  for (int iter = 0; iter < 1000; ++iter) {
    std::vector<std::string> ref, hyp;
    for (int i = ref_len(rng); i > 0; --i) ref.push_back(alphabet[pick(rng)]);
    for (int i = hyp_len(rng); i > 0; --i) hyp.push_back(alphabet[pick(rng)]);

    const auto c = metrics::align(ref, hyp);
    const double w = model::wer(c);
    const double ws = model::wer_star(c);
    const double expected_ws =
        static_cast<double>(c.substitutions + c.deletions) / c.ref_len;
    const double expected_w =
        static_cast<double>(c.substitutions + c.deletions + c.insertions) / c.ref_len;

    if (ws != expected_ws || w != expected_w) {
      why = "formula mismatch at iteration " + std::to_string(iter);
      return false;
    }
    if (ws > w) {
      why = "WER* exceeded WER at iteration " + std::to_string(iter);
      return false;
    }
    if ((w == ws) != (c.insertions == 0)) {
      why = "equality/insertion disagreement at iteration " + std::to_string(iter);
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 3. The worked insertion example: penalized by WER, forgiven by WER*.

bool crit_insertion_example(std::string& why) {
  const auto [ref, hyp] = metrics::tokens_for_wer("turn left", "please turn left",
                                                  metrics::NormPolicy::Standard);
  const auto c = metrics::align(ref, hyp);
  if (c.insertions != 1 || c.substitutions != 0 || c.deletions != 0 ||
      c.ref_len != 2) {
    why = "unexpected decomposition";
    return false;
  }
  if (model::wer(c) != 0.5 || model::wer_star(c) != 0.0) {
    why = "WER=" + std::to_string(model::wer(c)) +
          " WER*=" + std::to_string(model::wer_star(c));
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 4. Consensus refinement: majority claims confirmed, conflicts blurred
//    without leaking either disputed attribute into the record.

bool crit_consensus_refinement(std::string& why) {
  const auto params = default_refine_params();
  auto script = [](backend::MockBackend& judge, const backend::ChatRequest& req,
                   const std::string& reply) {
    judge.add_scenario(backend::MockBackend::key_for(req), reply);
  };

  // Majority: three paths say red, one says blue.
  {
    model::RawSample sample;
    sample.id = "car1";
    sample.prompt = "what color is the car";
    sample.language = "en";

    const std::string raw_red = "I watch the clip. The car is red.";
    const std::string raw_blue = "I watch the clip. The car is blue.";
    const std::vector<model::CandidatePath> paths = {
        make_path(0, raw_red, "red"), make_path(1, raw_red, "red"),
        make_path(2, raw_blue, "blue"), make_path(3, raw_red, "red")};

    backend::MockBackend judge;
    script(judge, refinery::extraction_request(raw_red, params.extraction_template),
           "CLAIMS:\nThe car is red.");
    script(judge, refinery::extraction_request(raw_blue, params.extraction_template),
           "CLAIMS:\nThe car is blue.");
    script(judge,
           refinery::rewrite_request({"the car is red"}, "red",
                                     params.rewrite_template),
           "I inspect the frame. The car is red.");

    const auto rec = refinery::refine_sample(sample, paths, judge, params);
    if (rec.verdicts.size() != 1 ||
        rec.verdicts[0].verdict != model::Verdict::Confirmed ||
        rec.verdicts[0].claim_text != "the car is red" ||
        rec.verdicts[0].supporting_indices != std::set<int>{0, 1, 3}) {
      why = "majority case: wrong verdict";
      return false;
    }
    if (rec.final_answer != "red" ||
        rec.think_block != "I inspect the frame. The car is red." ||
        !rec.quality_flags.empty()) {
      why = "majority case: wrong record body";
      return false;
    }
    if (json(rec).dump().find("blue") != std::string::npos) {
      why = "majority case: rejected attribute leaked";
      return false;
    }
  }

  // Even split: blue hat vs green hat must blur, and neither color may
  // appear anywhere in the serialized record.
  {
    model::RawSample sample;
    sample.id = "hat1";
    sample.prompt = "what is the person wearing";
    sample.language = "en";

    const std::string raw_blue = "There is a person. The person is wearing a blue hat.";
    const std::string raw_green =
        "There is a person. The person is wearing a green hat.";
    const std::vector<model::CandidatePath> paths = {
        make_path(0, raw_blue, "a hat"), make_path(1, raw_blue, "a hat"),
        make_path(2, raw_green, "a hat"), make_path(3, raw_green, "a hat")};

    backend::MockBackend judge;
    script(judge, refinery::extraction_request(raw_blue, params.extraction_template),
           "CLAIMS:\nThe person is wearing a blue hat.");
    script(judge, refinery::extraction_request(raw_green, params.extraction_template),
           "CLAIMS:\nThe person is wearing a green hat.");
    script(judge,
           refinery::blur_request({"the person is wearing a blue hat",
                                   "the person is wearing a green hat"},
                                  params.blur_template),
           "A person wearing a hat.");
    script(judge,
           refinery::rewrite_request({"a person wearing a hat"}, "a hat",
                                     params.rewrite_template),
           "There is a person wearing a hat.");

    const auto rec = refinery::refine_sample(sample, paths, judge, params);
    if (rec.verdicts.size() != 1 ||
        rec.verdicts[0].verdict != model::Verdict::Blurred ||
        rec.verdicts[0].replacement_text != "a person wearing a hat" ||
        rec.verdicts[0].supporting_indices != std::set<int>{0, 1, 2, 3}) {
      why = "conflict case: wrong blurred verdict";
      return false;
    }
    if (rec.final_answer != "a hat" ||
        rec.think_block != "There is a person wearing a hat.") {
      why = "conflict case: wrong record body";
      return false;
    }
    const std::string dumped = json(rec).dump();
    if (dumped.find("blue") != std::string::npos ||
        dumped.find("green") != std::string::npos) {
      why = "conflict case: disputed attribute leaked into the record";
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 5. Adjudication over every support pattern for K <= 5: correct by an
//    independent statement of the rule, invariant under index permutation,
//    and monotone in added support.

bool crit_adjudication_exhaustive(std::string& why) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string red_claim = "the car is red";
  const std::string blue_claim = "the car is blue";

  // assignment digit per path: 0 -> red claim, 1 -> blue claim, 2 -> silent
  auto extractions_for = [&](const std::vector<int>& assign) {
    std::vector<refinery::JudgeExtraction> exts;
    for (size_t i = 0; i < assign.size(); ++i) {
      refinery::JudgeExtraction e;
      e.candidate_index = static_cast<int>(i);
      if (assign[i] == 0) e.claims.push_back(red_claim);
      if (assign[i] == 1) e.claims.push_back(blue_claim);
      exts.push_back(std::move(e));
    }
    return exts;
  };

  auto decide = [&](const std::vector<int>& assign,
                    refinery::GroupDecision& out) -> bool {
    auto groups = refinery::group_claims(extractions_for(assign));
    if (groups.empty()) return false;
    out = refinery::adjudicate_group(groups[0],
                                     static_cast<int>(assign.size()));
    return true;
  };

  for (int k = 2; k <= 5; ++k) {
    std::vector<int> assign(static_cast<size_t>(k), 0);
    long masks = 1;
    for (int i = 0; i < k; ++i) masks *= 3;

    for (long mask = 0; mask < masks; ++mask) {
      long m = mask;
      int nr = 0, nb = 0;
      for (int i = 0; i < k; ++i) {
        assign[static_cast<size_t>(i)] = static_cast<int>(m % 3);
        m /= 3;
        if (assign[static_cast<size_t>(i)] == 0) ++nr;
        if (assign[static_cast<size_t>(i)] == 1) ++nb;
      }

      refinery::GroupDecision dec;
      const bool has_group = decide(assign, dec);
      if (nr == 0 && nb == 0) {
        if (has_group) {
          why = "k=" + std::to_string(k) + ": group materialized from no claims";
          return false;
        }
        continue;
      }
      if (!has_group) {
        why = "k=" + std::to_string(k) + ": group missing";
        return false;
      }

      // Independent statement of the rule.
      const bool red_wins = 2 * nr > k;
      const bool blue_wins = 2 * nb > k;
      bool rule_ok = true;
      if (red_wins || blue_wins) {
        rule_ok = dec.verdicts.size() == 1 &&
                  dec.verdicts[0].verdict == model::Verdict::Confirmed &&
                  dec.verdicts[0].claim_text ==
                      (red_wins ? red_claim : blue_claim) &&
                  dec.verdicts[0].supporting_indices.size() ==
                      static_cast<size_t>(red_wins ? nr : nb);
        const std::vector<std::string> expected_banned =
            (nr > 0 && nb > 0)
                ? std::vector<std::string>{red_wins ? "blue" : "red"}
                : std::vector<std::string>{};
        rule_ok = rule_ok && dec.banned == expected_banned;
      } else if (nr > 0 && nb > 0) {
        rule_ok = dec.verdicts.size() == 1 &&
                  dec.verdicts[0].verdict == model::Verdict::Blurred &&
                  dec.verdicts[0].claim_text == "uncertain: car" &&
                  dec.verdicts[0].replacement_text == "the car" &&
                  dec.verdicts[0].supporting_indices.size() ==
                      static_cast<size_t>(nr + nb) &&
                  dec.banned == std::vector<std::string>{"blue", "red"};
      } else {
        rule_ok = dec.verdicts.size() == 1 &&
                  dec.verdicts[0].verdict == model::Verdict::Uncertain &&
                  dec.verdicts[0].replacement_text == "uncertain: car" &&
                  dec.banned.empty();
      }
      if (!rule_ok) {
        why = "k=" + std::to_string(k) + " mask=" + std::to_string(mask) +
              ": verdict disagrees with the rule";
        return false;
      }

      // Permutation invariance over every relabeling of path indices.
      std::vector<int> perm(static_cast<size_t>(k));
      std::iota(perm.begin(), perm.end(), 0);
      do {
        std::vector<int> permuted(static_cast<size_t>(k));
        for (int i = 0; i < k; ++i) {
          permuted[static_cast<size_t>(perm[static_cast<size_t>(i)])] =
              assign[static_cast<size_t>(i)];
        }
        refinery::GroupDecision pdec;
        if (!decide(permuted, pdec) || pdec.verdicts.size() != dec.verdicts.size()) {
          why = "permutation changed the verdict count";
          return false;
        }
        for (size_t v = 0; v < dec.verdicts.size(); ++v) {
          std::set<int> mapped;
          for (int i : dec.verdicts[v].supporting_indices) {
            mapped.insert(perm[static_cast<size_t>(i)]);
          }
          if (pdec.verdicts[v].verdict != dec.verdicts[v].verdict ||
              pdec.verdicts[v].claim_text != dec.verdicts[v].claim_text ||
              pdec.verdicts[v].replacement_text != dec.verdicts[v].replacement_text ||
              pdec.verdicts[v].supporting_indices != mapped) {
            why = "permutation changed a verdict";
            return false;
          }
        }
        if (pdec.banned != dec.banned) {
          why = "permutation changed the banned set";
          return false;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));

      // Monotonicity: extra support never un-confirms a winner.
      if (red_wins) {
        for (int i = 0; i < k; ++i) {
          if (assign[static_cast<size_t>(i)] == 0) continue;
          auto grown = assign;
          grown[static_cast<size_t>(i)] = 0;
          refinery::GroupDecision gdec;
          if (!decide(grown, gdec) || gdec.verdicts.size() != 1 ||
              gdec.verdicts[0].verdict != model::Verdict::Confirmed ||
              gdec.verdicts[0].claim_text != red_claim ||
              gdec.verdicts[0].supporting_indices.size() !=
                  static_cast<size_t>(nr + 1)) {
            why = "adding support demoted a confirmed claim";
            return false;
          }
        }
      }
    }
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > 10.0) {
    why = "took " + std::to_string(secs) + "s";
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 6. Reasoning-delimiter round trip and malformed rejection.

bool crit_delimiter_round_trip(std::string& why) {
  std::mt19937 rng(9);
  const std::vector<std::string> pieces = {
      "a", "b", "c", "x", "y", "z", "0", "7", ".", ",", "!", "?",
      "-", " ", "\xC3\xA9", "\xC3\x9F", "\xE6\x97\xA5", "\xE0\xB8\x81"};
  std::uniform_int_distribution<size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> think_len(0, 40);
  std::uniform_int_distribution<int> answer_len(1, 20);

  for (int iter = 0; iter < 1000; ++iter) {
    std::string think, answer;
    for (int i = think_len(rng); i > 0; --i) think += pieces[pick(rng)];
    for (int i = answer_len(rng); i > 0; --i) answer += pieces[pick(rng)];

    const std::string wire = delim::inject(think, answer);
    const auto [parsed_think, parsed_answer] = delim::parse(wire);
    if (!parsed_think || *parsed_think != think || parsed_answer != answer) {
      why = "round trip diverged at iteration " + std::to_string(iter);
      return false;
    }
  }

  const auto [none, passthrough] = delim::parse("no markers at all");
  if (none || passthrough != "no markers at all") {
    why = "plain text did not pass through";
    return false;
  }

  const std::vector<std::string> malformed = {
      "<think>a",
      "a</think>",
      "</think>a<think>b",
      "<think>a</think>b<think>c</think>\nd",
      "x <think>a</think>\nb",
      "<think>a<think>b</think>\nc"};
  for (const auto& bad : malformed) {
    bool threw = false;
    try {
      (void)delim::parse(bad);
    } catch (const DelimiterError&) {
      threw = true;
    }
    if (!threw) {
      why = "malformed text accepted: " + bad;
      return false;
    }
    const auto [lt, lr] = delim::parse_lenient(bad);
    if (lt || lr != bad) {
      why = "lenient parse rewrote malformed text";
      return false;
    }
  }

  bool inject_guard = false;
  try {
    (void)delim::inject("has <think> inside", "a");
  } catch (const DelimiterError&) {
    inject_guard = true;
  }
  bool empty_guard = false;
  try {
    (void)delim::inject("fine", "");
  } catch (const DelimiterError&) {
    empty_guard = true;
  }
  if (!inject_guard || !empty_guard) {
    why = "injection accepted invalid segments";
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 7. Curriculum stages: exact partition, strict boundaries, stable order.

bool crit_curriculum_partition(std::string& why) {
  std::mt19937 rng(77);
  const std::vector<long> bounds = {4, 16, 64};

  for (int round = 0; round < 20; ++round) {
    std::vector<std::pair<std::string, long>> id_lengths;
    std::uniform_int_distribution<long> len(0, 99);
    for (int i = 0; i < 150; ++i) {
      id_lengths.emplace_back("r" + std::to_string(round) + "_" + std::to_string(i),
                              len(rng));
    }
    // Pin each boundary value explicitly.
    id_lengths.emplace_back("b4", 4);
    id_lengths.emplace_back("b16", 16);
    id_lengths.emplace_back("b64", 64);

    const auto shards = curriculum::build_stages(id_lengths, bounds);
    if (shards.size() != 4 || shards[0].length_bound != 4 ||
        shards[1].length_bound != 16 || shards[2].length_bound != 64 ||
        shards[3].length_bound != -1) {
      why = "wrong shard layout";
      return false;
    }

    std::map<std::string, long> len_of;
    std::map<std::string, size_t> pos_of;
    for (size_t i = 0; i < id_lengths.size(); ++i) {
      len_of[id_lengths[i].first] = id_lengths[i].second;
      pos_of[id_lengths[i].first] = i;
    }

    std::set<std::string> seen;
    for (size_t s = 0; s < shards.size(); ++s) {
      const long lo = s == 0 ? 0 : bounds[s - 1];
      const long hi = s < bounds.size() ? bounds[s] : -1;
      size_t last_pos = 0;
      bool first = true;
      for (const auto& id : shards[s].sample_ids) {
        if (!seen.insert(id).second) {
          why = "id assigned twice: " + id;
          return false;
        }
        const long l = len_of.at(id);
        if (l < lo || (hi != -1 && l >= hi)) {
          why = "length " + std::to_string(l) + " escaped stage " +
                std::to_string(s);
          return false;
        }
        const size_t pos = pos_of.at(id);
        if (!first && pos < last_pos) {
          why = "input order not preserved in stage " + std::to_string(s);
          return false;
        }
        last_pos = pos;
        first = false;
      }
    }
    if (seen.size() != id_lengths.size()) {
      why = "records dropped: " + std::to_string(seen.size()) + " of " +
            std::to_string(id_lengths.size());
      return false;
    }

    auto in_stage = [&](const std::string& id, size_t stage) {
      const auto& ids = shards[stage].sample_ids;
      return std::find(ids.begin(), ids.end(), id) != ids.end();
    };
    if (!in_stage("b4", 1) || !in_stage("b16", 2) || !in_stage("b64", 3)) {
      why = "boundary record landed below its bound";
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 8. Repeated pipeline runs through the CLI binary are byte-identical.

bool crit_pipeline_determinism(std::string& why) {
  const fs::path dir =
      fs::temp_directory_path() / ("sf_accept_pipeline_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::vector<std::string> colors = {"red", "blue", "green", "white"};

  divergen::GenParams gp;
  gp.k = 4;
  gp.base_temperature = 0.8;
  gp.max_tokens = 1024;
  gp.pipeline_seed = 5;
  gp.template_text = tpl::default_text("generation");
  const auto rp = default_refine_params();

  std::vector<json> raw_records;
  std::vector<std::pair<std::string, std::string>> scenarios;
  for (int i = 0; i < 10; ++i) {
    model::RawSample s;
    s.id = "s" + std::to_string(i);
    s.prompt = "what color is object " + std::to_string(i);
    s.language = "en";
    s.media = {{model::MediaKind::Audio, "aud://clip" + std::to_string(i)}};
    s.audio_duration_s = 3.5 + i;
    raw_records.emplace_back(s);

    const std::string& color = colors[static_cast<size_t>(i) % colors.size()];
    const std::string reply = "<think>I look at object " + std::to_string(i) +
                              ". The object is " + color + ".</think>\n" + color;
    for (int p = 0; p < gp.k; ++p) {
      scenarios.emplace_back(
          backend::MockBackend::key_for(divergen::request_for_path(s, gp, p)), reply);
    }
    scenarios.emplace_back(
        backend::MockBackend::key_for(
            refinery::extraction_request(reply, rp.extraction_template)),
        "CLAIMS:\nThe object is " + color + ".");
    scenarios.emplace_back(
        backend::MockBackend::key_for(refinery::rewrite_request(
            {"the object is " + color}, color, rp.rewrite_template)),
        "I look again. The object is " + color + ".");
  }
  store::write_stream(raw_records, dir / "raw.jsonl", model::Stage::Raw);
  backend::write_scenario_file(dir / "scen.jsonl", scenarios);

  std::vector<std::string> silver_bytes, cand_bytes;
  for (int run = 0; run < 3; ++run) {
    const std::string n = std::to_string(run);
    const auto r = run_cli("--mock scen.jsonl --seed 5 pipeline --in raw.jsonl "
                           "--out silver" + n + ".jsonl --candidates-out cand" +
                               n + ".jsonl",
                           dir);
    if (r.exit_code != 0) {
      why = "run " + n + " exited " + std::to_string(r.exit_code) + ": " + r.out;
      return false;
    }
    silver_bytes.push_back(slurp(dir / ("silver" + n + ".jsonl")));
    cand_bytes.push_back(slurp(dir / ("cand" + n + ".jsonl")));
  }

  if (silver_bytes[0].empty() || silver_bytes[0] != silver_bytes[1] ||
      silver_bytes[1] != silver_bytes[2]) {
    why = "silver outputs differ between runs";
    return false;
  }
  if (cand_bytes[0].empty() || cand_bytes[0] != cand_bytes[1] ||
      cand_bytes[1] != cand_bytes[2]) {
    why = "candidate outputs differ between runs";
    return false;
  }

  const auto records = store::read_silver(dir / "silver0.jsonl");
  if (records.size() != 10) {
    why = "expected 10 silver records, got " + std::to_string(records.size());
    return false;
  }
  for (size_t i = 0; i < records.size(); ++i) {
    const std::string& color = colors[i % colors.size()];
    if (records[i].created_at != pipeline::kFixedTimestamp ||
        records[i].final_answer != color || !records[i].quality_flags.empty() ||
        records[i].verdicts.size() != 1 ||
        records[i].verdicts[0].verdict != model::Verdict::Confirmed) {
      why = "record " + std::to_string(i) + " has unexpected content";
      return false;
    }
  }

  fs::remove_all(dir);
  return true;
}

// ---------------------------------------------------------------------------
// 9. Duration-bucket crossover detection.

bool crit_drift_crossover(std::string& why) {
  auto row = [](const std::string& id, const std::string& sys, double dur,
                double val) {
    model::EvalRow r;
    r.sample_id = id;
    r.system = sys;
    r.metric = model::Metric::Wer;
    r.value = val;
    r.audio_duration_s = dur;
    return r;
  };

  std::vector<model::EvalRow> rows = {
      row("a1", "base", 5.0, 0.30),  row("a2", "base", 6.0, 0.32),
      row("a3", "base", 45.0, 0.35), row("a4", "base", 46.0, 0.37),
      row("b1", "tuned", 5.0, 0.34), row("b2", "tuned", 6.0, 0.36),
      row("b3", "tuned", 45.0, 0.20), row("b4", "tuned", 46.0, 0.22)};

  const auto rep = diag::bucket_by_duration(rows, "base", "tuned");
  const int s = static_cast<int>(model::DurationBucket::Short);
  const int l = static_cast<int>(model::DurationBucket::Long);
  if (!rep.crossover_flag) {
    why = "crossover not detected";
    return false;
  }
  if (!rep.buckets[s].complete || !rep.buckets[l].complete ||
      std::fabs(rep.buckets[s].mean_a - 0.31) > 1e-12 ||
      std::fabs(rep.buckets[s].mean_b - 0.35) > 1e-12 ||
      std::fabs(rep.buckets[l].mean_a - 0.36) > 1e-12 ||
      std::fabs(rep.buckets[l].mean_b - 0.21) > 1e-12 ||
      rep.total_rows != 8) {
    why = "bucket means disagree with hand computation";
    return false;
  }

  // Swap the two systems' values: now tuned is worse on LONG, no crossover.
  for (auto& r : rows) {
    if (r.system == "base") r.system = "tuned";
    else r.system = "base";
  }
  const auto inverted = diag::bucket_by_duration(rows, "base", "tuned");
  if (inverted.crossover_flag) {
    why = "crossover reported for the inverted fixture";
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 10. Reasoning-length slope equals closed-form least squares.

bool crit_length_slope(std::string& why) {
  auto row = [](long len, double val) {
    model::EvalRow r;
    r.sample_id = "x";
    r.system = "sys";
    r.metric = model::Metric::Accuracy;
    r.value = val;
    r.reasoning_length_tokens = len;
    return r;
  };

  const auto fixed = diag::length_accuracy_slope(
      {row(100, 0.5), row(500, 0.6), row(900, 0.7)});
  if (std::fabs(fixed.slope - 0.00025) > 1e-9 ||
      std::fabs(fixed.intercept - 0.475) > 1e-9 || fixed.sign != 1 ||
      fixed.n != 3) {
    why = "fixed triple disagrees";
    return false;
  }

  std::mt19937 rng(31);
  std::uniform_int_distribution<long> len(10, 2000);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  std::vector<model::EvalRow> rows;
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const long x = len(rng);
    const double y = val(rng);
    rows.push_back(row(x, y));
    sx += x;
    sy += y;
    sxx += static_cast<long double>(x) * x;
    sxy += static_cast<long double>(x) * y;
  }
  const long double denom = n * sxx - sx * sx;
  const double slope = static_cast<double>((n * sxy - sx * sy) / denom);
  const double intercept = static_cast<double>((sy - slope * sx) / n);

  const auto rep = diag::length_accuracy_slope(rows);
  if (std::fabs(rep.slope - slope) > 1e-9 ||
      std::fabs(rep.intercept - intercept) > 1e-9) {
    why = "random regression differs from closed form";
    return false;
  }
  const int expected_sign = slope > 0 ? 1 : (slope < 0 ? -1 : 0);
  if (rep.sign != expected_sign) {
    why = "sign disagrees";
    return false;
  }

  const auto falling = diag::length_accuracy_slope(
      {row(10, 0.9), row(20, 0.8), row(30, 0.7)});
  const auto flat = diag::length_accuracy_slope({row(10, 0.5), row(20, 0.5)});
  if (falling.sign != -1 || flat.sign != 0) {
    why = "direction signs wrong";
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 11. Language-drift ablation pools counts exactly.

bool crit_drift_ablation(std::string& why) {
  std::vector<std::pair<std::string, std::string>> pairs;
  const std::string ref10 = "i like to eat rice at home every single day";
  const std::string sub10 = "i like to eat rice at home every single night";
  for (int i = 0; i < 7; ++i) pairs.emplace_back(ref10, sub10);
  const std::string id10 = "saya suka makan nasi di rumah kami setiap pagi ini";
  for (int i = 0; i < 3; ++i) pairs.emplace_back(ref10, id10);

  const auto ab = diag::wer_excluding_drift(pairs);
  if (ab.total != 10 || ab.drift_count != 3) {
    why = "drift tally wrong: " + std::to_string(ab.drift_count) + "/" +
          std::to_string(ab.total);
    return false;
  }
  if (std::fabs(ab.drift_pct - 30.0) > 1e-12) {
    why = "drift percentage wrong";
    return false;
  }
  // Pooled: 7 errors over 70 reference tokens, exactly 0.1.
  if (std::fabs(ab.wer_filtered - 0.1) > 1e-15) {
    why = "filtered WER not pooled exactly";
    return false;
  }
  // All pairs: 7*1 + 3*10 errors over 100 tokens.
  if (std::fabs(ab.wer_all - 0.37) > 1e-15) {
    why = "unfiltered WER not pooled exactly";
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 12. HTTP retry recovery and the bounded-parallelism contract.

bool crit_backend_resilience(std::string& why) {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions",
              [&](const httplib::Request&, httplib::Response& res) {
                if (++hits <= 2) {
                  res.status = 500;
                  res.set_content("boom", "text/plain");
                  return;
                }
                const json reply{
                    {"choices",
                     json::array({{{"message", {{"role", "assistant"},
                                                {"content", "recovered"}}}}})}};
                res.set_content(reply.dump(), "application/json");
              });
  const int port = server.bind_to_any_port("127.0.0.1");
  if (port <= 0) {
    why = "could not bind the stub server";
    return false;
  }
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  model::BackendConfig cfg;
  cfg.endpoint_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.model_name = "gen";
  cfg.max_retries = 3;
  cfg.backoff_base_ms = 1;
  backend::HttpBackend http(cfg);
  backend::ChatRequest req;
  req.messages = {{backend::Role::User, "hello"}};
  const auto c = http.complete(req);

  server.stop();
  server_thread.join();

  if (!c.ok || c.text != "recovered" || c.attempts != 3 || hits.load() != 3) {
    why = "retry sequence wrong (attempts=" + std::to_string(c.attempts) +
          ", hits=" + std::to_string(hits.load()) + ")";
    return false;
  }

  backend::MockBackend mock;
  mock.set_max_concurrency(8);
  mock.set_delay_ms(3);
  std::vector<backend::ChatRequest> reqs;
  for (int i = 0; i < 64; ++i) {
    backend::ChatRequest r;
    r.messages = {{backend::Role::User, "echo:p" + std::to_string(i)}};
    reqs.push_back(std::move(r));
  }
  const auto results = backend::complete_batch(mock, reqs);
  if (results.size() != 64 || mock.calls() != 64) {
    why = "batch dropped requests";
    return false;
  }
  for (int i = 0; i < 64; ++i) {
    if (!results[static_cast<size_t>(i)].ok ||
        results[static_cast<size_t>(i)].text != "p" + std::to_string(i)) {
      why = "batch result order broken at " + std::to_string(i);
      return false;
    }
  }
  if (mock.peak_in_flight() > 8) {
    why = "concurrency bound exceeded: " + std::to_string(mock.peak_in_flight());
    return false;
  }
  if (mock.peak_in_flight() < 2) {
    why = "worker pool never overlapped";
    return false;
  }
  return true;
}

struct Criterion {
  const char* name;
  bool (*fn)(std::string&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"alignment decomposition matches an exhaustive edit-distance oracle",
       crit_alignment_oracle},
      {"WER* equals (S+D)/N and never exceeds WER on random pairs",
       crit_wer_star_identity},
      {"pure-insertion example scores WER 0.5 but WER* 0.0",
       crit_insertion_example},
      {"consensus confirms majority claims and blurs conflicts without leaks",
       crit_consensus_refinement},
      {"adjudication is exhaustive-correct, permutation-invariant, monotone",
       crit_adjudication_exhaustive},
      {"reasoning delimiters round-trip and malformed text is rejected",
       crit_delimiter_round_trip},
      {"curriculum stages partition records with strict stable boundaries",
       crit_curriculum_partition},
      {"repeated mock pipeline runs through the CLI are byte-identical",
       crit_pipeline_determinism},
      {"duration-bucket crossover is detected and its inverse is not",
       crit_drift_crossover},
      {"reasoning-length slope matches closed-form least squares",
       crit_length_slope},
      {"language-drift ablation pools error counts exactly",
       crit_drift_ablation},
      {"http retries recover and batches respect the concurrency bound",
       crit_backend_resilience},
  };

  const int total = static_cast<int>(sizeof(criteria) / sizeof(criteria[0]));
  int passed = 0;
  for (int i = 0; i < total; ++i) {
    std::string why;
    bool ok = false;
    try {
      ok = criteria[i].fn(why);
    } catch (const std::exception& e) {
      why = std::string("unexpected exception: ") + e.what();
    }
    if (ok) ++passed;
    std::printf("%s %2d/%d %s%s%s\n", ok ? "PASS" : "FAIL", i + 1, total,
                criteria[i].name, why.empty() ? "" : " -- ", why.c_str());
  }
  std::printf("acceptance: %d/%d criteria passed\n", passed, total);
  return passed == total ? 0 : 1;
}
