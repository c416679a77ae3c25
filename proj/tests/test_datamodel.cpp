#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "silverforge/datamodel.hpp"
#include "silverforge/errors.hpp"

using namespace silverforge;
using nlohmann::json;

TEST_CASE("enum spellings round-trip") {
  CHECK(model::to_string(model::MediaKind::Audio) == "audio");
  CHECK(model::media_kind_from("video") == model::MediaKind::Video);
  CHECK(model::to_string(model::Verdict::Confirmed) == "CONFIRMED");
  CHECK(model::to_string(model::Verdict::Blurred) == "BLURRED");
  CHECK(model::to_string(model::Verdict::Uncertain) == "UNCERTAIN");
  CHECK(model::verdict_from("BLURRED") == model::Verdict::Blurred);
  CHECK(model::to_string(model::QualityFlag::EmptyThink) == "EMPTY_THINK");
  CHECK(model::to_string(model::QualityFlag::AllUncertain) == "ALL_UNCERTAIN");
  CHECK(model::to_string(model::QualityFlag::JudgeFallback) == "JUDGE_FALLBACK");
  CHECK(model::to_string(model::Metric::WerStar) == "WER_STAR");
  CHECK(model::metric_from("TOKEN_F1") == model::Metric::TokenF1);
  CHECK(model::to_string(model::DurationBucket::Mid) == "MID");
  CHECK(model::to_string(model::Stage::Candidates) == "CANDIDATES");
  CHECK(model::stage_from("EVAL") == model::Stage::Eval);
  CHECK_THROWS_AS(model::verdict_from("confirmed"), ConfigError);
  CHECK_THROWS_AS(model::stage_from(""), ConfigError);
}

TEST_CASE("validate_sample reports exact violations") {
  model::RawSample ok{"s1", "prompt", {{model::MediaKind::Image, "img://1"}},
                      std::nullopt, "en", 2.0};
  CHECK(model::validate_sample(ok).empty());

  model::RawSample bad = ok;
  bad.id = "";
  auto v = model::validate_sample(bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "id empty");

  bad = ok;
  bad.audio_duration_s = -0.5;
  v = model::validate_sample(bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "negative duration");

  bad = ok;
  bad.media[0].uri = "";
  v = model::validate_sample(bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "media uri empty");

  bad = ok;
  bad.id = "";
  bad.audio_duration_s = -1.0;
  CHECK(model::validate_sample(bad).size() == 2);
}

TEST_CASE("raw sample json round-trip omits absent optionals") {
  model::RawSample s{"s1", "p", {{model::MediaKind::Audio, "a://x"}},
                     std::nullopt, "th", std::nullopt};
  json j(s);
  CHECK_FALSE(j.contains("gold_answer"));
  CHECK_FALSE(j.contains("audio_duration_s"));
  CHECK(j.at("media").at(0).at("kind") == "audio");
  auto back = j.get<model::RawSample>();
  CHECK(back == s);

  s.gold_answer = "42";
  s.audio_duration_s = 3.25;
  json j2(s);
  CHECK(j2.at("gold_answer") == "42");
  CHECK(j2.get<model::RawSample>() == s);
}

TEST_CASE("silver record serializes a delimiter-injected target text") {
  model::SilverRecord r;
  r.sample_id = "s9";
  r.think_block = "The car is red.";
  r.final_answer = "red";
  r.k_used = 4;
  r.judge_model = "judge";
  r.created_at = "2025-01-01T00:00:00Z";
  r.quality_flags = {model::QualityFlag::JudgeFallback,
                     model::QualityFlag::EmptyThink};
  r.verdicts.push_back({"the car is red", {0, 2}, model::Verdict::Confirmed,
                        "the car is red"});

  json j(r);
  CHECK(j.at("target_text") == "<think>The car is red.</think>\nred");
  // Flags serialize as a sorted string array.
  CHECK(j.at("quality_flags") == json::array({"EMPTY_THINK", "JUDGE_FALLBACK"}));
  CHECK(j.at("verdicts").at(0).at("verdict") == "CONFIRMED");
  CHECK(j.at("verdicts").at(0).at("supporting_indices") == json::array({0, 2}));

  auto back = j.get<model::SilverRecord>();
  CHECK(back == r);
}

TEST_CASE("eval row round-trip") {
  model::EvalRow row;
  row.sample_id = "e1";
  row.system = "base";
  row.metric = model::Metric::Wer;
  row.value = 0.25;
  row.duration_bucket = model::DurationBucket::Long;
  row.reasoning_length_tokens = 17;
  row.drift_flag = false;
  row.audio_duration_s = 31.5;
  json j(row);
  CHECK(j.at("metric") == "WER");
  CHECK(j.at("duration_bucket") == "LONG");
  CHECK(j.get<model::EvalRow>() == row);

  model::EvalRow bare;
  bare.sample_id = "e2";
  bare.system = "x";
  bare.metric = model::Metric::Cer;
  bare.value = 0.0;
  json jb(bare);
  CHECK_FALSE(jb.contains("duration_bucket"));
  CHECK_FALSE(jb.contains("reasoning_length_tokens"));
  CHECK_FALSE(jb.contains("drift_flag"));
  CHECK(jb.get<model::EvalRow>() == bare);
}

TEST_CASE("wer and wer_star formulas") {
  model::AlignmentCounts c{2, 1, 3, 10};
  CHECK(model::wer(c) == doctest::Approx(0.6));
  CHECK(model::wer_star(c) == doctest::Approx(0.3));
}

TEST_CASE("wer_star never exceeds wer") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<long> d(0, 12);
  for (int i = 0; i < 2000; ++i) {
    model::AlignmentCounts c{d(rng), d(rng), d(rng), d(rng) + 1};
    CHECK(model::wer_star(c) <= model::wer(c));
    if (c.insertions == 0) CHECK(model::wer_star(c) == model::wer(c));
  }
}

TEST_CASE("curriculum shard json uses -1 for the unbounded stage") {
  model::CurriculumShard s{2, -1, {"a", "b"}};
  json j(s);
  CHECK(j.at("length_bound") == -1);
  CHECK(j.get<model::CurriculumShard>() == s);
}
