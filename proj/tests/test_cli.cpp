#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "silverforge/store.hpp"

using namespace silverforge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;  // stdout + stderr interleaved
};

RunResult run_cli(const std::string& args, const fs::path& cwd) {
  const std::string cmd =
      "cd '" + cwd.string() + "' && '" + SILVERFORGE_BIN + "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("sf_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p, std::ios::binary);
  for (const auto& l : lines) out << l << "\n";
}

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
  TempDir dir;
  CHECK(run_cli("", dir.path).exit_code == 2);
  CHECK(run_cli("--help", dir.path).exit_code == 0);
  CHECK(run_cli("frobnicate", dir.path).exit_code == 2);
  CHECK(run_cli("validate", dir.path).exit_code == 2);  // missing --in
  CHECK(run_cli("eval --refs a --hyps b --metric bogus", dir.path).exit_code == 2);
  CHECK(run_cli("--concurrency 0 stats --in x.jsonl", dir.path).exit_code == 2);
}

TEST_CASE("operational failures exit 1 with a message") {
  TempDir dir;
  const auto r = run_cli("stats --in missing.jsonl", dir.path);
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("error:") != std::string::npos);
}

TEST_CASE("validate reports violations and exit status") {
  TempDir dir;
  write_lines(dir.path / "good.jsonl",
              {R"({"id":"a","prompt":"p","language":"en","media":[{"kind":"audio","uri":"u://1"}]})",
               R"({"id":"b","prompt":"q","language":"th","media":[]})"});
  const auto ok = run_cli("validate --in good.jsonl", dir.path);
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("0 violations") != std::string::npos);

  write_lines(dir.path / "bad.jsonl",
              {R"({"id":"","prompt":"p","language":"en","media":[]})",
               R"({"id":"dup","prompt":"p","language":"en","media":[]})",
               R"({"id":"dup","prompt":"p","language":"en","media":[],"audio_duration_s":-2})"});
  const auto bad = run_cli("validate --in bad.jsonl", dir.path);
  CHECK(bad.exit_code == 1);
  CHECK(bad.out.find("id empty") != std::string::npos);
  CHECK(bad.out.find("duplicate id") != std::string::npos);
  CHECK(bad.out.find("negative duration") != std::string::npos);
}

TEST_CASE("eval scores a transcript pair file") {
  TempDir dir;
  write_lines(dir.path / "refs.jsonl",
              {R"({"sample_id":"s1","text":"turn left"})",
               R"({"sample_id":"s2","text":"kopi siew dai"})"});
  write_lines(dir.path / "hyps.jsonl",
              {R"({"sample_id":"s1","text":"please turn left"})",
               R"({"sample_id":"s2","text":"kopi siu dai"})"});

  const auto wer = run_cli(
      "eval --refs refs.jsonl --hyps hyps.jsonl --metric wer --out rows.jsonl",
      dir.path);
  CHECK(wer.exit_code == 0);
  CHECK(wer.out.find("WER") != std::string::npos);

  auto rows = store::read_eval_rows(dir.path / "rows.jsonl");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].sample_id == "s1");
  CHECK(rows[0].value == doctest::Approx(0.5));   // one insertion over two tokens
  CHECK(rows[1].value == doctest::Approx(1.0 / 3.0));
  // A manifest tags the output file with its stage.
  CHECK(store::read_manifest(dir.path / "rows.jsonl")->stage == model::Stage::Eval);

  const auto star = run_cli(
      "eval --refs refs.jsonl --hyps hyps.jsonl --metric wer_star --out star.jsonl",
      dir.path);
  CHECK(star.exit_code == 0);
  auto star_rows = store::read_eval_rows(dir.path / "star.jsonl");
  CHECK(star_rows[0].value == 0.0);  // insertions forgiven
  CHECK(star_rows[1].value == doctest::Approx(1.0 / 3.0));

  // A hypothesis with no matching reference is an operational error.
  write_lines(dir.path / "orphan.jsonl", {R"({"sample_id":"nope","text":"x"})"});
  CHECK(run_cli("eval --refs refs.jsonl --hyps orphan.jsonl --metric wer",
                dir.path)
            .exit_code == 1);
}

TEST_CASE("curriculum shards a silver file on disk") {
  TempDir dir;
  write_lines(
      dir.path / "silver.jsonl",
      {R"({"sample_id":"short1","think_block":"a b c","final_answer":"x","verdicts":[],"k_used":2,"judge_model":"j","created_at":"t","quality_flags":[]})",
       R"({"sample_id":"long1","think_block":"a b c d e f g h","final_answer":"y","verdicts":[],"k_used":2,"judge_model":"j","created_at":"t","quality_flags":[]})"});

  const auto r =
      run_cli("curriculum --in silver.jsonl --out-dir shards --bounds 5", dir.path);
  CHECK(r.exit_code == 0);
  auto stage0 = store::read_silver(dir.path / "shards/stage0.jsonl");
  auto stage1 = store::read_silver(dir.path / "shards/stage1.jsonl");
  REQUIRE(stage0.size() == 1);
  CHECK(stage0[0].sample_id == "short1");
  REQUIRE(stage1.size() == 1);
  CHECK(stage1[0].sample_id == "long1");

  auto meta = store::read_stream(dir.path / "shards/stages.jsonl",
                                 model::Stage::Silver);
  REQUIRE(meta.size() == 2);
  CHECK(meta[0].at("length_bound") == 5);
  CHECK(meta[1].at("length_bound") == -1);
}

TEST_CASE("stats prints a json summary") {
  TempDir dir;
  write_lines(
      dir.path / "records.jsonl",
      {R"({"sample_id":"a","think_block":"x y","final_answer":"f","verdicts":[],"k_used":2,"judge_model":"j","created_at":"t","quality_flags":["JUDGE_FALLBACK"]})"});
  const auto r = run_cli("stats --in records.jsonl", dir.path);
  CHECK(r.exit_code == 0);
  const json parsed = json::parse(r.out);
  CHECK(parsed.at("record_count") == 1);
  CHECK(parsed.at("flag_counts").at("JUDGE_FALLBACK") == 1);
}

TEST_CASE("diagnose drift prints buckets and writes a report") {
  TempDir dir;
  std::vector<json> rows;
  auto add = [&](const std::string& sys, double dur, double val) {
    rows.push_back({{"sample_id", sys + std::to_string(dur)},
                    {"system", sys},
                    {"metric", "WER"},
                    {"value", val},
                    {"audio_duration_s", dur}});
  };
  add("base", 5, 0.3);
  add("r1", 5, 0.35);
  add("base", 45, 0.4);
  add("r1", 45, 0.2);
  store::write_stream(rows, dir.path / "rows.jsonl", model::Stage::Eval);

  const auto r = run_cli(
      "diagnose drift --rows rows.jsonl --system-a base --system-b r1 --out report.jsonl",
      dir.path);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("crossover: true") != std::string::npos);
  auto report = store::read_stream(dir.path / "report.jsonl", model::Stage::Eval);
  REQUIRE(report.size() == 1);
  CHECK(report[0].at("crossover_flag") == true);
}

TEST_CASE("every run appends an audit line") {
  TempDir dir;
  write_lines(dir.path / "raw.jsonl",
              {R"({"id":"a","prompt":"p","language":"en","media":[]})"});
  run_cli("validate --in raw.jsonl", dir.path);
  run_cli("--seed 99 validate --in raw.jsonl", dir.path);

  std::ifstream log(dir.path / "runs.log");
  REQUIRE(log.good());
  std::string line;
  std::vector<json> entries;
  while (std::getline(log, line)) entries.push_back(json::parse(line));
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].at("subcommand") == "validate");
  CHECK(entries[0].at("seed") == 0);
  CHECK(entries[1].at("seed") == 99);
  CHECK(entries[0].at("template_versions").size() == 4);
  CHECK(entries[0].at("config_digest").get<std::string>().size() == 64);
}

TEST_CASE("config file drives defaults and flags override it") {
  TempDir dir;
  std::ofstream(dir.path / "run.toml") << "[pipeline]\nseed = 7\n";
  write_lines(dir.path / "raw.jsonl",
              {R"({"id":"a","prompt":"p","language":"en","media":[]})"});

  run_cli("--config run.toml validate --in raw.jsonl", dir.path);
  run_cli("--config run.toml --seed 11 validate --in raw.jsonl", dir.path);

  std::ifstream log(dir.path / "runs.log");
  std::string line;
  std::vector<json> entries;
  while (std::getline(log, line)) entries.push_back(json::parse(line));
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].at("seed") == 7);
  CHECK(entries[1].at("seed") == 11);

  // A broken config is an operational error, not a crash.
  std::ofstream(dir.path / "broken.toml") << "[pipeline]\nkay = 3\n";
  CHECK(run_cli("--config broken.toml validate --in raw.jsonl", dir.path)
            .exit_code == 1);
}
