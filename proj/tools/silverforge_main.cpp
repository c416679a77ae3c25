// silverforge: data-synthesis and diagnostic-evaluation CLI.
//
// Exit codes: 0 success, 1 operational error, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "silverforge/backend.hpp"
#include "silverforge/config.hpp"
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
#include "silverforge/text.hpp"

namespace sf = silverforge;
using nlohmann::json;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::optional<int64_t> seed;
  std::optional<int> concurrency;
  std::string mock_scenario;  // non-empty enables the mock backend
};

sf::config::Config effective_config(const GlobalOpts& g) {
  sf::config::Config cfg = sf::config::load_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (g.concurrency) {
    cfg.generator.max_concurrency = *g.concurrency;
    cfg.judge.max_concurrency = *g.concurrency;
  }
  return cfg;
}

bool mock_mode(const GlobalOpts& g) { return !g.mock_scenario.empty(); }

std::unique_ptr<sf::backend::Backend> make_backend(const GlobalOpts& g,
                                                   const sf::model::BackendConfig& be) {
  if (mock_mode(g)) {
    auto mock = std::make_unique<sf::backend::MockBackend>();
    mock->load_scenarios(g.mock_scenario);
    mock->set_max_concurrency(be.max_concurrency);
    return mock;
  }
  return std::make_unique<sf::backend::HttpBackend>(be);
}

// Reproducibility header appended for every run.
void append_audit(const GlobalOpts& g, const sf::config::Config& cfg,
                  const std::string& subcommand) {
  json entry{{"timestamp", mock_mode(g) ? sf::pipeline::kFixedTimestamp
                                        : sf::text::now_rfc3339_utc()},
             {"subcommand", subcommand},
             {"seed", cfg.seed},
             {"config_digest", cfg.config_digest},
             {"template_versions", sf::tpl::versions(cfg.templates_dir)},
             {"mock", mock_mode(g)}};
  std::ofstream out(cfg.audit_log, std::ios::app | std::ios::binary);
  if (out) out << entry.dump() << "\n";
}

// Transcript files: one {"sample_id", "text", ...} object per line.
struct TranscriptRow {
  std::string sample_id;
  std::string text;
  std::optional<double> audio_duration_s;
  std::string system;
};

std::vector<TranscriptRow> read_transcripts(const std::string& path) {
  std::vector<TranscriptRow> rows;
  sf::store::JsonlReader reader(path);
  json rec;
  while (reader.next(rec)) {
    TranscriptRow row;
    row.sample_id = rec.at("sample_id").get<std::string>();
    row.text = rec.at("text").get<std::string>();
    if (rec.contains("audio_duration_s") && !rec.at("audio_duration_s").is_null()) {
      row.audio_duration_s = rec.at("audio_duration_s").get<double>();
    }
    row.system = rec.value("system", std::string{});
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> transcript_texts(const std::vector<TranscriptRow>& rows) {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.text);
  return out;
}

void write_report(const std::string& path, const json& report) {
  sf::store::write_stream({report}, path, sf::model::Stage::Eval);
}

// ---------------------------------------------------------------------------
// Subcommand bodies (operational errors are thrown; main maps them to 1)

int cmd_validate(const std::string& in_path) {
  auto samples = sf::store::read_raw_samples(in_path);
  long violation_count = 0;
  std::set<std::string> seen_ids;
  for (const auto& s : samples) {
    for (const auto& v : sf::model::validate_sample(s)) {
      std::cout << s.id << ": " << v << "\n";
      ++violation_count;
    }
    if (!s.id.empty() && !seen_ids.insert(s.id).second) {
      std::cout << s.id << ": duplicate id\n";
      ++violation_count;
    }
  }
  std::cout << samples.size() << " samples, " << violation_count << " violations\n";
  return violation_count == 0 ? 0 : 1;
}

int cmd_generate(const GlobalOpts& g, const sf::config::Config& cfg,
                 const std::string& in_path, const std::string& out_path) {
  auto be = make_backend(g, cfg.generator);
  auto summary = sf::pipeline::run_generate(cfg, in_path, out_path, *be);
  std::cout << "generated candidates for " << summary.samples << " samples ("
            << summary.failed << " failed) -> " << out_path << "\n";
  return 0;
}

int cmd_refine(const GlobalOpts& g, const sf::config::Config& cfg,
               const std::string& in_path, const std::string& candidates_path,
               const std::string& out_path) {
  auto judge = make_backend(g, cfg.judge);
  auto summary = sf::pipeline::run_refine(cfg, in_path, candidates_path, out_path,
                                          *judge, mock_mode(g));
  std::cout << "refined " << summary.written << " of " << summary.samples
            << " samples (" << summary.failed << " failed) -> " << out_path << "\n";
  return 0;
}

int cmd_pipeline(const GlobalOpts& g, const sf::config::Config& cfg,
                 const std::string& in_path, const std::string& out_path,
                 const std::string& candidates_out) {
  auto gen = make_backend(g, cfg.generator);
  auto judge = make_backend(g, cfg.judge);
  std::optional<std::filesystem::path> cand_path;
  if (!candidates_out.empty()) cand_path = candidates_out;
  auto summary = sf::pipeline::run_pipeline(cfg, in_path, out_path, *gen, *judge,
                                            mock_mode(g), cand_path);
  std::cout << "pipeline wrote " << summary.written << " silver records of "
            << summary.samples << " samples (" << summary.failed << " failed) -> "
            << out_path << "\n";
  return 0;
}

int cmd_curriculum(const std::string& in_path, const std::string& out_dir,
                   const std::vector<long>& bounds) {
  auto records = sf::store::read_silver(in_path);
  auto shards = sf::curriculum::build_stages(records, bounds);

  std::map<std::string, const sf::model::SilverRecord*> by_id;
  for (const auto& r : records) by_id[r.sample_id] = &r;

  std::filesystem::create_directories(out_dir);
  std::vector<json> shard_meta;
  for (const auto& shard : shards) {
    std::vector<json> stage_records;
    for (const auto& id : shard.sample_ids) {
      stage_records.push_back(json(*by_id.at(id)));
    }
    const std::string stage_path =
        out_dir + "/stage" + std::to_string(shard.stage) + ".jsonl";
    sf::store::write_stream(stage_records, stage_path, sf::model::Stage::Silver);
    shard_meta.push_back(json(shard));
    std::cout << "stage " << shard.stage << ": " << shard.sample_ids.size()
              << " records (bound "
              << (shard.length_bound < 0 ? std::string("none")
                                         : std::to_string(shard.length_bound))
              << ") -> " << stage_path << "\n";
  }
  sf::store::write_stream(shard_meta, out_dir + "/stages.jsonl",
                          sf::model::Stage::Silver);
  return 0;
}

int cmd_eval(const GlobalOpts& g, const sf::config::Config& cfg,
             const std::string& refs_path, const std::string& hyps_path,
             const std::string& metric_name, const std::string& normalize,
             const std::string& out_path, const std::string& system_label) {
  const auto refs = read_transcripts(refs_path);
  const auto hyps = read_transcripts(hyps_path);
  std::map<std::string, const TranscriptRow*> ref_by_id;
  for (const auto& r : refs) ref_by_id[r.sample_id] = &r;

  const sf::metrics::NormPolicy policy = sf::metrics::norm_policy_from(
      normalize.empty() ? cfg.normalize : normalize);

  std::unique_ptr<sf::backend::Backend> judge;
  if (metric_name == "consistency") judge = make_backend(g, cfg.judge);

  sf::model::Metric metric;
  if (metric_name == "wer") metric = sf::model::Metric::Wer;
  else if (metric_name == "wer_star") metric = sf::model::Metric::WerStar;
  else if (metric_name == "cer") metric = sf::model::Metric::Cer;
  else if (metric_name == "f1") metric = sf::model::Metric::TokenF1;
  else if (metric_name == "accuracy") metric = sf::model::Metric::Accuracy;
  else metric = sf::model::Metric::Consistency;

  std::vector<json> out_rows;
  double value_sum = 0.0;
  long err_pool = 0, n_pool = 0;
  for (const auto& hyp : hyps) {
    auto it = ref_by_id.find(hyp.sample_id);
    if (it == ref_by_id.end()) {
      throw sf::Error("hypothesis \"" + hyp.sample_id + "\" has no reference");
    }
    const TranscriptRow& ref = *it->second;

    sf::model::EvalRow row;
    row.sample_id = hyp.sample_id;
    row.system = !hyp.system.empty() ? hyp.system
                                     : (!system_label.empty() ? system_label : "sys");
    row.metric = metric;
    row.audio_duration_s = ref.audio_duration_s;

    if (auto think = sf::delim::parse_lenient(hyp.text).first) {
      row.reasoning_length_tokens = sf::text::count_ws_tokens(*think);
    }

    switch (metric) {
      case sf::model::Metric::Wer:
      case sf::model::Metric::WerStar: {
        auto [rt, ht] = sf::metrics::tokens_for_wer(ref.text, hyp.text, policy);
        const auto counts = sf::metrics::align(rt, ht);
        row.value = metric == sf::model::Metric::Wer ? sf::model::wer(counts)
                                                     : sf::model::wer_star(counts);
        row.drift_flag = sf::diag::detect_language_drift(ref.text, hyp.text).drifted;
        err_pool += counts.substitutions + counts.deletions +
                    (metric == sf::model::Metric::Wer ? counts.insertions : 0);
        n_pool += counts.ref_len;
        break;
      }
      case sf::model::Metric::Cer:
        row.value = sf::metrics::cer(ref.text, hyp.text);
        break;
      case sf::model::Metric::TokenF1:
        row.value = sf::metrics::token_f1(ref.text, hyp.text);
        break;
      case sf::model::Metric::Accuracy:
        row.value = sf::metrics::accuracy(ref.text, hyp.text);
        break;
      case sf::model::Metric::Consistency:
        row.value = static_cast<double>(
            sf::metrics::consistency_score(hyp.text, ref.text, *judge));
        break;
    }
    value_sum += row.value;
    out_rows.push_back(json(row));
  }

  if (!out_path.empty()) {
    sf::store::write_stream(out_rows, out_path, sf::model::Stage::Eval);
  }

  const double mean =
      out_rows.empty() ? 0.0 : value_sum / static_cast<double>(out_rows.size());
  std::printf("metric      pairs  mean\n");
  std::printf("%-10s  %5zu  %.6f\n", sf::model::to_string(metric).c_str(),
              out_rows.size(), mean);
  if (n_pool > 0) {
    std::printf("corpus (pooled counts): %.6f\n",
                static_cast<double>(err_pool) / static_cast<double>(n_pool));
  }
  return 0;
}

int cmd_diag_drift(const sf::config::Config& cfg, const std::string& rows_path,
                   const std::string& system_a, const std::string& system_b,
                   const std::string& out_path) {
  const auto rows = sf::store::read_eval_rows(rows_path);
  sf::diag::DriftReport report =
      (!system_a.empty() && !system_b.empty())
          ? sf::diag::bucket_by_duration(rows, system_a, system_b,
                                         cfg.bucket_edge_short, cfg.bucket_edge_long)
          : sf::diag::bucket_by_duration(rows, cfg.bucket_edge_short,
                                         cfg.bucket_edge_long);
  const json j(report);
  std::cout << "bucket  n(a)  n(b)  mean(a)    mean(b)    delta(b-a)\n";
  const char* names[3] = {"SHORT", "MID", "LONG"};
  for (int b = 0; b < 3; ++b) {
    const auto& s = report.buckets[b];
    std::printf("%-6s  %4ld  %4ld  ", names[b], s.count_a, s.count_b);
    if (s.complete) {
      std::printf("%.6f  %.6f  %+.6f\n", s.mean_a, s.mean_b, s.delta);
    } else {
      std::printf("-         -         -\n");
    }
  }
  std::cout << "crossover: " << (report.crossover_flag ? "true" : "false") << "\n";
  if (!out_path.empty()) write_report(out_path, j);
  return 0;
}

int cmd_diag_slope(const std::string& rows_path, const std::string& out_path) {
  const auto rows = sf::store::read_eval_rows(rows_path);
  const auto slopes = sf::diag::slope_by_system(rows);
  json j = json::object();
  std::cout << "system      n     slope           sign\n";
  for (const auto& [system, report] : slopes) {
    j[system] = json(report);
    std::printf("%-10s  %4ld  %+.9f  %+d\n", system.c_str(), report.n, report.slope,
                report.sign);
  }
  if (!out_path.empty()) write_report(out_path, j);
  return 0;
}

int cmd_diag_anchors(const sf::config::Config& cfg, const std::string& a_path,
                     const std::string& b_path, const std::string& lexicon_path,
                     const std::string& out_path) {
  const std::string lex_file =
      !lexicon_path.empty() ? lexicon_path : cfg.lexicon_path;
  const sf::diag::AnchorLexicon lexicon =
      lex_file.empty() ? sf::diag::default_lexicon() : sf::diag::load_lexicon(lex_file);
  const auto a = transcript_texts(read_transcripts(a_path));
  const auto b = transcript_texts(read_transcripts(b_path));
  const sf::diag::AnchorReport report = sf::diag::anchor_ratio(a, b, lexicon);
  std::printf("anchor mean a: %.6f\nanchor mean b: %.6f\nratio (b/a):   %.6f\n",
              report.mean_a, report.mean_b, report.ratio);
  if (!out_path.empty()) write_report(out_path, json(report));
  return 0;
}

int cmd_diag_langdrift(const sf::config::Config& cfg, const std::string& refs_path,
                       const std::string& hyps_path, const std::string& normalize,
                       const std::string& out_path) {
  const auto refs = read_transcripts(refs_path);
  const auto hyps = read_transcripts(hyps_path);
  std::map<std::string, const TranscriptRow*> ref_by_id;
  for (const auto& r : refs) ref_by_id[r.sample_id] = &r;

  const sf::metrics::NormPolicy policy = sf::metrics::norm_policy_from(
      normalize.empty() ? cfg.normalize : normalize);

  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<json> out_rows;
  for (const auto& hyp : hyps) {
    auto it = ref_by_id.find(hyp.sample_id);
    if (it == ref_by_id.end()) {
      throw sf::Error("hypothesis \"" + hyp.sample_id + "\" has no reference");
    }
    pairs.emplace_back(it->second->text, hyp.text);
    const auto verdict = sf::diag::detect_language_drift(it->second->text, hyp.text);
    json row(verdict);
    row["sample_id"] = hyp.sample_id;
    out_rows.push_back(std::move(row));
  }

  const auto ablation = sf::diag::wer_excluding_drift(pairs, policy);
  std::printf("pairs: %ld  drifted: %ld (%.1f%%)\n", ablation.total,
              ablation.drift_count, ablation.drift_pct);
  std::printf("wer all:      %.6f\nwer filtered: %.6f\n", ablation.wer_all,
              ablation.wer_filtered);
  if (!out_path.empty()) {
    out_rows.push_back(json{{"summary", json(ablation)}});
    sf::store::write_stream(out_rows, out_path, sf::model::Stage::Eval);
  }
  return 0;
}

int cmd_stats(const std::string& in_path, long bound) {
  const sf::store::Stats s = sf::store::stats(in_path, bound);
  std::cout << json(s).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"silverforge: silver-data synthesis and diagnostic evaluation"};
  app.require_subcommand(1);
  // Exit code 2 for every usage error (CLI11's default varies by error type).
  app.failure_message(CLI::FailureMessage::help);

  GlobalOpts g;
  int64_t seed_opt = 0;
  int concurrency_opt = 0;
  app.add_option("--config", g.config_path, "TOML config file");
  auto* seed_flag = app.add_option("--seed", seed_opt, "pipeline seed (u64)");
  auto* conc_flag =
      app.add_option("--concurrency", concurrency_opt, "bounded worker pool size")
          ->check(CLI::PositiveNumber);
  app.add_option("--mock", g.mock_scenario,
                 "mock scenario file; enables the offline backend");

  // validate
  std::string v_in;
  auto* validate = app.add_subcommand("validate", "check raw sample invariants");
  validate->add_option("--in", v_in, "raw samples (line-delimited)")->required();

  // generate
  std::string gen_in, gen_out;
  auto* generate = app.add_subcommand("generate", "produce K candidate paths per sample");
  generate->add_option("--in", gen_in, "raw samples")->required();
  generate->add_option("--out", gen_out, "candidates output")->required();

  // refine
  std::string ref_in, ref_cand, ref_out;
  auto* refine = app.add_subcommand("refine", "consensus-refine candidates into silver");
  refine->add_option("--in", ref_in, "raw samples")->required();
  refine->add_option("--candidates", ref_cand, "candidates file")->required();
  refine->add_option("--out", ref_out, "silver output")->required();

  // pipeline
  std::string pipe_in, pipe_out, pipe_cand;
  auto* pipe = app.add_subcommand("pipeline", "generate + refine in one pass");
  pipe->add_option("--in", pipe_in, "raw samples")->required();
  pipe->add_option("--out", pipe_out, "silver output")->required();
  pipe->add_option("--candidates-out", pipe_cand, "also persist candidates");

  // curriculum
  std::string cur_in, cur_dir;
  std::vector<long> cur_bounds{512};
  auto* cur = app.add_subcommand("curriculum", "shard silver records by think length");
  cur->add_option("--in", cur_in, "silver records")->required();
  cur->add_option("--out-dir", cur_dir, "output directory")->required();
  cur->add_option("--bounds", cur_bounds, "ascending token bounds")->delimiter(',');

  // eval
  std::string e_refs, e_hyps, e_metric, e_norm, e_out, e_system;
  auto* eval = app.add_subcommand("eval", "score hypotheses against references");
  eval->add_option("--refs", e_refs, "reference transcripts")->required();
  eval->add_option("--hyps", e_hyps, "hypothesis transcripts")->required();
  eval->add_option("--metric", e_metric, "wer|wer_star|cer|f1|accuracy|consistency")
      ->required()
      ->check(CLI::IsMember({"wer", "wer_star", "cer", "f1", "accuracy",
                             "consistency"}));
  eval->add_option("--normalize", e_norm, "standard|raw")
      ->check(CLI::IsMember({"standard", "raw"}));
  eval->add_option("--out", e_out, "eval rows output");
  eval->add_option("--system", e_system, "system label for rows lacking one");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "analysis suite");
  diag->require_subcommand(1);
  std::string dd_rows, dd_a, dd_b, dd_out;
  auto* d_drift = diag->add_subcommand("drift", "duration-bucketed system comparison");
  d_drift->add_option("--rows", dd_rows, "eval rows")->required();
  d_drift->add_option("--system-a", dd_a, "baseline system label");
  d_drift->add_option("--system-b", dd_b, "comparison system label");
  d_drift->add_option("--out", dd_out, "report output");

  std::string ds_rows, ds_out;
  auto* d_slope = diag->add_subcommand("slope", "value-vs-reasoning-length regression");
  d_slope->add_option("--rows", ds_rows, "eval rows")->required();
  d_slope->add_option("--out", ds_out, "report output");

  std::string da_a, da_b, da_lex, da_out;
  auto* d_anchor = diag->add_subcommand("anchors", "anchor-token ratio between systems");
  d_anchor->add_option("--a", da_a, "baseline transcripts")->required();
  d_anchor->add_option("--b", da_b, "comparison transcripts")->required();
  d_anchor->add_option("--lexicon", da_lex, "anchor lexicon file");
  d_anchor->add_option("--out", da_out, "report output");

  std::string dl_refs, dl_hyps, dl_norm, dl_out;
  auto* d_lang = diag->add_subcommand("langdrift", "language-drift ablation for WER");
  d_lang->add_option("--refs", dl_refs, "reference transcripts")->required();
  d_lang->add_option("--hyps", dl_hyps, "hypothesis transcripts")->required();
  d_lang->add_option("--normalize", dl_norm, "standard|raw")
      ->check(CLI::IsMember({"standard", "raw"}));
  d_lang->add_option("--out", dl_out, "per-pair verdicts output");

  // stats
  std::string st_in;
  long st_bound = 512;
  auto* st = app.add_subcommand("stats", "flag/length/language summary of a file");
  st->add_option("--in", st_in, "record file")->required();
  st->add_option("--bound", st_bound, "length histogram bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message and usage
    return 2;
  }

  if (seed_flag->count() > 0) g.seed = seed_opt;
  if (conc_flag->count() > 0) g.concurrency = concurrency_opt;

  try {
    sf::config::Config cfg = effective_config(g);
    std::string sub = app.get_subcommands().front()->get_name();
    if (*diag) sub += " " + diag->get_subcommands().front()->get_name();
    append_audit(g, cfg, sub);

    if (*validate) return cmd_validate(v_in);
    if (*generate) return cmd_generate(g, cfg, gen_in, gen_out);
    if (*refine) return cmd_refine(g, cfg, ref_in, ref_cand, ref_out);
    if (*pipe) return cmd_pipeline(g, cfg, pipe_in, pipe_out, pipe_cand);
    if (*cur) return cmd_curriculum(cur_in, cur_dir, cur_bounds);
    if (*eval) return cmd_eval(g, cfg, e_refs, e_hyps, e_metric, e_norm, e_out, e_system);
    if (*d_drift) return cmd_diag_drift(cfg, dd_rows, dd_a, dd_b, dd_out);
    if (*d_slope) return cmd_diag_slope(ds_rows, ds_out);
    if (*d_anchor) return cmd_diag_anchors(cfg, da_a, da_b, da_lex, da_out);
    if (*d_lang) return cmd_diag_langdrift(cfg, dl_refs, dl_hyps, dl_norm, dl_out);
    if (*st) return cmd_stats(st_in, st_bound);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
