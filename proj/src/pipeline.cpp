#include "silverforge/pipeline.hpp"

#include <map>

#include "silverforge/divergen.hpp"
#include "silverforge/errors.hpp"
#include "silverforge/store.hpp"
#include "silverforge/templates.hpp"

namespace silverforge::pipeline {

using nlohmann::json;

namespace {

divergen::GenParams gen_params(const config::Config& cfg) {
  divergen::GenParams p;
  p.k = cfg.k;
  p.base_temperature = cfg.base_temperature;
  p.max_tokens = cfg.max_tokens;
  p.pipeline_seed = cfg.seed;
  p.template_text = tpl::load("generation", cfg.templates_dir).text;
  return p;
}

json candidates_record(const std::string& sample_id, const divergen::GenResult& gen) {
  return json{{"sample_id", sample_id},
              {"failed", gen.failed},
              {"errors", gen.errors},
              {"paths", gen.paths}};
}

}  // namespace

refinery::RefineParams refine_params(const config::Config& cfg, bool deterministic) {
  refinery::RefineParams p;
  p.extraction_template = tpl::load("judge_extraction", cfg.templates_dir).text;
  p.rewrite_template = tpl::load("judge_rewrite", cfg.templates_dir).text;
  p.blur_template = tpl::load("judge_blur", cfg.templates_dir).text;
  p.judge_model = cfg.judge.model_name;
  p.judge_max_tokens = cfg.max_tokens;
  if (deterministic) p.fixed_created_at = kFixedTimestamp;
  return p;
}

RunSummary run_generate(const config::Config& cfg,
                        const std::filesystem::path& raw_path,
                        const std::filesystem::path& out_path,
                        backend::Backend& generator) {
  const auto samples = store::read_raw_samples(raw_path);
  const divergen::GenParams params = gen_params(cfg);

  RunSummary summary;
  std::vector<json> records;
  records.reserve(samples.size());
  for (const auto& sample : samples) {
    ++summary.samples;
    divergen::GenResult gen = divergen::generate_candidates(sample, params, generator);
    if (gen.failed) ++summary.failed;
    records.push_back(candidates_record(sample.id, gen));
  }
  summary.written = static_cast<long>(records.size());
  store::write_stream(records, out_path, model::Stage::Candidates);
  return summary;
}

RunSummary run_refine(const config::Config& cfg,
                      const std::filesystem::path& raw_path,
                      const std::filesystem::path& candidates_path,
                      const std::filesystem::path& out_path,
                      backend::Backend& judge, bool deterministic) {
  std::map<std::string, model::RawSample> by_id;
  for (auto& s : store::read_raw_samples(raw_path)) by_id[s.id] = std::move(s);

  const refinery::RefineParams params = refine_params(cfg, deterministic);

  RunSummary summary;
  std::vector<json> records;
  for (const json& rec : store::read_stream(candidates_path, model::Stage::Candidates)) {
    ++summary.samples;
    const std::string sample_id = rec.at("sample_id").get<std::string>();
    if (rec.at("failed").get<bool>()) {
      ++summary.failed;
      continue;
    }
    auto it = by_id.find(sample_id);
    if (it == by_id.end()) {
      throw Error("candidates reference unknown sample id \"" + sample_id + "\"");
    }
    const auto paths = rec.at("paths").get<std::vector<model::CandidatePath>>();
    if (paths.size() < 2) {
      ++summary.failed;
      continue;
    }
    records.push_back(json(refinery::refine_sample(it->second, paths, judge, params)));
  }
  summary.written = static_cast<long>(records.size());
  store::write_stream(records, out_path, model::Stage::Silver);
  return summary;
}

RunSummary run_pipeline(const config::Config& cfg,
                        const std::filesystem::path& raw_path,
                        const std::filesystem::path& out_path,
                        backend::Backend& generator, backend::Backend& judge,
                        bool deterministic,
                        const std::optional<std::filesystem::path>& candidates_out) {
  const auto samples = store::read_raw_samples(raw_path);
  const divergen::GenParams params = gen_params(cfg);
  const refinery::RefineParams rparams = refine_params(cfg, deterministic);

  RunSummary summary;
  std::vector<json> silver_records;
  std::vector<json> candidate_records;
  for (const auto& sample : samples) {
    ++summary.samples;
    divergen::GenResult gen = divergen::generate_candidates(sample, params, generator);
    if (candidates_out) candidate_records.push_back(candidates_record(sample.id, gen));
    if (gen.failed || gen.paths.size() < 2) {
      ++summary.failed;
      continue;
    }
    silver_records.push_back(
        json(refinery::refine_sample(sample, gen.paths, judge, rparams)));
  }
  summary.written = static_cast<long>(silver_records.size());
  if (candidates_out) {
    store::write_stream(candidate_records, *candidates_out, model::Stage::Candidates);
  }
  store::write_stream(silver_records, out_path, model::Stage::Silver);
  return summary;
}

}  // namespace silverforge::pipeline
