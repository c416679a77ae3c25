#include "silverforge/divergen.hpp"

#include "silverforge/delimiters.hpp"
#include "silverforge/errors.hpp"
#include "silverforge/templates.hpp"
#include "silverforge/text.hpp"

namespace silverforge::divergen {

backend::ChatRequest render_generation_prompt(const model::RawSample& sample,
                                              const std::string& template_text) {
  std::string media;
  for (const auto& m : sample.media) {
    if (!media.empty()) media += ' ';
    media += '[' + model::to_string(m.kind) + ": " + m.uri + ']';
  }
  std::string content = tpl::render(template_text,
                                    {{"media", media}, {"prompt", sample.prompt}},
                                    {"media", "prompt"});
  backend::ChatRequest req;
  req.messages.push_back({backend::Role::User, std::move(content)});
  return req;
}

backend::ChatRequest request_for_path(const model::RawSample& sample,
                                      const GenParams& params, int path_index) {
  backend::ChatRequest req = render_generation_prompt(sample, params.template_text);
  req.temperature = params.base_temperature;
  req.seed = params.pipeline_seed + path_index;
  req.max_tokens = params.max_tokens;
  return req;
}

bool enough_successes(int successes, int k) {
  return successes >= (k + 1) / 2 + 1;  // ceil(K/2) + 1
}

GenResult generate_candidates(const model::RawSample& sample, const GenParams& params,
                              backend::Backend& be) {
  if (params.k < 2) throw ConfigError("K must be >= 2, got " + std::to_string(params.k));

  std::vector<backend::ChatRequest> requests;
  requests.reserve(static_cast<size_t>(params.k));
  for (int i = 0; i < params.k; ++i) {
    requests.push_back(request_for_path(sample, params, i));
  }
  std::vector<backend::Completion> completions = backend::complete_batch(be, requests);

  GenResult result;
  for (int i = 0; i < params.k; ++i) {
    const backend::Completion& c = completions[static_cast<size_t>(i)];
    if (!c.ok) {
      result.errors.push_back("path " + std::to_string(i) + ": " + c.error);
      continue;
    }
    model::CandidatePath path;
    path.index = i;
    path.raw_text = c.text;
    path.temperature = params.base_temperature;
    path.seed = params.pipeline_seed + i;
    try {
      auto [think, answer] = delim::parse(c.text);
      path.think = std::move(think);
      path.answer = std::move(answer);
    } catch (const DelimiterError& e) {
      result.errors.push_back("path " + std::to_string(i) + ": " + e.what());
      continue;
    }
    path.est_length_tokens =
        text::count_ws_tokens(path.think ? *path.think : path.raw_text);
    result.paths.push_back(std::move(path));
  }
  result.failed = !enough_successes(static_cast<int>(result.paths.size()), params.k);
  return result;
}

}  // namespace silverforge::divergen
