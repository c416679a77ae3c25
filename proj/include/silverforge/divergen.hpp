#pragma once
// Divergent generation: K diverse reasoning paths per sample, diversity via
// distinct seeds at a fixed sampling temperature.

#include <cstdint>
#include <string>
#include <vector>

#include "silverforge/backend.hpp"
#include "silverforge/datamodel.hpp"

namespace silverforge::divergen {

struct GenParams {
  int k = 4;                     // paths per sample, >= 2
  double base_temperature = 0.8;
  int max_tokens = 1024;
  int64_t pipeline_seed = 0;     // path i uses seed pipeline_seed + i
  std::string template_text;     // generation template ({media}, {prompt})
};

// Substitutes {media} (bracketed descriptor list, e.g. "[audio: uri]") and
// {prompt} into the template; the request is a single user message. Throws
// TemplateError when a placeholder is missing from the template.
backend::ChatRequest render_generation_prompt(const model::RawSample& sample,
                                              const std::string& template_text);

// The request path i of a sample would be sent with; exposed so offline
// scenario tables can be keyed without a backend round-trip.
backend::ChatRequest request_for_path(const model::RawSample& sample,
                                      const GenParams& params, int path_index);

struct GenResult {
  std::vector<model::CandidatePath> paths;  // surviving paths, original indices
  bool failed = false;  // true when successes < ceil(K/2)+1: consensus impossible
  std::vector<std::string> errors;          // one entry per failed path
};

// Generates K candidates through the backend (bounded-concurrency batch).
// A path fails when the backend errors or its text carries malformed
// delimiters; the sample fails when too few paths survive for a strict
// majority to remain achievable. Throws ConfigError when K < 2.
GenResult generate_candidates(const model::RawSample& sample, const GenParams& params,
                              backend::Backend& be);

// Sample-failure rule, exposed for exhaustive rule-table tests:
// proceed iff successes >= ceil(K/2) + 1.
bool enough_successes(int successes, int k);

}  // namespace silverforge::divergen
