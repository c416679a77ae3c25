#pragma once
// Stage drivers joining the modules into file-to-file runs: generate,
// refine, and the combined pipeline. Samples are processed in input order
// so outputs are byte-deterministic under the mock backend.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "silverforge/backend.hpp"
#include "silverforge/config.hpp"
#include "silverforge/datamodel.hpp"
#include "silverforge/refinery.hpp"

namespace silverforge::pipeline {

// Timestamp stamped into records on reproducible (mock) runs.
inline constexpr const char* kFixedTimestamp = "2025-01-01T00:00:00Z";

struct RunSummary {
  long samples = 0;
  long failed = 0;   // samples without enough surviving candidates
  long written = 0;  // records in the output file
};

refinery::RefineParams refine_params(const config::Config& cfg, bool deterministic);

// Reads RAW samples, writes one CANDIDATES record per sample:
// {"sample_id", "failed", "errors", "paths": [CandidatePath...]}.
RunSummary run_generate(const config::Config& cfg,
                        const std::filesystem::path& raw_path,
                        const std::filesystem::path& out_path,
                        backend::Backend& generator);

// Joins a CANDIDATES file back to its RAW samples and writes SILVER records
// for every sample that kept enough paths.
RunSummary run_refine(const config::Config& cfg,
                      const std::filesystem::path& raw_path,
                      const std::filesystem::path& candidates_path,
                      const std::filesystem::path& out_path,
                      backend::Backend& judge, bool deterministic);

// generate + refine in one pass, optionally also persisting candidates.
RunSummary run_pipeline(const config::Config& cfg,
                        const std::filesystem::path& raw_path,
                        const std::filesystem::path& out_path,
                        backend::Backend& generator, backend::Backend& judge,
                        bool deterministic,
                        const std::optional<std::filesystem::path>& candidates_out =
                            std::nullopt);

}  // namespace silverforge::pipeline
