#pragma once
// Curriculum sharding: order records so shorter reasoning chains come
// first. Boundary comparisons are strict "<": a record at exactly the bound
// belongs to the later stage.

#include <string>
#include <utility>
#include <vector>

#include "silverforge/datamodel.hpp"

namespace silverforge::curriculum {

// Whitespace-token count of the think block only (answers excluded), after
// NFC normalization.
long estimate_length(const std::string& think_block);
long estimate_length(const model::SilverRecord& record);

// Partitions (id, length) pairs into len(bounds)+1 shards: stage 0 holds
// L < bounds[0], stage i holds bounds[i-1] <= L < bounds[i], and the final
// stage holds L >= bounds.back() (its length_bound is recorded as -1,
// meaning unbounded). Input order is preserved within every stage. Throws
// ConfigError when bounds are empty, non-positive, or not strictly
// ascending.
std::vector<model::CurriculumShard> build_stages(
    const std::vector<std::pair<std::string, long>>& id_lengths,
    const std::vector<long>& bounds = {512});

std::vector<model::CurriculumShard> build_stages(
    const std::vector<model::SilverRecord>& records,
    const std::vector<long>& bounds = {512});

}  // namespace silverforge::curriculum
