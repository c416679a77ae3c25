#include "silverforge/curriculum.hpp"

#include "silverforge/errors.hpp"
#include "silverforge/text.hpp"

namespace silverforge::curriculum {

long estimate_length(const std::string& think_block) {
  return text::count_ws_tokens(think_block);
}

long estimate_length(const model::SilverRecord& record) {
  return estimate_length(record.think_block);
}

std::vector<model::CurriculumShard> build_stages(
    const std::vector<std::pair<std::string, long>>& id_lengths,
    const std::vector<long>& bounds) {
  if (bounds.empty()) throw ConfigError("curriculum bounds must be non-empty");
  for (size_t i = 0; i < bounds.size(); ++i) {
    if (bounds[i] <= 0) throw ConfigError("curriculum bounds must be positive");
    if (i > 0 && bounds[i] <= bounds[i - 1]) {
      throw ConfigError("curriculum bounds must be strictly ascending");
    }
  }

  std::vector<model::CurriculumShard> shards(bounds.size() + 1);
  for (size_t i = 0; i < shards.size(); ++i) {
    shards[i].stage = static_cast<int>(i);
    shards[i].length_bound = i < bounds.size() ? bounds[i] : -1;
  }
  for (const auto& [id, length] : id_lengths) {
    size_t stage = bounds.size();  // default: unbounded final stage
    for (size_t i = 0; i < bounds.size(); ++i) {
      if (length < bounds[i]) {  // strict: L = bound goes to the later stage
        stage = i;
        break;
      }
    }
    shards[stage].sample_ids.push_back(id);
  }
  return shards;
}

std::vector<model::CurriculumShard> build_stages(
    const std::vector<model::SilverRecord>& records, const std::vector<long>& bounds) {
  std::vector<std::pair<std::string, long>> id_lengths;
  id_lengths.reserve(records.size());
  for (const auto& r : records) {
    id_lengths.emplace_back(r.sample_id, estimate_length(r));
  }
  return build_stages(id_lengths, bounds);
}

}  // namespace silverforge::curriculum
