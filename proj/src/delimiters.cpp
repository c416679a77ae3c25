#include "silverforge/delimiters.hpp"

#include "silverforge/errors.hpp"

namespace silverforge::delim {
namespace {

size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  size_t n = 0;
  for (size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

bool contains_delimiter(std::string_view s) {
  return s.find(kOpen) != std::string_view::npos ||
         s.find(kClose) != std::string_view::npos;
}

}  // namespace

std::string inject(std::string_view think, std::string_view answer) {
  if (answer.empty()) throw DelimiterError("answer must be non-empty");
  if (contains_delimiter(think)) {
    throw DelimiterError("think segment already contains a delimiter literal");
  }
  if (contains_delimiter(answer)) {
    throw DelimiterError("answer segment already contains a delimiter literal");
  }
  std::string out;
  out.reserve(kOpen.size() + think.size() + kClose.size() + 1 + answer.size());
  out.append(kOpen).append(think).append(kClose).append("\n").append(answer);
  return out;
}

std::pair<std::optional<std::string>, std::string> parse(std::string_view text) {
  const size_t opens = count_occurrences(text, kOpen);
  const size_t closes = count_occurrences(text, kClose);
  if (opens == 0 && closes == 0) {
    return {std::nullopt, std::string(text)};
  }
  if (opens != 1 || closes != 1) {
    throw DelimiterError("expected exactly one delimiter pair, found " +
                         std::to_string(opens) + " opening and " +
                         std::to_string(closes) + " closing");
  }
  const size_t open_pos = text.find(kOpen);
  const size_t close_pos = text.find(kClose);
  if (open_pos != 0 || close_pos < open_pos + kOpen.size()) {
    throw DelimiterError("delimiter pair malformed or not anchored at start");
  }
  const size_t think_begin = open_pos + kOpen.size();
  std::string think(text.substr(think_begin, close_pos - think_begin));
  std::string_view rest = text.substr(close_pos + kClose.size());
  if (!rest.empty() && rest.front() == '\n') rest.remove_prefix(1);
  return {std::move(think), std::string(rest)};
}

std::pair<std::optional<std::string>, std::string> parse_lenient(std::string_view text) {
  try {
    return parse(text);
  } catch (const DelimiterError&) {
    return {std::nullopt, std::string(text)};
  }
}

}  // namespace silverforge::delim
