#pragma once
// Reasoning delimiters: the literal <think>...</think> wrapper separating
// internal deliberation from the final response.

#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace silverforge::delim {

inline constexpr std::string_view kOpen = "<think>";
inline constexpr std::string_view kClose = "</think>";

// "<think>" + think + "</think>" + "\n" + answer. Throws DelimiterError when
// either segment already contains a delimiter literal (the output must hold
// exactly one pair) or when answer is empty.
std::string inject(std::string_view think, std::string_view answer);

// Inverse of inject on well-formed input. Text without any delimiter literal
// parses as (absent, whole text). Throws DelimiterError on unbalanced or
// multiple pairs, or on a pair not anchored at the start of the text.
std::pair<std::optional<std::string>, std::string> parse(std::string_view text);

// Like parse but never throws: malformed text comes back as (absent, text).
std::pair<std::optional<std::string>, std::string> parse_lenient(std::string_view text);

}  // namespace silverforge::delim
