#pragma once
// Shared text plumbing: UTF-8 codec, NFC normalization, case mapping,
// whitespace handling, and SHA-256 hex digests.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace silverforge::text {

// Decodes UTF-8 into Unicode scalar values. Invalid byte sequences become
// U+FFFD, one replacement per bad byte, so decoding never fails.
std::vector<char32_t> decode_utf8(std::string_view s);

std::string encode_utf8(const std::vector<char32_t>& cps);
void append_utf8(std::string& out, char32_t cp);

// Canonical composition (NFC) of a UTF-8 string.
std::string nfc(std::string_view s);

// Per-codepoint simple lowercase mapping (no locale, no length changes
// beyond what the mapping itself requires).
std::string lower(std::string_view s);

bool is_space(char32_t cp);
bool is_alnum(char32_t cp);
bool is_letter(char32_t cp);

// Unicode script buckets used by the language-drift heuristic.
enum class Script { Latin, Han, Thai, Tamil, Other };
Script script_of(char32_t cp);

// Splits on Unicode whitespace; no empty tokens.
std::vector<std::string> split_ws(std::string_view s);

// NFC + whitespace split, the token rule used for length estimates.
long count_ws_tokens(std::string_view s);

std::string collapse_ws(std::string_view s);
std::string trim(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);

// Hex-encoded SHA-256 of the exact bytes given.
std::string sha256_hex(std::string_view bytes);

// UTC wall clock as RFC 3339 ("2025-06-01T12:00:00Z").
std::string now_rfc3339_utc();

}  // namespace silverforge::text
