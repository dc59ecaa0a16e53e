#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// String helpers shared by the loaders, parser, grounding and scoring code.
// All case handling is ASCII-only; other bytes pass through untouched.
namespace procx::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

// Trim and collapse internal whitespace runs to one space.
std::string collapse_whitespace(std::string_view s);

bool is_punctuation_only(std::string_view s);

// Case-fold, collapse whitespace, strip leading/trailing punctuation.
std::string normalize_surface(std::string_view s);

// Key used to compare type names: lower case, '_' and ' ' interchangeable.
std::string type_key(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Text up to and including the first sentence terminator followed by whitespace or end.
std::string first_sentence(std::string_view s);

std::size_t count_words(std::string_view s);

std::string sha256_hex(std::string_view data);
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

} // namespace procx::text
