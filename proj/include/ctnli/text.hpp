#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace ctnli::text {

// Whitespace tokenization. A token is a maximal run of non-whitespace bytes.
std::vector<std::string_view> split_whitespace(std::string_view s);
std::size_t token_count(std::string_view s);

// Prefix of `s` covering its first `n` whitespace tokens, original spacing
// preserved. n >= token_count returns all of `s` (trailing whitespace trimmed).
std::string_view prefix_tokens(std::string_view s, std::size_t n);

// Lowercased tokens with all non-alphanumeric bytes stripped; empty tokens
// are dropped.
std::vector<std::string> normalized_tokens(std::string_view s);
std::unordered_set<std::string> normalized_token_set(std::string_view s);

std::string to_lower(std::string_view s);

bool is_ascii_alnum(char c);
bool is_ascii_upper(char c);
bool is_ascii_digit(char c);

}  // namespace ctnli::text
