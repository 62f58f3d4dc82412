#include "ctnli/text.hpp"

#include <cctype>

namespace ctnli::text {

namespace {
bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
}  // namespace

bool is_ascii_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_ascii_upper(char c) { return c >= 'A' && c <= 'Z'; }

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::size_t token_count(std::string_view s) { return split_whitespace(s).size(); }

std::string_view prefix_tokens(std::string_view s, std::size_t n) {
  std::size_t i = 0;
  std::size_t seen = 0;
  std::size_t end = 0;
  while (i < s.size() && seen < n) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) {
      ++seen;
      end = i;
    }
  }
  return s.substr(0, end);
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> normalized_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (std::string_view tok : split_whitespace(s)) {
    std::string t;
    t.reserve(tok.size());
    for (char c : tok) {
      if (is_ascii_alnum(c)) {
        t.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
      }
    }
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::unordered_set<std::string> normalized_token_set(std::string_view s) {
  auto toks = normalized_tokens(s);
  return std::unordered_set<std::string>(toks.begin(), toks.end());
}

}  // namespace ctnli::text
