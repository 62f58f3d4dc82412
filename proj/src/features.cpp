#include "ctnli/features.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "ctnli/text.hpp"

namespace ctnli {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

FeatureVector featurize(const ResolvedPair& pair, std::uint32_t dim) {
  if (dim == 0) throw std::runtime_error("feature dimension must be positive");
  FeatureVector out;
  out.dim = dim;

  std::vector<std::string> tokens = text::normalized_tokens(pair.premise);
  std::vector<std::string> hyp = text::normalized_tokens(pair.hypothesis);
  if (tokens.empty() && hyp.empty()) return out;
  tokens.emplace_back(kPairSeparator);
  tokens.insert(tokens.end(), hyp.begin(), hyp.end());

  std::map<std::uint32_t, float> counts;
  auto add = [&](std::string_view key) {
    counts[static_cast<std::uint32_t>(fnv1a64(key) % dim)] += 1.0f;
  };
  for (const auto& t : tokens) add(t);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    std::string bigram = tokens[i];
    bigram.push_back(kBigramJoiner);
    bigram += tokens[i + 1];
    add(bigram);
  }
  out.entries.assign(counts.begin(), counts.end());
  return out;
}

}  // namespace ctnli
