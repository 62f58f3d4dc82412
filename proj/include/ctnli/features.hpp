#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "ctnli/corpus.hpp"

namespace ctnli {

inline constexpr std::uint32_t kDefaultFeatureDim = 1u << 16;

// Unit-separator token placed between the premise and hypothesis token
// streams so "a b | c" and "a | b c" hash differently.
inline constexpr std::string_view kPairSeparator = "\x1f";
// Joins the two tokens of a bigram into one hash key.
inline constexpr char kBigramJoiner = '\x1e';

std::uint64_t fnv1a64(std::string_view s);

// Sparse hashed bag of unigrams and bigrams. Entries are sorted by index
// and unique; counts are at least 1.
struct FeatureVector {
  std::uint32_t dim = kDefaultFeatureDim;
  std::vector<std::pair<std::uint32_t, float>> entries;

  bool operator==(const FeatureVector&) const = default;
};

// Hashes lowercased punctuation-stripped unigrams and bigrams of
// "premise <sep> hypothesis" modulo dim. Both sides empty gives the zero
// vector; the separator contributes only when some text is present.
FeatureVector featurize(const ResolvedPair& pair,
                        std::uint32_t dim = kDefaultFeatureDim);

}  // namespace ctnli
