#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mulbench/bigint.hpp"

namespace mulbench {

// American English cardinal, hyphenated tens-units, no "and".
// Supports values below 10^33 (through the nonillions).
std::string to_words(const BigNat& n);
std::string to_words_u64(std::uint64_t n);

// Reverse parser for the grammar emitted by to_words. Returns nullopt for
// anything outside that grammar (wrong scale order, repeated groups, unknown
// words). Case-insensitive; accepts both spaces and hyphens as separators.
std::optional<BigNat> parse_words(std::string_view text);

// Splits a word-form utterance into lowercase speakable tokens
// ("forty-seven times three" -> forty, seven, times, three). Punctuation is
// stripped; hyphens split compounds.
std::vector<std::string> word_tokens(std::string_view text);

}  // namespace mulbench
