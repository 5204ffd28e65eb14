#include "mulbench/words.hpp"

#include <array>
#include <cctype>
#include <map>
#include <stdexcept>

namespace mulbench {

namespace {

const std::array<const char*, 20> kSmall = {
    "zero",    "one",     "two",       "three",    "four",    "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",  "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};

const std::array<const char*, 10> kTens = {"",      "",      "twenty", "thirty", "forty",
                                           "fifty", "sixty", "seventy", "eighty", "ninety"};

// Scale names for 10^(3i); nonillion (10^30) is the last group needed for
// 33-digit inputs.
const std::array<const char*, 11> kScales = {
    "",         "thousand",    "million",     "billion",    "trillion", "quadrillion",
    "quintillion", "sextillion", "septillion", "octillion", "nonillion"};

std::string group_to_words(unsigned g) {
  std::string out;
  if (g >= 100) {
    out += kSmall[g / 100];
    out += " hundred";
    g %= 100;
    if (g > 0) out += ' ';
  }
  if (g >= 20) {
    out += kTens[g / 10];
    if (g % 10 != 0) {
      out += '-';
      out += kSmall[g % 10];
    }
  } else if (g > 0) {
    out += kSmall[g];
  }
  return out;
}

}  // namespace

std::string to_words(const BigNat& n) {
  if (n.is_zero()) return "zero";
  if (n.digit_count() > 33)
    throw std::out_of_range("to_words: value must be below 10^33");
  const std::string s = n.to_string();
  // Split into 3-digit groups, most significant first.
  std::vector<unsigned> groups;
  std::size_t first = s.size() % 3;
  if (first > 0) groups.push_back(static_cast<unsigned>(std::stoul(s.substr(0, first))));
  for (std::size_t i = first; i < s.size(); i += 3)
    groups.push_back(static_cast<unsigned>(std::stoul(s.substr(i, 3))));

  std::string out;
  std::size_t count = groups.size();
  for (std::size_t i = 0; i < count; ++i) {
    unsigned g = groups[i];
    if (g == 0) continue;
    if (!out.empty()) out += ' ';
    out += group_to_words(g);
    std::size_t scale = count - 1 - i;
    if (scale > 0) {
      out += ' ';
      out += kScales[scale];
    }
  }
  return out;
}

std::string to_words_u64(std::uint64_t n) { return to_words(BigNat(n)); }

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

namespace {

struct WordTables {
  std::map<std::string, unsigned> units;   // one..nineteen
  std::map<std::string, unsigned> tens;    // twenty..ninety
  std::map<std::string, unsigned> scales;  // thousand.. -> group index
  WordTables() {
    for (unsigned i = 1; i < kSmall.size(); ++i) units[kSmall[i]] = i;
    for (unsigned i = 2; i < kTens.size(); ++i) tens[kTens[i]] = i * 10;
    for (unsigned i = 1; i < kScales.size(); ++i) scales[kScales[i]] = i;
  }
};

const WordTables& tables() {
  static const WordTables t;
  return t;
}

// Parses one group (1..999) starting at pos; advances pos past it.
std::optional<unsigned> parse_group(const std::vector<std::string>& toks, std::size_t& pos) {
  const auto& t = tables();
  unsigned value = 0;
  bool any = false;
  std::size_t p = pos;

  auto unit_at = [&](std::size_t i) -> std::optional<unsigned> {
    if (i >= toks.size()) return std::nullopt;
    auto it = t.units.find(toks[i]);
    if (it == t.units.end()) return std::nullopt;
    return it->second;
  };

  if (auto u = unit_at(p); u && u <= 9 && p + 1 < toks.size() && toks[p + 1] == "hundred") {
    value += *u * 100;
    p += 2;
    any = true;
  }
  if (p < toks.size()) {
    if (auto it = t.tens.find(toks[p]); it != t.tens.end()) {
      value += it->second;
      ++p;
      any = true;
      if (auto u = unit_at(p); u && *u <= 9) {
        value += *u;
        ++p;
      }
    } else if (auto u = unit_at(p)) {
      value += *u;
      ++p;
      any = true;
    }
  }
  if (!any) return std::nullopt;
  pos = p;
  return value;
}

}  // namespace

std::optional<BigNat> parse_words(std::string_view text) {
  std::vector<std::string> toks = word_tokens(text);
  if (toks.empty()) return std::nullopt;
  if (toks.size() == 1 && toks[0] == "zero") return BigNat(0);

  const auto& t = tables();
  BigNat total(0);
  std::size_t pos = 0;
  int last_scale = static_cast<int>(kScales.size());  // strictly decreasing
  while (pos < toks.size()) {
    auto group = parse_group(toks, pos);
    if (!group) return std::nullopt;
    int scale = 0;
    if (pos < toks.size()) {
      if (auto it = t.scales.find(toks[pos]); it != t.scales.end()) {
        scale = static_cast<int>(it->second);
        ++pos;
      }
    }
    if (scale >= last_scale) return std::nullopt;
    last_scale = scale;
    total = total + BigNat(*group).shifted_pow10(static_cast<std::size_t>(3 * scale));
    if (scale == 0 && pos < toks.size()) return std::nullopt;  // trailing words
  }
  return total;
}

}  // namespace mulbench
