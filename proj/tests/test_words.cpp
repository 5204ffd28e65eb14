#include <doctest.h>

#include "mulbench/rng.hpp"
#include "mulbench/words.hpp"

using namespace mulbench;

TEST_CASE("to_words anchors") {
  CHECK(to_words_u64(47) == "forty-seven");
  CHECK(to_words_u64(0) == "zero");
  CHECK(to_words_u64(2499) == "two thousand four hundred ninety-nine");
  CHECK(to_words_u64(36) == "thirty-six");
  CHECK(to_words_u64(100) == "one hundred");
  CHECK(to_words_u64(115) == "one hundred fifteen");
  CHECK(to_words_u64(1000000) == "one million");
  CHECK(to_words_u64(1000001) == "one million one");
  CHECK(to_words_u64(90060) == "ninety thousand sixty");
  CHECK(to_words(BigNat::from_decimal("123456789012345678901234567890")) ==
        "one hundred twenty-three octillion four hundred fifty-six septillion "
        "seven hundred eighty-nine sextillion twelve quintillion three hundred "
        "forty-five quadrillion six hundred seventy-eight trillion nine hundred "
        "one billion two hundred thirty-four million five hundred sixty-seven "
        "thousand eight hundred ninety");
  CHECK_THROWS(to_words(BigNat::from_decimal(std::string(34, '9'))));
}

TEST_CASE("parse_words inverts to_words") {
  for (std::uint64_t n : {0ull, 7ull, 15ull, 40ull, 47ull, 100ull, 101ull, 110ull, 999ull,
                          1000ull, 2499ull, 90060ull, 1000001ull}) {
    auto parsed = parse_words(to_words_u64(n));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == BigNat(n));
  }
}

TEST_CASE("parse_words rejects non-canonical text") {
  CHECK_FALSE(parse_words("").has_value());
  CHECK_FALSE(parse_words("banana").has_value());
  CHECK_FALSE(parse_words("one one").has_value());
  CHECK_FALSE(parse_words("thousand one").has_value());
  CHECK_FALSE(parse_words("one thousand one million").has_value());
  CHECK_FALSE(parse_words("forty seven extra").has_value());
}

TEST_CASE("to_words is injective over 0..99999 via round-trip") {
  for (std::uint64_t n = 0; n <= 99999; ++n) {
    auto parsed = parse_words(to_words_u64(n));
    REQUIRE(parsed.has_value());
    REQUIRE(parsed->to_string() == std::to_string(n));
  }
}

TEST_CASE("to_words round-trips random 10-digit values") {
  SplitMix64 rng(20240101);
  for (int i = 0; i < 10000; ++i) {
    std::uint64_t n = 1000000000ull + rng.next_below(9000000000ull);
    auto parsed = parse_words(to_words_u64(n));
    REQUIRE(parsed.has_value());
    REQUIRE(parsed->to_string() == std::to_string(n));
  }
}

TEST_CASE("word_tokens splits hyphens and strips punctuation") {
  auto toks = word_tokens("What is forty-seven times thirty-six?");
  REQUIRE(toks.size() == 7);
  CHECK(toks[0] == "what");
  CHECK(toks[2] == "forty");
  CHECK(toks[3] == "seven");
  CHECK(toks[4] == "times");
  CHECK(toks[6] == "six");
}
