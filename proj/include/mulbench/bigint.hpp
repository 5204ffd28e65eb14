#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mulbench {

// Arbitrary-precision unsigned integer stored as decimal digits,
// least significant first. Decimal limbs keep digit-level statistics
// (lengths, non-zero counts, carry simulation) trivial; operands in
// this toolkit are tens of digits, so asymptotics are irrelevant.
class BigNat {
 public:
  BigNat() : digits_{0} {}
  explicit BigNat(std::uint64_t v);
  static BigNat from_decimal(std::string_view s);

  const std::vector<std::uint8_t>& digits_lsb() const { return digits_; }
  std::size_t digit_count() const { return digits_.size(); }
  std::size_t nonzero_digit_count() const;
  bool is_zero() const { return digits_.size() == 1 && digits_[0] == 0; }

  std::string to_string() const;
  // Value as uint64_t; caller must check fits_u64() first.
  bool fits_u64() const;
  std::uint64_t to_u64() const;

  friend BigNat operator+(const BigNat& a, const BigNat& b);
  // Requires a >= b.
  friend BigNat operator-(const BigNat& a, const BigNat& b);
  friend BigNat operator*(const BigNat& a, const BigNat& b);
  BigNat shifted_pow10(std::size_t zeros) const;

  friend bool operator==(const BigNat& a, const BigNat& b) { return a.digits_ == b.digits_; }
  friend bool operator!=(const BigNat& a, const BigNat& b) { return !(a == b); }
  friend bool operator<(const BigNat& a, const BigNat& b) { return cmp(a, b) < 0; }
  friend bool operator<=(const BigNat& a, const BigNat& b) { return cmp(a, b) <= 0; }
  friend bool operator>(const BigNat& a, const BigNat& b) { return cmp(a, b) > 0; }
  friend bool operator>=(const BigNat& a, const BigNat& b) { return cmp(a, b) >= 0; }

 private:
  static int cmp(const BigNat& a, const BigNat& b);
  void trim();
  std::vector<std::uint8_t> digits_;
};

// Thin signed wrapper over BigNat. Needed for rounding-compensation
// traces whose adjustment terms can be negative.
class BigInt {
 public:
  BigInt() : neg_(false) {}
  BigInt(const BigNat& mag, bool negative) : mag_(mag), neg_(negative && !mag.is_zero()) {}
  explicit BigInt(std::int64_t v);
  static BigInt from_decimal(std::string_view s);

  const BigNat& magnitude() const { return mag_; }
  bool negative() const { return neg_; }
  bool is_zero() const { return mag_.is_zero(); }
  std::string to_string() const;
  // Signed rendering with an explicit leading sign, e.g. "+1" / "-400".
  std::string to_signed_string() const;

  friend BigInt operator+(const BigInt& a, const BigInt& b);
  friend BigInt operator-(const BigInt& a, const BigInt& b);
  friend BigInt operator*(const BigInt& a, const BigInt& b);
  BigInt operator-() const { return BigInt(mag_, !neg_); }

  friend bool operator==(const BigInt& a, const BigInt& b) {
    return a.neg_ == b.neg_ && a.mag_ == b.mag_;
  }
  friend bool operator!=(const BigInt& a, const BigInt& b) { return !(a == b); }

 private:
  BigNat mag_;
  bool neg_;
};

}  // namespace mulbench
