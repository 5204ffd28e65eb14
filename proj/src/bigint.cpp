#include "mulbench/bigint.hpp"

#include <algorithm>
#include <stdexcept>

namespace mulbench {

BigNat::BigNat(std::uint64_t v) {
  if (v == 0) {
    digits_.push_back(0);
    return;
  }
  while (v > 0) {
    digits_.push_back(static_cast<std::uint8_t>(v % 10));
    v /= 10;
  }
}

BigNat BigNat::from_decimal(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("BigNat: empty decimal string");
  BigNat out;
  out.digits_.clear();
  for (auto it = s.rbegin(); it != s.rend(); ++it) {
    char c = *it;
    if (c < '0' || c > '9') throw std::invalid_argument("BigNat: non-digit in decimal string");
    out.digits_.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  out.trim();
  return out;
}

std::size_t BigNat::nonzero_digit_count() const {
  std::size_t n = 0;
  for (auto d : digits_)
    if (d != 0) ++n;
  return n;
}

std::string BigNat::to_string() const {
  std::string s;
  s.reserve(digits_.size());
  for (auto it = digits_.rbegin(); it != digits_.rend(); ++it)
    s.push_back(static_cast<char>('0' + *it));
  return s;
}

bool BigNat::fits_u64() const {
  static const BigNat kMax(UINT64_MAX);
  return *this <= kMax;
}

std::uint64_t BigNat::to_u64() const {
  if (!fits_u64()) throw std::overflow_error("BigNat: value exceeds uint64_t");
  std::uint64_t v = 0;
  for (auto it = digits_.rbegin(); it != digits_.rend(); ++it) v = v * 10 + *it;
  return v;
}

int BigNat::cmp(const BigNat& a, const BigNat& b) {
  if (a.digits_.size() != b.digits_.size())
    return a.digits_.size() < b.digits_.size() ? -1 : 1;
  for (std::size_t i = a.digits_.size(); i-- > 0;) {
    if (a.digits_[i] != b.digits_[i]) return a.digits_[i] < b.digits_[i] ? -1 : 1;
  }
  return 0;
}

void BigNat::trim() {
  while (digits_.size() > 1 && digits_.back() == 0) digits_.pop_back();
  if (digits_.empty()) digits_.push_back(0);
}

BigNat operator+(const BigNat& a, const BigNat& b) {
  BigNat out;
  out.digits_.assign(std::max(a.digits_.size(), b.digits_.size()) + 1, 0);
  int carry = 0;
  for (std::size_t i = 0; i < out.digits_.size(); ++i) {
    int s = carry;
    if (i < a.digits_.size()) s += a.digits_[i];
    if (i < b.digits_.size()) s += b.digits_[i];
    out.digits_[i] = static_cast<std::uint8_t>(s % 10);
    carry = s / 10;
  }
  out.trim();
  return out;
}

BigNat operator-(const BigNat& a, const BigNat& b) {
  if (a < b) throw std::underflow_error("BigNat: subtraction would underflow");
  BigNat out;
  out.digits_.assign(a.digits_.size(), 0);
  int borrow = 0;
  for (std::size_t i = 0; i < a.digits_.size(); ++i) {
    int s = a.digits_[i] - borrow - (i < b.digits_.size() ? b.digits_[i] : 0);
    if (s < 0) {
      s += 10;
      borrow = 1;
    } else {
      borrow = 0;
    }
    out.digits_[i] = static_cast<std::uint8_t>(s);
  }
  out.trim();
  return out;
}

BigNat operator*(const BigNat& a, const BigNat& b) {
  BigNat out;
  if (a.is_zero() || b.is_zero()) return out;
  out.digits_.assign(a.digits_.size() + b.digits_.size(), 0);
  for (std::size_t j = 0; j < b.digits_.size(); ++j) {
    if (b.digits_[j] == 0) continue;
    int carry = 0;
    for (std::size_t i = 0; i < a.digits_.size(); ++i) {
      int cur = out.digits_[i + j] + a.digits_[i] * b.digits_[j] + carry;
      out.digits_[i + j] = static_cast<std::uint8_t>(cur % 10);
      carry = cur / 10;
    }
    std::size_t k = a.digits_.size() + j;
    while (carry > 0) {
      int cur = out.digits_[k] + carry;
      out.digits_[k] = static_cast<std::uint8_t>(cur % 10);
      carry = cur / 10;
      ++k;
    }
  }
  out.trim();
  return out;
}

BigNat BigNat::shifted_pow10(std::size_t zeros) const {
  if (is_zero() || zeros == 0) return *this;
  BigNat out;
  out.digits_.assign(zeros, 0);
  out.digits_.insert(out.digits_.end(), digits_.begin(), digits_.end());
  return out;
}

BigInt::BigInt(std::int64_t v) {
  neg_ = v < 0;
  std::uint64_t mag = neg_ ? (~static_cast<std::uint64_t>(v) + 1) : static_cast<std::uint64_t>(v);
  mag_ = BigNat(mag);
  if (mag_.is_zero()) neg_ = false;
}

BigInt BigInt::from_decimal(std::string_view s) {
  bool neg = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  return BigInt(BigNat::from_decimal(s), neg);
}

std::string BigInt::to_string() const {
  return neg_ ? "-" + mag_.to_string() : mag_.to_string();
}

std::string BigInt::to_signed_string() const {
  return (neg_ ? "-" : "+") + mag_.to_string();
}

BigInt operator+(const BigInt& a, const BigInt& b) {
  if (a.neg_ == b.neg_) return BigInt(a.mag_ + b.mag_, a.neg_);
  if (a.mag_ >= b.mag_) return BigInt(a.mag_ - b.mag_, a.neg_);
  return BigInt(b.mag_ - a.mag_, b.neg_);
}

BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

BigInt operator*(const BigInt& a, const BigInt& b) {
  return BigInt(a.mag_ * b.mag_, a.neg_ != b.neg_);
}

}  // namespace mulbench
