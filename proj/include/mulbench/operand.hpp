#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mulbench/bigint.hpp"
#include "mulbench/rng.hpp"

namespace mulbench {

inline constexpr std::size_t kTemplateDigitCap = 32;

// Non-negative integer plus its digit statistics (most significant first).
class Operand {
 public:
  Operand() : value_(0) { sync(); }
  explicit Operand(BigNat value) : value_(std::move(value)) { sync(); }
  explicit Operand(std::uint64_t value) : value_(BigNat(value)) { sync(); }
  static Operand from_decimal(std::string_view s) { return Operand(BigNat::from_decimal(s)); }

  const BigNat& value() const { return value_; }
  // Decimal digits, most significant first.
  const std::vector<std::uint8_t>& digits() const { return digits_; }
  std::size_t n_digits() const { return digits_.size(); }
  std::size_t n_nonzero() const { return n_nonzero_; }
  std::size_t trailing_zeros() const;
  std::string to_string() const { return value_.to_string(); }

  friend bool operator==(const Operand& a, const Operand& b) { return a.value_ == b.value_; }

 private:
  void sync();
  BigNat value_;
  std::vector<std::uint8_t> digits_;
  std::size_t n_nonzero_ = 0;
};

// Digit pattern over {V, 0}; V positions get a uniform digit in 1-9.
struct DigitTemplate {
  std::string pattern;

  // The core family is the curated template set {V, VV, VVV, V0, V00, VV0,
  // V0V}; extended mode admits any V/0 pattern starting with V, up to the
  // 32-digit operand cap.
  static DigitTemplate parse(std::string_view pattern, bool extended = false);
  static bool in_core_family(std::string_view pattern);
  static const std::vector<std::string>& core_family();
};

struct Problem {
  std::string id;
  Operand a;
  Operand b;
  BigNat product;

  static Problem make(std::string id, Operand a, Operand b);
  // Commutativity-canonical key "min x max", used for dedupe and exclusion
  // manifests.
  std::string canonical_key() const;
};

std::string canonical_pair_key(const Operand& a, const Operand& b);

struct LoadMetrics {
  std::size_t d_total = 0;        // n + m
  std::size_t d_nonzero = 0;      // s + t
  std::size_t load_C = 0;         // d_total * d_nonzero
  std::size_t ot_ops = 0;         // n * m
  std::size_t dd_one_sided = 0;   // min(m*s, n*t)
  std::size_t nonzero_products = 0;  // s * t
  std::size_t carry_mult = 0;     // multiplication-stage carry events
  std::size_t carry_add = 0;      // partial-sum addition carry events
  std::size_t carry_count = 0;    // carry_mult + carry_add
};

Operand sample_operand(const DigitTemplate& tmpl, SplitMix64& rng);

BigNat exact_multiply(const Operand& a, const Operand& b);

LoadMetrics compute_load(const Operand& a, const Operand& b);

struct CarryCounts {
  std::size_t mult_stage = 0;
  std::size_t add_stage = 0;
  std::size_t total() const { return mult_stage + add_stage; }
};

// Carry events in a schoolbook multiplication: every non-zero carry out of a
// digit-product cell, plus every non-zero carry out of a column when the
// shifted partial products are summed column-wise. Order-sensitive: b is the
// multiplier whose digits form the partial products.
CarryCounts count_carries(const Operand& a, const Operand& b);

// Order-independent carry count used by the cost model and load metrics:
// the multiplicand is the operand with more digits (ties: the larger value),
// the way the tableau is normally arranged by hand.
CarryCounts count_carries_canonical(const Operand& a, const Operand& b);

}  // namespace mulbench
