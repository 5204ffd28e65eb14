#include "mulbench/operand.hpp"

#include <algorithm>
#include <stdexcept>

namespace mulbench {

void Operand::sync() {
  std::string s = value_.to_string();
  digits_.assign(s.size(), 0);
  n_nonzero_ = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    digits_[i] = static_cast<std::uint8_t>(s[i] - '0');
    if (digits_[i] != 0) ++n_nonzero_;
  }
}

std::size_t Operand::trailing_zeros() const {
  if (value_.is_zero()) return 0;
  std::size_t z = 0;
  for (auto it = digits_.rbegin(); it != digits_.rend() && *it == 0; ++it) ++z;
  return z;
}

const std::vector<std::string>& DigitTemplate::core_family() {
  static const std::vector<std::string> family = {"V", "VV", "VVV", "V0", "V00", "VV0", "V0V"};
  return family;
}

bool DigitTemplate::in_core_family(std::string_view pattern) {
  const auto& fam = core_family();
  return std::find(fam.begin(), fam.end(), pattern) != fam.end();
}

DigitTemplate DigitTemplate::parse(std::string_view pattern, bool extended) {
  if (pattern.empty()) throw std::invalid_argument("digit template: empty pattern");
  if (pattern.front() != 'V')
    throw std::invalid_argument("digit template '" + std::string(pattern) +
                                "': must start with V");
  for (char c : pattern) {
    if (c != 'V' && c != '0')
      throw std::invalid_argument("digit template '" + std::string(pattern) +
                                  "': symbols must be V or 0");
  }
  if (!extended) {
    if (!in_core_family(pattern))
      throw std::invalid_argument("digit template '" + std::string(pattern) +
                                  "': not in the core family {V, VV, VVV, V0, V00, VV0, V0V}");
  } else if (pattern.size() > kTemplateDigitCap) {
    throw std::invalid_argument("digit template '" + std::string(pattern) +
                                "': longer than the 32-digit operand cap");
  }
  return DigitTemplate{std::string(pattern)};
}

Problem Problem::make(std::string id, Operand a, Operand b) {
  BigNat product = exact_multiply(a, b);
  return Problem{std::move(id), std::move(a), std::move(b), std::move(product)};
}

std::string canonical_pair_key(const Operand& a, const Operand& b) {
  const BigNat& lo = a.value() <= b.value() ? a.value() : b.value();
  const BigNat& hi = a.value() <= b.value() ? b.value() : a.value();
  return lo.to_string() + "x" + hi.to_string();
}

std::string Problem::canonical_key() const { return canonical_pair_key(a, b); }

Operand sample_operand(const DigitTemplate& tmpl, SplitMix64& rng) {
  std::string digits;
  digits.reserve(tmpl.pattern.size());
  for (char c : tmpl.pattern) {
    if (c == 'V') {
      digits.push_back(static_cast<char>('1' + rng.next_below(9)));
    } else {
      digits.push_back('0');
    }
  }
  return Operand::from_decimal(digits);
}

BigNat exact_multiply(const Operand& a, const Operand& b) { return a.value() * b.value(); }

CarryCounts count_carries(const Operand& a, const Operand& b) {
  CarryCounts counts;
  // Digits least significant first for the simulation.
  std::vector<int> ad(a.digits().rbegin(), a.digits().rend());
  std::vector<int> bd(b.digits().rbegin(), b.digits().rend());

  std::vector<std::vector<int>> partials;  // aligned at their shift offset
  for (std::size_t j = 0; j < bd.size(); ++j) {
    std::vector<int> partial(j, 0);
    int carry = 0;
    for (std::size_t i = 0; i < ad.size(); ++i) {
      int cell = ad[i] * bd[j] + carry;
      partial.push_back(cell % 10);
      carry = cell / 10;
      if (carry > 0) ++counts.mult_stage;
    }
    while (carry > 0) {
      partial.push_back(carry % 10);
      carry /= 10;
    }
    partials.push_back(std::move(partial));
  }

  std::size_t width = 0;
  for (const auto& p : partials) width = std::max(width, p.size());
  int carry = 0;
  for (std::size_t col = 0; col < width || carry > 0; ++col) {
    int sum = carry;
    for (const auto& p : partials)
      if (col < p.size()) sum += p[col];
    carry = sum / 10;
    if (carry > 0) ++counts.add_stage;
  }
  return counts;
}

CarryCounts count_carries_canonical(const Operand& a, const Operand& b) {
  bool a_first = a.n_digits() != b.n_digits() ? a.n_digits() > b.n_digits()
                                              : a.value() >= b.value();
  return a_first ? count_carries(a, b) : count_carries(b, a);
}

LoadMetrics compute_load(const Operand& a, const Operand& b) {
  LoadMetrics m;
  std::size_t n = a.n_digits(), mm = b.n_digits();
  std::size_t s = a.n_nonzero(), t = b.n_nonzero();
  m.d_total = n + mm;
  m.d_nonzero = s + t;
  m.load_C = m.d_total * m.d_nonzero;
  m.ot_ops = n * mm;
  m.dd_one_sided = std::min(mm * s, n * t);
  m.nonzero_products = s * t;
  CarryCounts c = count_carries_canonical(a, b);
  m.carry_mult = c.mult_stage;
  m.carry_add = c.add_stage;
  m.carry_count = c.total();
  return m;
}

}  // namespace mulbench
