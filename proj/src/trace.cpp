#include "mulbench/trace.hpp"

#include <algorithm>
#include <cassert>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace mulbench {

namespace {

constexpr const char* kTimes = "×";  // ×

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

// ---- expression evaluator ----

struct ExprParser {
  std::string_view s;
  std::size_t pos = 0;
  bool ok = true;

  void skip_ws() {
    while (pos < s.size() && s[pos] == ' ') ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  bool eat_times() {
    skip_ws();
    if (pos < s.size() && s[pos] == '*') {
      ++pos;
      return true;
    }
    if (pos + 1 < s.size() && static_cast<unsigned char>(s[pos]) == 0xC3 &&
        static_cast<unsigned char>(s[pos + 1]) == 0x97) {
      pos += 2;
      return true;
    }
    return false;
  }

  std::optional<BigInt> atom() {
    skip_ws();
    if (eat('(')) {
      auto inner = expr();
      if (!inner || !eat(')')) return std::nullopt;
      return inner;
    }
    std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) return std::nullopt;
    return BigInt(BigNat::from_decimal(s.substr(start, pos - start)), false);
  }

  std::optional<BigInt> factor() {
    skip_ws();
    bool neg = false;
    while (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
      if (s[pos] == '-') neg = !neg;
      ++pos;
      skip_ws();
    }
    auto v = atom();
    if (!v) return std::nullopt;
    return neg ? -*v : *v;
  }

  std::optional<BigInt> term() {
    auto v = factor();
    if (!v) return std::nullopt;
    while (eat_times()) {
      auto rhs = factor();
      if (!rhs) return std::nullopt;
      v = *v * *rhs;
    }
    return v;
  }

  std::optional<BigInt> expr() {
    auto v = term();
    if (!v) return std::nullopt;
    for (;;) {
      skip_ws();
      if (pos < s.size() && s[pos] == '+') {
        ++pos;
        auto rhs = term();
        if (!rhs) return std::nullopt;
        v = *v + *rhs;
      } else if (pos < s.size() && s[pos] == '-') {
        ++pos;
        auto rhs = term();
        if (!rhs) return std::nullopt;
        v = *v - *rhs;
      } else {
        break;
      }
    }
    return v;
  }
};

std::optional<BigInt> eval_full(std::string_view text) {
  ExprParser p{text};
  auto v = p.expr();
  if (!v) return std::nullopt;
  p.skip_ws();
  if (p.pos != text.size()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<BigInt> eval_expression(std::string_view expr) { return eval_full(expr); }

std::string ReasoningTrace::text() const { return join_lines(lines); }

// ---- shared generation helpers ----

namespace {

std::string prompt_line(const Problem& p) {
  return "What is " + p.a.to_string() + " " + kTimes + " " + p.b.to_string() + "?";
}

struct RoundedBase {
  BigNat base;
  BigInt delta;  // operand - base
};

// Nearest round base for an operand: the closest leading-digit multiple of
// 10^(d-1), or the closest multiple of 25 when that is nearer (covers trace
// bases like 75 and 125). Ties go to the power-of-ten multiple.
RoundedBase round_base(const Operand& x) {
  if (x.n_digits() == 1) return {x.value(), BigInt(0)};
  BigNat scale = BigNat(1).shifted_pow10(x.n_digits() - 1);
  BigNat lead((std::uint64_t)x.digits()[0]);
  BigNat low = lead * scale;
  BigNat rem = x.value() - low;
  BigNat base10 = (rem + rem >= scale) ? (lead + BigNat(1)) * scale : low;
  BigInt d10 = BigInt(x.value(), false) - BigInt(base10, false);

  if (x.value().fits_u64() && x.value() >= BigNat(13)) {
    std::uint64_t v = x.value().to_u64();
    std::uint64_t base25 = ((2 * v + 25) / 50) * 25;
    if (base25 >= 25) {
      BigInt d25 = BigInt(x.value(), false) - BigInt(BigNat(base25), false);
      if (d25.magnitude() < d10.magnitude()) return {BigNat(base25), d25};
    }
  }
  return {base10, d10};
}

const char* place_names[] = {"ones",         "tens",         "hundreds",
                             "thousands",    "ten-thousands", "hundred-thousands",
                             "millions",     "ten-millions", "hundred-millions",
                             "billions"};

std::string place_name(std::size_t j) {
  if (j < std::size(place_names)) return place_names[j];
  return "10^" + std::to_string(j);
}

std::string ordinal_word(std::size_t j) {  // 0-based
  static const char* low[] = {"First",   "Second",  "Third", "Fourth", "Fifth",
                              "Sixth",   "Seventh", "Eighth", "Ninth",  "Tenth",
                              "Eleventh", "Twelfth", "Thirteenth", "Fourteenth", "Fifteenth",
                              "Sixteenth", "Seventeenth", "Eighteenth", "Nineteenth", "Twentieth"};
  if (j < std::size(low)) return low[j];
  return "No. " + std::to_string(j + 1);
}

void finish_trace(ReasoningTrace& t) {
  TraceExtract ex = extract_trace_claims(t.lines);
  if (ex.bad_line) {
    throw std::logic_error("generated trace has an unparseable line " +
                           std::to_string(*ex.bad_line) + ": " + ex.error);
  }
  t.assertions = std::move(ex.assertions);
}

}  // namespace

namespace {

// Symmetric (B+k)(B-k) structure around a convenient midpoint: the midpoint
// must be a multiple of 10 or 25 to count as a usable round base.
struct SymmetricPlan {
  BigNat base, k;
};

std::optional<SymmetricPlan> symmetric_plan(const Problem& p) {
  if (!p.a.value().fits_u64() || !p.b.value().fits_u64()) return std::nullopt;
  std::uint64_t a = p.a.value().to_u64(), b = p.b.value().to_u64();
  if (a == b || (a + b) % 2 != 0) return std::nullopt;
  std::uint64_t mid = (a + b) / 2;
  if (mid < 10 || (mid % 10 != 0 && mid % 25 != 0)) return std::nullopt;
  std::uint64_t k = a > b ? (a - b) / 2 : (b - a) / 2;
  return SymmetricPlan{BigNat(mid), BigNat(k)};
}

}  // namespace

ReasoningTrace gen_rc_trace(const Problem& p) {
  ReasoningTrace t;
  t.problem_id = p.id;
  t.heuristic = Heuristic::RC;
  t.claimed_answer = p.product;
  std::string prod = p.product.to_string();

  std::optional<SymmetricPlan> sym = symmetric_plan(p);
  RoundedBase ra, rb;
  if (sym) {
    BigInt base_signed(sym->base, false);
    ra = {sym->base, BigInt(p.a.value(), false) - base_signed};
    rb = {sym->base, BigInt(p.b.value(), false) - base_signed};
  } else {
    ra = round_base(p.a);
    rb = round_base(p.b);
  }
  bool symmetric = sym.has_value();

  t.lines.push_back(prompt_line(p));
  t.lines.push_back("Let me round to convenient bases and adjust.");
  if (!ra.delta.is_zero())
    t.lines.push_back(p.a.to_string() + " is close to " + ra.base.to_string() +
                      " (difference: " + ra.delta.to_signed_string() + ").");
  if (!rb.delta.is_zero())
    t.lines.push_back(p.b.to_string() + " is close to " + rb.base.to_string() +
                      " (difference: " + rb.delta.to_signed_string() + ").");

  if (symmetric) {
    BigNat base = ra.base;
    BigNat k = ra.delta.magnitude();
    BigNat base2 = base * base;
    BigNat k2 = k * k;
    t.lines.push_back("This is a difference of squares: " + base.to_string() + " " + kTimes +
                      " " + base.to_string() + " - " + k.to_string() + " " + kTimes + " " +
                      k.to_string() + ".");
    t.lines.push_back(base.to_string() + " " + kTimes + " " + base.to_string() + " = " +
                      base2.to_string() + ".");
    t.lines.push_back(k.to_string() + " " + kTimes + " " + k.to_string() + " = " +
                      k2.to_string() + ".");
    t.lines.push_back(base2.to_string() + " - " + k2.to_string() + " = " + prod + ".");
  } else {
    BigInt big_a(ra.base, false), big_b(rb.base, false);
    BigInt main = big_a * big_b;
    t.lines.push_back("Start with " + ra.base.to_string() + " " + kTimes + " " +
                      rb.base.to_string() + " = " + main.to_string() + ".");
    std::vector<BigInt> terms{main};
    if (!rb.delta.is_zero()) {
      BigInt adj = big_a * rb.delta;
      t.lines.push_back("Adjustment for " + p.b.to_string() + ": " + ra.base.to_string() + " " +
                        kTimes + " " + rb.delta.to_string() + " = " + adj.to_string() + ".");
      terms.push_back(adj);
    }
    if (!ra.delta.is_zero()) {
      BigInt adj = ra.delta * big_b;
      t.lines.push_back("Adjustment for " + p.a.to_string() + ": " + ra.delta.to_string() + " " +
                        kTimes + " " + rb.base.to_string() + " = " + adj.to_string() + ".");
      terms.push_back(adj);
    }
    if (!ra.delta.is_zero() && !rb.delta.is_zero()) {
      BigInt cross = ra.delta * rb.delta;
      t.lines.push_back("Cross term: " + ra.delta.to_string() + " " + kTimes + " " +
                        rb.delta.to_string() + " = " + cross.to_signed_string() + ".");
      terms.push_back(cross);
    }
    if (terms.size() > 1) {
      std::string sum = "Total: " + terms[0].to_string();
      for (std::size_t i = 1; i < terms.size(); ++i)
        sum += " + (" + terms[i].to_signed_string() + ")";
      sum += " = " + prod + ".";
      t.lines.push_back(sum);
    }
  }
  t.lines.push_back("Answer: " + prod);
  finish_trace(t);
  return t;
}

namespace {

struct DdSplit {
  Operand big, other;
  BigNat tens, ones;
};

// Splits the larger operand (ties: the first) into tens and ones components.
std::optional<DdSplit> dd_split(const Problem& p) {
  const Operand& big = p.b.value() > p.a.value() ? p.b : p.a;
  const Operand& other = p.b.value() > p.a.value() ? p.a : p.b;
  if (big.n_digits() < 2) return std::nullopt;
  BigNat ones((std::uint64_t)big.digits().back());
  BigNat tens = big.value() - ones;
  return DdSplit{big, other, tens, ones};
}

}  // namespace

ReasoningTrace gen_dd_trace(const Problem& p) {
  ReasoningTrace t;
  t.problem_id = p.id;
  t.heuristic = Heuristic::DD;
  t.claimed_answer = p.product;
  std::string prod = p.product.to_string();

  t.lines.push_back(prompt_line(p));
  auto split = dd_split(p);
  if (!split) {
    t.lines.push_back(p.a.to_string() + " " + kTimes + " " + p.b.to_string() + " = " + prod +
                      ".");
    t.lines.push_back("Answer: " + prod);
    finish_trace(t);
    return t;
  }
  const std::string x = split->big.to_string();
  const std::string y = split->other.to_string();
  BigNat p1 = split->tens * split->other.value();
  BigNat p2 = split->ones * split->other.value();
  t.lines.push_back("Let me decompose " + x + " into " + split->tens.to_string() + " + " +
                    split->ones.to_string() + ".");
  t.lines.push_back("First compute " + split->tens.to_string() + " " + kTimes + " " + y + ":");
  t.lines.push_back(split->tens.to_string() + " " + kTimes + " " + y + " = " + p1.to_string() +
                    ".");
  t.lines.push_back("Then compute " + split->ones.to_string() + " " + kTimes + " " + y + ":");
  t.lines.push_back(split->ones.to_string() + " " + kTimes + " " + y + " = " + p2.to_string() +
                    ".");
  t.lines.push_back("Now sum the partial products:");
  t.lines.push_back(p1.to_string() + " + " + p2.to_string() + " = " + prod + ".");
  t.lines.push_back("Answer: " + prod);
  finish_trace(t);
  return t;
}

ReasoningTrace gen_ot_trace(const Problem& p) {
  ReasoningTrace t;
  t.problem_id = p.id;
  t.heuristic = Heuristic::OT;
  t.claimed_answer = p.product;
  std::string prod = p.product.to_string();

  t.lines.push_back(prompt_line(p));
  t.lines.push_back("Let me use column multiplication step by step.");

  const auto& a_digits = p.a.digits();  // msb first
  std::vector<std::uint8_t> b_lsb(p.b.digits().rbegin(), p.b.digits().rend());
  std::vector<BigNat> shifted;

  for (std::size_t j = 0; j < b_lsb.size(); ++j) {
    unsigned m = b_lsb[j];
    t.lines.push_back("Step " + std::to_string(j + 1) + ": Multiply " + p.a.to_string() +
                      " by " + place_name(j) + " digit " + std::to_string(m) + ":");
    unsigned carry = 0;
    for (std::size_t i = a_digits.size(); i-- > 0;) {
      unsigned d = a_digits[i];
      unsigned cell = d * m;
      unsigned q = cell + carry;
      std::string line = "  " + std::to_string(d) + " " + kTimes + " " + std::to_string(m) +
                         " = " + std::to_string(cell);
      if (carry > 0) line += ", plus carry = " + std::to_string(q);
      bool final_cell = i == 0;
      if (!final_cell) {
        line += ", write " + std::to_string(q % 10) + ", carry " + std::to_string(q / 10);
        carry = q / 10;
      }
      line += ".";
      t.lines.push_back(line);
    }
    BigNat pp = p.a.value() * BigNat(m);
    std::string line = "  " + ordinal_word(j) + " partial product: " + pp.to_string();
    if (j > 0) {
      BigNat shift = BigNat(1).shifted_pow10(j);
      BigNat sv = pp.shifted_pow10(j);
      line += " (shifted by " + shift.to_string() + " = " + sv.to_string() + ")";
      shifted.push_back(sv);
    } else {
      shifted.push_back(pp);
    }
    line += ".";
    t.lines.push_back(line);
  }

  if (b_lsb.size() > 1) {
    t.lines.push_back("Step " + std::to_string(b_lsb.size() + 1) + ": Add partial products:");
    std::string sum = "  " + shifted[0].to_string();
    for (std::size_t i = 1; i < shifted.size(); ++i) sum += " + " + shifted[i].to_string();
    sum += " = " + prod + ".";
    t.lines.push_back(sum);
  }
  t.lines.push_back("Answer: " + prod);
  finish_trace(t);
  return t;
}

ReasoningTrace gen_style_trace(const Problem& p) {
  ReasoningTrace t;
  t.problem_id = p.id;
  t.heuristic = Heuristic::STYLE;
  t.claimed_answer = p.product;
  t.lines.push_back(prompt_line(p));
  t.lines.push_back("Step 1: Read the problem and note the two factors.");
  t.lines.push_back("Step 2: Choose a strategy that fits the numbers.");
  t.lines.push_back("Step 3: Carry out the intermediate calculations carefully.");
  t.lines.push_back("Step 4: Double-check the result before answering.");
  t.lines.push_back("Answer: " + p.product.to_string());
  finish_trace(t);
  return t;
}

ReasoningTrace gen_trace(const Problem& p, Heuristic h) {
  switch (h) {
    case Heuristic::RC: return gen_rc_trace(p);
    case Heuristic::DD: return gen_dd_trace(p);
    case Heuristic::OT: return gen_ot_trace(p);
    case Heuristic::STYLE: return gen_style_trace(p);
  }
  throw std::invalid_argument("gen_trace: bad heuristic");
}

// ---- extraction / verification ----

namespace {

// Regexes below use the two UTF-8 bytes of the multiplication sign directly.
const std::string kX = "×";

std::regex make_re(const std::string& pattern) { return std::regex(pattern); }

const std::regex re_what(make_re("^What is (\\d+) " + kX + " (\\d+)\\?$"));
const std::regex re_answer("^Answer: (\\d+)$");
const std::regex re_close("^(\\d+) is close to (\\d+) \\(difference: ([+-]\\d+)\\)\\.$");
const std::regex re_decompose("^Let me decompose (\\d+) into (\\d+) \\+ (\\d+)\\.$");
const std::regex re_step_mul("^Step (\\d+): Multiply (\\d+) by ([a-z0-9^-]+) digit (\\d):$");
const std::regex re_cell(make_re("^  (\\d) " + kX +
                                 " (\\d) = (\\d+)(?:, plus carry = (\\d+))?(?:, write (\\d), "
                                 "carry (\\d+))?\\.$"));
const std::regex re_partial(
    "^  [A-Za-z. 0-9]+ partial product: (\\d+)(?: \\(shifted by (\\d+) = (\\d+)\\))?\\.$");

// Longest suffix of `text` that parses as a complete expression.
std::optional<std::string> suffix_expression(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    bool candidate = (c >= '0' && c <= '9') || c == '(' || c == '-' || c == '+';
    if (!candidate) continue;
    std::string_view sub = text.substr(i);
    if (eval_full(sub)) return std::string(sub);
  }
  return std::nullopt;
}

struct OtState {
  bool active = false;
  std::string a_str;
  std::vector<std::uint8_t> a_lsb;
  unsigned m = 0;
  unsigned carry = 0;
  std::size_t cell_index = 0;
  std::size_t step_index = 0;  // 0-based multiply step
};

}  // namespace

TraceExtract extract_trace_claims(const std::vector<std::string>& lines) {
  TraceExtract out;
  OtState ot;

  auto fail = [&](std::size_t line_no, const std::string& why) {
    if (!out.bad_line) {
      out.bad_line = line_no;
      out.error = why;
    }
  };

  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const std::string& line = lines[idx];
    std::size_t line_no = idx + 1;
    std::smatch m;

    if (std::regex_match(line, m, re_what)) {
      out.a = Operand::from_decimal(m[1].str());
      out.b = Operand::from_decimal(m[2].str());
      continue;
    }
    if (std::regex_match(line, m, re_answer)) {
      out.claimed_answer = BigNat::from_decimal(m[1].str());
      ot.active = false;
      continue;
    }
    if (std::regex_match(line, m, re_close)) {
      out.assertions.push_back(
          {line_no, m[2].str() + " + (" + m[3].str() + ")", BigInt::from_decimal(m[1].str())});
      continue;
    }
    if (std::regex_match(line, m, re_decompose)) {
      out.assertions.push_back(
          {line_no, m[2].str() + " + " + m[3].str(), BigInt::from_decimal(m[1].str())});
      continue;
    }
    if (std::regex_match(line, m, re_step_mul)) {
      std::size_t step = std::stoul(m[1].str());
      ot.active = true;
      ot.a_str = m[2].str();
      Operand a = Operand::from_decimal(ot.a_str);
      ot.a_lsb.assign(a.digits().rbegin(), a.digits().rend());
      ot.m = static_cast<unsigned>(m[4].str()[0] - '0');
      ot.carry = 0;
      ot.cell_index = 0;
      ot.step_index = step - 1;
      if (out.b) {
        const auto& bd = out.b->digits();
        if (ot.step_index >= bd.size() || bd[bd.size() - 1 - ot.step_index] != ot.m)
          fail(line_no, "multiplier digit does not match the stated problem");
      }
      continue;
    }
    if (ot.active && std::regex_match(line, m, re_cell)) {
      unsigned d = static_cast<unsigned>(m[1].str()[0] - '0');
      unsigned mult = static_cast<unsigned>(m[2].str()[0] - '0');
      if (mult != ot.m) fail(line_no, "cell multiplier differs from the step digit");
      if (ot.cell_index < ot.a_lsb.size() && d != ot.a_lsb[ot.cell_index])
        fail(line_no, "cell digit differs from the multiplicand digit");
      const std::string p_str = m[3].str();
      out.assertions.push_back(
          {line_no, m[1].str() + " " + kX + " " + m[2].str(), BigInt::from_decimal(p_str)});
      std::string q_str = p_str;
      if (m[4].matched) {
        q_str = m[4].str();
      }
      // p + carry_in = q; when the clause is absent this asserts carry_in == 0.
      out.assertions.push_back(
          {line_no, p_str + " + " + std::to_string(ot.carry), BigInt::from_decimal(q_str)});
      if (m[5].matched) {
        out.assertions.push_back({line_no, m[6].str() + " " + kX + " 10 + " + m[5].str(),
                                  BigInt::from_decimal(q_str)});
        ot.carry = static_cast<unsigned>(std::stoul(m[6].str()));
      }
      ++ot.cell_index;
      continue;
    }
    if (ot.active && std::regex_match(line, m, re_partial)) {
      const std::string pp = m[1].str();
      out.assertions.push_back(
          {line_no, ot.a_str + " " + kX + " " + std::to_string(ot.m), BigInt::from_decimal(pp)});
      if (m[2].matched) {
        std::string shift = m[2].str();
        std::string expected_shift = BigNat(1).shifted_pow10(ot.step_index).to_string();
        if (shift != expected_shift) fail(line_no, "shift does not match the step position");
        out.assertions.push_back(
            {line_no, pp + " " + kX + " " + shift, BigInt::from_decimal(m[3].str())});
      } else if (ot.step_index != 0) {
        fail(line_no, "missing shift on a shifted partial product");
      }
      ot.active = false;
      continue;
    }

    // Generic equation line: "[prose] EXPR = EXPR."
    std::size_t eq_count = static_cast<std::size_t>(std::count(line.begin(), line.end(), '='));
    if (eq_count == 0) continue;  // prose
    if (eq_count > 1) {
      fail(line_no, "multiple '=' in an unrecognized line");
      continue;
    }
    std::size_t eq = line.find('=');
    std::string left = line.substr(0, eq);
    std::string right = line.substr(eq + 1);
    while (!right.empty() && (right.back() == ' ' || right.back() == '.')) right.pop_back();
    auto lhs = suffix_expression(left);
    auto rhs_val = eval_full(right.empty() ? std::string_view{} : std::string_view(right));
    if (!lhs || !rhs_val) {
      fail(line_no, "unparseable equation");
      continue;
    }
    out.assertions.push_back({line_no, *lhs, *rhs_val});
  }

  // Final claim: the answer equals the product of the stated operands.
  if (out.a && out.b && out.claimed_answer) {
    out.assertions.push_back({lines.size(),
                              out.a->to_string() + " " + kX + " " + out.b->to_string(),
                              BigInt(*out.claimed_answer, false)});
  }
  return out;
}

VerifyResult verify_trace(const ReasoningTrace& t) {
  TraceExtract ex = extract_trace_claims(t.lines);
  if (ex.bad_line) return {false, *ex.bad_line, ex.error};
  if (!ex.a || !ex.b) return {false, 1, "missing or malformed problem statement"};
  if (!ex.claimed_answer) return {false, 0, "missing Answer line"};
  for (const auto& assertion : ex.assertions) {
    auto val = eval_full(assertion.lhs);
    if (!val) return {false, assertion.line, "unparseable assertion: " + assertion.lhs};
    if (*val != assertion.rhs) {
      return {false, assertion.line,
              assertion.lhs + " evaluates to " + val->to_string() + ", not " +
                  assertion.rhs.to_string()};
    }
  }
  if (*ex.claimed_answer != t.claimed_answer)
    return {false, 0, "trace claimed_answer differs from its Answer line"};
  return {true, 0, ""};
}

VerifyResult verify_trace_text(const std::string& text) {
  ReasoningTrace t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) t.lines.push_back(line);
  TraceExtract ex = extract_trace_claims(t.lines);
  if (!ex.claimed_answer) return {false, 0, "missing Answer line"};
  t.claimed_answer = *ex.claimed_answer;
  return verify_trace(t);
}

bool verify_step(const std::string& step) {
  std::size_t eq = step.find('=');
  if (eq == std::string::npos) return false;
  if (step.find('=', eq + 1) != std::string::npos) return false;
  std::string left = step.substr(0, eq);
  std::string right = step.substr(eq + 1);
  while (!right.empty() && (right.back() == ' ' || right.back() == '.')) right.pop_back();
  auto lhs = suffix_expression(left);
  auto rhs = eval_full(right);
  if (!lhs || !rhs) return false;
  auto lv = eval_full(*lhs);
  return lv && *lv == *rhs;
}

// ---- contrastive pairs ----

namespace {

struct StepParts {
  std::string lhs;                    // fixed wording
  std::vector<BigNat> values;         // editable rhs values (magnitudes)
  std::vector<bool> negated;          // sign carried by the term
  bool subtract_join = false;         // join rhs with " - " instead of " + "
};

std::string render_rhs(const StepParts& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.values.size(); ++i) {
    if (i) out += parts.subtract_join ? " - " : " + ";
    if (parts.negated[i]) {
      out += "(-" + parts.values[i].to_string() + ")";
    } else {
      out += parts.values[i].to_string();
    }
  }
  return out;
}

StepParts step_parts_for(const Problem& p, Heuristic h) {
  StepParts parts;
  if (h == Heuristic::DD) {
    auto split = dd_split(p);
    if (split) {
      parts.lhs = split->tens.to_string() + " " + kX + " " + split->other.to_string() + " + " +
                  split->ones.to_string() + " " + kX + " " + split->other.to_string();
      parts.values = {split->tens * split->other.value(), split->ones * split->other.value()};
      parts.negated = {false, false};
      return parts;
    }
  } else if (h == Heuristic::RC) {
    if (auto sym = symmetric_plan(p)) {
      parts.lhs = sym->base.to_string() + " " + kX + " " + sym->base.to_string() + " - " +
                  sym->k.to_string() + " " + kX + " " + sym->k.to_string();
      parts.values = {sym->base * sym->base, sym->k * sym->k};
      parts.negated = {false, false};
      parts.subtract_join = true;
      return parts;
    }
    RoundedBase ra = round_base(p.a);
    RoundedBase rb = round_base(p.b);
    BigInt main = BigInt(ra.base, false) * BigInt(rb.base, false);
    parts.lhs = ra.base.to_string() + " " + kX + " " + rb.base.to_string();
    parts.values = {main.magnitude()};
    parts.negated = {false};
    auto add_term = [&](const BigInt& factor_l, const std::string& l, const BigInt& factor_r,
                        const std::string& r) {
      BigInt v = factor_l * factor_r;
      parts.lhs += " + (" + l + ") " + kX + " (" + r + ")";
      parts.values.push_back(v.magnitude());
      parts.negated.push_back(v.negative());
    };
    if (!rb.delta.is_zero())
      add_term(BigInt(ra.base, false), ra.base.to_string(), rb.delta, rb.delta.to_string());
    if (!ra.delta.is_zero())
      add_term(ra.delta, ra.delta.to_string(), BigInt(rb.base, false), rb.base.to_string());
    if (!ra.delta.is_zero() && !rb.delta.is_zero())
      add_term(ra.delta, ra.delta.to_string(), rb.delta, rb.delta.to_string());
    return parts;
  } else if (h == Heuristic::OT) {
    // Step: per-digit products on the left, shifted partial values on the
    // right; the edit lands on one of the right-hand values.
    std::vector<std::uint8_t> b_lsb(p.b.digits().rbegin(), p.b.digits().rend());
    if (b_lsb.size() > 1) {
      std::string lhs;
      for (std::size_t j = 0; j < b_lsb.size(); ++j) {
        if (j) lhs += " + ";
        lhs += p.a.to_string() + " " + kX + " " + std::to_string(b_lsb[j]) + " " + kX + " " +
               BigNat(1).shifted_pow10(j).to_string();
        parts.values.push_back((p.a.value() * BigNat(b_lsb[j])).shifted_pow10(j));
        parts.negated.push_back(false);
      }
      parts.lhs = lhs;
      return parts;
    }
  }
  // Degenerate fallback: the whole product line.
  parts.lhs = p.a.to_string() + " " + kX + " " + p.b.to_string();
  parts.values = {p.product};
  parts.negated = {false};
  return parts;
}

}  // namespace

ContrastivePair gen_contrastive_pair(const Problem& p, Heuristic h, SplitMix64& rng) {
  if (h == Heuristic::STYLE)
    throw std::invalid_argument("gen_contrastive_pair: STYLE has no step pair");
  StepParts parts = step_parts_for(p, h);
  std::string correct = parts.lhs + " = " + render_rhs(parts);

  // Candidate edits: +/-10, +/-5, or +/-1 on a non-final digit, keeping the
  // digit count and positivity of the edited value.
  struct Edit {
    std::size_t target;
    BigInt delta;
  };
  std::vector<Edit> edits;
  for (std::size_t t = 0; t < parts.values.size(); ++t) {
    const BigNat& v = parts.values[t];
    std::vector<BigInt> deltas = {BigInt(10), BigInt(-10), BigInt(5), BigInt(-5)};
    for (std::size_t k = 1; k < v.digit_count(); ++k) {
      BigNat step = BigNat(1).shifted_pow10(k);
      deltas.push_back(BigInt(step, false));
      deltas.push_back(BigInt(step, true));
    }
    for (const auto& d : deltas) {
      BigInt edited = BigInt(v, false) + d;
      if (edited.negative() || edited.is_zero()) continue;
      if (edited.magnitude().digit_count() != v.digit_count()) continue;
      if (edited.magnitude() == v) continue;
      edits.push_back({t, d});
    }
  }
  if (edits.empty())
    throw std::runtime_error("gen_contrastive_pair: no digit-preserving edit exists for " +
                             p.canonical_key());
  const Edit& e = edits[rng.next_below(edits.size())];
  StepParts corrupted = parts;
  BigNat before = corrupted.values[e.target];
  corrupted.values[e.target] = (BigInt(before, false) + e.delta).magnitude();
  std::string incorrect = parts.lhs + " = " + render_rhs(corrupted);

  ContrastivePair pair;
  pair.problem_id = p.id;
  pair.heuristic = h;
  pair.correct_step = correct;
  pair.incorrect_step = incorrect;
  pair.corruption = before.to_string() + " -> " + corrupted.values[e.target].to_string() +
                    " (delta " + e.delta.to_signed_string() + ")";
  return pair;
}

// ---- trace dataset ----

namespace {

const std::uint64_t kRcTraceBases[] = {25, 50, 75, 100, 125, 150, 175, 200, 250, 300, 400, 500};

Problem sample_rc_problem(SplitMix64& rng, std::size_t idx, Heuristic h) {
  std::uint64_t base = kRcTraceBases[rng.next_below(std::size(kRcTraceBases))];
  std::uint64_t a, b;
  if (rng.next_below(2) == 0) {
    std::uint64_t k = 1 + rng.next_below(5);
    a = base - k;
    b = base + k;
  } else {
    auto offset = [&]() {
      std::int64_t k = 1 + static_cast<std::int64_t>(rng.next_below(5));
      return rng.next_below(2) == 0 ? k : -k;
    };
    a = static_cast<std::uint64_t>(static_cast<std::int64_t>(base) + offset());
    b = static_cast<std::uint64_t>(static_cast<std::int64_t>(base) + offset());
  }
  if (rng.next_below(2) == 0) std::swap(a, b);
  std::string id = std::string("tr_") + heuristic_name(h) + "_" + std::to_string(idx);
  return Problem::make(id, Operand(a), Operand(b));
}

Problem sample_dd_problem(SplitMix64& rng, std::size_t idx, Heuristic h) {
  std::uint64_t a = 0, b = 0;
  switch (rng.next_below(3)) {
    case 0: {  // trailing-zero factor
      a = 10 * (1 + rng.next_below(9)) + 1 + rng.next_below(9);
      b = (1 + rng.next_below(9)) * (rng.next_below(2) == 0 ? 10 : 100);
      break;
    }
    case 1: {  // easy tens-plus-ones
      a = 10 * (2 + rng.next_below(8)) + 1 + rng.next_below(3);
      b = 10 + rng.next_below(90);
      break;
    }
    default: {  // generic two-digit
      a = 10 + rng.next_below(90);
      b = 10 + rng.next_below(90);
      break;
    }
  }
  if (rng.next_below(2) == 0) std::swap(a, b);
  std::string id = std::string("tr_") + heuristic_name(h) + "_" + std::to_string(idx);
  return Problem::make(id, Operand(a), Operand(b));
}

Problem sample_ot_problem(SplitMix64& rng, std::size_t idx, Heuristic h) {
  auto dense = [&](std::size_t len, unsigned lo) {
    std::string s;
    s.push_back(static_cast<char>('0' + lo + rng.next_below(10 - lo)));
    while (s.size() < len) {
      unsigned d = static_cast<unsigned>(lo + rng.next_below(10 - lo));
      s.push_back(static_cast<char>('0' + d));
    }
    return Operand::from_decimal(s);
  };
  Operand a, b;
  if (rng.next_below(2) == 0) {  // carry-heavy
    a = dense(2 + rng.next_below(2), 6);
    b = dense(2 + rng.next_below(2), 6);
  } else {  // generic multi-digit
    a = dense(2 + rng.next_below(3), 1);
    b = dense(2 + rng.next_below(3), 1);
  }
  std::string id = std::string("tr_") + heuristic_name(h) + "_" + std::to_string(idx);
  return Problem::make(id, a, b);
}

Problem sample_style_problem(SplitMix64& rng, std::size_t idx, Heuristic h) {
  switch (rng.next_below(3)) {
    case 0: return sample_dd_problem(rng, idx, h);
    case 1: return sample_ot_problem(rng, idx, h);
    default: return sample_rc_problem(rng, idx, h);
  }
}

}  // namespace

std::vector<TraceRecord> build_trace_dataset(Heuristic h, const TraceDatasetOptions& opts) {
  SplitMix64 rng = SplitMix64(opts.seed).split(std::string("traces.") + heuristic_name(h));
  std::vector<TraceRecord> out;
  std::set<std::string> used;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 400 * std::max<std::size_t>(opts.count, 1);
  std::size_t skipped_excluded = 0;

  while (out.size() < opts.count) {
    if (++attempts > max_attempts) {
      throw std::runtime_error(
          std::string("build_trace_dataset(") + heuristic_name(h) + "): candidate space " +
          "exhausted after " + std::to_string(attempts - 1) + " attempts (kept " +
          std::to_string(out.size()) + ", excluded " + std::to_string(skipped_excluded) + ")");
    }
    Problem p;
    std::size_t idx = out.size();
    switch (h) {
      case Heuristic::RC: p = sample_rc_problem(rng, idx, h); break;
      case Heuristic::DD: p = sample_dd_problem(rng, idx, h); break;
      case Heuristic::OT: p = sample_ot_problem(rng, idx, h); break;
      case Heuristic::STYLE: p = sample_style_problem(rng, idx, h); break;
    }
    if (opts.exclusions.count(p.canonical_key())) {
      ++skipped_excluded;
      continue;
    }
    // Exact duplicates are dropped; the commutative twin stays, since the
    // near-base candidate space is smaller than the corpus sizes used here.
    std::string ordered_key = p.a.to_string() + "x" + p.b.to_string();
    if (!used.insert(ordered_key).second) continue;
    TraceRecord rec;
    rec.trace = gen_trace(p, h);
    VerifyResult v = verify_trace(rec.trace);
    if (!v.ok)
      throw std::logic_error("generated trace failed verification: " + v.message + " (" +
                             ordered_key + ")");
    rec.problem = std::move(p);
    out.push_back(std::move(rec));
  }

  // Deterministic train/val assignment: shuffle indices, first fraction trains.
  std::vector<std::size_t> order(out.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SplitMix64 split_rng = SplitMix64(opts.seed).split("traces.split");
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[split_rng.next_below(i)]);
  std::size_t n_train = static_cast<std::size_t>(
      static_cast<double>(out.size()) * opts.train_fraction + 0.5);
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    out[order[rank]].split = rank < n_train ? "train" : "val";
  return out;
}

}  // namespace mulbench
