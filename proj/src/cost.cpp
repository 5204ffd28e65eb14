#include "mulbench/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mulbench {

const char* heuristic_name(Heuristic h) {
  switch (h) {
    case Heuristic::OT: return "OT";
    case Heuristic::DD: return "DD";
    case Heuristic::RC: return "RC";
    case Heuristic::STYLE: return "STYLE";
  }
  return "?";
}

std::optional<Heuristic> heuristic_from_name(std::string_view name) {
  if (name == "OT") return Heuristic::OT;
  if (name == "DD") return Heuristic::DD;
  if (name == "RC") return Heuristic::RC;
  if (name == "STYLE") return Heuristic::STYLE;
  return std::nullopt;
}

CostParams CostParams::scaled(double c) const {
  CostParams p = *this;
  p.lambda_mul *= c;
  p.lambda_carry *= c;
  p.lambda_add *= c;
  p.lambda_base *= c;
  p.lambda_off *= c;
  p.margin_min *= c;
  return p;
}

double CostBreakdown::cost_of(Heuristic h) const {
  switch (h) {
    case Heuristic::OT: return ot_cost;
    case Heuristic::DD: return dd_cost;
    case Heuristic::RC: return rc_cost;
    default: throw std::invalid_argument("STYLE has no cost model");
  }
}

double ot_cost(const Operand& a, const Operand& b, const CostParams& params) {
  double mults = static_cast<double>(a.n_digits() * b.n_digits());
  double carries = static_cast<double>(count_carries_canonical(a, b).total());
  return params.lambda_mul * mults + params.lambda_carry * carries;
}

namespace {

Operand strip_trailing_zeros(const Operand& x, std::size_t zeros) {
  if (zeros == 0) return x;
  std::string s = x.to_string();
  return Operand::from_decimal(s.substr(0, s.size() - zeros));
}

// min over the two expansion sides of (digit products + additions to combine
// the side's non-zero partial products).
double dd_two_sided(const Operand& a, const Operand& b, const CostParams& p) {
  double n = static_cast<double>(a.n_digits()), m = static_cast<double>(b.n_digits());
  double s = static_cast<double>(a.n_nonzero()), t = static_cast<double>(b.n_nonzero());
  double expand_a = p.lambda_mul * m * s + p.lambda_add * (s - 1);
  double expand_b = p.lambda_mul * n * t + p.lambda_add * (t - 1);
  return std::min(expand_a, expand_b);
}

bool multiple_of_25(const Operand& x) {
  if (x.value() < BigNat(25)) return false;
  const auto& d = x.digits();
  std::size_t n = d.size();
  unsigned last2 = (n >= 2 ? d[n - 2] * 10u : 0u) + d[n - 1];
  return last2 % 25 == 0;
}

}  // namespace

double dd_cost(const Operand& a, const Operand& b, const CostParams& p) {
  double best = dd_two_sided(a, b, p);

  std::size_t za = a.trailing_zeros(), zb = b.trailing_zeros();
  if (za + zb > 0) {
    Operand ra = strip_trailing_zeros(a, za);
    Operand rb = strip_trailing_zeros(b, zb);
    double core;
    if (ra.value() == BigNat(1) || rb.value() == BigNat(1)) {
      core = p.lambda_add / 4;  // copy-and-shift
    } else {
      core = dd_two_sided(ra, rb, p);
    }
    best = std::min(best, core + (p.lambda_add / 4) * static_cast<double>(za + zb));
  }

  // Quarter-hundred shortcut: x * (q*25) = x*q*100/4.
  auto quarter_via = [&](const Operand& other) {
    Operand ro = strip_trailing_zeros(other, other.trailing_zeros());
    return (p.lambda_add / 4) * (1.0 + static_cast<double>(ro.n_digits()));
  };
  if (multiple_of_25(a)) best = std::min(best, quarter_via(b));
  if (multiple_of_25(b)) best = std::min(best, quarter_via(a));

  return best;
}

namespace {

struct RcEval {
  std::uint64_t base = 0;
  BigNat off_a_mag, off_b_mag;
  bool a_below = false, b_below = false;
  bool symmetric = false;
  double cost = std::numeric_limits<double>::infinity();
  BigNat offset_sum;
};

RcEval rc_eval_base(const Operand& a, const Operand& b, std::uint64_t base,
                    const CostParams& p) {
  RcEval e;
  e.base = base;
  BigNat bb(base);
  e.a_below = a.value() < bb;
  e.off_a_mag = e.a_below ? bb - a.value() : a.value() - bb;
  e.b_below = b.value() < bb;
  e.off_b_mag = e.b_below ? bb - b.value() : b.value() - bb;
  e.offset_sum = e.off_a_mag + e.off_b_mag;

  bool za = e.off_a_mag.is_zero(), zb = e.off_b_mag.is_zero();
  double da = za ? 0.0 : static_cast<double>(e.off_a_mag.digit_count());
  double db = zb ? 0.0 : static_cast<double>(e.off_b_mag.digit_count());
  e.symmetric = !za && !zb && e.off_a_mag == e.off_b_mag && e.a_below != e.b_below;
  if (e.symmetric) {
    // (B+k)(B-k) = B^2 - k^2: one offset square instead of three adjustments.
    e.cost = p.lambda_base + p.lambda_off * da;
  } else {
    e.cost = p.lambda_base + p.lambda_off * (da + db);
    if (!za && !zb) e.cost += p.lambda_mul * da * db;  // cross term da*db
  }
  return e;
}

RcEval rc_select(const Operand& a, const Operand& b, const CostParams& p) {
  if (p.base_set.empty()) throw std::invalid_argument("rc_cost: empty base set");
  std::vector<std::uint64_t> bases = p.base_set;
  std::sort(bases.begin(), bases.end());
  RcEval best;
  bool have = false;
  for (auto base : bases) {
    RcEval e = rc_eval_base(a, b, base, p);
    if (!have || e.offset_sum < best.offset_sum ||
        (e.offset_sum == best.offset_sum && e.cost < best.cost)) {
      best = e;
      have = true;
    }
  }
  return best;
}

}  // namespace

double rc_cost(const Operand& a, const Operand& b, const CostParams& params) {
  return rc_select(a, b, params).cost;
}

CostBreakdown cost_breakdown(const Operand& a, const Operand& b, const CostParams& p) {
  CostBreakdown c;
  CarryCounts carries = count_carries_canonical(a, b);
  c.ot_cost = ot_cost(a, b, p);
  c.dd_cost = dd_cost(a, b, p);
  RcEval rc = rc_select(a, b, p);
  c.rc_cost = rc.cost;
  c.rc_base = rc.base;
  c.components["ot.digit_mults"] = static_cast<double>(a.n_digits() * b.n_digits());
  c.components["ot.carries"] = static_cast<double>(carries.total());
  c.components["dd.one_sided"] =
      static_cast<double>(std::min(b.n_digits() * a.n_nonzero(), a.n_digits() * b.n_nonzero()));
  c.components["rc.base"] = static_cast<double>(rc.base);
  c.components["rc.offset_a"] =
      (rc.a_below ? -1.0 : 1.0) * static_cast<double>(rc.off_a_mag.fits_u64() ? rc.off_a_mag.to_u64() : 0);
  c.components["rc.offset_b"] =
      (rc.b_below ? -1.0 : 1.0) * static_cast<double>(rc.off_b_mag.fits_u64() ? rc.off_b_mag.to_u64() : 0);
  c.components["rc.symmetric"] = rc.symmetric ? 1.0 : 0.0;
  return c;
}

std::optional<TargetLabel> label_target(const Operand& a, const Operand& b, double margin_min,
                                        const CostParams& params) {
  if (!(margin_min > 0)) throw std::invalid_argument("label_target: margin_min must be > 0");
  CostBreakdown c = cost_breakdown(a, b, params);
  struct Entry {
    Heuristic h;
    double cost;
  };
  Entry entries[3] = {{Heuristic::OT, c.ot_cost}, {Heuristic::DD, c.dd_cost},
                      {Heuristic::RC, c.rc_cost}};
  std::stable_sort(std::begin(entries), std::end(entries),
                   [](const Entry& x, const Entry& y) { return x.cost < y.cost; });
  double margin = entries[1].cost - entries[0].cost;
  // "Uniquely separated": strictly more than the margin floor.
  if (!(margin > margin_min)) return std::nullopt;
  return TargetLabel{entries[0].h, entries[1].h, margin};
}

}  // namespace mulbench
