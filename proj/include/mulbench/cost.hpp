#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mulbench/operand.hpp"

namespace mulbench {

enum class Heuristic { OT, DD, RC, STYLE };

const char* heuristic_name(Heuristic h);
std::optional<Heuristic> heuristic_from_name(std::string_view name);

// Cost-model constants, all in comparable "primitive digit operation" units.
// Every term of every heuristic cost is linear in exactly one lambda, so
// scaling all lambdas (and margin_min) by a positive constant rescales every
// cost and margin by that constant and leaves the argmin unchanged.
struct CostParams {
  double lambda_mul = 1.0;    // per digit multiplication
  double lambda_carry = 0.1;  // per carry event (OT penalty)
  double lambda_add = 2.0;    // per partial-product addition (DD penalty)
  double lambda_base = 1.0;   // flat cost of a round-base product (RC)
  double lambda_off = 1.0;    // per offset digit (RC adjustment terms)
  double margin_min = 0.25;   // required separation from the runner-up
  std::vector<std::uint64_t> base_set = {25, 50, 100, 200, 250, 500};

  CostParams scaled(double c) const;
};

struct CostBreakdown {
  double ot_cost = 0;
  double dd_cost = 0;
  double rc_cost = 0;
  std::uint64_t rc_base = 0;
  std::map<std::string, double> components;

  double cost_of(Heuristic h) const;
};

struct TargetLabel {
  Heuristic target = Heuristic::OT;
  Heuristic runner_up = Heuristic::OT;
  double margin = 0;
};

// Columnar cost: n*m digit products plus a carry penalty.
double ot_cost(const Operand& a, const Operand& b, const CostParams& params);

// One-sided expansion cost min(m*s, n*t) plus additions for combining the
// partial products, with cheaper paths for trailing-zero and multiple-of-25
// factors.
double dd_cost(const Operand& a, const Operand& b, const CostParams& params);

// Shared-round-base correction cost: flat base product plus per-digit offset
// adjustments; symmetric offsets (da == -db) collapse to the
// difference-of-squares form and skip the cross adjustments.
double rc_cost(const Operand& a, const Operand& b, const CostParams& params);

CostBreakdown cost_breakdown(const Operand& a, const Operand& b, const CostParams& params);

// Labels the pair with its min-cost heuristic when that heuristic is
// separated from the runner-up by strictly more than margin_min.
std::optional<TargetLabel> label_target(const Operand& a, const Operand& b, double margin_min,
                                        const CostParams& params);

}  // namespace mulbench
