#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mulbench/backend.hpp"
#include "mulbench/cost.hpp"
#include "mulbench/trace.hpp"

namespace mulbench {

// The four competing probe classes; the neutral baseline competes with the
// heuristics for the winner slot.
enum class ProbeClass { DD, RC, OT, Neutral };
const char* probe_class_name(ProbeClass c);
ProbeClass probe_class_of(Heuristic h);

struct TemplateBank {
  std::string profile;  // balanced | style_mismatch
  std::string version;
  std::vector<std::string> dd, rc, ot;   // paraphrases per heuristic
  std::vector<std::string> neutral;      // baseline paraphrases

  const std::vector<std::string>& templates_for(ProbeClass c) const;
  // Content hash recorded in reports so the active bank is pinned.
  std::string bank_hash() const;
  void validate() const;
};

// Shipped frozen banks.
TemplateBank balanced_bank();
TemplateBank style_mismatch_bank();

double length_normalized_loss(const TokenLosses& losses);

// Log-likelihood ratio between a heuristic template and the neutral baseline
// when templates are token-length matched: -T * (l_h - l_0).
double llr(double loss_h, double loss_0, std::size_t token_count);

struct ProbeResult {
  std::string problem_id;
  std::string representation;
  std::map<ProbeClass, double> loss;            // length-normalized, bank-averaged
  std::map<ProbeClass, double> delta;           // loss - neutral loss
  ProbeClass winner = ProbeClass::Neutral;
  bool winner_tied = false;  // min loss attained by more than one class
  std::map<ProbeClass, double> support;         // normalized exp(-loss)
  std::map<ProbeClass, double> within_std;      // across paraphrase losses
  std::size_t total_tokens = 0;
};

// Scores every paraphrase of every class under the same context, averages
// per class (mean of per-paraphrase normalized losses, not pooled tokens),
// and picks the winner by argmin with neutral competing. Ties resolve
// neutral > DD > RC > OT.
ProbeResult probe_problem(const ScoringContext& ctx, const TemplateBank& bank,
                          Backend& backend);

struct ContrastiveResult {
  std::string problem_id;
  std::string representation;
  Heuristic heuristic = Heuristic::DD;
  double loss_correct = 0;
  double loss_incorrect = 0;
  bool preference = false;       // loss_correct < loss_incorrect
  double loss_gap = 0;           // loss_incorrect - loss_correct
};

ContrastiveResult contrastive_probe(const ContrastivePair& pair, const ScoringContext& ctx,
                                    Backend& backend);

// ---- aggregates ----

struct SupportShare {
  double mean = 0;  // mean support(target) over resolved rows of the family
  double se = 0;
  std::size_t n_resolved = 0;
  std::size_t n_total = 0;
};

struct ProbeAggregate {
  std::string representation;
  double neutral_loss_mean = 0;
  double neutral_loss_se = 0;
  std::map<Heuristic, double> delta_mean;  // DD/RC/OT
  std::map<Heuristic, double> delta_se;
  std::map<Heuristic, SupportShare> target_support;  // per target family
  std::size_t n = 0;
};

// Target labels keyed by problem_id.
using TargetMap = std::map<std::string, Heuristic>;

std::vector<ProbeAggregate> aggregate_probe_results(const std::vector<ProbeResult>& results,
                                                    const TargetMap& targets);

struct ContrastiveAggregateRow {
  std::string representation;
  std::string scope;  // "overall" or a heuristic name
  double preference_rate = 0;
  double preference_se = 0;  // binomial
  double gap_mean = 0;
  double gap_se = 0;  // mean SE
  std::size_t n = 0;
};

std::vector<ContrastiveAggregateRow> aggregate_contrastive_results(
    const std::vector<ContrastiveResult>& results, const TargetMap& targets);

// ---- style-shift ablation ----

struct AblationRow {
  std::string profile;
  std::string representation;
  double dd_std = 0, ot_std = 0, rc_std = 0, mean_std = 0;
  double match_rate = 0;  // winner equals the item's target heuristic
  std::optional<double> accuracy;
  std::size_t n = 0;
};

struct AblationReport {
  std::vector<AblationRow> rows;  // balanced rows then style_mismatch rows
};

// Both runs must cover the same (problem, representation) set.
AblationReport style_shift_ablation(const std::vector<ProbeResult>& balanced,
                                    const std::vector<ProbeResult>& mismatch,
                                    const TargetMap& targets,
                                    const std::map<std::string, bool>* accuracy_balanced = nullptr,
                                    const std::map<std::string, bool>* accuracy_mismatch = nullptr);

}  // namespace mulbench
