#include "mulbench/probe.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "mulbench/sha256.hpp"

namespace mulbench {

const char* probe_class_name(ProbeClass c) {
  switch (c) {
    case ProbeClass::DD: return "DD";
    case ProbeClass::RC: return "RC";
    case ProbeClass::OT: return "OT";
    case ProbeClass::Neutral: return "neutral";
  }
  return "?";
}

ProbeClass probe_class_of(Heuristic h) {
  switch (h) {
    case Heuristic::DD: return ProbeClass::DD;
    case Heuristic::RC: return ProbeClass::RC;
    case Heuristic::OT: return ProbeClass::OT;
    default: throw std::invalid_argument("STYLE has no probe class");
  }
}

const std::vector<std::string>& TemplateBank::templates_for(ProbeClass c) const {
  switch (c) {
    case ProbeClass::DD: return dd;
    case ProbeClass::RC: return rc;
    case ProbeClass::OT: return ot;
    case ProbeClass::Neutral: return neutral;
  }
  throw std::invalid_argument("bad probe class");
}

void TemplateBank::validate() const {
  if (dd.empty() || rc.empty() || ot.empty() || neutral.empty())
    throw std::invalid_argument("template bank '" + profile +
                                "': every class needs at least one template");
}

std::string TemplateBank::bank_hash() const {
  Sha256 h;
  h.update(profile);
  h.update("|");
  h.update(version);
  for (const auto* list : {&dd, &rc, &ot, &neutral}) {
    h.update("||");
    for (const auto& t : *list) {
      h.update(t);
      h.update("\x1e");
    }
  }
  return h.hex_digest();
}

TemplateBank balanced_bank() {
  TemplateBank bank;
  bank.profile = "balanced";
  bank.version = "v1";
  bank.ot = {
      "Column method: start with the ones digits, multiply digit by digit, and carry as needed.",
      "Columnar: work right to left, taking one digit product at a time with explicit carries.",
      "Long multiplication: form each partial row digit by digit, then add the shifted rows.",
  };
  bank.dd = {
      "Decomposition: split one factor into place-value parts and add the partial products.",
      "Break it apart: expand one number into tens and ones, multiply each part, then sum.",
      "Distribute: rewrite one factor as a sum, take the two easier products, and combine.",
  };
  bank.rc = {
      "Round and adjust: use a nearby round base, then compensate for the offsets.",
      "Round first: multiply convenient round numbers, then correct for the small differences.",
      "Use a round anchor: compute from the nearest base and fix it up with adjustment terms.",
  };
  bank.neutral = {
      "Let me solve this multiplication problem step by step.",
  };
  return bank;
}

TemplateBank style_mismatch_bank() {
  TemplateBank bank;
  bank.profile = "style_mismatch";
  bank.version = "v1";
  bank.ot = {
      "ok so basically just stack them up and grind through it digit by digit with the carries",
      "DO THE COLUMNS. Ones place first. Carry what you must. Keep the rows lined up.",
      "As taught in primary school, one proceeds column-wise, carrying dutifully at each step.",
  };
  bank.dd = {
      "eh, chop one number into its tens and its ones and deal with the two pieces separately",
      "SPLIT A FACTOR. Multiply the parts. Add the pieces back together at the end.",
      "One elects to distribute: the factor decomposes into place values, each multiplied in turn.",
  };
  bank.rc = {
      "just pretend it's a rounder number, multiply that, then patch up the difference after",
      "ROUND IT. Multiply the easy base. Subtract or add the correction terms afterwards.",
      "One rounds to an agreeable base, computes serenely, and amends for the offsets thereafter.",
  };
  bank.neutral = {
      "Let me solve this multiplication problem step by step.",
  };
  return bank;
}

double length_normalized_loss(const TokenLosses& losses) {
  if (losses.token_count() == 0)
    throw std::invalid_argument("length_normalized_loss: no tokens");
  double sum = 0;
  for (double v : losses.losses) sum += v;
  return sum / static_cast<double>(losses.token_count());
}

double llr(double loss_h, double loss_0, std::size_t token_count) {
  return -static_cast<double>(token_count) * (loss_h - loss_0);
}

namespace {

constexpr ProbeClass kClasses[] = {ProbeClass::DD, ProbeClass::RC, ProbeClass::OT,
                                   ProbeClass::Neutral};
// Winner tie-break order: never force a heuristic when neutral ties.
constexpr ProbeClass kTieOrder[] = {ProbeClass::Neutral, ProbeClass::DD, ProbeClass::RC,
                                    ProbeClass::OT};

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double mean_of(const std::vector<double>& xs) {
  double m = 0;
  for (double x : xs) m += x;
  return xs.empty() ? 0.0 : m / static_cast<double>(xs.size());
}

double mean_se(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  return sample_std(xs) / std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace

ProbeResult probe_problem(const ScoringContext& ctx, const TemplateBank& bank,
                          Backend& backend) {
  bank.validate();
  if (!backend.can_score())
    throw CapabilityError("backend " + backend.name() + " cannot score continuations");

  ProbeResult out;
  for (ProbeClass c : kClasses) {
    std::vector<double> per_paraphrase;
    for (const auto& tmpl : bank.templates_for(c)) {
      TokenLosses losses = backend.score_continuation(ctx, tmpl);
      out.total_tokens += losses.token_count();
      per_paraphrase.push_back(length_normalized_loss(losses));
    }
    out.loss[c] = mean_of(per_paraphrase);
    out.within_std[c] = sample_std(per_paraphrase);
  }
  double neutral = out.loss[ProbeClass::Neutral];
  for (ProbeClass c : kClasses) out.delta[c] = out.loss[c] - neutral;

  // Winner: argmin with the neutral-first tie order; ties are recorded.
  out.winner = ProbeClass::Neutral;
  double best = out.loss[ProbeClass::Neutral];
  for (ProbeClass c : kTieOrder) {
    if (out.loss[c] < best) {
      best = out.loss[c];
      out.winner = c;
    }
  }
  int at_min = 0;
  for (ProbeClass c : kClasses)
    if (out.loss[c] == best) ++at_min;
  out.winner_tied = at_min > 1;

  // Support: softmax of negated losses, shifted by the minimum so equal
  // shifts of every loss cancel exactly.
  double min_loss = out.loss[ProbeClass::DD];
  for (ProbeClass c : kClasses) min_loss = std::min(min_loss, out.loss[c]);
  double total = 0;
  for (ProbeClass c : kClasses) total += std::exp(-(out.loss[c] - min_loss));
  for (ProbeClass c : kClasses) out.support[c] = std::exp(-(out.loss[c] - min_loss)) / total;
  return out;
}

ContrastiveResult contrastive_probe(const ContrastivePair& pair, const ScoringContext& ctx,
                                    Backend& backend) {
  if (!backend.can_score())
    throw CapabilityError("backend " + backend.name() + " cannot score continuations");
  if (pair.correct_step == pair.incorrect_step)
    throw std::invalid_argument("contrastive_probe: degenerate pair with identical steps");
  ContrastiveResult out;
  out.problem_id = pair.problem_id;
  out.heuristic = pair.heuristic;
  out.loss_correct = length_normalized_loss(backend.score_continuation(ctx, pair.correct_step));
  out.loss_incorrect =
      length_normalized_loss(backend.score_continuation(ctx, pair.incorrect_step));
  out.loss_gap = out.loss_incorrect - out.loss_correct;
  out.preference = out.loss_correct < out.loss_incorrect;
  return out;
}

std::vector<ProbeAggregate> aggregate_probe_results(const std::vector<ProbeResult>& results,
                                                    const TargetMap& targets) {
  std::set<std::string> reps;
  for (const auto& r : results) reps.insert(r.representation);
  std::vector<ProbeAggregate> out;
  for (const auto& rep : reps) {
    ProbeAggregate agg;
    agg.representation = rep;
    std::vector<double> neutral;
    std::map<Heuristic, std::vector<double>> deltas;
    std::map<Heuristic, std::vector<double>> support_rows;
    std::map<Heuristic, std::size_t> family_totals;
    for (const auto& r : results) {
      if (r.representation != rep) continue;
      ++agg.n;
      neutral.push_back(r.loss.at(ProbeClass::Neutral));
      for (Heuristic h : {Heuristic::DD, Heuristic::RC, Heuristic::OT})
        deltas[h].push_back(r.delta.at(probe_class_of(h)));
      auto target_it = targets.find(r.problem_id);
      if (target_it == targets.end()) continue;
      Heuristic target = target_it->second;
      ++family_totals[target];
      // "Resolved": the winner is a heuristic rather than the neutral
      // baseline; support SEs are computed only across resolved rows.
      if (r.winner != ProbeClass::Neutral)
        support_rows[target].push_back(r.support.at(probe_class_of(target)));
    }
    agg.neutral_loss_mean = mean_of(neutral);
    agg.neutral_loss_se = mean_se(neutral);
    for (Heuristic h : {Heuristic::DD, Heuristic::RC, Heuristic::OT}) {
      agg.delta_mean[h] = mean_of(deltas[h]);
      agg.delta_se[h] = mean_se(deltas[h]);
      SupportShare share;
      share.mean = mean_of(support_rows[h]);
      share.se = mean_se(support_rows[h]);
      share.n_resolved = support_rows[h].size();
      share.n_total = family_totals[h];
      agg.target_support[h] = share;
    }
    out.push_back(std::move(agg));
  }
  return out;
}

std::vector<ContrastiveAggregateRow> aggregate_contrastive_results(
    const std::vector<ContrastiveResult>& results, const TargetMap& targets) {
  std::set<std::string> reps;
  for (const auto& r : results) reps.insert(r.representation);
  std::vector<ContrastiveAggregateRow> out;
  for (const auto& rep : reps) {
    auto emit = [&](const std::string& scope, auto include) {
      ContrastiveAggregateRow row;
      row.representation = rep;
      row.scope = scope;
      std::vector<double> gaps;
      std::size_t prefer = 0;
      for (const auto& r : results) {
        if (r.representation != rep || !include(r)) continue;
        gaps.push_back(r.loss_gap);
        if (r.preference) ++prefer;
      }
      row.n = gaps.size();
      if (row.n > 0) {
        row.preference_rate = static_cast<double>(prefer) / static_cast<double>(row.n);
        row.preference_se = std::sqrt(row.preference_rate * (1 - row.preference_rate) /
                                      static_cast<double>(row.n));
        row.gap_mean = mean_of(gaps);
        row.gap_se = mean_se(gaps);
      }
      out.push_back(std::move(row));
    };
    emit("overall", [](const ContrastiveResult&) { return true; });
    for (Heuristic h : {Heuristic::DD, Heuristic::RC, Heuristic::OT}) {
      emit(heuristic_name(h), [&, h](const ContrastiveResult& r) {
        auto it = targets.find(r.problem_id);
        return r.heuristic == h && it != targets.end() && it->second == h;
      });
    }
  }
  return out;
}

AblationReport style_shift_ablation(const std::vector<ProbeResult>& balanced,
                                    const std::vector<ProbeResult>& mismatch,
                                    const TargetMap& targets,
                                    const std::map<std::string, bool>* accuracy_balanced,
                                    const std::map<std::string, bool>* accuracy_mismatch) {
  auto coverage = [](const std::vector<ProbeResult>& rs) {
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& r : rs) keys.insert({r.problem_id, r.representation});
    return keys;
  };
  if (coverage(balanced) != coverage(mismatch))
    throw std::invalid_argument(
        "style_shift_ablation: the two conditions cover different problem sets");

  AblationReport report;
  auto add_rows = [&](const std::vector<ProbeResult>& results, const std::string& profile,
                      const std::map<std::string, bool>* accuracy) {
    std::set<std::string> reps;
    for (const auto& r : results) reps.insert(r.representation);
    for (const auto& rep : reps) {
      AblationRow row;
      row.profile = profile;
      row.representation = rep;
      std::vector<double> dd, ot, rc;
      std::size_t matches = 0, with_target = 0, correct = 0, with_acc = 0;
      for (const auto& r : results) {
        if (r.representation != rep) continue;
        ++row.n;
        dd.push_back(r.within_std.at(ProbeClass::DD));
        ot.push_back(r.within_std.at(ProbeClass::OT));
        rc.push_back(r.within_std.at(ProbeClass::RC));
        auto it = targets.find(r.problem_id);
        if (it != targets.end()) {
          ++with_target;
          if (r.winner == probe_class_of(it->second)) ++matches;
        }
        if (accuracy) {
          auto acc = accuracy->find(r.problem_id);
          if (acc != accuracy->end()) {
            ++with_acc;
            if (acc->second) ++correct;
          }
        }
      }
      row.dd_std = mean_of(dd);
      row.ot_std = mean_of(ot);
      row.rc_std = mean_of(rc);
      row.mean_std = (row.dd_std + row.ot_std + row.rc_std) / 3.0;
      row.match_rate =
          with_target ? static_cast<double>(matches) / static_cast<double>(with_target) : 0.0;
      if (accuracy && with_acc)
        row.accuracy = static_cast<double>(correct) / static_cast<double>(with_acc);
      report.rows.push_back(std::move(row));
    }
  };
  add_rows(balanced, "balanced", accuracy_balanced);
  add_rows(mismatch, "style_mismatch", accuracy_mismatch);
  return report;
}

}  // namespace mulbench
