#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "mulbench/probe.hpp"
#include "mulbench/render.hpp"

using namespace mulbench;

namespace {

Problem prob(std::uint64_t a, std::uint64_t b) {
  return Problem::make(std::to_string(a) + "x" + std::to_string(b), Operand(a), Operand(b));
}

ScoringContext text_ctx(const Problem& p) {
  ScoringContext ctx;
  ctx.prompt = render_prompt(p, Representation::NumeralText);
  return ctx;
}

// Scripted backend: every continuation is scored by a fixed per-class rule.
MockSpec keyword_spec(double dd, double rc, double ot, double neutral) {
  MockSpec spec;
  spec.kind = "keyword";
  spec.keyword_rules = {{"Decomposition", dd}, {"Break it apart", dd}, {"Distribute", dd},
                        {"Round and adjust", rc}, {"Round first", rc}, {"round anchor", rc},
                        {"Column method", ot}, {"Columnar", ot}, {"Long multiplication", ot},
                        {"step by step", neutral}};
  spec.keyword_default = 9.0;
  return spec;
}

}  // namespace

TEST_CASE("length_normalized_loss is the token mean") {
  CHECK(length_normalized_loss({{2.0, 4.0}}) == 3.0);
  CHECK(length_normalized_loss({{7.25}}) == 7.25);
  CHECK_THROWS(length_normalized_loss({}));
}

TEST_CASE("llr identities") {
  CHECK(llr(3.0, 3.0, 10) == 0.0);
  CHECK(llr(2.0, 3.0, 10) == 10.0);
  // On the mock: llr equals the difference of total log-likelihoods when
  // templates are length-matched.
  MockSpec spec;
  spec.kind = "hash";
  spec.seed = 3;
  auto backend = mock_backend(spec);
  ScoringContext ctx = text_ctx(prob(47, 36));
  std::string h = "alpha beta gamma";
  std::string n = "delta epsilon zeta";
  TokenLosses lh = backend->score_continuation(ctx, h);
  TokenLosses ln = backend->score_continuation(ctx, n);
  double sum_h = 0, sum_n = 0;
  for (double v : lh.losses) sum_h += v;
  for (double v : ln.losses) sum_n += v;
  double direct = -sum_h - (-sum_n);  // log p(x_h) - log p(x_0)
  CHECK(llr(length_normalized_loss(lh), length_normalized_loss(ln), 3) ==
        doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("probe_problem: winner, support, and deltas") {
  auto backend = mock_backend(keyword_spec(0.5, 1.0, 1.5, 2.0));
  ProbeResult r = probe_problem(text_ctx(prob(47, 36)), balanced_bank(), *backend);
  CHECK(r.winner == ProbeClass::DD);
  CHECK(r.loss.at(ProbeClass::DD) == doctest::Approx(0.5));
  CHECK(r.delta.at(ProbeClass::DD) == doctest::Approx(-1.5));
  CHECK(r.delta.at(ProbeClass::Neutral) == 0.0);
  double total = 0;
  for (auto& [c, s] : r.support) total += s;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.support.at(ProbeClass::DD) > r.support.at(ProbeClass::OT));
}

TEST_CASE("probe_problem: uniform losses give uniform support and a neutral winner") {
  MockSpec spec;
  spec.kind = "constant";
  spec.value = 2.0;
  auto backend = mock_backend(spec);
  ProbeResult r = probe_problem(text_ctx(prob(47, 36)), balanced_bank(), *backend);
  CHECK(r.winner == ProbeClass::Neutral);  // tie goes to neutral
  for (auto& [c, s] : r.support) CHECK(s == doctest::Approx(0.25).epsilon(1e-12));
  for (auto& [c, d] : r.delta) CHECK(d == 0.0);
}

TEST_CASE("support is exactly invariant to a constant loss shift") {
  auto backend = mock_backend(keyword_spec(0.5, 1.0, 1.5, 2.0));
  auto shifted = mock_backend(keyword_spec(1.5, 2.0, 2.5, 3.0));
  ProbeResult a = probe_problem(text_ctx(prob(47, 36)), balanced_bank(), *backend);
  ProbeResult b = probe_problem(text_ctx(prob(47, 36)), balanced_bank(), *shifted);
  for (auto& [c, s] : a.support) CHECK(b.support.at(c) == s);  // bitwise equal
  CHECK(a.winner == b.winner);
}

TEST_CASE("winner is invariant under strictly increasing loss transforms") {
  // Same ordering, different monotone transforms of the loss scale.
  auto base = mock_backend(keyword_spec(0.5, 1.0, 1.5, 2.0));
  auto doubled = mock_backend(keyword_spec(1.0, 2.0, 3.0, 4.0));      // x -> 2x
  auto affine = mock_backend(keyword_spec(1.25, 2.0, 2.75, 3.5));     // x -> 1.5x + 0.5
  auto squared = mock_backend(keyword_spec(0.25, 1.0, 2.25, 4.0));    // x -> x^2
  ProbeResult r0 = probe_problem(text_ctx(prob(47, 36)), balanced_bank(), *base);
  for (auto* m : {&doubled, &affine, &squared}) {
    ProbeResult r = probe_problem(text_ctx(prob(47, 36)), balanced_bank(), **m);
    CHECK(r.winner == r0.winner);
  }
}

TEST_CASE("argmin equals maximum likelihood on length-matched banks (100 random mocks)") {
  // Single-paraphrase banks with equal token counts.
  TemplateBank bank;
  bank.profile = "balanced";
  bank.version = "test";
  bank.dd = {"split the factor into parts"};
  bank.rc = {"round to the nearest base"};
  bank.ot = {"multiply column by column now"};
  bank.neutral = {"solve the problem step wise"};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    MockSpec spec;
    spec.kind = "hash";
    spec.seed = seed;
    auto backend = mock_backend(spec);
    ScoringContext ctx = text_ctx(prob(11 + seed, 13 + seed));
    ProbeResult r = probe_problem(ctx, bank, *backend);
    // Total log-likelihood per class.
    double best_ll = -1e300;
    ProbeClass best_class = ProbeClass::Neutral;
    for (ProbeClass c :
         {ProbeClass::Neutral, ProbeClass::DD, ProbeClass::RC, ProbeClass::OT}) {
      TokenLosses l = backend->score_continuation(ctx, bank.templates_for(c)[0]);
      REQUIRE(l.token_count() == 5);  // length-matched
      double ll = 0;
      for (double v : l.losses) ll -= v;
      if (ll > best_ll) {
        best_ll = ll;
        best_class = c;
      }
    }
    REQUIRE(r.winner == best_class);
  }
}

TEST_CASE("averaging is mean-of-paraphrases, not pooled tokens") {
  // Two DD paraphrases with different lengths and losses chosen so the two
  // orders disagree: per-paraphrase means (1.0, 3.0) -> 2.0; pooled tokens
  // would give (1*1 + 3*4)/5 = 2.6.
  ScoringContext ctx = text_ctx(prob(47, 36));
  MockSpec spec;
  spec.kind = "table";
  TemplateBank bank;
  bank.profile = "balanced";
  bank.version = "test";
  bank.dd = {"one", "a b c d"};
  bank.rc = {"rc"};
  bank.ot = {"ot"};
  bank.neutral = {"neutral"};
  spec.table.push_back({ctx.digest(), "one", {1.0}});
  spec.table.push_back({ctx.digest(), "a b c d", {3.0, 3.0, 3.0, 3.0}});
  spec.table.push_back({ctx.digest(), "rc", {5.0}});
  spec.table.push_back({ctx.digest(), "ot", {5.0}});
  spec.table.push_back({ctx.digest(), "neutral", {5.0}});
  auto backend = mock_backend(spec);
  ProbeResult r = probe_problem(ctx, bank, *backend);
  CHECK(r.loss.at(ProbeClass::DD) == doctest::Approx(2.0));
  CHECK(r.within_std.at(ProbeClass::DD) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("contrastive_probe prefers the lower-loss step") {
  ScoringContext ctx = text_ctx(prob(47, 36));
  ContrastivePair pair;
  pair.problem_id = "p";
  pair.heuristic = Heuristic::DD;
  pair.correct_step = "good step";
  pair.incorrect_step = "bad step";
  MockSpec spec;
  spec.kind = "keyword";
  spec.keyword_rules = {{"good", 1.0}, {"bad", 2.0}};
  auto backend = mock_backend(spec);
  ContrastiveResult r = contrastive_probe(pair, ctx, *backend);
  CHECK(r.preference);
  CHECK(r.loss_gap == doctest::Approx(1.0));
  pair.incorrect_step = pair.correct_step;
  CHECK_THROWS_AS(contrastive_probe(pair, ctx, *backend), std::invalid_argument);
}

TEST_CASE("probe and contrastive propagate capability errors") {
  MockSpec spec;
  spec.kind = "constant";
  spec.score_capable = false;
  auto backend = mock_backend(spec);
  CHECK_THROWS_AS(probe_problem(text_ctx(prob(2, 3)), balanced_bank(), *backend),
                  CapabilityError);
}

TEST_CASE("aggregate_probe_results produces per-representation rows") {
  std::vector<ProbeResult> results;
  TargetMap targets;
  auto backend = mock_backend(keyword_spec(0.5, 1.0, 1.5, 2.0));
  for (std::uint64_t i = 0; i < 6; ++i) {
    Problem p = prob(11 + i, 17 + i);
    ProbeResult r = probe_problem(text_ctx(p), balanced_bank(), *backend);
    r.problem_id = p.id;
    r.representation = i % 2 == 0 ? "numeral_text" : "numeral_image";
    results.push_back(r);
    targets[p.id] = i % 3 == 0 ? Heuristic::DD : (i % 3 == 1 ? Heuristic::RC : Heuristic::OT);
  }
  auto aggregates = aggregate_probe_results(results, targets);
  REQUIRE(aggregates.size() == 2);
  for (const auto& agg : aggregates) {
    CHECK(agg.n == 3);
    CHECK(agg.neutral_loss_mean == doctest::Approx(2.0));
    CHECK(agg.delta_mean.at(Heuristic::DD) == doctest::Approx(-1.5));
    // Every item resolves to DD (lowest loss), so only DD targets have
    // resolved support rows counted toward their family.
    CHECK(agg.target_support.at(Heuristic::DD).n_resolved ==
          agg.target_support.at(Heuristic::DD).n_total);
  }
}

TEST_CASE("style shift ablation reports variance growth") {
  // The mismatch backend scores the three paraphrases of each class apart,
  // inflating the within-problem std.
  auto tight = mock_backend(keyword_spec(0.5, 1.0, 1.5, 2.0));
  MockSpec noisy_spec;
  noisy_spec.kind = "hash";
  noisy_spec.seed = 11;
  noisy_spec.lo = 0.5;
  noisy_spec.hi = 5.0;
  auto noisy = mock_backend(noisy_spec);

  std::vector<ProbeResult> balanced, mismatch;
  TargetMap targets;
  for (std::uint64_t i = 0; i < 8; ++i) {
    Problem p = prob(21 + i, 33 + i);
    ProbeResult rb = probe_problem(text_ctx(p), balanced_bank(), *tight);
    rb.problem_id = p.id;
    rb.representation = "numeral_text";
    ProbeResult rm = probe_problem(text_ctx(p), style_mismatch_bank(), *noisy);
    rm.problem_id = p.id;
    rm.representation = "numeral_text";
    balanced.push_back(rb);
    mismatch.push_back(rm);
    targets[p.id] = Heuristic::DD;
  }
  AblationReport report = style_shift_ablation(balanced, mismatch, targets);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].profile == "balanced");
  CHECK(report.rows[1].profile == "style_mismatch");
  CHECK(report.rows[1].mean_std > report.rows[0].mean_std);
  CHECK(report.rows[0].match_rate == 1.0);  // scripted mock always picks DD

  // Identical conditions give identical rows.
  AblationReport self = style_shift_ablation(balanced, balanced, targets);
  CHECK(self.rows[0].mean_std == self.rows[1].mean_std);
  CHECK(self.rows[0].match_rate == self.rows[1].match_rate);

  mismatch.pop_back();
  CHECK_THROWS_AS(style_shift_ablation(balanced, mismatch, targets), std::invalid_argument);
}

TEST_CASE("contrastive aggregates in the published layout") {
  std::vector<ContrastiveResult> results;
  TargetMap targets;
  for (int i = 0; i < 12; ++i) {
    ContrastiveResult r;
    r.problem_id = "p" + std::to_string(i);
    r.representation = "numeral_text";
    r.heuristic = i % 3 == 0 ? Heuristic::DD : (i % 3 == 1 ? Heuristic::RC : Heuristic::OT);
    r.loss_correct = 1.0;
    r.loss_incorrect = i == 0 ? 0.5 : 1.0 + 0.1 * (i + 1);
    r.loss_gap = r.loss_incorrect - r.loss_correct;
    r.preference = r.loss_gap > 0;
    results.push_back(r);
    targets[r.problem_id] = r.heuristic;
  }
  auto rows = aggregate_contrastive_results(results, targets);
  REQUIRE(rows.size() == 4);  // overall + three heuristics
  CHECK(rows[0].scope == "overall");
  CHECK(rows[0].n == 12);
  CHECK(rows[0].preference_rate == doctest::Approx(11.0 / 12.0));
  double expected_se =
      std::sqrt(rows[0].preference_rate * (1 - rows[0].preference_rate) / 12.0);
  CHECK(rows[0].preference_se == doctest::Approx(expected_se));
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].n == 4);
}

TEST_CASE("template banks are frozen with stable hashes") {
  TemplateBank bank = balanced_bank();
  bank.validate();
  CHECK(bank.dd.size() == 3);
  CHECK(bank.neutral.size() == 1);
  CHECK(bank.bank_hash() == balanced_bank().bank_hash());
  CHECK(bank.bank_hash() != style_mismatch_bank().bank_hash());
  TemplateBank broken = bank;
  broken.rc.clear();
  CHECK_THROWS(broken.validate());
}
