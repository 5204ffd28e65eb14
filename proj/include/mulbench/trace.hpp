#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mulbench/cost.hpp"
#include "mulbench/operand.hpp"

namespace mulbench {

// Trace text grammar version; bump when any template wording changes so
// forced-completion losses stay comparable across runs.
inline constexpr const char* kTraceGrammarVersion = "v1";

struct TraceAssertion {
  std::size_t line = 0;     // 1-based line the claim came from
  std::string lhs;          // arithmetic expression text
  BigInt rhs;               // claimed value
};

struct ReasoningTrace {
  std::string problem_id;
  Heuristic heuristic = Heuristic::STYLE;
  std::vector<std::string> lines;
  BigNat claimed_answer;
  std::vector<TraceAssertion> assertions;

  std::string text() const;
};

struct VerifyResult {
  bool ok = false;
  std::size_t line = 0;  // 1-based line of first failure, 0 if none/global
  std::string message;
};

// Signed integer arithmetic over + - x with parentheses, e.g.
// "160000 + (-400) + (-400) + (+1)". Both the ASCII 'x'-free form used in
// traces (U+00D7) and '*' are accepted as multiplication signs.
std::optional<BigInt> eval_expression(std::string_view expr);

ReasoningTrace gen_rc_trace(const Problem& p);
ReasoningTrace gen_dd_trace(const Problem& p);
ReasoningTrace gen_ot_trace(const Problem& p);
ReasoningTrace gen_style_trace(const Problem& p);
ReasoningTrace gen_trace(const Problem& p, Heuristic h);

// Re-extracts every arithmetic claim from the trace text and checks each one,
// plus that the final answer equals the exact product of the operands in the
// problem statement line. Works purely from the text, so edits to any line
// are caught.
VerifyResult verify_trace(const ReasoningTrace& t);
VerifyResult verify_trace_text(const std::string& text);

// Extraction used by both generation (to populate `assertions`) and
// verification.
struct TraceExtract {
  std::optional<Operand> a, b;
  std::optional<BigNat> claimed_answer;
  std::vector<TraceAssertion> assertions;
  std::optional<std::size_t> bad_line;  // line with an unparseable equation
  std::string error;
};
TraceExtract extract_trace_claims(const std::vector<std::string>& lines);

// True iff every equation in the step text holds; single-step variant of the
// verifier used for contrastive pairs.
bool verify_step(const std::string& step);

struct ContrastivePair {
  std::string problem_id;
  Heuristic heuristic = Heuristic::DD;
  std::string correct_step;
  std::string incorrect_step;
  std::string corruption;  // e.g. "252 -> 262 (delta +10)"
};

ContrastivePair gen_contrastive_pair(const Problem& p, Heuristic h, SplitMix64& rng);

struct TraceRecord {
  ReasoningTrace trace;
  Problem problem;
  std::string split;  // train | val
};

struct TraceDatasetOptions {
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  double train_fraction = 0.85;
  std::set<std::string> exclusions;  // canonical "axb" keys
};

// Heuristic-matched problem selection (near-base pairs for RC, structured
// factors for DD, carry-heavy pairs for OT), excluding any problem whose
// canonical key is listed. Every emitted trace verifies.
std::vector<TraceRecord> build_trace_dataset(Heuristic h, const TraceDatasetOptions& opts);

}  // namespace mulbench
