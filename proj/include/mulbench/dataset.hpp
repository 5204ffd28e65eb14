#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mulbench/cost.hpp"
#include "mulbench/operand.hpp"
#include "mulbench/render.hpp"

namespace mulbench {

struct DesignFamily {
  enum class Kind {
    Near50Sym,
    Near100Sym,
    NearBaseSym,
    NearBaseMixed,
    ZeroFactor,
    HundredFactor,
    QuarterHundred,
    CleanTens,
    CarryHeavy,
    Generic,
  };
  Kind kind = Kind::Generic;
  std::uint64_t base = 0;  // for the near-base families

  std::string name() const;
  static std::optional<DesignFamily> from_name(const std::string& name);
};

struct HdsItem {
  std::string id;
  Problem problem;
  Heuristic target = Heuristic::RC;
  DesignFamily family;
  std::string split;  // train | val | test
  CostBreakdown costs;
  double margin = 0;
};

struct TrapItem {
  std::string id;
  Problem problem;
  std::string kind;  // anti_rounding | missing_term
  Heuristic tempting = Heuristic::RC;
  std::string note;
};

struct MultimodalItem {
  std::string id;
  Problem problem;
  std::string template_a, template_b;
  LoadMetrics metrics;
  std::string split;  // train | val | test
  std::vector<Representation> representations;
};

struct PerturbationPair {
  std::string id;
  Problem first;
  Problem second;
  std::string edited;  // "a" | "b"
  std::string cue;     // what the edit changes
  std::optional<Heuristic> first_target;
  std::optional<Heuristic> second_target;
};

struct HdsOptions {
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  double margin_min = CostParams{}.margin_min;
  CostParams params;
  std::size_t max_attempts_per_item = 4000;
};

// HDS construction: a checked-in curated pool seeds the set, then candidates
// are sampled into three roughly equal target buckets (RC near-base offsets
// within +-10, DD structured factors, OT carry-heavy or cue-free pairs),
// keeping only margin-separated labels, unique up to commutativity, with a
// stratified 70/15/15 split per target class.
std::vector<HdsItem> build_hds(const HdsOptions& opts);

std::vector<TrapItem> build_traps(std::size_t count, std::uint64_t seed,
                                  const std::vector<HdsItem>& hds,
                                  const CostParams& params = CostParams{});

std::vector<PerturbationPair> build_perturbation_pairs(std::uint64_t seed, std::size_t count,
                                                       const CostParams& params = CostParams{});

struct MultimodalOptions {
  std::size_t count = 10000;
  std::uint64_t seed = 1;
  std::vector<std::string> templates = DigitTemplate::core_family();
  bool extended_templates = false;
  std::vector<Representation> representations = {
      Representation::NumeralText, Representation::WordText, Representation::NumeralImage,
      Representation::WordImage};
};

// Paired multimodal suite: identical operands across every representation
// spec; operand templates cycle over all template pairs.
std::vector<MultimodalItem> build_multimodal_suite(const MultimodalOptions& opts);

// Largest-remainder stratified split over one class; fractions 70/15/15.
std::vector<std::string> stratified_split_labels(std::size_t n, SplitMix64& rng);

// Exclusion manifests: canonical "axb" keys, a <= b.
std::set<std::string> exclusion_keys(const std::vector<HdsItem>& hds,
                                     const std::vector<TrapItem>& traps,
                                     const std::vector<MultimodalItem>& multimodal);
std::string exclusions_to_json(const std::set<std::string>& keys);
std::set<std::string> exclusions_from_json(const std::string& json_text);

// JSONL record serialization (one record per line, no header).
std::string hds_item_to_json(const HdsItem& item);
HdsItem hds_item_from_json(const std::string& line);
std::string trap_item_to_json(const TrapItem& item);
TrapItem trap_item_from_json(const std::string& line);
std::string multimodal_item_to_json(const MultimodalItem& item);
MultimodalItem multimodal_item_from_json(const std::string& line);
std::string perturbation_pair_to_json(const PerturbationPair& pair);
PerturbationPair perturbation_pair_from_json(const std::string& line);

}  // namespace mulbench
