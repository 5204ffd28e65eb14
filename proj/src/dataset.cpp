#include "mulbench/dataset.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include <json.hpp>

namespace mulbench {

using nlohmann::json;

std::string DesignFamily::name() const {
  switch (kind) {
    case Kind::Near50Sym: return "near_50_sym";
    case Kind::Near100Sym: return "near_100_sym";
    case Kind::NearBaseSym: return "near_base_sym(" + std::to_string(base) + ")";
    case Kind::NearBaseMixed: return "near_base_mixed(" + std::to_string(base) + ")";
    case Kind::ZeroFactor: return "zero_factor";
    case Kind::HundredFactor: return "hundred_factor";
    case Kind::QuarterHundred: return "quarter_hundred";
    case Kind::CleanTens: return "clean_tens";
    case Kind::CarryHeavy: return "carry_heavy";
    case Kind::Generic: return "generic";
  }
  return "generic";
}

std::optional<DesignFamily> DesignFamily::from_name(const std::string& name) {
  using K = Kind;
  if (name == "near_50_sym") return DesignFamily{K::Near50Sym, 50};
  if (name == "near_100_sym") return DesignFamily{K::Near100Sym, 100};
  if (name == "zero_factor") return DesignFamily{K::ZeroFactor, 0};
  if (name == "hundred_factor") return DesignFamily{K::HundredFactor, 0};
  if (name == "quarter_hundred") return DesignFamily{K::QuarterHundred, 0};
  if (name == "clean_tens") return DesignFamily{K::CleanTens, 0};
  if (name == "carry_heavy") return DesignFamily{K::CarryHeavy, 0};
  if (name == "generic") return DesignFamily{K::Generic, 0};
  for (auto [kind, prefix] : {std::pair{K::NearBaseSym, std::string("near_base_sym(")},
                              std::pair{K::NearBaseMixed, std::string("near_base_mixed(")}}) {
    if (name.rfind(prefix, 0) == 0 && name.back() == ')') {
      std::uint64_t base = std::stoull(name.substr(prefix.size()));
      return DesignFamily{kind, base};
    }
  }
  return std::nullopt;
}

namespace {

DesignFamily near_family(std::uint64_t base, bool symmetric) {
  if (symmetric && base == 50) return {DesignFamily::Kind::Near50Sym, 50};
  if (symmetric && base == 100) return {DesignFamily::Kind::Near100Sym, 100};
  return {symmetric ? DesignFamily::Kind::NearBaseSym : DesignFamily::Kind::NearBaseMixed, base};
}

struct CuratedRow {
  std::uint64_t a, b;
  Heuristic target;
  DesignFamily family;
};

// Checked-in pool: the six published rows plus one exemplar per remaining
// design family.
const std::vector<CuratedRow>& curated_pool() {
  using K = DesignFamily::Kind;
  static const std::vector<CuratedRow> pool = {
      {49, 51, Heuristic::RC, {K::Near50Sym, 50}},
      {99, 101, Heuristic::RC, {K::Near100Sym, 100}},
      {47, 60, Heuristic::DD, {K::ZeroFactor, 0}},
      {37, 100, Heuristic::DD, {K::HundredFactor, 0}},
      {87, 96, Heuristic::OT, {K::CarryHeavy, 0}},
      {79, 68, Heuristic::OT, {K::CarryHeavy, 0}},
      {198, 202, Heuristic::RC, {K::NearBaseSym, 200}},
      {247, 256, Heuristic::RC, {K::NearBaseMixed, 250}},
      {47, 25, Heuristic::DD, {K::QuarterHundred, 0}},
      {30, 40, Heuristic::DD, {K::CleanTens, 0}},
      {23, 98, Heuristic::OT, {K::Generic, 0}},
  };
  return pool;
}

std::string padded_id(const std::string& prefix, std::size_t index, std::size_t total) {
  std::size_t width = 3;
  for (std::size_t t = 1000; t < total; t *= 10) ++width;
  std::string digits = std::to_string(index);
  return prefix + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

std::uint64_t min_base_offset_sum(std::uint64_t a, std::uint64_t b, const CostParams& params) {
  std::uint64_t best = UINT64_MAX;
  for (std::uint64_t base : params.base_set) {
    std::uint64_t da = a > base ? a - base : base - a;
    std::uint64_t db = b > base ? b - base : base - b;
    best = std::min(best, da + db);
  }
  return best;
}

}  // namespace

std::vector<std::string> stratified_split_labels(std::size_t n, SplitMix64& rng) {
  const std::array<double, 3> fractions = {0.70, 0.15, 0.15};
  const std::array<const char*, 3> names = {"train", "val", "test"};
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> fracs{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double quota = fractions[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(quota);
    fracs[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  // Largest remainder; ties resolved in train/val/test order.
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (fracs[i] > fracs[best]) best = i;
    ++counts[best];
    fracs[best] = -1;
    ++assigned;
  }
  std::vector<std::string> labels;
  labels.reserve(n);
  for (int i = 0; i < 3; ++i) labels.insert(labels.end(), counts[i], names[i]);
  for (std::size_t i = labels.size(); i > 1; --i)
    std::swap(labels[i - 1], labels[rng.next_below(i)]);
  return labels;
}

std::vector<HdsItem> build_hds(const HdsOptions& opts) {
  if (opts.count < 3) throw std::invalid_argument("build_hds: count must be at least 3");
  const CostParams& params = opts.params;
  SplitMix64 root(opts.seed);

  std::array<std::size_t, 3> bucket_targets{};  // RC, DD, OT
  for (int i = 0; i < 3; ++i) bucket_targets[i] = opts.count / 3;
  for (std::size_t r = 0; r < opts.count % 3; ++r) ++bucket_targets[r];

  auto bucket_of = [](Heuristic h) {
    switch (h) {
      case Heuristic::RC: return 0;
      case Heuristic::DD: return 1;
      default: return 2;
    }
  };

  std::set<std::string> used;
  std::array<std::vector<HdsItem>, 3> buckets;

  auto try_add = [&](const Operand& a, const Operand& b, Heuristic want,
                     const DesignFamily& family) {
    int slot = bucket_of(want);
    if (buckets[slot].size() >= bucket_targets[slot]) return false;
    auto label = label_target(a, b, opts.margin_min, params);
    if (!label || label->target != want) return false;
    std::string key = canonical_pair_key(a, b);
    if (!used.insert(key).second) return false;
    HdsItem item;
    item.problem = Problem::make("", a, b);
    item.target = label->target;
    item.family = family;
    item.costs = cost_breakdown(a, b, params);
    item.margin = label->margin;
    buckets[slot].push_back(std::move(item));
    return true;
  };

  for (const auto& row : curated_pool()) {
    if (!try_add(Operand(row.a), Operand(row.b), row.target, row.family)) {
      // A curated row must always label as published; params that break it
      // are a configuration error worth failing loudly on.
      if (!used.count(canonical_pair_key(Operand(row.a), Operand(row.b))) &&
          buckets[bucket_of(row.target)].size() < bucket_targets[bucket_of(row.target)])
        throw std::runtime_error("build_hds: curated row " + std::to_string(row.a) + "x" +
                                 std::to_string(row.b) +
                                 " no longer labels as its published target under these params");
    }
  }

  SplitMix64 rc_rng = root.split("hds.rc");
  SplitMix64 dd_rng = root.split("hds.dd");
  SplitMix64 ot_rng = root.split("hds.ot");

  auto sample_rc = [&]() {
    std::uint64_t base = params.base_set[rc_rng.next_below(params.base_set.size())];
    auto offset = [&]() {
      std::int64_t k = 1 + static_cast<std::int64_t>(rc_rng.next_below(10));
      return rc_rng.next_below(2) == 0 ? k : -k;
    };
    std::int64_t da = offset();
    bool symmetric = rc_rng.next_below(2) == 0;
    std::int64_t db = symmetric ? -da : offset();
    if (!symmetric && db == -da) db = da;  // keep the mixed family honestly mixed
    std::int64_t av = static_cast<std::int64_t>(base) + da;
    std::int64_t bv = static_cast<std::int64_t>(base) + db;
    if (av < 1 || bv < 1) return false;
    return try_add(Operand(static_cast<std::uint64_t>(av)),
                   Operand(static_cast<std::uint64_t>(bv)), Heuristic::RC,
                   near_family(base, symmetric));
  };

  auto sample_dd = [&]() {
    std::uint64_t dense = 10 * (1 + dd_rng.next_below(9)) + 1 + dd_rng.next_below(9);
    std::uint64_t other = 0;
    DesignFamily family;
    switch (dd_rng.next_below(4)) {
      case 0:
        other = 10 * (1 + dd_rng.next_below(9));
        family = {DesignFamily::Kind::ZeroFactor, 0};
        break;
      case 1:
        other = 100 * (1 + dd_rng.next_below(9));
        family = {DesignFamily::Kind::HundredFactor, 0};
        break;
      case 2: {
        std::uint64_t q = 1 + dd_rng.next_below(20);
        if (q % 4 == 0) ++q;  // q*25 with q divisible by 4 is a hundred multiple
        other = 25 * q;
        family = {DesignFamily::Kind::QuarterHundred, 0};
        break;
      }
      default:
        dense = 10 * (1 + dd_rng.next_below(9));
        other = 10 * (1 + dd_rng.next_below(9));
        family = {DesignFamily::Kind::CleanTens, 0};
        break;
    }
    bool swap = dd_rng.next_below(2) == 0;
    Operand a(swap ? other : dense), b(swap ? dense : other);
    return try_add(a, b, Heuristic::DD, family);
  };

  auto sample_ot = [&]() {
    bool carry_heavy = ot_rng.next_below(2) == 0;
    auto digit = [&](unsigned lo) {
      return static_cast<std::uint64_t>(lo + ot_rng.next_below(10 - lo));
    };
    std::uint64_t a, b;
    if (carry_heavy) {
      a = digit(6) * 10 + digit(6);
      b = digit(6) * 10 + digit(6);
      if (count_carries_canonical(Operand(a), Operand(b)).total() < 3) return false;
    } else {
      a = digit(1) * 10 + digit(1);
      b = digit(1) * 10 + digit(1);
      if (min_base_offset_sum(a, b, params) <= 10) return false;  // away from base cues
    }
    return try_add(Operand(a), Operand(b), Heuristic::OT,
                   {carry_heavy ? DesignFamily::Kind::CarryHeavy : DesignFamily::Kind::Generic,
                    0});
  };

  const std::size_t max_attempts = opts.max_attempts_per_item * opts.count + 1000;
  std::size_t attempts = 0;
  while (buckets[0].size() < bucket_targets[0] || buckets[1].size() < bucket_targets[1] ||
         buckets[2].size() < bucket_targets[2]) {
    if (++attempts > max_attempts) {
      throw std::runtime_error(
          "build_hds: bucket exhaustion after " + std::to_string(attempts - 1) +
          " attempts (RC " + std::to_string(buckets[0].size()) + "/" +
          std::to_string(bucket_targets[0]) + ", DD " + std::to_string(buckets[1].size()) + "/" +
          std::to_string(bucket_targets[1]) + ", OT " + std::to_string(buckets[2].size()) + "/" +
          std::to_string(bucket_targets[2]) + ")");
    }
    if (buckets[0].size() < bucket_targets[0]) sample_rc();
    if (buckets[1].size() < bucket_targets[1]) sample_dd();
    if (buckets[2].size() < bucket_targets[2]) sample_ot();
  }

  // Ids follow bucket order; the split is stratified per target class.
  std::vector<HdsItem> items;
  items.reserve(opts.count);
  for (auto& bucket : buckets)
    for (auto& item : bucket) items.push_back(std::move(item));
  for (std::size_t i = 0; i < items.size(); ++i) {
    items[i].id = padded_id("hds_", i, items.size());
    items[i].problem.id = items[i].id;
  }
  for (int slot = 0; slot < 3; ++slot) {
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < items.size(); ++i)
      if (bucket_of(items[i].target) == slot) index.push_back(i);
    SplitMix64 split_rng = root.split(std::string("hds.split.") + std::to_string(slot));
    std::vector<std::string> labels = stratified_split_labels(index.size(), split_rng);
    for (std::size_t i = 0; i < index.size(); ++i) items[index[i]].split = labels[i];
  }
  return items;
}

std::vector<TrapItem> build_traps(std::size_t count, std::uint64_t seed,
                                  const std::vector<HdsItem>& hds, const CostParams& params) {
  std::set<std::string> used;
  for (const auto& item : hds) used.insert(item.problem.canonical_key());

  SplitMix64 rng = SplitMix64(seed).split("traps");
  std::vector<TrapItem> out;
  std::size_t n_anti = count - count / 2;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 4000 * std::max<std::size_t>(count, 1);

  while (out.size() < count) {
    if (++attempts > max_attempts)
      throw std::runtime_error("build_traps: candidate space exhausted (kept " +
                               std::to_string(out.size()) + " of " + std::to_string(count) +
                               ")");
    bool anti = out.size() < n_anti;
    TrapItem trap;
    if (anti) {
      std::uint64_t base = params.base_set[rng.next_below(params.base_set.size())];
      auto offset = [&]() {
        std::int64_t k = 1 + static_cast<std::int64_t>(rng.next_below(10));
        return rng.next_below(2) == 0 ? k : -k;
      };
      std::int64_t da = offset(), db = offset();
      if (da == -db) continue;  // must stay asymmetric
      std::int64_t av = static_cast<std::int64_t>(base) + da;
      std::int64_t bv = static_cast<std::int64_t>(base) + db;
      if (av < 1 || bv < 1) continue;
      Operand a(static_cast<std::uint64_t>(av)), b(static_cast<std::uint64_t>(bv));
      auto label = label_target(a, b, params.margin_min, params);
      if (label && label->target == Heuristic::RC) continue;  // not misleading enough
      trap.problem = Problem::make("", a, b);
      trap.kind = "anti_rounding";
      trap.tempting = Heuristic::RC;
      trap.note = "near base " + std::to_string(base) + " with asymmetric offsets (" +
                  (da >= 0 ? "+" : "") + std::to_string(da) + ", " + (db >= 0 ? "+" : "") +
                  std::to_string(db) + ")";
    } else {
      auto digit = [&]() { return 1 + rng.next_below(9); };
      std::uint64_t a = digit() * 100 + digit() * 10 + digit();
      std::uint64_t b = digit() * 100 + digit() * 10 + digit();
      trap.problem = Problem::make("", Operand(a), Operand(b));
      trap.kind = "missing_term";
      trap.tempting = Heuristic::DD;
      trap.note = "decomposition needs 3 non-zero partial products on either side";
    }
    std::string key = trap.problem.canonical_key();
    if (!used.insert(key).second) continue;
    out.push_back(std::move(trap));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].id = padded_id("trap_", i, out.size());
    out[i].problem.id = out[i].id;
  }
  return out;
}

std::vector<PerturbationPair> build_perturbation_pairs(std::uint64_t seed, std::size_t count,
                                                       const CostParams& params) {
  SplitMix64 rng = SplitMix64(seed).split("perturbations");
  std::vector<PerturbationPair> out;
  std::set<std::string> used;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 4000 * std::max<std::size_t>(count, 1);

  while (out.size() < count) {
    if (++attempts > max_attempts)
      throw std::runtime_error("build_perturbation_pairs: candidate space exhausted");
    PerturbationPair pair;
    std::uint64_t a1, b1, b2;
    if (rng.next_below(2) == 0) {
      // Break near-base symmetry: (B-k, B+k) -> (B-k, B+k+2).
      std::uint64_t base = params.base_set[rng.next_below(params.base_set.size())];
      std::uint64_t k = 1 + rng.next_below(5);
      a1 = base - k;
      b1 = base + k;
      b2 = base + k + 2;
      pair.cue = "symmetric_offsets";
    } else {
      // Remove a trailing-zero cue: (x, d*10) -> (x, d*10 + 1).
      a1 = 10 * (1 + rng.next_below(9)) + 1 + rng.next_below(9);
      b1 = 10 * (1 + rng.next_below(9));
      b2 = b1 + 1;
      pair.cue = "trailing_zero";
    }
    Operand a(a1), first_b(b1), second_b(b2);
    auto l1 = label_target(a, first_b, params.margin_min, params);
    auto l2 = label_target(a, second_b, params.margin_min, params);
    if (!l1) continue;
    if (l2 && l2->target == l1->target) continue;  // the cue flip must matter
    std::string key = canonical_pair_key(a, first_b) + "|" + canonical_pair_key(a, second_b);
    if (!used.insert(key).second) continue;
    pair.first = Problem::make("", a, first_b);
    pair.second = Problem::make("", a, second_b);
    pair.edited = "b";
    pair.first_target = l1->target;
    if (l2) pair.second_target = l2->target;
    out.push_back(std::move(pair));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].id = padded_id("pert_", i, out.size());
    out[i].first.id = out[i].id + "_base";
    out[i].second.id = out[i].id + "_flip";
  }
  return out;
}

std::vector<MultimodalItem> build_multimodal_suite(const MultimodalOptions& opts) {
  if (opts.count < 1) throw std::invalid_argument("build_multimodal_suite: count must be >= 1");
  std::vector<DigitTemplate> templates;
  for (const auto& t : opts.templates)
    templates.push_back(DigitTemplate::parse(t, opts.extended_templates));
  if (templates.empty()) throw std::invalid_argument("build_multimodal_suite: no templates");

  SplitMix64 rng = SplitMix64(opts.seed).split("multimodal");
  std::vector<MultimodalItem> out;
  out.reserve(opts.count);
  std::size_t pair_count = templates.size() * templates.size();
  for (std::size_t i = 0; i < opts.count; ++i) {
    std::size_t pair_idx = i % pair_count;
    const DigitTemplate& ta = templates[pair_idx / templates.size()];
    const DigitTemplate& tb = templates[pair_idx % templates.size()];
    MultimodalItem item;
    item.id = padded_id("mm_", i, opts.count);
    Operand a = sample_operand(ta, rng);
    Operand b = sample_operand(tb, rng);
    item.problem = Problem::make(item.id, a, b);
    item.template_a = ta.pattern;
    item.template_b = tb.pattern;
    item.metrics = compute_load(a, b);
    item.representations = opts.representations;
    out.push_back(std::move(item));
  }
  SplitMix64 split_rng = SplitMix64(opts.seed).split("multimodal.split");
  std::vector<std::string> labels = stratified_split_labels(out.size(), split_rng);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].split = labels[i];
  return out;
}

std::set<std::string> exclusion_keys(const std::vector<HdsItem>& hds,
                                     const std::vector<TrapItem>& traps,
                                     const std::vector<MultimodalItem>& multimodal) {
  std::set<std::string> keys;
  for (const auto& item : hds)
    if (item.split != "train") keys.insert(item.problem.canonical_key());
  for (const auto& trap : traps) keys.insert(trap.problem.canonical_key());
  for (const auto& item : multimodal)
    if (item.split != "train") keys.insert(item.problem.canonical_key());
  return keys;
}

std::string exclusions_to_json(const std::set<std::string>& keys) {
  json j;
  j["keys"] = keys;  // std::set keeps them sorted
  return j.dump();
}

std::set<std::string> exclusions_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  std::set<std::string> keys;
  for (const auto& k : j.at("keys")) keys.insert(k.get<std::string>());
  return keys;
}

// ---- JSONL records ----

namespace {

json problem_to_json(const Problem& p) {
  return json{{"id", p.id}, {"a", p.a.to_string()}, {"b", p.b.to_string()},
              {"product", p.product.to_string()}};
}

Problem problem_from_json(const json& j) {
  Problem p = Problem::make(j.at("id").get<std::string>(),
                            Operand::from_decimal(j.at("a").get<std::string>()),
                            Operand::from_decimal(j.at("b").get<std::string>()));
  std::string stored = j.at("product").get<std::string>();
  if (stored != p.product.to_string())
    throw std::runtime_error("problem " + p.id + ": stored product " + stored +
                             " does not match the operands");
  return p;
}

json metrics_to_json(const LoadMetrics& m) {
  return json{{"d_total", m.d_total},
              {"d_nonzero", m.d_nonzero},
              {"C", m.load_C},
              {"ot_ops", m.ot_ops},
              {"dd_one_sided", m.dd_one_sided},
              {"nonzero_products", m.nonzero_products},
              {"carry_mult", m.carry_mult},
              {"carry_add", m.carry_add},
              {"carry_count", m.carry_count}};
}

LoadMetrics metrics_from_json(const json& j) {
  LoadMetrics m;
  m.d_total = j.at("d_total").get<std::size_t>();
  m.d_nonzero = j.at("d_nonzero").get<std::size_t>();
  m.load_C = j.at("C").get<std::size_t>();
  m.ot_ops = j.at("ot_ops").get<std::size_t>();
  m.dd_one_sided = j.at("dd_one_sided").get<std::size_t>();
  m.nonzero_products = j.at("nonzero_products").get<std::size_t>();
  m.carry_mult = j.at("carry_mult").get<std::size_t>();
  m.carry_add = j.at("carry_add").get<std::size_t>();
  m.carry_count = j.at("carry_count").get<std::size_t>();
  return m;
}

}  // namespace

std::string hds_item_to_json(const HdsItem& item) {
  json j;
  j["id"] = item.id;
  j["problem"] = problem_to_json(item.problem);
  j["target"] = heuristic_name(item.target);
  j["family"] = item.family.name();
  j["split"] = item.split;
  j["margin"] = item.margin;
  j["costs"] = {{"ot", item.costs.ot_cost},
                {"dd", item.costs.dd_cost},
                {"rc", item.costs.rc_cost},
                {"rc_base", item.costs.rc_base},
                {"components", item.costs.components}};
  return j.dump();
}

HdsItem hds_item_from_json(const std::string& line) {
  json j = json::parse(line);
  HdsItem item;
  item.id = j.at("id").get<std::string>();
  item.problem = problem_from_json(j.at("problem"));
  auto target = heuristic_from_name(j.at("target").get<std::string>());
  if (!target) throw std::runtime_error("hds item " + item.id + ": bad target");
  item.target = *target;
  auto family = DesignFamily::from_name(j.at("family").get<std::string>());
  if (!family) throw std::runtime_error("hds item " + item.id + ": bad family");
  item.family = *family;
  item.split = j.at("split").get<std::string>();
  item.margin = j.at("margin").get<double>();
  const json& costs = j.at("costs");
  item.costs.ot_cost = costs.at("ot").get<double>();
  item.costs.dd_cost = costs.at("dd").get<double>();
  item.costs.rc_cost = costs.at("rc").get<double>();
  item.costs.rc_base = costs.at("rc_base").get<std::uint64_t>();
  for (const auto& [k, v] : costs.at("components").items())
    item.costs.components[k] = v.get<double>();
  return item;
}

std::string trap_item_to_json(const TrapItem& item) {
  json j;
  j["id"] = item.id;
  j["problem"] = problem_to_json(item.problem);
  j["kind"] = item.kind;
  j["tempting"] = heuristic_name(item.tempting);
  j["note"] = item.note;
  return j.dump();
}

TrapItem trap_item_from_json(const std::string& line) {
  json j = json::parse(line);
  TrapItem item;
  item.id = j.at("id").get<std::string>();
  item.problem = problem_from_json(j.at("problem"));
  item.kind = j.at("kind").get<std::string>();
  auto tempting = heuristic_from_name(j.at("tempting").get<std::string>());
  if (!tempting) throw std::runtime_error("trap " + item.id + ": bad tempting heuristic");
  item.tempting = *tempting;
  item.note = j.at("note").get<std::string>();
  return item;
}

std::string multimodal_item_to_json(const MultimodalItem& item) {
  json reps = json::array();
  for (auto r : item.representations) reps.push_back(representation_name(r));
  json j;
  j["id"] = item.id;
  j["problem"] = problem_to_json(item.problem);
  j["template_a"] = item.template_a;
  j["template_b"] = item.template_b;
  j["metrics"] = metrics_to_json(item.metrics);
  j["split"] = item.split;
  j["representations"] = reps;
  return j.dump();
}

MultimodalItem multimodal_item_from_json(const std::string& line) {
  json j = json::parse(line);
  MultimodalItem item;
  item.id = j.at("id").get<std::string>();
  item.problem = problem_from_json(j.at("problem"));
  item.template_a = j.at("template_a").get<std::string>();
  item.template_b = j.at("template_b").get<std::string>();
  item.metrics = metrics_from_json(j.at("metrics"));
  item.split = j.at("split").get<std::string>();
  for (const auto& r : j.at("representations")) {
    auto rep = representation_from_name(r.get<std::string>());
    if (!rep) throw std::runtime_error("multimodal item " + item.id + ": bad representation");
    item.representations.push_back(*rep);
  }
  return item;
}

std::string perturbation_pair_to_json(const PerturbationPair& pair) {
  json j;
  j["id"] = pair.id;
  j["first"] = problem_to_json(pair.first);
  j["second"] = problem_to_json(pair.second);
  j["edited"] = pair.edited;
  j["cue"] = pair.cue;
  j["first_target"] = pair.first_target ? heuristic_name(*pair.first_target) : "";
  j["second_target"] = pair.second_target ? heuristic_name(*pair.second_target) : "";
  return j.dump();
}

PerturbationPair perturbation_pair_from_json(const std::string& line) {
  json j = json::parse(line);
  PerturbationPair pair;
  pair.id = j.at("id").get<std::string>();
  pair.first = problem_from_json(j.at("first"));
  pair.second = problem_from_json(j.at("second"));
  pair.edited = j.at("edited").get<std::string>();
  pair.cue = j.at("cue").get<std::string>();
  std::string ft = j.at("first_target").get<std::string>();
  if (!ft.empty()) pair.first_target = heuristic_from_name(ft);
  std::string st = j.at("second_target").get<std::string>();
  if (!st.empty()) pair.second_target = heuristic_from_name(st);
  return pair;
}

}  // namespace mulbench
