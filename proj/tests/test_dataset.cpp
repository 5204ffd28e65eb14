#include <doctest.h>

#include <map>
#include <stdexcept>

#include "mulbench/dataset.hpp"

using namespace mulbench;

TEST_CASE("build_hds produces stratified margin-separated items") {
  HdsOptions opts;
  opts.count = 300;
  opts.seed = 42;
  auto items = build_hds(opts);
  REQUIRE(items.size() == 300);

  std::map<std::string, std::size_t> split_counts;
  std::map<Heuristic, std::map<std::string, std::size_t>> class_split;
  std::map<Heuristic, std::size_t> class_counts;
  std::set<std::string> keys;
  for (const auto& item : items) {
    // Stored target and margin must match a fresh labeling bit-exactly.
    auto label = label_target(item.problem.a, item.problem.b, opts.margin_min, opts.params);
    REQUIRE(label.has_value());
    REQUIRE(label->target == item.target);
    REQUIRE(label->margin == item.margin);
    REQUIRE(keys.insert(item.problem.canonical_key()).second);
    split_counts[item.split]++;
    class_split[item.target][item.split]++;
    class_counts[item.target]++;
  }
  CHECK(split_counts["train"] == 210);  // 70% of 300
  CHECK(split_counts["val"] == 45);
  CHECK(split_counts["test"] == 45);
  CHECK(class_counts[Heuristic::RC] == 100);
  CHECK(class_counts[Heuristic::DD] == 100);
  CHECK(class_counts[Heuristic::OT] == 100);
  // Within each class, the split deviates from 70/15/15 by at most one item.
  for (auto& [h, splits] : class_split) {
    double n = static_cast<double>(class_counts[h]);
    CHECK(std::abs(static_cast<double>(splits["train"]) - 0.70 * n) <= 1.0);
    CHECK(std::abs(static_cast<double>(splits["val"]) - 0.15 * n) <= 1.0);
    CHECK(std::abs(static_cast<double>(splits["test"]) - 0.15 * n) <= 1.0);
  }
}

TEST_CASE("build_hds at full scale splits 700/150/150") {
  HdsOptions opts;
  opts.count = 1000;
  opts.seed = 20240808;
  auto items = build_hds(opts);
  std::map<std::string, std::size_t> splits;
  for (const auto& item : items) splits[item.split]++;
  CHECK(splits["train"] == 700);
  CHECK(splits["val"] == 150);
  CHECK(splits["test"] == 150);
}

TEST_CASE("build_hds seeds the curated published rows first") {
  HdsOptions opts;
  opts.count = 60;
  opts.seed = 9;
  auto items = build_hds(opts);
  CHECK(items[0].id == "hds_000");
  CHECK(items[0].problem.a.to_string() == "49");
  CHECK(items[0].problem.b.to_string() == "51");
  CHECK(items[0].target == Heuristic::RC);
  CHECK(items[0].family.name() == "near_50_sym");
  bool found_37x100 = false;
  for (const auto& item : items) {
    if (item.problem.canonical_key() == "37x100") {
      found_37x100 = true;
      CHECK(item.target == Heuristic::DD);
      CHECK(item.family.name() == "hundred_factor");
    }
  }
  CHECK(found_37x100);
}

TEST_CASE("build_hds is deterministic per seed") {
  HdsOptions opts;
  opts.count = 120;
  opts.seed = 1234;
  auto a = build_hds(opts);
  auto b = build_hds(opts);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].problem.canonical_key() == b[i].problem.canonical_key());
    CHECK(a[i].split == b[i].split);
  }
  opts.seed = 1235;
  auto c = build_hds(opts);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].problem.canonical_key() != c[i].problem.canonical_key()) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("build_hds rejects tiny counts") {
  HdsOptions opts;
  opts.count = 2;
  CHECK_THROWS_AS(build_hds(opts), std::invalid_argument);
}

TEST_CASE("build_hds bucket exhaustion carries per-bucket counts") {
  HdsOptions opts;
  opts.count = 4000;  // RC bucket target exceeds its near-base candidate space
  opts.seed = 2;
  opts.max_attempts_per_item = 1;
  try {
    build_hds(opts);
    FAIL("expected exhaustion");
  } catch (const std::runtime_error& e) {
    std::string msg = e.what();
    CHECK(msg.find("bucket exhaustion") != std::string::npos);
    CHECK(msg.find("RC") != std::string::npos);
    CHECK(msg.find("DD") != std::string::npos);
    CHECK(msg.find("OT") != std::string::npos);
  }
}

TEST_CASE("traps are disjoint from the HDS and structurally sound") {
  HdsOptions opts;
  opts.count = 90;
  opts.seed = 5;
  auto hds = build_hds(opts);
  auto traps = build_traps(30, 5, hds);
  REQUIRE(traps.size() == 30);

  std::set<std::string> hds_keys;
  for (const auto& item : hds) hds_keys.insert(item.problem.canonical_key());
  std::set<std::string> trap_keys;
  std::size_t anti = 0, missing = 0;
  for (const auto& trap : traps) {
    std::string key = trap.problem.canonical_key();
    CHECK(hds_keys.count(key) == 0);
    CHECK(trap_keys.insert(key).second);
    if (trap.kind == "anti_rounding") {
      ++anti;
      CHECK(trap.tempting == Heuristic::RC);
      // Near a base but never symmetric: a + b != 2B for the noted base.
      auto label = label_target(trap.problem.a, trap.problem.b, opts.params.margin_min,
                                opts.params);
      CHECK((!label || label->target != Heuristic::RC));
    } else {
      ++missing;
      CHECK(trap.kind == "missing_term");
      // At least 3 non-zero partial products in the DD expansion.
      CHECK(trap.problem.a.n_nonzero() >= 3);
      CHECK(trap.problem.b.n_nonzero() >= 3);
    }
  }
  CHECK(anti == 15);
  CHECK(missing == 15);
}

TEST_CASE("perturbation pairs flip exactly one cue") {
  auto pairs = build_perturbation_pairs(11, 40);
  REQUIRE(pairs.size() == 40);
  CostParams params;
  for (const auto& pair : pairs) {
    CHECK(pair.first.a.value() == pair.second.a.value());  // only b edited
    CHECK(pair.first.b.value() != pair.second.b.value());
    auto l1 = label_target(pair.first.a, pair.first.b, params.margin_min, params);
    auto l2 = label_target(pair.second.a, pair.second.b, params.margin_min, params);
    REQUIRE(l1.has_value());
    CHECK((!l2 || l2->target != l1->target));
  }
}

TEST_CASE("multimodal suite pairs identical operands across representations") {
  MultimodalOptions opts;
  opts.count = 98;  // exercises all 49 template pairs twice
  opts.seed = 3;
  auto suite = build_multimodal_suite(opts);
  REQUIRE(suite.size() == 98);
  for (const auto& item : suite) {
    CHECK(item.representations.size() == 4);
    CHECK(item.metrics.load_C ==
          compute_load(item.problem.a, item.problem.b).load_C);
    CHECK(item.problem.a.n_digits() == item.template_a.size());
    CHECK(item.problem.b.n_digits() == item.template_b.size());
  }
  auto again = build_multimodal_suite(opts);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    CHECK(suite[i].problem.a.value() == again[i].problem.a.value());
    CHECK(suite[i].id == again[i].id);
  }
  opts.count = 0;
  CHECK_THROWS_AS(build_multimodal_suite(opts), std::invalid_argument);
}

TEST_CASE("exclusion manifest covers held-out sets and round-trips") {
  HdsOptions opts;
  opts.count = 60;
  opts.seed = 21;
  auto hds = build_hds(opts);
  auto traps = build_traps(10, 21, hds);
  MultimodalOptions mopts;
  mopts.count = 50;
  mopts.seed = 21;
  auto suite = build_multimodal_suite(mopts);

  auto keys = exclusion_keys(hds, traps, suite);
  for (const auto& item : hds) {
    bool excluded = keys.count(item.problem.canonical_key()) > 0;
    if (item.split != "train") CHECK(excluded);
  }
  for (const auto& trap : traps) CHECK(keys.count(trap.problem.canonical_key()) == 1);

  std::string encoded = exclusions_to_json(keys);
  CHECK(exclusions_from_json(encoded) == keys);
}

TEST_CASE("dataset records round-trip through JSONL") {
  HdsOptions opts;
  opts.count = 12;
  opts.seed = 77;
  auto hds = build_hds(opts);
  for (const auto& item : hds) {
    HdsItem back = hds_item_from_json(hds_item_to_json(item));
    CHECK(back.id == item.id);
    CHECK(back.problem.a.value() == item.problem.a.value());
    CHECK(back.target == item.target);
    CHECK(back.family.name() == item.family.name());
    CHECK(back.split == item.split);
    CHECK(back.margin == item.margin);  // bit-exact through JSON
    CHECK(back.costs.ot_cost == item.costs.ot_cost);
  }
  auto traps = build_traps(4, 77, hds);
  for (const auto& trap : traps) {
    TrapItem back = trap_item_from_json(trap_item_to_json(trap));
    CHECK(back.id == trap.id);
    CHECK(back.kind == trap.kind);
    CHECK(back.note == trap.note);
  }
  MultimodalOptions mopts;
  mopts.count = 5;
  auto suite = build_multimodal_suite(mopts);
  for (const auto& item : suite) {
    MultimodalItem back = multimodal_item_from_json(multimodal_item_to_json(item));
    CHECK(back.id == item.id);
    CHECK(back.metrics.load_C == item.metrics.load_C);
    CHECK(back.representations == item.representations);
  }
  auto pairs = build_perturbation_pairs(77, 3);
  for (const auto& pair : pairs) {
    PerturbationPair back = perturbation_pair_from_json(perturbation_pair_to_json(pair));
    CHECK(back.id == pair.id);
    CHECK(back.first.b.value() == pair.first.b.value());
    CHECK(back.first_target == pair.first_target);
  }
  // A tampered product is rejected on load.
  std::string line = hds_item_to_json(hds[0]);
  std::size_t pos = line.find("\"product\":\"");
  REQUIRE(pos != std::string::npos);
  line[pos + 11] = line[pos + 11] == '1' ? '2' : '1';
  CHECK_THROWS(hds_item_from_json(line));
}

TEST_CASE("design family names round-trip") {
  for (const char* name : {"near_50_sym", "near_100_sym", "near_base_sym(200)",
                           "near_base_mixed(250)", "zero_factor", "hundred_factor",
                           "quarter_hundred", "clean_tens", "carry_heavy", "generic"}) {
    auto family = DesignFamily::from_name(name);
    REQUIRE(family.has_value());
    CHECK(family->name() == name);
  }
  CHECK_FALSE(DesignFamily::from_name("bogus").has_value());
}
