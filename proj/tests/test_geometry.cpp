#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <filesystem>

#include "mulbench/geometry.hpp"
#include "mulbench/rng.hpp"

using namespace mulbench;

namespace {

LowRankModule random_module(const std::string& name, std::size_t d, std::size_t r,
                            std::size_t k, SplitMix64& rng) {
  LowRankModule m;
  m.name = name;
  m.d = d;
  m.r = r;
  m.k = k;
  m.a.resize(r * k);
  m.b.resize(d * r);
  for (auto& v : m.a) v = static_cast<float>(rng.next_unit() * 2.0 - 1.0);
  for (auto& v : m.b) v = static_cast<float>(rng.next_unit() * 2.0 - 1.0);
  return m;
}

LowRankUpdate random_adapter(const std::string& id, const std::string& heuristic,
                             SplitMix64& rng) {
  LowRankUpdate u;
  u.adapter_id = id;
  u.heuristic = heuristic;
  u.modules.push_back(random_module("layers.0.attn.q", 8, 3, 6, rng));
  u.modules.push_back(random_module("layers.0.attn.v", 7, 3, 5, rng));
  u.modules.push_back(random_module("layers.1.mlp.up", 9, 2, 4, rng));
  return u;
}

// Brute-force dense product oracle, independent of effective_update.
std::vector<double> dense_oracle(const LowRankUpdate& u) {
  std::vector<double> flat;
  for (const auto& m : u.modules) {
    for (std::size_t i = 0; i < m.d; ++i)
      for (std::size_t j = 0; j < m.k; ++j) {
        double sum = 0;
        for (std::size_t t = 0; t < m.r; ++t)
          sum += static_cast<double>(m.b[i * m.r + t]) * static_cast<double>(m.a[t * m.k + j]);
        flat.push_back(sum);
      }
  }
  return flat;
}

}  // namespace

TEST_CASE("effective_update matches the dense oracle") {
  SplitMix64 rng(31);
  LowRankUpdate u = random_adapter("a0", "DD", rng);
  auto flat = effective_update(u);
  auto oracle = dense_oracle(u);
  REQUIRE(flat.size() == oracle.size());
  for (std::size_t i = 0; i < flat.size(); ++i)
    CHECK(flat[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
}

TEST_CASE("effective_update identity and zero factors") {
  LowRankModule m;
  m.name = "id";
  m.d = 3;
  m.r = 3;
  m.k = 3;
  m.a.assign(9, 0.0f);
  m.b.assign(9, 0.0f);
  for (int i = 0; i < 3; ++i) {
    m.a[static_cast<std::size_t>(i) * 3 + static_cast<std::size_t>(i)] = 1.0f;
    m.b[static_cast<std::size_t>(i) * 3 + static_cast<std::size_t>(i)] = 1.0f;
  }
  LowRankUpdate u;
  u.adapter_id = "identity";
  u.heuristic = "OT";
  u.modules.push_back(m);
  auto flat = effective_update(u);
  std::vector<double> expect = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  CHECK(flat == expect);
  for (auto& v : u.modules[0].a) v = 0.0f;
  auto zero = effective_update(u);
  for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("cosine similarity anchors") {
  std::vector<double> v = {1, 2, -3, 4};
  CHECK(cosine_similarity(v, v) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> neg = {-1, -2, 3, -4};
  CHECK(cosine_similarity(v, neg) == doctest::Approx(-1.0).epsilon(1e-12));
  std::vector<double> left = {1, 2, 0, 0};
  std::vector<double> right = {0, 0, 3, -4};
  CHECK(cosine_similarity(left, right) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS(cosine_similarity(v, {1, 2}));
  CHECK_THROWS(cosine_similarity({0, 0}, {0, 0}));
  // Positive scaling leaves the value; negation flips the sign.
  std::vector<double> w = {2, -1, 5, 0.5};
  std::vector<double> scaled = w;
  for (auto& x : scaled) x *= 3.25;
  CHECK(cosine_similarity(v, scaled) == doctest::Approx(cosine_similarity(v, w)).epsilon(1e-12));
  for (auto& x : scaled) x = -x;
  CHECK(cosine_similarity(v, scaled) ==
        doctest::Approx(-cosine_similarity(v, w)).epsilon(1e-12));
}

TEST_CASE("streamed cosine agrees with the materialized path to 1e-9") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    LowRankUpdate u1 = random_adapter("a", "DD", rng);
    LowRankUpdate u2 = random_adapter("b", "RC", rng);
    double streamed = cosine_similarity_streamed(u1, u2);
    double materialized = cosine_similarity(effective_update(u1), effective_update(u2));
    REQUIRE(streamed == doctest::Approx(materialized).epsilon(1e-9));
  }
}

TEST_CASE("factorization invariance under invertible mixing") {
  // Factors (B M, M^-1 A) produce the same effective update. Use a 2x2
  // rotation-and-scale with an exact inverse.
  SplitMix64 rng(123);
  LowRankUpdate u;
  u.adapter_id = "mix";
  u.heuristic = "DD";
  u.modules.push_back(random_module("m", 6, 2, 5, rng));
  const LowRankModule& m = u.modules[0];

  double mix[4] = {1.25, 0.5, -0.75, 2.0};
  double det = mix[0] * mix[3] - mix[1] * mix[2];
  double inv[4] = {mix[3] / det, -mix[1] / det, -mix[2] / det, mix[0] / det};

  LowRankUpdate mixed = u;
  LowRankModule& mm = mixed.modules[0];
  // B' = B * M (d x r), A' = M^-1 * A (r x k).
  for (std::size_t i = 0; i < m.d; ++i)
    for (std::size_t t = 0; t < 2; ++t)
      mm.b[i * 2 + t] = static_cast<float>(static_cast<double>(m.b[i * 2]) * mix[t] +
                                           static_cast<double>(m.b[i * 2 + 1]) * mix[2 + t]);
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t j = 0; j < m.k; ++j)
      mm.a[t * m.k + j] =
          static_cast<float>(inv[t * 2] * static_cast<double>(m.a[j]) +
                             inv[t * 2 + 1] * static_cast<double>(m.a[m.k + j]));

  auto flat = effective_update(u);
  auto flat_mixed = effective_update(mixed);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    num += (flat[i] - flat_mixed[i]) * (flat[i] - flat_mixed[i]);
    den += flat[i] * flat[i];
  }
  CHECK(std::sqrt(num / den) < 1e-6);  // float32 factors, double accumulation
  CHECK(cosine_similarity_streamed(u, mixed) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("group gap separates same-heuristic from cross-heuristic adapters") {
  // Identical adapters share direction; an orthogonal one does not.
  SplitMix64 rng(9);
  LowRankUpdate base = random_adapter("dd_seed1", "DD", rng);
  LowRankUpdate copy = base;
  copy.adapter_id = "dd_seed2";
  LowRankUpdate ortho = base;
  ortho.adapter_id = "rc_seed1";
  ortho.heuristic = "RC";
  // Orthogonal by disjoint support: B*A column j vanishes when A's column j
  // is zero, so opposite column parities give exactly disjoint updates.
  for (auto& m : ortho.modules)
    for (std::size_t i = 0; i < m.a.size(); ++i) m.a[i] = (i % m.k) % 2 ? 0.5f : 0.0f;
  for (auto& m : base.modules)
    for (std::size_t i = 0; i < m.a.size(); ++i)
      if ((i % m.k) % 2) m.a[i] = 0.0f;
  copy = base;
  copy.adapter_id = "dd_seed2";

  SimilarityReport report = group_gap({base, copy, ortho});
  CHECK(report.same_pairs == 1);
  CHECK(report.cross_pairs == 2);
  CHECK(report.same_mean == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(report.cross_mean == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(report.gap == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(report.partial);
  for (std::size_t i = 0; i < report.matrix.size(); ++i)
    CHECK(report.matrix[i][i] == 1.0);

  SimilarityReport partial = group_gap({base, ortho});
  CHECK(partial.partial);
  CHECK(partial.same_pairs == 0);
}

TEST_CASE("synthetic shared-subspace adapters show a positive gap") {
  SplitMix64 rng(2024);
  // Same-heuristic adapters share their B factor and differ by noise in A.
  auto make_pair = [&](const std::string& h, std::uint64_t seed) {
    SplitMix64 local(seed);
    LowRankUpdate shared = random_adapter(h + "_base", h, local);
    LowRankUpdate rerun = shared;
    rerun.adapter_id = h + "_rerun";
    rerun.rerun_seed = seed + 1;
    for (auto& m : rerun.modules)
      for (auto& v : m.a) v += static_cast<float>((rng.next_unit() - 0.5) * 0.2);
    return std::pair{shared, rerun};
  };
  auto [dd1, dd2] = make_pair("DD", 100);
  auto [rc1, rc2] = make_pair("RC", 200);
  SimilarityReport report = group_gap({dd1, dd2, rc1, rc2});
  CHECK(report.gap > 0.0);
  CHECK(report.same_pairs == 2);
  CHECK(report.cross_pairs == 4);
}

TEST_CASE("adapter directory round-trip") {
  SplitMix64 rng(55);
  LowRankUpdate u = random_adapter("disk_test", "OT", rng);
  u.rerun_seed = 9;
  auto dir = std::filesystem::temp_directory_path() / "mulbench_adapter_test";
  std::filesystem::remove_all(dir);
  save_adapter_dir(u, dir.string());
  LowRankUpdate back = load_adapter_dir(dir.string());
  CHECK(back.adapter_id == u.adapter_id);
  CHECK(back.heuristic == u.heuristic);
  CHECK(back.rerun_seed == 9);
  REQUIRE(back.modules.size() == u.modules.size());
  CHECK(cosine_similarity_streamed(u, back) == doctest::Approx(1.0).epsilon(1e-12));
  // Dimension mismatch is named per module.
  LowRankUpdate broken = u;
  broken.modules[0].a.pop_back();
  CHECK_THROWS_WITH_AS(effective_update(broken),
                       doctest::Contains("layers.0.attn.q"), std::invalid_argument);
  std::filesystem::remove_all(dir);
}
