#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mulbench {

// One adapter: per-module low-rank factor pairs whose product B*A is the
// effective weight update.
struct LowRankModule {
  std::string name;
  std::size_t d = 0, r = 0, k = 0;
  std::vector<float> a;  // r x k, row-major
  std::vector<float> b;  // d x r, row-major
};

struct LowRankUpdate {
  std::string adapter_id;
  std::string heuristic;  // tag, e.g. OT/DD/RC/STYLE
  std::uint64_t rerun_seed = 0;
  std::vector<LowRankModule> modules;  // kept sorted by module name

  void validate() const;  // dimension agreement, sorted unique module names
};

// Directory format: manifest.json plus one raw little-endian float32
// row-major .bin file per matrix:
//   { "adapter_id": ..., "heuristic": ..., "rerun_seed": ...,
//     "modules": [ { "name": ..., "d": ..., "r": ..., "k": ...,
//                    "a_file": ..., "b_file": ... }, ... ] }
LowRankUpdate load_adapter_dir(const std::string& dir);
void save_adapter_dir(const LowRankUpdate& update, const std::string& dir);

// Per-module products B*A flattened row-major and concatenated in
// lexicographic module-name order.
std::vector<double> effective_update(const LowRankUpdate& update);

double cosine_similarity(const std::vector<double>& v1, const std::vector<double>& v2);

// Same value as cosine_similarity(effective_update(u1), effective_update(u2))
// but computed from the factors without materializing any d x k product:
// dot(B1 A1, B2 A2) = sum((B1^T B2) .* (A1 A2^T)). Compensated accumulation
// keeps the reduction order-invariant.
double cosine_similarity_streamed(const LowRankUpdate& u1, const LowRankUpdate& u2);

struct SimilarityReport {
  std::vector<std::string> adapter_ids;
  std::vector<std::string> heuristics;
  std::vector<std::vector<double>> matrix;  // symmetric, unit diagonal
  double same_mean = 0;
  double cross_mean = 0;
  double gap = 0;  // same - cross
  std::size_t same_pairs = 0;
  std::size_t cross_pairs = 0;
  bool partial = false;  // no same-heuristic pair available
};

SimilarityReport group_gap(const std::vector<LowRankUpdate>& adapters);

}  // namespace mulbench
