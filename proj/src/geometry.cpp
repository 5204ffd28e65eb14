#include "mulbench/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace mulbench {

using nlohmann::json;

namespace {

// Kahan-compensated accumulator; fixed iteration order makes reductions
// reproducible run to run.
struct Accumulator {
  double sum = 0, c = 0;
  void add(double v) {
    double y = v - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

void LowRankUpdate::validate() const {
  std::string prev;
  for (const auto& m : modules) {
    if (m.a.size() != m.r * m.k)
      throw std::invalid_argument("adapter " + adapter_id + " module " + m.name +
                                  ": A has wrong element count");
    if (m.b.size() != m.d * m.r)
      throw std::invalid_argument("adapter " + adapter_id + " module " + m.name +
                                  ": B has wrong element count");
    if (m.r == 0 || m.d == 0 || m.k == 0)
      throw std::invalid_argument("adapter " + adapter_id + " module " + m.name +
                                  ": zero dimension");
    if (!prev.empty() && !(prev < m.name))
      throw std::invalid_argument("adapter " + adapter_id +
                                  ": module names must be strictly increasing");
    prev = m.name;
  }
}

namespace {

std::vector<float> read_f32_file(const std::filesystem::path& path, std::size_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("adapter: cannot open " + path.string());
  in.seekg(0, std::ios::end);
  std::size_t bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != expected * sizeof(float))
    throw std::runtime_error("adapter: " + path.string() + " holds " + std::to_string(bytes) +
                             " bytes, expected " + std::to_string(expected * sizeof(float)));
  in.seekg(0);
  std::vector<float> data(expected);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
  static_assert(std::endian::native == std::endian::little,
                "adapter files are little-endian float32");
  return data;
}

}  // namespace

LowRankUpdate load_adapter_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::path manifest_path = fs::path(dir) / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("adapter: cannot open " + manifest_path.string());
  json manifest = json::parse(in);
  LowRankUpdate update;
  update.adapter_id = manifest.at("adapter_id").get<std::string>();
  update.heuristic = manifest.at("heuristic").get<std::string>();
  update.rerun_seed = manifest.value("rerun_seed", 0ull);
  for (const auto& jm : manifest.at("modules")) {
    LowRankModule m;
    m.name = jm.at("name").get<std::string>();
    m.d = jm.at("d").get<std::size_t>();
    m.r = jm.at("r").get<std::size_t>();
    m.k = jm.at("k").get<std::size_t>();
    m.a = read_f32_file(fs::path(dir) / jm.at("a_file").get<std::string>(), m.r * m.k);
    m.b = read_f32_file(fs::path(dir) / jm.at("b_file").get<std::string>(), m.d * m.r);
    update.modules.push_back(std::move(m));
  }
  std::sort(update.modules.begin(), update.modules.end(),
            [](const LowRankModule& x, const LowRankModule& y) { return x.name < y.name; });
  update.validate();
  return update;
}

void save_adapter_dir(const LowRankUpdate& update, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  json modules = json::array();
  for (const auto& m : update.modules) {
    std::string a_file = m.name + ".a.bin";
    std::string b_file = m.name + ".b.bin";
    for (auto [file, data] : {std::pair{a_file, &m.a}, std::pair{b_file, &m.b}}) {
      std::ofstream out(fs::path(dir) / file, std::ios::binary | std::ios::trunc);
      out.write(reinterpret_cast<const char*>(data->data()),
                static_cast<std::streamsize>(data->size() * sizeof(float)));
    }
    modules.push_back({{"name", m.name},
                       {"d", m.d},
                       {"r", m.r},
                       {"k", m.k},
                       {"a_file", a_file},
                       {"b_file", b_file}});
  }
  json manifest;
  manifest["adapter_id"] = update.adapter_id;
  manifest["heuristic"] = update.heuristic;
  manifest["rerun_seed"] = update.rerun_seed;
  manifest["modules"] = modules;
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::trunc);
  out << manifest.dump(2) << "\n";
}

std::vector<double> effective_update(const LowRankUpdate& update) {
  update.validate();
  std::vector<double> flat;
  for (const auto& m : update.modules) {
    for (std::size_t i = 0; i < m.d; ++i) {
      for (std::size_t j = 0; j < m.k; ++j) {
        Accumulator acc;
        for (std::size_t t = 0; t < m.r; ++t)
          acc.add(static_cast<double>(m.b[i * m.r + t]) * static_cast<double>(m.a[t * m.k + j]));
        flat.push_back(acc.sum);
      }
    }
  }
  return flat;
}

double cosine_similarity(const std::vector<double>& v1, const std::vector<double>& v2) {
  if (v1.size() != v2.size())
    throw std::invalid_argument("cosine_similarity: vectors have different lengths");
  Accumulator dot, n1, n2;
  for (std::size_t i = 0; i < v1.size(); ++i) {
    dot.add(v1[i] * v2[i]);
    n1.add(v1[i] * v1[i]);
    n2.add(v2[i] * v2[i]);
  }
  if (n1.sum <= 0 || n2.sum <= 0)
    throw std::invalid_argument("cosine_similarity: zero vector has no direction");
  double value = dot.sum / (std::sqrt(n1.sum) * std::sqrt(n2.sum));
  return std::clamp(value, -1.0, 1.0);
}

namespace {

// dot(B1 A1, B2 A2) accumulated as sum over (t1, t2) of
// (B1^T B2)[t1, t2] * (A1 A2^T)[t1, t2]; never materializes d x k.
double streamed_module_dot(const LowRankModule& m1, const LowRankModule& m2,
                           Accumulator& total) {
  for (std::size_t t1 = 0; t1 < m1.r; ++t1) {
    for (std::size_t t2 = 0; t2 < m2.r; ++t2) {
      Accumulator bb, aa;
      for (std::size_t i = 0; i < m1.d; ++i)
        bb.add(static_cast<double>(m1.b[i * m1.r + t1]) *
               static_cast<double>(m2.b[i * m2.r + t2]));
      for (std::size_t j = 0; j < m1.k; ++j)
        aa.add(static_cast<double>(m1.a[t1 * m1.k + j]) *
               static_cast<double>(m2.a[t2 * m2.k + j]));
      total.add(bb.sum * aa.sum);
    }
  }
  return total.sum;
}

}  // namespace

double cosine_similarity_streamed(const LowRankUpdate& u1, const LowRankUpdate& u2) {
  u1.validate();
  u2.validate();
  if (u1.modules.size() != u2.modules.size())
    throw std::invalid_argument("cosine: adapters expose different module sets");
  Accumulator dot, n1, n2;
  for (std::size_t m = 0; m < u1.modules.size(); ++m) {
    const auto& m1 = u1.modules[m];
    const auto& m2 = u2.modules[m];
    if (m1.name != m2.name)
      throw std::invalid_argument("cosine: module name mismatch: " + m1.name + " vs " + m2.name);
    if (m1.d != m2.d || m1.k != m2.k)
      throw std::invalid_argument("cosine: module " + m1.name + " has mismatched shape");
    streamed_module_dot(m1, m2, dot);
    streamed_module_dot(m1, m1, n1);
    streamed_module_dot(m2, m2, n2);
  }
  if (n1.sum <= 0 || n2.sum <= 0)
    throw std::invalid_argument("cosine: zero update has no direction");
  double value = dot.sum / (std::sqrt(n1.sum) * std::sqrt(n2.sum));
  return std::clamp(value, -1.0, 1.0);
}

SimilarityReport group_gap(const std::vector<LowRankUpdate>& adapters) {
  if (adapters.size() < 2)
    throw std::invalid_argument("group_gap: need at least two adapters");
  SimilarityReport report;
  std::size_t n = adapters.size();
  report.matrix.assign(n, std::vector<double>(n, 1.0));
  for (const auto& a : adapters) {
    report.adapter_ids.push_back(a.adapter_id);
    report.heuristics.push_back(a.heuristic);
  }
  Accumulator same_sum, cross_sum;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sim = cosine_similarity_streamed(adapters[i], adapters[j]);
      report.matrix[i][j] = sim;
      report.matrix[j][i] = sim;
      if (adapters[i].heuristic == adapters[j].heuristic) {
        same_sum.add(sim);
        ++report.same_pairs;
      } else {
        cross_sum.add(sim);
        ++report.cross_pairs;
      }
    }
  }
  report.same_mean = report.same_pairs ? same_sum.sum / static_cast<double>(report.same_pairs)
                                       : 0.0;
  report.cross_mean =
      report.cross_pairs ? cross_sum.sum / static_cast<double>(report.cross_pairs) : 0.0;
  report.gap = report.same_mean - report.cross_mean;
  report.partial = report.same_pairs == 0;
  return report;
}

}  // namespace mulbench
