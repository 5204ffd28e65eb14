#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mulbench/audio.hpp"
#include "mulbench/backend.hpp"
#include "mulbench/dataset.hpp"
#include "mulbench/geometry.hpp"
#include "mulbench/probe.hpp"
#include "mulbench/render.hpp"
#include "mulbench/stats.hpp"

namespace mulbench {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes 2/4; CapabilityError (exit 3) lives with the backend.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PartialFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SizesConfig {
  std::size_t multimodal = 200;
  std::size_t hds = 90;
  std::size_t traps = 12;
  std::size_t perturbations = 10;
  std::size_t traces_per_heuristic = 50;
};

struct BackendConfig {
  std::string kind = "mock";  // mock | http | replay
  MockSpec mock;
  std::string endpoint;
  std::string api_key;
  std::string model = "default";
  std::string replay_path;  // archive file; replay source or recording sink
  bool record = false;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  bool extended_templates = false;
  SizesConfig sizes;
  std::vector<std::string> templates = DigitTemplate::core_family();
  CostParams cost;
  std::string bank_profile = "balanced";
  StyleConfig style;
  std::vector<Representation> representations = {
      Representation::NumeralText, Representation::WordText, Representation::NumeralImage,
      Representation::WordImage};
  std::vector<Representation> probe_representations = {Representation::NumeralText,
                                                       Representation::NumeralImage};
  BackendConfig backend;
  int parallelism = 1;
  RetryPolicy retry;
  std::size_t generation_budget = 2048;
  double partial_failure_threshold = 0.05;
  bool perception_check = true;
  std::string audio_clips_dir;
  std::string config_hash;  // sha256 of the raw config text

  // Parses and validates; "${VAR}" in backend.endpoint / backend.api_key is
  // interpolated from the environment (credentials only). Errors carry the
  // offending field path.
  static RunConfig from_json_text(const std::string& text);
  static RunConfig load_file(const std::string& path);
  std::string to_json() const;

  TemplateBank bank() const;
  TemplateBank other_bank() const;  // the opposite profile, for the ablation
};

std::unique_ptr<Backend> make_backend(const RunConfig& config,
                                      std::shared_ptr<ReplayCache>* cache_out = nullptr);

// ---- pipeline stages ----

struct GenOutputs {
  std::vector<MultimodalItem> multimodal;
  std::vector<HdsItem> hds;
  std::vector<TrapItem> traps;
  std::vector<PerturbationPair> perturbations;
  std::map<std::string, std::size_t> trace_counts;  // per heuristic
  std::string manifest_path;
};
GenOutputs cmd_gen(const RunConfig& config);

struct RenderOutputs {
  std::size_t files_written = 0;
  std::size_t audio_skipped = 0;
  std::string index_path;
};
RenderOutputs cmd_render(const RunConfig& config);

struct EvalOutputs {
  std::vector<AccuracyRecord> records;
  std::map<std::string, LogisticFit> fits;          // per representation
  std::map<std::string, double> perception_accuracy;  // per representation
  std::size_t failures = 0;
  std::string records_path;
};
EvalOutputs cmd_eval(const RunConfig& config);

struct ProbeOutputs {
  std::vector<ProbeResult> results;
  std::vector<ProbeAggregate> aggregates;
  std::string results_path;
  std::string aggregate_csv_path;
};
ProbeOutputs cmd_probe(const RunConfig& config);

struct ContrastOutputs {
  std::vector<ContrastiveResult> results;
  std::vector<ContrastiveAggregateRow> aggregates;
  std::string aggregate_csv_path;
};
ContrastOutputs cmd_contrast(const RunConfig& config);

struct AblateOutputs {
  AblationReport report;
  std::string csv_path;
};
AblateOutputs cmd_ablate(const RunConfig& config);

// Refits statistics from an existing accuracy-record file.
EvalOutputs cmd_stats(const RunConfig& config, const std::string& records_path);

struct GeometryOutputs {
  SimilarityReport report;
  std::string csv_path;
};
GeometryOutputs cmd_geometry(const std::vector<std::string>& adapter_dirs,
                             const std::string& output_dir, const std::string& config_hash);

struct VerifyOutcome {
  bool ok = true;
  std::vector<std::string> problems;
};
VerifyOutcome cmd_verify(const std::string& output_dir);

std::string cmd_report(const RunConfig& config);

// ---- shared helpers (exposed for tests) ----

void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);
std::string sha256_file(const std::string& path);
std::string fmt4(double v);

// Context construction shared by eval/probe/contrast: text representations
// put the prompt in text; image/audio carry the rendered payload plus a
// fixed instruction line.
ScoringContext make_context(const Problem& problem, Representation rep,
                            const StyleConfig& style, const ClipLibrary* clips);

}  // namespace mulbench
