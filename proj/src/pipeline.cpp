#include "mulbench/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mulbench/sha256.hpp"
#include "mulbench/trace.hpp"

namespace mulbench {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kSystemPreamble =
    "You are a careful arithmetic assistant. Reply with the exact product.";
constexpr const char* kImageInstruction =
    "Answer the multiplication problem shown in the image with the exact product.";
constexpr const char* kAudioInstruction =
    "Answer the multiplication problem spoken in the audio with the exact product.";
constexpr const char* kPerceptionInstruction =
    "Transcribe the two numbers in this problem exactly, separated by a space.";

[[noreturn]] void fail_field(const std::string& path, const std::string& why) {
  throw ValidationError("config field " + path + ": " + why);
}

std::string interpolate_env(const std::string& value) {
  if (value.rfind("${", 0) == 0 && value.back() == '}') {
    const char* env = std::getenv(value.substr(2, value.size() - 3).c_str());
    return env ? env : "";
  }
  return value;
}

}  // namespace

// ---- file helpers ----

void write_file_atomic(const std::string& path, const std::string& content) {
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string sha256_file(const std::string& path) { return Sha256::hash_hex(read_file(path)); }

std::string fmt4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// ---- config ----

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  c.config_hash = Sha256::hash_hex(text);
  c.seed = j.value("seed", c.seed);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.extended_templates = j.value("extended_templates", c.extended_templates);
  if (j.contains("sizes")) {
    const json& s = j["sizes"];
    c.sizes.multimodal = s.value("multimodal", c.sizes.multimodal);
    c.sizes.hds = s.value("hds", c.sizes.hds);
    c.sizes.traps = s.value("traps", c.sizes.traps);
    c.sizes.perturbations = s.value("perturbations", c.sizes.perturbations);
    c.sizes.traces_per_heuristic = s.value("traces_per_heuristic", c.sizes.traces_per_heuristic);
  }
  if (c.sizes.multimodal < 1) fail_field("sizes.multimodal", "must be at least 1");
  if (c.sizes.hds < 3) fail_field("sizes.hds", "must be at least 3");
  if (c.sizes.traps < 1) fail_field("sizes.traps", "must be at least 1");
  if (j.contains("templates")) {
    c.templates.clear();
    for (const auto& t : j["templates"]) c.templates.push_back(t.get<std::string>());
    if (c.templates.empty()) fail_field("templates", "must not be empty");
  }
  for (const auto& t : c.templates) {
    try {
      DigitTemplate::parse(t, c.extended_templates);
    } catch (const std::exception& e) {
      fail_field("templates", e.what());
    }
  }
  if (j.contains("cost_params")) {
    const json& p = j["cost_params"];
    c.cost.lambda_mul = p.value("lambda_mul", c.cost.lambda_mul);
    c.cost.lambda_carry = p.value("lambda_carry", c.cost.lambda_carry);
    c.cost.lambda_add = p.value("lambda_add", c.cost.lambda_add);
    c.cost.lambda_base = p.value("lambda_base", c.cost.lambda_base);
    c.cost.lambda_off = p.value("lambda_off", c.cost.lambda_off);
    c.cost.margin_min = p.value("margin_min", c.cost.margin_min);
    if (p.contains("base_set"))
      c.cost.base_set = p["base_set"].get<std::vector<std::uint64_t>>();
    if (c.cost.base_set.empty()) fail_field("cost_params.base_set", "must not be empty");
    if (!(c.cost.margin_min > 0)) fail_field("cost_params.margin_min", "must be positive");
  }
  c.bank_profile = j.value("bank_profile", c.bank_profile);
  if (c.bank_profile != "balanced" && c.bank_profile != "style_mismatch")
    fail_field("bank_profile", "must be balanced or style_mismatch");
  if (j.contains("style")) {
    const json& s = j["style"];
    c.style.scale = s.value("scale", c.style.scale);
    c.style.padding = s.value("padding", c.style.padding);
    c.style.canvas_width = s.value("canvas_width", c.style.canvas_width);
    c.style.canvas_height = s.value("canvas_height", c.style.canvas_height);
    c.style.background = s.value("background", c.style.background);
    c.style.foreground = s.value("foreground", c.style.foreground);
    std::string format = s.value("format", std::string("svg"));
    if (format == "svg") {
      c.style.format = ImageFormat::Svg;
    } else if (format == "png") {
      c.style.format = ImageFormat::Png;
    } else {
      fail_field("style.format", "must be svg or png");
    }
    if (c.style.scale < 1) fail_field("style.scale", "must be at least 1");
  }
  auto parse_reps = [&](const char* key, std::vector<Representation>& out) {
    if (!j.contains(key)) return;
    out.clear();
    for (const auto& r : j[key]) {
      auto rep = representation_from_name(r.get<std::string>());
      if (!rep) fail_field(key, "unknown representation '" + r.get<std::string>() + "'");
      out.push_back(*rep);
    }
    if (out.empty()) fail_field(key, "must not be empty");
  };
  parse_reps("representations", c.representations);
  parse_reps("probe_representations", c.probe_representations);
  if (j.contains("backend")) {
    const json& b = j["backend"];
    c.backend.kind = b.value("kind", c.backend.kind);
    if (c.backend.kind != "mock" && c.backend.kind != "http" && c.backend.kind != "replay")
      fail_field("backend.kind", "must be mock, http, or replay");
    if (b.contains("mock")) c.backend.mock = MockSpec::parse_json(b["mock"].dump());
    c.backend.endpoint = interpolate_env(b.value("endpoint", std::string{}));
    c.backend.api_key = interpolate_env(b.value("api_key", std::string{}));
    c.backend.model = b.value("model", c.backend.model);
    c.backend.replay_path = b.value("replay", std::string{});
    c.backend.record = b.value("record", false);
    if (c.backend.kind == "http" && c.backend.endpoint.empty())
      fail_field("backend.endpoint", "required for the http backend");
    if (c.backend.kind == "replay" && c.backend.replay_path.empty())
      fail_field("backend.replay", "required for the replay backend");
  } else {
    c.backend.mock.kind = "generative";
  }
  c.parallelism = j.value("parallelism", c.parallelism);
  if (c.parallelism < 1) fail_field("parallelism", "must be at least 1");
  if (j.contains("retry")) {
    c.retry.max_attempts = j["retry"].value("max_attempts", c.retry.max_attempts);
    c.retry.base_delay_ms = j["retry"].value("base_delay_ms", c.retry.base_delay_ms);
    if (c.retry.max_attempts < 1) fail_field("retry.max_attempts", "must be at least 1");
  }
  c.generation_budget = j.value("generation_budget", c.generation_budget);
  if (c.generation_budget < 1) fail_field("generation_budget", "must be at least 1");
  c.partial_failure_threshold =
      j.value("partial_failure_threshold", c.partial_failure_threshold);
  c.perception_check = j.value("perception_check", c.perception_check);
  c.audio_clips_dir = j.value("audio_clips_dir", c.audio_clips_dir);
  return c;
}

RunConfig RunConfig::load_file(const std::string& path) {
  return from_json_text(read_file(path));
}

std::string RunConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["extended_templates"] = extended_templates;
  j["sizes"] = {{"multimodal", sizes.multimodal},
                {"hds", sizes.hds},
                {"traps", sizes.traps},
                {"perturbations", sizes.perturbations},
                {"traces_per_heuristic", sizes.traces_per_heuristic}};
  j["templates"] = templates;
  j["cost_params"] = {{"lambda_mul", cost.lambda_mul},
                      {"lambda_carry", cost.lambda_carry},
                      {"lambda_add", cost.lambda_add},
                      {"lambda_base", cost.lambda_base},
                      {"lambda_off", cost.lambda_off},
                      {"margin_min", cost.margin_min},
                      {"base_set", cost.base_set}};
  j["bank_profile"] = bank_profile;
  json reps = json::array();
  for (auto r : representations) reps.push_back(representation_name(r));
  j["representations"] = reps;
  json preps = json::array();
  for (auto r : probe_representations) preps.push_back(representation_name(r));
  j["probe_representations"] = preps;
  j["parallelism"] = parallelism;
  j["generation_budget"] = generation_budget;
  j["partial_failure_threshold"] = partial_failure_threshold;
  return j.dump(2);
}

TemplateBank RunConfig::bank() const {
  return bank_profile == "balanced" ? balanced_bank() : style_mismatch_bank();
}

TemplateBank RunConfig::other_bank() const {
  return bank_profile == "balanced" ? style_mismatch_bank() : balanced_bank();
}

std::unique_ptr<Backend> make_backend(const RunConfig& config,
                                      std::shared_ptr<ReplayCache>* cache_out) {
  std::unique_ptr<Backend> inner;
  if (config.backend.kind == "mock") {
    inner = mock_backend(config.backend.mock);
  } else if (config.backend.kind == "http") {
    HttpBackendConfig http;
    http.endpoint = config.backend.endpoint;
    http.api_key = config.backend.api_key;
    http.model = config.backend.model;
    http.retry = config.retry;
    inner = http_backend(http);
  } else {
    auto cache = ReplayCache::load(config.backend.replay_path);
    if (cache_out) *cache_out = cache;
    return replay_backend(cache);
  }
  if (config.backend.record && !config.backend.replay_path.empty()) {
    auto cache = std::make_shared<ReplayCache>();
    if (fs::exists(config.backend.replay_path))
      cache = ReplayCache::load(config.backend.replay_path);
    if (cache_out) *cache_out = cache;
    return recording_backend(std::move(inner), cache);
  }
  return inner;
}

ScoringContext make_context(const Problem& problem, Representation rep,
                            const StyleConfig& style, const ClipLibrary* clips) {
  ScoringContext ctx;
  ctx.system = kSystemPreamble;
  if (is_text_representation(rep)) {
    ctx.prompt = render_prompt(problem, rep);
  } else if (is_image_representation(rep)) {
    ctx.prompt = kImageInstruction;
    ctx.image = render_image(problem, rep, style);
    ctx.image_media_type = style.format == ImageFormat::Svg ? "image/svg+xml" : "image/png";
  } else {
    if (!clips) throw ValidationError("audio representation requires audio_clips_dir");
    ctx.prompt = kAudioInstruction;
    ctx.audio = render_audio(problem, *clips);
    ctx.audio_media_type = "audio/wav";
  }
  return ctx;
}

// ---- headers and jsonl ----

namespace {

std::string header_line(const std::string& kind, const std::string& config_hash,
                        const std::string& manifest_hash) {
  json h;
  h["_header"] = {{"kind", kind},
                  {"config_hash", config_hash},
                  {"manifest_hash", manifest_hash},
                  {"version", kToolVersion}};
  return h.dump();
}

std::string csv_header_comment(const std::string& config_hash,
                               const std::string& manifest_hash) {
  return "# config_hash=" + config_hash + " manifest_hash=" + manifest_hash +
         " version=" + kToolVersion;
}

struct JsonlFile {
  json header;
  std::vector<std::string> lines;
};

JsonlFile read_jsonl(const std::string& path) {
  JsonlFile out;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      json j = json::parse(line);
      if (j.contains("_header")) {
        out.header = j["_header"];
        continue;
      }
    }
    out.lines.push_back(line);
  }
  return out;
}

std::string manifest_hash_of(const RunConfig& config) {
  fs::path path = fs::path(config.output_dir) / "manifest.json";
  if (!fs::exists(path)) return "";
  return sha256_file(path.string());
}

template <typename Fn>
void parallel_for(std::size_t n, int parallelism, Fn&& fn) {
  if (parallelism <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism), n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

// ---- gen ----

GenOutputs cmd_gen(const RunConfig& config) {
  GenOutputs out;
  const std::string H = config.config_hash;
  fs::create_directories(config.output_dir);
  auto path_of = [&](const std::string& name) {
    return (fs::path(config.output_dir) / name).string();
  };

  MultimodalOptions mopts;
  mopts.count = config.sizes.multimodal;
  mopts.seed = config.seed;
  mopts.templates = config.templates;
  mopts.extended_templates = config.extended_templates;
  mopts.representations = config.representations;
  out.multimodal = build_multimodal_suite(mopts);

  HdsOptions hopts;
  hopts.count = config.sizes.hds;
  hopts.seed = config.seed;
  hopts.margin_min = config.cost.margin_min;
  hopts.params = config.cost;
  out.hds = build_hds(hopts);

  out.traps = build_traps(config.sizes.traps, config.seed, out.hds, config.cost);
  out.perturbations =
      build_perturbation_pairs(config.seed, config.sizes.perturbations, config.cost);

  std::set<std::string> exclusions = exclusion_keys(out.hds, out.traps, out.multimodal);

  auto write_jsonl = [&](const std::string& name, const std::string& kind, auto&& records,
                         auto&& encode) {
    std::string body = header_line(kind, H, "");
    body += "\n";
    for (const auto& r : records) {
      body += encode(r);
      body += "\n";
    }
    write_file_atomic(path_of(name), body);
  };

  write_jsonl("multimodal.jsonl", "multimodal", out.multimodal, multimodal_item_to_json);
  write_jsonl("hds.jsonl", "hds", out.hds, hds_item_to_json);
  write_jsonl("traps.jsonl", "traps", out.traps, trap_item_to_json);
  write_jsonl("perturbations.jsonl", "perturbations", out.perturbations,
              perturbation_pair_to_json);
  write_file_atomic(path_of("exclusions.json"), exclusions_to_json(exclusions) + "\n");

  for (Heuristic h : {Heuristic::RC, Heuristic::DD, Heuristic::OT, Heuristic::STYLE}) {
    TraceDatasetOptions topts;
    topts.count = config.sizes.traces_per_heuristic;
    topts.seed = config.seed;
    topts.exclusions = exclusions;
    auto records = build_trace_dataset(h, topts);
    std::string name = std::string("traces_") + heuristic_name(h) + ".jsonl";
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    std::string body = header_line("traces", H, "");
    body += "\n";
    for (const auto& rec : records) {
      json j;
      j["prompt"] = rec.trace.lines.front();
      std::string completion;
      for (std::size_t i = 1; i < rec.trace.lines.size(); ++i) {
        if (i > 1) completion += "\n";
        completion += rec.trace.lines[i];
      }
      j["completion"] = completion;
      j["heuristic"] = heuristic_name(h);
      j["problem_id"] = rec.problem.id;
      j["split"] = rec.split;
      body += j.dump();
      body += "\n";
    }
    write_file_atomic(path_of(name), body);
    out.trace_counts[heuristic_name(h)] = records.size();
  }

  // Manifest with per-file content hashes; regenerate-and-compare is the
  // byte-identity check.
  json manifest;
  manifest["version"] = kToolVersion;
  manifest["config_hash"] = H;
  manifest["seed"] = config.seed;
  manifest["extended_templates"] = config.extended_templates;
  manifest["generator"] = "mulbench";
  manifest["trace_grammar"] = kTraceGrammarVersion;
  manifest["cost_params"] = json::parse(config.to_json())["cost_params"];
  manifest["banks"] = {{"balanced", balanced_bank().bank_hash()},
                       {"style_mismatch", style_mismatch_bank().bank_hash()}};
  manifest["audio"] = config.audio_clips_dir.empty() ? "absent" : "clips";
  json counts;
  {
    json hds_counts;
    std::map<std::string, std::size_t> by_family, by_split, by_target;
    for (const auto& item : out.hds) {
      by_family[item.family.name()]++;
      by_split[item.split]++;
      by_target[heuristic_name(item.target)]++;
    }
    hds_counts["total"] = out.hds.size();
    hds_counts["by_family"] = by_family;
    hds_counts["by_split"] = by_split;
    hds_counts["by_target"] = by_target;
    counts["hds"] = hds_counts;
    std::map<std::string, std::size_t> mm_split;
    for (const auto& item : out.multimodal) mm_split[item.split]++;
    json reps = json::array();
    for (auto r : config.representations) reps.push_back(representation_name(r));
    counts["multimodal"] = {{"total", out.multimodal.size()},
                            {"by_split", mm_split},
                            {"representations", reps}};
    std::map<std::string, std::size_t> trap_kinds;
    for (const auto& trap : out.traps) trap_kinds[trap.kind]++;
    counts["traps"] = {{"total", out.traps.size()}, {"by_kind", trap_kinds}};
    counts["perturbations"] = out.perturbations.size();
    counts["traces"] = out.trace_counts;
    counts["exclusions"] = exclusions.size();
  }
  manifest["counts"] = counts;
  json files;
  for (const char* name :
       {"multimodal.jsonl", "hds.jsonl", "traps.jsonl", "perturbations.jsonl",
        "exclusions.json", "traces_rc.jsonl", "traces_dd.jsonl", "traces_ot.jsonl",
        "traces_style.jsonl"}) {
    files[name] = {{"sha256", sha256_file(path_of(name))}};
  }
  manifest["files"] = files;
  out.manifest_path = path_of("manifest.json");
  write_file_atomic(out.manifest_path, manifest.dump(2) + "\n");
  return out;
}

// ---- render ----

RenderOutputs cmd_render(const RunConfig& config) {
  RenderOutputs out;
  const std::string H = config.config_hash;
  const std::string M = manifest_hash_of(config);
  JsonlFile dataset = read_jsonl((fs::path(config.output_dir) / "multimodal.jsonl").string());
  std::optional<ClipLibrary> clips;
  if (!config.audio_clips_dir.empty()) clips = ClipLibrary::load(config.audio_clips_dir);

  std::string index = header_line("renders", H, M) + "\n";
  for (const auto& line : dataset.lines) {
    MultimodalItem item = multimodal_item_from_json(line);
    for (Representation rep : item.representations) {
      std::string payload, media, ext;
      if (is_text_representation(rep)) {
        payload = render_prompt(item.problem, rep);
        media = "text/plain";
        ext = "txt";
      } else if (is_image_representation(rep)) {
        payload = render_image(item.problem, rep, config.style);
        media = config.style.format == ImageFormat::Svg ? "image/svg+xml" : "image/png";
        ext = config.style.format == ImageFormat::Svg ? "svg" : "png";
      } else {
        if (!clips) {
          ++out.audio_skipped;
          continue;
        }
        payload = render_audio(item.problem, *clips);
        media = "audio/wav";
        ext = "wav";
      }
      fs::path rel = fs::path("renders") / item.id /
                     (std::string(representation_name(rep)) + "." + ext);
      write_file_atomic((fs::path(config.output_dir) / rel).string(), payload);
      ++out.files_written;
      json j;
      j["problem_id"] = item.id;
      j["representation"] = representation_name(rep);
      j["path"] = rel.generic_string();
      j["media_type"] = media;
      j["sha256"] = Sha256::hash_hex(payload);
      // Provenance: the exact operands every payload renders.
      j["a"] = item.problem.a.to_string();
      j["b"] = item.problem.b.to_string();
      index += j.dump();
      index += "\n";
    }
  }
  out.index_path = (fs::path(config.output_dir) / "renders_index.jsonl").string();
  write_file_atomic(out.index_path, index);
  return out;
}

// ---- eval ----

namespace {

struct EvalJob {
  const MultimodalItem* item;
  Representation rep;
};

}  // namespace

EvalOutputs cmd_eval(const RunConfig& config) {
  EvalOutputs out;
  const std::string H = config.config_hash;
  const std::string M = manifest_hash_of(config);
  JsonlFile dataset = read_jsonl((fs::path(config.output_dir) / "multimodal.jsonl").string());
  std::vector<MultimodalItem> items;
  for (const auto& line : dataset.lines) items.push_back(multimodal_item_from_json(line));

  std::optional<ClipLibrary> clips;
  if (!config.audio_clips_dir.empty()) clips = ClipLibrary::load(config.audio_clips_dir);

  std::shared_ptr<ReplayCache> cache;
  auto backend = make_backend(config, &cache);

  std::vector<EvalJob> jobs;
  for (const auto& item : items) {
    for (Representation rep : item.representations) {
      if (rep == Representation::Audio && !clips) continue;
      jobs.push_back({&item, rep});
    }
  }
  // Contexts are registered up front so answer-simulating mocks can resolve
  // image and audio payloads too. The perception context shares the payload
  // but swaps the instruction for a transcription request.
  std::vector<ScoringContext> contexts(jobs.size());
  std::vector<ScoringContext> perception_contexts(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    contexts[i] = make_context(jobs[i].item->problem, jobs[i].rep, config.style,
                               clips ? &*clips : nullptr);
    backend->register_context(contexts[i], jobs[i].item->problem);
    if (config.perception_check) {
      ScoringContext p = contexts[i];
      if (is_text_representation(jobs[i].rep)) {
        p.prompt = std::string(kPerceptionInstruction) + "\n" + p.prompt;
      } else {
        p.prompt = kPerceptionInstruction;
      }
      backend->register_context(p, jobs[i].item->problem);
      perception_contexts[i] = std::move(p);
    }
  }

  std::vector<AccuracyRecord> records(jobs.size());
  std::vector<int> perception(jobs.size(), -1);  // -1 unknown, else 0/1
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), config.parallelism, [&](std::size_t i) {
    const EvalJob& job = jobs[i];
    AccuracyRecord rec;
    rec.problem_id = job.item->id;
    rec.representation = representation_name(job.rep);
    rec.load_C = static_cast<double>(job.item->metrics.load_C);
    try {
      GenerationResult gen = backend->generate(contexts[i], config.generation_budget);
      rec.extracted_answer = extract_answer(gen.text, job.item->problem.product.digit_count());
      rec.correct = rec.extracted_answer && *rec.extracted_answer == job.item->problem.product;
      if (config.perception_check) {
        GenerationResult seen =
            backend->generate(perception_contexts[i], config.generation_budget);
        std::vector<BigNat> ints = extract_integers(seen.text);
        perception[i] = ints.size() >= 2 && ints[0] == job.item->problem.a.value() &&
                                ints[1] == job.item->problem.b.value()
                            ? 1
                            : 0;
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
    records[i] = std::move(rec);
  });

  for (const auto& e : errors)
    if (!e.empty()) ++out.failures;

  std::string body = header_line("eval_records", H, M) + "\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!errors[i].empty()) continue;
    const auto& rec = records[i];
    json j;
    j["problem_id"] = rec.problem_id;
    j["representation"] = rec.representation;
    j["load_C"] = rec.load_C;
    j["correct"] = rec.correct;
    if (rec.extracted_answer)
      j["extracted"] = rec.extracted_answer->to_string();
    else
      j["extracted"] = nullptr;
    if (perception[i] >= 0)
      j["perception_correct"] = perception[i] == 1;
    else
      j["perception_correct"] = nullptr;
    body += j.dump();
    body += "\n";
    out.records.push_back(rec);
  }
  out.records_path = (fs::path(config.output_dir) / "eval_records.jsonl").string();
  write_file_atomic(out.records_path, body);

  // Fits, error-rate models, and plot data per representation.
  std::map<std::string, std::vector<BinaryObs>> by_rep;
  std::map<std::string, std::vector<OpsObs>> ops_c, ops_carry;
  std::map<std::string, std::pair<std::size_t, std::size_t>> perception_by_rep;
  std::map<std::string, std::size_t> metrics_by_id;
  for (std::size_t i = 0; i < items.size(); ++i) metrics_by_id[items[i].id] = i;
  for (const auto& rec : out.records) {
    by_rep[rec.representation].push_back({rec.load_C, rec.correct});
    const LoadMetrics& m = items[metrics_by_id.at(rec.problem_id)].metrics;
    ops_c[rec.representation].push_back({static_cast<double>(m.load_C), rec.correct});
    ops_carry[rec.representation].push_back(
        {static_cast<double>(m.ot_ops + m.carry_count), rec.correct});
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (perception[i] < 0 || !errors[i].empty()) continue;
    auto& [good, total] = perception_by_rep[representation_name(jobs[i].rep)];
    if (perception[i] == 1) ++good;
    ++total;
  }
  for (const auto& [rep, counts] : perception_by_rep)
    out.perception_accuracy[rep] =
        static_cast<double>(counts.first) / static_cast<double>(counts.second);

  std::string fits_csv = csv_header_comment(H, M) + "\n";
  fits_csv +=
      "representation,n,accuracy,accuracy_se,perception_accuracy,intercept,slope,c50,"
      "r2_corr,r2_mcfadden,converged,separated\n";
  json fits_json;
  for (const auto& [rep, data] : by_rep) {
    double accuracy = 0;
    for (const auto& obs : data) accuracy += obs.y ? 1 : 0;
    accuracy /= static_cast<double>(data.size());
    LogisticFit fit;
    try {
      fit = fit_logistic(data);
    } catch (const std::invalid_argument&) {
      fit.n = data.size();
      fit.separated = true;
    }
    out.fits[rep] = fit;
    std::string perception_cell;
    if (auto it = out.perception_accuracy.find(rep); it != out.perception_accuracy.end())
      perception_cell = fmt4(it->second);
    fits_csv += rep + "," + std::to_string(data.size()) + "," + fmt4(accuracy) + "," +
                fmt4(binomial_se(accuracy, data.size())) + "," + perception_cell + "," +
                fmt4(fit.beta0) + "," +
                fmt4(fit.beta1) + "," + (fit.c50 ? fmt4(*fit.c50) : std::string("")) + "," +
                fmt4(fit.r2_corr) + "," + fmt4(fit.r2_mcfadden) + "," +
                (fit.converged ? "true" : "false") + "," + (fit.separated ? "true" : "false") +
                "\n";
    fits_json[rep] = {{"n", data.size()},
                      {"accuracy", accuracy},
                      {"perception_accuracy",
                       out.perception_accuracy.count(rep)
                           ? json(out.perception_accuracy.at(rep))
                           : json(nullptr)},
                      {"intercept", fit.beta0},
                      {"slope", fit.beta1},
                      {"c50", fit.c50 ? json(*fit.c50) : json(nullptr)},
                      {"r2_corr", fit.r2_corr},
                      {"r2_mcfadden", fit.r2_mcfadden},
                      {"converged", fit.converged},
                      {"separated", fit.separated}};
  }
  write_file_atomic((fs::path(config.output_dir) / "eval_fits.csv").string(), fits_csv);
  write_file_atomic((fs::path(config.output_dir) / "eval_fits.json").string(),
                    fits_json.dump(2) + "\n");

  std::string er_csv = csv_header_comment(H, M) + "\n";
  er_csv += "representation,proxy,p,buckets,excluded\n";
  for (const auto& [rep, data] : ops_c) {
    ErrorRateFit c_fit = fit_error_rate(data, "C");
    ErrorRateFit carry_fit = fit_error_rate(ops_carry[rep], "carry_aware");
    for (const ErrorRateFit* fit : {&c_fit, &carry_fit}) {
      er_csv += rep + "," + fit->ops_proxy + "," + fmt4(fit->p) + "," +
                std::to_string(fit->n_buckets) + "," + std::to_string(fit->n_excluded) + "\n";
    }
  }
  write_file_atomic((fs::path(config.output_dir) / "error_rate.csv").string(), er_csv);

  std::string plot_csv = csv_header_comment(H, M) + "\n";
  plot_csv += "representation,load,predicted,empirical_mean,empirical_se,empirical_n\n";
  for (const auto& [rep, data] : by_rep) {
    std::map<double, std::pair<std::size_t, std::size_t>> buckets;
    for (const auto& obs : data) {
      auto& [correct, total] = buckets[obs.x];
      if (obs.y) ++correct;
      ++total;
    }
    const LogisticFit& fit = out.fits[rep];
    for (const auto& [load, counts] : buckets) {
      double mean = static_cast<double>(counts.first) / static_cast<double>(counts.second);
      double predicted = fit.converged ? predict_probability(fit, load) : mean;
      plot_csv += rep + "," + fmt4(load) + "," + fmt4(predicted) + "," + fmt4(mean) + "," +
                  fmt4(binomial_se(mean, counts.second)) + "," +
                  std::to_string(counts.second) + "\n";
    }
  }
  write_file_atomic((fs::path(config.output_dir) / "plot_data.csv").string(), plot_csv);

  if (cache && config.backend.record && !config.backend.replay_path.empty())
    cache->save(config.backend.replay_path);

  double failure_rate =
      jobs.empty() ? 0.0 : static_cast<double>(out.failures) / static_cast<double>(jobs.size());
  if (failure_rate > config.partial_failure_threshold)
    throw PartialFailureError("eval: " + std::to_string(out.failures) + " of " +
                              std::to_string(jobs.size()) +
                              " items failed, above the configured threshold");
  return out;
}

// ---- probe ----

namespace {

std::vector<HdsItem> load_hds_split(const RunConfig& config, const std::string& split) {
  JsonlFile file = read_jsonl((fs::path(config.output_dir) / "hds.jsonl").string());
  std::vector<HdsItem> items;
  for (const auto& line : file.lines) {
    HdsItem item = hds_item_from_json(line);
    if (split.empty() || item.split == split) items.push_back(std::move(item));
  }
  if (items.empty())
    throw ValidationError("hds.jsonl has no '" + split +
                          "' items; increase sizes.hds so every split is populated");
  return items;
}

std::string probe_result_to_json(const ProbeResult& r) {
  json j;
  j["problem_id"] = r.problem_id;
  j["representation"] = r.representation;
  auto dump_map = [](const std::map<ProbeClass, double>& m) {
    json out;
    for (const auto& [c, v] : m) out[probe_class_name(c)] = v;
    return out;
  };
  j["loss"] = dump_map(r.loss);
  j["delta"] = dump_map(r.delta);
  j["support"] = dump_map(r.support);
  j["within_std"] = dump_map(r.within_std);
  j["winner"] = probe_class_name(r.winner);
  j["winner_tied"] = r.winner_tied;
  j["total_tokens"] = r.total_tokens;
  return j.dump();
}

std::vector<ProbeResult> run_probe(const RunConfig& config, const TemplateBank& bank,
                                   Backend& backend, const std::vector<HdsItem>& items) {
  struct Job {
    const HdsItem* item;
    Representation rep;
  };
  std::vector<Job> jobs;
  for (const auto& item : items)
    for (Representation rep : config.probe_representations) jobs.push_back({&item, rep});
  std::vector<ScoringContext> contexts(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    contexts[i] = make_context(jobs[i].item->problem, jobs[i].rep, config.style, nullptr);
    backend.register_context(contexts[i], jobs[i].item->problem);
  }
  std::vector<ProbeResult> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), config.parallelism, [&](std::size_t i) {
    try {
      ProbeResult r = probe_problem(contexts[i], bank, backend);
      r.problem_id = jobs[i].item->id;
      r.representation = representation_name(jobs[i].rep);
      results[i] = std::move(r);
    } catch (const CapabilityError&) {
      throw;  // not an item failure: the whole run is impossible
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::vector<ProbeResult> ok;
  for (std::size_t i = 0; i < results.size(); ++i)
    if (errors[i].empty()) ok.push_back(std::move(results[i]));
  return ok;
}

TargetMap targets_of(const std::vector<HdsItem>& items) {
  TargetMap targets;
  for (const auto& item : items) targets[item.id] = item.target;
  return targets;
}

std::string probe_aggregate_csv(const std::vector<ProbeAggregate>& aggregates,
                                const std::string& header) {
  std::string csv = header;
  csv += "metric,representation,class,value,se,n\n";
  for (const auto& agg : aggregates) {
    csv += "neutral_loss," + agg.representation + ",neutral," + fmt4(agg.neutral_loss_mean) +
           "," + fmt4(agg.neutral_loss_se) + "," + std::to_string(agg.n) + "\n";
  }
  for (const auto& agg : aggregates) {
    for (Heuristic h : {Heuristic::DD, Heuristic::RC, Heuristic::OT}) {
      csv += "delta_loss," + agg.representation + "," + heuristic_name(h) + "," +
             fmt4(agg.delta_mean.at(h)) + "," + fmt4(agg.delta_se.at(h)) + "," +
             std::to_string(agg.n) + "\n";
    }
  }
  for (const auto& agg : aggregates) {
    for (Heuristic h : {Heuristic::DD, Heuristic::RC, Heuristic::OT}) {
      const SupportShare& share = agg.target_support.at(h);
      csv += "target_support," + agg.representation + "," + heuristic_name(h) + "," +
             fmt4(share.mean) + "," + fmt4(share.se) + "," + std::to_string(share.n_resolved) +
             "\n";
    }
  }
  return csv;
}

}  // namespace

ProbeOutputs cmd_probe(const RunConfig& config) {
  ProbeOutputs out;
  const std::string H = config.config_hash;
  const std::string M = manifest_hash_of(config);
  std::vector<HdsItem> items = load_hds_split(config, "test");
  std::shared_ptr<ReplayCache> cache;
  auto backend = make_backend(config, &cache);
  if (!backend->can_score())
    throw CapabilityError("backend " + backend->name() +
                          " cannot echo continuation logprobs; probing refused");
  TemplateBank bank = config.bank();
  out.results = run_probe(config, bank, *backend, items);
  if (cache && config.backend.record && !config.backend.replay_path.empty())
    cache->save(config.backend.replay_path);
  out.aggregates = aggregate_probe_results(out.results, targets_of(items));

  std::string body = header_line("probe_results", H, M) + "\n";
  for (const auto& r : out.results) {
    body += probe_result_to_json(r);
    body += "\n";
  }
  out.results_path = (fs::path(config.output_dir) / "probe_results.jsonl").string();
  write_file_atomic(out.results_path, body);

  std::string header = csv_header_comment(H, M) + "\n# bank=" + bank.profile + " " +
                       bank.bank_hash() + "\n";
  out.aggregate_csv_path = (fs::path(config.output_dir) / "probe_aggregate.csv").string();
  write_file_atomic(out.aggregate_csv_path, probe_aggregate_csv(out.aggregates, header));
  return out;
}

ContrastOutputs cmd_contrast(const RunConfig& config) {
  ContrastOutputs out;
  const std::string H = config.config_hash;
  const std::string M = manifest_hash_of(config);
  std::vector<HdsItem> items = load_hds_split(config, "test");
  std::shared_ptr<ReplayCache> cache;
  auto backend = make_backend(config, &cache);
  if (!backend->can_score())
    throw CapabilityError("backend " + backend->name() +
                          " cannot echo continuation logprobs; probing refused");

  struct Job {
    const HdsItem* item;
    Representation rep;
    ContrastivePair pair;
  };
  std::vector<Job> jobs;
  for (const auto& item : items) {
    SplitMix64 rng = SplitMix64(config.seed).split("contrastive." + item.id);
    ContrastivePair pair = gen_contrastive_pair(item.problem, item.target, rng);
    for (Representation rep : config.probe_representations)
      jobs.push_back({&item, rep, pair});
  }
  std::vector<ContrastiveResult> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::vector<ScoringContext> contexts(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i)
    contexts[i] = make_context(jobs[i].item->problem, jobs[i].rep, config.style, nullptr);
  parallel_for(jobs.size(), config.parallelism, [&](std::size_t i) {
    try {
      ContrastiveResult r = contrastive_probe(jobs[i].pair, contexts[i], *backend);
      r.representation = representation_name(jobs[i].rep);
      results[i] = std::move(r);
    } catch (const CapabilityError&) {
      throw;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < results.size(); ++i)
    if (errors[i].empty()) out.results.push_back(std::move(results[i]));
  if (cache && config.backend.record && !config.backend.replay_path.empty())
    cache->save(config.backend.replay_path);
  out.aggregates = aggregate_contrastive_results(out.results, targets_of(items));

  std::string body = header_line("contrastive_results", H, M) + "\n";
  for (const auto& r : out.results) {
    json j;
    j["problem_id"] = r.problem_id;
    j["representation"] = r.representation;
    j["heuristic"] = heuristic_name(r.heuristic);
    j["loss_correct"] = r.loss_correct;
    j["loss_incorrect"] = r.loss_incorrect;
    j["preference"] = r.preference;
    j["loss_gap"] = r.loss_gap;
    body += j.dump();
    body += "\n";
  }
  write_file_atomic((fs::path(config.output_dir) / "contrastive_results.jsonl").string(), body);

  std::string csv = csv_header_comment(H, M) + "\n";
  csv += "scope,representation,preference_rate,preference_se,gap_mean,gap_se,n\n";
  for (const auto& row : out.aggregates) {
    csv += row.scope + "," + row.representation + "," + fmt4(row.preference_rate) + "," +
           fmt4(row.preference_se) + "," + fmt4(row.gap_mean) + "," + fmt4(row.gap_se) + "," +
           std::to_string(row.n) + "\n";
  }
  out.aggregate_csv_path = (fs::path(config.output_dir) / "contrastive_aggregate.csv").string();
  write_file_atomic(out.aggregate_csv_path, csv);
  return out;
}

AblateOutputs cmd_ablate(const RunConfig& config) {
  AblateOutputs out;
  const std::string H = config.config_hash;
  const std::string M = manifest_hash_of(config);
  std::vector<HdsItem> items = load_hds_split(config, "test");
  std::shared_ptr<ReplayCache> cache;
  auto backend = make_backend(config, &cache);
  if (!backend->can_score())
    throw CapabilityError("backend " + backend->name() +
                          " cannot echo continuation logprobs; probing refused");

  TemplateBank balanced =
      config.bank_profile == "balanced" ? config.bank() : config.other_bank();
  TemplateBank mismatch =
      config.bank_profile == "balanced" ? config.other_bank() : config.bank();
  std::vector<ProbeResult> balanced_results = run_probe(config, balanced, *backend, items);
  std::vector<ProbeResult> mismatch_results = run_probe(config, mismatch, *backend, items);

  // Accuracy per condition via generation on the same problems (text form).
  std::map<std::string, bool> accuracy;
  for (const auto& item : items) {
    ScoringContext ctx =
        make_context(item.problem, Representation::NumeralText, config.style, nullptr);
    backend->register_context(ctx, item.problem);
    try {
      GenerationResult gen = backend->generate(ctx, config.generation_budget);
      auto answer = extract_answer(gen.text, item.problem.product.digit_count());
      accuracy[item.id] = answer && *answer == item.problem.product;
    } catch (const std::exception&) {
      // absent entry = no accuracy datum for the item
    }
  }
  if (cache && config.backend.record && !config.backend.replay_path.empty())
    cache->save(config.backend.replay_path);
  out.report = style_shift_ablation(balanced_results, mismatch_results, targets_of(items),
                                    &accuracy, &accuracy);

  std::string csv = csv_header_comment(H, M) + "\n";
  csv += "profile,representation,dd_std,ot_std,rc_std,mean_std,match_rate,accuracy,n\n";
  for (const auto& row : out.report.rows) {
    csv += row.profile + "," + row.representation + "," + fmt4(row.dd_std) + "," +
           fmt4(row.ot_std) + "," + fmt4(row.rc_std) + "," + fmt4(row.mean_std) + "," +
           fmt4(row.match_rate) + "," + (row.accuracy ? fmt4(*row.accuracy) : std::string("")) +
           "," + std::to_string(row.n) + "\n";
  }
  out.csv_path = (fs::path(config.output_dir) / "ablation.csv").string();
  write_file_atomic(out.csv_path, csv);
  return out;
}

EvalOutputs cmd_stats(const RunConfig& config, const std::string& records_path) {
  EvalOutputs out;
  JsonlFile file = read_jsonl(records_path);
  for (const auto& line : file.lines) {
    json j = json::parse(line);
    AccuracyRecord rec;
    rec.problem_id = j.at("problem_id").get<std::string>();
    rec.representation = j.at("representation").get<std::string>();
    rec.load_C = j.at("load_C").get<double>();
    rec.correct = j.at("correct").get<bool>();
    if (!j.at("extracted").is_null())
      rec.extracted_answer = BigNat::from_decimal(j.at("extracted").get<std::string>());
    out.records.push_back(std::move(rec));
  }
  std::map<std::string, std::vector<BinaryObs>> by_rep;
  for (const auto& rec : out.records)
    by_rep[rec.representation].push_back({rec.load_C, rec.correct});
  std::string csv = csv_header_comment(config.config_hash, manifest_hash_of(config)) + "\n";
  csv += "representation,n,intercept,slope,c50,r2_corr,r2_mcfadden,converged,separated\n";
  for (const auto& [rep, data] : by_rep) {
    LogisticFit fit;
    try {
      fit = fit_logistic(data);
    } catch (const std::invalid_argument&) {
      fit.n = data.size();
      fit.separated = true;
    }
    out.fits[rep] = fit;
    csv += rep + "," + std::to_string(data.size()) + "," + fmt4(fit.beta0) + "," +
           fmt4(fit.beta1) + "," + (fit.c50 ? fmt4(*fit.c50) : std::string("")) + "," +
           fmt4(fit.r2_corr) + "," + fmt4(fit.r2_mcfadden) + "," +
           (fit.converged ? "true" : "false") + "," + (fit.separated ? "true" : "false") + "\n";
  }
  out.records_path = (fs::path(config.output_dir) / "stats_fits.csv").string();
  write_file_atomic(out.records_path, csv);
  return out;
}

GeometryOutputs cmd_geometry(const std::vector<std::string>& adapter_dirs,
                             const std::string& output_dir, const std::string& config_hash) {
  GeometryOutputs out;
  std::vector<LowRankUpdate> adapters;
  for (const auto& dir : adapter_dirs) adapters.push_back(load_adapter_dir(dir));
  out.report = group_gap(adapters);

  std::string csv = csv_header_comment(config_hash, "") + "\n";
  csv += "adapter,heuristic";
  for (const auto& id : out.report.adapter_ids) csv += "," + id;
  csv += "\n";
  for (std::size_t i = 0; i < out.report.adapter_ids.size(); ++i) {
    csv += out.report.adapter_ids[i] + "," + out.report.heuristics[i];
    for (std::size_t k = 0; k < out.report.adapter_ids.size(); ++k)
      csv += "," + fmt4(out.report.matrix[i][k]);
    csv += "\n";
  }
  out.csv_path = (fs::path(output_dir) / "similarity_matrix.csv").string();
  write_file_atomic(out.csv_path, csv);

  json j;
  j["adapters"] = out.report.adapter_ids;
  j["heuristics"] = out.report.heuristics;
  j["matrix"] = out.report.matrix;
  j["same_mean"] = out.report.same_mean;
  j["cross_mean"] = out.report.cross_mean;
  j["gap"] = out.report.gap;
  j["same_pairs"] = out.report.same_pairs;
  j["cross_pairs"] = out.report.cross_pairs;
  j["partial"] = out.report.partial;
  write_file_atomic((fs::path(output_dir) / "similarity.json").string(), j.dump(2) + "\n");
  return out;
}

VerifyOutcome cmd_verify(const std::string& output_dir) {
  VerifyOutcome outcome;
  fs::path manifest_path = fs::path(output_dir) / "manifest.json";
  if (!fs::exists(manifest_path)) {
    outcome.ok = false;
    outcome.problems.push_back("manifest.json is missing");
    return outcome;
  }
  json manifest = json::parse(read_file(manifest_path.string()));
  std::string manifest_hash = sha256_file(manifest_path.string());
  std::string config_hash = manifest.value("config_hash", std::string{});

  for (const auto& [name, meta] : manifest.at("files").items()) {
    fs::path path = fs::path(output_dir) / name;
    if (!fs::exists(path)) {
      outcome.problems.push_back(name + ": listed in the manifest but missing");
      continue;
    }
    std::string want = meta.at("sha256").get<std::string>();
    std::string got = sha256_file(path.string());
    if (want != got)
      outcome.problems.push_back(name + ": content hash mismatch (manifest " + want.substr(0, 12) +
                                 "..., file " + got.substr(0, 12) + "...)");
  }

  // Result files must reference this config and manifest.
  for (const auto& entry : fs::directory_iterator(output_dir)) {
    if (entry.path().extension() != ".jsonl") continue;
    std::string name = entry.path().filename().string();
    JsonlFile file = read_jsonl(entry.path().string());
    if (file.header.is_null()) {
      outcome.problems.push_back(name + ": missing _header line");
      continue;
    }
    if (file.header.value("config_hash", std::string{}) != config_hash)
      outcome.problems.push_back(name + ": config_hash differs from the manifest's");
    std::string mh = file.header.value("manifest_hash", std::string{});
    if (!mh.empty() && mh != manifest_hash)
      outcome.problems.push_back(name + ": manifest_hash is stale");
  }
  outcome.ok = outcome.problems.empty();
  return outcome;
}

std::string cmd_report(const RunConfig& config) {
  fs::path dir(config.output_dir);
  json report;
  report["version"] = kToolVersion;
  report["config_hash"] = config.config_hash;
  report["manifest_hash"] = manifest_hash_of(config);
  std::string md = "# mulbench run report\n\n";
  md += "- config hash: `" + config.config_hash + "`\n";
  md += "- tool version: " + std::string(kToolVersion) + "\n";

  if (fs::exists(dir / "manifest.json")) {
    json manifest = json::parse(read_file((dir / "manifest.json").string()));
    report["counts"] = manifest["counts"];
    md += "- seed: " + std::to_string(manifest.value("seed", 0ull)) + "\n";
    md += "\n## datasets\n\n";
    md += "| set | count |\n|---|---|\n";
    md += "| multimodal | " +
          std::to_string(manifest["counts"]["multimodal"]["total"].get<std::size_t>()) + " |\n";
    md += "| hds | " + std::to_string(manifest["counts"]["hds"]["total"].get<std::size_t>()) +
          " |\n";
    md += "| traps | " + std::to_string(manifest["counts"]["traps"]["total"].get<std::size_t>()) +
          " |\n";
  }
  json files = json::array();
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  md += "\n## files\n\n";
  for (const auto& name : names) {
    if (name == "report.md" || name == "report.json") continue;
    files.push_back(name);
    md += "- `" + name + "`\n";
  }
  report["files"] = files;
  write_file_atomic((dir / "report.json").string(), report.dump(2) + "\n");
  write_file_atomic((dir / "report.md").string(), md);
  return (dir / "report.md").string();
}

}  // namespace mulbench
