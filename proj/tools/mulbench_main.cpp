#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mulbench/pipeline.hpp"

namespace {

using namespace mulbench;

int run(int argc, char** argv) {
  CLI::App app{"mulbench: multiplication benchmark generation and probing toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string records_path;
  std::string output_dir;
  std::vector<std::string> adapter_dirs;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  int parallelism_override = 0;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run config JSON file")->required();
    cmd->add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { has_seed_override = true; });
    cmd->add_option("--parallelism", parallelism_override,
                    "override the request parallelism ceiling");
  };

  CLI::App* gen = app.add_subcommand("gen", "generate datasets, traces, and the manifest");
  add_config(gen);
  CLI::App* render = app.add_subcommand("render", "render text/image/audio payload files");
  add_config(render);
  CLI::App* eval = app.add_subcommand("eval", "run generation accuracy and fit statistics");
  add_config(eval);
  CLI::App* probe = app.add_subcommand("probe", "forced-completion loss probes");
  add_config(probe);
  CLI::App* contrast = app.add_subcommand("contrast", "contrastive correct/incorrect step probe");
  add_config(contrast);
  CLI::App* ablate = app.add_subcommand("ablate", "style-shift template-bank ablation");
  add_config(ablate);
  CLI::App* stats = app.add_subcommand("stats", "refit statistics from an eval records file");
  add_config(stats);
  stats->add_option("--records", records_path, "eval_records.jsonl path")->required();
  CLI::App* geometry = app.add_subcommand("geometry", "adapter update cosine geometry");
  geometry->add_option("--adapters", adapter_dirs, "adapter directories")->required();
  geometry->add_option("--out", output_dir, "output directory")->required();
  CLI::App* verify = app.add_subcommand("verify", "re-check output hashes against the manifest");
  verify->add_option("--out", output_dir, "output directory")->required();
  CLI::App* report = app.add_subcommand("report", "collate a run report");
  add_config(report);

  CLI11_PARSE(app, argc, argv);

  auto load_config = [&]() {
    RunConfig config = RunConfig::load_file(config_path);
    if (has_seed_override) config.seed = seed_override;
    if (parallelism_override > 0) config.parallelism = parallelism_override;
    return config;
  };

  if (gen->parsed()) {
    GenOutputs out = cmd_gen(load_config());
    std::printf("gen: %zu multimodal, %zu hds, %zu traps, %zu perturbation pairs\n",
                out.multimodal.size(), out.hds.size(), out.traps.size(),
                out.perturbations.size());
    for (const auto& [h, n] : out.trace_counts)
      std::printf("gen: %zu %s traces\n", n, h.c_str());
    std::printf("gen: manifest at %s\n", out.manifest_path.c_str());
  } else if (render->parsed()) {
    RenderOutputs out = cmd_render(load_config());
    std::printf("render: %zu files (%zu audio skipped), index at %s\n", out.files_written,
                out.audio_skipped, out.index_path.c_str());
  } else if (eval->parsed()) {
    EvalOutputs out = cmd_eval(load_config());
    std::printf("eval: %zu records, %zu failures\n", out.records.size(), out.failures);
    for (const auto& [rep, fit] : out.fits) {
      std::printf("eval: %s intercept=%s slope=%s c50=%s r2=%s%s\n", rep.c_str(),
                  fmt4(fit.beta0).c_str(), fmt4(fit.beta1).c_str(),
                  fit.c50 ? fmt4(*fit.c50).c_str() : "n/a", fmt4(fit.r2_corr).c_str(),
                  fit.separated ? " (separated)" : "");
    }
  } else if (probe->parsed()) {
    ProbeOutputs out = cmd_probe(load_config());
    std::printf("probe: %zu results, aggregates at %s\n", out.results.size(),
                out.aggregate_csv_path.c_str());
  } else if (contrast->parsed()) {
    ContrastOutputs out = cmd_contrast(load_config());
    std::printf("contrast: %zu results, aggregates at %s\n", out.results.size(),
                out.aggregate_csv_path.c_str());
  } else if (ablate->parsed()) {
    AblateOutputs out = cmd_ablate(load_config());
    std::printf("ablate: %zu rows at %s\n", out.report.rows.size(), out.csv_path.c_str());
  } else if (stats->parsed()) {
    EvalOutputs out = cmd_stats(load_config(), records_path);
    std::printf("stats: %zu records refit, table at %s\n", out.records.size(),
                out.records_path.c_str());
  } else if (geometry->parsed()) {
    GeometryOutputs out = cmd_geometry(adapter_dirs, output_dir, "");
    std::printf("geometry: same=%s cross=%s gap=%s%s\n", fmt4(out.report.same_mean).c_str(),
                fmt4(out.report.cross_mean).c_str(), fmt4(out.report.gap).c_str(),
                out.report.partial ? " (partial: no same-heuristic pair)" : "");
  } else if (verify->parsed()) {
    VerifyOutcome outcome = cmd_verify(output_dir);
    if (outcome.ok) {
      std::printf("verify: all hashes check out\n");
    } else {
      for (const auto& p : outcome.problems) std::printf("verify: %s\n", p.c_str());
      return 1;
    }
  } else if (report->parsed()) {
    std::string path = cmd_report(load_config());
    std::printf("report: %s\n", path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mulbench::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const mulbench::CapabilityError& e) {
    std::fprintf(stderr, "capability error: %s\n", e.what());
    return 3;
  } catch (const mulbench::PartialFailureError& e) {
    std::fprintf(stderr, "partial failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
