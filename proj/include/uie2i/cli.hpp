#pragma once

// Command-line front end. Exit status: 0 success, 1 usage error, 2 data error
// (or evaluation below --fail-under).

#include <iostream>

#include "CLI11.hpp"
#include "uie2i/config.hpp"
#include "uie2i/eval.hpp"
#include "uie2i/review_service.hpp"

namespace uie2i {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

namespace detail {

inline std::string sanitize_name(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' ? c : '_');
  while (!out.empty() && out.front() == '.') out.erase(out.begin());
  return out.empty() ? "capture" : out;
}

inline std::string zero_pad(std::size_t v, std::size_t width) {
  auto s = std::to_string(v);
  return s.size() >= width ? s : std::string(width - s.size(), '0') + s;
}

inline void emit(const std::optional<fs::path>& out_path, const std::string& text, std::ostream& out) {
  if (out_path) write_file(*out_path, text);
  else out << text;
}

inline std::vector<CaptureBundle> load_bundles(const fs::path& in) {
  std::vector<CaptureBundle> bundles;
  for (const auto& dir : list_bundles(in)) bundles.push_back(load_bundle(dir));
  if (bundles.empty()) throw DataError("no capture bundles under " + in.string());
  return bundles;
}

/// Elements per bundle: taken from a pool file when one is given, otherwise
/// parsed from the bundle metadata.
inline std::vector<CaptureJob> make_jobs(const std::vector<CaptureBundle>& bundles,
                                         const std::optional<fs::path>& pool_path, const ParseConfig& cfg) {
  std::map<std::string, std::vector<UiElement>> from_pool;
  if (pool_path)
    for (auto& e : read_pool(*pool_path).entries) from_pool[e.capture_id].push_back(std::move(e.element));
  std::vector<CaptureJob> jobs;
  for (const auto& b : bundles) {
    if (!pool_path) {
      jobs.push_back({b, parse_bundle(b, cfg)});
      continue;
    }
    auto it = from_pool.find(b.source_id);
    if (it != from_pool.end()) jobs.push_back({b, it->second});
  }
  return jobs;
}

}  // namespace detail

/// Runs the uie2i command line. Tests call this in-process.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"UI grounding data pipeline: parse, sample, synthesize, build and evaluate benchmarks"};
  app.name("uie2i");
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "Pipeline config JSON (default: $UIE2I_CONFIG)");

  // parse
  auto* parse = app.add_subcommand("parse", "Parse capture bundles into an element pool (JSONL)");
  std::string parse_in, parse_out;
  parse->add_option("--in", parse_in, "Bundle directory, or a directory of bundles")->required();
  parse->add_option("--out", parse_out, "Output pool JSONL")->required();

  // sample
  auto* sample = app.add_subcommand("sample", "Resample a pool toward the configured distribution");
  std::string sample_pool, sample_out;
  std::size_t sample_n = 0;
  std::optional<std::uint64_t> sample_seed;
  sample->add_option("--pool", sample_pool, "Input pool JSONL")->required();
  sample->add_option("--n", sample_n, "Number of elements to draw")->required();
  sample->add_option("--out", sample_out, "Output pool JSONL")->required();
  sample->add_option("--seed", sample_seed, "Override the distribution seed");

  // annotate
  auto* annotate = app.add_subcommand("annotate", "Render Set-of-Marks images for capture bundles");
  std::string annotate_in, annotate_out;
  std::optional<std::string> annotate_pool;
  annotate->add_option("--in", annotate_in, "Bundle directory, or a directory of bundles")->required();
  annotate->add_option("--out", annotate_out, "Output directory for marked PNGs")->required();
  annotate->add_option("--pool", annotate_pool, "Take elements from this pool instead of parsing");

  // synthesize
  auto* synth = app.add_subcommand("synthesize", "Generate grounding records from capture bundles");
  std::string synth_in, synth_out;
  std::optional<std::string> synth_pool, synth_mode, synth_fixtures;
  synth->add_option("--in", synth_in, "Bundle directory, or a directory of bundles")->required();
  synth->add_option("--out", synth_out, "Output records JSONL")->required();
  synth->add_option("--pool", synth_pool, "Take elements from this pool instead of parsing");
  synth->add_option("--mode", synth_mode, "full | no_instruction_synthesis | no_llm")
      ->check(CLI::IsMember({"full", "no_instruction_synthesis", "no_llm"}));
  synth->add_option("--fixtures", synth_fixtures, "Replay LLM responses from this fixture store");

  // stats
  auto* stats = app.add_subcommand("stats", "Dataset statistics as JSON");
  std::string stats_in, stats_kind = "records";
  std::optional<std::string> stats_out;
  stats->add_option("--in", stats_in, "Input JSONL")->required();
  stats->add_option("--kind", stats_kind, "records | bench | pool")->check(CLI::IsMember({"records", "bench", "pool"}));
  stats->add_option("--out", stats_out, "Output file (default: stdout)");

  // bench-build
  auto* build = app.add_subcommand("bench-build", "Create a review build directory from grounding records");
  std::string build_records, build_out;
  std::optional<std::size_t> build_per_type;
  std::uint64_t build_seed = 0;
  bool build_force = false;
  build->add_option("--records", build_records, "Grounding records JSONL")->required();
  build->add_option("--out", build_out, "Build directory")->required();
  build->add_option("--per-type", build_per_type, "Candidates per element type (default: all)");
  build->add_option("--seed", build_seed, "Seed for the per-type draw");
  build->add_flag("--force", build_force, "Overwrite an existing build");

  // bench-assemble
  auto* assemble = app.add_subcommand("bench-assemble", "Assemble the benchmark from a reviewed build");
  std::string assemble_build, assemble_out;
  std::optional<std::string> assemble_stats;
  assemble->add_option("--build", assemble_build, "Build directory")->required();
  assemble->add_option("--out", assemble_out, "Output benchmark JSONL")->required();
  assemble->add_option("--stats", assemble_stats, "Also write benchmark statistics JSON here");

  // eval
  auto* eval = app.add_subcommand("eval", "Score predictions against a benchmark");
  std::string eval_bench, eval_pred, eval_format = "markdown";
  std::optional<std::string> eval_out;
  std::optional<double> eval_fail_under;
  eval->add_option("--bench", eval_bench, "Benchmark JSONL")->required();
  eval->add_option("--pred", eval_pred, "Predictions JSONL")->required();
  eval->add_option("--format", eval_format, "json | markdown")->check(CLI::IsMember({"json", "markdown"}));
  eval->add_option("--out", eval_out, "Report file (default: stdout)");
  eval->add_option("--fail-under", eval_fail_under, "Exit 2 when overall accuracy is below this fraction")
      ->check(CLI::Range(0.0, 1.0));

  // review-serve
  auto* serve = app.add_subcommand("review-serve", "Serve the review API for a build directory");
  std::string serve_build, serve_host = "127.0.0.1";
  int serve_port = 8080;
  bool serve_expose = false;
  std::optional<std::string> serve_ui;
  serve->add_option("--build", serve_build, "Build directory")->required();
  serve->add_option("--host", serve_host, "Bind address (non-loopback requires --expose)");
  serve->add_option("--port", serve_port, "Port (0 picks a free port)")->check(CLI::Range(0, 65535));
  serve->add_flag("--expose", serve_expose, "Allow binding a non-loopback address");
  serve->add_option("--ui-dir", serve_ui, "Static review UI to serve under /ui");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const PipelineConfig config = load_config(config_path ? std::optional<fs::path>(*config_path) : std::nullopt);

    if (*parse) {
      std::vector<PoolEntry> pool;
      for (const auto& b : detail::load_bundles(parse_in)) {
        const auto entries = to_pool_entries(b, parse_bundle(b, config.parse));
        pool.insert(pool.end(), entries.begin(), entries.end());
      }
      write_pool(parse_out, pool, Json{{"config_hash", config_hash(config)}});
      log_event("info", "parse_done", {{"elements", pool.size()}, {"out", parse_out}});
      return kExitOk;
    }

    if (*sample) {
      DistributionSpec spec = config.distribution;
      if (sample_seed) spec.seed = *sample_seed;
      const auto pool = read_pool(sample_pool).entries;
      const auto res = balanced_resample(pool, spec, sample_n);
      for (const auto& w : res.warnings) log_event("warn", "sample_warning", {{"message", w}});
      write_pool(sample_out, res.elements,
                 Json{{"seed", res.seed}, {"spec_hash", res.spec_hash}, {"config_hash", config_hash(config)}});
      log_event("info", "sample_done", {{"elements", res.elements.size()}, {"out", sample_out}});
      return kExitOk;
    }

    if (*annotate) {
      const auto jobs = detail::make_jobs(detail::load_bundles(annotate_in),
                                          annotate_pool ? std::optional<fs::path>(*annotate_pool) : std::nullopt,
                                          config.parse);
      std::size_t written = 0;
      for (const auto& job : jobs) {
        if (job.elements.empty()) continue;
        const RgbImage shot = read_png(job.bundle.screenshot_path());
        const auto groups = batch_marks(job.elements.size(), config.max_marks_per_image);
        for (std::size_t g = 0; g < groups.size(); ++g) {
          std::vector<UiElement> batch;
          for (auto i : groups[g]) batch.push_back(job.elements[i]);
          const fs::path path = fs::path(annotate_out) /
                                (detail::sanitize_name(job.bundle.source_id) + "-marks-" + std::to_string(g) + ".png");
          write_png(path, render_marks(shot, batch, config.marks));
          out << path.string() << "\n";
          ++written;
        }
      }
      log_event("info", "annotate_done", {{"images", written}});
      return kExitOk;
    }

    if (*synth) {
      PipelineConfig cfg = config;
      if (synth_mode) cfg.mode = *synthesis_mode_from_string(*synth_mode);
      if (synth_fixtures) cfg.llm.fixture_dir = fs::absolute(*synth_fixtures).string();
      const auto jobs = detail::make_jobs(detail::load_bundles(synth_in),
                                          synth_pool ? std::optional<fs::path>(*synth_pool) : std::nullopt, cfg.parse);
      std::unique_ptr<LlmClient> client;
      if (cfg.mode != SynthesisMode::NoLlm) client = std::make_unique<ConfiguredClient>(cfg.resolved_llm());
      SynthesisOptions opt{cfg.mode, cfg.marks, cfg.max_marks_per_image, cfg.llm.model, cfg.llm.temperature,
                           config_hash(cfg)};
      const auto outcomes = run_synthesis(jobs, client.get(), opt, cfg.max_in_flight);
      std::vector<GroundingRecord> records;
      std::size_t failed = 0;
      for (const auto& o : outcomes) {
        records.insert(records.end(), o.records.begin(), o.records.end());
        failed += o.failed ? 1 : 0;
        for (const auto& e : o.errors) log_event("warn", "batch_skipped", {{"capture", o.capture_id}, {"error", e}});
        for (const auto& r : o.rejections)
          log_event("info", "entry_rejected", {{"capture", o.capture_id}, {"id", r.id}, {"reason", r.reason}});
        for (const auto& r : o.warnings)
          log_event("info", "entry_normalized", {{"capture", o.capture_id}, {"id", r.id}, {"reason", r.reason}});
      }
      write_records(synth_out, records);
      log_event("info", "synthesize_done",
                {{"captures", jobs.size()}, {"failed_captures", failed}, {"records", records.size()}, {"out", synth_out}});
      return kExitOk;
    }

    if (*stats) {
      Json j;
      if (stats_kind == "pool") j = measure_distribution(read_pool(stats_in).entries);
      else if (stats_kind == "bench") j = dataset_stats(read_records<BenchmarkSample>(stats_in).records);
      else j = dataset_stats(read_records<GroundingRecord>(stats_in).records);
      detail::emit(stats_out ? std::optional<fs::path>(*stats_out) : std::nullopt, j.dump(2) + "\n", out);
      return kExitOk;
    }

    if (*build) {
      const fs::path dir = build_out;
      if (fs::exists(dir / kTasksFile) && !build_force)
        throw DataError(dir.string() + " already holds a build; pass --force to overwrite");
      auto records = read_records<GroundingRecord>(build_records).records;
      if (build_per_type)
        records = stratified_bench_sample(records, *build_per_type, build_seed,
                                          [](const GroundingRecord& r) { return r.element_type; });
      std::map<std::string, std::string> shot_names;  // source path -> build file name
      std::set<std::string> used;
      std::vector<ReviewTask> tasks;
      const std::size_t width = std::max<std::size_t>(5, std::to_string(records.size()).size());
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        auto [it, fresh] = shot_names.try_emplace(r.screenshot_path);
        if (fresh) {
          const auto stem = detail::sanitize_name(r.provenance.capture_id);
          std::string name = stem + ".png";
          for (int k = 2; used.count(name); ++k) name = stem + "-" + std::to_string(k) + ".png";
          used.insert(name);
          it->second = name;
          fs::create_directories(dir / kScreenshotsDir);
          fs::copy_file(r.screenshot_path, dir / kScreenshotsDir / name, fs::copy_options::overwrite_existing);
        }
        tasks.push_back({"t" + detail::zero_pad(i + 1, width), std::string(kScreenshotsDir) + "/" + it->second, r.bbox,
                         r.instruction, r.element_type, r.platform, TaskStatus::Pending, r.screen});
      }
      write_records(dir / kTasksFile, tasks);
      if (build_force && fs::exists(dir / kVerdictsFile)) fs::remove(dir / kVerdictsFile);
      log_event("info", "bench_build_done", {{"tasks", tasks.size()}, {"screenshots", used.size()}});
      return kExitOk;
    }

    if (*assemble) {
      const ReviewStore store(assemble_build);
      const auto bench = assemble_benchmark(store.tasks(), store.verdicts());
      write_records(assemble_out, bench);
      if (assemble_stats) write_file(*assemble_stats, Json(dataset_stats(bench)).dump(2) + "\n");
      log_event("info", "bench_assemble_done", {{"tasks", store.tasks().size()}, {"samples", bench.size()}});
      return kExitOk;
    }

    if (*eval) {
      const auto bench = read_records<BenchmarkSample>(eval_bench).records;
      const auto pred = read_records<Prediction>(eval_pred);
      const auto report = score(bench, pred.records);
      const auto format = eval_format == "json" ? ReportFormat::Json : ReportFormat::Markdown;
      detail::emit(eval_out ? std::optional<fs::path>(*eval_out) : std::nullopt, render_report(report, format), out);
      if (eval_fail_under && report.overall_accuracy < *eval_fail_under) {
        log_event("error", "eval_below_threshold",
                  {{"accuracy", report.overall_accuracy}, {"fail_under", *eval_fail_under}});
        return kExitData;
      }
      return kExitOk;
    }

    if (*serve) {
      const bool loopback = serve_host == "127.0.0.1" || serve_host == "localhost" || serve_host == "::1";
      if (!loopback && !serve_expose) {
        err << "refusing to bind " << serve_host << " without --expose\n";
        return kExitUsage;
      }
      ReviewStore store(serve_build);
      ReviewService service(store, serve_ui ? std::optional<fs::path>(*serve_ui) : std::nullopt);
      const int port = service.bind(serve_host, serve_port);
      log_event("info", "review_serving", {{"host", serve_host}, {"port", port}, {"build", serve_build}});
      out << "listening on http://" << serve_host << ":" << port << "\n" << std::flush;
      service.listen_after_bind();
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace uie2i
