// Copyright 2026 The realsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "realsr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "realsr/checkpoint.hpp"
#include "realsr/common.hpp"
#include "realsr/degrade.hpp"
#include "realsr/eval.hpp"
#include "realsr/image_io.hpp"
#include "realsr/parallel.hpp"
#include "realsr/synth.hpp"
#include "realsr/train.hpp"

namespace realsr {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
  const std::vector<uint8_t> raw = read_file(path);
  return std::string(raw.begin(), raw.end());
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

struct GenerateArgs {
  std::string source;
  std::string synthetic;
  int synth_size = 256;
  std::string scenario;
  std::string degradation;
  double sigma = 8.0;
  int quality = 30;
  int scale = 4;
  uint64_t seed = 0;
  std::string out = "benchmarks";
};

struct TrainArgs {
  std::string benchmark;
  std::string out;
  std::string config;
  std::string resume;
  std::string preset;
  std::string mode;
  std::string ddl_checkpoint;
  std::string sr_init;
  std::string vgg_weights;
  std::string log;
  std::optional<uint64_t> seed;
  std::optional<uint64_t> steps;
  std::optional<uint64_t> checkpoint_every;
  bool materialize_pairs = false;
};

struct InferArgs {
  std::string checkpoint;
  std::string in;
  std::string out;
  std::string benchmark;
  std::string out_dir;
  std::string mode;
  std::string preset;
};

struct EvalArgs {
  std::string checkpoint;
  std::string images;
  std::string benchmark;
  std::string plugin;
  std::string out;
  std::string id;
  std::string mode;
  std::string preset;
  int shave = 0;
};

struct ReportArgs {
  std::string in;
  std::string format = "table";
};

std::vector<SourceImage> load_sources(const fs::path& dir) {
  std::vector<SourceImage> out;
  if (!fs::exists(dir)) return out;
  for (const fs::path& p : list_png_files(dir)) out.push_back({p.stem().string(), read_png(p)});
  return out;
}

std::vector<SourceImage> synth_sources(int count, const std::string& prefix, int size, uint64_t seed) {
  std::vector<SourceImage> out;
  for (int i = 0; i < count; ++i) {
    char id[64];
    std::snprintf(id, sizeof id, "%s%03d", prefix.c_str(), i);
    out.push_back({id, synth_image(size, size, derive_seed(seed, id, "synth"))});
  }
  return out;
}

int cmd_generate(const GenerateArgs& a, int workers, std::ostream& out, std::ostream& err) {
  if (a.source.empty() == a.synthetic.empty()) throw UsageError("generate needs exactly one of --source or --synthetic");
  const Scenario scenario = parse_scenario(a.scenario);
  const DegradationRecipe recipe = a.degradation == "noise" ? DegradationRecipe::sensor_noise(a.sigma, a.seed)
                                                            : DegradationRecipe::jpeg(a.quality, a.seed);
  recipe.validate();
  TrainingSources src;
  if (!a.source.empty()) {
    const fs::path root = a.source;
    if (!fs::is_directory(root)) throw IoError("source directory does not exist: " + root.string());
    src.train_input = load_sources(root / "input");
    src.eval = load_sources(root / "eval");
    if (scenario == Scenario::kCSR) {
      src.train_output = load_sources(root / "output");
    } else if (fs::exists(root / "output")) {
      err << "note: dsr ignores " << (root / "output").string() << "\n";
    }
  } else {
    int n_in = 0, n_out = 0, n_eval = 0;
    char tail = 0;
    if (std::sscanf(a.synthetic.c_str(), "%d,%d,%d%c", &n_in, &n_out, &n_eval, &tail) != 3 || n_in < 0 ||
        n_out < 0 || n_eval < 0) {
      throw UsageError("--synthetic expects IN,OUT,EVAL counts, got '" + a.synthetic + "'");
    }
    src.train_input = synth_sources(n_in, "in_", a.synth_size, a.seed);
    if (scenario == Scenario::kCSR) src.train_output = synth_sources(n_out, "out_", a.synth_size, a.seed);
    src.eval = synth_sources(n_eval, "eval_", a.synth_size, a.seed);
  }
  const GeneratedBenchmark bench = build_benchmark(src, scenario, a.scale, recipe, a.seed, workers);
  const fs::path dir = fs::path(a.out) / benchmark_dir_name(scenario, recipe);
  const WriteStats stats = write_benchmark(bench, dir);
  const auto& m = bench.manifest;
  out << dir.string() << ": ";
  if (stats.written == 0) {
    out << "up-to-date, 0 files written\n";
  } else {
    out << stats.written << " files written, " << stats.unchanged << " unchanged\n";
  }
  out << "train_input_X=" << m.with_role(kTrainInputX).size() << " train_output_Y=" << m.with_role(kTrainOutputY).size()
      << " eval_pairs=" << m.eval_pairs().size() << "\n";
  return kExitOk;
}

TrainConfig build_config(Stage stage, const TrainArgs& a, int workers) {
  std::string text;
  if (!a.config.empty()) text = read_text(a.config);
  Preset preset = Preset::kDesk;
  if (!a.preset.empty()) {
    preset = parse_preset(a.preset);
  } else if (!text.empty()) {
    preset = TrainConfig::parse(text, TrainConfig::defaults(stage, Preset::kDesk)).preset;
  }
  TrainConfig cfg = TrainConfig::parse(text, TrainConfig::defaults(stage, preset));
  cfg.stage = stage;
  cfg.preset = preset;
  if (!a.mode.empty()) cfg.mode = parse_mode(a.mode);
  if (a.seed) cfg.seed = *a.seed;
  if (a.steps) cfg.steps = *a.steps;
  if (a.checkpoint_every) cfg.checkpoint_every = *a.checkpoint_every;
  if (!a.sr_init.empty()) cfg.sr_init = a.sr_init;
  if (!a.vgg_weights.empty()) cfg.vgg_weights = a.vgg_weights;
  if (a.materialize_pairs) cfg.materialize_pairs = true;
  cfg.workers = workers;
  cfg.validate();
  return cfg;
}

int cmd_train(Stage stage, const TrainArgs& a, int workers, std::ostream& out, std::ostream& err) {
  std::ofstream log_file;
  if (!a.log.empty()) {
    if (fs::path(a.log).has_parent_path()) fs::create_directories(fs::path(a.log).parent_path());
    log_file.open(a.log, std::ios::binary);
    if (!log_file) throw IoError("cannot open log file " + a.log);
  }
  TrainHooks hooks;
  uint64_t total = 0;
  hooks.on_log = [&](const std::string& line) {
    if (log_file) log_file << line << "\n";
    const uint64_t step = std::stoull(line.substr(5, line.find(' ') - 5));
    if (total > 0 && (step == 1 || step % std::max<uint64_t>(1, total / 10) == 0 || step == total)) {
      err << "[" << to_string(stage) << "] " << line << "\n";
    }
  };
  hooks.on_warning = [&](const std::string& msg) { err << "warning: " << msg << "\n"; };

  const TrainingData data = TrainingData::from_benchmark(a.benchmark);
  TrainResult result;
  if (!a.resume.empty()) {
    const Checkpoint from = load_checkpoint(a.resume);
    if (parse_stage(from.meta_or("stage", "")) != stage) {
      throw UsageError("--resume checkpoint belongs to stage " + from.meta_or("stage", "?"));
    }
    total = TrainConfig::parse(from.meta_or("config", ""),
                               TrainConfig::defaults(stage, parse_preset(from.meta_or("preset", "desk"))))
                .steps;
    result = resume_training(from, data, a.out, hooks);
  } else {
    const TrainConfig cfg = build_config(stage, a, workers);
    total = cfg.steps;
    if (stage == Stage::kDdl) {
      if (!a.ddl_checkpoint.empty()) throw UsageError("--ddl-checkpoint is only valid for train-sr");
      result = train_ddl(cfg, data, a.out, hooks);
    } else {
      const bool needs_ddl = cfg.mode == Mode::kOurs || cfg.mode == Mode::kCleanInput;
      if (needs_ddl && a.ddl_checkpoint.empty()) {
        throw UsageError("--mode " + to_string(cfg.mode) + " requires --ddl-checkpoint");
      }
      std::optional<Checkpoint> ddl;
      if (!a.ddl_checkpoint.empty()) ddl = load_checkpoint(a.ddl_checkpoint);
      result = train_sr(cfg, data, ddl ? &*ddl : nullptr, a.out, hooks);
    }
  }
  out << "checkpoint " << a.out << " step " << result.checkpoint.step << "\n";
  return kExitOk;
}

std::optional<Mode> opt_mode(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_mode(s);
}

std::optional<Preset> opt_preset(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_preset(s);
}

int cmd_infer(const InferArgs& a, int workers, std::ostream& out) {
  const bool single = !a.in.empty() || !a.out.empty();
  const bool batch = !a.benchmark.empty() || !a.out_dir.empty();
  if (single == batch) throw UsageError("infer needs either --in/--out or --benchmark/--out-dir");
  if (single && (a.in.empty() || a.out.empty())) throw UsageError("infer needs both --in and --out");
  if (batch && (a.benchmark.empty() || a.out_dir.empty())) {
    throw UsageError("infer needs both --benchmark and --out-dir");
  }
  const SrModel model(load_checkpoint(a.checkpoint), opt_mode(a.mode), opt_preset(a.preset));
  if (single) {
    const Image img = read_png(a.in);
    const Image sr = model.infer(img);
    write_png(a.out, sr);
    out << a.out << " " << sr.height() << "x" << sr.width() << "\n";
  } else {
    dump_outputs(model, a.benchmark, a.out_dir, workers);
    out << a.out_dir << "\n";
  }
  return kExitOk;
}

std::unique_ptr<PerceptualMetricPlugin> plugin_from(const std::string& spec) {
  if (spec.empty()) return nullptr;
  return load_plugin(spec);
}

int finish_report(const MetricReport& report, const std::string& out_path, std::ostream& out, std::ostream& err) {
  if (!report.warning.empty()) err << "warning: " << report.warning << "\n";
  out << render_report(report, ReportFormat::kTextTable);
  if (!out_path.empty()) write_text(out_path, render_report(report, ReportFormat::kDelimited));
  return kExitOk;
}

int cmd_evaluate(const EvalArgs& a, int workers, std::ostream& out, std::ostream& err) {
  const SrModel model(load_checkpoint(a.checkpoint), opt_mode(a.mode), opt_preset(a.preset));
  const auto plugin = plugin_from(a.plugin);
  return finish_report(evaluate(model, a.benchmark, plugin.get(), {a.shave, workers}), a.out, out, err);
}

int cmd_score(const EvalArgs& a, int workers, std::ostream& out, std::ostream& err) {
  const auto plugin = plugin_from(a.plugin);
  return finish_report(score_external(a.images, a.benchmark, plugin.get(), {a.shave, workers}, a.id), a.out, out,
                       err);
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  out << render_report(parse_delimited_report(read_text(a.in)), parse_report_format(a.format));
  return kExitOk;
}

void add_train_options(CLI::App* cmd, TrainArgs& a, bool sr) {
  cmd->add_option("--benchmark", a.benchmark, "Benchmark directory with manifest.tsv")->required();
  cmd->add_option("--out", a.out, "Checkpoint file to write")->required();
  cmd->add_option("--config", a.config, "Config file (key = value lines)");
  cmd->add_option("--resume", a.resume, "Continue from this checkpoint with its stored config");
  cmd->add_option("--preset", a.preset, "Architecture and schedule preset")->check(CLI::IsMember({"desk", "full"}));
  cmd->add_option("--mode", a.mode, sr ? "Training mode" : "Training mode (only ours)")
      ->check(CLI::IsMember({"ours", "baseline", "clean_input", "lr_supervision", "supervised"}));
  cmd->add_option("--seed", a.seed, "Seed for every random choice");
  cmd->add_option("--steps", a.steps, "Total optimisation steps (overrides config)");
  cmd->add_option("--checkpoint-every", a.checkpoint_every, "Checkpoint cadence in steps");
  cmd->add_option("--log", a.log, "Write one line per step to this file");
  if (sr) {
    cmd->add_option("--ddl-checkpoint", a.ddl_checkpoint, "Domain-stage checkpoint (ours, clean_input)");
    cmd->add_option("--sr-init", a.sr_init, "Initial SR weights (checkpoint or ESRGAN tensor archive)");
    cmd->add_option("--vgg-weights", a.vgg_weights, "Feature-extractor tensor archive");
    cmd->add_flag("--materialize-pairs", a.materialize_pairs, "Build training pairs once instead of per batch");
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Real-world super-resolution toolkit: benchmarks, training, inference, evaluation", "realsr"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 ok, 1 unexpected error, 2 bad arguments, 3 I/O failure, 4 validation failure, "
             "5 training diverged.\nREALSR_CACHE names the directory searched for weight and plugin files.");
  int workers = default_workers();
  app.add_option("--workers", workers, "Parallel workers (1 = fully serial)")->check(CLI::PositiveNumber);
  bool version = false;
  app.add_flag("--version", version, "Print the tool version");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Build a DSR or CSR benchmark tree");
  generate->add_option("--source", gen.source, "Source directory with input/, eval/ and (CSR) output/ PNGs");
  generate->add_option("--synthetic", gen.synthetic, "Use procedural sources: IN,OUT,EVAL counts");
  generate->add_option("--synth-size", gen.synth_size, "Side of procedural source images")
      ->check(CLI::PositiveNumber);
  generate->add_option("--scenario", gen.scenario, "dsr or csr")->required()->check(CLI::IsMember({"dsr", "csr"}));
  generate->add_option("--degradation", gen.degradation, "noise or jpeg")
      ->required()
      ->check(CLI::IsMember({"noise", "jpeg"}));
  generate->add_option("--sigma", gen.sigma, "Noise standard deviation on the 8-bit scale");
  generate->add_option("--quality", gen.quality, "JPEG quality")->check(CLI::Range(1, 100));
  generate->add_option("--scale", gen.scale, "Downscale factor")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "Master seed");
  generate->add_option("--out", gen.out, "Root directory for benchmark trees");

  TrainArgs ddl_args, sr_args;
  auto* train_ddl_cmd = app.add_subcommand("train-ddl", "Train the domain distribution networks");
  add_train_options(train_ddl_cmd, ddl_args, false);
  auto* train_sr_cmd = app.add_subcommand("train-sr", "Train the super-resolution network");
  add_train_options(train_sr_cmd, sr_args, true);

  InferArgs inf;
  auto* infer_cmd = app.add_subcommand("infer", "Super-resolve an image or a benchmark's eval inputs");
  infer_cmd->add_option("--checkpoint", inf.checkpoint, "SR checkpoint")->required();
  infer_cmd->add_option("--in", inf.in, "Input PNG");
  infer_cmd->add_option("--out", inf.out, "Output PNG");
  infer_cmd->add_option("--benchmark", inf.benchmark, "Benchmark directory (writes <source_id>.png)");
  infer_cmd->add_option("--out-dir", inf.out_dir, "Output directory for --benchmark");
  infer_cmd->add_option("--mode", inf.mode, "Inference mode (default: training mode)")
      ->check(CLI::IsMember({"ours", "baseline", "clean_input", "lr_supervision", "supervised"}));
  infer_cmd->add_option("--preset", inf.preset, "Expected preset")->check(CLI::IsMember({"desk", "full"}));

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "Run a checkpoint on a benchmark and score it");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "SR checkpoint")->required();
  eval_cmd->add_option("--benchmark", ev.benchmark, "Benchmark directory")->required();
  eval_cmd->add_option("--plugin", ev.plugin, "Perceptual metric: not-lpips or an LPIPS weight archive");
  eval_cmd->add_option("--out", ev.out, "Write the delimited report here");
  eval_cmd->add_option("--shave", ev.shave, "Border pixels ignored by every metric")->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--mode", ev.mode, "Inference mode (default: training mode)")
      ->check(CLI::IsMember({"ours", "baseline", "clean_input", "lr_supervision", "supervised"}));
  eval_cmd->add_option("--preset", ev.preset, "Expected preset")->check(CLI::IsMember({"desk", "full"}));

  EvalArgs sc;
  auto* score_cmd = app.add_subcommand("score", "Score externally produced images against a benchmark");
  score_cmd->add_option("--images", sc.images, "Directory of <source_id>.png outputs")->required();
  score_cmd->add_option("--benchmark", sc.benchmark, "Benchmark directory")->required();
  score_cmd->add_option("--plugin", sc.plugin, "Perceptual metric: not-lpips or an LPIPS weight archive");
  score_cmd->add_option("--out", sc.out, "Write the delimited report here");
  score_cmd->add_option("--shave", sc.shave, "Border pixels ignored by every metric")->check(CLI::NonNegativeNumber);
  score_cmd->add_option("--id", sc.id, "Method label recorded in the report");

  ReportArgs rep;
  auto* report_cmd = app.add_subcommand("report", "Render a delimited report");
  report_cmd->add_option("--in", rep.in, "Delimited report file")->required();
  report_cmd->add_option("--format", rep.format, "table or tsv")->check(CLI::IsMember({"table", "tsv"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    if (std::find(args.begin(), args.end(), "--version") != args.end()) {
      out << "realsr " << kToolVersion << "\n";
      return kExitOk;
    }
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen, workers, out, err);
    if (train_ddl_cmd->parsed()) return cmd_train(Stage::kDdl, ddl_args, workers, out, err);
    if (train_sr_cmd->parsed()) return cmd_train(Stage::kSr, sr_args, workers, out, err);
    if (infer_cmd->parsed()) return cmd_infer(inf, workers, out);
    if (eval_cmd->parsed()) return cmd_evaluate(ev, workers, out, err);
    if (score_cmd->parsed()) return cmd_score(sc, workers, out, err);
    if (report_cmd->parsed()) return cmd_report(rep, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DivergenceError& e) {
    err << "training diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace realsr
