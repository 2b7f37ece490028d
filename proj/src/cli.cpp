#include "vitslim/cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>

#include "CLI11.hpp"
#include "vitslim/accounting.hpp"
#include "vitslim/checkpoint.hpp"
#include "vitslim/error.hpp"
#include "vitslim/ranking.hpp"
#include "vitslim/reports.hpp"
#include "vitslim/run_config.hpp"
#include "vitslim/slicer.hpp"

namespace vitslim {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 failed for " + path);
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string ckpt;
  std::string resume;
  std::optional<std::uint64_t> max_steps;
  std::optional<double> budget, attn, mlp, patch;
  bool no_nesting = false;
  std::string arch_path;
  std::string split = "test";
  std::string history_path;
  bool quiet = false;
  std::string manifest_base;  // set by pipeline for its nested slice step
};

// Collects what a command read and wrote; serialized as the run manifest.
class Manifest {
 public:
  // Input paths under `base` are recorded relative to it.
  Manifest(std::string command, const RunConfig& config, const Options& opt, fs::path base)
      : command_(std::move(command)), base_(std::move(base)) {
    j_["tool"] = "vitslim";
    j_["command"] = command_;
    j_["config"] = config;
    j_["config_file"] = opt.config_path;
    j_["inputs"] = json::object();
    j_["outputs"] = json::object();
    j_["metrics"] = json::object();
  }

  void input(const std::string& name, const std::string& path) {
    std::string shown = path;
    const fs::path rel = fs::path(path).lexically_relative(base_);
    if (!base_.empty() && !rel.empty() && *rel.begin() != "..") shown = rel.string();
    j_["inputs"][name] = {{"path", shown}, {"sha256", sha256_file(path)}};
  }
  // Paths are recorded relative to the output directory.
  void output(const std::string& name, const fs::path& out_dir, const std::string& file) {
    j_["outputs"][name] = {{"path", file}, {"sha256", sha256_file((out_dir / file).string())}};
  }
  void metric(const std::string& name, json value) { j_["metrics"][name] = std::move(value); }
  void set(const std::string& key, json value) { j_[key] = std::move(value); }
  const json& data() const { return j_; }

  void write(const fs::path& out_dir) const {
    write_file_atomic((out_dir / "manifest.json").string(), j_.dump(2) + "\n");
  }

 private:
  std::string command_;
  fs::path base_;
  json j_;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void log(const Options& opt, const std::string& msg) {
  if (!opt.quiet) std::cerr << msg << '\n';
}

RunConfig resolve_config(const Options& opt) {
  RunConfig c = opt.config_path.empty() ? RunConfig{} : load_run_config(opt.config_path);
  if (opt.seed) c.seed = *opt.seed;
  if (opt.budget) c.budget = {*opt.budget, *opt.budget, c.budget.patch};
  if (opt.attn) c.budget.attn = *opt.attn;
  if (opt.mlp) c.budget.mlp = *opt.mlp;
  if (opt.patch) c.budget.patch = *opt.patch;
  if (opt.no_nesting) c.enforce_nesting = false;
  c.validate();
  set_precision(c.precision);
  return c;
}

fs::path out_dir(const Options& opt, const std::string& command) {
  const fs::path dir = opt.out.empty() ? fs::path("runs") / command : fs::path(opt.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  return dir;
}

void write_text(const fs::path& dir, const std::string& name, const std::string& text) {
  write_file_atomic((dir / name).string(), text);
}

void write_timing(const fs::path& dir, const Timer& timer) {
  write_text(dir, "timing.json", json{{"seconds", timer.seconds()}}.dump(2) + "\n");
}

std::string fmt_acc(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", a);
  return buf;
}

// Runs one training stage, from `start` or resumed from --resume.
struct StageResult {
  TrainState state;
  History history;
};

StageResult run_stage(const std::string& stage, const RunConfig& config, const Options& opt,
                      const DataSplits& data, const Checkpoint& start, bool with_masks,
                      Manifest& manifest) {
  const TrainHyper hyper = config.stage(stage);
  std::optional<TrainState> state;
  if (!opt.resume.empty()) {
    const Checkpoint resumed = load_checkpoint(opt.resume);
    manifest.input("resume", opt.resume);
    if (resumed.stage != stage) {
      throw UsageError("--resume expects a " + stage + " checkpoint, got stage '" + resumed.stage +
                       "'");
    }
    if (resumed.seed != hyper.seed) {
      throw UsageError("--resume checkpoint was written with a different seed");
    }
    state.emplace(state_from_checkpoint(resumed, hyper, true));
  } else {
    Checkpoint c = start;
    if (with_masks && !c.masks) c.masks = init_masks(c.model.config);
    if (!with_masks) c.masks.reset();
    state.emplace(state_from_checkpoint(c, hyper, false));
  }
  History history = stage == "search" ? search(*state, data.train, hyper, opt.max_steps)
                                      : train(*state, data.train, hyper, opt.max_steps);
  for (const EpochRecord& r : history.epochs) {
    log(opt, stage + " epoch " + std::to_string(r.epoch) + " ce " + std::to_string(r.ce) +
                 " penalty " + std::to_string(r.penalty));
  }
  return {std::move(*state), std::move(history)};
}

void finish_stage(const std::string& stage, const RunConfig& config, const Options& opt,
                  const DataSplits& data, StageResult& result, const fs::path& dir,
                  Manifest& manifest) {
  const TrainHyper hyper = config.stage(stage);
  const std::uint64_t total = steps_per_epoch(data.train.n, hyper.batch_size) * hyper.epochs;
  Checkpoint ck = checkpoint_from_state(result.state, hyper, stage);
  ck.extra = {{"complete", result.state.step >= total}};
  const std::string file = stage + ".ckpt";
  save_checkpoint((dir / file).string(), ck);
  manifest.output("checkpoint", dir, file);
  if (!result.history.epochs.empty()) {
    write_text(dir, "history.csv", history_csv(result.history));
    manifest.output("history", dir, "history.csv");
  }
  if (!result.history.steps.empty()) {
    write_text(dir, "steps.csv", step_history_csv(result.history));
    manifest.output("steps", dir, "steps.csv");
  }
  const MaskSet* masks = result.state.masks ? &*result.state.masks : nullptr;
  const double acc = evaluate(result.state.model, masks, data.test, config.eval_batch_size);
  manifest.metric("steps", result.state.step);
  manifest.metric("complete", result.state.step >= total);
  manifest.metric("test_accuracy", acc);
  if (!result.history.epochs.empty()) {
    const EpochRecord& last = result.history.epochs.back();
    manifest.metric("final_epoch_ce", last.ce);
    manifest.metric("final_epoch_penalty", last.penalty);
  }
  log(opt, stage + ": test accuracy " + fmt_acc(acc));
}

Checkpoint initial_checkpoint(const RunConfig& config) {
  Checkpoint ck;
  ck.stage = "init";
  ck.precision = config.precision;
  ck.model = init_model(config.model, Rng::derive(config.seed, {0}).next_u64());
  ck.seed = config.seed;
  return ck;
}

Checkpoint load_input(const Options& opt, Manifest& manifest, const RunConfig& config) {
  if (opt.ckpt.empty()) throw UsageError("--ckpt is required");
  Checkpoint ck = load_checkpoint(opt.ckpt);
  manifest.input("checkpoint", opt.ckpt);
  if (!(ck.model.config == config.model)) {
    throw UsageError("checkpoint model config differs from the run config's model section");
  }
  return ck;
}

int cmd_pretrain(const Options& opt) {
  Timer timer;
  const RunConfig config = resolve_config(opt);
  const fs::path dir = out_dir(opt, "pretrain");
  Manifest manifest("pretrain", config, opt, dir);
  const DataSplits data = load_data(config);
  StageResult r =
      run_stage("pretrain", config, opt, data, initial_checkpoint(config), false, manifest);
  finish_stage("pretrain", config, opt, data, r, dir, manifest);
  manifest.write(dir);
  write_timing(dir, timer);
  return 0;
}

int cmd_search(const Options& opt) {
  Timer timer;
  const RunConfig config = resolve_config(opt);
  const fs::path dir = out_dir(opt, "search");
  Manifest manifest("search", config, opt, dir);
  const DataSplits data = load_data(config);
  Checkpoint start;
  if (opt.ckpt.empty() && opt.resume.empty()) {
    std::cerr << "warning: searching from a randomly initialized model; the search is meant to "
                 "start from a pretrained supernet\n";
    start = initial_checkpoint(config);
  } else if (!opt.ckpt.empty()) {
    start = load_input(opt, manifest, config);
    if (start.stage != "pretrain" && start.stage != "retrain") {
      std::cerr << "warning: search input checkpoint has stage '" << start.stage
                << "', not a pretrained model\n";
    }
  }
  StageResult r = run_stage("search", config, opt, data, start, true, manifest);
  finish_stage("search", config, opt, data, r, dir, manifest);
  manifest.write(dir);
  write_timing(dir, timer);
  return 0;
}

int cmd_slice(const Options& opt) {
  Timer timer;
  const RunConfig config = resolve_config(opt);
  const fs::path dir = out_dir(opt, "slice");
  Manifest manifest("slice", config, opt,
                    opt.manifest_base.empty() ? dir : fs::path(opt.manifest_base));
  const Checkpoint in = load_input(opt, manifest, config);
  if (!in.model.arch.is_full(in.model.config)) {
    throw UsageError("slice needs a full supernet checkpoint");
  }
  SlimArchitecture arch;
  if (!opt.arch_path.empty()) {
    std::ifstream f(opt.arch_path);
    if (!f) throw DataError("cannot open " + opt.arch_path);
    try {
      arch = json::parse(f).get<SlimArchitecture>();
    } catch (const json::exception& e) {
      throw DataError(opt.arch_path + ": " + e.what());
    }
    manifest.input("arch", opt.arch_path);
  } else if (in.masks) {
    arch = select_architecture(rank_masks(*in.masks), config.budget, config.model,
                               config.enforce_nesting);
  } else {
    // Without masks there is nothing to rank; only the identity is meaningful.
    if (config.budget.attn != 1.0 || config.budget.mlp != 1.0 || config.budget.patch != 1.0) {
      throw UsageError("checkpoint has no masks to rank; pass --arch or a budget of 1.0");
    }
    arch = SlimArchitecture::full(config.model);
  }
  arch.validate(config.model);

  Checkpoint out;
  out.stage = "slice";
  out.precision = config.precision;
  out.model = slice_model(in.model, arch);
  out.seed = config.seed;
  save_checkpoint((dir / "sliced.ckpt").string(), out);
  manifest.output("checkpoint", dir, "sliced.ckpt");

  const CostReport dense = cost_report(config.model, SlimArchitecture::full(config.model));
  const CostReport cost = cost_report(config.model, arch);
  export_reports(arch, config.model, cost, nullptr, dir.string());
  for (const char* f : {"arch.json", "head_dims.csv", "mlp_dims.csv", "head_dims.svg",
                        "mlp_dims.svg", "cost.json", "cost.txt"}) {
    manifest.output(f, dir, f);
  }
  manifest.metric("params", cost.params);
  manifest.metric("macs", cost.macs);
  manifest.metric("params_fraction", static_cast<double>(cost.params) / dense.params);
  manifest.metric("macs_fraction", static_cast<double>(cost.macs) / dense.macs);
  manifest.metric("realized_budget",
                  {{"attn", cost.attn_keep}, {"mlp", cost.mlp_keep}, {"patch", cost.patch_keep}});
  if (!opt.quiet) std::cout << format_cost_table(cost);
  manifest.write(dir);
  write_timing(dir, timer);
  return 0;
}

int cmd_retrain(const Options& opt) {
  Timer timer;
  const RunConfig config = resolve_config(opt);
  const fs::path dir = out_dir(opt, "retrain");
  Manifest manifest("retrain", config, opt, dir);
  const DataSplits data = load_data(config);
  Checkpoint start;
  if (!opt.ckpt.empty()) {
    start = load_input(opt, manifest, config);
  } else if (opt.resume.empty()) {
    throw UsageError("retrain needs --ckpt (a sliced model) or --resume");
  }
  StageResult r = run_stage("retrain", config, opt, data, start, false, manifest);
  finish_stage("retrain", config, opt, data, r, dir, manifest);
  manifest.write(dir);
  write_timing(dir, timer);
  return 0;
}

int cmd_eval(const Options& opt) {
  const RunConfig config = resolve_config(opt);
  const fs::path dir = out_dir(opt, "eval");
  Manifest manifest("eval", config, opt, dir);
  const Checkpoint ck = load_input(opt, manifest, config);
  const DataSplits data = load_data(config);
  if (opt.split != "test" && opt.split != "train") throw UsageError("--split must be test or train");
  const Dataset& d = opt.split == "test" ? data.test : data.train;
  const double acc =
      evaluate(ck.model, ck.masks ? &*ck.masks : nullptr, d, config.eval_batch_size);
  manifest.set("split", opt.split);
  manifest.metric("accuracy", acc);
  manifest.metric("samples", d.n);
  std::cout << "accuracy " << fmt_acc(acc) << " on " << d.n << " " << opt.split << " samples\n";
  manifest.write(dir);
  return 0;
}

int cmd_flops(const Options& opt) {
  const RunConfig config = resolve_config(opt);
  SlimArchitecture arch = SlimArchitecture::full(config.model);
  std::optional<Manifest> manifest;
  if (!opt.out.empty()) manifest.emplace("flops", config, opt, fs::path(opt.out));
  if (!opt.arch_path.empty()) {
    std::ifstream f(opt.arch_path);
    if (!f) throw DataError("cannot open " + opt.arch_path);
    try {
      arch = json::parse(f).get<SlimArchitecture>();
    } catch (const json::exception& e) {
      throw DataError(opt.arch_path + ": " + e.what());
    }
    if (manifest) manifest->input("arch", opt.arch_path);
  } else if (!opt.ckpt.empty()) {
    Checkpoint ck = load_checkpoint(opt.ckpt);
    arch = ck.model.arch;
    if (manifest) manifest->input("checkpoint", opt.ckpt);
  }
  const CostReport cost = cost_report(config.model, arch);
  std::cout << format_cost_table(cost);
  if (manifest) {
    const fs::path dir = out_dir(opt, "flops");
    write_text(dir, "cost.json", json(cost).dump(2) + "\n");
    write_text(dir, "cost.txt", format_cost_table(cost));
    manifest->output("cost.json", dir, "cost.json");
    manifest->metric("params", cost.params);
    manifest->metric("macs", cost.macs);
    manifest->write(dir);
  }
  return 0;
}

int cmd_export(const Options& opt) {
  const RunConfig config = resolve_config(opt);
  const fs::path dir = out_dir(opt, "export");
  Manifest manifest("export", config, opt, dir);
  SlimArchitecture arch;
  if (!opt.arch_path.empty()) {
    std::ifstream f(opt.arch_path);
    if (!f) throw DataError("cannot open " + opt.arch_path);
    try {
      arch = json::parse(f).get<SlimArchitecture>();
    } catch (const json::exception& e) {
      throw DataError(opt.arch_path + ": " + e.what());
    }
    manifest.input("arch", opt.arch_path);
  } else if (!opt.ckpt.empty()) {
    arch = load_input(opt, manifest, config).model.arch;
  } else {
    throw UsageError("export needs --arch or --ckpt");
  }
  arch.validate(config.model);
  export_reports(arch, config.model, cost_report(config.model, arch), nullptr, dir.string());
  for (const char* f : {"arch.json", "head_dims.csv", "mlp_dims.csv", "head_dims.svg",
                        "mlp_dims.svg", "cost.json", "cost.txt"}) {
    manifest.output(f, dir, f);
  }
  if (!opt.history_path.empty()) {
    fs::copy_file(opt.history_path, dir / "history.csv", fs::copy_options::overwrite_existing);
    manifest.input("history", opt.history_path);
    manifest.output("history.csv", dir, "history.csv");
  }
  manifest.write(dir);
  return 0;
}

int cmd_pipeline(const Options& opt) {
  Timer timer;
  const RunConfig config = resolve_config(opt);
  const fs::path dir = out_dir(opt, "pipeline");
  Manifest manifest("pipeline", config, opt, dir);
  const DataSplits data = load_data(config);
  Options stage_opt = opt;
  stage_opt.resume.clear();
  stage_opt.max_steps.reset();

  // Step 0: dense baseline (the supernet).
  const fs::path pre_dir = dir / "pretrain";
  fs::create_directories(pre_dir);
  Manifest pre_manifest("pretrain", config, opt, dir);
  StageResult pre = run_stage("pretrain", config, stage_opt, data, initial_checkpoint(config),
                              false, pre_manifest);
  finish_stage("pretrain", config, stage_opt, data, pre, pre_dir, pre_manifest);
  pre_manifest.write(pre_dir);
  const double baseline = pre_manifest.data()["metrics"]["test_accuracy"];

  // Step 1: one-shot search.
  const fs::path search_dir = dir / "search";
  fs::create_directories(search_dir);
  Manifest search_manifest("search", config, opt, dir);
  search_manifest.input("checkpoint", (pre_dir / "pretrain.ckpt").string());
  StageResult sr = run_stage("search", config, stage_opt, data,
                             load_checkpoint((pre_dir / "pretrain.ckpt").string()), true,
                             search_manifest);
  finish_stage("search", config, stage_opt, data, sr, search_dir, search_manifest);
  search_manifest.write(search_dir);

  // Step 2: budget selection and slicing.
  const fs::path slice_dir = dir / "slice";
  Options slice_opt = stage_opt;
  slice_opt.ckpt = (search_dir / "search.ckpt").string();
  slice_opt.out = slice_dir.string();
  slice_opt.arch_path.clear();
  slice_opt.quiet = true;
  slice_opt.manifest_base = dir.string();
  cmd_slice(slice_opt);
  fs::remove(slice_dir / "timing.json");

  // Step 3: retraining.
  const fs::path re_dir = dir / "retrain";
  fs::create_directories(re_dir);
  Manifest re_manifest("retrain", config, opt, dir);
  re_manifest.input("checkpoint", (slice_dir / "sliced.ckpt").string());
  StageResult rr = run_stage("retrain", config, stage_opt, data,
                             load_checkpoint((slice_dir / "sliced.ckpt").string()), false,
                             re_manifest);
  finish_stage("retrain", config, stage_opt, data, rr, re_dir, re_manifest);
  re_manifest.write(re_dir);
  const double final_acc = re_manifest.data()["metrics"]["test_accuracy"];

  std::ifstream slice_manifest_file(slice_dir / "manifest.json");
  const json slice_manifest = json::parse(slice_manifest_file);

  for (const auto& [name, sub] :
       {std::pair{"pretrain", pre_dir}, std::pair{"search", search_dir},
        std::pair{"slice", slice_dir}, std::pair{"retrain", re_dir}}) {
    manifest.output(std::string(name) + ".manifest",
                    dir, (fs::path(name) / "manifest.json").string());
  }
  manifest.output("final_checkpoint", dir, "retrain/retrain.ckpt");
  manifest.metric("baseline_accuracy", baseline);
  manifest.metric("search_accuracy", search_manifest.data()["metrics"]["test_accuracy"]);
  manifest.metric("final_accuracy", final_acc);
  manifest.metric("accuracy_gap", baseline - final_acc);
  manifest.metric("slice", slice_manifest["metrics"]);
  manifest.write(dir);
  write_timing(dir, timer);
  std::cout << "baseline " << fmt_acc(baseline) << ", retrained " << fmt_acc(final_acc)
            << ", params " << slice_manifest["metrics"]["params"] << ", MACs "
            << slice_manifest["metrics"]["macs"] << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Mask-based search, slicing and retraining of vision transformers", "vitslim"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "run configuration JSON")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "override the configuration seed");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_flag("--quiet", opt.quiet, "suppress progress output");
  };
  auto training = [&opt](CLI::App* sub) {
    sub->add_option("--resume", opt.resume, "continue from a checkpoint of this stage");
    sub->add_option("--max-steps", opt.max_steps, "stop after this many optimizer steps");
  };
  auto budget = [&opt](CLI::App* sub) {
    sub->add_option("--budget", opt.budget, "keep fraction for attention and MLP dims");
    sub->add_option("--attn", opt.attn, "attention-dim keep fraction");
    sub->add_option("--mlp", opt.mlp, "MLP-dim keep fraction");
    sub->add_option("--patch", opt.patch, "patch keep fraction");
    sub->add_flag("--no-nesting", opt.no_nesting, "skip patch nesting (for diagnostics)");
  };

  CLI::App* pretrain = app.add_subcommand("pretrain", "train the dense supernet");
  common(pretrain);
  training(pretrain);
  CLI::App* search = app.add_subcommand("search", "joint weight and mask search");
  common(search);
  training(search);
  search->add_option("--ckpt", opt.ckpt, "pretrained checkpoint");
  CLI::App* slice = app.add_subcommand("slice", "rank masks, impose a budget, extract a model");
  common(slice);
  budget(slice);
  slice->add_option("--ckpt", opt.ckpt, "searched checkpoint")->required();
  slice->add_option("--arch", opt.arch_path, "slice this architecture JSON instead of ranking");
  CLI::App* retrain = app.add_subcommand("retrain", "retrain a sliced model");
  common(retrain);
  training(retrain);
  retrain->add_option("--ckpt", opt.ckpt, "sliced checkpoint");
  CLI::App* eval = app.add_subcommand("eval", "accuracy of a checkpoint");
  common(eval);
  eval->add_option("--ckpt", opt.ckpt, "checkpoint")->required();
  eval->add_option("--split", opt.split, "test or train");
  CLI::App* flops = app.add_subcommand("flops", "parameter and MAC counts");
  common(flops);
  flops->add_option("--arch", opt.arch_path, "architecture JSON (default: full model)");
  flops->add_option("--ckpt", opt.ckpt, "take the architecture from a checkpoint");
  CLI::App* exp = app.add_subcommand("export", "architecture and cost reports");
  common(exp);
  exp->add_option("--arch", opt.arch_path, "architecture JSON");
  exp->add_option("--ckpt", opt.ckpt, "take the architecture from a checkpoint");
  exp->add_option("--history", opt.history_path, "search history CSV to include");
  CLI::App* pipeline = app.add_subcommand("pipeline", "pretrain, search, slice and retrain");
  common(pipeline);
  budget(pipeline);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*pretrain) return cmd_pretrain(opt);
    if (*search) return cmd_search(opt);
    if (*slice) return cmd_slice(opt);
    if (*retrain) return cmd_retrain(opt);
    if (*eval) return cmd_eval(opt);
    if (*flops) return cmd_flops(opt);
    if (*exp) return cmd_export(opt);
    if (*pipeline) return cmd_pipeline(opt);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}

int run_cli(int argc, char** argv) { return run_cli(std::vector<std::string>(argv, argv + argc)); }

}  // namespace vitslim
