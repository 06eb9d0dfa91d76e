// Command-line driver over the vqmimo C interface.
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vqmimo/vqmimo.h"

namespace {

struct Failure {
  int status;
  std::string message;
};

void check(int status) {
  if (status != VQM_OK) throw Failure{status, vqm_last_error()};
}

struct ConfigDeleter {
  void operator()(vqm_config* c) const { vqm_config_free(c); }
};
struct DatasetDeleter {
  void operator()(vqm_dataset* d) const { vqm_dataset_free(d); }
};
struct ModelDeleter {
  void operator()(vqm_model* m) const { vqm_model_free(m); }
};
using ConfigPtr = std::unique_ptr<vqm_config, ConfigDeleter>;
using DatasetPtr = std::unique_ptr<vqm_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<vqm_model, ModelDeleter>;

struct Options {
  std::string config_path;
  bool paper_scale = false;
  std::vector<std::string> sets;
  std::string seed;
  std::string out_dir;
  std::string dataset;
  std::string output;
  std::string input;
  std::string checkpoint;
  std::string methods;
  std::string axis;
  bool train_missing = false;
};

std::string fetch(int (*fn)(const vqm_config*, const char*, char*, size_t, size_t*),
                  const vqm_config* cfg, const char* key) {
  size_t needed = 0;
  fn(cfg, key, nullptr, 0, &needed);
  std::string buf(needed + 1, '\0');
  check(fn(cfg, key, buf.data(), buf.size(), &needed));
  buf.resize(needed);
  return buf;
}

std::string get(const vqm_config* cfg, const char* key) { return fetch(vqm_config_get, cfg, key); }

std::string default_checkpoint(const vqm_config* cfg, int stage) {
  size_t needed = 0;
  vqm_config_checkpoint_path(cfg, stage, nullptr, 0, &needed);
  std::string buf(needed + 1, '\0');
  check(vqm_config_checkpoint_path(cfg, stage, buf.data(), buf.size(), &needed));
  buf.resize(needed);
  return buf;
}

ConfigPtr build_config(const Options& o) {
  vqm_config* raw = nullptr;
  check(vqm_config_new(&raw));
  ConfigPtr cfg(raw);
  if (o.paper_scale) check(vqm_config_apply_paper_scale(cfg.get()));
  if (!o.config_path.empty()) check(vqm_config_merge_file(cfg.get(), o.config_path.c_str()));
  for (const std::string& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Failure{VQM_ERR_CONFIG, "--set expects key=value, got '" + s + "'"};
    check(vqm_config_set(cfg.get(), s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()));
  }
  if (!o.seed.empty()) check(vqm_config_set(cfg.get(), "seed", o.seed.c_str()));
  if (!o.out_dir.empty()) check(vqm_config_set(cfg.get(), "out_dir", o.out_dir.c_str()));
  if (!o.dataset.empty()) check(vqm_config_set(cfg.get(), "dataset", o.dataset.c_str()));
  if (get(cfg.get(), "dataset").empty()) {
    const std::string path = get(cfg.get(), "out_dir") + "/dataset.bin";
    check(vqm_config_set(cfg.get(), "dataset", path.c_str()));
  }
  check(vqm_config_validate(cfg.get()));
  return cfg;
}

DatasetPtr open_dataset(const vqm_config* cfg) {
  vqm_dataset* raw = nullptr;
  check(vqm_dataset_load(get(cfg, "dataset").c_str(), &raw));
  return DatasetPtr(raw);
}

void manifest(const std::string& command, const vqm_config* cfg, const std::string& primary,
              const std::vector<std::string>& artifacts) {
  std::vector<const char*> ptrs;
  for (const auto& a : artifacts) ptrs.push_back(a.c_str());
  const std::string path = primary + ".manifest";
  check(vqm_write_manifest(path.c_str(), command.c_str(), cfg, ptrs.data(), ptrs.size()));
  std::printf("manifest: %s\n", path.c_str());
}

void cmd_generate(const Options& o) {
  const ConfigPtr cfg = build_config(o);
  const std::string out = o.output.empty() ? get(cfg.get(), "dataset") : o.output;
  vqm_dataset* raw = nullptr;
  check(vqm_dataset_generate(cfg.get(), &raw));
  const DatasetPtr ds(raw);
  check(vqm_dataset_save(ds.get(), out.c_str()));
  vqm_dataset_info info{};
  check(vqm_dataset_info_get(ds.get(), &info));
  std::printf("dataset: %s (%zu samples, %zu scenarios; splits %zu/%zu/%zu)\n", out.c_str(),
              info.samples, info.scenarios, info.pretrain, info.finetune, info.eval);
  manifest("generate-data", cfg.get(), out, {out});
}

void cmd_pretrain(const Options& o) {
  const ConfigPtr cfg = build_config(o);
  const DatasetPtr ds = open_dataset(cfg.get());
  const std::string out = o.output.empty() ? default_checkpoint(cfg.get(), 0) : o.output;
  vqm_model* raw = nullptr;
  check(vqm_pretrain(cfg.get(), ds.get(), &raw));
  const ModelPtr model(raw);
  check(vqm_model_save(model.get(), out.c_str()));
  std::printf("checkpoint: %s\n", out.c_str());
  manifest("pretrain", cfg.get(), out, {get(cfg.get(), "dataset"), out});
}

void cmd_finetune(const Options& o) {
  const ConfigPtr cfg = build_config(o);
  const DatasetPtr ds = open_dataset(cfg.get());
  const std::string in = o.checkpoint.empty() ? default_checkpoint(cfg.get(), 0) : o.checkpoint;
  const std::string out = o.output.empty() ? default_checkpoint(cfg.get(), 1) : o.output;
  vqm_model* base_raw = nullptr;
  check(vqm_model_load(in.c_str(), &base_raw));
  const ModelPtr base(base_raw);
  vqm_model* raw = nullptr;
  check(vqm_finetune(cfg.get(), ds.get(), base.get(), &raw));
  const ModelPtr model(raw);
  check(vqm_model_save(model.get(), out.c_str()));
  std::printf("checkpoint: %s\n", out.c_str());
  manifest("finetune", cfg.get(), out, {get(cfg.get(), "dataset"), in, out});
}

void cmd_evaluate(const Options& o) {
  const ConfigPtr cfg = build_config(o);
  const DatasetPtr ds = open_dataset(cfg.get());
  const std::string out = o.output.empty() ? get(cfg.get(), "out_dir") + "/evaluate.csv" : o.output;
  check(vqm_evaluate_csv(cfg.get(), ds.get(), o.methods.empty() ? nullptr : o.methods.c_str(),
                         o.checkpoint.empty() ? nullptr : o.checkpoint.c_str(), out.c_str()));
  std::printf("csv: %s\n", out.c_str());
  std::vector<std::string> artifacts{get(cfg.get(), "dataset")};
  if (!o.checkpoint.empty()) artifacts.push_back(o.checkpoint);
  artifacts.push_back(out);
  manifest("evaluate", cfg.get(), out, artifacts);
}

void cmd_sweep(const Options& o) {
  const ConfigPtr cfg = build_config(o);
  const DatasetPtr ds = open_dataset(cfg.get());
  const std::string stem =
      get(cfg.get(), "out_dir") + "/sweep_" + (o.axis == "n_p" ? std::string("np") : o.axis);
  const std::string csv = o.output.empty() ? stem + ".csv" : o.output;
  const std::string svg = std::filesystem::path(csv).replace_extension(".svg").string();
  check(vqm_sweep(cfg.get(), ds.get(), o.axis.c_str(), o.train_missing ? 1 : 0, csv.c_str()));
  check(vqm_plot(csv.c_str(), svg.c_str()));
  std::printf("csv: %s\nplot: %s\n", csv.c_str(), svg.c_str());
  manifest("sweep --axis " + o.axis, cfg.get(), csv, {get(cfg.get(), "dataset"), csv, svg});
}

void cmd_plot(const Options& o) {
  const ConfigPtr cfg = build_config(o);
  const std::string out = o.output.empty()
                              ? std::filesystem::path(o.input).replace_extension(".svg").string()
                              : o.output;
  check(vqm_plot(o.input.c_str(), out.c_str()));
  std::printf("plot: %s\n", out.c_str());
  manifest("plot", cfg.get(), out, {o.input, out});
}

void common_flags(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "key=value configuration file");
  sub->add_flag("--paper-scale", o.paper_scale, "start from the full-scale preset");
  sub->add_option("--set", o.sets, "override one config key (key=value)")->take_all();
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--out", o.out_dir, "output directory");
  sub->add_option("--dataset", o.dataset, "dataset file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vqmimo: quantized CSI feedback and multi-user precoding experiments"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("generate-data", "generate and save the channel dataset");
  common_flags(gen, o);
  gen->add_option("--output", o.output, "dataset path");

  auto* pre = app.add_subcommand("pretrain", "pre-train the feedback model");
  common_flags(pre, o);
  pre->add_option("--output", o.output, "checkpoint path");

  auto* fine = app.add_subcommand("finetune", "fine-tune a pre-trained model with the GNN");
  common_flags(fine, o);
  fine->add_option("--checkpoint", o.checkpoint, "pre-training checkpoint");
  fine->add_option("--output", o.output, "checkpoint path");

  auto* eval = app.add_subcommand("evaluate", "evaluate methods at one operating point");
  common_flags(eval, o);
  eval->add_option("--method", o.methods, "comma-separated methods (default: config list)");
  eval->add_option("--checkpoint", o.checkpoint, "checkpoint for the learned method");
  eval->add_option("--output", o.output, "CSV path");

  auto* sweep = app.add_subcommand("sweep", "sum rate over J, B or n_p");
  common_flags(sweep, o);
  sweep->add_option("--axis", o.axis, "J, B or n_p")->required()->check(CLI::IsMember({"J", "B", "n_p"}));
  sweep->add_flag("--train-missing", o.train_missing, "train absent checkpoints first");
  sweep->add_option("--output", o.output, "CSV path (the plot goes beside it)");

  auto* plot = app.add_subcommand("plot", "render a result CSV as SVG");
  common_flags(plot, o);
  plot->add_option("--input", o.input, "CSV file")->required();
  plot->add_option("--output", o.output, "SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ExtrasError& e) {
    std::fprintf(stderr, "error: %s: %s\n", vqm_status_name(VQM_ERR_UNKNOWN_FLAG), e.what());
    return VQM_ERR_UNKNOWN_FLAG;
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s: %s\n", vqm_status_name(VQM_ERR_INVALID_ARGUMENT), e.what());
    return VQM_ERR_INVALID_ARGUMENT;
  }

  try {
    if (gen->parsed()) cmd_generate(o);
    else if (pre->parsed()) cmd_pretrain(o);
    else if (fine->parsed()) cmd_finetune(o);
    else if (eval->parsed()) cmd_evaluate(o);
    else if (sweep->parsed()) cmd_sweep(o);
    else if (plot->parsed()) cmd_plot(o);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s: %s\n", vqm_status_name(f.status), f.message.c_str());
    return f.status;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s: %s\n", vqm_status_name(VQM_ERR_INTERNAL), e.what());
    return VQM_ERR_INTERNAL;
  }
  return 0;
}
