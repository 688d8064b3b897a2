#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uncseg/commands.hpp"
#include "uncseg/errors.hpp"

namespace {

uncseg::RunConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return uncseg::RunConfig::parse_file(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uncseg: segmentation uncertainty toolkit"};
  app.require_subcommand(1);

  std::string config_path, out, data_dir, variant = "plain";
  std::string kind = "noise", eval_csv, out_csv;
  std::vector<std::string> checkpoints, eval_csvs, labels;
  std::optional<uint64_t> seed;
  bool force = false;
  int degree = 1, samples = 50, jobs = 1;

  app.add_option("--config", config_path, "RunConfig `key = value` file");
  app.add_option("--seed", seed, "override the config seed");
  app.add_flag("--force", force, "overwrite existing outputs");

  auto* gen = app.add_subcommand("gen-data", "generate a phantom dataset");
  gen->add_option("--out", out, "output directory")->required();

  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--variant", variant, "plain|bbb|mcd|ensemble");
  train->add_option("--data", data_dir, "dataset directory (gen-data output)")
      ->required();
  train->add_option("--out", out, "checkpoint directory")->required();
  train->add_option("--jobs", jobs, "parallel ensemble members");

  auto* distort = app.add_subcommand("distort", "distort a dataset archive");
  distort->add_option("--data", data_dir, "source dataset archive")
      ->required();
  distort->add_option("--kind", kind, "noise|blur|stretch")->required();
  distort->add_option("--degree", degree, "severity degree 1..4")->required();
  distort->add_option("--out", out, "output archive directory")->required();

  auto* eval = app.add_subcommand("eval", "evaluate checkpoints on a dataset");
  eval->add_option("--checkpoint", checkpoints,
                   "checkpoint dir (repeat for an ensemble)")
      ->required();
  eval->add_option("--data", data_dir, "dataset archive")->required();
  eval->add_option("--samples", samples, "posterior draws T");
  eval->add_option("--out", out_csv, "output CSV path")->required();

  auto* qc = app.add_subcommand("qc", "quality-control curves from eval CSV");
  qc->add_option("--eval", eval_csv, "eval CSV")->required();
  qc->add_option("--out", out, "output directory")->required();

  auto* report = app.add_subcommand("report", "summary report across evals");
  report->add_option("--eval", eval_csvs, "eval CSVs (repeatable)")
      ->required();
  report->add_option("--label", labels, "labels matching --eval order");
  report->add_option("--out", out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const uncseg::RunConfig cfg = load_config(config_path);
    if (gen->parsed()) {
      uncseg::cmd_gen_data(cfg, out, seed, force);
    } else if (train->parsed()) {
      uncseg::cmd_train(cfg, variant, data_dir, out, seed, force, jobs);
    } else if (distort->parsed()) {
      uncseg::cmd_distort(cfg, data_dir, kind, degree, out, seed, force);
    } else if (eval->parsed()) {
      uncseg::cmd_eval(cfg, checkpoints, data_dir, samples, out_csv, seed);
    } else if (qc->parsed()) {
      uncseg::cmd_qc(cfg, eval_csv, out, force);
    } else if (report->parsed()) {
      uncseg::cmd_report(eval_csvs, labels, out, force);
    }
  } catch (const uncseg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const uncseg::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
