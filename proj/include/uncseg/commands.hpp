#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uncseg/config.hpp"
#include "uncseg/train.hpp"
#include "uncseg/unet.hpp"

namespace uncseg {

// Configuration translation (flat `key = value` file -> typed configs).
ModelConfig model_config_from(const RunConfig& cfg,
                              const std::string& variant);
TrainConfig train_config_from(const RunConfig& cfg);

// Checkpoint archives: one f32 entry per parameter plus a `meta` entry whose
// attributes record the model configuration and the training-set
// normalization statistics.
void save_checkpoint(const std::string& dir, const UNet& model,
                     const DatasetStats& stats, const TrainConfig& train_cfg,
                     int best_epoch, bool force);
struct Checkpoint {
  ModelConfig model_cfg;
  std::map<std::string, std::vector<float>> params;
  DatasetStats stats;
  TrainConfig::NormMode norm_mode = TrainConfig::kVariance;
  int crop = 0;
  int best_epoch = 0;
};
Checkpoint load_checkpoint(const std::string& dir);

// Pipeline commands (the CLI is a thin wrapper around these). All are
// deterministic per config + seed and refuse existing outputs without force.
void cmd_gen_data(const RunConfig& cfg, const std::string& out_dir,
                  std::optional<uint64_t> seed, bool force);
void cmd_train(const RunConfig& cfg, const std::string& variant,
               const std::string& data_dir, const std::string& out_dir,
               std::optional<uint64_t> seed, bool force, int jobs);
void cmd_distort(const RunConfig& cfg, const std::string& data_dir,
                 const std::string& kind, int degree,
                 const std::string& out_dir, std::optional<uint64_t> seed,
                 bool force);
void cmd_eval(const RunConfig& cfg, const std::vector<std::string>& checkpoints,
              const std::string& data_dir, int samples,
              const std::string& out_csv, std::optional<uint64_t> seed);
void cmd_qc(const RunConfig& cfg, const std::string& eval_csv,
            const std::string& out_dir, bool force);
void cmd_report(const std::vector<std::string>& eval_csvs,
                const std::vector<std::string>& labels,
                const std::string& out_dir, bool force);

// Minimal CSV access shared by qc/report: header + string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // SchemaError if absent
  static CsvTable read(const std::string& path);
};

}  // namespace uncseg
