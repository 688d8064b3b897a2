#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uncseg/dataset.hpp"
#include "uncseg/ops.hpp"
#include "uncseg/rng.hpp"
#include "uncseg/unet.hpp"

namespace uncseg {

struct TrainConfig {
  double lambda = 10.0;  // KL weight
  int epochs = 40;
  double lr_initial = 1e-4;
  double lr_after = 1e-5;
  int lr_switch_epoch = 25;  // epochs after this index use lr_after
  int batch_size = 8;
  uint64_t seed = 1234;
  int val_samples = 8;  // posterior draws for validation NLL

  double aug_rotate_deg = 60.0;
  double aug_translate_px = 10.0;
  double aug_scale_lo = 0.7;
  double aug_scale_hi = 1.3;

  enum NormMode { kVariance, kStddev };
  NormMode norm_mode = kVariance;  // divide by variance (or std, via switch)
  int crop = 0;                    // center crop size; 0 = no crop

  int ensemble_members = 5;
  std::vector<uint64_t> ensemble_seeds;  // empty: seed+1 .. seed+members

  void validate() const;
};

struct DatasetStats {
  double mean = 0;
  double variance = 0;
};

// ELBO surrogate: cross_entropy + lambda * kl_total scaled per minibatch and
// per pixel, so both terms stay commensurate regardless of batching.
Tensor elbo_loss(const Tensor& probs, const std::vector<LabelMask>& labels,
                 const Tensor& kl_total, double lambda,
                 int minibatches_per_epoch);

// Affine resample with explicit parameters: rotation about the image center,
// translation in pixels, isotropic scale. Bilinear image / nearest mask,
// out-of-frame filled with background.
void affine_resample(const std::vector<float>& image, const LabelMask& mask,
                     double angle_deg, double ty_px, double tx_px,
                     double scale_factor, std::vector<float>& image_out,
                     LabelMask& mask_out);

// One transform drawn uniformly from the configured ranges.
void augment(std::vector<float>& image, LabelMask& mask,
             const TrainConfig& cfg, Rng& rng);

// Mean/variance over every pixel of the training images.
DatasetStats compute_stats(const Dataset& train_set);

// Center crop (crop == 0 keeps full size) then (x - mean) / divisor where
// the divisor is the variance or, via the switch, the standard deviation.
std::vector<float> normalize_and_crop(const std::vector<float>& image, int h,
                                      int w, const DatasetStats& stats,
                                      TrainConfig::NormMode mode, int crop);
LabelMask crop_mask(const LabelMask& mask, int crop);

struct HistoryRow {
  int epoch = 0;
  double train_ce = 0, train_kl = 0;  // epoch means (kl already scaled)
  double val_nll = 0;
  double val_dice_lv = 0, val_dice_myo = 0, val_dice_rv = 0;
};

struct TrainResult {
  std::map<std::string, std::vector<float>> best_params;
  std::vector<HistoryRow> history;
  DatasetStats stats;
  int best_epoch = 0;
};

// Adam with bias correction; one state slot per parameter tensor.
class Adam {
 public:
  explicit Adam(std::vector<std::pair<std::string, Tensor>>& params,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(double lr);
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor>>* params_;
  std::vector<std::vector<float>> m_, v_;
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
};

// Full training loop with checkpoint selection by validation NLL. The model
// is left holding the best parameters.
TrainResult train(UNet& model, const Dataset& train_set,
                  const Dataset& val_set, const TrainConfig& cfg);

// Independently trained plain-variant models (different seeds). jobs > 1
// trains members in parallel; results are independent of the thread count.
std::vector<TrainResult> train_ensemble(const ModelConfig& model_cfg,
                                        const Dataset& train_set,
                                        const Dataset& val_set,
                                        const TrainConfig& cfg, int jobs = 1);

void write_history_csv(const std::string& path,
                       const std::vector<HistoryRow>& rows);

}  // namespace uncseg
