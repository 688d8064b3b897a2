#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "uncseg/bayes.hpp"
#include "uncseg/ops.hpp"
#include "uncseg/rng.hpp"

namespace uncseg {

struct ModelConfig {
  enum Variant { kPlain, kBbb, kMcd };

  Variant variant = kPlain;
  int depth = 4;          // resolution levels
  int base_filters = 8;   // doubled per level
  int num_classes = 4;
  int input_h = 64;
  int input_w = 64;
  PriorConfig prior;      // bbb only
  DropoutConfig dropout;  // mcd only

  void validate() const;
  static Variant variant_from_string(const std::string& s);
  static std::string variant_to_string(Variant v);
};

// One convolution layer, either deterministic or with a factorized Gaussian
// posterior over kernel and bias.
class ConvLayer {
 public:
  ConvLayer() = default;
  ConvLayer(std::string name, int cin, int cout, int ksize, bool bayesian,
            Rng& init_rng);

  // bbb: sample=true draws one weight set (shared across the minibatch),
  // sample=false uses the posterior mean.
  Tensor forward(const Tensor& x, bool sample, Rng& rng) const;

  Tensor kl(const PriorConfig& prior) const;  // scalar, bayesian only
  bool bayesian() const { return bayesian_; }
  void collect_parameters(std::vector<std::pair<std::string, Tensor>>& out);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  int pad_ = 0;
  bool bayesian_ = false;
  Tensor kernel_, bias_;        // plain
  GaussianWeightSet kernel_q_, bias_q_;  // bayesian
};

class UNet {
 public:
  UNet(const ModelConfig& cfg, Rng init_rng);

  struct ForwardResult {
    Tensor probs;     // [N,C,H,W], per-pixel simplex
    Tensor kl_total;  // scalar; 0 for plain/mcd
  };

  // sample controls weight draws (bbb) / dropout masks (mcd); the plain
  // variant ignores it.
  ForwardResult forward(const Tensor& x, bool sample, Rng& rng);

  const ModelConfig& config() const { return cfg_; }
  std::vector<std::pair<std::string, Tensor>>& parameters() { return params_; }
  int64_t parameter_count() const;

  std::map<std::string, std::vector<float>> snapshot_parameters() const;
  void set_parameters(const std::map<std::string, std::vector<float>>& p);

 private:
  ModelConfig cfg_;
  // Conv pairs per block: enc0..enc(D-2), bottleneck, dec(D-2)..dec0.
  std::vector<std::array<ConvLayer, 2>> enc_;
  std::array<ConvLayer, 2> bottleneck_;
  std::vector<std::array<ConvLayer, 2>> dec_;  // index i = level D-2-i
  ConvLayer head1_, head2_;
  std::vector<bool> enc_dropout_, dec_dropout_;
  bool bottleneck_dropout_ = false, head_dropout_ = false;
  std::vector<std::pair<std::string, Tensor>> params_;

  Tensor maybe_dropout(const Tensor& x, bool enabled, bool sample,
                       Rng& rng) const;
};

}  // namespace uncseg
