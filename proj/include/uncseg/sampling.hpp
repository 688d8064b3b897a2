#pragma once

#include <vector>

#include "uncseg/label_mask.hpp"
#include "uncseg/rng.hpp"
#include "uncseg/unet.hpp"

namespace uncseg {

// T probability maps from posterior/ensemble draws plus their mean.
struct SampleStack {
  enum Source { kBbb, kMcd, kEnsemble, kPlain };

  int channels = 0, h = 0, w = 0;
  std::vector<std::vector<float>> samples;  // each channels*h*w, channel-major
  std::vector<float> mean;                  // elementwise average (64-bit)
  Source source = kPlain;

  int count() const { return int(samples.size()); }
};

// T stochastic forwards of one model (bbb/mcd draw per-sample randomness;
// plain replicates its deterministic output).
SampleStack sample_stack(UNet& model, const std::vector<float>& image, int T,
                         Rng& rng);

// One deterministic forward per ensemble member.
SampleStack sample_stack_ensemble(std::vector<UNet*>& members,
                                  const std::vector<float>& image);

// Per-pixel argmax, ties broken toward the lowest class index.
LabelMask argmax_mask(const std::vector<float>& probs, int channels, int h,
                      int w);

void compute_stack_mean(SampleStack& stack);

}  // namespace uncseg
