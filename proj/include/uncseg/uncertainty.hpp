#pragma once

#include <string>
#include <utility>
#include <vector>

#include "uncseg/sampling.hpp"

namespace uncseg {

// Image-level uncertainty summary for one sample stack.
struct UncertaintyRecord {
  std::string image_id;
  double entropy = 0;
  double mutual_information = 0;
  std::vector<double> dice_ws;  // per structure (class 1..C-1)
  std::vector<double> assd_ws;  // per structure, mm
};

// Mean over pixels of the class-probability entropy of `probs`
// (channel-major C x H x W); 0*log 0 := 0.
double predictive_entropy(const std::vector<float>& probs, int channels,
                          int h, int w);

// H(mean) - mean over samples of H(sample), per-pixel mean. Nonnegative up
// to numerical noise; 0 for T == 1.
double mutual_information(const SampleStack& stack);

// Mean Dice between each sample's argmax segmentation and the mean
// segmentation, for one class. Both-empty pairs count 1.
double dice_within_samples(const SampleStack& stack, uint8_t class_id);

// Mean ASSD(mean segmentation, sample segmentation) in mm for one class.
// Both-empty pairs count 0; one-empty pairs count the image diagonal.
double assd_within_samples(const SampleStack& stack, uint8_t class_id,
                           std::pair<float, float> spacing_mm);

}  // namespace uncseg
