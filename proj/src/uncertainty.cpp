#include "uncseg/uncertainty.hpp"

#include <cmath>

#include "uncseg/errors.hpp"
#include "uncseg/metrics.hpp"

namespace uncseg {

namespace {
// Sum over pixels of -sum_c p log p, in double.
double entropy_sum(const std::vector<float>& probs, int channels, size_t hw) {
  double acc = 0;
  for (size_t j = 0; j < hw; ++j) {
    for (int c = 0; c < channels; ++c) {
      const double p = probs[size_t(c) * hw + j];
      if (p > 0) acc -= p * std::log(p);
    }
  }
  return acc;
}
}  // namespace

double predictive_entropy(const std::vector<float>& probs, int channels,
                          int h, int w) {
  const size_t hw = size_t(h) * size_t(w);
  if (probs.size() != hw * size_t(channels))
    throw DimensionError("predictive_entropy: probs length mismatch");
  return entropy_sum(probs, channels, hw) / double(hw);
}

double mutual_information(const SampleStack& stack) {
  if (stack.count() <= 1) return 0.0;
  const size_t hw = size_t(stack.h) * size_t(stack.w);
  const double h_mean = entropy_sum(stack.mean, stack.channels, hw);
  double h_samples = 0;
  for (const auto& s : stack.samples)
    h_samples += entropy_sum(s, stack.channels, hw);
  h_samples /= double(stack.count());
  return (h_mean - h_samples) / double(hw);
}

double dice_within_samples(const SampleStack& stack, uint8_t class_id) {
  const auto spacing = std::make_pair(1.f, 1.f);
  const LabelMask mean_seg =
      argmax_mask(stack.mean, stack.channels, stack.h, stack.w);
  const BinaryRegion mean_r =
      BinaryRegion::from_labels(mean_seg, class_id, spacing);
  double acc = 0;
  for (const auto& s : stack.samples) {
    const LabelMask seg = argmax_mask(s, stack.channels, stack.h, stack.w);
    const BinaryRegion r = BinaryRegion::from_labels(seg, class_id, spacing);
    acc += dice(mean_r, r);  // both-empty -> 1 by the dice convention
  }
  return acc / double(stack.count());
}

double assd_within_samples(const SampleStack& stack, uint8_t class_id,
                           std::pair<float, float> spacing_mm) {
  const LabelMask mean_seg =
      argmax_mask(stack.mean, stack.channels, stack.h, stack.w);
  const BinaryRegion mean_r =
      BinaryRegion::from_labels(mean_seg, class_id, spacing_mm);
  const bool mean_empty = mean_r.empty();
  double acc = 0;
  for (const auto& s : stack.samples) {
    const LabelMask seg = argmax_mask(s, stack.channels, stack.h, stack.w);
    const BinaryRegion r = BinaryRegion::from_labels(seg, class_id, spacing_mm);
    const bool s_empty = r.empty();
    if (mean_empty && s_empty) continue;               // contributes 0
    if (mean_empty != s_empty) acc += r.diagonal_mm();  // sentinel
    else acc += assd(mean_r, r);
  }
  return acc / double(stack.count());
}

}  // namespace uncseg
