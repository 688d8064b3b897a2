#pragma once

#include <utility>
#include <vector>

#include "uncseg/label_mask.hpp"

namespace uncseg {

// Binary segmentation region on a pixel grid with physical spacing in mm.
struct BinaryRegion {
  int h = 0;
  int w = 0;
  std::vector<uint8_t> mask;            // 0/1
  std::pair<float, float> spacing_mm = {1.f, 1.f};  // (row, col)

  BinaryRegion() = default;
  BinaryRegion(int h_, int w_, std::pair<float, float> spacing = {1.f, 1.f})
      : h(h_), w(w_), mask(size_t(h_) * size_t(w_), 0), spacing_mm(spacing) {}

  // Class-id slice of a label mask.
  static BinaryRegion from_labels(const LabelMask& m, uint8_t class_id,
                                  std::pair<float, float> spacing);

  uint8_t at(int r, int c) const { return mask[size_t(r) * w + c]; }
  void set(int r, int c, uint8_t v) { mask[size_t(r) * w + c] = v; }
  int64_t count() const;
  bool empty() const { return count() == 0; }
  double diagonal_mm() const;
};

// Boundary pixels: in the region with at least one 4-neighbour outside
// (off-image counts as outside).
struct Contour {
  std::vector<std::pair<int, int>> points;  // (row, col)
  std::pair<float, float> spacing_mm = {1.f, 1.f};
};

Contour extract_contour(const BinaryRegion& r);

// 2|a n b| / (|a| + |b|); both empty -> 1.
double dice(const BinaryRegion& a, const BinaryRegion& b);

// Average symmetric surface distance in mm. Throws UndefinedMetricError if
// either contour is empty.
double assd(const BinaryRegion& a, const BinaryRegion& b);

// Symmetric Hausdorff distance in mm; same empty-contour behaviour as assd.
double hausdorff(const BinaryRegion& a, const BinaryRegion& b);

// Per-pixel mean negative log likelihood of labels under probs (C x H x W,
// channel-major). mean=false returns the plain sum.
double nll(const std::vector<float>& probs, int num_classes,
           const LabelMask& labels, bool mean = true);

// Per-pixel mean Brier score; mean=false returns the sum.
double brier(const std::vector<float>& probs, int num_classes,
             const LabelMask& labels, bool mean = true);

}  // namespace uncseg
