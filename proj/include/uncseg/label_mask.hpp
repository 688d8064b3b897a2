#pragma once

#include <cstdint>
#include <vector>

namespace uncseg {

// H x W integer class map. 0 = background, 1 = LV, 2 = Myo, 3 = RV.
struct LabelMask {
  int h = 0;
  int w = 0;
  std::vector<uint8_t> labels;

  LabelMask() = default;
  LabelMask(int h_, int w_, uint8_t fill = 0)
      : h(h_), w(w_), labels(size_t(h_) * size_t(w_), fill) {}

  uint8_t& at(int r, int c) { return labels[size_t(r) * w + c]; }
  uint8_t at(int r, int c) const { return labels[size_t(r) * w + c]; }
  int64_t size() const { return int64_t(labels.size()); }

  bool operator==(const LabelMask& o) const {
    return h == o.h && w == o.w && labels == o.labels;
  }
};

}  // namespace uncseg
