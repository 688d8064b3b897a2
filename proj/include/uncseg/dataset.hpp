#pragma once

#include <string>
#include <vector>

#include "uncseg/label_mask.hpp"

namespace uncseg {

// One 2D slice: intensity image in [0,1] plus its label mask and metadata.
struct SegCase {
  int h = 0;
  int w = 0;
  std::vector<float> image;
  LabelMask mask;
  int subject_id = 0;
  int slice_index = 0;
  float spacing_mm = 1.f;

  std::string id() const {
    return "s" + std::to_string(subject_id) + "_" +
           std::to_string(slice_index);
  }
};

using Dataset = std::vector<SegCase>;

// Archive layout: per case, image_<i> (f32 [H,W]) and mask_<i> (u8 [H,W]),
// with subject_id/slice_index/spacing_mm/split attrs on the image entry.
void save_dataset(const std::string& dir, const Dataset& cases,
                  const std::string& split, bool force);
Dataset load_dataset(const std::string& dir);

}  // namespace uncseg
