#pragma once

#include <cstdint>
#include <string>

#include "uncseg/dataset.hpp"
#include "uncseg/rng.hpp"

namespace uncseg {

// Synthetic cardiac-like phantom: bright LV disk enclosed by a Myo ring with
// an adjacent RV crescent, over a textured background. Apical/basal slices
// (first and last per subject) get smaller structures and reduced contrast.
struct PhantomConfig {
  int image_size = 64;
  int subjects = 120;
  int slices_per_subject = 5;
  int train_subjects = 80;
  int val_subjects = 10;
  int test_subjects = 30;
  float spacing_mm = 1.8f;
  float contrast_shift = 0.f;  // dataset-shift analogue; 0 = clean
  uint64_t seed = 7;

  // Geometry/intensity variation, in pixels at image_size == 64 (scaled).
  float lv_radius_lo = 8.f, lv_radius_hi = 12.f;
  float myo_thickness_lo = 3.f, myo_thickness_hi = 5.f;
  float noise_sigma = 0.02f;

  void validate() const;
};

struct PhantomSet {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Deterministic per cfg.seed; subjects are generated from independent
// substreams so generation order does not matter.
PhantomSet generate_phantom(const PhantomConfig& cfg);

// Mask topology: classes in {0..3}, the Myo ring encloses LV (no LV pixel
// touches background or RV), and RV touches Myo when present.
bool valid_topology(const LabelMask& mask);

}  // namespace uncseg
