#pragma once

#include <string>
#include <vector>

#include "uncseg/label_mask.hpp"
#include "uncseg/rng.hpp"

namespace uncseg {

// Controlled out-of-distribution image corruption. Degrees 1..4 interpolate
// the parameter endpoints linearly.
struct DistortionSpec {
  enum Kind { kNoise, kBlur, kStretch };

  Kind kind = kNoise;
  int degree = 1;  // 1..4

  // noise sigma in [0.05, 0.10], blur sigma in [1.0, 4.0] px,
  // stretch factor in [1.1, 1.6].
  double parameter() const;

  void validate() const;
  static Kind kind_from_string(const std::string& s);
  static std::string kind_to_string(Kind k);
};

// out = sqrt((x + s*e1)^2 + (s*e2)^2), e1/e2 iid standard normal, clamped
// to [0, 2]. Input intensities are expected in [0,1].
std::vector<float> rician_noise(const std::vector<float>& image, double sigma,
                                Rng& rng);

// Separable Gaussian, kernel truncated at 3 sigma (odd width) and
// renormalized; symmetric border reflection. sigma 0 is the identity.
std::vector<float> gaussian_blur(const std::vector<float>& image, int h, int w,
                                 double sigma_px);

struct StretchResult {
  std::vector<float> image;
  LabelMask mask;
  bool skipped = false;  // empty foreground: no-op with a warning flag
};

// Radial magnification centered at the foreground centroid. Magnification
// `factor` at the center, cosine falloff to 1 at twice the structure radius;
// bilinear resampling for the image, nearest for the mask. Pixels beyond the
// falloff radius are copied bit-exactly.
StretchResult stretch(const std::vector<float>& image, const LabelMask& mask,
                      double factor);

}  // namespace uncseg
