#include "uncseg/distort.hpp"

#include <algorithm>
#include <cmath>

#include "uncseg/errors.hpp"

namespace uncseg {

double DistortionSpec::parameter() const {
  validate();
  const double t = double(degree - 1) / 3.0;
  switch (kind) {
    case kNoise: return 0.05 + t * (0.10 - 0.05);
    case kBlur: return 1.0 + t * (4.0 - 1.0);
    default: return 1.1 + t * (1.6 - 1.1);
  }
}

void DistortionSpec::validate() const {
  if (degree < 1 || degree > 4)
    throw ConfigError("distortion degree must be 1..4, got " +
                      std::to_string(degree));
}

DistortionSpec::Kind DistortionSpec::kind_from_string(const std::string& s) {
  if (s == "noise") return kNoise;
  if (s == "blur") return kBlur;
  if (s == "stretch") return kStretch;
  throw ConfigError("unknown distortion kind '" + s + "'");
}

std::string DistortionSpec::kind_to_string(Kind k) {
  switch (k) {
    case kNoise: return "noise";
    case kBlur: return "blur";
    default: return "stretch";
  }
}

std::vector<float> rician_noise(const std::vector<float>& image, double sigma,
                                Rng& rng) {
  if (sigma < 0) throw DomainError("rician_noise: sigma must be >= 0");
  std::vector<float> out(image.size());
  for (size_t i = 0; i < image.size(); ++i) {
    const double re = double(image[i]) + sigma * rng.normal();
    const double im = sigma * rng.normal();
    out[i] = float(std::clamp(std::sqrt(re * re + im * im), 0.0, 2.0));
  }
  return out;
}

namespace {
// Symmetric reflection: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
int reflect_index(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}
}  // namespace

std::vector<float> gaussian_blur(const std::vector<float>& image, int h, int w,
                                 double sigma_px) {
  if (sigma_px < 0) throw DomainError("gaussian_blur: sigma must be >= 0");
  if (sigma_px == 0.0) return image;
  const int radius = std::max(1, int(std::ceil(3.0 * sigma_px)));
  std::vector<double> kernel(size_t(2 * radius + 1));
  double norm = 0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * double(i) * i / (sigma_px * sigma_px));
    kernel[size_t(i + radius)] = v;
    norm += v;
  }
  for (double& v : kernel) v /= norm;

  std::vector<float> tmp(image.size());
  // horizontal pass
  for (int y = 0; y < h; ++y) {
    const float* row = image.data() + size_t(y) * w;
    float* dst = tmp.data() + size_t(y) * w;
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[size_t(k + radius)] * row[reflect_index(x + k, w)];
      dst[x] = float(acc);
    }
  }
  // vertical pass
  std::vector<float> out(image.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[size_t(k + radius)] *
               tmp[size_t(reflect_index(y + k, h)) * w + x];
      out[size_t(y) * w + x] = float(acc);
    }
  }
  return out;
}

StretchResult stretch(const std::vector<float>& image, const LabelMask& mask,
                      double factor) {
  if (factor < 1.0) throw DomainError("stretch: factor must be >= 1");
  const int h = mask.h, w = mask.w;
  StretchResult res;
  res.image = image;
  res.mask = mask;
  if (factor == 1.0) return res;

  // Foreground centroid and radius.
  double cy = 0, cx = 0;
  int64_t n = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask.at(y, x)) {
        cy += y;
        cx += x;
        ++n;
      }
  if (n == 0) {
    res.skipped = true;
    return res;
  }
  cy /= double(n);
  cx /= double(n);
  double r_struct = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask.at(y, x))
        r_struct = std::max(r_struct, std::hypot(y - cy, x - cx));
  const double R = 2.0 * std::max(r_struct, 1.0);  // falloff radius

  auto bilinear = [&](double sy, double sx) -> float {
    sy = std::clamp(sy, 0.0, double(h - 1));
    sx = std::clamp(sx, 0.0, double(w - 1));
    const int y0 = int(sy), x0 = int(sx);
    const int y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
    const double fy = sy - y0, fx = sx - x0;
    const double v =
        (1 - fy) * ((1 - fx) * image[size_t(y0) * w + x0] +
                    fx * image[size_t(y0) * w + x1]) +
        fy * ((1 - fx) * image[size_t(y1) * w + x0] +
              fx * image[size_t(y1) * w + x1]);
    return float(v);
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dy = y - cy, dx = x - cx;
      const double r = std::hypot(dy, dx);
      if (r >= R) continue;  // far field untouched bit-exactly
      const double falloff = 0.5 * (1.0 + std::cos(3.14159265358979323846 *
                                                   (r / R)));
      const double mag = 1.0 + (factor - 1.0) * falloff;
      const double sy = cy + dy / mag;
      const double sx = cx + dx / mag;
      res.image[size_t(y) * w + x] = bilinear(sy, sx);
      const int ny = std::clamp(int(std::lround(sy)), 0, h - 1);
      const int nx = std::clamp(int(std::lround(sx)), 0, w - 1);
      res.mask.at(y, x) = mask.at(ny, nx);
    }
  }
  return res;
}

}  // namespace uncseg
