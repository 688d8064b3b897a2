#include "uncseg/phantom.hpp"

#include <algorithm>
#include <cmath>

#include "uncseg/distort.hpp"
#include "uncseg/errors.hpp"

namespace uncseg {

void PhantomConfig::validate() const {
  if (image_size < 16) throw ConfigError("phantom: image_size must be >= 16");
  if (subjects <= 0) throw ConfigError("phantom: subjects must be > 0");
  if (slices_per_subject < 3)
    throw ConfigError("phantom: slices_per_subject must be >= 3");
  if (train_subjects + val_subjects + test_subjects != subjects)
    throw ConfigError("phantom: split sizes must sum to subjects");
  if (!(spacing_mm > 0)) throw ConfigError("phantom: spacing must be > 0");
  if (lv_radius_lo <= 0 || lv_radius_hi < lv_radius_lo ||
      myo_thickness_lo <= 0 || myo_thickness_hi < myo_thickness_lo)
    throw ConfigError("phantom: geometry ranges are not well-ordered");
  // Smallest slice scale is 0.55; the ring must stay at least one pixel
  // thick there or the LV enclosure invariant breaks.
  const float px_scale = float(image_size) / 64.f;
  if (myo_thickness_lo * px_scale * 0.55f < 1.2f)
    throw ConfigError("phantom: myo thickness too small for image size");
}

namespace {

constexpr double kPi = 3.14159265358979323846;

struct SubjectParams {
  double cy, cx;          // heart center
  double lv_r, myo_th;    // LV radius, Myo ring thickness (px)
  double rv_r;            // RV disk radius
  double angle;           // RV placement angle
  double bg, lv_i, myo_i, rv_i;  // intensities
  double tex_fy, tex_fx, tex_phase, tex_amp;
};

SegCase make_slice(const PhantomConfig& cfg, const SubjectParams& sp,
                   int subject_id, int slice_index, Rng& rng) {
  const int n = cfg.image_size;
  SegCase c;
  c.h = n;
  c.w = n;
  c.subject_id = subject_id;
  c.slice_index = slice_index;
  c.spacing_mm = cfg.spacing_mm * (1.f + 0.15f * cfg.contrast_shift);
  c.image.assign(size_t(n) * n, 0.f);
  c.mask = LabelMask(n, n);

  // Apical/basal slices: smaller structures, weaker contrast.
  const double mid = 0.5 * (cfg.slices_per_subject - 1);
  const double rel = mid > 0 ? std::abs(slice_index - mid) / mid : 0.0;
  const double scale = 1.0 - 0.45 * std::pow(rel, 1.5);
  const double contrast = 1.0 - 0.5 * std::pow(rel, 1.5);

  const double cy = sp.cy + rng.uniform(-1.0, 1.0);
  const double cx = sp.cx + rng.uniform(-1.0, 1.0);
  const double lv_r = sp.lv_r * scale;
  const double myo_out = (sp.lv_r + sp.myo_th) * scale;
  const double rv_r = sp.rv_r * scale;
  const double rv_cy = cy + std::sin(sp.angle) * (myo_out + 0.55 * rv_r);
  const double rv_cx = cx + std::cos(sp.angle) * (myo_out + 0.55 * rv_r);

  auto toward_bg = [&](double v) {
    double out = sp.bg + (v - sp.bg) * contrast;
    // dataset-shift analogue: pull foreground further toward background
    return sp.bg + (out - sp.bg) * (1.0 - double(cfg.contrast_shift));
  };

  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double r = std::hypot(y - cy, x - cx);
      const double rrv = std::hypot(y - rv_cy, x - rv_cx);
      uint8_t label = 0;
      double intensity =
          sp.bg + sp.tex_amp * std::sin(sp.tex_fy * y + sp.tex_fx * x +
                                        sp.tex_phase);
      if (r < lv_r) {
        label = 1;
        intensity = toward_bg(sp.lv_i);
      } else if (r < myo_out) {
        label = 2;
        intensity = toward_bg(sp.myo_i);
      } else if (rrv < rv_r) {
        label = 3;
        intensity = toward_bg(sp.rv_i);
      }
      c.mask.at(y, x) = label;
      c.image[size_t(y) * n + x] = float(intensity);
    }
  }
  // Soften edges, then mild global noise.
  c.image = gaussian_blur(c.image, n, n, 0.7);
  for (float& v : c.image)
    v = std::clamp(v + float(cfg.noise_sigma * rng.normal()), 0.f, 1.f);
  return c;
}

void make_subject(const PhantomConfig& cfg, int subject_id, Dataset& out) {
  Rng rng = Rng(cfg.seed).fork(uint64_t(subject_id));
  const int n = cfg.image_size;
  const double px = double(n) / 64.0;
  SubjectParams sp;
  sp.cy = n / 2.0 + rng.uniform(-3.0, 3.0) * px;
  sp.cx = n / 2.0 + rng.uniform(-3.0, 3.0) * px;
  sp.lv_r = rng.uniform(cfg.lv_radius_lo, cfg.lv_radius_hi) * px;
  sp.myo_th = rng.uniform(cfg.myo_thickness_lo, cfg.myo_thickness_hi) * px;
  sp.rv_r = sp.lv_r * rng.uniform(0.7, 0.95);
  sp.angle = rng.uniform(0.0, 2.0 * kPi);
  sp.bg = rng.uniform(0.10, 0.20);
  sp.lv_i = rng.uniform(0.75, 0.90);
  sp.myo_i = rng.uniform(0.38, 0.48);
  sp.rv_i = rng.uniform(0.58, 0.70);
  sp.tex_fy = rng.uniform(0.05, 0.20);
  sp.tex_fx = rng.uniform(0.05, 0.20);
  sp.tex_phase = rng.uniform(0.0, 2.0 * kPi);
  sp.tex_amp = rng.uniform(0.01, 0.04);
  for (int s = 0; s < cfg.slices_per_subject; ++s)
    out.push_back(make_slice(cfg, sp, subject_id, s, rng));
}

}  // namespace

PhantomSet generate_phantom(const PhantomConfig& cfg) {
  cfg.validate();
  PhantomSet set;
  for (int s = 0; s < cfg.subjects; ++s) {
    Dataset* dst = &set.test;
    if (s < cfg.train_subjects) dst = &set.train;
    else if (s < cfg.train_subjects + cfg.val_subjects) dst = &set.val;
    make_subject(cfg, s, *dst);
  }
  return set;
}

bool valid_topology(const LabelMask& mask) {
  bool has_rv = false, rv_touches_myo = false;
  for (int y = 0; y < mask.h; ++y) {
    for (int x = 0; x < mask.w; ++x) {
      const uint8_t v = mask.at(y, x);
      if (v > 3) return false;
      const auto neighbor = [&](int dy, int dx) -> int {
        const int ny = y + dy, nx = x + dx;
        if (ny < 0 || ny >= mask.h || nx < 0 || nx >= mask.w) return -1;
        return mask.at(ny, nx);
      };
      if (v == 1) {
        // LV may only touch LV or Myo (off-image counts as a breach).
        for (auto [dy, dx] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
          const int nv = neighbor(dy, dx);
          if (nv != 1 && nv != 2) return false;
        }
      } else if (v == 3) {
        has_rv = true;
        for (auto [dy, dx] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}})
          if (neighbor(dy, dx) == 2) rv_touches_myo = true;
      }
    }
  }
  return !has_rv || rv_touches_myo;
}

}  // namespace uncseg
