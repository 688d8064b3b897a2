#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "uncseg/distort.hpp"
#include "uncseg/errors.hpp"

using namespace uncseg;

TEST_CASE("degree-to-parameter map endpoints and monotonicity") {
  DistortionSpec s;
  s.kind = DistortionSpec::kNoise;
  s.degree = 1;
  CHECK(s.parameter() == doctest::Approx(0.05).epsilon(1e-12));
  s.degree = 4;
  CHECK(s.parameter() == doctest::Approx(0.10).epsilon(1e-12));
  s.kind = DistortionSpec::kBlur;
  s.degree = 1;
  CHECK(s.parameter() == doctest::Approx(1.0));
  s.degree = 4;
  CHECK(s.parameter() == doctest::Approx(4.0));
  s.kind = DistortionSpec::kStretch;
  s.degree = 1;
  CHECK(s.parameter() == doctest::Approx(1.1));
  s.degree = 4;
  CHECK(s.parameter() == doctest::Approx(1.6));
  for (auto kind : {DistortionSpec::kNoise, DistortionSpec::kBlur,
                    DistortionSpec::kStretch}) {
    s.kind = kind;
    double prev = -1;
    for (int d = 1; d <= 4; ++d) {
      s.degree = d;
      CHECK(s.parameter() > prev);
      prev = s.parameter();
    }
  }
  s.degree = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.degree = 5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("kind string round trip") {
  for (auto kind : {DistortionSpec::kNoise, DistortionSpec::kBlur,
                    DistortionSpec::kStretch})
    CHECK(DistortionSpec::kind_from_string(
              DistortionSpec::kind_to_string(kind)) == kind);
  CHECK_THROWS_AS(DistortionSpec::kind_from_string("wobble"), ConfigError);
}

TEST_CASE("rician noise: sigma 0 is the identity, negative sigma throws") {
  const std::vector<float> img = {0.f, 0.25f, 0.5f, 1.0f};
  Rng rng(1);
  CHECK(rician_noise(img, 0.0, rng) == img);
  CHECK_THROWS_AS(rician_noise(img, -0.1, rng), DomainError);
}

TEST_CASE("rician noise on a zero image has Rayleigh mean sigma*sqrt(pi/2)") {
  const int n = 100000;
  const double sigma = 0.05;
  const std::vector<float> zeros(size_t(n), 0.f);
  Rng rng(77);
  const auto out = rician_noise(zeros, sigma, rng);
  double mean = 0;
  for (float v : out) mean += v;
  mean /= n;
  const double expected = sigma * std::sqrt(3.14159265358979323846 / 2.0);
  // Rayleigh stddev = sigma*sqrt(2 - pi/2); 3 standard errors.
  const double se = sigma * std::sqrt(2.0 - 3.14159265358979323846 / 2.0) /
                    std::sqrt(double(n));
  CHECK(std::abs(mean - expected) < 3.0 * se);
}

TEST_CASE("rician output stays in [0, 2]") {
  std::vector<float> img(1000);
  Rng init(3);
  for (auto& v : img) v = float(init.uniform());
  Rng rng(9);
  for (float v : rician_noise(img, 0.10, rng)) {
    CHECK(v >= 0.f);
    CHECK(v <= 2.f);
  }
}

TEST_CASE("gaussian blur: identity, constancy, mass conservation") {
  std::vector<float> img(16 * 16, 0.f);
  CHECK(gaussian_blur(img, 16, 16, 0.0) == img);

  const std::vector<float> flat(16 * 16, 0.42f);
  for (float v : gaussian_blur(flat, 16, 16, 2.5))
    CHECK(v == doctest::Approx(0.42).epsilon(1e-6));

  // Interior-supported bump: total intensity preserved within 0.1%.
  std::vector<float> bump(32 * 32, 0.f);
  for (int y = 12; y < 20; ++y)
    for (int x = 12; x < 20; ++x) bump[size_t(y) * 32 + x] = 1.f;
  const auto blurred = gaussian_blur(bump, 32, 32, 1.5);
  const double before = std::accumulate(bump.begin(), bump.end(), 0.0);
  const double after = std::accumulate(blurred.begin(), blurred.end(), 0.0);
  CHECK(std::abs(after - before) / before < 1e-3);
  CHECK_THROWS_AS(gaussian_blur(bump, 32, 32, -1.0), DomainError);
}

TEST_CASE("blur reduces peak height") {
  std::vector<float> spike(15 * 15, 0.f);
  spike[7 * 15 + 7] = 1.f;
  const auto out = gaussian_blur(spike, 15, 15, 1.0);
  CHECK(out[7 * 15 + 7] < 0.5f);
  CHECK(out[7 * 15 + 7] > 0.f);
}

namespace {

std::pair<std::vector<float>, LabelMask> disk_case(int n, double radius) {
  std::vector<float> img(size_t(n) * n, 0.1f);
  LabelMask mask(n, n);
  const double c = (n - 1) / 2.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      if (std::hypot(y - c, x - c) < radius) {
        mask.at(y, x) = 1;
        img[size_t(y) * n + x] = 0.9f;
      }
  return {img, mask};
}

int64_t mask_count(const LabelMask& m) {
  int64_t n = 0;
  for (uint8_t v : m.labels) n += v != 0;
  return n;
}

}  // namespace

TEST_CASE("stretch: factor 1 identity, growth, far-field bit-exactness") {
  auto [img, mask] = disk_case(48, 6.0);
  const StretchResult id = stretch(img, mask, 1.0);
  CHECK(id.image == img);
  CHECK(id.mask == mask);
  CHECK(!id.skipped);

  const StretchResult grown = stretch(img, mask, 1.3);
  CHECK(mask_count(grown.mask) > mask_count(mask));

  // Beyond twice the structure radius nothing may change, bit-exactly.
  const double c = (48 - 1) / 2.0;
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 48; ++x)
      if (std::hypot(y - c, x - c) >= 2.0 * 6.0 + 1.5) {
        CHECK(grown.image[size_t(y) * 48 + x] == img[size_t(y) * 48 + x]);
        CHECK(grown.mask.at(y, x) == mask.at(y, x));
      }
  CHECK_THROWS_AS(stretch(img, mask, 0.9), DomainError);
}

TEST_CASE("stretch with empty foreground is a flagged no-op") {
  std::vector<float> img(16 * 16, 0.3f);
  LabelMask mask(16, 16);
  const StretchResult r = stretch(img, mask, 1.4);
  CHECK(r.skipped);
  CHECK(r.image == img);
  CHECK(r.mask == mask);
}

TEST_CASE("stretch is deterministic") {
  auto [img, mask] = disk_case(32, 5.0);
  const StretchResult a = stretch(img, mask, 1.45);
  const StretchResult b = stretch(img, mask, 1.45);
  CHECK(a.image == b.image);
  CHECK(a.mask == b.mask);
}
