#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "uncseg/rng.hpp"
#include "uncseg/uncertainty.hpp"

using namespace uncseg;

namespace {

SampleStack random_stack(Rng& rng, int T, int c = 3, int h = 6, int w = 6) {
  SampleStack s;
  s.channels = c;
  s.h = h;
  s.w = w;
  s.source = SampleStack::kBbb;
  for (int t = 0; t < T; ++t) {
    std::vector<float> probs(size_t(c) * h * w);
    for (int p = 0; p < h * w; ++p) {
      double norm = 0;
      std::vector<double> raw(static_cast<size_t>(c));
      for (int k = 0; k < c; ++k) {
        raw[size_t(k)] = rng.uniform(0.05, 1.0);
        norm += raw[size_t(k)];
      }
      for (int k = 0; k < c; ++k)
        probs[size_t(k) * h * w + p] = float(raw[size_t(k)] / norm);
    }
    s.samples.push_back(std::move(probs));
  }
  compute_stack_mean(s);
  return s;
}

}  // namespace

TEST_CASE("predictive entropy hand values") {
  // Uniform over 4 classes -> ln 4 per pixel.
  const std::vector<float> uniform(4 * 2 * 2, 0.25f);
  CHECK(predictive_entropy(uniform, 4, 2, 2) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-6));
  // One-hot -> 0 (0 log 0 := 0).
  std::vector<float> onehot(2 * 1 * 1, 0.f);
  onehot[0] = 1.f;
  CHECK(predictive_entropy(onehot, 2, 1, 1) == doctest::Approx(0.0));
  // Binary (0.5, 0.5) -> ln 2.
  const std::vector<float> half(2 * 1 * 1, 0.5f);
  CHECK(predictive_entropy(half, 2, 1, 1) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("mutual information is zero for deterministic stacks") {
  Rng rng(11);
  SampleStack s = random_stack(rng, 1);
  // Replicate the single sample: no disagreement, MI must be ~0.
  for (int t = 0; t < 7; ++t) s.samples.push_back(s.samples[0]);
  compute_stack_mean(s);
  CHECK(mutual_information(s) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(dice_within_samples(s, 1) == doctest::Approx(1.0));
}

TEST_CASE("mutual information is nonnegative (Jensen)") {
  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const SampleStack s = random_stack(rng, 2 + rng.uniform_int(8));
    CHECK(mutual_information(s) >= -1e-9);
    // MI <= H(mean): conditional entropy is nonnegative.
    CHECK(mutual_information(s) <=
          predictive_entropy(s.mean, s.channels, s.h, s.w) + 1e-9);
  }
}

TEST_CASE("mutual information positive under real disagreement") {
  SampleStack s;
  s.channels = 2;
  s.h = 1;
  s.w = 1;
  s.samples = {{1.f, 0.f}, {0.f, 1.f}};  // two confident, opposite draws
  compute_stack_mean(s);
  // H(mean)=ln2, mean sample entropy = 0 -> MI = ln 2.
  CHECK(mutual_information(s) == doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("uncertainty measures are invariant to sample order") {
  Rng rng(23);
  SampleStack s = random_stack(rng, 6);
  SampleStack p = s;
  std::reverse(p.samples.begin(), p.samples.end());
  compute_stack_mean(p);
  CHECK(mutual_information(s) == doctest::Approx(mutual_information(p)));
  CHECK(dice_within_samples(s, 1) == doctest::Approx(dice_within_samples(p, 1)));
  CHECK(assd_within_samples(s, 1, {1.f, 1.f}) ==
        doctest::Approx(assd_within_samples(p, 1, {1.f, 1.f})));
}

TEST_CASE("T=1 stacks have zero mutual information") {
  Rng rng(5);
  const SampleStack s = random_stack(rng, 1);
  CHECK(mutual_information(s) == 0.0);
}

TEST_CASE("within-sample empty conventions") {
  // Build a stack whose argmax is empty for class 1 in every sample.
  SampleStack s;
  s.channels = 2;
  s.h = 4;
  s.w = 4;
  std::vector<float> bg(2 * 16, 0.f);
  for (int p = 0; p < 16; ++p) bg[size_t(p)] = 1.f;  // class 0 everywhere
  s.samples = {bg, bg, bg};
  compute_stack_mean(s);
  CHECK(dice_within_samples(s, 1) == doctest::Approx(1.0));  // both empty
  CHECK(assd_within_samples(s, 1, {1.f, 1.f}) == doctest::Approx(0.0));

  // One sample predicts class 1 somewhere, the mean argmax stays empty:
  // one-empty pairs count the image diagonal.
  std::vector<float> fg = bg;
  fg[0] = 0.1f;
  fg[16] = 0.9f;  // pixel 0 -> class 1
  SampleStack s2;
  s2.channels = 2;
  s2.h = 4;
  s2.w = 4;
  s2.samples = {bg, bg, fg};
  compute_stack_mean(s2);
  const double diag = std::sqrt(2.0) * 4.0;  // 4x4 at 1 mm spacing
  CHECK(assd_within_samples(s2, 1, {1.f, 1.f}) ==
        doctest::Approx(diag / 3.0).epsilon(1e-9));
  CHECK(dice_within_samples(s2, 1) == doctest::Approx(2.0 / 3.0));
}
