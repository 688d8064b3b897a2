#include <cmath>
#include <map>

#include "doctest.h"
#include "uncseg/bayes.hpp"
#include "uncseg/sampling.hpp"
#include "uncseg/unet.hpp"

using namespace uncseg;

namespace {

ModelConfig small_cfg(ModelConfig::Variant v) {
  ModelConfig cfg;
  cfg.variant = v;
  cfg.depth = 3;
  cfg.base_filters = 4;
  cfg.num_classes = 4;
  cfg.input_h = 16;
  cfg.input_w = 16;
  return cfg;
}

// Independent parameter count: 2 convs per block at D-1 encoder levels plus
// the bottleneck, 2 per decoder block, then the two head convs.
int64_t expected_param_count(const ModelConfig& cfg) {
  auto conv = [](int cin, int cout, int k) {
    return int64_t(cout) * cin * k * k + cout;
  };
  auto filters = [&](int level) { return cfg.base_filters << level; };
  int64_t total = 0;
  for (int l = 0; l < cfg.depth - 1; ++l) {
    const int cin = l == 0 ? 1 : filters(l - 1);
    total += conv(cin, filters(l), 3) + conv(filters(l), filters(l), 3);
  }
  total += conv(filters(cfg.depth - 2), filters(cfg.depth - 1), 3) +
           conv(filters(cfg.depth - 1), filters(cfg.depth - 1), 3);
  for (int l = cfg.depth - 2; l >= 0; --l) {
    const int cin = filters(l + 1) + filters(l);
    total += conv(cin, filters(l), 3) + conv(filters(l), filters(l), 3);
  }
  total += conv(cfg.base_filters, cfg.base_filters, 1) +
           conv(cfg.base_filters, cfg.num_classes, 1);
  if (cfg.variant == ModelConfig::kBbb) total *= 2;  // (mu, rho) per weight
  return total;
}

Tensor random_input(Rng& rng, int n, int h, int w) {
  std::vector<float> v(size_t(n) * h * w);
  for (auto& x : v) x = float(rng.uniform(-1.0, 1.0));
  return Tensor::from_data({n, 1, h, w}, std::move(v));
}

}  // namespace

TEST_CASE("forward produces per-pixel simplex of the right shape") {
  for (auto variant :
       {ModelConfig::kPlain, ModelConfig::kBbb, ModelConfig::kMcd}) {
    UNet model(small_cfg(variant), Rng(1));
    Rng rng(2);
    Tensor x = random_input(rng, 2, 16, 16);
    Rng frng(3);
    auto out = model.forward(x, true, frng);
    REQUIRE(out.probs.shape() == Shape{2, 4, 16, 16});
    const auto& p = out.probs.data();
    for (int n = 0; n < 2; ++n)
      for (int px = 0; px < 16 * 16; ++px) {
        double s = 0;
        for (int c = 0; c < 4; ++c) {
          const float v = p[size_t(((n * 4 + c) * 256) + px)];
          CHECK(v >= 0.f);
          s += v;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-5));
      }
  }
}

TEST_CASE("parameter counts match the closed-form architecture formula") {
  for (auto variant :
       {ModelConfig::kPlain, ModelConfig::kBbb, ModelConfig::kMcd}) {
    const ModelConfig cfg = small_cfg(variant);
    UNet model(cfg, Rng(1));
    CHECK(model.parameter_count() == expected_param_count(cfg));
  }
  // Default-size config too.
  ModelConfig cfg;
  cfg.variant = ModelConfig::kBbb;
  UNet model(cfg, Rng(1));
  CHECK(model.parameter_count() == expected_param_count(cfg));
}

TEST_CASE("plain and mcd-without-sampling forwards are deterministic") {
  UNet model(small_cfg(ModelConfig::kPlain), Rng(5));
  Rng rng(6);
  Tensor x = random_input(rng, 1, 16, 16);
  Rng r1(7), r2(8);
  auto a = model.forward(x, true, r1);
  auto b = model.forward(x, true, r2);
  CHECK(a.probs.data() == b.probs.data());
  CHECK(a.kl_total.item() == 0.f);

  UNet mcd(small_cfg(ModelConfig::kMcd), Rng(5));
  auto c = mcd.forward(x, false, r1);
  auto d = mcd.forward(x, false, r2);
  CHECK(c.probs.data() == d.probs.data());
  CHECK(d.kl_total.item() == 0.f);
}

TEST_CASE("mcd sampling and bbb sampling vary across draws") {
  Rng rng(9);
  Tensor x = random_input(rng, 1, 16, 16);
  for (auto variant : {ModelConfig::kBbb, ModelConfig::kMcd}) {
    UNet model(small_cfg(variant), Rng(10));
    Rng r1(11), r2(12);
    auto a = model.forward(x, true, r1);
    auto b = model.forward(x, true, r2);
    CHECK(a.probs.data() != b.probs.data());
  }
}

TEST_CASE("bbb with rho -> -40 collapses to a deterministic network") {
  UNet model(small_cfg(ModelConfig::kBbb), Rng(13));
  auto params = model.snapshot_parameters();
  for (auto& [name, values] : params)
    if (name.size() > 4 && name.substr(name.size() - 4) == ".rho")
      for (auto& v : values) v = -40.f;
  model.set_parameters(params);
  Rng rng(14);
  std::vector<float> img(16 * 16);
  for (auto& v : img) v = float(rng.uniform(0.0, 1.0));
  Rng s1(15);
  SampleStack stack = sample_stack(model, img, 6, s1);
  for (int t = 1; t < stack.count(); ++t)
    CHECK(stack.samples[size_t(t)] == stack.samples[0]);
}

TEST_CASE("kl_total equals the sum of per-layer closed forms") {
  const ModelConfig cfg = small_cfg(ModelConfig::kBbb);
  UNet model(cfg, Rng(20));
  Rng rng(21);
  Tensor x = random_input(rng, 1, 16, 16);
  Rng frng(22);
  auto out = model.forward(x, true, frng);

  // Recompute from the snapshot: pair each .mu with its .rho.
  const auto params = model.snapshot_parameters();
  double expected = 0;
  for (const auto& [name, mu] : params) {
    if (name.size() < 3 || name.substr(name.size() - 3) != ".mu") continue;
    const auto it = params.find(name.substr(0, name.size() - 3) + ".rho");
    REQUIRE(it != params.end());
    expected += kl_factorized_gaussian_value(mu, it->second, cfg.prior);
  }
  CHECK(out.kl_total.item() ==
        doctest::Approx(expected).epsilon(1e-5));
  CHECK(out.kl_total.item() > 0.f);
}

TEST_CASE("snapshot/set parameter round trip preserves outputs") {
  UNet a(small_cfg(ModelConfig::kPlain), Rng(30));
  UNet b(small_cfg(ModelConfig::kPlain), Rng(31));  // different init
  Rng rng(32);
  Tensor x = random_input(rng, 1, 16, 16);
  Rng frng(33);
  auto ya = a.forward(x, false, frng);
  b.set_parameters(a.snapshot_parameters());
  auto yb = b.forward(x, false, frng);
  CHECK(ya.probs.data() == yb.probs.data());
}

TEST_CASE("config validation") {
  ModelConfig cfg = small_cfg(ModelConfig::kPlain);
  cfg.input_h = 18;  // not divisible by 2^(depth-1)
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_cfg(ModelConfig::kMcd);
  cfg.dropout.rate = 1.f;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_cfg(ModelConfig::kBbb);
  cfg.prior.sigma_prior = 0.f;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(ModelConfig::variant_from_string("bbb") == ModelConfig::kBbb);
  CHECK_THROWS_AS(ModelConfig::variant_from_string("vae"), ConfigError);
}

TEST_CASE("argmax_mask breaks ties toward the lower class") {
  // 2 classes, 1 pixel, equal probability.
  const std::vector<float> p = {0.5f, 0.5f};
  const LabelMask m = argmax_mask(p, 2, 1, 1);
  CHECK(m.at(0, 0) == 0);
}

TEST_CASE("ensemble stack has one sample per member") {
  UNet m1(small_cfg(ModelConfig::kPlain), Rng(40));
  UNet m2(small_cfg(ModelConfig::kPlain), Rng(41));
  std::vector<UNet*> members = {&m1, &m2};
  Rng rng(42);
  std::vector<float> img(16 * 16);
  for (auto& v : img) v = float(rng.uniform(0.0, 1.0));
  const SampleStack s = sample_stack_ensemble(members, img);
  CHECK(s.count() == 2);
  CHECK(s.samples[0] != s.samples[1]);
  CHECK(s.source == SampleStack::kEnsemble);
  // Mean really is the elementwise average.
  for (size_t i = 0; i < s.mean.size(); ++i)
    CHECK(s.mean[i] ==
          doctest::Approx(0.5 * (double(s.samples[0][i]) + s.samples[1][i]))
              .epsilon(1e-6));
}
