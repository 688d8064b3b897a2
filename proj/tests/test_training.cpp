#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "uncseg/ops.hpp"
#include "uncseg/phantom.hpp"
#include "uncseg/train.hpp"
#include "uncseg/unet.hpp"

using namespace uncseg;

namespace {

// Small, fast phantom family for training smoke tests (32x32).
PhantomConfig smoke_phantom(int train_subjects = 10) {
  PhantomConfig cfg;
  cfg.image_size = 32;
  cfg.subjects = train_subjects + 4;
  cfg.train_subjects = train_subjects;
  cfg.val_subjects = 2;
  cfg.test_subjects = 2;
  cfg.slices_per_subject = 3;
  cfg.myo_thickness_lo = 4.5f;
  cfg.myo_thickness_hi = 5.5f;
  return cfg;
}

ModelConfig smoke_model(ModelConfig::Variant v) {
  ModelConfig cfg;
  cfg.variant = v;
  cfg.depth = 3;
  cfg.base_filters = 4;
  cfg.input_h = 32;
  cfg.input_w = 32;
  return cfg;
}

TrainConfig smoke_train(int epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.lambda = 0.0;
  cfg.batch_size = 4;
  cfg.val_samples = 2;
  cfg.lr_initial = 3e-3;
  cfg.lr_switch_epoch = epochs;  // constant lr in the smoke runs
  cfg.aug_rotate_deg = 0.0;      // no augmentation: the smoke runs test the
  cfg.aug_translate_px = 0.0;    // optimizer, not generalization
  cfg.aug_scale_lo = 1.0;
  cfg.aug_scale_hi = 1.0;
  return cfg;
}

}  // namespace

TEST_CASE("elbo_loss hand value: one pixel, p(true)=0.5, lambda=1, kl=2") {
  Tensor probs = Tensor::from_data({1, 2, 1, 1}, {0.5f, 0.5f});
  LabelMask m(1, 1);
  m.at(0, 0) = 1;
  Tensor kl = Tensor::from_data({1}, {2.f});
  const Tensor loss = elbo_loss(probs, {m}, kl, 1.0, 1);
  CHECK(loss.item() == doctest::Approx(std::log(2.0) + 2.0).epsilon(1e-6));
  CHECK_THROWS_AS(elbo_loss(probs, {m}, kl, -1.0, 1), DomainError);
  CHECK_THROWS_AS(elbo_loss(probs, {m}, kl, 1.0, 0), DomainError);
}

TEST_CASE("elbo decomposition: loss == ce + scaled kl at every configuration") {
  Tensor kl = Tensor::from_data({1}, {34.5f});
  Rng rng(3);
  std::vector<float> p(2 * 2 * 4 * 4);
  for (size_t i = 0; i < p.size(); i += 2) {
    p[i] = float(rng.uniform(0.05, 0.95));
  }
  // normalize channel pairs (channel-major per sample)
  std::vector<float> probs(2 * 2 * 4 * 4);
  for (int n = 0; n < 2; ++n)
    for (int px = 0; px < 16; ++px) {
      const float a = float(rng.uniform(0.05, 0.95));
      probs[size_t(n * 32 + px)] = a;
      probs[size_t(n * 32 + 16 + px)] = 1.f - a;
    }
  std::vector<LabelMask> labels(2, LabelMask(4, 4));
  for (auto& l : labels)
    for (auto& v : l.labels) v = uint8_t(rng.uniform_int(2));
  Tensor pt = Tensor::from_data({2, 2, 4, 4}, probs);
  const double ce = cross_entropy(pt, labels).item();
  for (const double lambda : {0.0, 0.1, 1.0, 10.0, 30.0}) {
    for (const int mb : {1, 7}) {
      const double loss = elbo_loss(pt, labels, kl, lambda, mb).item();
      CHECK(loss == doctest::Approx(ce + lambda * 34.5 / (mb * 2.0 * 16.0))
                        .epsilon(1e-6));
    }
  }
}

TEST_CASE("normalization hand values and the stddev switch") {
  DatasetStats stats;
  stats.mean = 0.5;
  stats.variance = 0.04;
  const std::vector<float> img = {0.7f};
  const auto by_var =
      normalize_and_crop(img, 1, 1, stats, TrainConfig::kVariance, 0);
  CHECK(by_var[0] == doctest::Approx(5.0).epsilon(1e-6));
  const auto by_std =
      normalize_and_crop(img, 1, 1, stats, TrainConfig::kStddev, 0);
  CHECK(by_std[0] == doctest::Approx(1.0).epsilon(1e-6));
  DatasetStats degenerate;
  degenerate.variance = 0.0;
  CHECK_THROWS_AS(
      normalize_and_crop(img, 1, 1, degenerate, TrainConfig::kVariance, 0),
      DomainError);
}

TEST_CASE("center crop") {
  std::vector<float> img(6 * 6);
  for (size_t i = 0; i < img.size(); ++i) img[i] = float(i);
  DatasetStats stats;
  stats.mean = 0.0;
  stats.variance = 1.0;
  const auto cropped =
      normalize_and_crop(img, 6, 6, stats, TrainConfig::kVariance, 4);
  REQUIRE(cropped.size() == 16);
  CHECK(cropped[0] == 7.f);  // img(1,1)
  CHECK(cropped[15] == 28.f);  // img(4,4)
  LabelMask m(6, 6);
  m.at(1, 1) = 3;
  const LabelMask mc = crop_mask(m, 4);
  CHECK(mc.at(0, 0) == 3);
}

TEST_CASE("compute_stats over a two-image dataset") {
  SegCase a, b;
  a.h = a.w = b.h = b.w = 1;
  a.image = {0.f};
  b.image = {1.f};
  a.mask = LabelMask(1, 1);
  b.mask = LabelMask(1, 1);
  const DatasetStats s = compute_stats({a, b});
  CHECK(s.mean == doctest::Approx(0.5));
  CHECK(s.variance == doctest::Approx(0.25));
}

TEST_CASE("affine_resample identity transform is bit-exact") {
  Rng rng(8);
  std::vector<float> img(12 * 12);
  for (auto& v : img) v = float(rng.uniform(0.0, 1.0));
  LabelMask mask(12, 12);
  for (auto& v : mask.labels) v = uint8_t(rng.uniform_int(4));
  std::vector<float> img_out;
  LabelMask mask_out;
  affine_resample(img, mask, 0.0, 0.0, 0.0, 1.0, img_out, mask_out);
  CHECK(img_out == img);
  CHECK(mask_out == mask);
}

TEST_CASE("affine_resample translation moves content as expected") {
  std::vector<float> img(8 * 8, 0.f);
  img[3 * 8 + 3] = 1.f;
  LabelMask mask(8, 8);
  mask.at(3, 3) = 2;
  std::vector<float> img_out;
  LabelMask mask_out;
  affine_resample(img, mask, 0.0, 1.0, 2.0, 1.0, img_out, mask_out);
  CHECK(img_out[4 * 8 + 5] == doctest::Approx(1.0));
  CHECK(mask_out.at(4, 5) == 2);
  CHECK(mask_out.at(3, 3) == 0);
}

TEST_CASE("augment preserves label set and is deterministic per stream") {
  const PhantomSet set = generate_phantom(smoke_phantom(4));
  TrainConfig cfg;
  const SegCase& c = set.train[1];
  std::vector<float> i1 = c.image, i2 = c.image;
  LabelMask m1 = c.mask, m2 = c.mask;
  Rng r1(55), r2(55);
  augment(i1, m1, cfg, r1);
  augment(i2, m2, cfg, r2);
  CHECK(i1 == i2);
  CHECK(m1 == m2);
  for (uint8_t v : m1.labels) CHECK(v <= 3);
  // A different stream gives a different transform.
  std::vector<float> i3 = c.image;
  LabelMask m3 = c.mask;
  Rng r3(56);
  augment(i3, m3, cfg, r3);
  CHECK(i1 != i3);
}

TEST_CASE("Adam minimizes a quadratic") {
  std::vector<std::pair<std::string, Tensor>> params;
  Tensor x = Tensor::from_data({1}, {5.f});
  x.set_requires_grad(true);
  params.emplace_back("x", x);
  Adam opt(params);
  for (int step = 0; step < 400; ++step) {
    opt.zero_grad();
    Tensor loss = mul(x, x);
    Tensor scalar = uncseg::sum(loss);
    scalar.backward();
    opt.step(0.05);
  }
  CHECK(std::abs(x.data()[0]) < 0.05f);
}

TEST_CASE("training smoke: cross entropy halves on 20 phantoms (lambda 0)") {
  const PhantomSet set = generate_phantom(smoke_phantom(7));
  REQUIRE(set.train.size() >= 20);
  Dataset train_set(set.train.begin(), set.train.begin() + 20);
  UNet model(smoke_model(ModelConfig::kPlain), Rng(1234).fork(0));
  const TrainConfig cfg = smoke_train(30);
  const TrainResult result = train(model, train_set, set.val, cfg);
  REQUIRE(int(result.history.size()) == cfg.epochs);
  const double initial = result.history.front().train_ce;
  const double final_ce = result.history.back().train_ce;
  CHECK(final_ce < 0.5 * initial);
  // kl column is identically zero for the plain variant
  for (const auto& row : result.history) CHECK(row.train_kl == 0.0);
  // checkpoint selection: best_epoch is the argmin of val_nll
  double best = 1e300;
  int best_epoch = 0;
  for (const auto& row : result.history)
    if (row.val_nll < best) {
      best = row.val_nll;
      best_epoch = row.epoch;
    }
  CHECK(result.best_epoch == best_epoch);
}

TEST_CASE("training is deterministic per seed") {
  const PhantomSet set = generate_phantom(smoke_phantom(4));
  const TrainConfig cfg = smoke_train(2);
  UNet a(smoke_model(ModelConfig::kMcd), Rng(cfg.seed).fork(0));
  UNet b(smoke_model(ModelConfig::kMcd), Rng(cfg.seed).fork(0));
  const TrainResult ra = train(a, set.train, set.val, cfg);
  const TrainResult rb = train(b, set.train, set.val, cfg);
  CHECK(ra.best_params == rb.best_params);
  REQUIRE(ra.history.size() == rb.history.size());
  for (size_t i = 0; i < ra.history.size(); ++i)
    CHECK(ra.history[i].val_nll == rb.history[i].val_nll);
}

TEST_CASE("posterior sigma grows with lambda (bbb)") {
  const PhantomSet set = generate_phantom(smoke_phantom(4));
  auto mean_sigma = [&](double lambda) {
    TrainConfig cfg = smoke_train(3);
    cfg.lambda = lambda;
    UNet model(smoke_model(ModelConfig::kBbb), Rng(cfg.seed).fork(0));
    train(model, set.train, set.val, cfg);
    double sum = 0;
    int64_t n = 0;
    for (const auto& [name, values] : model.snapshot_parameters()) {
      if (name.size() < 4 || name.substr(name.size() - 4) != ".rho") continue;
      for (float r : values) {
        sum += double(softplus(r));
        ++n;
      }
    }
    return sum / double(n);
  };
  // Endpoints of the lambda grid: heavier KL weight -> wider posteriors.
  CHECK(mean_sigma(30.0) > mean_sigma(0.1));
}

TEST_CASE("train_ensemble: member independence and seed validation") {
  const PhantomSet set = generate_phantom(smoke_phantom(4));
  TrainConfig cfg = smoke_train(2);
  cfg.ensemble_members = 2;
  const auto results = train_ensemble(smoke_model(ModelConfig::kPlain),
                                      set.train, set.val, cfg, 1);
  REQUIRE(results.size() == 2);
  // Pairwise parameter cosine similarity strictly below 1.
  std::vector<double> va, vb;
  for (const auto& [name, vals] : results[0].best_params)
    va.insert(va.end(), vals.begin(), vals.end());
  for (const auto& [name, vals] : results[1].best_params)
    vb.insert(vb.end(), vals.begin(), vals.end());
  REQUIRE(va.size() == vb.size());
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < va.size(); ++i) {
    dot += va[i] * vb[i];
    na += va[i] * va[i];
    nb += vb[i] * vb[i];
  }
  CHECK(dot / std::sqrt(na * nb) < 1.0);

  cfg.ensemble_seeds = {9, 9};
  CHECK_THROWS_AS(train_ensemble(smoke_model(ModelConfig::kPlain), set.train,
                                 set.val, cfg, 1),
                  ConfigError);

  // jobs > 1 yields identical results to sequential training.
  cfg.ensemble_seeds = {4, 5};
  const auto seq = train_ensemble(smoke_model(ModelConfig::kPlain), set.train,
                                  set.val, cfg, 1);
  const auto par = train_ensemble(smoke_model(ModelConfig::kPlain), set.train,
                                  set.val, cfg, 2);
  REQUIRE(seq.size() == par.size());
  for (size_t k = 0; k < seq.size(); ++k)
    CHECK(seq[k].best_params == par[k].best_params);
}

TEST_CASE("single-member ensemble equals train with that seed") {
  const PhantomSet set = generate_phantom(smoke_phantom(4));
  TrainConfig cfg = smoke_train(2);
  cfg.ensemble_members = 1;
  cfg.ensemble_seeds = {321};
  const auto ens = train_ensemble(smoke_model(ModelConfig::kPlain), set.train,
                                  set.val, cfg, 1);
  TrainConfig single = cfg;
  single.seed = 321;
  UNet model(smoke_model(ModelConfig::kPlain), Rng(321).fork(0));
  const TrainResult direct = train(model, set.train, set.val, single);
  CHECK(ens[0].best_params == direct.best_params);
}
