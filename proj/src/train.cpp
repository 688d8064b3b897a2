#include "uncseg/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

#include "uncseg/errors.hpp"
#include "uncseg/metrics.hpp"
#include "uncseg/sampling.hpp"

namespace uncseg {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (!(lr_initial > 0) || !(lr_after > 0))
    throw ConfigError("train: learning rates must be > 0");
  if (lambda < 0) throw ConfigError("train: lambda must be >= 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (val_samples < 1) throw ConfigError("train: val_samples must be >= 1");
  if (aug_scale_lo > aug_scale_hi || aug_scale_lo <= 0)
    throw ConfigError("train: scale range not well-ordered");
  if (aug_rotate_deg < 0 || aug_translate_px < 0)
    throw ConfigError("train: augmentation ranges must be >= 0");
  if (crop < 0) throw ConfigError("train: crop must be >= 0");
  if (ensemble_members < 1)
    throw ConfigError("train: ensemble_members must be >= 1");
}

Tensor elbo_loss(const Tensor& probs, const std::vector<LabelMask>& labels,
                 const Tensor& kl_total, double lambda,
                 int minibatches_per_epoch) {
  if (lambda < 0) throw DomainError("elbo_loss: lambda must be >= 0");
  if (minibatches_per_epoch < 1)
    throw DomainError("elbo_loss: minibatches_per_epoch must be >= 1");
  Tensor ce = cross_entropy(probs, labels);
  if (lambda == 0.0) return ce;
  const double pixels_per_batch =
      double(probs.dim(0)) * probs.dim(2) * probs.dim(3);
  const double s = lambda / (double(minibatches_per_epoch) * pixels_per_batch);
  return add(ce, scale(kl_total, float(s)));
}

void affine_resample(const std::vector<float>& image, const LabelMask& mask,
                     double angle_deg, double ty_px, double tx_px,
                     double scale_factor, std::vector<float>& image_out,
                     LabelMask& mask_out) {
  const int h = mask.h, w = mask.w;
  image_out.assign(size_t(h) * w, 0.f);
  mask_out = LabelMask(h, w);
  const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
  const double th = angle_deg * 3.14159265358979323846 / 180.0;
  const double ca = std::cos(th), sa = std::sin(th);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // inverse map: undo translation, then rotation/scale about the center
      const double py = (y - cy - ty_px) / scale_factor;
      const double px = (x - cx - tx_px) / scale_factor;
      const double sy = ca * py + sa * px + cy;
      const double sx = -sa * py + ca * px + cx;
      const int ny = int(std::lround(sy));
      const int nx = int(std::lround(sx));
      if (ny >= 0 && ny < h && nx >= 0 && nx < w)
        mask_out.at(y, x) = mask.at(ny, nx);
      if (sy < 0 || sy > h - 1 || sx < 0 || sx > w - 1) continue;
      const int y0 = int(sy), x0 = int(sx);
      const int y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
      const double fy = sy - y0, fx = sx - x0;
      image_out[size_t(y) * w + x] = float(
          (1 - fy) * ((1 - fx) * image[size_t(y0) * w + x0] +
                      fx * image[size_t(y0) * w + x1]) +
          fy * ((1 - fx) * image[size_t(y1) * w + x0] +
                fx * image[size_t(y1) * w + x1]));
    }
  }
}

void augment(std::vector<float>& image, LabelMask& mask,
             const TrainConfig& cfg, Rng& rng) {
  const double angle = rng.uniform(-cfg.aug_rotate_deg, cfg.aug_rotate_deg);
  const double ty = rng.uniform(-cfg.aug_translate_px, cfg.aug_translate_px);
  const double tx = rng.uniform(-cfg.aug_translate_px, cfg.aug_translate_px);
  const double sc = rng.uniform(cfg.aug_scale_lo, cfg.aug_scale_hi);
  std::vector<float> img_out;
  LabelMask mask_out;
  affine_resample(image, mask, angle, ty, tx, sc, img_out, mask_out);
  image = std::move(img_out);
  mask = std::move(mask_out);
}

DatasetStats compute_stats(const Dataset& train_set) {
  double sum = 0, sum2 = 0;
  int64_t n = 0;
  for (const SegCase& c : train_set)
    for (float v : c.image) {
      sum += v;
      sum2 += double(v) * v;
      ++n;
    }
  DatasetStats s;
  s.mean = sum / double(n);
  s.variance = sum2 / double(n) - s.mean * s.mean;
  return s;
}

std::vector<float> normalize_and_crop(const std::vector<float>& image, int h,
                                      int w, const DatasetStats& stats,
                                      TrainConfig::NormMode mode, int crop) {
  if (!(stats.variance > 0))
    throw DomainError("normalize: dataset variance must be > 0");
  const int ch = crop > 0 ? crop : h;
  const int cw = crop > 0 ? crop : w;
  if (ch > h || cw > w)
    throw DomainError("normalize: crop larger than image");
  const int oy = (h - ch) / 2, ox = (w - cw) / 2;
  const double div = mode == TrainConfig::kVariance ? stats.variance
                                                    : std::sqrt(stats.variance);
  std::vector<float> out(size_t(ch) * cw);
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x)
      out[size_t(y) * cw + x] = float(
          (double(image[size_t(y + oy) * w + (x + ox)]) - stats.mean) / div);
  return out;
}

LabelMask crop_mask(const LabelMask& mask, int crop) {
  if (crop <= 0 || (crop == mask.h && crop == mask.w)) return mask;
  const int oy = (mask.h - crop) / 2, ox = (mask.w - crop) / 2;
  LabelMask out(crop, crop);
  for (int y = 0; y < crop; ++y)
    for (int x = 0; x < crop; ++x) out.at(y, x) = mask.at(y + oy, x + ox);
  return out;
}

Adam::Adam(std::vector<std::pair<std::string, Tensor>>& params, double beta1,
           double beta2, double eps)
    : params_(&params), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (auto& [name, t] : params) {
    m_.emplace_back(t.data().size(), 0.f);
    v_.emplace_back(t.data().size(), 0.f);
  }
}

void Adam::zero_grad() {
  for (auto& [name, t] : *params_) t.zero_grad();
}

void Adam::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, double(t_));
  const double bc2 = 1.0 - std::pow(beta2_, double(t_));
  for (size_t i = 0; i < params_->size(); ++i) {
    Tensor& p = (*params_)[i].second;
    const std::vector<float>& g = p.grad();
    float* w = p.data().data();
    float* m = m_[i].data();
    float* v = v_[i].data();
    for (size_t j = 0; j < g.size(); ++j) {
      m[j] = float(beta1_ * m[j] + (1 - beta1_) * g[j]);
      v[j] = float(beta2_ * v[j] + (1 - beta2_) * double(g[j]) * g[j]);
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      w[j] -= float(lr * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

namespace {

struct ValMetrics {
  double nll = 0, dice_lv = 0, dice_myo = 0, dice_rv = 0;
};

ValMetrics validate(UNet& model, const Dataset& val_set,
                    const TrainConfig& cfg, const DatasetStats& stats,
                    Rng val_rng) {
  ValMetrics m;
  const bool stochastic = model.config().variant != ModelConfig::kPlain;
  const int T = stochastic ? cfg.val_samples : 1;
  double dice_acc[3] = {0, 0, 0};
  for (size_t i = 0; i < val_set.size(); ++i) {
    const SegCase& c = val_set[i];
    const auto img =
        normalize_and_crop(c.image, c.h, c.w, stats, cfg.norm_mode, cfg.crop);
    Rng case_rng = val_rng.fork(uint64_t(i));
    SampleStack stack = sample_stack(model, img, T, case_rng);
    const LabelMask gt = crop_mask(c.mask, cfg.crop);
    m.nll += nll(stack.mean, stack.channels, gt);
    const LabelMask pred =
        argmax_mask(stack.mean, stack.channels, stack.h, stack.w);
    for (uint8_t cls = 1; cls <= 3; ++cls) {
      const auto a = BinaryRegion::from_labels(pred, cls, {1.f, 1.f});
      const auto b = BinaryRegion::from_labels(gt, cls, {1.f, 1.f});
      dice_acc[cls - 1] += dice(a, b);
    }
  }
  const double n = double(val_set.size());
  m.nll /= n;
  m.dice_lv = dice_acc[0] / n;
  m.dice_myo = dice_acc[1] / n;
  m.dice_rv = dice_acc[2] / n;
  return m;
}

}  // namespace

TrainResult train(UNet& model, const Dataset& train_set,
                  const Dataset& val_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty() || val_set.empty())
    throw ConfigError("train: empty dataset");
  const DatasetStats stats = compute_stats(train_set);
  const int n_train = int(train_set.size());
  const int mb_per_epoch = (n_train + cfg.batch_size - 1) / cfg.batch_size;
  const bool stochastic = model.config().variant != ModelConfig::kPlain;

  Adam opt(model.parameters());
  const Rng base(cfg.seed);

  TrainResult result;
  result.stats = stats;
  double best_nll = std::numeric_limits<double>::infinity();

  std::vector<int> order(static_cast<size_t>(n_train));
  for (int i = 0; i < n_train; ++i) order[size_t(i)] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr =
        epoch > cfg.lr_switch_epoch ? cfg.lr_after : cfg.lr_initial;
    Rng epoch_rng = base.fork(uint64_t(epoch));
    Rng shuffle_rng = epoch_rng.fork(0);
    Rng aug_rng = epoch_rng.fork(1);
    Rng model_rng = epoch_rng.fork(2);
    shuffle_rng.shuffle(order);

    double epoch_ce = 0, epoch_kl = 0;
    for (int b = 0; b < mb_per_epoch; ++b) {
      const int lo = b * cfg.batch_size;
      const int hi = std::min(lo + cfg.batch_size, n_train);
      const int bn = hi - lo;
      std::vector<float> batch;
      std::vector<LabelMask> labels;
      int bh = 0, bw = 0;
      for (int k = lo; k < hi; ++k) {
        const SegCase& c = train_set[size_t(order[size_t(k)])];
        std::vector<float> img = c.image;
        LabelMask msk = c.mask;
        augment(img, msk, cfg, aug_rng);
        img = normalize_and_crop(img, c.h, c.w, stats, cfg.norm_mode,
                                 cfg.crop);
        msk = crop_mask(msk, cfg.crop);
        bh = msk.h;
        bw = msk.w;
        batch.insert(batch.end(), img.begin(), img.end());
        labels.push_back(std::move(msk));
      }
      Tensor x = Tensor::from_data({bn, 1, bh, bw}, std::move(batch));
      auto out = model.forward(x, stochastic, model_rng);
      Tensor loss =
          elbo_loss(out.probs, labels, out.kl_total, cfg.lambda, mb_per_epoch);
      const double loss_v = loss.item();
      const double kl_term = loss_v - [&] {
        // CE is recoverable from the decomposition; recompute for logging.
        NoGradGuard ng;
        return double(cross_entropy(out.probs, labels).item());
      }();
      if (!std::isfinite(loss_v))
        throw NumericError("train: non-finite loss at epoch " +
                           std::to_string(epoch) + " batch " +
                           std::to_string(b) + " (loss=" +
                           std::to_string(loss_v) + ", kl=" +
                           std::to_string(out.kl_total.item()) + ")");
      epoch_ce += loss_v - kl_term;
      epoch_kl += kl_term;
      opt.zero_grad();
      loss.backward();
      opt.step(lr);
    }

    const ValMetrics vm =
        validate(model, val_set, cfg, stats, epoch_rng.fork(3));
    HistoryRow row;
    row.epoch = epoch;
    row.train_ce = epoch_ce / mb_per_epoch;
    row.train_kl = epoch_kl / mb_per_epoch;
    row.val_nll = vm.nll;
    row.val_dice_lv = vm.dice_lv;
    row.val_dice_myo = vm.dice_myo;
    row.val_dice_rv = vm.dice_rv;
    result.history.push_back(row);
    if (vm.nll < best_nll) {
      best_nll = vm.nll;
      result.best_epoch = epoch;
      result.best_params = model.snapshot_parameters();
    }
  }
  model.set_parameters(result.best_params);
  return result;
}

std::vector<TrainResult> train_ensemble(const ModelConfig& model_cfg,
                                        const Dataset& train_set,
                                        const Dataset& val_set,
                                        const TrainConfig& cfg, int jobs) {
  cfg.validate();
  std::vector<uint64_t> seeds = cfg.ensemble_seeds;
  if (seeds.empty()) {
    for (int k = 1; k <= cfg.ensemble_members; ++k)
      seeds.push_back(cfg.seed + uint64_t(k));
  }
  if (int(seeds.size()) != cfg.ensemble_members)
    throw ConfigError("train_ensemble: seed count " +
                      std::to_string(seeds.size()) + " vs members " +
                      std::to_string(cfg.ensemble_members));
  if (std::set<uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ConfigError("train_ensemble: duplicate seeds");

  std::vector<TrainResult> results(seeds.size());
  std::vector<std::string> failures(seeds.size());
  auto run_member = [&](size_t k) {
    try {
      TrainConfig member_cfg = cfg;
      member_cfg.seed = seeds[k];
      UNet model(model_cfg, Rng(seeds[k]).fork(0));
      results[k] = train(model, train_set, val_set, member_cfg);
    } catch (const std::exception& e) {
      failures[k] = e.what();
    }
  };

  if (jobs <= 1) {
    for (size_t k = 0; k < seeds.size(); ++k) run_member(k);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int j = 0; j < std::min<int>(jobs, int(seeds.size())); ++j)
      pool.emplace_back([&] {
        for (size_t k = next.fetch_add(1); k < seeds.size();
             k = next.fetch_add(1))
          run_member(k);
      });
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (!f.empty()) throw NumericError("train_ensemble: member failed: " + f);
  return results;
}

void write_history_csv(const std::string& path,
                       const std::vector<HistoryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write history CSV " + path);
  out << "epoch,train_ce,train_kl,val_nll,val_dice_lv,val_dice_myo,"
         "val_dice_rv\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  r.epoch, r.train_ce, r.train_kl, r.val_nll, r.val_dice_lv,
                  r.val_dice_myo, r.val_dice_rv);
    out << buf;
  }
}

}  // namespace uncseg
