#include "uncseg/unet.hpp"

#include <array>
#include <cmath>

namespace uncseg {

void ModelConfig::validate() const {
  if (depth < 2) throw ConfigError("model: depth must be >= 2");
  if (base_filters < 4) throw ConfigError("model: base_filters must be >= 4");
  if (num_classes < 2) throw ConfigError("model: num_classes must be >= 2");
  const int div = 1 << (depth - 1);
  if (input_h % div != 0 || input_w % div != 0)
    throw ConfigError("model: input size " + std::to_string(input_h) + "x" +
                      std::to_string(input_w) + " not divisible by 2^" +
                      std::to_string(depth - 1));
  if (variant == kBbb && !(prior.sigma_prior > 0.f))
    throw ConfigError("model: prior sigma must be > 0");
  if (variant == kMcd && (dropout.rate < 0.f || dropout.rate >= 1.f))
    throw ConfigError("model: dropout rate must be in [0,1)");
}

ModelConfig::Variant ModelConfig::variant_from_string(const std::string& s) {
  if (s == "plain") return kPlain;
  if (s == "bbb") return kBbb;
  if (s == "mcd") return kMcd;
  throw ConfigError("unknown model variant '" + s + "'");
}

std::string ModelConfig::variant_to_string(Variant v) {
  switch (v) {
    case kPlain: return "plain";
    case kBbb: return "bbb";
    default: return "mcd";
  }
}

namespace {
constexpr float kRhoInit = -5.f;  // sigma ~ 6.7e-3 at start

Tensor he_kernel(int cin, int cout, int ksize, Rng& rng) {
  const int fan_in = cin * ksize * ksize;
  const float std = std::sqrt(2.f / float(fan_in));
  std::vector<float> data(size_t(cout) * cin * ksize * ksize);
  for (float& v : data) v = float(rng.normal()) * std;
  return Tensor::from_data({cout, cin, ksize, ksize}, std::move(data), true);
}
}  // namespace

ConvLayer::ConvLayer(std::string name, int cin, int cout, int ksize,
                     bool bayesian, Rng& init_rng)
    : name_(std::move(name)), pad_(ksize / 2), bayesian_(bayesian) {
  if (!bayesian_) {
    kernel_ = he_kernel(cin, cout, ksize, init_rng);
    bias_ = Tensor::zeros({cout}, true);
  } else {
    kernel_q_.mu = he_kernel(cin, cout, ksize, init_rng);
    kernel_q_.rho = Tensor::full({cout, cin, ksize, ksize}, kRhoInit, true);
    bias_q_.mu = Tensor::zeros({cout}, true);
    bias_q_.rho = Tensor::full({cout}, kRhoInit, true);
  }
}

Tensor ConvLayer::forward(const Tensor& x, bool sample, Rng& rng) const {
  if (!bayesian_) return conv2d(x, kernel_, bias_, 1, pad_);
  if (!sample) return conv2d(x, kernel_q_.mu, bias_q_.mu, 1, pad_);
  // One epsilon per weight per forward call, shared across the minibatch.
  std::vector<float> ek(kernel_q_.mu.data().size());
  for (float& v : ek) v = float(rng.normal());
  std::vector<float> eb(bias_q_.mu.data().size());
  for (float& v : eb) v = float(rng.normal());
  Tensor k = sample_weight(
      kernel_q_, Tensor::from_data(kernel_q_.mu.shape(), std::move(ek)));
  Tensor b = sample_weight(
      bias_q_, Tensor::from_data(bias_q_.mu.shape(), std::move(eb)));
  return conv2d(x, k, b, 1, pad_);
}

Tensor ConvLayer::kl(const PriorConfig& prior) const {
  return add(kl_factorized_gaussian(kernel_q_, prior),
             kl_factorized_gaussian(bias_q_, prior));
}

void ConvLayer::collect_parameters(
    std::vector<std::pair<std::string, Tensor>>& out) {
  if (!bayesian_) {
    out.emplace_back(name_ + ".kernel", kernel_);
    out.emplace_back(name_ + ".bias", bias_);
  } else {
    out.emplace_back(name_ + ".kernel.mu", kernel_q_.mu);
    out.emplace_back(name_ + ".kernel.rho", kernel_q_.rho);
    out.emplace_back(name_ + ".bias.mu", bias_q_.mu);
    out.emplace_back(name_ + ".bias.rho", bias_q_.rho);
  }
}

UNet::UNet(const ModelConfig& cfg, Rng init_rng) : cfg_(cfg) {
  cfg_.validate();
  const bool bayes = cfg_.variant == ModelConfig::kBbb;
  const int D = cfg_.depth;
  const int F = cfg_.base_filters;
  auto filters = [&](int level) { return F << level; };

  enc_.resize(size_t(D - 1));
  for (int l = 0; l < D - 1; ++l) {
    const int cin = (l == 0) ? 1 : filters(l - 1);
    enc_[size_t(l)][0] = ConvLayer("enc" + std::to_string(l) + ".conv1", cin,
                                   filters(l), 3, bayes, init_rng);
    enc_[size_t(l)][1] = ConvLayer("enc" + std::to_string(l) + ".conv2",
                                   filters(l), filters(l), 3, bayes, init_rng);
  }
  bottleneck_[0] = ConvLayer("bottleneck.conv1", filters(D - 2),
                             filters(D - 1), 3, bayes, init_rng);
  bottleneck_[1] = ConvLayer("bottleneck.conv2", filters(D - 1),
                             filters(D - 1), 3, bayes, init_rng);
  dec_.resize(size_t(D - 1));
  for (int i = 0; i < D - 1; ++i) {
    const int l = D - 2 - i;  // level this block outputs at
    const int cin = filters(l + 1) + filters(l);  // upsampled + skip
    dec_[size_t(i)][0] = ConvLayer("dec" + std::to_string(l) + ".conv1", cin,
                                   filters(l), 3, bayes, init_rng);
    dec_[size_t(i)][1] = ConvLayer("dec" + std::to_string(l) + ".conv2",
                                   filters(l), filters(l), 3, bayes, init_rng);
  }
  head1_ = ConvLayer("head.conv1", F, F, 1, bayes, init_rng);
  head2_ = ConvLayer("head.conv2", F, cfg_.num_classes, 1, bayes, init_rng);

  // Dropout placement (mcd variant only). "Middle" = bottleneck plus the
  // adjacent encoder/decoder level.
  enc_dropout_.assign(size_t(D - 1), false);
  dec_dropout_.assign(size_t(D - 1), false);
  if (cfg_.variant == ModelConfig::kMcd) {
    if (cfg_.dropout.placement == DropoutConfig::kAllLayers) {
      enc_dropout_.assign(size_t(D - 1), true);
      dec_dropout_.assign(size_t(D - 1), true);
      bottleneck_dropout_ = true;
      head_dropout_ = true;
    } else {
      enc_dropout_[size_t(D - 2)] = true;
      bottleneck_dropout_ = true;
      dec_dropout_[0] = true;  // decoder block at level D-2
    }
  }

  for (auto& blk : enc_)
    for (auto& c : blk) c.collect_parameters(params_);
  for (auto& c : bottleneck_) c.collect_parameters(params_);
  for (auto& blk : dec_)
    for (auto& c : blk) c.collect_parameters(params_);
  head1_.collect_parameters(params_);
  head2_.collect_parameters(params_);
}

Tensor UNet::maybe_dropout(const Tensor& x, bool enabled, bool sample,
                           Rng& rng) const {
  if (!enabled) return x;
  return dropout_forward(x, cfg_.dropout, sample, rng);
}

UNet::ForwardResult UNet::forward(const Tensor& x, bool sample, Rng& rng) {
  if (x.ndim() != 4 || x.dim(1) != 1 || x.dim(2) != cfg_.input_h ||
      x.dim(3) != cfg_.input_w)
    throw DimensionError("forward: input " + shape_str(x.shape()) +
                         " vs configured [N,1," + std::to_string(cfg_.input_h) +
                         "," + std::to_string(cfg_.input_w) + "]");
  const bool bayes = cfg_.variant == ModelConfig::kBbb;
  const bool draw = sample && cfg_.variant != ModelConfig::kPlain;
  const int D = cfg_.depth;

  Tensor kl_total;
  auto add_kl = [&](const ConvLayer& c) {
    if (!bayes) return;
    Tensor k = c.kl(cfg_.prior);
    kl_total = kl_total.defined() ? add(kl_total, k) : k;
  };

  std::vector<Tensor> skips;
  Tensor h = x;
  for (int l = 0; l < D - 1; ++l) {
    auto& blk = enc_[size_t(l)];
    h = relu(blk[0].forward(h, draw, rng));
    add_kl(blk[0]);
    h = relu(blk[1].forward(h, draw, rng));
    add_kl(blk[1]);
    h = maybe_dropout(h, enc_dropout_[size_t(l)], draw, rng);
    skips.push_back(h);
    h = maxpool2(h);
  }
  h = relu(bottleneck_[0].forward(h, draw, rng));
  add_kl(bottleneck_[0]);
  h = relu(bottleneck_[1].forward(h, draw, rng));
  add_kl(bottleneck_[1]);
  h = maybe_dropout(h, bottleneck_dropout_, draw, rng);
  for (int i = 0; i < D - 1; ++i) {
    const int l = D - 2 - i;
    h = concat_channels(skips[size_t(l)], nearest_upsample2(h));
    auto& blk = dec_[size_t(i)];
    h = relu(blk[0].forward(h, draw, rng));
    add_kl(blk[0]);
    h = relu(blk[1].forward(h, draw, rng));
    add_kl(blk[1]);
    h = maybe_dropout(h, dec_dropout_[size_t(i)], draw, rng);
  }
  h = relu(head1_.forward(h, draw, rng));
  add_kl(head1_);
  h = maybe_dropout(h, head_dropout_, draw, rng);
  h = head2_.forward(h, draw, rng);
  add_kl(head2_);

  ForwardResult out;
  out.probs = softmax_channels(h);
  out.kl_total = kl_total.defined() ? kl_total : Tensor::zeros({1});
  return out;
}

int64_t UNet::parameter_count() const {
  int64_t n = 0;
  for (const auto& [name, t] : params_) n += t.size();
  return n;
}

std::map<std::string, std::vector<float>> UNet::snapshot_parameters() const {
  std::map<std::string, std::vector<float>> out;
  for (const auto& [name, t] : params_) out[name] = t.data();
  return out;
}

void UNet::set_parameters(
    const std::map<std::string, std::vector<float>>& p) {
  for (auto& [name, t] : params_) {
    auto it = p.find(name);
    if (it == p.end())
      throw ConfigError("set_parameters: missing parameter '" + name + "'");
    if (it->second.size() != t.data().size())
      throw DimensionError("set_parameters: size mismatch for '" + name + "'");
    t.data() = it->second;
  }
}

}  // namespace uncseg
