#include "uncseg/sampling.hpp"

#include "uncseg/errors.hpp"

namespace uncseg {

namespace {
std::vector<float> single_forward(UNet& model, const std::vector<float>& image,
                                  bool sample, Rng& rng) {
  const auto& cfg = model.config();
  Tensor x = Tensor::from_data({1, 1, cfg.input_h, cfg.input_w},
                               std::vector<float>(image));
  NoGradGuard ng;
  return model.forward(x, sample, rng).probs.data();
}
}  // namespace

void compute_stack_mean(SampleStack& stack) {
  const size_t n = stack.samples.at(0).size();
  std::vector<double> acc(n, 0.0);
  for (const auto& s : stack.samples)
    for (size_t i = 0; i < n; ++i) acc[i] += s[i];
  stack.mean.resize(n);
  const double inv = 1.0 / double(stack.samples.size());
  for (size_t i = 0; i < n; ++i) stack.mean[i] = float(acc[i] * inv);
}

SampleStack sample_stack(UNet& model, const std::vector<float>& image, int T,
                         Rng& rng) {
  if (T < 1) throw ConfigError("sample_stack: T must be >= 1");
  const auto& cfg = model.config();
  SampleStack stack;
  stack.channels = cfg.num_classes;
  stack.h = cfg.input_h;
  stack.w = cfg.input_w;
  switch (cfg.variant) {
    case ModelConfig::kBbb: stack.source = SampleStack::kBbb; break;
    case ModelConfig::kMcd: stack.source = SampleStack::kMcd; break;
    default: stack.source = SampleStack::kPlain; break;
  }
  if (cfg.variant == ModelConfig::kPlain) {
    auto probs = single_forward(model, image, false, rng);
    stack.samples.assign(size_t(T), probs);
  } else {
    stack.samples.reserve(size_t(T));
    for (int t = 0; t < T; ++t) {
      Rng draw = rng.fork(uint64_t(t));
      stack.samples.push_back(single_forward(model, image, true, draw));
    }
  }
  compute_stack_mean(stack);
  return stack;
}

SampleStack sample_stack_ensemble(std::vector<UNet*>& members,
                                  const std::vector<float>& image) {
  if (members.empty())
    throw ConfigError("sample_stack_ensemble: no members");
  SampleStack stack;
  const auto& cfg = members.front()->config();
  stack.channels = cfg.num_classes;
  stack.h = cfg.input_h;
  stack.w = cfg.input_w;
  stack.source = SampleStack::kEnsemble;
  Rng unused(0);
  for (UNet* m : members)
    stack.samples.push_back(single_forward(*m, image, false, unused));
  compute_stack_mean(stack);
  return stack;
}

LabelMask argmax_mask(const std::vector<float>& probs, int channels, int h,
                      int w) {
  const size_t hw = size_t(h) * size_t(w);
  if (probs.size() != hw * size_t(channels))
    throw DimensionError("argmax_mask: probs length mismatch");
  LabelMask m(h, w);
  for (size_t j = 0; j < hw; ++j) {
    int best = 0;
    float bv = probs[j];
    for (int c = 1; c < channels; ++c) {
      const float v = probs[size_t(c) * hw + j];
      if (v > bv) {  // strict: ties keep the lowest class index
        bv = v;
        best = c;
      }
    }
    m.labels[j] = uint8_t(best);
  }
  return m;
}

}  // namespace uncseg
