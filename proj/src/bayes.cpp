#include "uncseg/bayes.hpp"

#include <cmath>

#include "uncseg/ops.hpp"

namespace uncseg {

float softplus(float x) {
  if (x > 30.f) return x;
  return std::log1p(std::exp(x));
}

float sigmoid(float x) { return 1.f / (1.f + std::exp(-x)); }

Tensor sample_weight(const GaussianWeightSet& w, const Tensor& eps) {
  if (w.mu.shape() != w.rho.shape())
    throw DimensionError("sample_weight: mu " + shape_str(w.mu.shape()) +
                         " vs rho " + shape_str(w.rho.shape()));
  if (eps.shape() != w.mu.shape())
    throw DimensionError("sample_weight: eps " + shape_str(eps.shape()) +
                         " vs mu " + shape_str(w.mu.shape()));
  const size_t n = w.mu.data().size();
  std::vector<float> out(n);
  const float* mu = w.mu.data().data();
  const float* rho = w.rho.data().data();
  const float* e = eps.data().data();
  for (size_t i = 0; i < n; ++i) out[i] = mu[i] + softplus(rho[i]) * e[i];
  auto mu_node = w.mu.node();
  auto rho_node = w.rho.node();
  auto eps_node = eps.node();
  return make_result(
      w.mu.shape(), std::move(out), {mu_node, rho_node, eps_node},
      [=](TensorNode& self) {
        const float* dy = self.grad.data();
        const float* rv = rho_node->value.data();
        const float* ev = eps_node->value.data();
        if (mu_node->requires_grad) {
          float* dmu = mu_node->grad.data();
          for (size_t i = 0; i < n; ++i) dmu[i] += dy[i];
        }
        if (rho_node->requires_grad) {
          float* drho = rho_node->grad.data();
          for (size_t i = 0; i < n; ++i)
            drho[i] += dy[i] * ev[i] * sigmoid(rv[i]);
        }
      });
}

double kl_factorized_gaussian_value(const std::vector<float>& mu,
                                    const std::vector<float>& rho,
                                    const PriorConfig& prior) {
  if (!(prior.sigma_prior > 0.f))
    throw DomainError("kl_factorized_gaussian: sigma_prior must be > 0");
  if (mu.size() != rho.size())
    throw DimensionError("kl_factorized_gaussian: mu/rho length mismatch");
  const double sp = prior.sigma_prior;
  const double mp = prior.mu_prior;
  double acc = 0;
  for (size_t i = 0; i < mu.size(); ++i) {
    const double sigma = double(softplus(rho[i]));
    const double dm = double(mu[i]) - mp;
    acc += std::log(sp / sigma) + (sigma * sigma + dm * dm) / (2 * sp * sp) -
           0.5;
  }
  return acc;
}

Tensor kl_factorized_gaussian(const GaussianWeightSet& w,
                              const PriorConfig& prior) {
  if (w.mu.shape() != w.rho.shape())
    throw DimensionError("kl_factorized_gaussian: mu " +
                         shape_str(w.mu.shape()) + " vs rho " +
                         shape_str(w.rho.shape()));
  const double kl =
      kl_factorized_gaussian_value(w.mu.data(), w.rho.data(), prior);
  auto mu_node = w.mu.node();
  auto rho_node = w.rho.node();
  const double sp2 = double(prior.sigma_prior) * prior.sigma_prior;
  const double mp = prior.mu_prior;
  return make_result(
      {1}, {float(kl)}, {mu_node, rho_node}, [=](TensorNode& self) {
        const float g = self.grad[0];
        const size_t n = mu_node->value.size();
        const float* mv = mu_node->value.data();
        const float* rv = rho_node->value.data();
        if (mu_node->requires_grad) {
          float* dmu = mu_node->grad.data();
          for (size_t i = 0; i < n; ++i)
            dmu[i] += float(double(g) * (double(mv[i]) - mp) / sp2);
        }
        if (rho_node->requires_grad) {
          float* drho = rho_node->grad.data();
          for (size_t i = 0; i < n; ++i) {
            const double sigma = double(softplus(rv[i]));
            const double dsigma = -1.0 / sigma + sigma / sp2;
            drho[i] += float(double(g) * dsigma * double(sigmoid(rv[i])));
          }
        }
      });
}

Tensor dropout_forward(const Tensor& x, const DropoutConfig& cfg,
                       bool stochastic, Rng& rng) {
  if (cfg.rate < 0.f || cfg.rate >= 1.f)
    throw DomainError("dropout_forward: rate must be in [0,1), got " +
                      std::to_string(cfg.rate));
  if (!stochastic || cfg.rate == 0.f) return x;  // bit-exact identity
  const size_t n = x.data().size();
  const float keep_scale = 1.f / (1.f - cfg.rate);
  auto mask = std::make_shared<std::vector<float>>(n);
  for (size_t i = 0; i < n; ++i)
    (*mask)[i] = rng.uniform() < double(cfg.rate) ? 0.f : keep_scale;
  std::vector<float> out(n);
  const float* xv = x.data().data();
  for (size_t i = 0; i < n; ++i) out[i] = xv[i] * (*mask)[i];
  auto xn = x.node();
  return make_result(x.shape(), std::move(out), {xn}, [=](TensorNode& self) {
    const float* dy = self.grad.data();
    float* dx = xn->grad.data();
    for (size_t i = 0; i < n; ++i) dx[i] += dy[i] * (*mask)[i];
  });
}

}  // namespace uncseg
