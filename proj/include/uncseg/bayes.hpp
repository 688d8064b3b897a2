#pragma once

#include "uncseg/rng.hpp"
#include "uncseg/tensor.hpp"

namespace uncseg {

// Fully factorized Gaussian posterior over one parameter tensor.
// sigma = softplus(rho) = ln(1 + e^rho).
struct GaussianWeightSet {
  Tensor mu;
  Tensor rho;
};

struct PriorConfig {
  float mu_prior = 0.f;
  float sigma_prior = 0.1f;
};

struct DropoutConfig {
  enum Placement { kAllLayers, kMiddleLayers };
  float rate = 0.1f;
  Placement placement = kMiddleLayers;
};

float softplus(float x);
float sigmoid(float x);

// Reparameterized draw: mu + softplus(rho) * eps, differentiable in mu/rho.
Tensor sample_weight(const GaussianWeightSet& w, const Tensor& eps);

// Closed-form KL[q || N(mu_prior, sigma_prior^2)] summed over all weights,
// accumulated in double. Differentiable in mu and rho.
Tensor kl_factorized_gaussian(const GaussianWeightSet& w,
                              const PriorConfig& prior);

// Plain numeric version (no tape), used by the op and handy for tests.
double kl_factorized_gaussian_value(const std::vector<float>& mu,
                                    const std::vector<float>& rho,
                                    const PriorConfig& prior);

// Inverted dropout. stochastic=false is the bit-exact identity; otherwise
// each activation is zeroed with probability cfg.rate and survivors are
// scaled by 1/(1-rate). Used both during training and for MC Dropout
// posterior samples at inference.
Tensor dropout_forward(const Tensor& x, const DropoutConfig& cfg,
                       bool stochastic, Rng& rng);

}  // namespace uncseg
