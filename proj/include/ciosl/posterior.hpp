#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ciosl/net.hpp"
#include "ciosl/random.hpp"

namespace ciosl {

// Stable softplus; the per-parameter standard deviation is sigma = softplus(rho),
// which keeps sigma > 0 under unconstrained gradient steps.
inline double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

// Inverse of softplus, valid for y > 0.
inline double softplus_inverse(double y) {
  if (y > 30.0) return y;
  return std::log(std::expm1(y));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Independent Gaussian per network parameter: theta_i ~ N(mu_i, softplus(rho_i)^2).
struct MeanFieldPosterior {
  NetShape shape;
  std::vector<double> mu;
  std::vector<double> rho;

  std::size_t param_count() const { return mu.size(); }
  std::vector<double> sigma() const;

  // mu uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer, sigma = initial_sigma.
  static MeanFieldPosterior initialize(const NetShape& shape, RandomSource& rng,
                                       double initial_sigma = 0.05);
};

// Immutable Gaussian the posterior is regularized towards; either the fixed
// N(0,1) initial prior or a snapshot of a previous posterior.
struct FrozenPrior {
  std::vector<double> mu;
  std::vector<double> sigma;

  static FrozenPrior standard_normal(std::size_t param_count);
  static FrozenPrior from_posterior(const MeanFieldPosterior& post);
};

// A reparameterized draw theta = mu + sigma * epsilon; epsilon is retained so
// gradients can flow back through the draw.
struct WeightSample {
  std::vector<double> theta;
  std::vector<double> epsilon;
};

WeightSample sample_weights(const MeanFieldPosterior& post, RandomSource& rng);
WeightSample sample_weights_with(const MeanFieldPosterior& post,
                                 std::span<const double> epsilon);

}  // namespace ciosl
