#include "ciosl/posterior.hpp"

#include <stdexcept>
#include <string>

namespace ciosl {

std::vector<double> MeanFieldPosterior::sigma() const {
  std::vector<double> s(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) s[i] = softplus(rho[i]);
  return s;
}

MeanFieldPosterior MeanFieldPosterior::initialize(const NetShape& shape,
                                                  RandomSource& rng,
                                                  double initial_sigma) {
  shape.validate();
  MeanFieldPosterior post;
  post.shape = shape;
  const std::size_t P = shape.param_count();
  post.mu.assign(P, 0.0);
  post.rho.assign(P, softplus_inverse(initial_sigma));
  for (const auto& lay : shape.layers()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(lay.in));
    for (std::size_t i = 0; i < lay.in * lay.out; ++i) {
      post.mu[lay.w_offset + i] = (2.0 * rng.uniform01() - 1.0) * bound;
    }
    for (std::size_t i = 0; i < lay.out; ++i) {
      post.mu[lay.b_offset + i] = (2.0 * rng.uniform01() - 1.0) * bound;
    }
  }
  return post;
}

FrozenPrior FrozenPrior::standard_normal(std::size_t param_count) {
  FrozenPrior p;
  p.mu.assign(param_count, 0.0);
  p.sigma.assign(param_count, 1.0);
  return p;
}

FrozenPrior FrozenPrior::from_posterior(const MeanFieldPosterior& post) {
  FrozenPrior p;
  p.mu = post.mu;
  p.sigma = post.sigma();
  return p;
}

WeightSample sample_weights_with(const MeanFieldPosterior& post,
                                 std::span<const double> epsilon) {
  if (epsilon.size() != post.mu.size()) {
    throw std::invalid_argument("sample_weights: epsilon length mismatch: expected " +
                                std::to_string(post.mu.size()) + ", got " +
                                std::to_string(epsilon.size()));
  }
  WeightSample s;
  s.epsilon.assign(epsilon.begin(), epsilon.end());
  s.theta.resize(post.mu.size());
  for (std::size_t i = 0; i < post.mu.size(); ++i) {
    s.theta[i] = post.mu[i] + softplus(post.rho[i]) * epsilon[i];
  }
  return s;
}

WeightSample sample_weights(const MeanFieldPosterior& post, RandomSource& rng) {
  std::vector<double> eps(post.mu.size());
  rng.fill_normal(eps);
  return sample_weights_with(post, eps);
}

}  // namespace ciosl
