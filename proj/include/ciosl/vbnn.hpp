#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ciosl/net.hpp"
#include "ciosl/posterior.hpp"
#include "ciosl/random.hpp"

namespace ciosl {

struct GradientPair {
  std::vector<double> d_mu;
  std::vector<double> d_rho;
};

// SGD with classic momentum; weight decay applies to mu only (decaying rho
// would pull sigma toward softplus(0), an unintended prior).
struct OptimizerState {
  std::vector<double> velocity_mu;
  std::vector<double> velocity_rho;
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-5;

  static OptimizerState create(std::size_t param_count, double lr = 0.01,
                               double momentum = 0.9, double weight_decay = 1e-5);
};

struct LabeledExample {
  std::span<const double> z;
  std::size_t label;
};

struct DistillExample {
  std::span<const double> z;
  std::span<const double> logits;
};

// Closed-form KL( N(q.mu, q.sigma^2) || N(p.mu, p.sigma^2) ) summed over all
// parameters; exact, nonnegative, zero iff the distributions coincide.
double kl_diag_gaussians(const MeanFieldPosterior& q, const FrozenPrior& p);

// Negative log-likelihood -log softmax(f_theta(z))[y], log-sum-exp stabilized.
double nll(const NetShape& shape, std::span<const double> theta,
           std::span<const double> z, std::size_t y);

// lambda2 * sum_n || h_n - f_theta(z_n) ||_2^2 over stored-logit pairs.
double kd_loss(const NetShape& shape, std::span<const double> theta,
               std::span<const DistillExample> batch, double lambda2);

struct StreamingLossResult {
  double loss = 0.0;
  GradientPair grads;
};

// The per-step objective: NLL of the new sample, summed NLL of the replay
// batch, lambda1 * KL(q || prior), and the logit-distillation penalty, all
// evaluated at the single shared weight draw theta = mu + sigma * epsilon.
// Gradients are exact analytic derivatives through the reparameterization
// path plus the closed-form KL gradient.
StreamingLossResult streaming_loss_at(const MeanFieldPosterior& post,
                                      const FrozenPrior& prior,
                                      const LabeledExample& new_sample,
                                      std::span<const LabeledExample> replay_batch,
                                      std::span<const DistillExample> kd_batch,
                                      double lambda1, double lambda2,
                                      std::span<const double> epsilon);

// Draws the weight sample internally (one Monte-Carlo sample per step).
StreamingLossResult streaming_loss(const MeanFieldPosterior& post,
                                   const FrozenPrior& prior,
                                   const LabeledExample& new_sample,
                                   std::span<const LabeledExample> replay_batch,
                                   std::span<const DistillExample> kd_batch,
                                   double lambda1, double lambda2,
                                   RandomSource& rng);

// Average of softmax(f_theta(z)) over the given weight draws.
std::vector<double> predict_proba_with(const NetShape& shape,
                                       std::span<const std::vector<double>> thetas,
                                       std::span<const double> z);

// k independent posterior draws, averaged; k = 5 by default downstream.
std::vector<double> predict_proba(const MeanFieldPosterior& post,
                                  std::span<const double> z, std::size_t k,
                                  RandomSource& rng);

// Deterministic variant evaluated at the posterior mean.
std::vector<double> predict_proba_mean(const MeanFieldPosterior& post,
                                       std::span<const double> z);

// Shannon entropy with 0 ln 0 := 0; natural log.
double entropy(std::span<const double> probs);

// Index of the largest value; ties resolve to the lowest index, so a
// uniform distribution always predicts class 0.
std::size_t argmax_lowest(std::span<const double> values);

// Predictive uncertainty: entropy of the k-sample averaged class distribution.
double uncertainty(const MeanFieldPosterior& post, std::span<const double> z,
                   std::size_t k, RandomSource& rng);

// In-place momentum update of (mu, rho); throws on non-finite gradients
// before touching any state.
void sgd_step(MeanFieldPosterior& post, const GradientPair& grads,
              OptimizerState& opt);

}  // namespace ciosl
