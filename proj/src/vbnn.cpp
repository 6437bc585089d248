#include "ciosl/vbnn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ciosl {

OptimizerState OptimizerState::create(std::size_t param_count, double lr,
                                      double momentum, double weight_decay) {
  OptimizerState opt;
  opt.velocity_mu.assign(param_count, 0.0);
  opt.velocity_rho.assign(param_count, 0.0);
  opt.lr = lr;
  opt.momentum = momentum;
  opt.weight_decay = weight_decay;
  return opt;
}

double kl_diag_gaussians(const MeanFieldPosterior& q, const FrozenPrior& p) {
  if (q.mu.size() != p.mu.size() || q.rho.size() != p.sigma.size()) {
    throw std::invalid_argument("kl_diag_gaussians: length mismatch: posterior has " +
                                std::to_string(q.mu.size()) + " parameters, prior has " +
                                std::to_string(p.mu.size()));
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < q.mu.size(); ++i) {
    const double qs = softplus(q.rho[i]);
    const double ps = p.sigma[i];
    const double dm = q.mu[i] - p.mu[i];
    kl += std::log(ps / qs) + (qs * qs + dm * dm) / (2.0 * ps * ps) - 0.5;
  }
  return kl;
}

double nll(const NetShape& shape, std::span<const double> theta,
           std::span<const double> z, std::size_t y) {
  if (y >= shape.output_dim) {
    throw std::invalid_argument("nll: class index " + std::to_string(y) +
                                " out of range for " + std::to_string(shape.output_dim) +
                                " classes");
  }
  return cross_entropy(forward(shape, theta, z), y);
}

double kd_loss(const NetShape& shape, std::span<const double> theta,
               std::span<const DistillExample> batch, double lambda2) {
  double total = 0.0;
  for (const auto& ex : batch) {
    if (ex.logits.size() != shape.output_dim) {
      throw std::invalid_argument("kd_loss: stored logits length mismatch: expected " +
                                  std::to_string(shape.output_dim) + ", got " +
                                  std::to_string(ex.logits.size()));
    }
    const std::vector<double> cur = forward(shape, theta, ex.z);
    for (std::size_t c = 0; c < cur.size(); ++c) {
      const double d = ex.logits[c] - cur[c];
      total += d * d;
    }
  }
  return lambda2 * total;
}

StreamingLossResult streaming_loss_at(const MeanFieldPosterior& post,
                                      const FrozenPrior& prior,
                                      const LabeledExample& new_sample,
                                      std::span<const LabeledExample> replay_batch,
                                      std::span<const DistillExample> kd_batch,
                                      double lambda1, double lambda2,
                                      std::span<const double> epsilon) {
  const std::size_t P = post.param_count();
  const auto layers = post.shape.layers();
  const WeightSample w = sample_weights_with(post, epsilon);

  StreamingLossResult result;
  result.grads.d_mu.assign(P, 0.0);
  result.grads.d_rho.assign(P, 0.0);
  std::vector<double> g_theta(P, 0.0);

  ForwardTrace trace;
  std::vector<double> d_logits(post.shape.output_dim);

  auto add_nll = [&](const LabeledExample& ex) {
    if (ex.z.size() != post.shape.input_dim) {
      throw std::invalid_argument("streaming_loss: embedding dimension mismatch: expected " +
                                  std::to_string(post.shape.input_dim) + ", got " +
                                  std::to_string(ex.z.size()));
    }
    if (ex.label >= post.shape.output_dim) {
      throw std::invalid_argument("streaming_loss: class index " +
                                  std::to_string(ex.label) + " out of range for " +
                                  std::to_string(post.shape.output_dim) + " classes");
    }
    forward_trace(layers, w.theta, ex.z, trace);
    result.loss += cross_entropy(trace.pre.back(), ex.label);
    d_logits = softmax(trace.pre.back());
    d_logits[ex.label] -= 1.0;
    backward_accumulate(layers, w.theta, trace, d_logits, g_theta);
  };

  add_nll(new_sample);
  for (const auto& ex : replay_batch) add_nll(ex);

  if (lambda2 > 0.0) {
    for (const auto& ex : kd_batch) {
      if (ex.logits.size() != post.shape.output_dim) {
        throw std::invalid_argument(
            "streaming_loss: stored logits length mismatch: expected " +
            std::to_string(post.shape.output_dim) + ", got " +
            std::to_string(ex.logits.size()));
      }
      forward_trace(layers, w.theta, ex.z, trace);
      const std::vector<double>& cur = trace.pre.back();
      for (std::size_t c = 0; c < cur.size(); ++c) {
        const double d = cur[c] - ex.logits[c];
        result.loss += lambda2 * d * d;
        d_logits[c] = 2.0 * lambda2 * d;
      }
      backward_accumulate(layers, w.theta, trace, d_logits, g_theta);
    }
  }

  // Reparameterization: d theta / d mu = 1, d theta / d rho = eps * sigmoid(rho).
  for (std::size_t i = 0; i < P; ++i) {
    result.grads.d_mu[i] = g_theta[i];
    result.grads.d_rho[i] = g_theta[i] * epsilon[i] * sigmoid(post.rho[i]);
  }

  if (lambda1 > 0.0) {
    if (prior.mu.size() != P) {
      throw std::invalid_argument("streaming_loss: prior length mismatch: expected " +
                                  std::to_string(P) + ", got " +
                                  std::to_string(prior.mu.size()));
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < P; ++i) {
      const double qs = softplus(post.rho[i]);
      const double ps = prior.sigma[i];
      const double dm = post.mu[i] - prior.mu[i];
      kl += std::log(ps / qs) + (qs * qs + dm * dm) / (2.0 * ps * ps) - 0.5;
      result.grads.d_mu[i] += lambda1 * dm / (ps * ps);
      result.grads.d_rho[i] += lambda1 * (qs / (ps * ps) - 1.0 / qs) * sigmoid(post.rho[i]);
    }
    result.loss += lambda1 * kl;
  }
  return result;
}

StreamingLossResult streaming_loss(const MeanFieldPosterior& post,
                                   const FrozenPrior& prior,
                                   const LabeledExample& new_sample,
                                   std::span<const LabeledExample> replay_batch,
                                   std::span<const DistillExample> kd_batch,
                                   double lambda1, double lambda2,
                                   RandomSource& rng) {
  std::vector<double> eps(post.param_count());
  rng.fill_normal(eps);
  return streaming_loss_at(post, prior, new_sample, replay_batch, kd_batch, lambda1,
                           lambda2, eps);
}

std::vector<double> predict_proba_with(const NetShape& shape,
                                       std::span<const std::vector<double>> thetas,
                                       std::span<const double> z) {
  if (thetas.empty()) {
    throw std::invalid_argument("predict_proba: need at least one weight sample");
  }
  std::vector<double> avg(shape.output_dim, 0.0);
  for (const auto& theta : thetas) {
    std::vector<double> p = forward(shape, theta, z);
    softmax_inplace(p);
    for (std::size_t c = 0; c < avg.size(); ++c) avg[c] += p[c];
  }
  const double inv = 1.0 / static_cast<double>(thetas.size());
  for (double& x : avg) x *= inv;
  return avg;
}

std::vector<double> predict_proba(const MeanFieldPosterior& post,
                                  std::span<const double> z, std::size_t k,
                                  RandomSource& rng) {
  if (k == 0) throw std::invalid_argument("predict_proba: k must be >= 1");
  std::vector<std::vector<double>> thetas;
  thetas.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    thetas.push_back(sample_weights(post, rng).theta);
  }
  return predict_proba_with(post.shape, thetas, z);
}

std::vector<double> predict_proba_mean(const MeanFieldPosterior& post,
                                       std::span<const double> z) {
  std::vector<double> p = forward(post.shape, post.mu, z);
  softmax_inplace(p);
  return p;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double uncertainty(const MeanFieldPosterior& post, std::span<const double> z,
                   std::size_t k, RandomSource& rng) {
  return entropy(predict_proba(post, z, k, rng));
}

void sgd_step(MeanFieldPosterior& post, const GradientPair& grads,
              OptimizerState& opt) {
  const std::size_t P = post.param_count();
  if (grads.d_mu.size() != P || grads.d_rho.size() != P ||
      opt.velocity_mu.size() != P || opt.velocity_rho.size() != P) {
    throw std::invalid_argument("sgd_step: gradient/velocity length mismatch");
  }
  for (std::size_t i = 0; i < P; ++i) {
    if (!std::isfinite(grads.d_mu[i]) || !std::isfinite(grads.d_rho[i])) {
      throw std::runtime_error("sgd_step: non-finite gradient at parameter " +
                               std::to_string(i) + "; training halted");
    }
  }
  for (std::size_t i = 0; i < P; ++i) {
    opt.velocity_mu[i] = opt.momentum * opt.velocity_mu[i] +
                         (grads.d_mu[i] + opt.weight_decay * post.mu[i]);
    post.mu[i] -= opt.lr * opt.velocity_mu[i];
    opt.velocity_rho[i] = opt.momentum * opt.velocity_rho[i] + grads.d_rho[i];
    post.rho[i] -= opt.lr * opt.velocity_rho[i];
  }
}

}  // namespace ciosl
