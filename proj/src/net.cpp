#include "ciosl/net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ciosl {

void NetShape::validate() const {
  if (input_dim == 0) throw std::invalid_argument("NetShape: input_dim must be >= 1");
  if (output_dim == 0) throw std::invalid_argument("NetShape: output_dim must be >= 1");
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw std::invalid_argument("NetShape: hidden dims must be >= 1");
  }
}

std::vector<NetShape::Layer> NetShape::layers() const {
  std::vector<Layer> out;
  out.reserve(hidden_dims.size() + 1);
  std::size_t prev = input_dim;
  std::size_t offset = 0;
  auto push = [&](std::size_t in, std::size_t n) {
    Layer l;
    l.in = in;
    l.out = n;
    l.w_offset = offset;
    l.b_offset = offset + in * n;
    offset = l.b_offset + n;
    out.push_back(l);
  };
  for (std::size_t h : hidden_dims) {
    push(prev, h);
    prev = h;
  }
  push(prev, output_dim);
  return out;
}

std::size_t NetShape::param_count() const {
  std::size_t total = 0;
  std::size_t prev = input_dim;
  for (std::size_t h : hidden_dims) {
    total += prev * h + h;
    prev = h;
  }
  total += prev * output_dim + output_dim;
  return total;
}

void forward_trace(const std::vector<NetShape::Layer>& layers,
                   std::span<const double> theta, std::span<const double> z,
                   ForwardTrace& trace) {
  const std::size_t L = layers.size();
  trace.pre.resize(L);
  trace.act.resize(L);
  trace.act[0].assign(z.begin(), z.end());
  for (std::size_t l = 0; l < L; ++l) {
    const auto& lay = layers[l];
    const std::vector<double>& in = trace.act[l];
    std::vector<double>& pre = trace.pre[l];
    pre.resize(lay.out);
    const double* w = theta.data() + lay.w_offset;
    const double* b = theta.data() + lay.b_offset;
    for (std::size_t i = 0; i < lay.out; ++i) {
      double s = b[i];
      const double* row = w + i * lay.in;
      for (std::size_t j = 0; j < lay.in; ++j) s += row[j] * in[j];
      pre[i] = s;
    }
    if (l + 1 < L) {
      std::vector<double>& act = trace.act[l + 1];
      act.resize(lay.out);
      for (std::size_t i = 0; i < lay.out; ++i) act[i] = pre[i] > 0.0 ? pre[i] : 0.0;
    }
  }
}

std::vector<double> forward(const NetShape& shape, std::span<const double> theta,
                            std::span<const double> z) {
  if (theta.size() != shape.param_count()) {
    throw std::invalid_argument("forward: parameter vector length mismatch: expected " +
                                std::to_string(shape.param_count()) + ", got " +
                                std::to_string(theta.size()));
  }
  if (z.size() != shape.input_dim) {
    throw std::invalid_argument("forward: embedding dimension mismatch: expected " +
                                std::to_string(shape.input_dim) + ", got " +
                                std::to_string(z.size()));
  }
  ForwardTrace trace;
  forward_trace(shape.layers(), theta, z, trace);
  return trace.pre.back();
}

void backward_accumulate(const std::vector<NetShape::Layer>& layers,
                         std::span<const double> theta, const ForwardTrace& trace,
                         std::span<const double> d_logits,
                         std::span<double> grad) {
  const std::size_t L = layers.size();
  std::vector<double> d_pre(d_logits.begin(), d_logits.end());
  for (std::size_t l = L; l-- > 0;) {
    const auto& lay = layers[l];
    const std::vector<double>& in = trace.act[l];
    double* gw = grad.data() + lay.w_offset;
    double* gb = grad.data() + lay.b_offset;
    for (std::size_t i = 0; i < lay.out; ++i) {
      const double d = d_pre[i];
      gb[i] += d;
      double* row = gw + i * lay.in;
      for (std::size_t j = 0; j < lay.in; ++j) row[j] += d * in[j];
    }
    if (l == 0) break;
    const double* w = theta.data() + lay.w_offset;
    std::vector<double> d_in(lay.in, 0.0);
    for (std::size_t i = 0; i < lay.out; ++i) {
      const double d = d_pre[i];
      if (d == 0.0) continue;
      const double* row = w + i * lay.in;
      for (std::size_t j = 0; j < lay.in; ++j) d_in[j] += d * row[j];
    }
    // ReLU gate of the previous layer
    const std::vector<double>& prev_pre = trace.pre[l - 1];
    for (std::size_t j = 0; j < d_in.size(); ++j) {
      if (prev_pre[j] <= 0.0) d_in[j] = 0.0;
    }
    d_pre = std::move(d_in);
  }
}

void softmax_inplace(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  softmax_inplace(p);
  return p;
}

double cross_entropy(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) {
    throw std::invalid_argument("cross_entropy: label " + std::to_string(label) +
                                " out of range for " + std::to_string(logits.size()) +
                                " classes");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double x : logits) sum += std::exp(x - m);
  return std::log(sum) + m - logits[label];
}

}  // namespace ciosl
