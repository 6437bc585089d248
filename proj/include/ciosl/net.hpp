#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ciosl {

// Architecture of the plastic classifier head: a fully connected ReLU MLP
// whose parameters live in one flat vector (weights row-major, then bias,
// layer by layer). The output head is sized to the full class count at
// construction and never grows.
struct NetShape {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims{256, 256};
  std::size_t output_dim = 0;

  struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t w_offset = 0;  // out x in weights, row-major
    std::size_t b_offset = 0;  // out biases
  };

  void validate() const;  // throws std::invalid_argument on zero dims
  std::vector<Layer> layers() const;
  std::size_t param_count() const;

  bool operator==(const NetShape&) const = default;
};

// Per-layer activations kept around for backprop. pre.back() holds the
// logits (no activation on the output layer).
struct ForwardTrace {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> act;  // act[l] = input to layer l
};

// logits = W_L . relu( ... relu(W_1 . z + b_1) ... ) + b_L
std::vector<double> forward(const NetShape& shape, std::span<const double> theta,
                            std::span<const double> z);

void forward_trace(const std::vector<NetShape::Layer>& layers,
                   std::span<const double> theta, std::span<const double> z,
                   ForwardTrace& trace);

// Accumulates dL/dtheta into grad given dL/dlogits and the trace of the
// forward pass that produced those logits.
void backward_accumulate(const std::vector<NetShape::Layer>& layers,
                         std::span<const double> theta, const ForwardTrace& trace,
                         std::span<const double> d_logits,
                         std::span<double> grad);

void softmax_inplace(std::vector<double>& v);
std::vector<double> softmax(std::span<const double> logits);

// -log softmax(logits)[label], computed with the log-sum-exp shift.
double cross_entropy(std::span<const double> logits, std::size_t label);

}  // namespace ciosl
