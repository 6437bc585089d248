#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "ciosl/dataset_io.hpp"
#include "ciosl/metrics.hpp"
#include "ciosl/ordering.hpp"
#include "ciosl/replay_buffer.hpp"
#include "ciosl/vbnn.hpp"

namespace ciosl {

struct HyperParams {
  double lambda1 = 1.0;
  double lambda2 = 0.3;
  std::size_t n_replay = 16;  // N1'
  std::size_t n_kd = 16;      // N2'
  std::size_t k_uncertainty = 5;
  std::size_t buffer_capacity = 180;
  std::size_t base_epochs = 30;
  std::size_t base_batch = 16;
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-5;
  std::vector<std::size_t> hidden_dims{256, 256};
  double initial_sigma = 0.05;
  bool eval_posterior_mean = false;

  void validate() const;
};

enum class LearnerKind { CIOSL, FineTune, Offline };

LearnerKind learner_kind_from_string(const std::string& name);
std::string to_string(LearnerKind kind);

// Owns the posterior, the frozen prior it is regularized towards, the
// optimizer and the episodic buffer for one learner. Single logical thread
// of control; evaluation reads an immutable snapshot.
class StreamingTrainer {
 public:
  StreamingTrainer(const Dataset& dataset, const HyperParams& hp,
                   ReplacementPolicy policy, SamplingStrategy sampling,
                   std::uint64_t seed);

  // Offline warm-up on the base split: shuffled mini-batches minimizing
  // NLL + lambda1 * KL against the fixed N(0,1) prior (the KL split evenly
  // across the epoch's batches), then prior <- posterior and, when a buffer
  // exists, the base samples are streamed through insert() with their
  // post-training scores.
  void base_initialize(const std::vector<std::size_t>& base_indices);

  // One single-pass update: select replay (configured strategy) and KD
  // (uniform) batches, take one SGD step on the joint streaming loss,
  // refresh the touched entries' scores, insert the new sample, and set
  // prior <- posterior. A failing step leaves all state unchanged.
  void stream_step(std::size_t record_index);

  // Accuracy over the given records; class-incremental argmax with ties
  // broken toward the lowest class index. Deterministic given eval_seed.
  double evaluate(const std::vector<std::size_t>& test_indices,
                  std::uint64_t eval_seed) const;

  const MeanFieldPosterior& posterior() const { return posterior_; }
  const FrozenPrior& prior() const { return prior_; }
  const std::optional<ReplayBuffer>& buffer() const { return buffer_; }
  std::size_t stream_step_count() const { return stream_steps_; }

 private:
  struct Scores {
    double loss = 0.0;
    std::vector<double> logits;
    double uncertainty = 0.0;
  };
  std::vector<std::vector<double>> draw_score_family();
  Scores score_record(const std::vector<std::vector<double>>& thetas,
                      const DatasetRecord& record) const;

  const Dataset& dataset_;
  HyperParams hp_;
  ReplacementPolicy policy_;
  SamplingStrategy sampling_;
  NetShape shape_;
  MeanFieldPosterior posterior_;
  FrozenPrior prior_;
  OptimizerState opt_;
  std::optional<ReplayBuffer> buffer_;
  RandomSource rng_;
  std::size_t stream_steps_ = 0;
};

// One testing event of a run.
struct EventRecord {
  std::size_t event = 0;
  double alpha = 0.0;
  std::size_t classes_seen = 0;
  std::size_t stream_samples_seen = 0;
  std::size_t test_records = 0;
};

struct RunTrace {
  std::vector<double> alpha;
  std::vector<EventRecord> events;
  std::uint64_t plan_hash = 0;
  std::size_t stream_length = 0;
  std::size_t gradient_steps_stream = 0;       // excludes base init and Offline
  std::vector<std::size_t> visited_stream_indices;  // single-pass audit
  std::optional<BufferSnapshot> final_buffer;
};

using EventCallback = std::function<void(const EventRecord&)>;

// Runs one learner over a prebuilt plan (indices into `dataset`):
//   CIOSL    - base init, then stream_step per sample
//   FineTune - the same loop with no buffer and lambda1 = lambda2 = 0
//   Offline  - a fresh model per testing event, trained on everything
//              revealed so far (the Omega_all reference)
// Testing events fall after base init and after every increment, restricted
// to test records of classes already observed.
RunTrace run_experiment_with_plan(const Dataset& dataset, const StreamPlan& plan,
                                  const std::vector<std::size_t>& test_indices,
                                  const HyperParams& hp, ReplacementPolicy policy,
                                  SamplingStrategy sampling, LearnerKind learner,
                                  std::uint64_t seed,
                                  const EventCallback& on_event = nullptr);

// Convenience wrapper: splits the dataset, builds the stream plan for the
// ordering, and runs the learner.
RunTrace run_experiment(const Dataset& dataset, const OrderingSpec& ordering,
                        const HyperParams& hp, ReplacementPolicy policy,
                        SamplingStrategy sampling, LearnerKind learner,
                        std::uint64_t seed, double test_fraction = 0.2,
                        const EventCallback& on_event = nullptr);

}  // namespace ciosl
