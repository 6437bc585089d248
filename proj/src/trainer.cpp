#include "ciosl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace ciosl {

void HyperParams::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw std::invalid_argument("HyperParams: lambda1/lambda2 must be >= 0");
  }
  if (k_uncertainty == 0) throw std::invalid_argument("HyperParams: k_uncertainty must be >= 1");
  if (base_batch == 0) throw std::invalid_argument("HyperParams: base_batch must be >= 1");
  if (lr <= 0.0) throw std::invalid_argument("HyperParams: lr must be > 0");
  if (momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("HyperParams: momentum must be in [0, 1)");
  }
  if (weight_decay < 0.0) throw std::invalid_argument("HyperParams: weight_decay must be >= 0");
}

LearnerKind learner_kind_from_string(const std::string& name) {
  if (name == "ciosl") return LearnerKind::CIOSL;
  if (name == "fine-tune" || name == "finetune") return LearnerKind::FineTune;
  if (name == "offline") return LearnerKind::Offline;
  throw std::invalid_argument("unknown learner '" + name +
                              "' (expected ciosl|fine-tune|offline)");
}

std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::CIOSL: return "ciosl";
    case LearnerKind::FineTune: return "fine-tune";
    case LearnerKind::Offline: return "offline";
  }
  return "ciosl";
}

StreamingTrainer::StreamingTrainer(const Dataset& dataset, const HyperParams& hp,
                                   ReplacementPolicy policy, SamplingStrategy sampling,
                                   std::uint64_t seed)
    : dataset_(dataset),
      hp_(hp),
      policy_(policy),
      sampling_(sampling),
      rng_(derive_seed(seed, "train")) {
  hp_.validate();
  shape_.input_dim = dataset.dim;
  shape_.hidden_dims = hp.hidden_dims;
  shape_.output_dim = dataset.num_classes;
  shape_.validate();
  posterior_ = MeanFieldPosterior::initialize(shape_, rng_, hp.initial_sigma);
  prior_ = FrozenPrior::standard_normal(posterior_.param_count());
  opt_ = OptimizerState::create(posterior_.param_count(), hp.lr, hp.momentum,
                                hp.weight_decay);
  if (hp.buffer_capacity > 0) buffer_.emplace(hp.buffer_capacity);
}

std::vector<std::vector<double>> StreamingTrainer::draw_score_family() {
  std::vector<std::vector<double>> thetas;
  thetas.reserve(hp_.k_uncertainty);
  for (std::size_t i = 0; i < hp_.k_uncertainty; ++i) {
    thetas.push_back(sample_weights(posterior_, rng_).theta);
  }
  return thetas;
}

StreamingTrainer::Scores StreamingTrainer::score_record(
    const std::vector<std::vector<double>>& thetas, const DatasetRecord& record) const {
  // Loss and logits at the posterior mean: distillation targets must be
  // stable, and a sampled draw would leak weight noise into every stored
  // logit. Uncertainty keeps the k-sample averaged predictive entropy.
  Scores s;
  s.logits = forward(shape_, posterior_.mu, record.z);
  s.loss = cross_entropy(s.logits, record.label);
  s.uncertainty = entropy(predict_proba_with(shape_, thetas, record.z));
  return s;
}

void StreamingTrainer::base_initialize(const std::vector<std::size_t>& base_indices) {
  if (base_indices.empty()) {
    throw std::invalid_argument("base_initialize: base split is empty");
  }
  const FrozenPrior initial_prior = FrozenPrior::standard_normal(posterior_.param_count());
  // Offline objective NLL + lambda1 * KL, normalized per sample so one batch
  // step has the scale of traditional mean-reduced training: each batch
  // optimizes (1/B) sum NLL + lambda1 * KL / N. Same minimizer, stable steps.
  const double kl_weight = hp_.lambda1 / static_cast<double>(base_indices.size());

  std::vector<std::size_t> order = base_indices;
  std::vector<double> eps(posterior_.param_count());
  for (std::size_t epoch = 0; epoch < hp_.base_epochs; ++epoch) {
    rng_.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += hp_.base_batch) {
      const std::size_t end = std::min(order.size(), start + hp_.base_batch);
      const double batch_size = static_cast<double>(end - start);
      const DatasetRecord& first = dataset_.records[order[start]];
      LabeledExample head{first.z, first.label};
      std::vector<LabeledExample> rest;
      rest.reserve(end - start - 1);
      for (std::size_t k = start + 1; k < end; ++k) {
        const DatasetRecord& r = dataset_.records[order[k]];
        rest.push_back({r.z, r.label});
      }
      rng_.fill_normal(eps);
      auto result = streaming_loss_at(posterior_, initial_prior, head, rest, {},
                                      kl_weight * batch_size, 0.0, eps);
      for (std::size_t i = 0; i < result.grads.d_mu.size(); ++i) {
        result.grads.d_mu[i] /= batch_size;
        result.grads.d_rho[i] /= batch_size;
      }
      sgd_step(posterior_, result.grads, opt_);
    }
  }
  prior_ = FrozenPrior::from_posterior(posterior_);

  if (buffer_) {
    const auto thetas = draw_score_family();
    for (std::size_t idx : base_indices) {
      const DatasetRecord& r = dataset_.records[idx];
      const Scores s = score_record(thetas, r);
      MemoryEntry e;
      e.z = r.z;
      e.y = r.label;
      e.h = s.logits;
      e.loss = s.loss;
      e.uncertainty = s.uncertainty;
      buffer_->insert(std::move(e), policy_, rng_);
    }
  }
}

void StreamingTrainer::stream_step(std::size_t record_index) {
  const DatasetRecord& record = dataset_.records.at(record_index);

  // Snapshot so a numeric failure leaves the learner untouched.
  const std::vector<double> saved_mu = posterior_.mu;
  const std::vector<double> saved_rho = posterior_.rho;
  const std::vector<double> saved_vmu = opt_.velocity_mu;
  const std::vector<double> saved_vrho = opt_.velocity_rho;
  const RandomSource saved_rng = rng_;

  try {
    std::vector<std::size_t> replay_idx, kd_idx;
    if (buffer_ && buffer_->size() > 0) {
      replay_idx = buffer_->sample_replay(hp_.n_replay, sampling_, rng_);
      kd_idx = buffer_->sample_replay(hp_.n_kd, SamplingStrategy::Uniform, rng_);
    }
    std::vector<LabeledExample> replay;
    replay.reserve(replay_idx.size());
    for (std::size_t i : replay_idx) {
      const MemoryEntry& e = buffer_->entry(i);
      replay.push_back({e.z, e.y});
    }
    std::vector<DistillExample> kd;
    kd.reserve(kd_idx.size());
    for (std::size_t i : kd_idx) {
      const MemoryEntry& e = buffer_->entry(i);
      kd.push_back({e.z, e.h});
    }

    std::vector<double> eps(posterior_.param_count());
    rng_.fill_normal(eps);
    LabeledExample incoming{record.z, record.label};
    auto result = streaming_loss_at(posterior_, prior_, incoming, replay, kd,
                                    hp_.lambda1, hp_.lambda2, eps);
    sgd_step(posterior_, result.grads, opt_);
    ++stream_steps_;

    if (buffer_) {
      const auto thetas = draw_score_family();

      // Refresh scores of every entry touched this step (replay and KD sets
      // may overlap; each entry is updated once).
      std::vector<std::size_t> touched = replay_idx;
      touched.insert(touched.end(), kd_idx.begin(), kd_idx.end());
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

      std::vector<double> losses, uncertainties;
      std::vector<std::vector<double>> logits;
      losses.reserve(touched.size());
      uncertainties.reserve(touched.size());
      logits.reserve(touched.size());
      for (std::size_t i : touched) {
        const MemoryEntry& e = buffer_->entry(i);
        std::vector<double> cur = forward(shape_, posterior_.mu, e.z);
        losses.push_back(cross_entropy(cur, e.y));
        uncertainties.push_back(entropy(predict_proba_with(shape_, thetas, e.z)));
        logits.push_back(std::move(cur));
      }
      buffer_->update_scores(touched, losses, logits, uncertainties);

      const Scores s = score_record(thetas, record);
      MemoryEntry e;
      e.z = record.z;
      e.y = record.label;
      e.h = s.logits;
      e.loss = s.loss;
      e.uncertainty = s.uncertainty;
      buffer_->insert(std::move(e), policy_, rng_);
    }
    prior_ = FrozenPrior::from_posterior(posterior_);
  } catch (...) {
    posterior_.mu = saved_mu;
    posterior_.rho = saved_rho;
    opt_.velocity_mu = saved_vmu;
    opt_.velocity_rho = saved_vrho;
    rng_ = saved_rng;
    throw;
  }
}

double StreamingTrainer::evaluate(const std::vector<std::size_t>& test_indices,
                                  std::uint64_t eval_seed) const {
  if (test_indices.empty()) {
    throw std::invalid_argument("evaluate: test set is empty");
  }
  std::vector<std::vector<double>> thetas;
  if (hp_.eval_posterior_mean) {
    thetas.push_back(posterior_.mu);
  } else {
    RandomSource eval_rng(eval_seed);
    thetas.reserve(hp_.k_uncertainty);
    for (std::size_t i = 0; i < hp_.k_uncertainty; ++i) {
      thetas.push_back(sample_weights(posterior_, eval_rng).theta);
    }
  }
  std::size_t correct = 0;
  for (std::size_t idx : test_indices) {
    const DatasetRecord& r = dataset_.records[idx];
    const std::vector<double> probs = predict_proba_with(shape_, thetas, r.z);
    if (argmax_lowest(probs) == r.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_indices.size());
}

namespace {

std::vector<std::size_t> test_of_seen_classes(const Dataset& dataset,
                                              const std::vector<std::size_t>& test_indices,
                                              const std::set<std::uint32_t>& seen) {
  std::vector<std::size_t> out;
  for (std::size_t i : test_indices) {
    if (seen.count(dataset.records[i].label)) out.push_back(i);
  }
  return out;
}

}  // namespace

RunTrace run_experiment_with_plan(const Dataset& dataset, const StreamPlan& plan,
                                  const std::vector<std::size_t>& test_indices,
                                  const HyperParams& hp, ReplacementPolicy policy,
                                  SamplingStrategy sampling, LearnerKind learner,
                                  std::uint64_t seed, const EventCallback& on_event) {
  HyperParams effective = hp;
  if (learner == LearnerKind::FineTune) {
    effective.lambda1 = 0.0;
    effective.lambda2 = 0.0;
    effective.buffer_capacity = 0;
  } else if (learner == LearnerKind::Offline) {
    effective.lambda2 = 0.0;
    effective.buffer_capacity = 0;
  }

  RunTrace trace;
  trace.plan_hash = plan.hash();
  for (const auto& inc : plan.increments) trace.stream_length += inc.size();

  std::set<std::uint32_t> seen;
  for (std::size_t i : plan.base_init) seen.insert(dataset.records[i].label);

  const std::size_t n_events = 1 + plan.increments.size();
  std::size_t samples_seen = 0;

  auto record_event = [&](std::size_t event, double alpha, std::size_t n_test) {
    EventRecord ev;
    ev.event = event;
    ev.alpha = alpha;
    ev.classes_seen = seen.size();
    ev.stream_samples_seen = samples_seen;
    ev.test_records = n_test;
    trace.alpha.push_back(alpha);
    trace.events.push_back(ev);
    if (on_event) on_event(ev);
  };

  if (learner == LearnerKind::Offline) {
    // Fresh from-scratch model per testing event on everything revealed so far.
    std::vector<std::size_t> revealed = plan.base_init;
    for (std::size_t event = 0; event < n_events; ++event) {
      if (event > 0) {
        const auto& inc = plan.increments[event - 1];
        revealed.insert(revealed.end(), inc.begin(), inc.end());
        for (std::size_t i : inc) seen.insert(dataset.records[i].label);
        samples_seen += inc.size();
      }
      StreamingTrainer fresh(dataset, effective, policy, sampling,
                             derive_seed(seed, "offline-event", event));
      fresh.base_initialize(revealed);
      const auto eligible = test_of_seen_classes(dataset, test_indices, seen);
      const double alpha = fresh.evaluate(eligible, derive_seed(seed, "eval", event));
      record_event(event, alpha, eligible.size());
    }
    return trace;
  }

  StreamingTrainer trainer(dataset, effective, policy, sampling, seed);
  trainer.base_initialize(plan.base_init);
  {
    const auto eligible = test_of_seen_classes(dataset, test_indices, seen);
    record_event(0, trainer.evaluate(eligible, derive_seed(seed, "eval", 0)),
                 eligible.size());
  }
  for (std::size_t inc_idx = 0; inc_idx < plan.increments.size(); ++inc_idx) {
    for (std::size_t record_index : plan.increments[inc_idx]) {
      trainer.stream_step(record_index);
      trace.visited_stream_indices.push_back(record_index);
      seen.insert(dataset.records[record_index].label);
      ++samples_seen;
    }
    const std::size_t event = inc_idx + 1;
    const auto eligible = test_of_seen_classes(dataset, test_indices, seen);
    record_event(event, trainer.evaluate(eligible, derive_seed(seed, "eval", event)),
                 eligible.size());
  }
  trace.gradient_steps_stream = trainer.stream_step_count();
  if (trainer.buffer()) trace.final_buffer = trainer.buffer()->snapshot();
  return trace;
}

RunTrace run_experiment(const Dataset& dataset, const OrderingSpec& ordering,
                        const HyperParams& hp, ReplacementPolicy policy,
                        SamplingStrategy sampling, LearnerKind learner,
                        std::uint64_t seed, double test_fraction,
                        const EventCallback& on_event) {
  const TrainTestSplit split = split_train_test(dataset, test_fraction);
  Dataset train_view = subset(dataset, split.train);
  StreamPlan plan = build_stream(train_view, ordering, seed);
  // Map plan indices from the train view back to dataset indices.
  for (auto& i : plan.base_init) i = split.train[i];
  for (auto& inc : plan.increments) {
    for (auto& i : inc) i = split.train[i];
  }
  return run_experiment_with_plan(dataset, plan, split.test, hp, policy, sampling,
                                  learner, seed, on_event);
}

}  // namespace ciosl
