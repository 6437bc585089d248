#include "ciosl/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ciosl {

namespace {

// Losses can legitimately reach zero; clamp keeps 1/loss finite while
// preserving the ordering.
constexpr double kMinLoss = 1e-8;

std::size_t weighted_pick(const std::vector<double>& weights, RandomSource& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = rng.uniform01() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
  }
  entries_.reserve(capacity);
}

void ReplayBuffer::validate_entry(const MemoryEntry& entry) const {
  if (!(entry.loss >= 0.0) || !std::isfinite(entry.loss)) {
    throw std::invalid_argument("ReplayBuffer: entry loss must be finite and >= 0");
  }
  if (!std::isfinite(entry.uncertainty) || entry.uncertainty < 0.0) {
    throw std::invalid_argument("ReplayBuffer: entry uncertainty must be finite and >= 0");
  }
  for (double v : entry.h) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("ReplayBuffer: entry logits must be finite");
    }
  }
}

InsertReport ReplayBuffer::insert(MemoryEntry entry, ReplacementPolicy policy,
                                  RandomSource& rng) {
  validate_entry(entry);
  ++seen_count_;
  InsertReport report;
  if (entries_.size() < capacity_) {
    ++class_counts_[entry.y];
    entries_.push_back(std::move(entry));
    report.stored = true;
    return report;
  }
  switch (policy) {
    case ReplacementPolicy::LAWCBR: {
      // Always admits; evicts from the majority class.
      const std::size_t victim = lawcbr_select_victim(rng);
      --class_counts_[entries_[victim].y];
      if (class_counts_[entries_[victim].y] == 0) class_counts_.erase(entries_[victim].y);
      ++class_counts_[entry.y];
      entries_[victim] = std::move(entry);
      report.stored = true;
      report.victim_index = victim;
      break;
    }
    case ReplacementPolicy::LAWRRR: {
      // Classical reservoir admission: keep the n-th arrival w.p. capacity/n.
      const double admit =
          static_cast<double>(capacity_) / static_cast<double>(seen_count_);
      if (rng.uniform01() < admit) {
        const std::size_t victim = lawrrr_select_victim(rng);
        --class_counts_[entries_[victim].y];
        if (class_counts_[entries_[victim].y] == 0) class_counts_.erase(entries_[victim].y);
        ++class_counts_[entry.y];
        entries_[victim] = std::move(entry);
        report.stored = true;
        report.victim_index = victim;
      }
      break;
    }
  }
  return report;
}

std::size_t ReplayBuffer::lawcbr_select_victim(RandomSource& rng) const {
  if (entries_.empty()) {
    throw std::logic_error("lawcbr_select_victim: buffer is empty");
  }
  // argmax class count; ties broken by smallest class index (map is ordered).
  std::size_t majority = 0;
  std::size_t best = 0;
  for (const auto& [y, count] : class_counts_) {
    if (count > best) {
      best = count;
      majority = y;
    }
  }
  std::vector<std::size_t> members;
  std::vector<double> weights;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].y == majority) {
      members.push_back(i);
      weights.push_back(1.0 / std::max(entries_[i].loss, kMinLoss));
    }
  }
  return members[weighted_pick(weights, rng)];
}

std::size_t ReplayBuffer::lawrrr_select_victim(RandomSource& rng) const {
  if (entries_.empty()) {
    throw std::logic_error("lawrrr_select_victim: buffer is empty");
  }
  std::vector<double> weights(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const double count = static_cast<double>(class_counts_.at(entries_[i].y));
    weights[i] = count / std::max(entries_[i].loss, kMinLoss);
  }
  return weighted_pick(weights, rng);
}

std::vector<std::size_t> ReplayBuffer::sample_replay(std::size_t n,
                                                     SamplingStrategy strategy,
                                                     RandomSource& rng) const {
  if (n == 0) return {};
  if (entries_.size() <= n) {
    std::vector<std::size_t> all(entries_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  if (strategy == SamplingStrategy::Uniform) {
    return rng.sample_without_replacement(entries_.size(), n);
  }

  auto score = [&](std::size_t i) {
    return strategy == SamplingStrategy::UAPN ? entries_[i].uncertainty
                                              : entries_[i].loss;
  };
  std::vector<std::size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  // Negative (high-score) half first: ceil(n/2) by descending score, older
  // entries first among ties.
  const std::size_t n_high = (n + 1) / 2;
  const std::size_t n_low = n / 2;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score(a) != score(b)) return score(a) > score(b);
    return a < b;
  });
  std::vector<std::size_t> picked(order.begin(), order.begin() + n_high);
  std::vector<bool> taken(entries_.size(), false);
  for (std::size_t i : picked) taken[i] = true;

  // Positive (low-score) half from the remainder, ascending, older first.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score(a) != score(b)) return score(a) < score(b);
    return a < b;
  });
  for (std::size_t i : order) {
    if (picked.size() == n_high + n_low) break;
    if (!taken[i]) picked.push_back(i);
  }
  return picked;
}

void ReplayBuffer::update_scores(std::span<const std::size_t> indices,
                                 std::span<const double> new_losses,
                                 std::span<const std::vector<double>> new_logits,
                                 std::span<const double> new_uncertainties) {
  if (indices.size() != new_losses.size() || indices.size() != new_logits.size() ||
      indices.size() != new_uncertainties.size()) {
    throw std::invalid_argument("update_scores: argument lengths differ");
  }
  for (std::size_t i : indices) {
    if (i >= entries_.size()) {
      throw std::out_of_range("update_scores: index " + std::to_string(i) +
                              " out of range for buffer of size " +
                              std::to_string(entries_.size()));
    }
  }
  for (std::size_t k = 0; k < indices.size(); ++k) {
    MemoryEntry& e = entries_[indices[k]];
    e.loss = new_losses[k];
    e.h = new_logits[k];
    e.uncertainty = new_uncertainties[k];
  }
}

std::size_t ReplayBuffer::class_count(std::size_t y) const {
  auto it = class_counts_.find(y);
  return it == class_counts_.end() ? 0 : it->second;
}

BufferSnapshot ReplayBuffer::snapshot() const {
  BufferSnapshot snap;
  snap.size = entries_.size();
  snap.capacity = capacity_;
  snap.seen_count = seen_count_;
  snap.class_counts = class_counts_;
  constexpr std::size_t kBins = 16;
  snap.loss_histogram.assign(kBins, 0);
  snap.uncertainty_histogram.assign(kBins, 0);
  for (const auto& e : entries_) {
    snap.loss_max = std::max(snap.loss_max, e.loss);
    snap.uncertainty_max = std::max(snap.uncertainty_max, e.uncertainty);
  }
  for (const auto& e : entries_) {
    const std::size_t lb =
        snap.loss_max > 0.0
            ? std::min(kBins - 1, static_cast<std::size_t>(e.loss / snap.loss_max * kBins))
            : 0;
    const std::size_t ub =
        snap.uncertainty_max > 0.0
            ? std::min(kBins - 1, static_cast<std::size_t>(e.uncertainty /
                                                           snap.uncertainty_max * kBins))
            : 0;
    ++snap.loss_histogram[lb];
    ++snap.uncertainty_histogram[ub];
  }
  return snap;
}

void ReplayBuffer::check_consistency() const {
  if (entries_.size() > capacity_) {
    throw std::logic_error("ReplayBuffer: size exceeds capacity");
  }
  if (seen_count_ < entries_.size()) {
    throw std::logic_error("ReplayBuffer: seen_count below entry count");
  }
  std::map<std::size_t, std::size_t> recount;
  for (const auto& e : entries_) ++recount[e.y];
  if (recount != class_counts_) {
    throw std::logic_error("ReplayBuffer: class_counts out of sync with entries");
  }
}

std::string to_string(ReplacementPolicy policy) {
  return policy == ReplacementPolicy::LAWCBR ? "lawcbr" : "lawrrr";
}

std::string to_string(SamplingStrategy strategy) {
  switch (strategy) {
    case SamplingStrategy::Uniform: return "uniform";
    case SamplingStrategy::UAPN: return "uapn";
    case SamplingStrategy::LAPN: return "lapn";
  }
  return "uniform";
}

}  // namespace ciosl
