#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ciosl/random.hpp"

namespace ciosl {

// One stored rehearsal tuple: embedding, label, the logits observed when the
// entry was last touched, and its current loss / predictive-uncertainty
// scores (kept online so loss-aware policies never rescan the buffer).
struct MemoryEntry {
  std::vector<double> z;
  std::size_t y = 0;
  std::vector<double> h;
  double loss = 0.0;
  double uncertainty = 0.0;
};

enum class ReplacementPolicy { LAWCBR, LAWRRR };
enum class SamplingStrategy { Uniform, UAPN, LAPN };

struct InsertReport {
  bool stored = false;
  std::optional<std::size_t> victim_index;
};

struct BufferSnapshot {
  std::size_t size = 0;
  std::size_t capacity = 0;
  std::size_t seen_count = 0;
  std::map<std::size_t, std::size_t> class_counts;
  std::vector<std::size_t> loss_histogram;         // 16 bins over [0, max]
  std::vector<std::size_t> uncertainty_histogram;  // 16 bins over [0, max]
  double loss_max = 0.0;
  double uncertainty_max = 0.0;
};

// Fixed-capacity episodic memory with loss-aware replacement and
// positive/negative replay selection. Single-writer; callers serialize
// mutation.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  // Counts the arrival, then either appends (buffer not full) or dispatches
  // to the configured replacement rule.
  InsertReport insert(MemoryEntry entry, ReplacementPolicy policy, RandomSource& rng);

  // Victim from the class with the most stored samples (ties -> smallest
  // class index), drawn with probability proportional to 1/loss within it.
  std::size_t lawcbr_select_victim(RandomSource& rng) const;

  // Victim drawn with probability proportional to ClassCount(y_i) / loss_i;
  // callers run the reservoir admission test first.
  std::size_t lawrrr_select_victim(RandomSource& rng) const;

  // Uniform: n without replacement. UAPN / LAPN: ceil(n/2) highest plus
  // floor(n/2) lowest scores (uncertainty / loss), halves disjoint, ties by
  // insertion order (older first). Returns everything when size <= n.
  std::vector<std::size_t> sample_replay(std::size_t n, SamplingStrategy strategy,
                                         RandomSource& rng) const;

  void update_scores(std::span<const std::size_t> indices,
                     std::span<const double> new_losses,
                     std::span<const std::vector<double>> new_logits,
                     std::span<const double> new_uncertainties);

  std::size_t size() const { return entries_.size(); }
  bool full() const { return entries_.size() == capacity_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t seen_count() const { return seen_count_; }
  const MemoryEntry& entry(std::size_t i) const { return entries_.at(i); }
  const std::vector<MemoryEntry>& entries() const { return entries_; }
  const std::map<std::size_t, std::size_t>& class_counts() const { return class_counts_; }
  std::size_t class_count(std::size_t y) const;

  BufferSnapshot snapshot() const;

  // Validates size/capacity and that class_counts matches a recount.
  void check_consistency() const;

 private:
  void validate_entry(const MemoryEntry& entry) const;

  std::size_t capacity_;
  std::size_t seen_count_ = 0;
  std::vector<MemoryEntry> entries_;
  std::map<std::size_t, std::size_t> class_counts_;
};

std::string to_string(ReplacementPolicy policy);
std::string to_string(SamplingStrategy strategy);

}  // namespace ciosl
