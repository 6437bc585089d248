#include "ciosl/ordering.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <stdexcept>

namespace ciosl {

namespace {

// Groups record indices per class, preserving file order within each class.
std::vector<std::vector<std::size_t>> indices_by_class(const Dataset& dataset) {
  std::vector<std::vector<std::size_t>> per_class(dataset.num_classes);
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    per_class[dataset.records[i].label].push_back(i);
  }
  return per_class;
}

// Indices of one class ordered by (instance_id, frame_index): instances
// contiguous, frames temporally ordered within each instance.
std::vector<std::size_t> temporal_order_within_class(const Dataset& dataset,
                                                     const std::vector<std::size_t>& members) {
  std::vector<std::size_t> out = members;
  std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = dataset.records[a];
    const auto& rb = dataset.records[b];
    if (ra.instance_id != rb.instance_id) return ra.instance_id < rb.instance_id;
    return ra.frame_index < rb.frame_index;
  });
  return out;
}

// Round-robin over instances in blocks of block_size temporally ordered
// frames, cycling until every instance is exhausted.
std::vector<std::size_t> interleave_instances(const Dataset& dataset,
                                              const std::vector<std::size_t>& pool,
                                              std::size_t block_size) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::size_t>> groups;
  for (std::size_t i : pool) {
    const auto& r = dataset.records[i];
    groups[{r.label, r.instance_id}].push_back(i);
  }
  std::vector<std::vector<std::size_t>> sequences;
  sequences.reserve(groups.size());
  for (auto& [key, members] : groups) {
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return dataset.records[a].frame_index < dataset.records[b].frame_index;
    });
    sequences.push_back(std::move(members));
  }
  std::vector<std::size_t> out;
  out.reserve(pool.size());
  std::vector<std::size_t> cursor(sequences.size(), 0);
  bool any = true;
  while (any) {
    any = false;
    for (std::size_t g = 0; g < sequences.size(); ++g) {
      std::size_t taken = 0;
      while (cursor[g] < sequences[g].size() && taken < block_size) {
        out.push_back(sequences[g][cursor[g]++]);
        ++taken;
      }
      if (taken > 0) any = true;
    }
  }
  return out;
}

// Splits a stream into evenly sized chunks so a testing event lands after
// every cadence-fraction of the streamed samples.
std::vector<std::vector<std::size_t>> chunk_by_cadence(const std::vector<std::size_t>& stream,
                                                       double cadence_fraction) {
  std::vector<std::vector<std::size_t>> chunks;
  if (stream.empty()) return chunks;
  std::size_t n_chunks = static_cast<std::size_t>(std::max(1.0, 1.0 / cadence_fraction));
  n_chunks = std::min(n_chunks, stream.size());
  for (std::size_t k = 0; k < n_chunks; ++k) {
    const std::size_t lo = k * stream.size() / n_chunks;
    const std::size_t hi = (k + 1) * stream.size() / n_chunks;
    if (lo == hi) continue;
    chunks.emplace_back(stream.begin() + lo, stream.begin() + hi);
  }
  return chunks;
}

std::vector<std::uint32_t> class_order(const Dataset& dataset, const OrderingSpec& spec,
                                       RandomSource& rng) {
  std::vector<std::uint32_t> order(dataset.num_classes);
  for (std::uint32_t c = 0; c < dataset.num_classes; ++c) order[c] = c;
  if (spec.permute_class_order) rng.shuffle(order);
  return order;
}

}  // namespace

std::size_t StreamPlan::total_records() const {
  std::size_t n = base_init.size();
  for (const auto& inc : increments) n += inc.size();
  return n;
}

std::uint64_t StreamPlan::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(base_init.size());
  for (std::size_t i : base_init) mix(i);
  for (const auto& inc : increments) {
    mix(0xffffffffffffffffULL);  // segment separator
    for (std::size_t i : inc) mix(i);
  }
  return h;
}

StreamPlan build_stream(const Dataset& dataset, const OrderingSpec& spec,
                        std::uint64_t seed) {
  if (dataset.records.empty()) {
    throw std::invalid_argument("build_stream: dataset has no records");
  }
  if (spec.classes_per_increment == 0) {
    throw std::invalid_argument("build_stream: classes_per_increment must be >= 1");
  }
  const bool needs_temporal =
      spec.kind == OrderingKind::Instance || spec.kind == OrderingKind::ClassInstance;
  if (needs_temporal && !dataset.has_instance_metadata) {
    throw std::invalid_argument("build_stream: ordering '" + to_string(spec.kind) +
                                "' requires instance metadata, which this dataset lacks");
  }
  auto per_class = indices_by_class(dataset);
  for (std::uint32_t c = 0; c < dataset.num_classes; ++c) {
    if (per_class[c].empty()) {
      throw std::invalid_argument("build_stream: class " + std::to_string(c) +
                                  " has no records; labels must be contiguous from 0");
    }
  }

  RandomSource rng(derive_seed(seed, "stream-plan"));
  StreamPlan plan;

  switch (spec.kind) {
    case OrderingKind::IID: {
      std::vector<std::size_t> all(dataset.records.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      rng.shuffle(all);
      const std::size_t n_base =
          static_cast<std::size_t>(spec.base_init_fraction * static_cast<double>(all.size()));
      plan.base_init.assign(all.begin(), all.begin() + n_base);
      std::vector<std::size_t> stream(all.begin() + n_base, all.end());
      plan.increments = chunk_by_cadence(stream, spec.eval_cadence_fraction);
      break;
    }
    case OrderingKind::ClassIID: {
      const auto order = class_order(dataset, spec, rng);
      for (std::size_t start = 0; start < order.size(); start += spec.classes_per_increment) {
        std::vector<std::size_t> segment;
        const std::size_t end = std::min(order.size(), start + spec.classes_per_increment);
        for (std::size_t k = start; k < end; ++k) {
          const auto& members = per_class[order[k]];
          segment.insert(segment.end(), members.begin(), members.end());
        }
        rng.shuffle(segment);
        if (start == 0) {
          plan.base_init = std::move(segment);
        } else {
          plan.increments.push_back(std::move(segment));
        }
      }
      if (dataset.num_classes % spec.classes_per_increment != 0) {
        std::cerr << "warning: class count " << dataset.num_classes
                  << " not divisible by classes_per_increment "
                  << spec.classes_per_increment << "; last increment is smaller\n";
      }
      break;
    }
    case OrderingKind::Instance: {
      std::vector<std::size_t> all(dataset.records.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      rng.shuffle(all);
      const std::size_t n_base =
          static_cast<std::size_t>(spec.base_init_fraction * static_cast<double>(all.size()));
      plan.base_init.assign(all.begin(), all.begin() + n_base);
      std::vector<std::size_t> pool(all.begin() + n_base, all.end());
      std::vector<std::size_t> stream =
          interleave_instances(dataset, pool, spec.interleave_block);
      plan.increments = chunk_by_cadence(stream, spec.eval_cadence_fraction);
      break;
    }
    case OrderingKind::ClassInstance: {
      const auto order = class_order(dataset, spec, rng);
      for (std::size_t start = 0; start < order.size(); start += spec.classes_per_increment) {
        std::vector<std::size_t> segment;
        const std::size_t end = std::min(order.size(), start + spec.classes_per_increment);
        for (std::size_t k = start; k < end; ++k) {
          const auto members = temporal_order_within_class(dataset, per_class[order[k]]);
          segment.insert(segment.end(), members.begin(), members.end());
        }
        if (start == 0) {
          plan.base_init = std::move(segment);
        } else {
          plan.increments.push_back(std::move(segment));
        }
      }
      if (dataset.num_classes % spec.classes_per_increment != 0) {
        std::cerr << "warning: class count " << dataset.num_classes
                  << " not divisible by classes_per_increment "
                  << spec.classes_per_increment << "; last increment is smaller\n";
      }
      break;
    }
  }
  return plan;
}

OrderingKind ordering_kind_from_string(const std::string& name) {
  if (name == "iid") return OrderingKind::IID;
  if (name == "class-iid") return OrderingKind::ClassIID;
  if (name == "instance") return OrderingKind::Instance;
  if (name == "class-instance") return OrderingKind::ClassInstance;
  throw std::invalid_argument("unknown ordering '" + name +
                              "' (expected iid|class-iid|instance|class-instance)");
}

std::string to_string(OrderingKind kind) {
  switch (kind) {
    case OrderingKind::IID: return "iid";
    case OrderingKind::ClassIID: return "class-iid";
    case OrderingKind::Instance: return "instance";
    case OrderingKind::ClassInstance: return "class-instance";
  }
  return "iid";
}

}  // namespace ciosl
