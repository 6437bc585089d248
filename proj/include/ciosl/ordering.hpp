#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ciosl/random.hpp"

namespace ciosl {

// One embedded sample. instance_id / frame_index carry the temporal
// structure needed by the instance orderings; they are zero for datasets
// without that metadata.
struct DatasetRecord {
  std::vector<double> z;
  std::uint32_t label = 0;
  std::uint32_t instance_id = 0;
  std::uint32_t frame_index = 0;
};

struct Dataset {
  std::vector<DatasetRecord> records;
  std::uint32_t num_classes = 0;
  std::uint32_t dim = 0;
  bool has_instance_metadata = false;
};

enum class OrderingKind { IID, ClassIID, Instance, ClassInstance };

struct OrderingSpec {
  OrderingKind kind = OrderingKind::IID;
  std::size_t classes_per_increment = 2;
  double base_init_fraction = 0.10;   // IID / Instance only
  std::size_t interleave_block = 50;  // Instance only
  double eval_cadence_fraction = 0.05;  // IID / Instance testing-event spacing
  bool permute_class_order = true;    // seeded class permutation for Class* kinds
};

// The full, materialized order of one run: a base-initialization split plus
// increments streamed one sample at a time, with a testing event after the
// base split and after every increment. Together they visit every record
// index exactly once.
struct StreamPlan {
  std::vector<std::size_t> base_init;
  std::vector<std::vector<std::size_t>> increments;

  std::size_t total_records() const;
  std::uint64_t hash() const;  // FNV-1a over the index sequence
};

StreamPlan build_stream(const Dataset& dataset, const OrderingSpec& spec,
                        std::uint64_t seed);

OrderingKind ordering_kind_from_string(const std::string& name);
std::string to_string(OrderingKind kind);

}  // namespace ciosl
