#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ciosl/ordering.hpp"

namespace ciosl {

// Binary dataset file, little-endian:
//   magic "CIOSL1\0\0" (8 bytes)
//   u32 record count, u32 embedding dim, u32 class count,
//   u32 flags (bit 0: instance metadata present)
//   records: [f32 x dim][u16 label][u16 instance_id][u32 frame_index]
inline constexpr char kDatasetMagic[8] = {'C', 'I', 'O', 'S', 'L', '1', '\0', '\0'};

Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& dataset, const std::string& path);

struct SyntheticSpec {
  std::size_t n_classes = 10;
  std::size_t n_instances = 3;
  std::size_t frames_per_instance = 120;
  std::size_t dim = 32;
  double cluster_spread = 0.15;
  std::uint64_t seed = 1;
};

// Per class a unit-norm cluster center; per instance a spread-scaled
// sub-center offset; per frame a small-step random walk around the
// sub-center, so instance orderings see genuinely correlated frames.
Dataset gen_synthetic(const SyntheticSpec& spec);

// Rows: label,instance_id,frame_index,f0,...,f{dim-1}. An optional header
// row is skipped when the first field is not numeric.
Dataset import_csv(const std::string& path);

// Deterministic held-out split: within every (class, instance) group the
// last ceil(fraction * group size) records by temporal order become test
// data. Without instance metadata the group is the whole class in file
// order. The same dataset always yields the same split.
struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

TrainTestSplit split_train_test(const Dataset& dataset, double test_fraction);

// Dataset restricted to the given record indices (labels/metadata kept).
Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices);

}  // namespace ciosl
