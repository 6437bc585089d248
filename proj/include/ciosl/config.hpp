#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ciosl/ordering.hpp"
#include "ciosl/replay_buffer.hpp"
#include "ciosl/trainer.hpp"
#include "json.hpp"

namespace ciosl {

// Everything one `run` invocation needs. Values come from a flat key/value
// config file (TOML-style sections allowed; keys are matched by their last
// path component) with command-line flags taking precedence.
struct ExperimentConfig {
  std::string dataset_path;
  std::string test_dataset_path;  // empty: hold out test_fraction internally
  std::string out_path = "results.jsonl";
  OrderingSpec ordering;
  HyperParams hp;
  ReplacementPolicy policy = ReplacementPolicy::LAWRRR;
  SamplingStrategy sampling = SamplingStrategy::UAPN;
  LearnerKind learner = LearnerKind::CIOSL;
  std::size_t n_seeds = 1;
  std::uint64_t seed_base = 1;
  double test_fraction = 0.2;
  std::size_t workers = 0;  // 0: number of hardware threads
  bool capacity_explicit = false;

  std::vector<std::uint64_t> seed_list() const;
  void apply_key(const std::string& key, const std::string& value);
  nlohmann::json to_json() const;
};

// Parses a small TOML subset: [section] headers, `key = value` pairs,
// `#` comments, quoted strings, numbers, booleans and flat integer arrays.
std::map<std::string, std::string> parse_config_file(const std::string& path);

ExperimentConfig load_config(const std::string& path);

ReplacementPolicy policy_from_string(const std::string& name);
SamplingStrategy sampling_from_string(const std::string& name);

}  // namespace ciosl
