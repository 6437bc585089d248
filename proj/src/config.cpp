#include "ciosl/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ciosl {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::size_t> parse_size_array(const std::string& raw) {
  std::string s = trim(raw);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(static_cast<std::size_t>(std::stoull(item)));
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: expected boolean, got '" + v + "'");
}

}  // namespace

ReplacementPolicy policy_from_string(const std::string& name) {
  if (name == "lawcbr") return ReplacementPolicy::LAWCBR;
  if (name == "lawrrr") return ReplacementPolicy::LAWRRR;
  throw std::invalid_argument("unknown policy '" + name + "' (expected lawcbr|lawrrr)");
}

SamplingStrategy sampling_from_string(const std::string& name) {
  if (name == "uniform" || name == "uni") return SamplingStrategy::Uniform;
  if (name == "uapn") return SamplingStrategy::UAPN;
  if (name == "lapn") return SamplingStrategy::LAPN;
  throw std::invalid_argument("unknown sampling '" + name +
                              "' (expected uniform|uapn|lapn)");
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // strip comments outside quotes
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_quote = !in_quote;
      if (line[i] == '#' && !in_quote) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: line " + std::to_string(line_no) +
                               " is not 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::runtime_error("config: line " + std::to_string(line_no) +
                               " has an empty key or value");
    }
    if (!section.empty()) key = section + "." + key;
    kv[key] = value;
  }
  return kv;
}

void ExperimentConfig::apply_key(const std::string& full_key, const std::string& raw) {
  // Keys are matched by their last path component so sectioned and flat
  // files look the same.
  const std::size_t dot = full_key.rfind('.');
  const std::string key = dot == std::string::npos ? full_key : full_key.substr(dot + 1);
  const std::string value = unquote(raw);

  if (key == "dataset") {
    dataset_path = value;
  } else if (key == "test_dataset") {
    test_dataset_path = value;
  } else if (key == "out") {
    out_path = value;
  } else if (key == "ordering") {
    ordering.kind = ordering_kind_from_string(value);
  } else if (key == "classes_per_increment") {
    ordering.classes_per_increment = std::stoull(value);
  } else if (key == "base_init_fraction" || key == "base_fraction") {
    ordering.base_init_fraction = std::stod(value);
  } else if (key == "interleave_block") {
    ordering.interleave_block = std::stoull(value);
  } else if (key == "eval_cadence_fraction" || key == "eval_cadence") {
    ordering.eval_cadence_fraction = std::stod(value);
  } else if (key == "permute_class_order") {
    ordering.permute_class_order = parse_bool(value);
  } else if (key == "lambda1") {
    hp.lambda1 = std::stod(value);
  } else if (key == "lambda2") {
    hp.lambda2 = std::stod(value);
  } else if (key == "n_replay") {
    hp.n_replay = std::stoull(value);
  } else if (key == "n_kd") {
    hp.n_kd = std::stoull(value);
  } else if (key == "k_uncertainty" || key == "k") {
    hp.k_uncertainty = std::stoull(value);
  } else if (key == "capacity" || key == "buffer_capacity") {
    hp.buffer_capacity = std::stoull(value);
    capacity_explicit = true;
  } else if (key == "base_epochs") {
    hp.base_epochs = std::stoull(value);
  } else if (key == "base_batch") {
    hp.base_batch = std::stoull(value);
  } else if (key == "lr" || key == "learning_rate") {
    hp.lr = std::stod(value);
  } else if (key == "momentum") {
    hp.momentum = std::stod(value);
  } else if (key == "weight_decay") {
    hp.weight_decay = std::stod(value);
  } else if (key == "hidden" || key == "hidden_dims") {
    hp.hidden_dims = parse_size_array(value);
    if (hp.hidden_dims.empty()) {
      throw std::invalid_argument("config: hidden dims may not be empty");
    }
  } else if (key == "initial_sigma") {
    hp.initial_sigma = std::stod(value);
  } else if (key == "eval_posterior_mean" || key == "eval_mean") {
    hp.eval_posterior_mean = parse_bool(value);
  } else if (key == "policy") {
    policy = policy_from_string(value);
  } else if (key == "sampling") {
    sampling = sampling_from_string(value);
  } else if (key == "learner") {
    learner = learner_kind_from_string(value);
  } else if (key == "seeds") {
    n_seeds = std::stoull(value);
  } else if (key == "seed_base") {
    seed_base = std::stoull(value);
  } else if (key == "test_fraction") {
    test_fraction = std::stod(value);
  } else if (key == "workers") {
    workers = std::stoull(value);
  } else {
    throw std::invalid_argument("config: unknown key '" + full_key + "'");
  }
}

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : parse_config_file(path)) {
    cfg.apply_key(key, value);
  }
  return cfg;
}

std::vector<std::uint64_t> ExperimentConfig::seed_list() const {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(n_seeds);
  for (std::size_t i = 0; i < n_seeds; ++i) seeds.push_back(seed_base + i);
  return seeds;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["dataset"] = dataset_path;
  j["test_dataset"] = test_dataset_path;
  j["out"] = out_path;
  j["ordering"] = to_string(ordering.kind);
  j["classes_per_increment"] = ordering.classes_per_increment;
  j["base_init_fraction"] = ordering.base_init_fraction;
  j["interleave_block"] = ordering.interleave_block;
  j["eval_cadence_fraction"] = ordering.eval_cadence_fraction;
  j["permute_class_order"] = ordering.permute_class_order;
  j["lambda1"] = hp.lambda1;
  j["lambda2"] = hp.lambda2;
  j["n_replay"] = hp.n_replay;
  j["n_kd"] = hp.n_kd;
  j["k_uncertainty"] = hp.k_uncertainty;
  j["buffer_capacity"] = hp.buffer_capacity;
  j["base_epochs"] = hp.base_epochs;
  j["base_batch"] = hp.base_batch;
  j["lr"] = hp.lr;
  j["momentum"] = hp.momentum;
  j["weight_decay"] = hp.weight_decay;
  j["hidden_dims"] = hp.hidden_dims;
  j["initial_sigma"] = hp.initial_sigma;
  j["eval_posterior_mean"] = hp.eval_posterior_mean;
  j["policy"] = to_string(policy);
  j["sampling"] = to_string(sampling);
  j["learner"] = to_string(learner);
  j["seeds"] = n_seeds;
  j["seed_base"] = seed_base;
  j["test_fraction"] = test_fraction;
  return j;
}

}  // namespace ciosl
