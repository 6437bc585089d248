#pragma once

#include <cstddef>
#include <vector>

namespace ciosl {

// Accuracies of a streaming learner paired with the from-scratch offline
// reference at the same testing events.
struct EvalTrace {
  std::vector<double> alpha;
  std::vector<double> alpha_offline;
};

// Omega_all = (1/T) sum_t alpha_t / alpha_offline_t. May exceed 1 when the
// streaming learner beats the reference at some events; never clamped.
double omega_all(const EvalTrace& trace);

// (1/T) sum_t alpha_offline_t.
double offline_mean(const std::vector<double>& reference);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
};

MeanSd mean_sd(const std::vector<double>& values);

}  // namespace ciosl
