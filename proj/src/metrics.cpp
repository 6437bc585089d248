#include "ciosl/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ciosl {

double omega_all(const EvalTrace& trace) {
  if (trace.alpha.empty()) {
    throw std::invalid_argument("omega_all: trace has no testing events");
  }
  if (trace.alpha.size() != trace.alpha_offline.size()) {
    throw std::invalid_argument("omega_all: trace has " +
                                std::to_string(trace.alpha.size()) +
                                " events but reference has " +
                                std::to_string(trace.alpha_offline.size()));
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < trace.alpha.size(); ++t) {
    if (trace.alpha_offline[t] <= 0.0) {
      throw std::invalid_argument("omega_all: offline accuracy at event " +
                                  std::to_string(t) + " is not positive");
    }
    sum += trace.alpha[t] / trace.alpha_offline[t];
  }
  return sum / static_cast<double>(trace.alpha.size());
}

double offline_mean(const std::vector<double>& reference) {
  if (reference.empty()) {
    throw std::invalid_argument("offline_mean: reference trace is empty");
  }
  double sum = 0.0;
  for (double a : reference) sum += a;
  return sum / static_cast<double>(reference.size());
}

MeanSd mean_sd(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean_sd: no values");
  MeanSd out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace ciosl
