#include "uavnoma/noma.hpp"

#include <cmath>
#include <stdexcept>

namespace uavnoma::noma {

double received_sinr(double p_t, double gain, double mimo, double alpha, double beta, double sigma2) {
  if (p_t < 0.0 || gain < 0.0 || mimo < 0.0 || alpha < 0.0 || beta < 0.0) {
    throw std::domain_error("received_sinr: inputs must be non-negative");
  }
  if (!(sigma2 > 0.0)) throw std::domain_error("received_sinr: noise power must be positive");
  const double rx = p_t * gain * mimo;
  return rx * alpha / (rx * beta + sigma2);
}

double user_rate(double bandwidth_hz, double sinr) {
  if (!(bandwidth_hz > 0.0)) throw std::domain_error("user_rate: bandwidth must be positive");
  if (sinr < 0.0) throw std::domain_error("user_rate: SINR must be non-negative");
  return bandwidth_hz * std::log2(1.0 + sinr);
}

double sum_rate(std::span<const double> rates) {
  double total = 0.0;
  for (double r : rates) total += r;
  return total;
}

double jain_fairness(std::span<const double> rates) {
  if (rates.empty()) return 0.0;
  double s = 0.0;
  double s2 = 0.0;
  for (double r : rates) {
    s += r;
    s2 += r * r;
  }
  if (s2 == 0.0) return 0.0;
  return s * s / (static_cast<double>(rates.size()) * s2);
}

double feasible_strong_alpha_bound(double r_min, double bandwidth_hz) {
  return std::exp2(-r_min / bandwidth_hz);
}

double weighted_objective(std::span<const double> rates, double omega_r, double omega_f) {
  if (omega_r < 0.0 || omega_f < 0.0) {
    throw std::domain_error("weighted_objective: weights must be non-negative");
  }
  return omega_r * sum_rate(rates) + omega_f * jain_fairness(rates);
}

}  // namespace uavnoma::noma
