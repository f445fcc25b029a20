#pragma once

#include <span>
#include <vector>

namespace uavnoma::noma {

/// Power split of one two-user cluster. The weak share is always the
/// complement, so the pair sums to one by construction.
struct ClusterAllocation {
  double strong_alpha = 0.5;
  double weak_alpha() const { return 1.0 - strong_alpha; }
  bool operator==(const ClusterAllocation&) const = default;
};

/// Per-user data rates in bits/s, in user order.
using UserRates = std::vector<double>;

/// (P g G alpha) / (P g G beta + sigma2). beta is the partner's share for the
/// weak user and zero for the strong user, whose interference SIC removes.
double received_sinr(double p_t, double gain, double mimo, double alpha, double beta, double sigma2);

/// W log2(1 + SINR).
double user_rate(double bandwidth_hz, double sinr);

double sum_rate(std::span<const double> rates);

/// (sum R)^2 / (N sum R^2); 0 when every rate is zero.
double jain_fairness(std::span<const double> rates);

/// 2^(-R_min / W): strong-user shares below this keep the weak user feasible
/// in the high-SNR limit.
double feasible_strong_alpha_bound(double r_min, double bandwidth_hz);

/// omega_r * sum_rate + omega_f * jain_fairness.
double weighted_objective(std::span<const double> rates, double omega_r, double omega_f);

}  // namespace uavnoma::noma
