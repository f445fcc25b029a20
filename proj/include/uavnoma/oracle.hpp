#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "uavnoma/environment.hpp"

namespace uavnoma::oracle {

/// Exhaustive grid over UAV position and per-cluster strong shares.
struct GridSpec {
  double xy_step = 5.0;          // m, x and y both start at -L/2
  std::vector<double> heights;   // m
  double alpha_step = 0.05;      // shares k * step inside the scenario clamp
  double omega_r = 1.0;
  double omega_f = 0.0;
  double r_min = 0.0;            // bits/s; points where any user falls short are discarded

  /// Coarse default: 5 m, heights {h_min, (h_min+h_max)/2, h_max}, 0.05.
  static GridSpec coarse(const env::Scenario& scenario);

  std::vector<double> xy_levels(double area_side) const;
  std::vector<double> alpha_levels(const env::Scenario& scenario) const;
  void validate(const env::Scenario& scenario) const;
};

struct OracleResult {
  bool feasible = false;
  Vec3 position;
  std::vector<double> strong_alphas;  // per cluster
  double objective = 0.0;
  std::vector<double> rates;          // per user, bits/s
};

/// Maximises omega_r * sum rate + omega_f * Jain over the grid. Ties go to the
/// lexicographically smallest (x, y, h, alpha_1, ...). Deterministic link
/// modes only (AlwaysLoS, Expected). Parallel over grid positions.
OracleResult grid_search_oracle(const env::Scenario& scenario, const GridSpec& grid);

/// Single-threaded reference for grid_search_oracle.
OracleResult grid_search_oracle_serial(const env::Scenario& scenario, const GridSpec& grid);

struct BaselineResult {
  double avg_sum_rate = 0.0;
  double avg_jain = 0.0;
};

/// UAV parked at (0, 0, h_init) with every strong share fixed; link draws
/// follow the scenario's link mode.
BaselineResult static_hover_eval(const env::Scenario& scenario, int steps, std::uint64_t seed,
                                 double strong_alpha = 0.3);

void write_oracle_csv(std::ostream& out, const OracleResult& result);
void write_baseline_csv(std::ostream& out, const BaselineResult& result, int steps, double strong_alpha);

}  // namespace uavnoma::oracle
