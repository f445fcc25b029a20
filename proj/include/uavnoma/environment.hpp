#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "uavnoma/channel.hpp"
#include "uavnoma/noma.hpp"
#include "uavnoma/rng.hpp"

namespace uavnoma::env {

using channel::ChannelParams;
using channel::LinkKind;
using channel::LinkMode;

enum class PairingRule {
  BestWithWorst,           // rank 1 with rank N, rank 2 with rank N-1, ...
  StrongHalfWithWeakHalf,  // rank k with rank k + N/2
};

struct Scenario {
  double area_side = 100.0;  // L, m; users and UAV live in [-L/2, L/2]^2
  std::vector<Vec2> users;
  double h_min = 10.0;
  double h_max = 300.0;
  double h_init = 50.0;
  double alpha_init = 0.5;
  double step_x = 1.0;
  double step_y = 1.0;
  double step_h = 1.0;
  double step_alpha = 0.01;
  double alpha_min = 0.01;
  double alpha_max = 0.99;
  ChannelParams channel = ChannelParams::sub6();
  LinkMode link_mode = LinkMode::Expected;
  double r_min = 0.0;  // bits/s
  PairingRule pairing = PairingRule::StrongHalfWithWeakHalf;
  // Gain feature normalisation; derived from the geometry when unset.
  std::optional<double> gain_db_min;
  std::optional<double> gain_db_max;

  std::size_t n_ue() const { return users.size(); }

  /// The four-user training layout, coordinates relative to the area centre.
  static std::vector<Vec2> reference_layout();
  static Scenario reference(ChannelParams channel, LinkMode mode);

  /// (min, max) of 10 log10(gain) used by the state's gain feature.
  std::pair<double, double> gain_db_bounds() const;

  void validate() const;
};

struct RewardWeights {
  double rate = 0.0;         // w_r
  double fairness = 0.0;     // w_f
  double gain = 0.0;         // w_g
  double satisfied = 0.0;    // w_s
  double unsatisfied = 0.0;  // w_u

  void validate() const;
};

struct Cluster {
  std::size_t strong = 0;
  std::size_t weak = 0;
  bool operator==(const Cluster&) const = default;
};

/// Pairs users by their AlwaysLoS gain at (0, 0, h_init). Clusters are listed
/// best strong user first; that order is the order of the power actions.
std::vector<Cluster> cluster_users(const Scenario& scenario);

/// Joint sign actions. Bit j of the index (LSB first) gives d_j = +1 when set,
/// -1 otherwise, over (d_x, d_y, d_h, d_cluster1, ...).
struct ActionSpec {
  std::size_t dim = 0;
  std::size_t count = 0;

  static ActionSpec for_users(std::size_t n_ue);
  std::vector<int> decode(std::size_t index) const;
  std::size_t encode(const std::vector<int>& signs) const;
};

struct Snapshot {
  Vec3 uav;
  std::vector<noma::ClusterAllocation> alphas;
  std::vector<LinkKind> link_kinds;
  std::vector<double> gains;  // per-antenna-pair linear gain per user
  noma::UserRates rates;
  int step = 0;
  int episode = 0;
};

using StateVector = std::vector<double>;

struct StepInfo {
  noma::UserRates rates;
  std::vector<double> gains;
  std::vector<bool> satisfied;
  double sum_rate = 0.0;
  double jain = 0.0;
  bool all_satisfied = false;
};

struct Observation {
  Snapshot snapshot;
  StateVector state;
  StepInfo info;
};

struct StepResult {
  Snapshot snapshot;
  StateVector state;
  double reward = 0.0;
  StepInfo info;
};

/// Weighted five-term reward evaluated on one step's rates and gains.
double compute_reward(std::span<const double> rates, std::span<const double> gains,
                      const RewardWeights& weights, double r_min, double bandwidth_hz);

/// Stateless stepping over an owned scenario; the caller carries the
/// snapshot. Concurrent use of one instance is fine since nothing mutates.
class Environment {
 public:
  Environment(Scenario scenario, RewardWeights weights);

  const Scenario& scenario() const { return scenario_; }
  const RewardWeights& weights() const { return weights_; }
  const std::vector<Cluster>& clusters() const { return clusters_; }
  const ActionSpec& action_spec() const { return actions_; }
  std::size_t state_dim() const { return 4 * scenario_.n_ue() + 1; }

  Observation reset(Rng& rng, int episode = 0) const;
  Observation reset(std::uint64_t seed) const;

  /// Applies one joint action, clamping position to the box and the strong
  /// shares to [alpha_min, alpha_max].
  StepResult step(const Snapshot& snapshot, std::size_t action, Rng& rng) const;

  StateVector build_state(const Snapshot& snapshot) const;

  /// Power share of every user, in user order.
  std::vector<double> user_alphas(const Snapshot& snapshot) const;

  /// Recomputes gains and rates at the snapshot's position and shares.
  void refresh(Snapshot& snapshot, Rng& rng, bool redraw_episode_links) const;

  StepInfo info_for(const Snapshot& snapshot) const;

 private:
  Scenario scenario_;
  RewardWeights weights_;
  std::vector<Cluster> clusters_;
  ActionSpec actions_;
  double gain_db_min_ = 0.0;
  double gain_db_max_ = 0.0;
};

/// Streams per-step rows: episode, tau, x, y, h, alpha per cluster, rate per
/// user, reward.
class TraceWriter {
 public:
  TraceWriter(std::ostream& out, std::size_t n_clusters, std::size_t n_ue);
  void write(const Snapshot& snapshot, double reward);

 private:
  std::ostream& out_;
};

}  // namespace uavnoma::env
