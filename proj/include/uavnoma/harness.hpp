#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "uavnoma/agent.hpp"
#include "uavnoma/environment.hpp"
#include "uavnoma/network.hpp"

namespace uavnoma::harness {

struct TrainConfig {
  int episodes = 1000;       // E
  int steps = 300;           // T
  std::size_t batch = 128;   // B
  std::size_t buffer = 15000;  // M
  double lr = 1e-3;
  double gamma = 0.999;
  std::int64_t sync_every = 3000;  // delta
  rl::ExplorationSchedule schedule;
  env::RewardWeights reward;
  env::Scenario scenario;
  nn::Head head = nn::Head::Dueling;
  std::uint64_t seed = 1;
  std::size_t hidden = 128;

  void validate() const;
};

struct EpisodeRecord {
  int episode = 0;
  double mean_rate = 0.0;     // mean per-step sum rate, bits/s
  double mean_jain = 0.0;
  double mean_reward = 0.0;
  double satisfaction = 0.0;  // fraction of steps where every user met r_min
  Vec3 final_uav;

  bool operator==(const EpisodeRecord&) const = default;
};

struct TrainResult {
  nn::NetworkParams params;
  std::vector<EpisodeRecord> records;
  std::int64_t updates = 0;  // gradient steps taken
};

using EpisodeCallback = std::function<void(const EpisodeRecord&)>;

/// The full training loop: E episodes of T steps, environment reset at every
/// episode start, one gradient step per environment step once the buffer
/// holds more than B transitions. Randomness comes from named sub-streams of
/// config.seed ("env", "init", "exploration", "sampling").
TrainResult train(const TrainConfig& config, const EpisodeCallback& on_episode = {},
                  env::TraceWriter* trace = nullptr);

struct MovingMetric {
  double rate = 0.0;  // R_e^tot
  double jain = 0.0;  // J_e^f
};

/// Trailing-window means of the per-episode means; zero while ep < window.
std::vector<MovingMetric> moving_metrics(std::span<const EpisodeRecord> records, std::size_t window = 100);

struct EvalResult {
  double avg_sum_rate = 0.0;
  double avg_jain = 0.0;
  double satisfaction = 0.0;
};

/// Greedy rollout from reset, no learning.
EvalResult evaluate(const nn::NetworkParams& params, const env::Scenario& scenario, int steps = 1000,
                    std::uint64_t seed = 0);

struct SweepPoint {
  double rmin_over_w = 0.0;
  double r_e_tot = 0.0;              // final R_e^tot of the training run
  double final_satisfaction = 0.0;   // of the last training episode
  EvalResult eval;                   // greedy rollout of the trained policy
};

/// One fresh training run per R_min / W value; runs fan out over `jobs`
/// threads and come back in input order.
std::vector<SweepPoint> rmin_sweep(const TrainConfig& base, std::span<const double> rmin_over_w, int jobs = 1,
                                   int eval_steps = 1000, std::size_t window = 100);

std::vector<Vec2> draw_layout(std::size_t n_ue, double area_side, Rng& rng);

struct LayoutRow {
  std::vector<Vec2> users;
  double rate_a = 0.0;
  double rate_b = 0.0;
  double ratio_pct = 0.0;  // 100 * rate_a / rate_b
};

struct LayoutSweep {
  std::vector<LayoutRow> rows;
  double win_fraction = 0.0;  // rate_a > rate_b
  double ratio_min = 0.0;
  double ratio_median = 0.0;
  double ratio_mean = 0.0;
  double ratio_max = 0.0;
};

/// Paired comparison of two policies on `n_layouts` uniform user layouts
/// drawn once from the "layouts" sub-stream of `seed`.
LayoutSweep layout_sweep(const nn::NetworkParams& a, const nn::NetworkParams& b, const env::Scenario& family,
                         std::size_t n_layouts = 100, int steps = 1000, std::uint64_t seed = 0, int jobs = 1);

void write_episodes_csv(std::ostream& out, std::span<const EpisodeRecord> records, std::size_t window = 100);
void write_eval_csv(std::ostream& out, const EvalResult& result, int steps);
void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points, double bandwidth_hz);
void write_layouts_csv(std::ostream& out, const LayoutSweep& sweep);

}  // namespace uavnoma::harness
