#include "uavnoma/harness.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "uavnoma/csv.hpp"

namespace uavnoma::harness {

void TrainConfig::validate() const {
  if (episodes < 1 || steps < 1) throw std::invalid_argument("train: episodes and steps must be >= 1");
  if (batch < 1 || buffer < batch) throw std::invalid_argument("train: need 1 <= batch <= buffer");
  if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("train: gamma must lie in [0, 1]");
  if (sync_every < 1) throw std::invalid_argument("train: sync_every must be >= 1");
  if (hidden < 1) throw std::invalid_argument("train: hidden must be >= 1");
  schedule.validate();
  reward.validate();
  scenario.validate();
}

TrainResult train(const TrainConfig& cfg, const EpisodeCallback& on_episode, env::TraceWriter* trace) {
  cfg.validate();
  const env::Environment environment(cfg.scenario, cfg.reward);
  Rng env_rng = Rng::stream(cfg.seed, "env");
  Rng explore_rng = Rng::stream(cfg.seed, "exploration");
  Rng sample_rng = Rng::stream(cfg.seed, "sampling");

  TrainResult result;
  result.params = nn::init_network(environment.state_dim(), environment.action_spec().count, cfg.head,
                                   derive_seed(cfg.seed, "init"), cfg.hidden);
  nn::NetworkParams target = nn::clone_params(result.params);
  nn::AdamState adam = nn::AdamState::for_params(result.params);
  rl::ReplayBuffer buffer(cfg.buffer);

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    auto obs = environment.reset(env_rng, ep);
    env::Snapshot snapshot = std::move(obs.snapshot);
    env::StateVector state = std::move(obs.state);
    double rate_sum = 0.0, jain_sum = 0.0, reward_sum = 0.0, satisfied = 0.0;

    for (int tau = 0; tau < cfg.steps; ++tau) {
      const std::int64_t global = static_cast<std::int64_t>(ep) * cfg.steps + tau;
      const double eps = cfg.schedule.epsilon(global);
      const std::size_t action = rl::select_action(result.params, state, eps, explore_rng);
      auto step = environment.step(snapshot, action, env_rng);
      if (trace) trace->write(step.snapshot, step.reward);

      rate_sum += step.info.sum_rate;
      jain_sum += step.info.jain;
      reward_sum += step.reward;
      satisfied += step.info.all_satisfied ? 1.0 : 0.0;

      buffer.push({state, action, step.reward, step.state});
      state = std::move(step.state);
      snapshot = std::move(step.snapshot);

      if (buffer.size() > cfg.batch) {
        rl::train_step(result.params, target, adam, buffer, cfg.batch, cfg.gamma, cfg.lr, sample_rng);
        ++result.updates;
      }
      rl::maybe_sync_target(result.params, target, global, cfg.sync_every);
    }

    const double t = static_cast<double>(cfg.steps);
    EpisodeRecord rec{ep, rate_sum / t, jain_sum / t, reward_sum / t, satisfied / t, snapshot.uav};
    result.records.push_back(rec);
    if (on_episode) on_episode(rec);
  }
  return result;
}

std::vector<MovingMetric> moving_metrics(std::span<const EpisodeRecord> records, std::size_t window) {
  if (window < 1) throw std::invalid_argument("moving_metrics: window must be >= 1");
  std::vector<MovingMetric> out(records.size());
  for (std::size_t ep = window; ep < records.size(); ++ep) {
    double rate = 0.0, jain = 0.0;
    for (std::size_t k = ep + 1 - window; k <= ep; ++k) {
      rate += records[k].mean_rate;
      jain += records[k].mean_jain;
    }
    out[ep] = {rate / static_cast<double>(window), jain / static_cast<double>(window)};
  }
  return out;
}

EvalResult evaluate(const nn::NetworkParams& params, const env::Scenario& scenario, int steps, std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("evaluate: steps must be >= 1");
  const env::Environment environment(scenario, env::RewardWeights{});
  if (params.input_dim() != environment.state_dim()) {
    throw std::invalid_argument("evaluate: network expects input dim " + std::to_string(params.input_dim()) +
                                " but the scenario produces " + std::to_string(environment.state_dim()));
  }
  if (params.n_actions() != environment.action_spec().count) {
    throw std::invalid_argument("evaluate: network has " + std::to_string(params.n_actions()) +
                                " actions but the scenario needs " +
                                std::to_string(environment.action_spec().count));
  }
  Rng rng = Rng::stream(seed, "env");
  auto obs = environment.reset(rng);
  env::Snapshot snapshot = std::move(obs.snapshot);
  env::StateVector state = std::move(obs.state);
  EvalResult r;
  for (int k = 0; k < steps; ++k) {
    auto step = environment.step(snapshot, rl::greedy_action(params, state), rng);
    r.avg_sum_rate += step.info.sum_rate;
    r.avg_jain += step.info.jain;
    r.satisfaction += step.info.all_satisfied ? 1.0 : 0.0;
    state = std::move(step.state);
    snapshot = std::move(step.snapshot);
  }
  r.avg_sum_rate /= steps;
  r.avg_jain /= steps;
  r.satisfaction /= steps;
  return r;
}

std::vector<SweepPoint> rmin_sweep(const TrainConfig& base, std::span<const double> rmin_over_w, int jobs,
                                   int eval_steps, std::size_t window) {
  if (rmin_over_w.empty()) throw std::invalid_argument("rmin_sweep: empty R_min list");
  std::vector<SweepPoint> points(rmin_over_w.size());
  std::vector<std::string> errors(rmin_over_w.size());
  const int n = static_cast<int>(rmin_over_w.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, jobs))
  for (int i = 0; i < n; ++i) {
    try {
      TrainConfig cfg = base;
      cfg.scenario.r_min = rmin_over_w[i] * cfg.scenario.channel.bandwidth_hz;
      const auto run = train(cfg);
      const auto metrics = moving_metrics(run.records, window);
      SweepPoint p;
      p.rmin_over_w = rmin_over_w[i];
      p.r_e_tot = metrics.back().rate;
      p.final_satisfaction = run.records.back().satisfaction;
      p.eval = evaluate(run.params, cfg.scenario, eval_steps, cfg.seed);
      points[i] = p;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error("rmin_sweep: " + e);
  }
  return points;
}

std::vector<Vec2> draw_layout(std::size_t n_ue, double area_side, Rng& rng) {
  std::vector<Vec2> users(n_ue);
  for (auto& u : users) {
    u.x = rng.uniform(-area_side / 2, area_side / 2);
    u.y = rng.uniform(-area_side / 2, area_side / 2);
  }
  return users;
}

LayoutSweep layout_sweep(const nn::NetworkParams& a, const nn::NetworkParams& b, const env::Scenario& family,
                         std::size_t n_layouts, int steps, std::uint64_t seed, int jobs) {
  LayoutSweep out;
  out.rows.resize(n_layouts);
  Rng layouts = Rng::stream(seed, "layouts");
  for (auto& row : out.rows) row.users = draw_layout(family.n_ue(), family.area_side, layouts);

  std::vector<std::string> errors(n_layouts);
  const int n = static_cast<int>(n_layouts);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, jobs))
  for (int i = 0; i < n; ++i) {
    try {
      env::Scenario s = family;
      s.users = out.rows[i].users;
      auto& row = out.rows[i];
      row.rate_a = evaluate(a, s, steps, seed).avg_sum_rate;
      row.rate_b = evaluate(b, s, steps, seed).avg_sum_rate;
      row.ratio_pct = 100.0 * row.rate_a / row.rate_b;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error("layout_sweep: " + e);
  }
  if (n_layouts == 0) return out;

  std::vector<double> ratios;
  std::size_t wins = 0;
  for (const auto& row : out.rows) {
    ratios.push_back(row.ratio_pct);
    if (row.rate_a > row.rate_b) ++wins;
  }
  out.win_fraction = static_cast<double>(wins) / static_cast<double>(n_layouts);
  std::sort(ratios.begin(), ratios.end());
  out.ratio_min = ratios.front();
  out.ratio_max = ratios.back();
  const std::size_t mid = ratios.size() / 2;
  out.ratio_median = ratios.size() % 2 ? ratios[mid] : 0.5 * (ratios[mid - 1] + ratios[mid]);
  double total = 0.0;
  for (double r : ratios) total += r;
  out.ratio_mean = total / static_cast<double>(ratios.size());
  return out;
}

void write_episodes_csv(std::ostream& out, std::span<const EpisodeRecord> records, std::size_t window) {
  csv::header(out, {"episode", "mean_rate_bps", "mean_jain", "mean_reward", "R_e_tot", "J_e_f"});
  const auto metrics = moving_metrics(records, window);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    csv::RowWriter(out)
        .cell(r.episode)
        .cell(r.mean_rate)
        .cell(r.mean_jain)
        .cell(r.mean_reward)
        .cell(metrics[i].rate)
        .cell(metrics[i].jain)
        .end();
  }
}

void write_eval_csv(std::ostream& out, const EvalResult& r, int steps) {
  csv::header(out, {"steps", "avg_sum_rate_bps", "avg_jain", "satisfaction_fraction"});
  csv::RowWriter(out).cell(steps).cell(r.avg_sum_rate).cell(r.avg_jain).cell(r.satisfaction).end();
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points, double bandwidth_hz) {
  csv::header(out, {"rmin_over_w", "r_min_bps", "R_e_tot", "final_episode_satisfaction", "eval_avg_sum_rate_bps",
                    "eval_satisfaction"});
  for (const auto& p : points) {
    csv::RowWriter(out)
        .cell(p.rmin_over_w)
        .cell(p.rmin_over_w * bandwidth_hz)
        .cell(p.r_e_tot)
        .cell(p.final_satisfaction)
        .cell(p.eval.avg_sum_rate)
        .cell(p.eval.satisfaction)
        .end();
  }
}

void write_layouts_csv(std::ostream& out, const LayoutSweep& sweep) {
  std::vector<std::string> cols{"layout"};
  const std::size_t n_ue = sweep.rows.empty() ? 0 : sweep.rows.front().users.size();
  for (std::size_t i = 0; i < n_ue; ++i) {
    cols.push_back("x" + std::to_string(i + 1));
    cols.push_back("y" + std::to_string(i + 1));
  }
  for (const char* c : {"rate_a_bps", "rate_b_bps", "ratio_pct"}) cols.emplace_back(c);
  csv::header(out, cols);
  for (std::size_t k = 0; k < sweep.rows.size(); ++k) {
    const auto& row = sweep.rows[k];
    csv::RowWriter w(out);
    w.cell(k);
    for (const auto& u : row.users) w.cell(u.x).cell(u.y);
    w.cell(row.rate_a).cell(row.rate_b).cell(row.ratio_pct).end();
  }
}

}  // namespace uavnoma::harness
