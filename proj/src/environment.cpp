#include "uavnoma/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "uavnoma/csv.hpp"

namespace uavnoma::env {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("scenario: " + what);
}

double distance(Vec3 uav, Vec2 ue) {
  const double dx = uav.x - ue.x;
  const double dy = uav.y - ue.y;
  return std::sqrt(dx * dx + dy * dy + uav.z * uav.z);
}

}  // namespace

std::vector<Vec2> Scenario::reference_layout() {
  return {{4.0, 15.0}, {-44.0, -49.0}, {-5.0, 21.0}, {47.0, 49.0}};
}

Scenario Scenario::reference(ChannelParams channel, LinkMode mode) {
  Scenario s;
  s.users = reference_layout();
  s.channel = std::move(channel);
  s.link_mode = mode;
  return s;
}

std::pair<double, double> Scenario::gain_db_bounds() const {
  const double far = std::sqrt(2.0 * area_side * area_side + h_max * h_max);
  const double lo = gain_db_min.value_or(
      10.0 * std::log10(channel::path_gain(channel, LinkKind::NLoS, far)));
  const double hi = gain_db_max.value_or(
      10.0 * std::log10(channel::path_gain(channel, LinkKind::LoS, h_min)));
  return {lo, hi};
}

void Scenario::validate() const {
  channel.validate();
  require(area_side > 0.0, "area_side must be positive");
  require(n_ue() >= 2 && n_ue() % 2 == 0, "user count must be even and >= 2, got " + std::to_string(n_ue()));
  for (const auto& u : users) {
    require(std::abs(u.x) <= area_side / 2 && std::abs(u.y) <= area_side / 2,
            "user position outside the area");
  }
  require(h_min > 0.0, "h_min must be positive");
  require(h_max >= h_init && h_init >= h_min, "heights must satisfy h_max >= h_init >= h_min");
  require(step_x > 0.0 && step_y > 0.0 && step_h > 0.0 && step_alpha > 0.0, "step sizes must be positive");
  require(alpha_min > 0.0 && alpha_max < 1.0 && alpha_min <= alpha_max,
          "alpha clamp must satisfy 0 < alpha_min <= alpha_max < 1");
  require(alpha_init >= alpha_min && alpha_init <= alpha_max, "alpha_init outside the alpha clamp");
  require(r_min >= 0.0, "r_min must be non-negative");
  const auto [lo, hi] = gain_db_bounds();
  require(std::isfinite(lo) && std::isfinite(hi) && hi > lo, "gain dB bounds must satisfy max > min");
}

void RewardWeights::validate() const {
  if (rate < 0.0 || fairness < 0.0 || gain < 0.0 || satisfied < 0.0 || unsatisfied < 0.0) {
    throw std::invalid_argument("reward: weights must be non-negative");
  }
}

std::vector<Cluster> cluster_users(const Scenario& scenario) {
  const std::size_t n = scenario.n_ue();
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("cluster_users: user count must be even and >= 2");
  const Vec3 start{0.0, 0.0, scenario.h_init};
  std::vector<double> gain(n);
  for (std::size_t i = 0; i < n; ++i) {
    gain[i] = channel::path_gain(scenario.channel, LinkKind::LoS, distance(start, scenario.users[i]));
  }
  std::vector<std::size_t> rank(n);
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return gain[a] > gain[b]; });

  std::vector<Cluster> clusters;
  const std::size_t half = n / 2;
  for (std::size_t k = 0; k < half; ++k) {
    const std::size_t partner = scenario.pairing == PairingRule::BestWithWorst ? n - 1 - k : k + half;
    clusters.push_back({rank[k], rank[partner]});
  }
  return clusters;
}

ActionSpec ActionSpec::for_users(std::size_t n_ue) {
  ActionSpec spec;
  spec.dim = 3 + n_ue / 2;
  spec.count = std::size_t{1} << spec.dim;
  return spec;
}

std::vector<int> ActionSpec::decode(std::size_t index) const {
  if (index >= count) {
    throw std::out_of_range("decode_action: index " + std::to_string(index) + " outside [0, " +
                            std::to_string(count) + ")");
  }
  std::vector<int> signs(dim);
  for (std::size_t j = 0; j < dim; ++j) signs[j] = (index >> j) & 1U ? 1 : -1;
  return signs;
}

std::size_t ActionSpec::encode(const std::vector<int>& signs) const {
  if (signs.size() != dim) throw std::invalid_argument("encode_action: wrong sign-vector length");
  std::size_t index = 0;
  for (std::size_t j = 0; j < dim; ++j) {
    if (signs[j] != 1 && signs[j] != -1) throw std::invalid_argument("encode_action: signs must be +1 or -1");
    if (signs[j] == 1) index |= std::size_t{1} << j;
  }
  return index;
}

double compute_reward(std::span<const double> rates, std::span<const double> gains,
                      const RewardWeights& w, double r_min, double bandwidth_hz) {
  bool all_met = true;
  double met = 0.0;
  double shortfall = 0.0;
  for (double r : rates) {
    if (r >= r_min) {
      met += 1.0;
    } else {
      all_met = false;
      shortfall += r / bandwidth_hz;
    }
  }
  double g_tot = 0.0;
  for (double g : gains) g_tot += g;

  double reward = 0.0;
  if (all_met) reward += w.rate * noma::sum_rate(rates) / bandwidth_hz;
  if (r_min == 0.0) reward += w.fairness * noma::jain_fairness(rates);
  reward += w.gain * g_tot;
  reward += w.satisfied * met;
  reward += w.unsatisfied * shortfall;
  return reward;
}

Environment::Environment(Scenario scenario, RewardWeights weights)
    : scenario_(std::move(scenario)), weights_(weights) {
  scenario_.validate();
  weights_.validate();
  clusters_ = cluster_users(scenario_);
  actions_ = ActionSpec::for_users(scenario_.n_ue());
  std::tie(gain_db_min_, gain_db_max_) = scenario_.gain_db_bounds();
}

std::vector<double> Environment::user_alphas(const Snapshot& snapshot) const {
  std::vector<double> alphas(scenario_.n_ue(), 0.0);
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    alphas[clusters_[c].strong] = snapshot.alphas[c].strong_alpha;
    alphas[clusters_[c].weak] = snapshot.alphas[c].weak_alpha();
  }
  return alphas;
}

void Environment::refresh(Snapshot& snap, Rng& rng, bool redraw_episode_links) const {
  const auto& ch = scenario_.channel;
  const std::size_t n = scenario_.n_ue();
  snap.gains.resize(n);
  snap.link_kinds.resize(n, LinkKind::LoS);
  snap.rates.assign(n, 0.0);
  const bool use_cache = scenario_.link_mode == LinkMode::BernoulliPerEpisode && !redraw_episode_links;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 ue = scenario_.users[i];
    const double theta = channel::clamp_to_model_range(ch, channel::elevation_angle(snap.uav, ue));
    const auto cached = use_cache ? std::optional<LinkKind>(snap.link_kinds[i]) : std::nullopt;
    const auto link = channel::effective_gain(ch, scenario_.link_mode, theta, distance(snap.uav, ue), rng, cached);
    snap.gains[i] = link.gain;
    snap.link_kinds[i] = link.kind;
  }
  const double mimo = channel::mimo_gain(ch.n_uav, ch.n_ue);
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    const auto [s, w] = clusters_[c];
    const double a = snap.alphas[c].strong_alpha;
    snap.rates[s] = noma::user_rate(ch.bandwidth_hz,
                                    noma::received_sinr(ch.tx_power_w, snap.gains[s], mimo, a, 0.0, ch.noise_w));
    snap.rates[w] = noma::user_rate(
        ch.bandwidth_hz, noma::received_sinr(ch.tx_power_w, snap.gains[w], mimo, 1.0 - a, a, ch.noise_w));
  }
}

StepInfo Environment::info_for(const Snapshot& snap) const {
  StepInfo info;
  info.rates = snap.rates;
  info.gains = snap.gains;
  info.satisfied.resize(snap.rates.size());
  info.all_satisfied = true;
  for (std::size_t i = 0; i < snap.rates.size(); ++i) {
    info.satisfied[i] = snap.rates[i] >= scenario_.r_min;
    info.all_satisfied = info.all_satisfied && info.satisfied[i];
  }
  info.sum_rate = noma::sum_rate(snap.rates);
  info.jain = noma::jain_fairness(snap.rates);
  return info;
}

Observation Environment::reset(Rng& rng, int episode) const {
  Snapshot snap;
  snap.uav = {0.0, 0.0, scenario_.h_init};
  snap.alphas.assign(clusters_.size(), noma::ClusterAllocation{scenario_.alpha_init});
  snap.step = 0;
  snap.episode = episode;
  refresh(snap, rng, true);
  Observation obs;
  obs.state = build_state(snap);
  obs.info = info_for(snap);
  obs.snapshot = std::move(snap);
  return obs;
}

Observation Environment::reset(std::uint64_t seed) const {
  Rng rng(seed);
  return reset(rng);
}

StepResult Environment::step(const Snapshot& current, std::size_t action, Rng& rng) const {
  const auto signs = actions_.decode(action);
  const double half = scenario_.area_side / 2;
  Snapshot next = current;
  next.uav.x = std::clamp(current.uav.x + signs[0] * scenario_.step_x, -half, half);
  next.uav.y = std::clamp(current.uav.y + signs[1] * scenario_.step_y, -half, half);
  next.uav.z = std::clamp(current.uav.z + signs[2] * scenario_.step_h, scenario_.h_min, scenario_.h_max);
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    next.alphas[c].strong_alpha = std::clamp(current.alphas[c].strong_alpha + signs[3 + c] * scenario_.step_alpha,
                                             scenario_.alpha_min, scenario_.alpha_max);
  }
  next.step = current.step + 1;
  refresh(next, rng, false);

  StepResult out;
  out.reward = compute_reward(next.rates, next.gains, weights_, scenario_.r_min, scenario_.channel.bandwidth_hz);
  out.state = build_state(next);
  out.info = info_for(next);
  out.snapshot = std::move(next);
  return out;
}

StateVector Environment::build_state(const Snapshot& snap) const {
  const std::size_t n = scenario_.n_ue();
  const double half = scenario_.area_side / 2;
  const auto alphas = user_alphas(snap);
  StateVector s;
  s.reserve(state_dim());
  for (std::size_t i = 0; i < n; ++i) {
    const double g = snap.gains[i];
    if (!std::isfinite(g) || !(g > 0.0)) throw std::domain_error("build_state: non-finite or non-positive gain");
    const double db = 10.0 * std::log10(g);
    s.push_back((snap.uav.x - scenario_.users[i].x) / half);
    s.push_back((snap.uav.y - scenario_.users[i].y) / half);
    s.push_back(alphas[i]);
    s.push_back(std::clamp((db - gain_db_min_) / (gain_db_max_ - gain_db_min_), 0.0, 1.0));
  }
  s.push_back(snap.uav.z / scenario_.h_init);
  return s;
}

TraceWriter::TraceWriter(std::ostream& out, std::size_t n_clusters, std::size_t n_ue) : out_(out) {
  std::vector<std::string> cols{"episode", "tau", "x", "y", "h"};
  for (std::size_t c = 0; c < n_clusters; ++c) cols.push_back("alpha_c" + std::to_string(c + 1));
  for (std::size_t i = 0; i < n_ue; ++i) cols.push_back("rate_ue" + std::to_string(i + 1));
  cols.emplace_back("reward");
  csv::header(out_, cols);
}

void TraceWriter::write(const Snapshot& snap, double reward) {
  csv::RowWriter row(out_);
  row.cell(snap.episode).cell(snap.step).cell(snap.uav.x).cell(snap.uav.y).cell(snap.uav.z);
  for (const auto& a : snap.alphas) row.cell(a.strong_alpha);
  for (double r : snap.rates) row.cell(r);
  row.cell(reward);
  row.end();
}

}  // namespace uavnoma::env
