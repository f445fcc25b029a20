#include "uavnoma/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "uavnoma/csv.hpp"
#include "uavnoma/noma.hpp"

namespace uavnoma::oracle {

namespace {

struct Candidate {
  double objective = 0.0;
  std::uint64_t index = 0;  // lexicographic rank over (x, y, h, alphas)
  bool valid = false;
};

bool better(const Candidate& a, const Candidate& b) {
  if (!a.valid) return false;
  if (!b.valid) return true;
  if (a.objective != b.objective) return a.objective > b.objective;
  return a.index < b.index;
}

// Precomputed per-position rates: rates[level][user] with every cluster at
// that strong-share level.
class Grid {
 public:
  Grid(const env::Scenario& scenario, const GridSpec& spec)
      : environment_(scenario, env::RewardWeights{}),
        spec_(spec),
        xs_(spec.xy_levels(scenario.area_side)),
        alphas_(spec.alpha_levels(scenario)),
        n_users_(scenario.n_ue()),
        n_clusters_(environment_.clusters().size()) {
    spec.validate(scenario);
    if (scenario.link_mode != env::LinkMode::AlwaysLoS && scenario.link_mode != env::LinkMode::Expected) {
      throw std::invalid_argument("grid_search_oracle: link mode must be AlwaysLoS or Expected");
    }
    combos_ = 1;
    for (std::size_t c = 0; c < n_clusters_; ++c) combos_ *= alphas_.size();
  }

  std::size_t positions() const { return xs_.size() * xs_.size() * spec_.heights.size(); }

  Vec3 position(std::size_t p) const {
    const std::size_t nh = spec_.heights.size();
    const std::size_t nx = xs_.size();
    return {xs_[p / (nx * nh)], xs_[(p / nh) % nx], spec_.heights[p % nh]};
  }

  std::vector<double> shares(std::uint64_t combo) const {
    std::vector<double> out(n_clusters_);
    for (std::size_t c = n_clusters_; c-- > 0;) {
      out[c] = alphas_[combo % alphas_.size()];
      combo /= alphas_.size();
    }
    return out;
  }

  std::vector<double> rates_at(Vec3 uav, const std::vector<double>& shares) const {
    env::Snapshot snap;
    snap.uav = uav;
    for (double a : shares) snap.alphas.push_back({a});
    Rng unused(0);
    environment_.refresh(snap, unused, true);
    return snap.rates;
  }

  /// Best alpha combination at position p.
  Candidate best_at(std::size_t p) const {
    const Vec3 uav = position(p);
    const std::size_t levels = alphas_.size();
    // Per cluster and level: sum, sum of squares, feasibility.
    std::vector<double> s(n_clusters_ * levels), q(n_clusters_ * levels);
    std::vector<char> ok(n_clusters_ * levels);
    const auto& clusters = environment_.clusters();
    for (std::size_t l = 0; l < levels; ++l) {
      const auto rates = rates_at(uav, std::vector<double>(n_clusters_, alphas_[l]));
      for (std::size_t c = 0; c < n_clusters_; ++c) {
        const double rs = rates[clusters[c].strong];
        const double rw = rates[clusters[c].weak];
        s[c * levels + l] = rs + rw;
        q[c * levels + l] = rs * rs + rw * rw;
        ok[c * levels + l] = rs >= spec_.r_min && rw >= spec_.r_min;
      }
    }
    Candidate best;
    std::vector<std::size_t> digit(n_clusters_, 0);
    for (std::uint64_t combo = 0; combo < combos_; ++combo) {
      double sum = 0.0, sq = 0.0;
      bool feasible = true;
      for (std::size_t c = 0; c < n_clusters_; ++c) {
        const std::size_t k = c * levels + digit[c];
        sum += s[k];
        sq += q[k];
        feasible = feasible && ok[k];
      }
      if (feasible) {
        const double jain = sq > 0.0 ? sum * sum / (static_cast<double>(n_users_) * sq) : 0.0;
        const Candidate cand{spec_.omega_r * sum + spec_.omega_f * jain, p * combos_ + combo, true};
        if (better(cand, best)) best = cand;
      }
      for (std::size_t c = n_clusters_; c-- > 0;) {
        if (++digit[c] < levels) break;
        digit[c] = 0;
      }
    }
    return best;
  }

  OracleResult finish(const Candidate& best) const {
    OracleResult r;
    if (!best.valid) return r;
    r.feasible = true;
    r.position = position(best.index / combos_);
    r.strong_alphas = shares(best.index % combos_);
    r.rates = rates_at(r.position, r.strong_alphas);
    r.objective = noma::weighted_objective(r.rates, spec_.omega_r, spec_.omega_f);
    return r;
  }

 private:
  env::Environment environment_;
  GridSpec spec_;
  std::vector<double> xs_;
  std::vector<double> alphas_;
  std::size_t n_users_;
  std::size_t n_clusters_;
  std::uint64_t combos_ = 1;
};

}  // namespace

GridSpec GridSpec::coarse(const env::Scenario& scenario) {
  GridSpec g;
  g.heights = {scenario.h_min, 0.5 * (scenario.h_min + scenario.h_max), scenario.h_max};
  return g;
}

std::vector<double> GridSpec::xy_levels(double area_side) const {
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor(area_side / xy_step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(-area_side / 2 + static_cast<double>(i) * xy_step);
  return out;
}

std::vector<double> GridSpec::alpha_levels(const env::Scenario& scenario) const {
  std::vector<double> out;
  for (std::size_t k = 1;; ++k) {
    const double a = static_cast<double>(k) * alpha_step;
    if (a >= 1.0 - 1e-12) break;
    if (a >= scenario.alpha_min - 1e-12 && a <= scenario.alpha_max + 1e-12) out.push_back(a);
  }
  return out;
}

void GridSpec::validate(const env::Scenario& scenario) const {
  if (!(xy_step > 0.0) || !(alpha_step > 0.0)) throw std::invalid_argument("grid: steps must be positive");
  if (heights.empty()) throw std::invalid_argument("grid: at least one height level is required");
  for (double h : heights) {
    if (h < scenario.h_min || h > scenario.h_max) throw std::invalid_argument("grid: height level outside [h_min, h_max]");
  }
  if (alpha_levels(scenario).empty()) throw std::invalid_argument("grid: no alpha level inside the clamp");
  if (omega_r < 0.0 || omega_f < 0.0) throw std::invalid_argument("grid: objective weights must be non-negative");
}

OracleResult grid_search_oracle(const env::Scenario& scenario, const GridSpec& spec) {
  const Grid grid(scenario, spec);
  const auto n = static_cast<std::int64_t>(grid.positions());
  Candidate best;
#pragma omp parallel
  {
    Candidate local;
#pragma omp for schedule(dynamic, 16) nowait
    for (std::int64_t p = 0; p < n; ++p) {
      const Candidate c = grid.best_at(static_cast<std::size_t>(p));
      if (better(c, local)) local = c;
    }
#pragma omp critical(uavnoma_oracle_reduce)
    if (better(local, best)) best = local;
  }
  return grid.finish(best);
}

OracleResult grid_search_oracle_serial(const env::Scenario& scenario, const GridSpec& spec) {
  const Grid grid(scenario, spec);
  Candidate best;
  for (std::size_t p = 0; p < grid.positions(); ++p) {
    const Candidate c = grid.best_at(p);
    if (better(c, best)) best = c;
  }
  return grid.finish(best);
}

BaselineResult static_hover_eval(const env::Scenario& scenario, int steps, std::uint64_t seed, double strong_alpha) {
  if (steps < 1) throw std::invalid_argument("static_hover_eval: steps must be >= 1");
  const env::Environment environment(scenario, env::RewardWeights{});
  Rng rng = Rng::stream(seed, "env");
  env::Snapshot snap = environment.reset(rng).snapshot;
  for (auto& a : snap.alphas) a.strong_alpha = strong_alpha;
  BaselineResult r;
  for (int k = 0; k < steps; ++k) {
    environment.refresh(snap, rng, false);
    r.avg_sum_rate += noma::sum_rate(snap.rates);
    r.avg_jain += noma::jain_fairness(snap.rates);
  }
  r.avg_sum_rate /= steps;
  r.avg_jain /= steps;
  return r;
}

void write_oracle_csv(std::ostream& out, const OracleResult& r) {
  std::vector<std::string> cols{"feasible", "x", "y", "h"};
  for (std::size_t c = 0; c < r.strong_alphas.size(); ++c) cols.push_back("alpha_c" + std::to_string(c + 1));
  cols.emplace_back("objective");
  for (std::size_t i = 0; i < r.rates.size(); ++i) cols.push_back("rate_ue" + std::to_string(i + 1));
  csv::header(out, cols);
  csv::RowWriter w(out);
  w.cell(r.feasible ? 1 : 0).cell(r.position.x).cell(r.position.y).cell(r.position.z);
  for (double a : r.strong_alphas) w.cell(a);
  w.cell(r.objective);
  for (double v : r.rates) w.cell(v);
  w.end();
}

void write_baseline_csv(std::ostream& out, const BaselineResult& r, int steps, double strong_alpha) {
  csv::header(out, {"steps", "strong_alpha", "avg_sum_rate_bps", "avg_jain"});
  csv::RowWriter(out).cell(steps).cell(strong_alpha).cell(r.avg_sum_rate).cell(r.avg_jain).end();
}

}  // namespace uavnoma::oracle
