// Acceptance suite. One line per criterion:
//   criterion N: PASS|FAIL  <summary>
// Progress lines for the long training criteria start with "  ".
// `--criterion N` runs a single criterion; the exit status is nonzero when any
// selected criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "uavnoma/channel.hpp"
#include "uavnoma/config.hpp"
#include "uavnoma/csv.hpp"
#include "uavnoma/harness.hpp"
#include "uavnoma/noma.hpp"
#include "uavnoma/oracle.hpp"

namespace fs = std::filesystem;
using namespace uavnoma;

namespace {

struct Verdict {
  bool pass = false;
  std::string summary;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void progress(const std::string& line) { std::cout << "  " << line << std::endl; }

csv::Table fixture(const std::string& name) { return csv::read_table(std::string(UAVNOMA_FIXTURES) + "/" + name); }

config::Resolved load_config(const std::string& name, const std::vector<std::string>& overrides = {}) {
  return config::Resolved::load(std::string(UAVNOMA_CONFIGS) + "/" + name, overrides);
}

channel::ChannelParams by_name(const std::string& s) {
  return s == "mmwave" ? channel::ChannelParams::mmwave() : channel::ChannelParams::sub6();
}

env::LinkMode mode_by_name(const std::string& s) {
  if (s == "always_los") return env::LinkMode::AlwaysLoS;
  if (s == "expected") return env::LinkMode::Expected;
  if (s == "bernoulli_step") return env::LinkMode::BernoulliPerStep;
  return env::LinkMode::BernoulliPerEpisode;
}

// Counts relative-error misses and keeps the worst one.
struct RelCheck {
  double tol;
  std::size_t checked = 0, failed = 0;
  double worst = 0.0;

  void operator()(double got, double want) {
    ++checked;
    const double scale = std::max(std::abs(got), std::abs(want));
    const double err = got == want ? 0.0 : std::abs(got - want) / scale;
    worst = std::max(worst, err);
    if (!(err <= tol)) ++failed;
  }
};

// ---------------------------------------------------------------- criterion 1

Verdict physics_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  RelCheck rel{1e-12};
  std::size_t kind_mismatch = 0;

  auto t = fixture("elevation.csv");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    rel(channel::elevation_angle({t.number(i, "uav_x"), t.number(i, "uav_y"), t.number(i, "uav_h")},
                                 {t.number(i, "ue_x"), t.number(i, "ue_y")}),
        t.number(i, "theta"));
  }
  t = fixture("los_probability.csv");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    rel(channel::los_probability(by_name(t.text(i, "spectrum")), t.number(i, "theta")), t.number(i, "probability"));
  }
  t = fixture("path_gain.csv");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto kind = t.text(i, "los") == "1" ? channel::LinkKind::LoS : channel::LinkKind::NLoS;
    rel(channel::path_gain(by_name(t.text(i, "spectrum")), kind, t.number(i, "distance")), t.number(i, "gain"));
  }
  t = fixture("effective_gain.csv");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    Rng draw(std::stoull(t.text(i, "seed")));
    const auto g = channel::effective_gain(by_name(t.text(i, "spectrum")), mode_by_name(t.text(i, "mode")),
                                           t.number(i, "theta"), t.number(i, "distance"), draw, std::nullopt);
    rel(g.gain, t.number(i, "gain"));
    if ((g.kind == channel::LinkKind::LoS) != (t.text(i, "los") == "1")) ++kind_mismatch;
  }
  t = fixture("sinr.csv");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    rel(noma::received_sinr(t.number(i, "p_t"), t.number(i, "gain"), t.number(i, "mimo"), t.number(i, "alpha"),
                            t.number(i, "beta"), t.number(i, "sigma2")),
        t.number(i, "sinr"));
  }
  t = fixture("rate.csv");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    rel(noma::user_rate(t.number(i, "bandwidth"), t.number(i, "sinr")), t.number(i, "rate"));
  }
  t = fixture("jain.csv");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::vector<double> r{t.number(i, "r1"), t.number(i, "r2"), t.number(i, "r3"), t.number(i, "r4")};
    rel(noma::jain_fairness(r), t.number(i, "jain"));
    rel(noma::weighted_objective(r, 1.0, 5.0), t.number(i, "objective_r1_f5"));
  }

  // Properties over 10^5 random inputs each.
  std::size_t violations = 0;
  Rng rng(2024);
  const double half_pi = std::acos(0.0);
  for (const auto& p : {channel::ChannelParams::sub6(), channel::ChannelParams::mmwave()}) {
    const auto* sub6 = std::get_if<channel::Sub6Loss>(&p.loss);
    const double lo = sub6 ? sub6->min_elevation_rad : 0.0;
    for (int k = 0; k < 100000; ++k) {
      const double a = rng.uniform(lo, half_pi), b = rng.uniform(lo, half_pi);
      const double pa = channel::los_probability(p, a), pb = channel::los_probability(p, b);
      if (!(pa >= 0.0 && pa <= 1.0)) ++violations;
      if (a < b && pa > pb) ++violations;
    }
  }
  for (int k = 0; k < 100000; ++k) {
    const std::size_t n = 1 + rng.below(8);
    std::vector<double> r(n);
    for (auto& x : r) x = 1e-3 + rng.uniform() * std::pow(10.0, 9.0 * rng.uniform());
    const double j = noma::jain_fairness(r);
    if (!(j >= 1.0 / static_cast<double>(n) * (1 - 1e-12) && j <= 1.0 + 1e-12)) ++violations;
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Verdict v;
  v.pass = rel.failed == 0 && kind_mismatch == 0 && violations == 0 && rel.checked > 0 && secs < 10.0;
  v.summary = std::to_string(rel.checked) + " fixture values, " + std::to_string(rel.failed) +
              " outside 1e-12 (worst " + fmt("%.2e", rel.worst) + "), " + std::to_string(kind_mismatch) +
              " link-kind mismatches, " + std::to_string(violations) + " property violations in 3e5 draws, " +
              fmt("%.1f s", secs);
  return v;
}

// ---------------------------------------------------------------- criterion 2

Verdict gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(4242);
  double worst = 0.0;
  std::size_t params = 0, failed = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto head = trial % 2 ? nn::Head::Vanilla : nn::Head::Dueling;
    const std::size_t in = 1 + rng.below(5), actions = 1 + rng.below(5), hidden = 1 + rng.below(5);
    const std::size_t batch = 1 + rng.below(5);
    auto p = nn::init_network(in, actions, head, 5000 + static_cast<std::uint64_t>(trial), hidden);
    for (auto& l : p.layers) {
      for (auto& b : l.bias) b = rng.uniform(-0.5, 0.5);
    }
    nn::Matrix s(batch, in);
    for (auto& x : s.data) x = rng.uniform(-1, 1);
    std::vector<std::size_t> a(batch);
    std::vector<double> y(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      a[b] = rng.below(actions);
      y[b] = rng.uniform(-2, 2);
    }
    const auto grads = nn::td_loss_and_gradients(p, s, a, y).gradients;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      auto probe = [&](double& slot, double analytic) {
        const double orig = slot, h = 1e-6;
        slot = orig + h;
        const double up = nn::td_loss_and_gradients(p, s, a, y).loss;
        slot = orig - h;
        const double down = nn::td_loss_and_gradients(p, s, a, y).loss;
        slot = orig;
        const double numeric = (up - down) / (2 * h);
        // Relative error, with an absolute floor for near-zero gradients.
        const double err = std::abs(numeric - analytic) / std::max(1.0, std::abs(numeric));
        worst = std::max(worst, err);
        ++params;
        if (!(err < 1e-4)) ++failed;
      };
      for (std::size_t k = 0; k < p.layers[l].weights.size(); ++k) probe(p.layers[l].weights[k], grads.layers[l].weights[k]);
      for (std::size_t k = 0; k < p.layers[l].bias.size(); ++k) probe(p.layers[l].bias[k], grads.layers[l].bias[k]);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {failed == 0 && secs < 30.0, "50 networks, " + std::to_string(params) + " parameters, " +
                                          std::to_string(failed) + " above 1e-4 (worst " + fmt("%.2e", worst) +
                                          "), " + fmt("%.1f s", secs)};
}

// ---------------------------------------------------------------- criterion 3

// Two-user sub-6 instance, every link LoS, sum-rate objective.
env::Scenario tiny_scenario() {
  auto s = env::Scenario::reference(channel::ChannelParams::sub6(), env::LinkMode::AlwaysLoS);
  s.users = {s.users[0], s.users[1]};
  s.r_min = 0.0;
  return s;
}

// Sum rate the greedy policy holds over the last `tail` steps of an episode
// of `steps` steps, the same horizon it was trained on.
double settled_sum_rate(const nn::NetworkParams& params, const env::Scenario& s, int steps, int tail,
                        std::uint64_t seed) {
  const env::Environment e(s, {});
  Rng rng = Rng::stream(seed, "env");
  auto obs = e.reset(rng);
  env::Snapshot snap = obs.snapshot;
  env::StateVector state = obs.state;
  double total = 0.0;
  for (int k = 0; k < steps; ++k) {
    auto r = e.step(snap, rl::greedy_action(params, state), rng);
    if (k >= steps - tail) total += r.info.sum_rate;
    snap = std::move(r.snapshot);
    state = std::move(r.state);
  }
  return total / tail;
}

Verdict oracle_dominance() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = tiny_scenario();
  oracle::GridSpec grid;
  grid.xy_step = 5.0;
  for (double h = s.h_min; h <= s.h_max + 1e-9; h += 5.0) grid.heights.push_back(h);
  grid.alpha_step = 0.05;
  grid.omega_r = 1.0;
  grid.omega_f = 0.0;
  const auto best = oracle::grid_search_oracle(s, grid);
  progress("oracle " + fmt("%.4g bps", best.objective) + " at (" + fmt("%g", best.position.x) + ", " +
           fmt("%g", best.position.y) + ", " + fmt("%g", best.position.z) + "), alpha " +
           fmt("%.2f", best.strong_alphas[0]));

  int wins = 0;
  std::ostringstream ratios;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    harness::TrainConfig cfg;
    cfg.scenario = s;
    cfg.reward = {1, 0, 0, 0, 0};
    cfg.episodes = 200;
    cfg.steps = 100;
    cfg.gamma = 0.99;
    cfg.sync_every = 500;
    cfg.seed = seed;
    const auto run = harness::train(cfg);
    const double got = settled_sum_rate(run.params, s, cfg.steps, 10, seed);
    const double ratio = got / best.objective;
    progress("seed " + std::to_string(seed) + ": " + fmt("%.4g bps", got) + ", " + fmt("%.1f%%", 100 * ratio) +
             " of the oracle");
    ratios << (seed > 1 ? " " : "") << fmt("%.0f%%", 100 * ratio);
    if (ratio >= 0.85) ++wins;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {wins >= 4, std::to_string(wins) + "/5 seeds at >= 85% of the grid optimum (" + ratios.str() + "), " +
                         fmt("%.0f s", secs)};
}

// ---------------------------------------------------------------- criterion 4

// Runs seeds 1..10 until the k-of-10 outcome is decided.
template <class PerSeed>
std::pair<int, int> seed_vote(int need, PerSeed&& per_seed) {
  int pass = 0, fail = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    if (pass >= need || fail > 10 - need) break;
    (per_seed(seed) ? pass : fail) += 1;
  }
  return {pass, fail};
}

Verdict sub6_reproduction() {
  const auto [pass, fail] = seed_vote(7, [](std::uint64_t seed) {
    const auto cfg = load_config("sub6_los.cfg", {"train.seed=" + std::to_string(seed)}).train();
    const auto run = harness::train(cfg);
    const auto m = harness::moving_metrics(run.records, 100).back();
    const bool ok = m.rate >= 300e6 && m.rate <= 500e6 && m.jain >= 0.5;
    progress("seed " + std::to_string(seed) + ": R_e_tot " + fmt("%.1f Mbps", m.rate / 1e6) + ", J_e_f " +
             fmt("%.3f", m.jain) + (ok ? "  in band" : "  out of band"));
    return ok;
  });
  return {pass >= 7, std::to_string(pass) + " of " + std::to_string(pass + fail) +
                         " seeds run inside [300, 500] Mbps with J >= 0.5; need 7 of 10"};
}

// ---------------------------------------------------------------- criterion 5

Verdict mmwave_sweep() {
  // The gate point and the reported target; lower points do not affect the
  // verdict and are left to `uavnoma sweep`.
  const std::vector<double> points{2.5, 3.0};
  const auto cfg = load_config("mmwave_sweep.cfg");
  const auto sweep = harness::rmin_sweep(cfg.train(), points, 1, cfg.sweep_eval_steps(), cfg.sweep_window());
  for (const auto& p : sweep) {
    progress("R_min/W " + fmt("%.1f", p.rmin_over_w) + ": final-episode satisfaction " +
             fmt("%.3f", p.final_satisfaction) + ", greedy eval satisfaction " + fmt("%.3f", p.eval.satisfaction) +
             ", R_e_tot " + fmt("%.2f Gbps", p.r_e_tot / 1e9));
  }
  const bool gate = sweep[0].final_satisfaction >= 0.9;
  const bool target = sweep[1].final_satisfaction >= 0.9;
  return {gate, "R_min/W 2.5 satisfaction " + fmt("%.3f", sweep[0].final_satisfaction) + " (need 0.9); 3.0 " +
                    (target ? "reached" : "not reached") + " (" + fmt("%.3f", sweep[1].final_satisfaction) + ")"};
}

// ---------------------------------------------------------------- criterion 6

Verdict dueling_generalization() {
  const auto dueling_cfg = load_config("mmwave_layouts.cfg", {"train.head=dueling"});
  const auto vanilla_cfg = load_config("mmwave_layouts.cfg", {"train.head=vanilla"});
  const auto dueling = harness::train(dueling_cfg.train());
  progress("dueling trained, R_e_tot " + fmt("%.2f Gbps", harness::moving_metrics(dueling.records).back().rate / 1e9));
  const auto vanilla = harness::train(vanilla_cfg.train());
  progress("vanilla trained, R_e_tot " + fmt("%.2f Gbps", harness::moving_metrics(vanilla.records).back().rate / 1e9));
  const auto t0 = std::chrono::steady_clock::now();
  const auto sweep = harness::layout_sweep(dueling.params, vanilla.params, dueling_cfg.scenario(),
                                           dueling_cfg.layout_count(), dueling_cfg.layout_steps(), dueling_cfg.seed());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = sweep.win_fraction >= 0.55 && sweep.ratio_median > 100.0 && secs < 1200.0;
  return {ok, "dueling wins " + fmt("%.2f", sweep.win_fraction) + " of " + std::to_string(sweep.rows.size()) +
                  " layouts, median ratio " + fmt("%.1f%%", sweep.ratio_median) + ", sweep " + fmt("%.0f s", secs)};
}

// ---------------------------------------------------------------- criterion 7

Verdict baseline_margin() {
  const auto base_cfg = load_config("sub6_generic.cfg");
  const auto hover =
      oracle::static_hover_eval(base_cfg.scenario(), base_cfg.baseline_steps(), 0, base_cfg.baseline_alpha());
  progress("static hover " + fmt("%.4g bps", hover.avg_sum_rate));
  const auto [pass, fail] = seed_vote(7, [&](std::uint64_t seed) {
    const auto cfg = load_config("sub6_generic.cfg", {"train.seed=" + std::to_string(seed)});
    const auto run = harness::train(cfg.train());
    const auto eval = harness::evaluate(run.params, cfg.scenario(), cfg.eval_steps(), seed);
    const double gain = eval.avg_sum_rate / hover.avg_sum_rate - 1.0;
    progress("seed " + std::to_string(seed) + ": greedy " + fmt("%.4g bps", eval.avg_sum_rate) + ", " +
             fmt("%+.1f%%", 100 * gain) + " over static hover");
    return gain >= 0.25;
  });
  return {pass >= 7, std::to_string(pass) + " of " + std::to_string(pass + fail) +
                         " seeds run beat static hover by >= 25%; need 7 of 10"};
}

// ---------------------------------------------------------------- criterion 8

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(UAVNOMA_CLI) + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "uavnoma_acceptance_determinism";
  fs::remove_all(root);
  const std::string small = " train.batch=16 train.buffer=200 train.hidden=32 ";
  // command, arguments, files to compare
  struct Job {
    std::string name, args;
    std::vector<std::string> files;
  };
  const std::string ckpt_a = (root / "train_1" / "policy.ckpt").string();
  const std::string ckpt_b = (root / "vanilla_1" / "policy.ckpt").string();
  const std::vector<Job> jobs{
      {"train", "train --episodes 4 --steps 60 --seed 7 scenario.link_mode=bernoulli_step" + small,
       {"episodes.csv", "policy.ckpt", "config.ini"}},
      {"vanilla", "train --episodes 3 --steps 40 --seed 8 train.head=vanilla" + small, {"episodes.csv", "policy.ckpt"}},
      {"eval", "eval --checkpoint " + ckpt_a + " eval.steps=200 scenario.link_mode=bernoulli_episode", {"eval.csv"}},
      {"sweep", "sweep --episodes 3 --steps 40 --seed 9 \"sweep.rmin_over_w=0, 1.5\" sweep.window=1 sweep.eval_steps=50" +
                    small,
       {"sweep.csv"}},
      {"layouts", "layouts --checkpoint-a " + ckpt_a + " --checkpoint-b " + ckpt_b + " layouts.count=6 layouts.steps=40",
       {"layouts.csv"}},
      {"oracle", "oracle oracle.xy_step=10 oracle.alpha_step=0.1", {"oracle.csv"}},
      {"baseline", "baseline scenario.link_mode=bernoulli_step baseline.steps=300", {"baseline.csv"}},
  };
  std::size_t compared = 0, differing = 0, errors = 0;
  for (const auto& job : jobs) {
    for (int rep = 1; rep <= 2; ++rep) {
      const std::string jobs_flag = job.name == "sweep" || job.name == "layouts" ? " --jobs " + std::to_string(rep) : "";
      if (run_cli(job.args + jobs_flag + " --out " + (root / (job.name + "_" + std::to_string(rep))).string()) != 0) {
        ++errors;
      }
    }
    for (const auto& f : job.files) {
      const auto a = root / (job.name + "_1") / f, b = root / (job.name + "_2") / f;
      ++compared;
      if (!fs::exists(a) || slurp(a).empty() || slurp(a) != slurp(b)) {
        ++differing;
        progress(job.name + "/" + f + " differs between runs");
      }
    }
  }
  // The stored config snapshot alone reproduces the training run.
  ++compared;
  if (run_cli("train --config " + (root / "train_1" / "config.ini").string() + " --out " + (root / "replay").string()) != 0 ||
      slurp(root / "replay" / "episodes.csv") != slurp(root / "train_1" / "episodes.csv")) {
    ++differing;
    progress("replay from config.ini differs");
  }
  return {differing == 0 && errors == 0, std::to_string(compared) + " output files compared across repeated runs, " +
                                             std::to_string(differing) + " differ, " + std::to_string(errors) +
                                             " runs failed"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uavnoma acceptance suite"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"numerical physics", physics_suite},
      {"gradient correctness", gradient_check},
      {"oracle dominance", oracle_dominance},
      {"sub-6 training reproduction", sub6_reproduction},
      {"mmWave R_min sweep", mmwave_sweep},
      {"dueling generalization", dueling_generalization},
      {"baseline margin", baseline_margin},
      {"determinism", determinism},
  };
  bool all = true;
  for (int n : selected) {
    const auto& [name, run] = criteria[static_cast<std::size_t>(n - 1)];
    std::cout << "criterion " << n << " (" << name << ") running" << std::endl;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << "  " << name << ": " << v.summary
              << std::endl;
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
