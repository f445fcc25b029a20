// uavnoma command-line front end: train, eval, sweep, layouts, oracle, baseline.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "uavnoma/config.hpp"
#include "uavnoma/harness.hpp"
#include "uavnoma/network.hpp"
#include "uavnoma/oracle.hpp"

namespace fs = std::filesystem;
using namespace uavnoma;

namespace {

struct Shared {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<int> steps;
  std::string out;
  int jobs = 1;
  std::vector<std::string> overrides;
};

struct RunError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

config::Resolved resolve(const Shared& s) {
  std::vector<std::string> overrides = s.overrides;
  if (s.seed) overrides.push_back("train.seed=" + std::to_string(*s.seed));
  if (s.episodes) overrides.push_back("train.episodes=" + std::to_string(*s.episodes));
  if (s.steps) overrides.push_back("train.steps=" + std::to_string(*s.steps));
  return s.config_path.empty() ? config::Resolved::parse("", overrides)
                               : config::Resolved::load(s.config_path, overrides);
}

fs::path output_dir(const Shared& s, const std::string& command, std::uint64_t seed) {
  fs::path dir;
  if (!s.out.empty()) {
    dir = s.out;
  } else {
    const char* root = std::getenv("UAVNOMA_OUT");
    dir = fs::path(root && *root ? root : "runs") / (command + "-seed" + std::to_string(seed));
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw RunError("cannot create output directory " + dir.string());
  const fs::path probe = dir / ".write-test";
  std::ofstream(probe) << "";
  if (!fs::exists(probe)) throw RunError("output directory is not writable: " + dir.string());
  fs::remove(probe, ec);
  return dir;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunError("cannot write " + path.string());
  body(out);
  out.flush();
  if (!out) throw RunError("write failed: " + path.string());
}

/// Runs one command body inside the shared bookkeeping: resolved config,
/// output directory, config snapshot and manifest.
int run(const Shared& shared, const std::string& command,
        const std::function<void(const config::Resolved&, const fs::path&, nlohmann::json&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  const config::Resolved cfg = resolve(shared);
  const fs::path dir = output_dir(shared, command, cfg.seed());
  const std::string snapshot = cfg.snapshot();
  write_file(dir / "config.ini", [&](std::ostream& o) { o << snapshot; });

  nlohmann::json extra = nlohmann::json::object();
  body(cfg, dir, extra);

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json manifest = {
      {"command", command},
      {"seed", cfg.seed()},
      {"config", snapshot},
      {"config_hash", config::git_blob_hash(snapshot)},
      {"output_dir", fs::absolute(dir).lexically_normal().string()},
      {"wall_clock_s", seconds},
  };
  for (auto& [k, v] : extra.items()) manifest[k] = v;
  write_file(dir / "manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
  std::cout << command << ": wrote " << dir.string() << " in " << seconds << " s\n";
  return 0;
}

nlohmann::json checkpoint_info(const fs::path& path, const nn::NetworkParams& p) {
  return {{"path", fs::absolute(path).lexically_normal().string()},
          {"checksum", p.layers.empty() ? 0 : nn::checksum(p)},
          {"input_dim", p.input_dim()},
          {"n_actions", p.n_actions()}};
}

void add_shared(CLI::App* app, Shared& s) {
  app->add_option("--config", s.config_path, "INI config file (defaults apply when omitted)");
  app->add_option("--seed", s.seed, "Root seed (train.seed)");
  app->add_option("--episodes", s.episodes, "Shortcut for train.episodes");
  app->add_option("--steps", s.steps, "Shortcut for train.steps");
  app->add_option("--out", s.out, "Output directory (default $UAVNOMA_OUT/<command>-seed<N>, else runs/...)");
  app->add_option("--jobs", s.jobs, "Worker threads for sweep/layouts")->check(CLI::PositiveNumber);
  app->add_option("overrides", s.overrides, "section.key=value overrides");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uavnoma: UAV NOMA placement and power control with deep Q-learning"};
  app.require_subcommand(1);
  Shared shared;
  std::string checkpoint, checkpoint_a, checkpoint_b;
  bool trace = false;

  auto* train = app.add_subcommand("train", "Train a Q-network; writes episodes.csv and policy.ckpt");
  add_shared(train, shared);
  train->add_flag("--trace", trace, "Also write every step to trace.csv");

  auto* eval = app.add_subcommand("eval", "Greedy rollout of a checkpoint; writes eval.csv");
  add_shared(eval, shared);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint to evaluate")->required();

  auto* sweep = app.add_subcommand("sweep", "Fresh training per R_min/W point; writes sweep.csv");
  add_shared(sweep, shared);

  auto* layouts = app.add_subcommand("layouts", "Compare two checkpoints on random layouts; writes layouts.csv");
  add_shared(layouts, shared);
  layouts->add_option("--checkpoint-a", checkpoint_a, "First policy (e.g. dueling)")->required();
  layouts->add_option("--checkpoint-b", checkpoint_b, "Second policy (e.g. vanilla)")->required();

  auto* oracle_cmd = app.add_subcommand("oracle", "Exhaustive grid search; writes oracle.csv");
  add_shared(oracle_cmd, shared);

  auto* baseline = app.add_subcommand("baseline", "Static hover at the origin; writes baseline.csv");
  add_shared(baseline, shared);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      return run(shared, "train", [&](const config::Resolved& cfg, const fs::path& dir, nlohmann::json& extra) {
        std::unique_ptr<std::ofstream> trace_file;
        std::unique_ptr<env::TraceWriter> writer;
        const harness::TrainConfig tc = cfg.train();
        if (trace) {
          trace_file = std::make_unique<std::ofstream>(dir / "trace.csv", std::ios::binary);
          if (!*trace_file) throw RunError("cannot write trace.csv");
          const env::Environment probe(tc.scenario, tc.reward);
          writer = std::make_unique<env::TraceWriter>(*trace_file, probe.clusters().size(), tc.scenario.n_ue());
        }
        const auto result = harness::train(tc, {}, writer.get());
        write_file(dir / "episodes.csv", [&](std::ostream& o) { harness::write_episodes_csv(o, result.records); });
        nn::save_checkpoint(dir / "policy.ckpt", result.params);
        extra["checkpoint"] = checkpoint_info(dir / "policy.ckpt", result.params);
        extra["updates"] = result.updates;
      });
    }
    if (*eval) {
      return run(shared, "eval", [&](const config::Resolved& cfg, const fs::path& dir, nlohmann::json& extra) {
        const auto params = nn::load_checkpoint(checkpoint);
        const auto r = harness::evaluate(params, cfg.scenario(), cfg.eval_steps(), cfg.seed());
        write_file(dir / "eval.csv", [&](std::ostream& o) { harness::write_eval_csv(o, r, cfg.eval_steps()); });
        extra["checkpoint"] = checkpoint_info(checkpoint, params);
      });
    }
    if (*sweep) {
      return run(shared, "sweep", [&](const config::Resolved& cfg, const fs::path& dir, nlohmann::json&) {
        const auto points = cfg.sweep_points();
        const auto rows = harness::rmin_sweep(cfg.train(), points, shared.jobs, cfg.sweep_eval_steps(),
                                              cfg.sweep_window());
        write_file(dir / "sweep.csv", [&](std::ostream& o) {
          harness::write_sweep_csv(o, rows, cfg.channel().bandwidth_hz);
        });
      });
    }
    if (*layouts) {
      return run(shared, "layouts", [&](const config::Resolved& cfg, const fs::path& dir, nlohmann::json& extra) {
        const auto a = nn::load_checkpoint(checkpoint_a);
        const auto b = nn::load_checkpoint(checkpoint_b);
        const auto r = harness::layout_sweep(a, b, cfg.scenario(), cfg.layout_count(), cfg.layout_steps(),
                                             cfg.seed(), shared.jobs);
        write_file(dir / "layouts.csv", [&](std::ostream& o) { harness::write_layouts_csv(o, r); });
        extra["checkpoint_a"] = checkpoint_info(checkpoint_a, a);
        extra["checkpoint_b"] = checkpoint_info(checkpoint_b, b);
        extra["summary"] = {{"win_fraction", r.win_fraction}, {"ratio_min", r.ratio_min},
                            {"ratio_median", r.ratio_median}, {"ratio_mean", r.ratio_mean},
                            {"ratio_max", r.ratio_max}};
      });
    }
    if (*oracle_cmd) {
      return run(shared, "oracle", [&](const config::Resolved& cfg, const fs::path& dir, nlohmann::json&) {
        const auto r = oracle::grid_search_oracle(cfg.scenario(), cfg.grid());
        write_file(dir / "oracle.csv", [&](std::ostream& o) { oracle::write_oracle_csv(o, r); });
        if (!r.feasible) std::cout << "oracle: no grid point meets r_min (infeasible)\n";
      });
    }
    if (*baseline) {
      return run(shared, "baseline", [&](const config::Resolved& cfg, const fs::path& dir, nlohmann::json&) {
        const auto r = oracle::static_hover_eval(cfg.scenario(), cfg.baseline_steps(), cfg.seed(),
                                                 cfg.baseline_alpha());
        write_file(dir / "baseline.csv", [&](std::ostream& o) {
          oracle::write_baseline_csv(o, r, cfg.baseline_steps(), cfg.baseline_alpha());
        });
      });
    }
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
