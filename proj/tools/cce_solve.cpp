// Command-line front end: `solve` runs an experiment, `game` persists or
// inspects a game instance.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cce/cce.hpp"

namespace {

void print_summary(const cce::ExperimentConfig& cfg, const cce::ExperimentResult& r) {
  std::printf("game %s  algorithm %s  delta %g  sw_upper_bound %g\n", cce::game_label(cfg).c_str(),
              cce::to_string(cfg.algorithm).c_str(), r.delta, r.sw_upper_bound);
  for (const auto& c : r.cells) {
    if (c.run.trace.empty()) {
      std::printf("  %-32s no evaluation point\n", c.name.c_str());
      continue;
    }
    const auto& last = c.run.trace.back();
    std::printf("  %-32s t=%-8ld alpha=%-12.6g eps=%-12.6g sw=%-10.6g support=%-8ld%s\n", c.name.c_str(),
                last.iteration, last.alpha, last.epsilon, last.sw, last.support,
                c.run.stopped_by_time ? "  (time limit)" : "");
    for (const auto& h : c.hits) {
      if (h.iteration) {
        std::printf("      alpha<=%-7g first at t=%ld (%.3fs)\n", h.alpha_target, *h.iteration, *h.time_s);
      } else {
        std::printf("      alpha<=%-7g not reached\n", h.alpha_target);
      }
    }
  }
  if (r.cells.size() > 1) {
    for (const auto& g : r.aggregate) {
      std::printf("  aggregate alpha<=%-7g hit %d/%d  iteration %.1f +- %.1f  time %.3f +- %.3f s\n", g.alpha_target,
                  g.hit, g.cells, g.iteration_mean, g.iteration_std, g.time_mean, g.time_std);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate coarse correlated equilibria of extensive-form games"};
  app.require_subcommand(1);

  cce::ExperimentConfig cfg;
  std::string algo = "cfr-jr";
  std::string config_path;
  bool no_timing = false;
  auto* solve = app.add_subcommand("solve", "Run CFR, CFR-S, CFR-Jr or CFR-Jr-k and write traces");
  solve->add_option("--game", cfg.game, "Game spec, e.g. K3-4, L3-3, G2-4-DA, R2-5:seed=7, SHAPLEY, M-fig2");
  solve->add_option("--game-file", cfg.game_file, "Load a persisted game instance instead of --game");
  solve->add_option("--algo", algo, "cfr | cfr-s | cfr-jr | cfr-jr-k")
      ->check(CLI::IsMember({"cfr", "cfr-s", "cfr-jr", "cfr-jr-k"}));
  solve->add_option("--iters", cfg.iterations, "Number of iterations T");
  solve->add_option("--eval-every", cfg.eval_every, "Evaluation cadence in iterations");
  solve->add_option("--out", cfg.out_dir, "Output directory for traces and summary.json");
  solve->add_option("--seed", cfg.seeds, "Seed list (one cell per seed for cfr-s)");
  solve->add_option("--recon-rate", cfg.k, "Reconstruction rate k for cfr-jr-k");
  solve->add_option("--alpha-targets", cfg.alpha_targets, "Accuracy targets for the first-hit summary");
  solve->add_option("--time-limit", cfg.time_limit_s, "Per-cell wall-clock limit in seconds (0 = none)");
  solve->add_option("--format", cfg.format, "Trace format")->check(CLI::IsMember({"csv", "json"}));
  solve->add_option("--workers", cfg.workers, "Cells run concurrently");
  solve->add_option("--config", config_path, "JSON config; its keys override the flags");
  solve->add_flag("--no-timing", no_timing, "Write 0 into time columns (byte-identical reruns)");
  solve->add_flag("--resume", cfg.resume, "Continue from checkpoints left by a time-limited run");

  std::string spec, out_path, inspect_path;
  auto* game = app.add_subcommand("game", "Build, persist or inspect a game instance");
  game->add_option("--game", spec, "Game spec to build");
  game->add_option("--out", out_path, "Write the instance as a JSON document");
  game->add_option("--inspect", inspect_path, "Load and validate a persisted instance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      cfg.algorithm = cce::parse_algorithm(algo);
      if (cfg.algorithm == cce::Algorithm::kCfrJrK && solve->count("--recon-rate") == 0 && config_path.empty()) {
        throw cce::InvalidArgument("cfr-jr-k needs --recon-rate");
      }
      cfg.timing = !no_timing;
      if (!config_path.empty()) cfg = cce::load_config(config_path, cfg);
      const auto result = cce::run_experiment(cfg);
      print_summary(cfg, result);
      return result.exit_code();
    }
    if (*game) {
      if (spec.empty() == inspect_path.empty()) throw cce::InvalidArgument("give exactly one of --game or --inspect");
      const cce::GameTree tree = spec.empty() ? cce::load_game(inspect_path) : cce::make_game(spec);
      std::printf("players %d  nodes %d  terminals %d  infosets %d  delta %g  sw_upper_bound %g\n", tree.num_players(),
                  tree.num_nodes(), tree.num_terminals(), tree.num_infosets(), cce::payoff_range(tree),
                  cce::sw_upper_bound(tree));
      for (cce::PlayerId p = 0; p < tree.num_players(); ++p) {
        std::printf("  player %d: %d infosets, %g reduced plans\n", p, tree.num_infosets(p), cce::count_plans(tree, p));
      }
      if (!out_path.empty()) cce::save_game(tree, out_path);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
