// Product of average strategies vs. the averaged joint distribution on the
// 2x2 game of the counterexample, followed by a short CFR-Jr run on three
// player Kuhn poker.

#include <cstdio>

#include "cce/cce.hpp"

int main() {
  using namespace cce;
  const GameTree game = figure2_game();

  // Alternate (L,L) and (R,R) forever: each player's average is (1/2, 1/2).
  const auto& f = game.forest(0);
  BehavioralStrategy half{0, {{0.5, 0.5}}};
  std::vector<BehavioralStrategy> product{half, {1, {{0.5, 0.5}}}};
  const auto g_product = product_gap(game, product);

  JointDistribution joint(game);
  for (int a = 0; a < f.num_actions[0]; ++a) {
    std::vector<NormalFormPlan> plans{{0, {a}}, {1, {a}}};
    joint.add(plans, 1.0);
    joint.close_step();
  }
  const auto g_joint = cce_gap(game, joint);
  std::printf("product of averages: epsilon = %.4f\n", g_product.epsilon);
  std::printf("joint frequency:     epsilon = %.4f\n", g_joint.epsilon);

  const GameTree kuhn = make_game("K3-4");
  CfrJrSolver solver(kuhn);
  SolverOptions opt;
  opt.iterations = 2000;
  opt.eval_every = 500;
  const auto run = run_solver(solver, opt);
  for (const auto& p : run.trace) {
    std::printf("K3-4 cfr-jr t=%-5ld alpha=%.5f support=%ld\n", p.iteration, p.alpha, p.support);
  }
}
