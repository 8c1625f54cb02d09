#pragma once

#include <functional>
#include <map>
#include <vector>

#include "cce/cce.hpp"

namespace cce::testing {

/// Player 0 chooses L (terminal z1) or R; after R she chooses l (z2) or r (z3).
inline GameTree t1_tree() {
  GameBuilder b(1);
  const NodeId i1 = b.add_decision(kNone, 0, "I1", {"L", "R"});
  b.add_terminal(i1, {1.0});
  const NodeId i2 = b.add_decision(i1, 0, "I2", {"l", "r"});
  b.add_terminal(i2, {2.0});
  b.add_terminal(i2, {3.0});
  return b.build();
}

/// Terminal reach of a behavioral strategy by direct recursion over the tree.
inline std::vector<double> recursive_reach(const GameTree& tree, const BehavioralStrategy& s) {
  std::vector<double> r(tree.num_terminals(), 0.0);
  std::function<void(NodeId, double)> walk = [&](NodeId h, double w) {
    const Node& n = tree.node(h);
    if (n.kind == NodeKind::kTerminal) {
      r[n.terminal] = w;
      return;
    }
    for (int a = 0; a < n.num_actions(); ++a) {
      double wa = w;
      if (n.kind == NodeKind::kDecision && n.player == s.player) {
        wa *= s.dist[tree.infoset(n.infoset).local_index][a];
      }
      walk(n.children[a], wa);
    }
  };
  walk(tree.root(), 1.0);
  return r;
}

/// A random joint distribution with `support` entries drawn from random
/// behavioral strategies.
inline JointDistribution random_joint(const GameTree& tree, int support, Rng& rng) {
  JointDistribution x(tree);
  std::vector<BehavioralStrategy> pis;
  for (PlayerId p = 0; p < tree.num_players(); ++p) pis.push_back(random_strategy(tree, p, rng));
  for (int e = 0; e < support; ++e) {
    std::vector<NormalFormPlan> plans;
    for (PlayerId p = 0; p < tree.num_players(); ++p) plans.push_back(sampled_plan(tree, pis[p], rng));
    x.add(plans, rng.uniform(0.1, 1.0));
  }
  // Normalize so that the weights sum to one with a unit normalizer.
  JointDistribution y(tree);
  for (int e = 0; e < x.support(); ++e) y.add(x.plans(e), x.raw_weight(e) / x.mass());
  y.close_step();
  return y;
}

inline std::vector<GameTree> random_corpus(int count, int players = 2, int depth = 3) {
  std::vector<GameTree> out;
  for (int s = 0; s < count; ++s) {
    RandomGameParams q;
    q.players = players;
    q.depth = depth;
    q.seed = static_cast<std::uint64_t>(s) + 1;
    out.push_back(random_game(q));
  }
  return out;
}

}  // namespace cce::testing
