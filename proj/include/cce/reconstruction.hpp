#pragma once

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "cce/efg.hpp"
#include "cce/joint.hpp"
#include "cce/strategy.hpp"

namespace cce {

struct MaxMinResult {
  NormalFormPlan plan;
  double value = 0.0;  // min over Z(plan) of ω
};

/// Plan maximizing the minimum of ω over its reachable terminals, built
/// bottom-up over the player's sequences: a sequence is worth the minimum of
/// its own terminals and, for each infoset that follows it, the best action's
/// worth. Ties go to the lowest action index.
///
/// `scratch` must have one entry per sequence; `work` counts visited items.
inline MaxMinResult argmax_min_plan(const GameTree& tree, PlayerId p, std::span<const double> omega,
                                    std::vector<double>& scratch, long* work = nullptr) {
  const auto& f = tree.forest(p);
  auto& val = scratch;
  val.assign(f.num_sequences(), kInf);
  for (int z = 0; z < tree.num_terminals(); ++z) {
    double& v = val[f.terminal_seq[z]];
    v = std::min(v, omega[z]);
  }
  std::vector<int> best(f.num_infosets(), 0);
  for (int l = f.num_infosets() - 1; l >= 0; --l) {
    int b = 0;
    double bv = val[f.seq(l, 0)];
    for (int a = 1; a < f.num_actions[l]; ++a) {
      if (val[f.seq(l, a)] > bv) {
        bv = val[f.seq(l, a)];
        b = a;
      }
    }
    best[l] = b;
    double& parent = val[f.parent_seq[l]];
    parent = std::min(parent, bv);
  }
  if (work) *work += tree.num_terminals() + f.num_sequences();

  MaxMinResult out;
  out.plan.player = p;
  out.plan.choice.assign(f.num_infosets(), kAnyAction);
  std::vector<char> on(f.num_sequences(), 0);
  on[0] = 1;
  for (int l = 0; l < f.num_infosets(); ++l) {
    if (!on[f.parent_seq[l]]) continue;
    out.plan.choice[l] = best[l];
    on[f.seq(l, best[l])] = 1;
  }
  out.value = val[0];
  return out;
}

inline MaxMinResult argmax_min_plan(const GameTree& tree, PlayerId p, std::span<const double> omega) {
  check_owner(tree, p);
  if (static_cast<int>(omega.size()) != tree.num_terminals()) {
    throw InvalidArgument("argmax_min_plan: ω has the wrong length");
  }
  if (std::none_of(omega.begin(), omega.end(), [](double w) { return w > kZeroTol; })) {
    throw InvalidArgument("argmax_min_plan: ω has no positive entry");
  }
  std::vector<double> scratch;
  return argmax_min_plan(tree, p, omega, scratch);
}

struct ReconstructionStats {
  int passes = 0;
  long work = 0;
  double min_omega = 0.0;  // smallest ω entry seen before clamping
};

/// Normal-form strategy realization equivalent to π: repeatedly peel off the
/// max-min plan with its bottleneck weight until ω vanishes.
inline NormalFormStrategy nf_strategy_reconstruction(const GameTree& tree, const BehavioralStrategy& pi,
                                                     ReconstructionStats* stats = nullptr) {
  check_strategy(tree, pi);
  const auto& f = tree.forest(pi.player);
  const int Z = tree.num_terminals();
  std::vector<double> omega = behavioral_reach(tree, pi).terminal;
  std::vector<double> scratch;
  std::vector<char> on;
  ReconstructionStats st;

  NormalFormStrategy x;
  x.player = pi.player;
  auto positive = [&] {
    for (double w : omega) {
      if (w > 0.0) return true;
    }
    return false;
  };
  while (positive()) {
    auto [plan, w] = argmax_min_plan(tree, pi.player, omega, scratch, &st.work);
    if (w <= kZeroTol) break;
    if (++st.passes > Z) throw Error("reconstruction exceeded |Z| passes");
    on = plan_sequences(tree, plan);
    for (int z = 0; z < Z; ++z) {
      if (!on[f.terminal_seq[z]]) continue;
      double& o = omega[z];
      o -= w;
      st.min_omega = std::min(st.min_omega, o);
      if (o < kZeroTol) o = 0.0;
    }
    st.work += Z;
    x.plans.push_back(std::move(plan));
    x.weights.push_back(w);
  }
  if (stats) *stats = st;
  return x;
}

}  // namespace cce
