#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cce/common.hpp"
#include "cce/efg.hpp"
#include "cce/rng.hpp"

namespace cce {

/// Per-infoset action distributions of one player, indexed by local infoset.
struct BehavioralStrategy {
  PlayerId player = 0;
  std::vector<std::vector<double>> dist;

  static BehavioralStrategy uniform(const GameTree& tree, PlayerId p) {
    BehavioralStrategy s;
    s.player = p;
    const auto& f = tree.forest(p);
    s.dist.resize(f.num_infosets());
    for (int l = 0; l < f.num_infosets(); ++l) {
      s.dist[l].assign(f.num_actions[l], 1.0 / f.num_actions[l]);
    }
    return s;
  }

  bool operator==(const BehavioralStrategy&) const = default;
};

/// A reduced normal-form plan: one action at every infoset the plan itself
/// can reach, `kAnyAction` everywhere else. The reduced encoding is unique
/// for each class of payoff-equivalent full plans.
struct NormalFormPlan {
  PlayerId player = 0;
  std::vector<int> choice;

  bool operator==(const NormalFormPlan&) const = default;
};

struct PlanHash {
  std::size_t operator()(const NormalFormPlan& p) const {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(p.player));
    for (int c : p.choice) h = splitmix64(h ^ static_cast<std::uint64_t>(c + 2));
    return static_cast<std::size_t>(h);
  }
};

/// Per-terminal reach of one player's strategy (others play to reach z), plus
/// per-infoset reach.
struct RealizationVector {
  PlayerId player = 0;
  std::vector<double> terminal;
  std::vector<double> infoset;
};

inline void check_owner(const GameTree& tree, PlayerId p) {
  if (p < 0 || p >= tree.num_players()) {
    throw InvalidArgument("player " + std::to_string(p) + " is not a player of this game");
  }
}

inline void check_strategy(const GameTree& tree, const BehavioralStrategy& s) {
  check_owner(tree, s.player);
  const auto& f = tree.forest(s.player);
  if (static_cast<int>(s.dist.size()) != f.num_infosets()) {
    throw InvalidArgument("behavioral strategy does not match the player's infosets");
  }
  for (int l = 0; l < f.num_infosets(); ++l) {
    if (static_cast<int>(s.dist[l].size()) != f.num_actions[l]) {
      throw InvalidArgument("behavioral strategy has wrong action count at infoset " +
                            std::to_string(f.infosets[l]));
    }
    double sum = 0.0;
    for (double p : s.dist[l]) {
      if (!(p >= 0.0)) throw InvalidArgument("negative probability in behavioral strategy");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kEquivalenceTol) {
      throw InvalidArgument("behavioral strategy does not sum to one at infoset " +
                            std::to_string(f.infosets[l]));
    }
  }
}

inline void check_plan(const GameTree& tree, const NormalFormPlan& plan) {
  check_owner(tree, plan.player);
  if (static_cast<int>(plan.choice.size()) != tree.num_infosets(plan.player)) {
    throw InvalidArgument("plan does not match the player's infosets");
  }
}

/// Reach probability of every sequence of `s.player`, indexed by sequence id.
inline std::vector<double> sequence_reach(const GameTree& tree, const BehavioralStrategy& s) {
  const auto& f = tree.forest(s.player);
  std::vector<double> reach(f.num_sequences(), 0.0);
  reach[0] = 1.0;
  for (int l = 0; l < f.num_infosets(); ++l) {
    const double parent = reach[f.parent_seq[l]];
    for (int a = 0; a < f.num_actions[l]; ++a) reach[f.seq(l, a)] = parent * s.dist[l][a];
  }
  return reach;
}

inline RealizationVector behavioral_reach(const GameTree& tree, const BehavioralStrategy& s) {
  check_strategy(tree, s);
  const auto& f = tree.forest(s.player);
  const auto reach = sequence_reach(tree, s);
  RealizationVector out;
  out.player = s.player;
  out.terminal.resize(tree.num_terminals());
  for (int z = 0; z < tree.num_terminals(); ++z) out.terminal[z] = reach[f.terminal_seq[z]];
  out.infoset.resize(f.num_infosets());
  for (int l = 0; l < f.num_infosets(); ++l) out.infoset[l] = reach[f.parent_seq[l]];
  return out;
}

/// Marks the sequences a reduced plan selects (sequence 0 always).
inline std::vector<char> plan_sequences(const GameTree& tree, const NormalFormPlan& plan) {
  const auto& f = tree.forest(plan.player);
  std::vector<char> on(f.num_sequences(), 0);
  on[0] = 1;
  for (int l = 0; l < f.num_infosets(); ++l) {
    if (on[f.parent_seq[l]] && plan.choice[l] != kAnyAction) on[f.seq(l, plan.choice[l])] = 1;
  }
  return on;
}

inline bool plan_allows(const GameTree& tree, const NormalFormPlan& plan, int z) {
  const auto& f = tree.forest(plan.player);
  const int s = f.terminal_seq[z];
  return s == 0 || plan.choice[f.seq_infoset[s]] == f.seq_action[s];
}

inline RealizationVector plan_reach(const GameTree& tree, const NormalFormPlan& plan) {
  check_plan(tree, plan);
  const auto& f = tree.forest(plan.player);
  const auto on = plan_sequences(tree, plan);
  RealizationVector out;
  out.player = plan.player;
  out.terminal.resize(tree.num_terminals());
  for (int z = 0; z < tree.num_terminals(); ++z) out.terminal[z] = on[f.terminal_seq[z]] ? 1.0 : 0.0;
  out.infoset.resize(f.num_infosets());
  for (int l = 0; l < f.num_infosets(); ++l) out.infoset[l] = on[f.parent_seq[l]] ? 1.0 : 0.0;
  return out;
}

/// Z(plan): terminals the plan can reach.
inline std::vector<int> plan_terminals(const GameTree& tree, const NormalFormPlan& plan) {
  check_plan(tree, plan);
  const auto& f = tree.forest(plan.player);
  const auto on = plan_sequences(tree, plan);
  std::vector<int> out;
  for (int z = 0; z < tree.num_terminals(); ++z) {
    if (on[f.terminal_seq[z]]) out.push_back(z);
  }
  return out;
}

/// Z(plan, I, a): terminals below action `action` at local infoset `local`
/// that stay reachable when the plan is followed afterwards.
inline std::vector<int> plan_terminals_after(const GameTree& tree, const NormalFormPlan& plan,
                                             int local, int action) {
  check_plan(tree, plan);
  const auto& f = tree.forest(plan.player);
  std::vector<char> on(f.num_sequences(), 0);
  on[f.seq(local, action)] = 1;
  for (int l = local + 1; l < f.num_infosets(); ++l) {
    if (on[f.parent_seq[l]] && plan.choice[l] != kAnyAction) on[f.seq(l, plan.choice[l])] = 1;
  }
  std::vector<int> out;
  for (int z = 0; z < tree.num_terminals(); ++z) {
    if (on[f.terminal_seq[z]]) out.push_back(z);
  }
  return out;
}

/// Reduces a full assignment (one action per infoset) to its canonical plan.
inline NormalFormPlan canonicalize(const GameTree& tree, PlayerId p, std::span<const int> full) {
  check_owner(tree, p);
  const auto& f = tree.forest(p);
  if (static_cast<int>(full.size()) != f.num_infosets()) {
    throw InvalidArgument("assignment does not cover the player's infosets");
  }
  NormalFormPlan plan{p, std::vector<int>(f.num_infosets(), kAnyAction)};
  std::vector<char> on(f.num_sequences(), 0);
  on[0] = 1;
  for (int l = 0; l < f.num_infosets(); ++l) {
    if (!on[f.parent_seq[l]]) continue;
    if (full[l] < 0 || full[l] >= f.num_actions[l]) throw InvalidArgument("action out of range");
    plan.choice[l] = full[l];
    on[f.seq(l, full[l])] = 1;
  }
  return plan;
}

/// The pure behavioral strategy playing `plan`; unreachable infosets play
/// their first action.
inline BehavioralStrategy deterministic_strategy(const GameTree& tree, const NormalFormPlan& plan) {
  check_plan(tree, plan);
  const auto& f = tree.forest(plan.player);
  BehavioralStrategy s;
  s.player = plan.player;
  s.dist.resize(f.num_infosets());
  for (int l = 0; l < f.num_infosets(); ++l) {
    s.dist[l].assign(f.num_actions[l], 0.0);
    s.dist[l][plan.choice[l] == kAnyAction ? 0 : plan.choice[l]] = 1.0;
  }
  return s;
}

/// Number of reduced plans of player p (as a double; may be astronomically
/// large).
inline double count_plans(const GameTree& tree, PlayerId p) {
  check_owner(tree, p);
  const auto& f = tree.forest(p);
  std::vector<double> count(f.num_sequences(), 1.0);
  for (int l = f.num_infosets() - 1; l >= 0; --l) {
    double sum = 0.0;
    for (int a = 0; a < f.num_actions[l]; ++a) sum += count[f.seq(l, a)];
    count[f.parent_seq[l]] *= sum;
  }
  return count[0];
}

class PlanLimitExceeded : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t kDefaultPlanCap = 1'000'000;

/// All reduced plans of player p, each exactly once, in lexicographic order of
/// choices over local infoset indices.
inline std::vector<NormalFormPlan> enumerate_plans(const GameTree& tree, PlayerId p,
                                                   std::size_t cap = kDefaultPlanCap) {
  const double n = count_plans(tree, p);
  if (n > static_cast<double>(cap)) {
    throw PlanLimitExceeded("player " + std::to_string(p) + " has " + std::to_string(n) +
                            " reduced plans, above the cap of " + std::to_string(cap));
  }
  const auto& f = tree.forest(p);
  std::vector<NormalFormPlan> out;
  out.reserve(static_cast<std::size_t>(n));
  NormalFormPlan current{p, std::vector<int>(f.num_infosets(), kAnyAction)};
  std::vector<char> on(f.num_sequences(), 0);
  on[0] = 1;

  // Infosets are decided in index order; an infoset is free iff its parent
  // sequence is selected, which is known once all smaller indices are fixed.
  std::function<void(int)> recurse = [&](int l) {
    if (l == f.num_infosets()) {
      out.push_back(current);
      return;
    }
    if (!on[f.parent_seq[l]]) {
      current.choice[l] = kAnyAction;
      recurse(l + 1);
      return;
    }
    for (int a = 0; a < f.num_actions[l]; ++a) {
      current.choice[l] = a;
      on[f.seq(l, a)] = 1;
      recurse(l + 1);
      on[f.seq(l, a)] = 0;
    }
    current.choice[l] = kAnyAction;
  };
  recurse(0);
  return out;
}

/// Random behavioral strategy: weights uniform in [0,1), each action zeroed
/// with probability `sparsity` (at least one action always survives).
inline BehavioralStrategy random_strategy(const GameTree& tree, PlayerId p, Rng& rng,
                                          double sparsity = 0.0) {
  check_owner(tree, p);
  const auto& f = tree.forest(p);
  BehavioralStrategy s;
  s.player = p;
  s.dist.resize(f.num_infosets());
  for (int l = 0; l < f.num_infosets(); ++l) {
    auto& d = s.dist[l];
    d.resize(f.num_actions[l]);
    double sum = 0.0;
    for (auto& w : d) {
      w = rng.uniform() < sparsity ? 0.0 : rng.uniform();
      sum += w;
    }
    if (sum <= 0.0) {
      d.assign(d.size(), 0.0);
      d[rng.below(d.size())] = 1.0;
      continue;
    }
    for (auto& w : d) w /= sum;
  }
  return s;
}

}  // namespace cce
