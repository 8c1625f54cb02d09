#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "cce/efg.hpp"
#include "cce/rng.hpp"
#include "cce/strategy.hpp"

namespace cce {

/// Regret matching: play proportionally to positive cumulative regret, or
/// uniformly when no regret is positive.
inline void regret_matching(std::span<const double> regrets, std::span<double> out) {
  if (regrets.empty()) throw InvalidArgument("regret matching over an empty action set");
  double positive = 0.0;
  for (double r : regrets) positive += std::max(r, 0.0);
  if (positive > 0.0) {
    for (std::size_t a = 0; a < regrets.size(); ++a) out[a] = std::max(regrets[a], 0.0) / positive;
  } else {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(regrets.size()));
  }
}

inline std::vector<double> regret_matching(std::span<const double> regrets) {
  std::vector<double> out(regrets.size());
  regret_matching(regrets, out);
  return out;
}

/// A single regret-matching learner over a fixed action set, fed with full
/// utility vectors.
class RegretMatcher {
 public:
  explicit RegretMatcher(int num_actions) : regret_(num_actions, 0.0), strategy_(num_actions) {
    regret_matching(regret_, strategy_);
  }

  const std::vector<double>& strategy() const { return strategy_; }
  const std::vector<double>& cumulative_regret() const { return regret_; }
  int iterations() const { return iterations_; }

  void observe(std::span<const double> utility) {
    double expected = 0.0;
    for (std::size_t a = 0; a < regret_.size(); ++a) expected += strategy_[a] * utility[a];
    for (std::size_t a = 0; a < regret_.size(); ++a) regret_[a] += utility[a] - expected;
    ++iterations_;
    regret_matching(regret_, strategy_);
  }

  double max_regret() const { return *std::max_element(regret_.begin(), regret_.end()); }

 private:
  std::vector<double> regret_;
  std::vector<double> strategy_;
  int iterations_ = 0;
};

/// Cumulative regrets R_I(a) of one player, indexed [local infoset][action].
struct RegretTable {
  PlayerId player = 0;
  std::vector<std::vector<double>> regret;
  long iterations = 0;

  static RegretTable zeros(const GameTree& tree, PlayerId p) {
    RegretTable t;
    t.player = p;
    const auto& f = tree.forest(p);
    t.regret.resize(f.num_infosets());
    for (int l = 0; l < f.num_infosets(); ++l) t.regret[l].assign(f.num_actions[l], 0.0);
    return t;
  }

  /// Strategy for the next iteration.
  BehavioralStrategy strategy() const {
    BehavioralStrategy s;
    s.player = player;
    s.dist.resize(regret.size());
    for (std::size_t l = 0; l < regret.size(); ++l) {
      s.dist[l].resize(regret[l].size());
      regret_matching(regret[l], s.dist[l]);
    }
    return s;
  }

  void strategy_into(BehavioralStrategy& s) const {
    for (std::size_t l = 0; l < regret.size(); ++l) regret_matching(regret[l], s.dist[l]);
  }

  /// max_a R_I(a) over all infosets and actions.
  double max_regret() const {
    double m = -kInf;
    for (const auto& r : regret) {
      for (double x : r) m = std::max(m, x);
    }
    return m;
  }

  /// Sum over infosets of max(max_a R_I(a), 0).
  double positive_regret_sum() const {
    double s = 0.0;
    for (const auto& r : regret) s += std::max(*std::max_element(r.begin(), r.end()), 0.0);
    return s;
  }

  bool operator==(const RegretTable&) const = default;
};

/// Reach-weighted running sums of the played behavioral strategies. The
/// weighting is uniform over iterations.
struct AverageState {
  PlayerId player = 0;
  std::vector<std::vector<double>> sum;
  long updates = 0;

  static AverageState zeros(const GameTree& tree, PlayerId p) {
    AverageState a;
    a.player = p;
    const auto& f = tree.forest(p);
    a.sum.resize(f.num_infosets());
    for (int l = 0; l < f.num_infosets(); ++l) a.sum[l].assign(f.num_actions[l], 0.0);
    return a;
  }

  void add(const GameTree& tree, const BehavioralStrategy& s) {
    const auto& f = tree.forest(player);
    const auto reach = sequence_reach(tree, s);
    for (int l = 0; l < f.num_infosets(); ++l) {
      const double w = reach[f.parent_seq[l]];
      for (int a = 0; a < f.num_actions[l]; ++a) sum[l][a] += w * s.dist[l][a];
    }
    ++updates;
  }

  bool operator==(const AverageState&) const = default;
};

/// Normalized average strategy; infosets never reached play uniformly.
inline BehavioralStrategy average_behavioral(const AverageState& state) {
  if (state.updates < 1) throw InvalidArgument("average strategy requested before any update");
  BehavioralStrategy s;
  s.player = state.player;
  s.dist.resize(state.sum.size());
  for (std::size_t l = 0; l < state.sum.size(); ++l) {
    const auto& w = state.sum[l];
    double total = 0.0;
    for (double x : w) total += x;
    s.dist[l].resize(w.size());
    for (std::size_t a = 0; a < w.size(); ++a) {
      s.dist[l][a] = total > 0.0 ? w[a] / total : 1.0 / static_cast<double>(w.size());
    }
  }
  return s;
}

/// State of a vanilla CFR run: all players update simultaneously from the
/// same iteration-t strategies; chance is expanded exactly.
struct CfrState {
  std::vector<RegretTable> regrets;
  std::vector<AverageState> averages;
  std::vector<BehavioralStrategy> current;  // strategies to be played next
  long iteration = 0;                       // completed iterations

  static CfrState init(const GameTree& tree) {
    CfrState s;
    for (PlayerId p = 0; p < tree.num_players(); ++p) {
      s.regrets.push_back(RegretTable::zeros(tree, p));
      s.averages.push_back(AverageState::zeros(tree, p));
      s.current.push_back(s.regrets.back().strategy());
    }
    return s;
  }

  bool operator==(const CfrState&) const = default;
};

namespace cfr_detail {

using Values = std::array<double, kMaxPlayers>;

struct Traversal {
  const GameTree& tree;
  const std::vector<BehavioralStrategy>& strategy;
  std::vector<RegretTable>& regrets;
  int num_players;

  // reach[p] for players, reach[num_players] for chance.
  Values run(NodeId h, const std::array<double, kMaxPlayers + 1>& reach) {
    const Node& n = tree.node(h);
    Values v{};
    if (n.kind == NodeKind::kTerminal) {
      const auto u = tree.payoffs(n.terminal);
      std::copy(u.begin(), u.end(), v.begin());
      return v;
    }
    if (n.kind == NodeKind::kChance) {
      for (int a = 0; a < n.num_actions(); ++a) {
        auto child_reach = reach;
        child_reach[num_players] *= n.chance_probs[a];
        const Values c = run(n.children[a], child_reach);
        for (int p = 0; p < num_players; ++p) v[p] += n.chance_probs[a] * c[p];
      }
      return v;
    }
    const PlayerId p = n.player;
    const int l = tree.infoset(n.infoset).local_index;
    const auto& pi = strategy[p].dist[l];
    std::array<double, 64> small;
    std::vector<double> large;
    double* action_value = small.data();
    if (n.num_actions() > static_cast<int>(small.size())) {
      large.resize(n.num_actions());
      action_value = large.data();
    }
    for (int a = 0; a < n.num_actions(); ++a) {
      auto child_reach = reach;
      child_reach[p] *= pi[a];
      const Values c = run(n.children[a], child_reach);
      action_value[a] = c[p];
      for (int q = 0; q < num_players; ++q) v[q] += pi[a] * c[q];
    }
    double counterfactual = reach[num_players];
    for (int q = 0; q < num_players; ++q) {
      if (q != p) counterfactual *= reach[q];
    }
    if (counterfactual != 0.0) {
      auto& r = regrets[p].regret[l];
      for (int a = 0; a < n.num_actions(); ++a) r[a] += counterfactual * (action_value[a] - v[p]);
    }
    return v;
  }
};

}  // namespace cfr_detail

/// Expected payoff of every player under a profile of behavioral strategies.
inline std::vector<double> expected_payoffs(const GameTree& tree,
                                            std::span<const BehavioralStrategy> profile) {
  std::vector<std::vector<double>> reach;
  for (const auto& s : profile) reach.push_back(behavioral_reach(tree, s).terminal);
  std::vector<double> u(tree.num_players(), 0.0);
  for (int z = 0; z < tree.num_terminals(); ++z) {
    double w = tree.chance_reach(z);
    for (const auto& r : reach) w *= r[z];
    if (w == 0.0) continue;
    for (PlayerId p = 0; p < tree.num_players(); ++p) u[p] += w * tree.payoff(z, p);
  }
  return u;
}

/// One vanilla CFR iteration: plays `state.current`, adds counterfactual
/// regrets, folds the played strategies into the averages and sets the next
/// strategies by regret matching. Returns the expected payoffs of the played
/// profile.
inline std::vector<double> cfr_iteration(const GameTree& tree, CfrState& state) {
  const int P = tree.num_players();
  cfr_detail::Traversal t{tree, state.current, state.regrets, P};
  std::array<double, kMaxPlayers + 1> reach;
  reach.fill(1.0);
  const auto v = t.run(tree.root(), reach);
  for (PlayerId p = 0; p < P; ++p) {
    state.averages[p].add(tree, state.current[p]);
    ++state.regrets[p].iterations;
  }
  for (PlayerId p = 0; p < P; ++p) state.regrets[p].strategy_into(state.current[p]);
  ++state.iteration;
  return {v.begin(), v.begin() + P};
}

/// Samples one action at every infoset of the player (a full plan).
inline std::vector<int> sample_assignment(const BehavioralStrategy& s, Rng& rng) {
  std::vector<int> full(s.dist.size());
  for (std::size_t l = 0; l < s.dist.size(); ++l) {
    const auto& d = s.dist[l];
    const double x = rng.uniform();
    double acc = 0.0;
    int chosen = static_cast<int>(d.size()) - 1;
    for (std::size_t a = 0; a < d.size(); ++a) {
      acc += d[a];
      if (x < acc) {
        chosen = static_cast<int>(a);
        break;
      }
    }
    // Never pick a zero-probability action through rounding at the tail.
    while (chosen > 0 && d[chosen] == 0.0) --chosen;
    full[l] = chosen;
  }
  return full;
}

/// Recommend step: a reduced plan drawn by sampling each infoset from s.
inline NormalFormPlan sampled_plan(const GameTree& tree, const BehavioralStrategy& s, Rng& rng) {
  return canonicalize(tree, s.player, sample_assignment(s, rng));
}

/// Laminar-regret update for one player given her sampled full plan and the
/// per-terminal weights of the opponents' sampled plans and chance
/// (`weight[z]` = chance reach times 1 if all opponents' plans allow z).
///
/// For every infoset I and action a the parameterized utility is the
/// immediate utility of (I,a) plus the values, under the sampled plan, of the
/// player's infosets that follow (I,a); R_I(a) grows by its difference to the
/// utility of the sampled action. Returns the parameterized utilities, indexed
/// by sequence id, for inspection.
inline std::vector<double> cfr_s_update(const GameTree& tree, RegretTable& table,
                                        std::span<const int> full_plan,
                                        std::span<const double> weight) {
  const PlayerId p = table.player;
  const auto& f = tree.forest(p);
  if (static_cast<int>(full_plan.size()) != f.num_infosets() ||
      static_cast<int>(weight.size()) != tree.num_terminals()) {
    throw InvalidArgument("cfr_s_update: plan or weights do not match the tree");
  }
  std::vector<double> value(f.num_sequences(), 0.0);
  for (int z = 0; z < tree.num_terminals(); ++z) {
    if (weight[z] != 0.0) value[f.terminal_seq[z]] += weight[z] * tree.payoff(z, p);
  }
  // Reverse index order visits children before parents; by the time infoset l
  // is reached, value[seq(l,a)] holds the parameterized utility of (l,a).
  for (int l = f.num_infosets() - 1; l >= 0; --l) {
    const int chosen = full_plan[l];
    const double played = value[f.seq(l, chosen)];
    auto& r = table.regret[l];
    for (int a = 0; a < f.num_actions[l]; ++a) r[a] += value[f.seq(l, a)] - played;
    value[f.parent_seq[l]] += played;
  }
  ++table.iterations;
  return value;
}

}  // namespace cce
