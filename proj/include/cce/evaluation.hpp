#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "json.hpp"

#include "cce/efg.hpp"
#include "cce/joint.hpp"
#include "cce/strategy.hpp"

namespace cce {

/// Δ: the largest spread of any single player's payoffs.
inline double payoff_range(const GameTree& tree) {
  if (tree.num_terminals() == 0) throw InvalidArgument("payoff_range: game has no terminals");
  double delta = 0.0;
  for (PlayerId p = 0; p < tree.num_players(); ++p) {
    double lo = kInf, hi = -kInf;
    for (int z = 0; z < tree.num_terminals(); ++z) {
      lo = std::min(lo, tree.payoff(z, p));
      hi = std::max(hi, tree.payoff(z, p));
    }
    delta = std::max(delta, hi - lo);
  }
  return delta;
}

struct BestResponse {
  double value = 0.0;
  NormalFormPlan plan;
};

/// Best reduced plan of player p against per-terminal opponent-and-chance
/// reach `opp`: value = max_σ Σ_z ρ^σ_z opp_z u_p(z).
inline BestResponse best_response(const GameTree& tree, PlayerId p, std::span<const double> opp) {
  check_owner(tree, p);
  if (static_cast<int>(opp.size()) != tree.num_terminals()) {
    throw InvalidArgument("best_response: reach vector has the wrong length");
  }
  const auto& f = tree.forest(p);
  std::vector<double> val(f.num_sequences(), 0.0);
  for (int z = 0; z < tree.num_terminals(); ++z) {
    if (opp[z] != 0.0) val[f.terminal_seq[z]] += opp[z] * tree.payoff(z, p);
  }
  std::vector<int> best(f.num_infosets(), 0);
  for (int l = f.num_infosets() - 1; l >= 0; --l) {
    int b = 0;
    for (int a = 1; a < f.num_actions[l]; ++a) {
      if (val[f.seq(l, a)] > val[f.seq(l, b)]) b = a;
    }
    best[l] = b;
    val[f.parent_seq[l]] += val[f.seq(l, b)];
  }
  BestResponse out;
  out.value = val[0];
  out.plan.player = p;
  out.plan.choice.assign(f.num_infosets(), kAnyAction);
  std::vector<char> on(f.num_sequences(), 0);
  on[0] = 1;
  for (int l = 0; l < f.num_infosets(); ++l) {
    if (!on[f.parent_seq[l]]) continue;
    out.plan.choice[l] = best[l];
    on[f.seq(l, best[l])] = 1;
  }
  return out;
}

/// Per-terminal probability that chance and every player other than p allow
/// z, under the normalized joint distribution.
inline std::vector<double> opponent_reach(const GameTree& tree, PlayerId p, const JointDistribution& x) {
  check_owner(tree, p);
  std::vector<double> r(tree.num_terminals(), 0.0);
  TerminalSet acc(tree.num_terminals());
  for (int e = 0; e < x.support(); ++e) {
    bool first = true;
    for (PlayerId q = 0; q < x.num_players(); ++q) {
      if (q == p) continue;
      const auto& s = x.registry(q).terminals(x.key(e)[q]);
      if (first) {
        acc = s;
        first = false;
      } else {
        acc.intersect(s);
      }
    }
    const double w = x.weight(e);
    if (first) {
      for (double& v : r) v += w;
    } else {
      acc.for_each([&](int z) { r[z] += w; });
    }
  }
  for (int z = 0; z < tree.num_terminals(); ++z) r[z] *= tree.chance_reach(z);
  return r;
}

struct GapReport {
  std::vector<double> best_response;  // deviation value per player
  std::vector<double> on_path;        // expected utility per player
  std::vector<double> epsilon_i;
  double epsilon = 0.0;
  double delta = 0.0;
  double alpha = 0.0;
  bool degenerate = false;  // Δ = 0 with ε > 0
  double social_welfare = 0.0;
};

inline GapReport make_report(const GameTree& tree, std::vector<double> br, std::vector<double> on_path) {
  GapReport g;
  g.best_response = std::move(br);
  g.on_path = std::move(on_path);
  g.delta = payoff_range(tree);
  g.epsilon = -kInf;
  for (std::size_t p = 0; p < g.on_path.size(); ++p) {
    g.epsilon_i.push_back(g.best_response[p] - g.on_path[p]);
    g.epsilon = std::max(g.epsilon, g.epsilon_i.back());
    g.social_welfare += g.on_path[p];
  }
  if (g.delta > 0.0) {
    g.alpha = g.epsilon / g.delta;
  } else {
    g.alpha = 0.0;
    g.degenerate = g.epsilon > kEquivalenceTol;
  }
  return g;
}

/// Expected utility of every player under the normalized joint distribution.
inline std::vector<double> expected_utility(const GameTree& tree, const JointDistribution& x) {
  std::vector<double> u(tree.num_players(), 0.0);
  TerminalSet acc(tree.num_terminals());
  for (int e = 0; e < x.support(); ++e) {
    acc = x.registry(0).terminals(x.key(e)[0]);
    for (PlayerId q = 1; q < x.num_players(); ++q) acc.intersect(x.registry(q).terminals(x.key(e)[q]));
    const double w = x.weight(e);
    acc.for_each([&](int z) {
      const double c = w * tree.chance_reach(z);
      for (PlayerId p = 0; p < tree.num_players(); ++p) u[p] += c * tree.payoff(z, p);
    });
  }
  return u;
}

inline double social_welfare(const GameTree& tree, const JointDistribution& x) {
  double s = 0.0;
  for (double v : expected_utility(tree, x)) s += v;
  return s;
}

/// ε-CCE gap of a normalized joint distribution.
inline GapReport cce_gap(const GameTree& tree, const JointDistribution& x) {
  if (x.num_players() != tree.num_players()) throw InvalidArgument("cce_gap: player count mismatch");
  if (x.normalizer() < 1) throw InvalidArgument("cce_gap: empty joint distribution");
  std::vector<double> br;
  for (PlayerId p = 0; p < tree.num_players(); ++p) {
    br.push_back(best_response(tree, p, opponent_reach(tree, p, x)).value);
  }
  return make_report(tree, std::move(br), expected_utility(tree, x));
}

/// Gap of the product of behavioral strategies, without materializing it.
inline GapReport product_gap(const GameTree& tree, std::span<const BehavioralStrategy> profile) {
  const int P = tree.num_players();
  if (static_cast<int>(profile.size()) != P) throw InvalidArgument("product_gap: player count mismatch");
  std::vector<std::vector<double>> reach;
  for (PlayerId p = 0; p < P; ++p) {
    if (profile[p].player != p) throw InvalidArgument("product_gap: strategies must be ordered by player");
    reach.push_back(behavioral_reach(tree, profile[p]).terminal);
  }
  std::vector<double> br, on_path(P, 0.0);
  std::vector<double> opp(tree.num_terminals());
  for (PlayerId p = 0; p < P; ++p) {
    for (int z = 0; z < tree.num_terminals(); ++z) {
      double w = tree.chance_reach(z);
      for (PlayerId q = 0; q < P; ++q) {
        if (q != p) w *= reach[q][z];
      }
      opp[z] = w;
      on_path[p] += w * reach[p][z] * tree.payoff(z, p);
    }
    br.push_back(best_response(tree, p, opp).value);
  }
  return make_report(tree, std::move(br), std::move(on_path));
}

/// Upper bound on the welfare of any joint plan: each node takes the best
/// child for the sum of payoffs, chance nodes take expectations. This relaxes
/// the information constraints, so it never falls below the best joint plan.
inline double sw_upper_bound(const GameTree& tree) {
  std::vector<double> v(tree.num_nodes(), 0.0);
  // Children have larger ids than parents (depth-first numbering).
  for (NodeId h = tree.num_nodes() - 1; h >= 0; --h) {
    const Node& n = tree.node(h);
    if (n.kind == NodeKind::kTerminal) {
      double s = 0.0;
      for (double u : tree.payoffs(n.terminal)) s += u;
      v[h] = s;
    } else if (n.kind == NodeKind::kChance) {
      double s = 0.0;
      for (int a = 0; a < n.num_actions(); ++a) s += n.chance_probs[a] * v[n.children[a]];
      v[h] = s;
    } else {
      double m = -kInf;
      for (NodeId c : n.children) m = std::max(m, v[c]);
      v[h] = m;
    }
  }
  return v[tree.root()];
}

/// SW / upper bound; NaN when the bound is not positive (e.g. zero-sum games).
inline double sw_ratio(double sw, double upper) {
  return upper > 0.0 ? sw / upper : std::numeric_limits<double>::quiet_NaN();
}

/// Expected payoffs of a joint plan by walking the tree (no cached sets).
inline std::vector<double> joint_plan_value(const GameTree& tree, std::span<const NormalFormPlan> plans) {
  std::vector<double> u(tree.num_players(), 0.0);
  std::function<void(NodeId, double)> walk = [&](NodeId h, double prob) {
    const Node& n = tree.node(h);
    switch (n.kind) {
      case NodeKind::kTerminal:
        for (PlayerId p = 0; p < tree.num_players(); ++p) u[p] += prob * tree.payoff(n.terminal, p);
        return;
      case NodeKind::kChance:
        for (int a = 0; a < n.num_actions(); ++a) {
          if (n.chance_probs[a] > 0.0) walk(n.children[a], prob * n.chance_probs[a]);
        }
        return;
      case NodeKind::kDecision: {
        const int c = plans[n.player].choice[tree.infoset(n.infoset).local_index];
        if (c == kAnyAction) throw Error("joint_plan_value: plan leaves a reached infoset open");
        walk(n.children[c], prob);
        return;
      }
    }
  };
  walk(tree.root(), 1.0);
  return u;
}

/// Reference ε-CCE gap: every deviation plan is enumerated and every value
/// is obtained by an explicit tree walk.
inline GapReport brute_force_cce_gap(const GameTree& tree, const JointDistribution& x,
                                     std::size_t cap = kDefaultPlanCap) {
  const int P = tree.num_players();
  std::vector<std::vector<NormalFormPlan>> support;
  std::vector<double> weight;
  for (int e = 0; e < x.support(); ++e) {
    support.push_back(x.plans(e));
    weight.push_back(x.weight(e));
  }
  std::vector<double> on_path(P, 0.0);
  for (std::size_t e = 0; e < support.size(); ++e) {
    const auto u = joint_plan_value(tree, support[e]);
    for (PlayerId p = 0; p < P; ++p) on_path[p] += weight[e] * u[p];
  }
  std::vector<double> br(P, -kInf);
  for (PlayerId p = 0; p < P; ++p) {
    for (const auto& dev : enumerate_plans(tree, p, cap)) {
      double v = 0.0;
      for (std::size_t e = 0; e < support.size(); ++e) {
        auto profile = support[e];
        profile[p] = dev;
        v += weight[e] * joint_plan_value(tree, profile)[p];
      }
      br[p] = std::max(br[p], v);
    }
  }
  return make_report(tree, std::move(br), std::move(on_path));
}

/// Brute-force best-response value: max over enumerated plans.
inline double brute_force_best_response(const GameTree& tree, PlayerId p, std::span<const double> opp,
                                        std::size_t cap = kDefaultPlanCap) {
  double best = -kInf;
  for (const auto& plan : enumerate_plans(tree, p, cap)) {
    double v = 0.0;
    for (int z : plan_terminals(tree, plan)) v += opp[z] * tree.payoff(z, p);
    best = std::max(best, v);
  }
  return best;
}

inline bool realization_equivalence_check(const GameTree& tree, const BehavioralStrategy& pi,
                                          const NormalFormStrategy& x, double tol = kEquivalenceTol) {
  if (pi.player != x.player) throw InvalidArgument("realization_equivalence_check: owner mismatch");
  const auto a = behavioral_reach(tree, pi).terminal;
  const auto b = mixed_plan_reach(tree, x);
  for (int z = 0; z < tree.num_terminals(); ++z) {
    if (std::abs(a[z] - b[z]) > tol) return false;
  }
  return true;
}

/// Cumulative external regret of every player over a played sequence of
/// profiles, each given as per-player terminal reach vectors.
class ExternalRegretTracker {
 public:
  ExternalRegretTracker() = default;
  explicit ExternalRegretTracker(const GameTree& tree)
      : tree_(&tree),
        opp_(tree.num_players(), std::vector<double>(tree.num_terminals(), 0.0)),
        on_path_(tree.num_players(), 0.0) {}

  long steps() const { return steps_; }
  const std::vector<double>& cumulative_opponent_reach(PlayerId p) const { return opp_[p]; }
  double cumulative_on_path(PlayerId p) const { return on_path_[p]; }

  void observe(std::span<const std::vector<double>> reach) {
    const GameTree& tree = *tree_;
    const int P = tree.num_players();
    for (int z = 0; z < tree.num_terminals(); ++z) {
      const double c = tree.chance_reach(z);
      double all = c;
      for (PlayerId q = 0; q < P; ++q) all *= reach[q][z];
      for (PlayerId p = 0; p < P; ++p) {
        double w = c;
        for (PlayerId q = 0; q < P; ++q) {
          if (q != p) w *= reach[q][z];
        }
        opp_[p][z] += w;
        on_path_[p] += all * tree.payoff(z, p);
      }
    }
    ++steps_;
  }

  /// R_p: best fixed plan in hindsight minus realized cumulative utility.
  double regret(PlayerId p) const { return best_response(*tree_, p, opp_[p]).value - on_path_[p]; }

  /// max_p R_p / steps.
  double average_regret_bound() const {
    if (steps_ == 0) return kInf;
    double m = -kInf;
    for (PlayerId p = 0; p < tree_->num_players(); ++p) m = std::max(m, regret(p));
    return m / static_cast<double>(steps_);
  }

  nlohmann::json to_json() const { return {{"steps", steps_}, {"opp", opp_}, {"on_path", on_path_}}; }

  void from_json(const nlohmann::json& j) {
    steps_ = j.at("steps").get<long>();
    opp_ = j.at("opp").get<std::vector<std::vector<double>>>();
    on_path_ = j.at("on_path").get<std::vector<double>>();
  }

 private:
  const GameTree* tree_ = nullptr;
  std::vector<std::vector<double>> opp_;
  std::vector<double> on_path_;
  long steps_ = 0;
};

inline nlohmann::ordered_json to_json(const GapReport& g, double sw_upper) {
  nlohmann::ordered_json j;
  j["best_response"] = g.best_response;
  j["on_path"] = g.on_path;
  j["epsilon_i"] = g.epsilon_i;
  j["epsilon"] = g.epsilon;
  j["delta"] = g.delta;
  j["alpha"] = g.alpha;
  j["degenerate"] = g.degenerate;
  j["sw"] = g.social_welfare;
  j["sw_upper_bound"] = sw_upper;
  const double r = sw_ratio(g.social_welfare, sw_upper);
  if (std::isnan(r)) {
    j["sw_ratio"] = nullptr;
  } else {
    j["sw_ratio"] = r;
  }
  return j;
}

}  // namespace cce
