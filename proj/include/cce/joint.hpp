#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "cce/efg.hpp"
#include "cce/strategy.hpp"

namespace cce {

/// Set of terminal indices stored as a bitset.
class TerminalSet {
 public:
  TerminalSet() = default;
  explicit TerminalSet(int n) : n_(n), words_((n + 63) / 64, 0) {}

  int size() const { return n_; }
  void insert(int z) { words_[z >> 6] |= std::uint64_t{1} << (z & 63); }
  bool contains(int z) const { return (words_[z >> 6] >> (z & 63)) & 1U; }
  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }

  int count() const {
    int c = 0;
    for (auto w : words_) c += std::popcount(w);
    return c;
  }

  void intersect(const TerminalSet& other) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= other.words_[k];
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      std::uint64_t w = words_[k];
      while (w) {
        f(static_cast<int>(k * 64 + std::countr_zero(w)));
        w &= w - 1;
      }
    }
  }

  bool operator==(const TerminalSet&) const = default;

 private:
  int n_ = 0;
  std::vector<std::uint64_t> words_;
};

inline TerminalSet terminal_set(const GameTree& tree, const NormalFormPlan& plan) {
  const auto& f = tree.forest(plan.player);
  const auto on = plan_sequences(tree, plan);
  TerminalSet s(tree.num_terminals());
  for (int z = 0; z < tree.num_terminals(); ++z) {
    if (on[f.terminal_seq[z]]) s.insert(z);
  }
  return s;
}

/// Interns one player's reduced plans as dense ids, caching Z(σ).
class PlanRegistry {
 public:
  PlanRegistry() = default;
  PlanRegistry(const GameTree& tree, PlayerId p) : tree_(&tree), player_(p) { check_owner(tree, p); }

  PlayerId player() const { return player_; }
  int size() const { return static_cast<int>(plans_.size()); }
  const NormalFormPlan& plan(int id) const { return plans_[id]; }
  const TerminalSet& terminals(int id) const { return sets_[id]; }

  int intern(const NormalFormPlan& plan) {
    if (plan.player != player_) throw InvalidArgument("plan owner does not match the registry");
    auto [it, inserted] = index_.try_emplace(plan, size());
    if (inserted) {
      check_plan(*tree_, plan);
      plans_.push_back(plan);
      sets_.push_back(terminal_set(*tree_, plan));
    }
    return it->second;
  }

  int find(const NormalFormPlan& plan) const {
    auto it = index_.find(plan);
    return it == index_.end() ? kNone : it->second;
  }

 private:
  const GameTree* tree_ = nullptr;
  PlayerId player_ = 0;
  std::vector<NormalFormPlan> plans_;
  std::vector<TerminalSet> sets_;
  std::unordered_map<NormalFormPlan, int, PlanHash> index_;
};

/// A mixed strategy over reduced plans (the dictionary built by the
/// reconstruction), in insertion order.
struct NormalFormStrategy {
  PlayerId player = 0;
  std::vector<NormalFormPlan> plans;
  std::vector<double> weights;

  int support() const { return static_cast<int>(plans.size()); }

  double total() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  static NormalFormStrategy pure(NormalFormPlan plan) {
    NormalFormStrategy x;
    x.player = plan.player;
    x.plans.push_back(std::move(plan));
    x.weights.push_back(1.0);
    return x;
  }
};

/// Per-terminal reach of a mixed strategy: Σ_σ x(σ) ρ^σ_z.
inline std::vector<double> mixed_plan_reach(const GameTree& tree, const NormalFormStrategy& x) {
  std::vector<double> r(tree.num_terminals(), 0.0);
  for (int k = 0; k < x.support(); ++k) {
    const auto& f = tree.forest(x.plans[k].player);
    const auto on = plan_sequences(tree, x.plans[k]);
    for (int z = 0; z < tree.num_terminals(); ++z) {
      if (on[f.terminal_seq[z]]) r[z] += x.weights[k];
    }
  }
  return r;
}

using JointKey = std::array<int, kMaxPlayers>;

struct JointKeyHash {
  std::size_t operator()(const JointKey& k) const {
    std::uint64_t h = 0;
    for (int v : k) h = splitmix64(h ^ static_cast<std::uint32_t>(v));
    return static_cast<std::size_t>(h);
  }
};

/// Sparse weighted map over joint reduced plans. Weights are accumulated raw;
/// the normalized view divides by the number of accumulations.
class JointDistribution {
 public:
  JointDistribution() = default;
  explicit JointDistribution(const GameTree& tree) : tree_(&tree) {
    for (PlayerId p = 0; p < tree.num_players(); ++p) registries_.emplace_back(tree, p);
  }

  const GameTree& tree() const { return *tree_; }
  int num_players() const { return static_cast<int>(registries_.size()); }
  const PlanRegistry& registry(PlayerId p) const { return registries_[p]; }
  PlanRegistry& registry(PlayerId p) { return registries_[p]; }

  int support() const { return static_cast<int>(keys_.size()); }
  const JointKey& key(int e) const { return keys_[e]; }
  double raw_weight(int e) const { return weights_[e]; }
  double weight(int e) const { return weights_[e] / normalizer_; }
  double mass() const { return mass_; }
  long normalizer() const { return normalizer_; }
  void set_normalizer(long n) { normalizer_ = n; }

  /// Adds raw weight to the joint plan given by per-player registry ids.
  void add(const JointKey& key, double w) {
    auto [it, inserted] = index_.try_emplace(key, support());
    if (inserted) {
      keys_.push_back(key);
      weights_.push_back(w);
    } else {
      weights_[it->second] += w;
    }
    mass_ += w;
  }

  void add(std::span<const NormalFormPlan> plans, double w) {
    if (static_cast<int>(plans.size()) != num_players()) throw InvalidArgument("joint plan arity mismatch");
    JointKey key;
    key.fill(kNone);
    for (PlayerId p = 0; p < num_players(); ++p) key[p] = registries_[p].intern(plans[p]);
    add(key, w);
  }

  /// Records one averaging step (one x^t folded in).
  void close_step() { ++normalizer_; }

  /// Rebuilds the map from saved entries, keeping the saved totals exactly.
  void restore(std::span<const JointKey> keys, std::span<const double> weights, double mass, long normalizer) {
    keys_.clear();
    weights_.clear();
    index_.clear();
    for (std::size_t e = 0; e < keys.size(); ++e) add(keys[e], weights[e]);
    mass_ = mass;
    normalizer_ = normalizer;
  }

  /// Normalized weight of a joint plan, 0 if absent.
  double probability(std::span<const NormalFormPlan> plans) const {
    JointKey key;
    key.fill(kNone);
    for (PlayerId p = 0; p < num_players(); ++p) {
      key[p] = registries_[p].find(plans[p]);
      if (key[p] == kNone) return 0.0;
    }
    auto it = index_.find(key);
    return it == index_.end() ? 0.0 : weight(it->second);
  }

  double total_probability() const {
    double s = 0.0;
    for (int e = 0; e < support(); ++e) s += weight(e);
    return s;
  }

  std::vector<NormalFormPlan> plans(int e) const {
    std::vector<NormalFormPlan> out;
    for (PlayerId p = 0; p < num_players(); ++p) out.push_back(registries_[p].plan(keys_[e][p]));
    return out;
  }

 private:
  const GameTree* tree_ = nullptr;
  std::vector<PlanRegistry> registries_;
  std::vector<JointKey> keys_;
  std::vector<double> weights_;
  std::unordered_map<JointKey, int, JointKeyHash> index_;
  double mass_ = 0.0;
  long normalizer_ = 0;
};

/// Folds the product ⊗_i x_i into the accumulator and closes the step.
inline void joint_accumulate(JointDistribution& acc, std::span<const NormalFormStrategy> x) {
  const int P = acc.num_players();
  if (static_cast<int>(x.size()) != P) throw InvalidArgument("joint_accumulate: player set mismatch");
  std::vector<std::vector<int>> ids(P);
  for (PlayerId p = 0; p < P; ++p) {
    if (x[p].player != p) throw InvalidArgument("joint_accumulate: strategies must be ordered by player");
    for (const auto& plan : x[p].plans) ids[p].push_back(acc.registry(p).intern(plan));
  }
  // Odometer over the per-player supports, last player fastest.
  std::vector<int> pos(P, 0);
  JointKey key;
  key.fill(kNone);
  for (;;) {
    double w = 1.0;
    for (PlayerId p = 0; p < P; ++p) {
      key[p] = ids[p][pos[p]];
      w *= x[p].weights[pos[p]];
    }
    acc.add(key, w);
    int p = P - 1;
    while (p >= 0 && ++pos[p] == x[p].support()) pos[p--] = 0;
    if (p < 0) break;
  }
  acc.close_step();
}

}  // namespace cce
