#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cce/common.hpp"

namespace cce {

enum class NodeKind { kChance, kDecision, kTerminal };

struct Node {
  NodeKind kind = NodeKind::kTerminal;
  PlayerId player = kChance;
  NodeId parent = kNone;
  int parent_action = kNone;
  std::vector<NodeId> children;
  std::vector<double> chance_probs;
  InfosetId infoset = kNone;
  int terminal = kNone;

  int num_actions() const { return static_cast<int>(children.size()); }
  bool operator==(const Node&) const = default;
};

struct Infoset {
  PlayerId player = 0;
  int local_index = 0;
  std::string name;
  std::vector<std::string> actions;
  std::vector<NodeId> nodes;

  int num_actions() const { return static_cast<int>(actions.size()); }
  bool operator==(const Infoset&) const = default;
};

/// One player's view of the tree: her infosets arranged as a forest of
/// sequences.
///
/// Sequence 0 is the empty sequence. The pair (local infoset l, action a) is
/// sequence `first_seq[l] + a`. Local infosets are numbered by first
/// appearance in depth-first order, so a child infoset always has a larger
/// index than its parent and reverse index order is a valid bottom-up order.
struct SequenceForest {
  std::vector<InfosetId> infosets;
  std::vector<int> first_seq;
  std::vector<int> num_actions;
  std::vector<int> parent_seq;
  std::vector<int> seq_infoset;
  std::vector<int> seq_action;
  std::vector<int> terminal_seq;
  std::vector<std::vector<int>> child_infosets;
  std::vector<std::vector<int>> child_terminals;

  int num_infosets() const { return static_cast<int>(infosets.size()); }
  int num_sequences() const { return static_cast<int>(seq_infoset.size()); }
  int seq(int local, int action) const { return first_seq[local] + action; }
};

struct Diagnostic {
  std::string code;
  std::string message;
};

class GameBuilder;

/// Immutable extensive-form game with chance, imperfect information and
/// (after validation) perfect recall.
///
/// Node ids are dense and assigned in depth-first preorder with children
/// visited in action order; the root is node 0. Terminals, infosets and each
/// player's local infoset indices follow the same order.
class GameTree {
 public:
  GameTree() = default;

  int num_players() const { return num_players_; }
  NodeId root() const { return 0; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const Node& node(NodeId id) const { return nodes_[id]; }
  std::span<const Node> nodes() const { return nodes_; }

  int num_infosets() const { return static_cast<int>(infosets_.size()); }
  const Infoset& infoset(InfosetId id) const { return infosets_[id]; }
  std::span<const Infoset> infosets() const { return infosets_; }

  int num_terminals() const { return static_cast<int>(terminal_nodes_.size()); }
  NodeId terminal_node(int z) const { return terminal_nodes_[z]; }
  std::span<const double> payoffs(int z) const {
    return {payoffs_.data() + static_cast<std::size_t>(z) * num_players_,
            static_cast<std::size_t>(num_players_)};
  }
  double payoff(int z, PlayerId p) const {
    return payoffs_[static_cast<std::size_t>(z) * num_players_ + p];
  }
  /// Product of chance probabilities on the root-to-terminal path.
  double chance_reach(int z) const { return chance_reach_[z]; }

  const SequenceForest& forest(PlayerId p) const { return forests_[p]; }
  int num_infosets(PlayerId p) const { return forests_[p].num_infosets(); }

  /// Action indices from the root to `id`.
  std::vector<int> history(NodeId id) const {
    std::vector<int> path;
    for (NodeId h = id; nodes_[h].parent != kNone; h = nodes_[h].parent) {
      path.push_back(nodes_[h].parent_action);
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  /// Structural equality; chance probabilities and payoffs compare exactly.
  bool operator==(const GameTree& other) const {
    return num_players_ == other.num_players_ && nodes_ == other.nodes_ &&
           infosets_ == other.infosets_ && payoffs_ == other.payoffs_;
  }

 private:
  friend class GameBuilder;
  void finalize();

  int num_players_ = 0;
  std::vector<Node> nodes_;
  std::vector<Infoset> infosets_;
  std::vector<NodeId> terminal_nodes_;
  std::vector<double> payoffs_;
  std::vector<double> chance_reach_;
  std::vector<SequenceForest> forests_;
};

/// Lists every violated structural invariant. An empty result means the tree
/// is a well-formed perfect-recall game.
inline std::vector<Diagnostic> validate(const GameTree& tree) {
  std::vector<Diagnostic> out;
  auto report = [&](std::string code, std::string msg) {
    out.push_back({std::move(code), std::move(msg)});
  };
  const int num_players = tree.num_players();
  if (num_players < 1 || num_players > kMaxPlayers) {
    report("player-count", "number of players " + std::to_string(num_players) +
                               " outside [1, " + std::to_string(kMaxPlayers) + "]");
  }
  if (tree.num_nodes() == 0) {
    report("empty", "tree has no nodes");
    return out;
  }

  for (NodeId h = 0; h < tree.num_nodes(); ++h) {
    const Node& n = tree.node(h);
    const std::string where = "node " + std::to_string(h);
    switch (n.kind) {
      case NodeKind::kTerminal: {
        if (!n.children.empty()) report("terminal-children", where + " is terminal but has children");
        for (double u : tree.payoffs(n.terminal)) {
          if (!std::isfinite(u)) report("payoff-finite", where + " has a non-finite payoff");
        }
        break;
      }
      case NodeKind::kChance: {
        if (n.children.empty()) {
          report("no-actions", where + " has no actions");
          break;
        }
        if (n.chance_probs.size() != n.children.size()) {
          report("chance-probabilities", where + " has " + std::to_string(n.chance_probs.size()) +
                                             " probabilities for " +
                                             std::to_string(n.children.size()) + " outcomes");
          break;
        }
        double sum = 0.0;
        for (double p : n.chance_probs) {
          if (!(p >= 0.0) || !std::isfinite(p)) {
            report("chance-probabilities", where + " has a negative or non-finite probability");
          }
          sum += p;
        }
        if (std::abs(sum - 1.0) > kValidationTol) {
          std::ostringstream os;
          os.precision(17);
          os << where << " chance probabilities sum to " << sum;
          report("chance-probabilities", os.str());
        }
        break;
      }
      case NodeKind::kDecision: {
        if (n.player < 0 || n.player >= num_players) {
          report("player-range", where + " acting player out of range");
          break;
        }
        if (n.children.empty()) {
          report("no-actions", where + " has no actions");
          break;
        }
        const Infoset& info = tree.infoset(n.infoset);
        if (info.player != n.player) {
          report("infoset-player-mismatch",
                 where + " belongs to infoset " + std::to_string(n.infoset) + " of another player");
        }
        if (info.num_actions() != n.num_actions()) {
          report("infoset-action-mismatch",
                 where + " has " + std::to_string(n.num_actions()) + " actions but infoset " +
                     std::to_string(n.infoset) + " has " + std::to_string(info.num_actions()));
        }
        break;
      }
    }
  }

  // Perfect recall: all nodes of an infoset share the owner's last
  // (infoset, action) pair. Checked for every infoset, this implies the whole
  // own-history sequences coincide.
  if (num_players >= 1 && num_players <= kMaxPlayers) {
    std::vector<std::pair<InfosetId, int>> last_own(tree.num_infosets(), {kNone - 1, kNone});
    std::vector<std::pair<InfosetId, int>> stack_last(num_players, {kNone, kNone});
    struct Frame {
      NodeId node;
      int next_child;
      std::pair<InfosetId, int> saved;
    };
    std::vector<Frame> stack;
    stack.push_back({tree.root(), 0, {kNone, kNone}});
    std::vector<bool> reported(tree.num_infosets(), false);
    while (!stack.empty()) {
      Frame& f = stack.back();
      const Node& n = tree.node(f.node);
      if (f.next_child == 0 && n.kind == NodeKind::kDecision && n.player >= 0 &&
          n.player < num_players) {
        auto& seen = last_own[n.infoset];
        const auto here = stack_last[n.player];
        if (seen.first == kNone - 1) {
          seen = here;
        } else if (seen != here && !reported[n.infoset]) {
          reported[n.infoset] = true;
          report("perfect-recall", "infoset " + std::to_string(n.infoset) + " (" +
                                       tree.infoset(n.infoset).name + "): node " +
                                       std::to_string(f.node) +
                                       " has a different own history than earlier members");
        }
      }
      if (f.next_child >= n.num_actions()) {
        if (n.kind == NodeKind::kDecision && n.player >= 0 && n.player < num_players) {
          stack_last[n.player] = f.saved;
        }
        stack.pop_back();
        continue;
      }
      const int a = f.next_child++;
      const NodeId child = n.children[a];
      if (n.kind == NodeKind::kDecision && n.player >= 0 && n.player < num_players) {
        if (a == 0) f.saved = stack_last[n.player];
        stack_last[n.player] = {n.infoset, a};
      }
      stack.push_back({child, 0, {kNone, kNone}});
    }
  }
  return out;
}

class InvalidGame : public Error {
 public:
  explicit InvalidGame(std::vector<Diagnostic> diagnostics)
      : Error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  static std::string summarize(const std::vector<Diagnostic>& d) {
    std::string s = "invalid game tree:";
    for (std::size_t i = 0; i < d.size() && i < 5; ++i) s += " [" + d[i].code + "] " + d[i].message + ";";
    if (d.size() > 5) s += " ...";
    return s;
  }
  std::vector<Diagnostic> diagnostics_;
};

/// Incremental construction of a GameTree.
///
/// Children are attached to a parent in action order: the k-th node added
/// under a parent is the child for action k. Decision nodes sharing a
/// (player, key) pair are placed in the same infoset. `build()` renumbers
/// everything into depth-first order and validates.
class GameBuilder {
 public:
  explicit GameBuilder(int num_players) : num_players_(num_players) {}

  NodeId add_chance(NodeId parent, std::vector<double> probs) {
    Node n;
    n.kind = NodeKind::kChance;
    n.chance_probs = std::move(probs);
    return attach(parent, std::move(n));
  }

  NodeId add_decision(NodeId parent, PlayerId player, std::string_view infoset_key,
                      std::vector<std::string> actions) {
    Node n;
    n.kind = NodeKind::kDecision;
    n.player = player;
    auto [it, inserted] = infoset_index_.try_emplace({player, std::string(infoset_key)},
                                                     static_cast<int>(infosets_.size()));
    if (inserted) {
      Infoset info;
      info.player = player;
      info.name = std::string(infoset_key);
      info.actions = std::move(actions);
      infosets_.push_back(std::move(info));
    }
    n.infoset = it->second;
    return attach(parent, std::move(n));
  }

  NodeId add_decision(NodeId parent, PlayerId player, std::string_view infoset_key,
                      int num_actions) {
    std::vector<std::string> labels;
    for (int a = 0; a < num_actions; ++a) labels.push_back(std::to_string(a));
    return add_decision(parent, player, infoset_key, std::move(labels));
  }

  NodeId add_terminal(NodeId parent, std::vector<double> payoffs) {
    if (static_cast<int>(payoffs.size()) != num_players_) {
      throw InvalidArgument("terminal payoff vector has " + std::to_string(payoffs.size()) +
                            " entries, expected " + std::to_string(num_players_));
    }
    Node n;
    n.kind = NodeKind::kTerminal;
    n.terminal = static_cast<int>(payoffs_.size());
    payoffs_.push_back(std::move(payoffs));
    return attach(parent, std::move(n));
  }

  /// Renumbers, validates and returns the tree; throws InvalidGame.
  GameTree build() const {
    GameTree tree = build_unchecked();
    auto diagnostics = validate(tree);
    if (!diagnostics.empty()) throw InvalidGame(std::move(diagnostics));
    return tree;
  }

  /// Renumbers without validating. Intended for tests of `validate`.
  GameTree build_unchecked() const;

 private:
  NodeId attach(NodeId parent, Node n) {
    const NodeId id = static_cast<NodeId>(nodes_.size());
    if (parent == kNone) {
      if (!nodes_.empty()) throw InvalidArgument("game tree already has a root");
    } else {
      if (parent < 0 || parent >= id) throw InvalidArgument("unknown parent node");
      Node& p = nodes_[parent];
      if (p.kind == NodeKind::kTerminal) throw InvalidArgument("cannot attach a child to a terminal");
      n.parent_action = p.num_actions();
      p.children.push_back(id);
    }
    n.parent = parent;
    nodes_.push_back(std::move(n));
    return id;
  }

  int num_players_;
  std::vector<Node> nodes_;
  std::vector<Infoset> infosets_;
  std::vector<std::vector<double>> payoffs_;
  std::map<std::pair<PlayerId, std::string>, int> infoset_index_;
};

inline GameTree GameBuilder::build_unchecked() const {
  GameTree tree;
  tree.num_players_ = num_players_;
  if (nodes_.empty()) return tree;

  // Depth-first preorder renumbering.
  std::vector<NodeId> order;
  order.reserve(nodes_.size());
  std::vector<NodeId> stack{0};
  while (!stack.empty()) {
    const NodeId h = stack.back();
    stack.pop_back();
    order.push_back(h);
    const auto& ch = nodes_[h].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  std::vector<NodeId> new_id(nodes_.size(), kNone);
  for (std::size_t k = 0; k < order.size(); ++k) new_id[order[k]] = static_cast<NodeId>(k);

  std::vector<InfosetId> new_infoset(infosets_.size(), kNone);
  tree.nodes_.reserve(order.size());
  for (NodeId old : order) {
    Node n = nodes_[old];
    n.parent = n.parent == kNone ? kNone : new_id[n.parent];
    for (auto& c : n.children) c = new_id[c];
    if (n.kind == NodeKind::kDecision) {
      InfosetId& mapped = new_infoset[n.infoset];
      if (mapped == kNone) {
        mapped = static_cast<InfosetId>(tree.infosets_.size());
        Infoset info = infosets_[n.infoset];
        info.nodes.clear();
        tree.infosets_.push_back(std::move(info));
      }
      n.infoset = mapped;
      tree.infosets_[mapped].nodes.push_back(static_cast<NodeId>(tree.nodes_.size()));
    }
    if (n.kind == NodeKind::kTerminal) {
      const int old_terminal = n.terminal;
      n.terminal = static_cast<int>(tree.terminal_nodes_.size());
      tree.terminal_nodes_.push_back(static_cast<NodeId>(tree.nodes_.size()));
      tree.payoffs_.insert(tree.payoffs_.end(), payoffs_[old_terminal].begin(),
                           payoffs_[old_terminal].end());
    }
    tree.nodes_.push_back(std::move(n));
  }
  tree.finalize();
  return tree;
}

inline void GameTree::finalize() {
  const int num_players = num_players_;
  chance_reach_.assign(terminal_nodes_.size(), 1.0);
  forests_.assign(std::max(num_players, 0), SequenceForest{});
  if (num_players <= 0 || num_players > kMaxPlayers || nodes_.empty()) return;

  // Local indices in order of first appearance (infoset ids already follow it).
  for (InfosetId id = 0; id < num_infosets(); ++id) {
    Infoset& info = infosets_[id];
    if (info.player < 0 || info.player >= num_players) continue;
    SequenceForest& f = forests_[info.player];
    info.local_index = f.num_infosets();
    f.infosets.push_back(id);
    f.num_actions.push_back(std::max(info.num_actions(), 1));
  }
  for (auto& f : forests_) {
    f.seq_infoset.assign(1, kNone);
    f.seq_action.assign(1, kNone);
    for (int l = 0; l < f.num_infosets(); ++l) {
      f.first_seq.push_back(f.num_sequences());
      for (int a = 0; a < f.num_actions[l]; ++a) {
        f.seq_infoset.push_back(l);
        f.seq_action.push_back(a);
      }
    }
    f.parent_seq.assign(f.num_infosets(), kNone);
    f.terminal_seq.assign(terminal_nodes_.size(), 0);
    f.child_infosets.assign(f.num_sequences(), {});
    f.child_terminals.assign(f.num_sequences(), {});
  }

  // Walk the tree carrying each player's current sequence and the chance reach.
  struct Frame {
    NodeId node;
    double chance;
    std::array<int, kMaxPlayers> seq;
  };
  std::vector<Frame> stack;
  Frame root{0, 1.0, {}};
  root.seq.fill(0);
  stack.push_back(root);
  while (!stack.empty()) {
    Frame fr = stack.back();
    stack.pop_back();
    const Node& n = nodes_[fr.node];
    if (n.kind == NodeKind::kTerminal) {
      chance_reach_[n.terminal] = fr.chance;
      for (PlayerId p = 0; p < num_players; ++p) forests_[p].terminal_seq[n.terminal] = fr.seq[p];
      continue;
    }
    for (int a = n.num_actions() - 1; a >= 0; --a) {
      Frame child = fr;
      child.node = n.children[a];
      if (n.kind == NodeKind::kChance) {
        child.chance *= a < static_cast<int>(n.chance_probs.size()) ? n.chance_probs[a] : 0.0;
      } else if (n.player >= 0 && n.player < num_players) {
        SequenceForest& f = forests_[n.player];
        const int l = infosets_[n.infoset].local_index;
        if (f.parent_seq[l] == kNone) f.parent_seq[l] = fr.seq[n.player];
        child.seq[n.player] = f.seq(l, std::min(a, f.num_actions[l] - 1));
      }
      stack.push_back(child);
    }
  }
  for (auto& f : forests_) {
    for (int l = 0; l < f.num_infosets(); ++l) {
      if (f.parent_seq[l] == kNone) f.parent_seq[l] = 0;
      f.child_infosets[f.parent_seq[l]].push_back(l);
    }
    for (int z = 0; z < static_cast<int>(f.terminal_seq.size()); ++z) {
      f.child_terminals[f.terminal_seq[z]].push_back(z);
    }
  }
}

}  // namespace cce
