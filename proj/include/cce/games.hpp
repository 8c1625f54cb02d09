#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "cce/efg.hpp"
#include "cce/rng.hpp"

namespace cce {

namespace poker_detail {

/// Betting state shared by the Kuhn and Leduc constructors.
struct Table {
  std::vector<double> contribution;  // chips put in the pot, per player
  std::vector<bool> folded;
  std::string history;

  double pot() const { return std::accumulate(contribution.begin(), contribution.end(), 0.0); }
  std::vector<PlayerId> live() const {
    std::vector<PlayerId> out;
    for (PlayerId p = 0; p < static_cast<PlayerId>(folded.size()); ++p) {
      if (!folded[p]) out.push_back(p);
    }
    return out;
  }
};

/// Net payoffs when the pot is shared equally by `winners`.
inline std::vector<double> settle(const Table& t, const std::vector<PlayerId>& winners) {
  std::vector<double> u(t.contribution.size());
  const double share = t.pot() / static_cast<double>(winners.size());
  for (std::size_t p = 0; p < u.size(); ++p) u[p] = -t.contribution[p];
  for (PlayerId w : winners) u[w] += share;
  return u;
}

using InfosetKey = std::function<std::string(PlayerId, const Table&)>;
using RoundEnd = std::function<void(NodeId parent, const Table&)>;

/// One Kuhn-style betting round among the live players in seat order.
///
/// Until someone bets, each player may check or bet `stake` chips. After a
/// bet, every other live player answers once with fold or call, in seat order
/// starting after the bettor. No raises. A round in which all but one player
/// folds ends the hand; otherwise `on_end` continues the game.
inline void betting_round(GameBuilder& b, NodeId parent, Table table, double stake,
                          const InfosetKey& key, const RoundEnd& on_end) {
  const std::vector<PlayerId> order = table.live();
  const int n = static_cast<int>(order.size());

  std::function<void(NodeId, Table, int)> open;
  std::function<void(NodeId, Table, int, int)> respond;

  open = [&](NodeId at, Table t, int pos) {
    if (pos == n) {
      on_end(at, t);
      return;
    }
    const PlayerId p = order[pos];
    const NodeId h = b.add_decision(at, p, key(p, t), {"check", "bet"});
    Table checked = t;
    checked.history += 'p';
    open(h, checked, pos + 1);
    Table bet = t;
    bet.history += 'b';
    bet.contribution[p] += stake;
    respond(h, bet, pos, 1);
  };

  respond = [&](NodeId at, Table t, int bettor_pos, int k) {
    if (k == n) {
      const auto live = t.live();
      if (live.size() == 1) {
        b.add_terminal(at, settle(t, live));
      } else {
        on_end(at, t);
      }
      return;
    }
    const PlayerId p = order[(bettor_pos + k) % n];
    const NodeId h = b.add_decision(at, p, key(p, t), {"fold", "call"});
    Table fold = t;
    fold.history += 'f';
    fold.folded[p] = true;
    respond(h, fold, bettor_pos, k + 1);
    Table call = t;
    call.history += 'c';
    call.contribution[p] += stake;
    respond(h, call, bettor_pos, k + 1);
  };

  open(parent, std::move(table), 0);
}

}  // namespace poker_detail

/// Three-player Kuhn poker with `ranks` distinct cards. Each player antes one
/// chip and receives one private card; bets are one chip.
inline GameTree kuhn3(int ranks) {
  using namespace poker_detail;
  if (ranks < 3) throw InvalidArgument("kuhn3 needs at least 3 ranks, got " + std::to_string(ranks));
  GameBuilder b(3);
  const double p_deal = 1.0 / (ranks * (ranks - 1) * (ranks - 2));
  std::vector<std::array<int, 3>> deals;
  for (int c0 = 0; c0 < ranks; ++c0) {
    for (int c1 = 0; c1 < ranks; ++c1) {
      for (int c2 = 0; c2 < ranks; ++c2) {
        if (c0 != c1 && c0 != c2 && c1 != c2) deals.push_back({c0, c1, c2});
      }
    }
  }
  const NodeId root = b.add_chance(kNone, std::vector<double>(deals.size(), p_deal));
  for (const auto& deal : deals) {
    Table t{{1.0, 1.0, 1.0}, {false, false, false}, ""};
    InfosetKey key = [&deal](PlayerId p, const Table& tb) {
      return "P" + std::to_string(p) + ":" + std::to_string(deal[p] + 1) + ":" + tb.history;
    };
    RoundEnd showdown = [&](NodeId at, const Table& tb) {
      PlayerId best = kNone;
      for (PlayerId p : tb.live()) {
        if (best == kNone || deal[p] > deal[best]) best = p;
      }
      b.add_terminal(at, settle(tb, {best}));
    };
    betting_round(b, root, t, 1.0, key, showdown);
  }
  return b.build();
}

/// Three-player Leduc hold'em over 3 suits of `ranks` ranks. Suits never
/// affect payoffs, so cards are dealt by rank with multiplicity-weighted
/// chance probabilities. Round stakes are 2 then 4 chips.
inline GameTree leduc3(int ranks) {
  using namespace poker_detail;
  if (ranks < 3) throw InvalidArgument("leduc3 needs at least 3 ranks, got " + std::to_string(ranks));
  constexpr int kSuits = 3;
  constexpr double kStake1 = 2.0;
  constexpr double kStake2 = 4.0;
  const int deck = kSuits * ranks;
  GameBuilder b(3);

  std::vector<std::array<int, 3>> deals;
  std::vector<double> probs;
  for (int c0 = 0; c0 < ranks; ++c0) {
    for (int c1 = 0; c1 < ranks; ++c1) {
      for (int c2 = 0; c2 < ranks; ++c2) {
        const double n1 = kSuits - (c1 == c0);
        const double n2 = kSuits - (c2 == c0) - (c2 == c1);
        if (n2 <= 0) continue;
        deals.push_back({c0, c1, c2});
        probs.push_back(kSuits / static_cast<double>(deck) * n1 / (deck - 1) * n2 / (deck - 2));
      }
    }
  }
  const NodeId root = b.add_chance(kNone, probs);
  for (const auto& deal : deals) {
    auto card = [&deal](PlayerId p) { return std::to_string(deal[p] + 1); };
    InfosetKey key1 = [&](PlayerId p, const Table& tb) {
      return "P" + std::to_string(p) + ":" + card(p) + ":" + tb.history;
    };
    RoundEnd flop = [&](NodeId at, const Table& tb) {
      std::vector<int> boards;
      std::vector<double> bprobs;
      for (int c = 0; c < ranks; ++c) {
        const int left = kSuits - static_cast<int>(std::count(deal.begin(), deal.end(), c));
        if (left == 0) continue;
        boards.push_back(c);
        bprobs.push_back(static_cast<double>(left) / (deck - 3));
      }
      const NodeId chance = b.add_chance(at, bprobs);
      for (int board : boards) {
        Table t2 = tb;
        const std::string round1 = tb.history;
        t2.history.clear();
        InfosetKey key2 = [&, board, round1](PlayerId p, const Table& t) {
          return "P" + std::to_string(p) + ":" + card(p) + ":" + round1 + "/" +
                 std::to_string(board + 1) + ":" + t.history;
        };
        RoundEnd showdown = [&, board](NodeId at2, const Table& t) {
          const auto live = t.live();
          std::vector<PlayerId> winners;
          for (PlayerId p : live) {
            if (deal[p] == board) winners.push_back(p);
          }
          if (winners.empty()) {
            int best = -1;
            for (PlayerId p : live) best = std::max(best, deal[p]);
            for (PlayerId p : live) {
              if (deal[p] == best) winners.push_back(p);
            }
          }
          b.add_terminal(at2, settle(t, winners));
        };
        betting_round(b, chance, t2, kStake2, key2, showdown);
      }
    };
    betting_round(b, root, Table{{1.0, 1.0, 1.0}, {false, false, false}, ""}, kStake1, key1, flop);
  }
  return b.build();
}

enum class TieRule { kAccumulate, kDiscardIfAll, kDiscardIfHigh, kDiscardAlways };

inline std::string to_string(TieRule r) {
  switch (r) {
    case TieRule::kAccumulate: return "A";
    case TieRule::kDiscardIfAll: return "DA";
    case TieRule::kDiscardIfHigh: return "DH";
    case TieRule::kDiscardAlways: return "AL";
  }
  return "?";
}

inline TieRule parse_tie_rule(const std::string& s) {
  if (s == "A") return TieRule::kAccumulate;
  if (s == "DA") return TieRule::kDiscardIfAll;
  if (s == "DH") return TieRule::kDiscardIfHigh;
  if (s == "AL") return TieRule::kDiscardAlways;
  throw InvalidArgument("unknown Goofspiel tie rule \"" + s + "\" (expected A, DA, DH or AL)");
}

/// Outcome of one Goofspiel round: index of the winning player or kNone, and
/// whether the prize is carried into the next round (accumulate rule only).
struct RoundOutcome {
  PlayerId winner = kNone;
  bool carry = false;
};

/// `top_card` is the highest card value in the deck.
inline RoundOutcome resolve_bids(const std::vector<int>& bids, TieRule rule, int top_card) {
  std::map<int, int> count;
  for (int v : bids) ++count[v];
  const bool all_equal = count.size() == 1;
  bool any_tie = false;
  int highest_unique = -1;
  for (auto [v, c] : count) {
    if (c > 1) any_tie = true;
    if (c == 1) highest_unique = std::max(highest_unique, v);
  }
  auto unique_winner = [&]() -> PlayerId {
    if (highest_unique < 0) return kNone;
    return static_cast<PlayerId>(std::find(bids.begin(), bids.end(), highest_unique) - bids.begin());
  };
  switch (rule) {
    case TieRule::kAccumulate:
      if (all_equal) return {kNone, true};
      return {unique_winner(), false};
    case TieRule::kDiscardIfAll:
      if (all_equal) return {};
      return {unique_winner(), false};
    case TieRule::kDiscardIfHigh: {
      const auto top = count.find(top_card);
      if (top != count.end() && top->second > 1) return {};
      return {unique_winner(), false};
    }
    case TieRule::kDiscardAlways:
      if (any_tie) return {};
      return {unique_winner(), false};
  }
  return {};
}

/// Goofspiel with `players` hands of cards 1..ranks and a prize suit worth
/// 1..ranks points. Prizes are revealed one per round in chance-shuffled
/// order (or ascending when `fixed_order`); bids within a round are hidden
/// from the other players until the round resolves.
inline GameTree goofspiel(int players, int ranks, TieRule rule, bool fixed_order = false) {
  if (players < 2 || players > 3) throw InvalidArgument("goofspiel supports 2 or 3 players");
  if (ranks < 2 || ranks > 13) throw InvalidArgument("goofspiel ranks must be in [2, 13]");
  GameBuilder b(players);

  struct State {
    std::vector<int> prizes_left;
    std::vector<std::vector<int>> hands;
    std::string public_history;  // revealed prizes and resolved bids
    std::vector<double> score;
    double carried = 0.0;
  };

  std::function<void(NodeId, const State&)> next_round;
  std::function<void(NodeId, const State&, int, std::vector<int>, int)> bid;

  next_round = [&](NodeId at, const State& s) {
    if (s.prizes_left.empty()) {
      b.add_terminal(at, s.score);
      return;
    }
    std::vector<int> options = s.prizes_left;
    NodeId parent = at;
    if (fixed_order) {
      options.resize(1);
    } else if (options.size() > 1) {
      parent = b.add_chance(at, std::vector<double>(options.size(), 1.0 / options.size()));
    }
    for (std::size_t k = 0; k < options.size(); ++k) {
      State t = s;
      t.prizes_left.erase(std::find(t.prizes_left.begin(), t.prizes_left.end(), options[k]));
      t.public_history += "[" + std::to_string(options[k]) + "]";
      bid(parent, t, 0, {}, options[k]);
    }
  };

  bid = [&](NodeId at, const State& s, int p, std::vector<int> bids, int prize) {
    if (p == players) {
      State t = s;
      const auto outcome = resolve_bids(bids, rule, ranks);
      if (outcome.carry) {
        t.carried += prize;
      } else {
        if (outcome.winner != kNone) t.score[outcome.winner] += prize + t.carried;
        t.carried = 0.0;
      }
      for (int v : bids) t.public_history += std::to_string(v) + ",";
      next_round(at, t);
      return;
    }
    const auto& hand = s.hands[p];
    std::vector<std::string> labels;
    for (int v : hand) labels.push_back(std::to_string(v));
    const NodeId h = b.add_decision(at, p, "P" + std::to_string(p) + ":" + s.public_history, labels);
    for (int v : hand) {
      State t = s;
      auto& th = t.hands[p];
      th.erase(std::find(th.begin(), th.end(), v));
      auto nb = bids;
      nb.push_back(v);
      bid(h, t, p + 1, std::move(nb), prize);
    }
  };

  State init;
  for (int v = 1; v <= ranks; ++v) init.prizes_left.push_back(v);
  init.hands.assign(players, init.prizes_left);
  init.score.assign(players, 0.0);
  next_round(kNone, init);
  return b.build();
}

/// Simultaneous-move normal-form game. `actions[i]` is player i's action
/// count; `payoffs` has one vector of per-player payoffs for each joint action,
/// in row-major order (player 0 most significant).
inline GameTree matrix_game(const std::vector<int>& actions,
                            const std::vector<std::vector<double>>& payoffs,
                            const std::vector<std::vector<std::string>>& labels = {}) {
  const int players = static_cast<int>(actions.size());
  if (players < 1 || players > kMaxPlayers) throw InvalidArgument("matrix game needs 1..8 players");
  std::size_t joint = 1;
  for (int n : actions) {
    if (n < 1) throw InvalidArgument("matrix game: every player needs at least one action");
    joint *= static_cast<std::size_t>(n);
  }
  if (payoffs.size() != joint) {
    throw InvalidArgument("matrix game: expected " + std::to_string(joint) + " payoff entries, got " +
                          std::to_string(payoffs.size()));
  }
  for (const auto& u : payoffs) {
    if (static_cast<int>(u.size()) != players) throw InvalidArgument("matrix game: ragged payoff tensor");
  }
  GameBuilder b(players);
  std::function<void(NodeId, int, std::size_t)> build = [&](NodeId at, int p, std::size_t index) {
    if (p == players) {
      b.add_terminal(at, payoffs[index]);
      return;
    }
    std::vector<std::string> names;
    for (int a = 0; a < actions[p]; ++a) {
      names.push_back(p < static_cast<int>(labels.size()) && a < static_cast<int>(labels[p].size())
                          ? labels[p][a]
                          : std::to_string(a));
    }
    const NodeId h = b.add_decision(at, p, "P" + std::to_string(p), names);
    for (int a = 0; a < actions[p]; ++a) build(h, p + 1, index * actions[p] + a);
  };
  build(kNone, 0, 0);
  return b.build();
}

/// 2x2 game in which the product of alternating no-regret iterates fails to
/// be a CCE while their empirical joint frequency is one.
inline GameTree figure2_game() {
  return matrix_game({2, 2}, {{1, 1}, {1, 0}, {0, 1}, {1, 1}}, {{"L", "R"}, {"L", "R"}});
}

/// Shapley-style 3x3 general-sum game on which regret matching cycles.
inline GameTree shapley_matrix_game() {
  return matrix_game({3, 3},
                     {{1, 0}, {0, 1}, {0, 0},  //
                      {0, 0}, {2, 0}, {0, 1},  //
                      {0, 1}, {0, 0}, {1, 0}});
}

inline GameTree matching_pennies() {
  return matrix_game({2, 2}, {{1, -1}, {-1, 1}, {-1, 1}, {1, -1}}, {{"H", "T"}, {"H", "T"}});
}

/// Sequential Shapley variant: player 1 plays a card in {0,1,2} openly,
/// player 2 answers with a hidden card, player 1 plays again. The card sum
/// mod 3 gives (0,0), (1,0) or (0,1); payoffs double when player 2's card
/// equals player 1's second card.
inline double shapley_doubling(int /*first*/, int second, int third) { return second == third ? 2.0 : 1.0; }

inline GameTree shapley_efg() {
  GameBuilder b(2);
  const std::vector<std::string> cards{"0", "1", "2"};
  const NodeId root = b.add_decision(kNone, 0, "P0", cards);
  for (int c1 = 0; c1 < 3; ++c1) {
    const NodeId h2 = b.add_decision(root, 1, "P1:" + std::to_string(c1), cards);
    for (int c2 = 0; c2 < 3; ++c2) {
      const NodeId h3 = b.add_decision(h2, 0, "P0:" + std::to_string(c1) + ":?", cards);
      for (int c3 = 0; c3 < 3; ++c3) {
        const int sum = (c1 + c2 + c3) % 3;
        const double k = shapley_doubling(c1, c2, c3);
        std::vector<double> u{sum == 1 ? k : 0.0, sum == 2 ? k : 0.0};
        b.add_terminal(h3, u);
      }
    }
  }
  return b.build();
}

struct RandomGameParams {
  int players = 2;
  int depth = 3;
  std::uint64_t seed = 0;
  int branching = 2;
  double chance_freq = 0.2;
  double payoff_lo = 0.0;
  double payoff_hi = 1.0;
};

/// Seeded random general-sum game of the given depth. Every internal node is a
/// chance node with probability `chance_freq`, otherwise a node of a uniformly
/// drawn player. Nodes of the same player at the same depth that share their
/// own last (infoset, action) pair are randomly grouped into infosets, which
/// keeps perfect recall. Payoffs are i.i.d. uniform in [lo, hi].
inline GameTree random_game(const RandomGameParams& params) {
  const auto& q = params;
  if (q.players < 2 || q.players > kMaxPlayers) throw InvalidArgument("random game: players must be in [2, 8]");
  if (q.depth < 1) throw InvalidArgument("random game: depth must be >= 1");
  if (q.branching < 2) throw InvalidArgument("random game: branching must be >= 2");
  if (!(q.chance_freq >= 0.0 && q.chance_freq <= 1.0)) throw InvalidArgument("random game: chance_freq must be in [0, 1]");
  if (!(q.payoff_lo <= q.payoff_hi)) throw InvalidArgument("random game: payoff range is empty");
  if (std::pow(static_cast<double>(q.branching), q.depth) > static_cast<double>(1 << 22)) {
    throw InvalidArgument("random game: tree too large");
  }

  Rng shape_rng(q.seed, 1);
  Rng group_rng(q.seed, 2);
  Rng payoff_rng(q.seed, 3);

  struct Raw {
    NodeKind kind;
    PlayerId player = kChance;
    int depth = 0;
    NodeId parent = kNone;
    int action = kNone;
    std::vector<NodeId> children;
    std::vector<double> probs;
    std::vector<double> payoffs;
    int group = kNone;
  };
  std::vector<Raw> raw;
  std::vector<std::vector<NodeId>> by_depth(q.depth + 1);
  std::function<NodeId(NodeId, int, int)> grow = [&](NodeId parent, int action, int depth) {
    const NodeId id = static_cast<NodeId>(raw.size());
    raw.push_back({});
    raw[id].parent = parent;
    raw[id].action = action;
    raw[id].depth = depth;
    by_depth[depth].push_back(id);
    if (depth == q.depth) {
      raw[id].kind = NodeKind::kTerminal;
      for (int p = 0; p < q.players; ++p) raw[id].payoffs.push_back(payoff_rng.uniform(q.payoff_lo, q.payoff_hi));
      return id;
    }
    if (shape_rng.uniform() < q.chance_freq) {
      raw[id].kind = NodeKind::kChance;
      std::vector<double> w(q.branching);
      double sum = 0.0;
      for (auto& x : w) sum += (x = shape_rng.uniform(0.1, 1.0));
      for (auto& x : w) x /= sum;
      raw[id].probs = std::move(w);
    } else {
      raw[id].kind = NodeKind::kDecision;
      raw[id].player = static_cast<PlayerId>(shape_rng.below(q.players));
    }
    for (int a = 0; a < q.branching; ++a) {
      const NodeId c = grow(id, a, depth + 1);
      raw[id].children.push_back(c);
    }
    return id;
  };
  grow(kNone, kNone, 0);

  // Own last (group, action) of the acting player above each node.
  auto own_last = [&](NodeId h) -> std::pair<int, int> {
    const PlayerId p = raw[h].player;
    for (NodeId c = h, a = raw[h].parent; a != kNone; c = a, a = raw[a].parent) {
      if (raw[a].kind == NodeKind::kDecision && raw[a].player == p) return {raw[a].group, raw[c].action};
    }
    return {kNone, kNone};
  };
  int next_group = 0;
  for (int d = 0; d < q.depth; ++d) {
    std::map<std::tuple<PlayerId, int, int>, std::vector<int>> classes;  // key -> groups in class
    std::vector<std::tuple<PlayerId, int, int>> class_order;
    for (NodeId h : by_depth[d]) {
      if (raw[h].kind != NodeKind::kDecision) continue;
      const auto [g, a] = own_last(h);
      const auto key = std::make_tuple(raw[h].player, g, a);
      auto [it, inserted] = classes.try_emplace(key);
      auto& groups = it->second;
      if (!groups.empty() && group_rng.uniform() < 0.5) {
        raw[h].group = groups[group_rng.below(groups.size())];
      } else {
        raw[h].group = next_group++;
        groups.push_back(raw[h].group);
      }
    }
  }

  GameBuilder b(q.players);
  std::function<void(NodeId, NodeId)> emit = [&](NodeId h, NodeId parent) {
    const Raw& r = raw[h];
    NodeId id;
    switch (r.kind) {
      case NodeKind::kTerminal:
        b.add_terminal(parent, r.payoffs);
        return;
      case NodeKind::kChance:
        id = b.add_chance(parent, r.probs);
        break;
      default:
        id = b.add_decision(parent, r.player, "g" + std::to_string(r.group), q.branching);
        break;
    }
    for (NodeId c : r.children) emit(c, id);
  };
  emit(0, kNone);
  return b.build();
}

}  // namespace cce
