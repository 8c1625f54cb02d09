#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cce/games.hpp"

namespace cce {

enum class GameFamily { kKuhn3, kLeduc3, kGoofspiel, kShapleyEfg, kMatrix, kRandom };

/// Identifies one benchmark instance.
///
/// String grammar (case-sensitive):
///   K3-<r>                      three-player Kuhn poker, r >= 3 ranks
///   L3-<r>                      three-player Leduc hold'em, r >= 3 ranks
///   G<p>-<r>-<A|DA|DH|AL>[:order=fixed]   Goofspiel, p in {2,3}, r >= 2
///   R<p>-<d>[:key=value,...]    random game; keys seed, branching, chance, lo, hi
///   SHAPLEY                     sequential Shapley variant
///   M-<fig2|shapley|pennies>    preset normal-form games
struct GameSpec {
  GameFamily family = GameFamily::kKuhn3;
  int players = 3;
  int rank = 3;
  TieRule rule = TieRule::kAccumulate;
  bool fixed_order = false;
  RandomGameParams random;
  std::string preset;
  // Explicit matrix payoffs (JSON form only); empty when a preset is used.
  std::vector<int> matrix_actions;
  std::vector<std::vector<double>> matrix_payoffs;

  bool operator==(const GameSpec& o) const {
    return family == o.family && players == o.players && rank == o.rank && rule == o.rule &&
           fixed_order == o.fixed_order && random.players == o.random.players &&
           random.depth == o.random.depth && random.seed == o.random.seed &&
           random.branching == o.random.branching && random.chance_freq == o.random.chance_freq &&
           random.payoff_lo == o.random.payoff_lo && random.payoff_hi == o.random.payoff_hi &&
           preset == o.preset && matrix_actions == o.matrix_actions && matrix_payoffs == o.matrix_payoffs;
  }
};

namespace spec_detail {

inline std::string format_double(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline int parse_int(std::string_view s, const std::string& what) {
  int v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw InvalidArgument("invalid " + what + " \"" + std::string(s) + "\"");
  }
  return v;
}

inline std::uint64_t parse_u64(std::string_view s, const std::string& what) {
  std::uint64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw InvalidArgument("invalid " + what + " \"" + std::string(s) + "\"");
  }
  return v;
}

inline double parse_double(std::string_view s, const std::string& what) {
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw InvalidArgument("invalid " + what + " \"" + std::string(s) + "\"");
  }
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline void check(const GameSpec& g) {
  switch (g.family) {
    case GameFamily::kKuhn3:
    case GameFamily::kLeduc3:
      if (g.players != 3) throw InvalidArgument("poker games are three-player");
      if (g.rank < 3) throw InvalidArgument("poker games need rank >= 3");
      break;
    case GameFamily::kGoofspiel:
      if (g.players < 2 || g.players > 3) throw InvalidArgument("goofspiel needs 2 or 3 players");
      if (g.rank < 2 || g.rank > 13) throw InvalidArgument("goofspiel rank must be in [2, 13]");
      break;
    case GameFamily::kRandom:
      if (g.random.players < 2) throw InvalidArgument("random games need >= 2 players");
      if (g.random.depth < 1) throw InvalidArgument("random games need depth >= 1");
      break;
    case GameFamily::kMatrix:
      if (g.preset.empty() && g.matrix_actions.empty()) throw InvalidArgument("matrix game without payoffs");
      if (!g.preset.empty() && g.preset != "fig2" && g.preset != "shapley" && g.preset != "pennies") {
        throw InvalidArgument("unknown matrix preset \"" + g.preset + "\"");
      }
      break;
    case GameFamily::kShapleyEfg:
      break;
  }
}

}  // namespace spec_detail

inline GameSpec parse_game_spec(std::string_view text) {
  using namespace spec_detail;
  GameSpec g;
  std::string_view head = text;
  std::string_view opts;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    head = text.substr(0, colon);
    opts = text.substr(colon + 1);
  }
  auto bad = [&]() { return InvalidArgument("unrecognized game spec \"" + std::string(text) + "\""); };
  if (head.empty()) throw bad();

  if (head == "SHAPLEY") {
    g.family = GameFamily::kShapleyEfg;
    g.players = 2;
  } else if (head.starts_with("M-")) {
    g.family = GameFamily::kMatrix;
    g.preset = std::string(head.substr(2));
    g.players = g.preset == "shapley" || g.preset == "fig2" || g.preset == "pennies" ? 2 : 0;
  } else {
    const char tag = head[0];
    const auto parts = split(head.substr(1), '-');
    switch (tag) {
      case 'K':
      case 'L':
        if (parts.size() != 2) throw bad();
        g.family = tag == 'K' ? GameFamily::kKuhn3 : GameFamily::kLeduc3;
        g.players = parse_int(parts[0], "player count");
        g.rank = parse_int(parts[1], "rank");
        break;
      case 'G':
        if (parts.size() != 3) throw bad();
        g.family = GameFamily::kGoofspiel;
        g.players = parse_int(parts[0], "player count");
        g.rank = parse_int(parts[1], "rank");
        g.rule = parse_tie_rule(std::string(parts[2]));
        break;
      case 'R':
        if (parts.size() != 2) throw bad();
        g.family = GameFamily::kRandom;
        g.players = g.random.players = parse_int(parts[0], "player count");
        g.random.depth = parse_int(parts[1], "depth");
        g.rank = 0;
        break;
      default:
        throw bad();
    }
  }
  if (g.family == GameFamily::kRandom || g.family == GameFamily::kShapleyEfg ||
      g.family == GameFamily::kMatrix) {
    g.rank = 0;
  }

  if (!opts.empty()) {
    for (auto kv : split(opts, ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string_view::npos) throw bad();
      const auto key = kv.substr(0, eq);
      const auto value = kv.substr(eq + 1);
      if (g.family == GameFamily::kGoofspiel && key == "order") {
        if (value == "fixed") {
          g.fixed_order = true;
        } else if (value == "shuffled") {
          g.fixed_order = false;
        } else {
          throw bad();
        }
      } else if (g.family == GameFamily::kRandom && key == "seed") {
        g.random.seed = parse_u64(value, "seed");
      } else if (g.family == GameFamily::kRandom && key == "branching") {
        g.random.branching = parse_int(value, "branching");
      } else if (g.family == GameFamily::kRandom && key == "chance") {
        g.random.chance_freq = parse_double(value, "chance frequency");
      } else if (g.family == GameFamily::kRandom && key == "lo") {
        g.random.payoff_lo = parse_double(value, "payoff lower bound");
      } else if (g.family == GameFamily::kRandom && key == "hi") {
        g.random.payoff_hi = parse_double(value, "payoff upper bound");
      } else {
        throw InvalidArgument("unknown option \"" + std::string(key) + "\" in game spec \"" +
                              std::string(text) + "\"");
      }
    }
  }
  check(g);
  return g;
}

/// Canonical string form; parse_game_spec(to_string(g)) == g for every spec
/// that has a string form (explicit JSON matrices do not).
inline std::string to_string(const GameSpec& g) {
  using spec_detail::format_double;
  switch (g.family) {
    case GameFamily::kKuhn3: return "K3-" + std::to_string(g.rank);
    case GameFamily::kLeduc3: return "L3-" + std::to_string(g.rank);
    case GameFamily::kGoofspiel:
      return "G" + std::to_string(g.players) + "-" + std::to_string(g.rank) + "-" + to_string(g.rule) +
             (g.fixed_order ? ":order=fixed" : "");
    case GameFamily::kShapleyEfg: return "SHAPLEY";
    case GameFamily::kMatrix:
      if (g.preset.empty()) throw InvalidArgument("explicit matrix games have no string form");
      return "M-" + g.preset;
    case GameFamily::kRandom: {
      const RandomGameParams d;
      std::string s = "R" + std::to_string(g.random.players) + "-" + std::to_string(g.random.depth) +
                      ":seed=" + std::to_string(g.random.seed);
      if (g.random.branching != d.branching) s += ",branching=" + std::to_string(g.random.branching);
      if (g.random.chance_freq != d.chance_freq) s += ",chance=" + format_double(g.random.chance_freq);
      if (g.random.payoff_lo != d.payoff_lo) s += ",lo=" + format_double(g.random.payoff_lo);
      if (g.random.payoff_hi != d.payoff_hi) s += ",hi=" + format_double(g.random.payoff_hi);
      return s;
    }
  }
  return "?";
}

inline const char* family_name(GameFamily f) {
  switch (f) {
    case GameFamily::kKuhn3: return "kuhn3";
    case GameFamily::kLeduc3: return "leduc3";
    case GameFamily::kGoofspiel: return "goofspiel";
    case GameFamily::kShapleyEfg: return "shapley_efg";
    case GameFamily::kMatrix: return "matrix";
    case GameFamily::kRandom: return "random";
  }
  return "?";
}

inline nlohmann::ordered_json game_spec_to_json(const GameSpec& g) {
  nlohmann::ordered_json j;
  j["family"] = family_name(g.family);
  switch (g.family) {
    case GameFamily::kKuhn3:
    case GameFamily::kLeduc3:
      j["rank"] = g.rank;
      break;
    case GameFamily::kGoofspiel:
      j["players"] = g.players;
      j["rank"] = g.rank;
      j["rule"] = to_string(g.rule);
      j["fixed_order"] = g.fixed_order;
      break;
    case GameFamily::kRandom:
      j["players"] = g.random.players;
      j["depth"] = g.random.depth;
      j["seed"] = g.random.seed;
      j["branching"] = g.random.branching;
      j["chance_freq"] = g.random.chance_freq;
      j["payoff_lo"] = g.random.payoff_lo;
      j["payoff_hi"] = g.random.payoff_hi;
      break;
    case GameFamily::kMatrix:
      if (!g.preset.empty()) {
        j["preset"] = g.preset;
      } else {
        j["actions"] = g.matrix_actions;
        j["payoffs"] = g.matrix_payoffs;
      }
      break;
    case GameFamily::kShapleyEfg:
      break;
  }
  return j;
}

inline GameSpec game_spec_from_json(const nlohmann::json& j) {
  try {
    if (j.is_string()) return parse_game_spec(j.get<std::string>());
    const auto family = j.at("family").get<std::string>();
    GameSpec g;
    if (family == "kuhn3" || family == "leduc3") {
      g.family = family == "kuhn3" ? GameFamily::kKuhn3 : GameFamily::kLeduc3;
      g.players = 3;
      g.rank = j.at("rank").get<int>();
    } else if (family == "goofspiel") {
      g.family = GameFamily::kGoofspiel;
      g.players = j.at("players").get<int>();
      g.rank = j.at("rank").get<int>();
      g.rule = parse_tie_rule(j.at("rule").get<std::string>());
      g.fixed_order = j.value("fixed_order", false);
    } else if (family == "random") {
      g.family = GameFamily::kRandom;
      g.rank = 0;
      const RandomGameParams d;
      g.players = g.random.players = j.at("players").get<int>();
      g.random.depth = j.at("depth").get<int>();
      g.random.seed = j.value("seed", d.seed);
      g.random.branching = j.value("branching", d.branching);
      g.random.chance_freq = j.value("chance_freq", d.chance_freq);
      g.random.payoff_lo = j.value("payoff_lo", d.payoff_lo);
      g.random.payoff_hi = j.value("payoff_hi", d.payoff_hi);
    } else if (family == "shapley_efg") {
      g.family = GameFamily::kShapleyEfg;
      g.players = 2;
      g.rank = 0;
    } else if (family == "matrix") {
      g.family = GameFamily::kMatrix;
      g.rank = 0;
      if (j.contains("preset")) {
        g.preset = j.at("preset").get<std::string>();
        g.players = 2;
      } else {
        g.matrix_actions = j.at("actions").get<std::vector<int>>();
        g.matrix_payoffs = j.at("payoffs").get<std::vector<std::vector<double>>>();
        g.players = static_cast<int>(g.matrix_actions.size());
      }
    } else {
      throw InvalidArgument("unknown game family \"" + family + "\"");
    }
    spec_detail::check(g);
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("invalid game spec block: ") + e.what());
  }
}

inline GameTree make_game(const GameSpec& g) {
  spec_detail::check(g);
  switch (g.family) {
    case GameFamily::kKuhn3: return kuhn3(g.rank);
    case GameFamily::kLeduc3: return leduc3(g.rank);
    case GameFamily::kGoofspiel: return goofspiel(g.players, g.rank, g.rule, g.fixed_order);
    case GameFamily::kShapleyEfg: return shapley_efg();
    case GameFamily::kRandom: return random_game(g.random);
    case GameFamily::kMatrix:
      if (g.preset == "fig2") return figure2_game();
      if (g.preset == "shapley") return shapley_matrix_game();
      if (g.preset == "pennies") return matching_pennies();
      return matrix_game(g.matrix_actions, g.matrix_payoffs);
  }
  throw InvalidArgument("unknown game family");
}

inline GameTree make_game(std::string_view text) { return make_game(parse_game_spec(text)); }

}  // namespace cce
