#pragma once

#include <fstream>
#include <set>
#include <string>

#include "json.hpp"

#include "cce/efg.hpp"

namespace cce {

inline constexpr const char* kGameFormat = "cce-efg";
inline constexpr int kGameFormatVersion = 1;

class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Serializes a tree to the versioned game document described in
/// schema/game.schema.json. Nodes are listed in id order (depth-first).
inline nlohmann::ordered_json game_to_json(const GameTree& tree) {
  nlohmann::ordered_json doc;
  doc["format"] = kGameFormat;
  doc["version"] = kGameFormatVersion;
  doc["num_players"] = tree.num_players();
  auto& nodes = doc["nodes"] = nlohmann::ordered_json::array();
  for (NodeId h = 0; h < tree.num_nodes(); ++h) {
    const Node& n = tree.node(h);
    nlohmann::ordered_json j;
    j["id"] = h;
    j["parent"] = n.parent;
    j["action"] = n.parent_action;
    switch (n.kind) {
      case NodeKind::kChance:
        j["kind"] = "chance";
        j["probs"] = n.chance_probs;
        break;
      case NodeKind::kDecision:
        j["kind"] = "decision";
        j["player"] = n.player;
        j["infoset"] = n.infoset;
        break;
      case NodeKind::kTerminal: {
        j["kind"] = "terminal";
        auto u = tree.payoffs(n.terminal);
        j["payoffs"] = std::vector<double>(u.begin(), u.end());
        break;
      }
    }
    nodes.push_back(std::move(j));
  }
  auto& infosets = doc["infosets"] = nlohmann::ordered_json::array();
  for (InfosetId id = 0; id < tree.num_infosets(); ++id) {
    const Infoset& info = tree.infoset(id);
    nlohmann::ordered_json j;
    j["id"] = id;
    j["player"] = info.player;
    j["name"] = info.name;
    j["actions"] = info.actions;
    j["nodes"] = info.nodes;
    infosets.push_back(std::move(j));
  }
  return doc;
}

/// Rebuilds a tree from a game document; throws SchemaError on malformed or
/// version-mismatched input and InvalidGame when the tree itself is invalid.
inline GameTree game_from_json(const nlohmann::json& doc) {
  auto fail = [](const std::string& msg) -> SchemaError { return SchemaError("game document: " + msg); };
  try {
    if (!doc.is_object()) throw fail("not a JSON object");
    if (doc.value("format", std::string{}) != kGameFormat) throw fail("missing or unknown \"format\"");
    if (!doc.contains("version") || doc.at("version").get<int>() != kGameFormatVersion) {
      throw fail("unsupported schema version (expected " + std::to_string(kGameFormatVersion) + ")");
    }
    const int num_players = doc.at("num_players").get<int>();
    if (num_players < 1 || num_players > kMaxPlayers) throw fail("num_players out of range");
    const auto& nodes = doc.at("nodes");
    const auto& infosets = doc.at("infosets");
    if (!nodes.is_array() || nodes.empty()) throw fail("\"nodes\" must be a non-empty array");
    if (!infosets.is_array()) throw fail("\"infosets\" must be an array");

    struct InfosetDoc {
      PlayerId player;
      std::string name;
      std::vector<std::string> actions;
    };
    std::vector<InfosetDoc> info;
    std::set<std::pair<PlayerId, std::string>> names;
    for (std::size_t k = 0; k < infosets.size(); ++k) {
      const auto& j = infosets[k];
      if (j.at("id").get<int>() != static_cast<int>(k)) throw fail("infoset ids must be 0..n-1 in order");
      InfosetDoc d{j.at("player").get<int>(), j.at("name").get<std::string>(),
                   j.at("actions").get<std::vector<std::string>>()};
      if (d.player < 0 || d.player >= num_players) throw fail("infoset player out of range");
      if (!names.insert({d.player, d.name}).second) throw fail("duplicate infoset name \"" + d.name + "\"");
      info.push_back(std::move(d));
    }

    GameBuilder builder(num_players);
    std::vector<int> child_count(nodes.size(), 0);
    std::vector<NodeId> built(nodes.size(), kNone);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const auto& j = nodes[k];
      if (j.at("id").get<int>() != static_cast<int>(k)) throw fail("node ids must be 0..n-1 in order");
      const int parent = j.at("parent").get<int>();
      const int action = j.at("action").get<int>();
      if (k == 0) {
        if (parent != kNone) throw fail("node 0 must be the root");
      } else {
        if (parent < 0 || parent >= static_cast<int>(k)) throw fail("node " + std::to_string(k) + " has an invalid parent");
        if (action != child_count[parent]) throw fail("node " + std::to_string(k) + " is out of action order");
        ++child_count[parent];
      }
      const NodeId parent_id = parent == kNone ? kNone : built[parent];
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "chance") {
        built[k] = builder.add_chance(parent_id, j.at("probs").get<std::vector<double>>());
      } else if (kind == "decision") {
        const int id = j.at("infoset").get<int>();
        if (id < 0 || id >= static_cast<int>(info.size())) throw fail("node references an unknown infoset");
        if (j.at("player").get<int>() != info[id].player) throw fail("node player differs from its infoset");
        built[k] = builder.add_decision(parent_id, info[id].player, info[id].name, info[id].actions);
      } else if (kind == "terminal") {
        auto u = j.at("payoffs").get<std::vector<double>>();
        if (static_cast<int>(u.size()) != num_players) throw fail("terminal payoff arity mismatch");
        built[k] = builder.add_terminal(parent_id, std::move(u));
      } else {
        throw fail("unknown node kind \"" + kind + "\"");
      }
    }
    GameTree tree = builder.build();
    if (tree.num_infosets() != static_cast<int>(info.size())) throw fail("unused infoset entries");
    return tree;
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  } catch (const InvalidArgument& e) {
    throw fail(e.what());
  }
}

inline void save_game(const GameTree& tree, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << game_to_json(tree).dump(1) << '\n';
  if (!out) throw Error("failed writing " + path);
}

inline GameTree load_game(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
  try {
    return game_from_json(doc);
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

}  // namespace cce
