#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "daimon/chain/block.hpp"
#include "daimon/chain/chain.hpp"

namespace daimon::chain {

/// Ledger file: one JSON document per line, one block per document. Hashes in
/// the file are over the canonical binary encoding, never the JSON.
inline void save_blocks_jsonl(std::ostream& os, std::span<const Block> blocks) {
  for (const auto& b : blocks) os << block_to_json(b).dump() << "\n";
}

inline void save_blocks_jsonl(const std::string& path, std::span<const Block> blocks) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_blocks_jsonl(os, blocks);
}

inline std::vector<Block> load_blocks_jsonl(std::istream& is) {
  std::vector<Block> blocks;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    blocks.push_back(block_from_json(nlohmann::json::parse(line)));
  }
  return blocks;
}

inline std::vector<Block> load_blocks_jsonl(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return load_blocks_jsonl(is);
}

// --- event log lines ---------------------------------------------------------

inline nlohmann::json event_to_json(const Event& ev, const std::string& outcome) {
  return {{"tick", ev.tick},
          {"actor", to_hex(ev.actor)},
          {"kind", to_string(ev.kind)},
          {"payload", to_hex(ev.payload)},
          {"payload_digest", poi::hex(ev.payload_digest())},
          {"outcome", outcome}};
}

inline std::pair<Event, std::string> event_from_json(const nlohmann::json& j) {
  Event ev;
  ev.tick = j.at("tick").get<std::uint64_t>();
  auto actor = from_hex(j.at("actor").get<std::string>());
  if (actor.size() != ev.actor.size()) throw std::runtime_error("event: bad actor address");
  std::copy(actor.begin(), actor.end(), ev.actor.begin());
  auto kind = event_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("event: unknown kind");
  ev.kind = *kind;
  ev.payload = from_hex(j.at("payload").get<std::string>());
  return {std::move(ev), j.at("outcome").get<std::string>()};
}

}  // namespace daimon::chain
