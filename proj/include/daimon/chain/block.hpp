#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "daimon/common/bytes.hpp"
#include "daimon/common/errors.hpp"
#include "daimon/common/strings.hpp"
#include "daimon/del/del.hpp"
#include "daimon/poi/digest.hpp"
#include "daimon/poi/proof.hpp"
#include "json.hpp"

namespace daimon::chain {

struct ProblemDefinition {
  std::string id;
  std::string input_spec;         // free-form description of the input space
  std::int32_t num_classes = 0;   // C
  std::uint64_t label_count = 0;  // m

  void validate() const {
    if (num_classes < 2) throw ContractViolation("ProblemDefinition: need >= 2 classes");
    if (label_count < 1) throw ContractViolation("ProblemDefinition: need >= 1 label");
  }

  void encode(ByteWriter& w) const {
    w.str(id);
    w.str(input_spec);
    w.i32(num_classes);
    w.u64(label_count);
  }

  static ProblemDefinition decode(ByteReader& r) {
    ProblemDefinition d;
    d.id = r.str();
    d.input_spec = r.str();
    d.num_classes = r.i32();
    d.label_count = r.u64();
    return d;
  }

  Bytes canonical_bytes() const {
    ByteWriter w;
    encode(w);
    return w.take();
  }

  nlohmann::json to_json() const {
    return {{"id", id},
            {"input_spec", input_spec},
            {"num_classes", num_classes},
            {"label_count", label_count}};
  }

  static ProblemDefinition from_json(const nlohmann::json& j) {
    ProblemDefinition d;
    d.id = j.at("id").get<std::string>();
    d.input_spec = j.at("input_spec").get<std::string>();
    d.num_classes = j.at("num_classes").get<std::int32_t>();
    d.label_count = j.at("label_count").get<std::uint64_t>();
    return d;
  }

  bool operator==(const ProblemDefinition&) const = default;
};

/// One test dataset tuple: references to the test-input and DEL-function
/// blobs, plus the embedded true label vector y_t = f(x_t). The labels
/// themselves never appear here.
struct TestTuple {
  poi::Digest z_ref{};  // test inputs blob
  poi::Digest f_ref{};  // serialized DEL model blob
  del::Embedding y_t;

  void encode(ByteWriter& w) const {
    w.raw(z_ref);
    w.raw(f_ref);
    w.f64_vec(y_t);
  }

  static TestTuple decode(ByteReader& r) {
    TestTuple t;
    for (auto& b : t.z_ref) b = r.u8();
    for (auto& b : t.f_ref) b = r.u8();
    t.y_t = r.f64_vec();
    return t;
  }

  Bytes canonical_bytes() const {
    ByteWriter w;
    encode(w);
    return w.take();
  }

  poi::Digest tuple_digest() const { return poi::digest(canonical_bytes()); }

  nlohmann::json to_json() const {
    nlohmann::json ys = nlohmann::json::array();
    for (double v : y_t) ys.push_back(double_to_string(v));
    return {{"z_ref", poi::hex(z_ref)}, {"f_ref", poi::hex(f_ref)}, {"y_t", ys}};
  }

  static TestTuple from_json(const nlohmann::json& j) {
    TestTuple t;
    t.z_ref = poi::digest_from_hex(j.at("z_ref").get<std::string>());
    t.f_ref = poi::digest_from_hex(j.at("f_ref").get<std::string>());
    for (const auto& s : j.at("y_t")) t.y_t.push_back(double_from_string(s.get<std::string>()));
    return t;
  }

  bool operator==(const TestTuple&) const = default;
};

struct ProblemBlock {
  std::uint64_t number = 0;
  poi::Digest parent{};
  ProblemDefinition definition;
  std::vector<TestTuple> tuples;
  poi::Digest hash{};

  /// Canonical encoding of everything the hash covers.
  Bytes preimage_bytes() const {
    ByteWriter w;
    w.u8(0);  // block type tag
    w.u64(number);
    w.raw(parent);
    definition.encode(w);
    w.u64(tuples.size());
    for (const auto& t : tuples) t.encode(w);
    return w.take();
  }

  poi::Digest compute_hash() const { return poi::digest(preimage_bytes()); }
};

struct ImprovementBlock {
  std::uint64_t number = 0;
  poi::Digest parent{};
  poi::PoiProof winner;
  std::vector<poi::VerificationProof> votes;  // unique verifiers, arrival order
  double distance = 0.0;                      // achieved d
  poi::Digest hash{};

  Bytes preimage_bytes() const {
    ByteWriter w;
    w.u8(1);
    w.u64(number);
    w.raw(parent);
    w.bytes(winner.canonical_bytes());
    w.u64(votes.size());
    for (const auto& v : votes) w.bytes(v.canonical_bytes());
    w.f64(distance);
    return w.take();
  }

  poi::Digest compute_hash() const { return poi::digest(preimage_bytes()); }
};

using Block = std::variant<ProblemBlock, ImprovementBlock>;

inline std::uint64_t block_number(const Block& b) {
  return std::visit([](const auto& x) { return x.number; }, b);
}

inline const poi::Digest& block_parent(const Block& b) {
  return std::visit([](const auto& x) -> const poi::Digest& { return x.parent; }, b);
}

inline const poi::Digest& block_hash(const Block& b) {
  return std::visit([](const auto& x) -> const poi::Digest& { return x.hash; }, b);
}

inline poi::Digest block_compute_hash(const Block& b) {
  return std::visit([](const auto& x) { return x.compute_hash(); }, b);
}

struct ConsensusParams {
  std::uint64_t t_p = 4;          // problem definition period, in ticks
  std::uint64_t t_b = 8;          // competition period, in ticks
  double delta = 0.005;           // improvement margin
  double reward_shape_a = 3.0;    // a in the reward function
  double initial_distance = 1.0;  // best distance before any improvement

  void validate() const {
    if (t_p < 1 || t_b < 1) throw ContractViolation("ConsensusParams: periods must be >= 1");
    if (delta < 0.0) throw ContractViolation("ConsensusParams: delta must be >= 0");
    if (!(reward_shape_a > 0.0)) throw ContractViolation("ConsensusParams: a must be > 0");
    if (!(initial_distance > 0.0) || initial_distance > 1.0)
      throw ContractViolation("ConsensusParams: initial distance must lie in (0, 1]");
  }

  nlohmann::json to_json() const {
    return {{"t_p", t_p},
            {"t_b", t_b},
            {"delta", delta},
            {"reward_shape_a", reward_shape_a},
            {"initial_distance", initial_distance}};
  }

  static ConsensusParams from_json(const nlohmann::json& j) {
    ConsensusParams p;
    p.t_p = j.value("t_p", p.t_p);
    p.t_b = j.value("t_b", p.t_b);
    p.delta = j.value("delta", p.delta);
    p.reward_shape_a = j.value("reward_shape_a", p.reward_shape_a);
    p.initial_distance = j.value("initial_distance", p.initial_distance);
    return p;
  }
};

// --- block <-> JSON (ledger file lines) -------------------------------------

inline nlohmann::json block_to_json(const Block& b) {
  if (const auto* p = std::get_if<ProblemBlock>(&b)) {
    nlohmann::json ts = nlohmann::json::array();
    for (const auto& t : p->tuples) ts.push_back(t.to_json());
    return {{"type", "problem"},
            {"number", p->number},
            {"parent", poi::hex(p->parent)},
            {"definition", p->definition.to_json()},
            {"tuples", ts},
            {"hash", poi::hex(p->hash)}};
  }
  const auto& i = std::get<ImprovementBlock>(b);
  nlohmann::json vs = nlohmann::json::array();
  for (const auto& v : i.votes) vs.push_back(v.debug_json());
  return {{"type", "improvement"},
          {"number", i.number},
          {"parent", poi::hex(i.parent)},
          {"proof", i.winner.debug_json()},
          {"votes", vs},
          {"distance", double_to_string(i.distance)},
          {"hash", poi::hex(i.hash)}};
}

inline Block block_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "problem") {
    ProblemBlock p;
    p.number = j.at("number").get<std::uint64_t>();
    p.parent = poi::digest_from_hex(j.at("parent").get<std::string>());
    p.definition = ProblemDefinition::from_json(j.at("definition"));
    for (const auto& t : j.at("tuples")) p.tuples.push_back(TestTuple::from_json(t));
    p.hash = poi::digest_from_hex(j.at("hash").get<std::string>());
    return p;
  }
  if (type == "improvement") {
    ImprovementBlock i;
    i.number = j.at("number").get<std::uint64_t>();
    i.parent = poi::digest_from_hex(j.at("parent").get<std::string>());
    i.winner = poi::PoiProof::from_debug_json(j.at("proof"));
    for (const auto& v : j.at("votes"))
      i.votes.push_back(poi::VerificationProof::from_debug_json(v));
    i.distance = double_from_string(j.at("distance").get<std::string>());
    i.hash = poi::digest_from_hex(j.at("hash").get<std::string>());
    return i;
  }
  throw std::runtime_error("block_from_json: unknown block type '" + type + "'");
}

}  // namespace daimon::chain
