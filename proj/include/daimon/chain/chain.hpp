#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "daimon/chain/block.hpp"
#include "daimon/chain/token.hpp"
#include "daimon/common/errors.hpp"
#include "daimon/numerics/beta.hpp"
#include "daimon/poi/blob_store.hpp"

namespace daimon::chain {

/// R(d, d_c) = I_{1-d}(a, 1/2) - I_{1-d_c}(a, 1/2). Strictly positive for any
/// real improvement; R(d_c, d_c) = 0 at the boundary.
inline double reward(double d, double d_c, double a) {
  if (!(a > 0.0)) throw ContractViolation("reward: shape parameter a must be > 0");
  if (d < 0.0 || d_c > 1.0 || d > d_c)
    throw ContractViolation("reward: need 0 <= d <= d_c <= 1");
  return numerics::reg_inc_beta(1.0 - d, a, 0.5) - numerics::reg_inc_beta(1.0 - d_c, a, 0.5);
}

/// The s-th validator of a committed block earns base * 2^{-s}.
inline double validator_reward(double base, std::uint32_t s) {
  if (s < 1) throw ContractViolation("validator_reward: position must be >= 1");
  return std::ldexp(base, -static_cast<int>(s));
}

struct VoteRecord {
  std::uint64_t tick = 0;
  std::uint64_t seq = 0;  // global arrival order
  poi::VerificationProof proof;
};

struct Submission {
  poi::PoiProof proof;
  poi::Digest proof_digest{};
  poi::Digest model_digest{};
  std::uint64_t first_tick = 0;
  std::vector<VoteRecord> votes;
};

/// Votes with duplicate verifier addresses removed, earliest kept.
inline std::vector<VoteRecord> unique_votes(const Submission& s) {
  std::vector<VoteRecord> out;
  for (const auto& v : s.votes) {
    auto addr = v.proof.verifier_address();
    bool seen = false;
    for (const auto& u : out)
      if (u.proof.verifier_address() == addr) {
        seen = true;
        break;
      }
    if (!seen) out.push_back(v);
  }
  return out;
}

/// Winner: highest count of unique verification proofs; ties broken by the
/// earliest first-submission tick, then the lexicographically smallest model
/// digest. Returns the index into `subs`, or nothing if empty.
inline std::optional<std::size_t> tally(std::span<const Submission> subs) {
  std::optional<std::size_t> best;
  std::size_t best_count = 0;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    std::size_t count = unique_votes(subs[i]).size();
    if (!best) {
      best = i;
      best_count = count;
      continue;
    }
    const Submission& cur = subs[*best];
    if (count > best_count ||
        (count == best_count &&
         (subs[i].first_tick < cur.first_tick ||
          (subs[i].first_tick == cur.first_tick &&
           subs[i].model_digest < cur.model_digest)))) {
      best = i;
      best_count = count;
    }
  }
  return best;
}

enum class EventKind : std::uint8_t {
  SubmitTuple,
  RegisterDigest,
  ReleaseModel,
  SubmitProof,
  SubmitVote,
  CommitProblem,
  CommitImprovement,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::SubmitTuple: return "submit_tuple";
    case EventKind::RegisterDigest: return "register_digest";
    case EventKind::ReleaseModel: return "release_model";
    case EventKind::SubmitProof: return "submit_proof";
    case EventKind::SubmitVote: return "submit_vote";
    case EventKind::CommitProblem: return "commit_problem";
    case EventKind::CommitImprovement: return "commit_improvement";
  }
  return "?";
}

inline std::optional<EventKind> event_kind_from_string(std::string_view s) {
  for (auto k : {EventKind::SubmitTuple, EventKind::RegisterDigest, EventKind::ReleaseModel,
                 EventKind::SubmitProof, EventKind::SubmitVote, EventKind::CommitProblem,
                 EventKind::CommitImprovement})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

/// One entry of the ordered event log. Payload encodings by kind:
///   submit_tuple       TestTuple canonical bytes
///   register_digest    32-byte model digest
///   release_model      32-byte model digest (content must be in the store)
///   submit_proof       PoiProof canonical bytes
///   submit_vote        VerificationProof canonical bytes
///   commit_problem     ProblemDefinition canonical bytes
///   commit_improvement empty
struct Event {
  std::uint64_t tick = 0;
  poi::Address actor{};
  EventKind kind = EventKind::SubmitTuple;
  Bytes payload;

  poi::Digest payload_digest() const { return poi::digest(payload); }
};

struct ApplyOutcome {
  bool accepted = false;
  std::string reject_reason;              // empty when accepted
  std::optional<poi::Digest> block_hash;  // set when a block was committed
  bool empty_period = false;              // commit_improvement with no winner

  std::string describe() const {
    if (!accepted) return "rejected:" + reject_reason;
    if (block_hash) return "block:" + poi::hex(*block_hash);
    if (empty_period) return "empty_period";
    return "accepted";
  }
};

/// The DaiMoN ledger state machine. All mutation flows through apply(), in
/// event order; replaying the same events against the same blob store
/// reproduces the same blocks bit for bit.
class Chain {
 public:
  explicit Chain(ConsensusParams params) : params_(params) {
    params_.validate();
    best_distance_ = params_.initial_distance;
  }

  const ConsensusParams& params() const { return params_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  double best_distance() const { return best_distance_; }
  const std::map<poi::Address, TokenAmount>& balances() const { return balances_; }
  const std::vector<Submission>& pending_submissions() const { return submissions_; }
  bool problem_committed() const { return !blocks_.empty(); }

  /// The tuple improvement proofs are scored against (first tuple of the
  /// problem block, in canonical order).
  const TestTuple& scoring_tuple() const {
    if (blocks_.empty()) throw ContractViolation("scoring_tuple: no problem block yet");
    return std::get<ProblemBlock>(blocks_.front()).tuples.front();
  }

  ApplyOutcome apply(const Event& ev, const poi::BlobStore& store) {
    if (ev.tick < last_tick_) return reject("NonMonotonicTick");
    last_tick_ = ev.tick;
    switch (ev.kind) {
      case EventKind::SubmitTuple: return on_submit_tuple(ev, store);
      case EventKind::RegisterDigest: return on_register_digest(ev);
      case EventKind::ReleaseModel: return on_release_model(ev, store);
      case EventKind::SubmitProof: return on_submit_proof(ev, store);
      case EventKind::SubmitVote: return on_submit_vote(ev);
      case EventKind::CommitProblem: return on_commit_problem(ev, store);
      case EventKind::CommitImprovement: return on_commit_improvement(ev);
    }
    return reject("UnknownEventKind");
  }

  /// Full integrity walk: recomputes every hash and parent link.
  struct IntegrityReport {
    bool ok = true;
    std::size_t first_bad_index = 0;
    std::string reason;
  };

  static IntegrityReport verify_blocks(std::span<const Block> blocks) {
    poi::Digest prev{};
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const Block& b = blocks[i];
      if (block_number(b) != i) return {false, i, "BadBlockNumber"};
      if (i == 0 && !std::holds_alternative<ProblemBlock>(b))
        return {false, i, "ChainMustStartWithProblemBlock"};
      if (i > 0 && !std::holds_alternative<ImprovementBlock>(b))
        return {false, i, "DuplicateProblemBlock"};
      if (block_parent(b) != prev) return {false, i, "ParentHashMismatch"};
      if (block_compute_hash(b) != block_hash(b)) return {false, i, "BlockHashMismatch"};
      prev = block_hash(b);
    }
    return {};
  }

  IntegrityReport verify() const { return verify_blocks(blocks_); }

  /// Rebuilds a chain by replaying an event log against a blob store.
  static Chain replay(const ConsensusParams& params, std::span<const Event> events,
                      const poi::BlobStore& store) {
    Chain c(params);
    for (const auto& ev : events) c.apply(ev, store);
    return c;
  }

 private:
  static ApplyOutcome reject(std::string reason) { return {false, std::move(reason), {}, false}; }
  static ApplyOutcome accept() { return {true, {}, {}, false}; }

  ApplyOutcome on_submit_tuple(const Event& ev, const poi::BlobStore& store) {
    if (problem_committed()) return reject("ProblemAlreadyCommitted");
    TestTuple t;
    try {
      ByteReader r(ev.payload);
      t = TestTuple::decode(r);
      r.expect_end();
    } catch (const std::exception&) {
      return reject("BadTupleEncoding");
    }
    if (auto reason = tuple_problem(t, store); !reason.empty()) return reject(reason);
    pending_tuples_.push_back({ev.tick, t});
    return accept();
  }

  ApplyOutcome on_register_digest(const Event& ev) {
    if (!problem_committed()) return reject("NoProblemBlock");
    if (ev.payload.size() != 32) return reject("BadDigestEncoding");
    poi::Digest d;
    std::copy(ev.payload.begin(), ev.payload.end(), d.begin());
    registered_.try_emplace(d, ev.tick);  // first registration wins
    return accept();
  }

  ApplyOutcome on_release_model(const Event& ev, const poi::BlobStore& store) {
    if (!problem_committed()) return reject("NoProblemBlock");
    if (ev.payload.size() != 32) return reject("BadDigestEncoding");
    poi::Digest d;
    std::copy(ev.payload.begin(), ev.payload.end(), d.begin());
    auto reg = registered_.find(d);
    if (reg == registered_.end()) return reject("DigestNotRegistered");
    if (ev.tick <= reg->second) return reject("DigestFirstViolation");
    if (!store.contains(d)) return reject("BlobMissing");
    released_.try_emplace(d, ev.tick);
    return accept();
  }

  ApplyOutcome on_submit_proof(const Event& ev, const poi::BlobStore& store) {
    if (!problem_committed()) return reject("NoProblemBlock");
    poi::PoiProof p;
    try {
      p = poi::PoiProof::decode(ev.payload);
    } catch (const std::exception&) {
      return reject("BadProofEncoding");
    }
    if (registered_.find(p.model_digest) == registered_.end())
      return reject("DigestNotRegistered");
    if (released_.find(p.model_digest) == released_.end()) return reject("ModelNotReleased");
    if (!store.contains(p.model_digest)) return reject("BlobMissing");
    if (p.y.size() != scoring_tuple().y_t.size()) return reject("EmbeddingDimensionMismatch");
    poi::Digest pd = poi::digest(ev.payload);
    for (const auto& s : submissions_)
      if (s.proof_digest == pd) return reject("DuplicateSubmission");
    submissions_.push_back({p, pd, p.model_digest, ev.tick, {}});
    return accept();
  }

  ApplyOutcome on_submit_vote(const Event& ev) {
    if (!problem_committed()) return reject("NoProblemBlock");
    poi::VerificationProof v;
    try {
      v = poi::VerificationProof::decode(ev.payload);
    } catch (const std::exception&) {
      return reject("BadVoteEncoding");
    }
    if (!poi::verify_signature(v.verifier_pk, v.body_bytes(), v.signature))
      return reject("BadVoteSignature");
    if (v.current_distance != best_distance_ || v.delta != params_.delta)
      return reject("StaleVote");
    poi::Digest inner_digest = poi::digest(v.inner.canonical_bytes());
    for (auto& s : submissions_) {
      if (s.proof_digest == inner_digest) {
        s.votes.push_back({ev.tick, next_vote_seq_++, std::move(v)});
        return accept();
      }
    }
    return reject("UnknownProof");
  }

  ApplyOutcome on_commit_problem(const Event& ev, const poi::BlobStore& store) {
    if (problem_committed()) return reject("ProblemAlreadyCommitted");
    if (ev.tick < params_.t_p) return reject("ProblemPeriodStillOpen");
    if (pending_tuples_.empty()) return reject("EmptyTupleList");
    ProblemDefinition def;
    try {
      ByteReader r(ev.payload);
      def = ProblemDefinition::decode(r);
      r.expect_end();
      def.validate();
    } catch (const std::exception&) {
      return reject("BadDefinitionEncoding");
    }
    for (const auto& [tick, t] : pending_tuples_)
      if (auto reason = tuple_problem(t, store); !reason.empty()) return reject(reason);

    ProblemBlock b;
    b.number = 0;
    b.parent = poi::kZeroDigest;
    b.definition = def;
    // Canonical tuple order: submission tick, then tuple digest.
    auto sorted = pending_tuples_;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return a.second.tuple_digest() < b.second.tuple_digest();
    });
    for (auto& [tick, t] : sorted) b.tuples.push_back(std::move(t));
    b.hash = b.compute_hash();
    blocks_.push_back(b);
    pending_tuples_.clear();
    ApplyOutcome out = accept();
    out.block_hash = b.hash;
    return out;
  }

  ApplyOutcome on_commit_improvement(const Event&) {
    if (!problem_committed()) return reject("NoProblemBlock");
    auto winner_idx = tally(submissions_);
    // A proof with zero votes cannot win: votes are what commit a block.
    if (winner_idx && unique_votes(submissions_[*winner_idx]).empty()) winner_idx.reset();
    if (!winner_idx) {
      submissions_.clear();
      ApplyOutcome out = accept();
      out.empty_period = true;
      return out;
    }
    const Submission& winner = submissions_[*winner_idx];
    double d = del::distance(winner.proof.y, scoring_tuple().y_t);
    if (!(d < best_distance_ - params_.delta)) {
      submissions_.clear();
      return reject("InsufficientImprovement");
    }

    ImprovementBlock b;
    b.number = blocks_.size();
    b.parent = block_hash(blocks_.back());
    b.winner = winner.proof;
    for (auto& v : unique_votes(winner)) b.votes.push_back(v.proof);
    b.distance = d;
    b.hash = b.compute_hash();

    double base = reward(d, best_distance_, params_.reward_shape_a);
    balances_[winner.proof.prover_address()] += TokenAmount::from_real(base);
    for (std::size_t s = 0; s < b.votes.size(); ++s)
      balances_[b.votes[s].verifier_address()] +=
          TokenAmount::from_real(validator_reward(base, static_cast<std::uint32_t>(s + 1)));

    best_distance_ = d;
    blocks_.push_back(b);
    submissions_.clear();
    ApplyOutcome out = accept();
    out.block_hash = b.hash;
    return out;
  }

  /// Empty string when the tuple is acceptable.
  std::string tuple_problem(const TestTuple& t, const poi::BlobStore& store) const {
    if (!store.contains(t.z_ref) || !store.contains(t.f_ref)) return "BlobMissing";
    if (t.y_t.empty()) return "EmptyEmbedding";
    double n2 = 0.0;
    for (double v : t.y_t) n2 += v * v;
    if (std::fabs(std::sqrt(n2) - 1.0) > 1e-9) return "EmbeddingNotUnitNorm";
    auto blob = store.get(t.f_ref);
    try {
      del::DelModel f = del::del_model_from_bytes(*blob);
      if (f.embed_dim != t.y_t.size()) return "TupleDimensionMismatch";
    } catch (const std::exception&) {
      return "BadDelModelBlob";
    }
    return "";
  }

  ConsensusParams params_;
  std::vector<Block> blocks_;
  double best_distance_ = 1.0;
  std::map<poi::Address, TokenAmount> balances_;
  std::vector<std::pair<std::uint64_t, TestTuple>> pending_tuples_;  // (tick, tuple)
  std::map<poi::Digest, std::uint64_t> registered_;                  // model digest -> tick
  std::map<poi::Digest, std::uint64_t> released_;
  std::vector<Submission> submissions_;
  std::uint64_t next_vote_seq_ = 0;
  std::uint64_t last_tick_ = 0;
};

}  // namespace daimon::chain
