#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "daimon/chain/chain.hpp"
#include "daimon/chain/persist.hpp"
#include "daimon/del/del.hpp"
#include "daimon/poi/blob_store.hpp"
#include "daimon/poi/proof.hpp"
#include "json.hpp"

namespace daimon::sim {

/// Synthetic stand-in for a trained classifier: predicted labels at an exact
/// error rate against x_t. Flips round(target_error * m) uniformly chosen
/// positions to a uniformly chosen different class.
inline poi::ModelArtifact synth_model(const del::LabelVector& x_t, double target_error,
                                      Rng& rng, std::string metadata = "") {
  if (target_error < 0.0 || target_error > 1.0)
    throw ContractViolation("synth_model: target_error must lie in [0, 1]");
  const std::size_t m = x_t.labels.size();
  const auto flips = static_cast<std::size_t>(
      std::llround(target_error * static_cast<double>(m)));
  poi::ModelArtifact model;
  model.predicted_labels = x_t;
  model.metadata = std::move(metadata);
  std::vector<std::uint32_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0u);
  for (std::size_t i = 0; i < flips; ++i) {
    auto j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(m - 1)));
    std::swap(idx[i], idx[j]);
    std::int32_t old = x_t.labels[idx[i]];
    auto pick = static_cast<std::int32_t>(rng.uniform_int(1, x_t.num_classes - 1));
    model.predicted_labels.labels[idx[i]] = pick < old ? pick : pick + 1;
  }
  return model;
}

struct AdversaryToggles {
  bool bad_signature = false;
  bool non_improving = false;
  bool duplicate_vote = false;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  chain::ConsensusParams consensus;
  std::size_t num_contributors = 1;
  std::size_t num_validators = 2;
  std::vector<std::vector<double>> improver_schedules;  // target error per period
  std::size_t periods = 1;
  std::size_t m = 1000;
  std::size_t n = 64;
  std::int32_t num_classes = 10;
  del::DelTrainConfig del_train;
  AdversaryToggles adversaries;

  void validate() const {
    consensus.validate();
    if (num_contributors < 1)
      throw ContractViolation("scenario: need at least one problem contributor");
    if (periods < 1) throw ContractViolation("scenario: need at least one period");
    if (m < 2 || n < 1 || n >= m) throw ContractViolation("scenario: need 1 <= n < m");
    if (num_classes < 2) throw ContractViolation("scenario: need at least 2 classes");
    del_train.validate();
    for (const auto& sched : improver_schedules)
      for (double e : sched)
        if (e < 0.0 || e > 1.0)
          throw ContractViolation("scenario: schedule error rates must lie in [0, 1]");
    // Per-period tick layout: register, release, proof, one vote tick per
    // validator, then the commit tick.
    if (consensus.t_b < num_validators + 5)
      throw ContractViolation("scenario: t_b must be at least num_validators + 5");
  }

  nlohmann::json to_json() const {
    nlohmann::json improvers = nlohmann::json::array();
    for (const auto& s : improver_schedules) improvers.push_back(s);
    return {{"seed", seed},
            {"consensus", consensus.to_json()},
            {"num_contributors", num_contributors},
            {"num_validators", num_validators},
            {"improvers", improvers},
            {"periods", periods},
            {"del",
             {{"m", m},
              {"n", n},
              {"num_classes", num_classes},
              {"hidden", del_train.hidden},
              {"epochs", del_train.epochs},
              {"samples_per_epoch", del_train.samples_per_epoch},
              {"batch", del_train.batch},
              {"learning_rate", del_train.learning_rate}}},
            {"adversaries",
             {{"bad_signature", adversaries.bad_signature},
              {"non_improving", adversaries.non_improving},
              {"duplicate_vote", adversaries.duplicate_vote}}}};
  }

  static ScenarioConfig from_json(const nlohmann::json& j) {
    ScenarioConfig c;
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("consensus")) c.consensus = chain::ConsensusParams::from_json(j.at("consensus"));
    c.num_contributors = j.value("num_contributors", c.num_contributors);
    c.num_validators = j.value("num_validators", c.num_validators);
    if (j.contains("improvers"))
      for (const auto& s : j.at("improvers"))
        c.improver_schedules.push_back(s.get<std::vector<double>>());
    c.periods = j.value("periods", c.periods);
    if (j.contains("del")) {
      const auto& d = j.at("del");
      c.m = d.value("m", c.m);
      c.n = d.value("n", c.n);
      c.num_classes = d.value("num_classes", c.num_classes);
      c.del_train.hidden = d.value("hidden", c.del_train.hidden);
      c.del_train.epochs = d.value("epochs", c.del_train.epochs);
      c.del_train.samples_per_epoch = d.value("samples_per_epoch", c.del_train.samples_per_epoch);
      c.del_train.batch = d.value("batch", c.del_train.batch);
      c.del_train.learning_rate = d.value("learning_rate", c.del_train.learning_rate);
    }
    if (j.contains("adversaries")) {
      const auto& a = j.at("adversaries");
      c.adversaries.bad_signature = a.value("bad_signature", false);
      c.adversaries.non_improving = a.value("non_improving", false);
      c.adversaries.duplicate_vote = a.value("duplicate_vote", false);
    }
    return c;
  }
};

/// One line of the scenario audit log. Chain events carry their payload so
/// the log alone (plus the blob store) replays into the same chain; entries
/// from validator-side verification are informational.
struct TraceEntry {
  std::uint64_t tick = 0;
  poi::Address actor{};
  std::string kind;
  poi::Digest payload_digest{};
  Bytes payload;
  std::string outcome;

  bool is_chain_event() const { return chain::event_kind_from_string(kind).has_value(); }
};

struct PeriodStat {
  std::size_t period = 0;
  bool has_winner = false;
  poi::Address winner{};
  double distance = 0.0;
  double true_error = 0.0;
  double reward_real = 0.0;
  std::size_t vote_count = 0;
};

struct ScenarioTrace {
  std::vector<TraceEntry> events;
  std::vector<chain::Block> blocks;
  std::map<poi::Address, chain::TokenAmount> balances;
  std::vector<PeriodStat> periods;
  // Harness-side context; never visible to validators.
  del::LabelVector x_t;
  del::DelModel del_model;
  del::Embedding y_t;
  std::map<std::string, poi::Address> actors;
};

/// Extracts the chain events of a trace for replay.
inline std::vector<chain::Event> chain_events(const ScenarioTrace& trace) {
  std::vector<chain::Event> events;
  for (const auto& e : trace.events) {
    auto kind = chain::event_kind_from_string(e.kind);
    if (!kind) continue;
    events.push_back({e.tick, e.actor, *kind, e.payload});
  }
  return events;
}

namespace detail {

struct Peer {
  std::string name;
  poi::PeerIdentity id;
};

}  // namespace detail

/// Runs the full consensus flow on a deterministic tick loop: a designated
/// contributor trains the DEL and publishes the test tuple, improvers submit
/// PoI proofs for synthetic models along their error schedules, validators
/// verify and vote for the best valid proof, a single committer commits
/// blocks, rewards accrue. Adversary toggles add a corrupted-signature
/// submitter, a copycat (non-improving) submitter, and a duplicate voter.
inline ScenarioTrace run_scenario(const ScenarioConfig& cfg, poi::BlobStore& store) {
  cfg.validate();
  Rng root(cfg.seed);

  ScenarioTrace trace;
  chain::Chain chain(cfg.consensus);

  // Identities.
  std::vector<detail::Peer> contributors, improvers, validators;
  for (std::size_t i = 0; i < cfg.num_contributors; ++i) {
    Rng r = root.split(0x100 + i);
    contributors.push_back({"contributor" + std::to_string(i), poi::keygen(r)});
  }
  for (std::size_t i = 0; i < cfg.improver_schedules.size(); ++i) {
    Rng r = root.split(0x200 + i);
    improvers.push_back({"improver" + std::to_string(i), poi::keygen(r)});
  }
  for (std::size_t j = 0; j < cfg.num_validators; ++j) {
    Rng r = root.split(0x300 + j);
    validators.push_back({"validator" + std::to_string(j), poi::keygen(r)});
  }
  Rng committer_rng = root.split(0x400);
  detail::Peer committer{"committer", poi::keygen(committer_rng)};
  Rng bad_sig_rng = root.split(0x500);
  detail::Peer adv_bad_sig{"adv_bad_signature", poi::keygen(bad_sig_rng)};
  Rng non_imp_rng = root.split(0x501);
  detail::Peer adv_non_improving{"adv_non_improving", poi::keygen(non_imp_rng)};

  for (const auto& p : contributors) trace.actors[p.name] = p.id.address;
  for (const auto& p : improvers) trace.actors[p.name] = p.id.address;
  for (const auto& p : validators) trace.actors[p.name] = p.id.address;
  trace.actors[committer.name] = committer.id.address;
  if (cfg.adversaries.bad_signature) trace.actors[adv_bad_sig.name] = adv_bad_sig.id.address;
  if (cfg.adversaries.non_improving)
    trace.actors[adv_non_improving.name] = adv_non_improving.id.address;

  // Problem setup by the designated contributor: true labels, trained DEL.
  Rng xt_rng = root.split(1);
  trace.x_t = del::random_labels(cfg.m, cfg.num_classes, xt_rng);
  del::DelTrainConfig del_cfg = cfg.del_train;
  del_cfg.seed = root.split(2).seed();
  trace.del_model = del::train_del(trace.x_t, cfg.n, del_cfg).model;
  trace.y_t = trace.del_model.embed(trace.x_t);

  nlohmann::json z_doc = {{"m", cfg.m},
                          {"num_classes", cfg.num_classes},
                          {"description", "synthetic test inputs"}};
  poi::Digest z_ref = store.put(str_bytes(z_doc.dump()));
  poi::Digest f_ref = store.put(del::del_model_bytes(trace.del_model));

  auto emit = [&](std::uint64_t tick, const poi::Address& actor, chain::EventKind kind,
                  Bytes payload) {
    chain::Event ev{tick, actor, kind, std::move(payload)};
    auto outcome = chain.apply(ev, store);
    trace.events.push_back({ev.tick, ev.actor, chain::to_string(ev.kind),
                            ev.payload_digest(), ev.payload, outcome.describe()});
    return outcome;
  };
  auto info = [&](std::uint64_t tick, const poi::Address& actor, std::string kind,
                  const poi::Digest& subject, std::string outcome) {
    trace.events.push_back(
        {tick, actor, std::move(kind), subject, {}, std::move(outcome)});
  };

  // Problem definition period.
  chain::TestTuple tuple{z_ref, f_ref, trace.y_t};
  emit(0, contributors[0].id.address, chain::EventKind::SubmitTuple, tuple.canonical_bytes());

  chain::ProblemDefinition def;
  def.id = "problem-0";
  def.input_spec = "synthetic inputs, one per test case";
  def.num_classes = cfg.num_classes;
  def.label_count = cfg.m;
  emit(cfg.consensus.t_p, committer.id.address, chain::EventKind::CommitProblem,
       def.canonical_bytes());

  // Validators work from the published tuple, exactly as a real peer would.
  del::DelModel published_f =
      del::del_model_from_bytes(*store.get(chain.scoring_tuple().f_ref));
  const del::Embedding& y_t = chain.scoring_tuple().y_t;

  std::map<poi::Digest, del::LabelVector> labels_by_model;  // harness bookkeeping
  std::optional<del::LabelVector> reigning_labels;          // current best model's labels

  std::vector<Rng> improver_rngs;
  for (std::size_t i = 0; i < improvers.size(); ++i) improver_rngs.push_back(root.split(0x600 + i));
  Rng adv_model_rng = root.split(0x700);

  for (std::size_t period = 0; period < cfg.periods; ++period) {
    const std::uint64_t p0 = cfg.consensus.t_p + period * cfg.consensus.t_b;
    const double best_before = chain.best_distance();

    struct PlannedSubmission {
      detail::Peer* peer;
      poi::ModelArtifact model;
      bool corrupt_signature = false;
    };
    std::vector<PlannedSubmission> planned;  // delivered in address order per tick
    for (std::size_t i = 0; i < improvers.size(); ++i) {
      if (period >= cfg.improver_schedules[i].size()) continue;
      double target = cfg.improver_schedules[i][period];
      planned.push_back({&improvers[i],
                         synth_model(trace.x_t, target, improver_rngs[i],
                                     improvers[i].name + " period " + std::to_string(period)),
                         false});
    }
    if (cfg.adversaries.bad_signature) {
      double target = std::max(0.01, best_before - 0.2);
      planned.push_back({&adv_bad_sig,
                         synth_model(trace.x_t, target, adv_model_rng,
                                     "bad-signature period " + std::to_string(period)),
                         true});
    }
    if (cfg.adversaries.non_improving && reigning_labels) {
      poi::ModelArtifact copycat;
      copycat.predicted_labels = *reigning_labels;
      copycat.metadata = "copycat period " + std::to_string(period);
      planned.push_back({&adv_non_improving, std::move(copycat), false});
    }

    // Bus delivery within a tick is ordered by sender address.
    std::stable_sort(planned.begin(), planned.end(), [](const auto& a, const auto& b) {
      return a.peer->id.address < b.peer->id.address;
    });

    // Register digests, release blobs, submit proofs.
    for (auto& sub : planned) {
      poi::Digest g = sub.model.model_digest();
      labels_by_model[g] = sub.model.predicted_labels;
      emit(p0 + 1, sub.peer->id.address, chain::EventKind::RegisterDigest,
           Bytes(g.begin(), g.end()));
    }
    for (auto& sub : planned) {
      poi::Digest g = store.put(sub.model.canonical_bytes());
      emit(p0 + 2, sub.peer->id.address, chain::EventKind::ReleaseModel,
           Bytes(g.begin(), g.end()));
    }
    for (auto& sub : planned) {
      // Improvers prove against the DEL function published in the problem
      // block, same as any outside peer.
      poi::PoiProof proof = poi::prove(sub.model, published_f, sub.peer->id);
      if (sub.corrupt_signature) proof.signature[0] ^= 0xff;
      emit(p0 + 3, sub.peer->id.address, chain::EventKind::SubmitProof,
           proof.canonical_bytes());
    }

    // Validators verify every pending submission and vote for the best valid
    // one (lowest distance, then smallest model digest).
    for (std::size_t j = 0; j < validators.size(); ++j) {
      const std::uint64_t vote_tick = p0 + 4 + j;
      std::optional<poi::VerificationProof> best_vote;
      double best_d = 2.0;
      poi::Digest best_g{};
      for (const auto& sub : chain.pending_submissions()) {
        auto blob = store.get(sub.model_digest);
        if (!blob) continue;
        poi::ModelArtifact model = poi::ModelArtifact::decode(*blob);
        auto outcome = poi::verify(model, sub.proof, published_f, y_t,
                                   chain.best_distance(), cfg.consensus.delta,
                                   validators[j].id);
        if (!outcome.ok()) {
          info(vote_tick, validators[j].id.address, "verify_rejected", sub.proof_digest,
               poi::to_string(*outcome.error));
          continue;
        }
        info(vote_tick, validators[j].id.address, "verify_ok", sub.proof_digest, "valid");
        double d = del::distance(sub.proof.y, y_t);
        if (d < best_d || (d == best_d && sub.model_digest < best_g)) {
          best_d = d;
          best_g = sub.model_digest;
          best_vote = std::move(outcome.proof);
        }
      }
      if (best_vote) {
        Bytes vote_bytes = best_vote->canonical_bytes();
        emit(vote_tick, validators[j].id.address, chain::EventKind::SubmitVote, vote_bytes);
        if (cfg.adversaries.duplicate_vote && j == 0)
          emit(vote_tick, validators[j].id.address, chain::EventKind::SubmitVote, vote_bytes);
      }
    }

    auto outcome = emit(p0 + cfg.consensus.t_b - 1, committer.id.address,
                        chain::EventKind::CommitImprovement, {});

    PeriodStat stat;
    stat.period = period;
    if (outcome.block_hash) {
      const auto& block = std::get<chain::ImprovementBlock>(chain.blocks().back());
      stat.has_winner = true;
      stat.winner = block.winner.prover_address();
      stat.distance = block.distance;
      stat.vote_count = block.votes.size();
      stat.reward_real = chain::reward(block.distance, best_before, cfg.consensus.reward_shape_a);
      const auto& labels = labels_by_model.at(block.winner.model_digest);
      stat.true_error = del::error_rate(labels, trace.x_t);
      reigning_labels = labels;
    }
    trace.periods.push_back(stat);
  }

  trace.blocks = chain.blocks();
  trace.balances = chain.balances();

  // The audit log must replay into the identical chain.
  chain::Chain replayed = chain::Chain::replay(cfg.consensus, chain_events(trace), store);
  if (replayed.blocks().size() != trace.blocks.size())
    throw std::runtime_error("scenario: replay diverged (block count)");
  for (std::size_t i = 0; i < trace.blocks.size(); ++i)
    if (chain::block_hash(replayed.blocks()[i]) != chain::block_hash(trace.blocks[i]))
      throw std::runtime_error("scenario: replay diverged at block " + std::to_string(i));

  return trace;
}

/// Summary rows: period,winner,distance,true_error,reward.
inline std::string trace_summary_csv(const ScenarioTrace& trace) {
  std::string csv = "period,winner,distance,true_error,reward\n";
  for (const auto& p : trace.periods) {
    csv += std::to_string(p.period) + ",";
    csv += (p.has_winner ? to_hex(p.winner) : "-");
    csv += "," + (p.has_winner ? double_to_string(p.distance) : "-");
    csv += "," + (p.has_winner ? double_to_string(p.true_error) : "-");
    csv += "," + (p.has_winner ? double_to_string(p.reward_real) : "-");
    csv += "\n";
  }
  return csv;
}

}  // namespace daimon::sim
