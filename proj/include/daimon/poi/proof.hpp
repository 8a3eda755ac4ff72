#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "daimon/common/bytes.hpp"
#include "daimon/common/errors.hpp"
#include "daimon/common/strings.hpp"
#include "daimon/del/del.hpp"
#include "daimon/del/label_vector.hpp"
#include "daimon/poi/digest.hpp"
#include "daimon/poi/identity.hpp"
#include "json.hpp"

namespace daimon::poi {

/// Verifier's recomputed embedding must match the proof's elementwise within
/// this bound; both sides run the same serialized model deterministically.
inline constexpr double kEmbedTolerance = 1e-9;

/// Stand-in for a submitted classifier: the predicted labels it produces on
/// the canonical test inputs, plus free-form metadata. PoI only ever consumes
/// M(Z), so the table is the artifact.
struct ModelArtifact {
  del::LabelVector predicted_labels;
  std::string metadata;

  Bytes canonical_bytes() const {
    ByteWriter w;
    w.i32_vec(predicted_labels.labels);
    w.i32(predicted_labels.num_classes);
    w.str(metadata);
    return w.take();
  }

  Digest model_digest() const { return digest(canonical_bytes()); }

  static ModelArtifact decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    ModelArtifact m;
    m.predicted_labels.labels = r.i32_vec();
    m.predicted_labels.num_classes = r.i32();
    m.metadata = r.str();
    r.expect_end();
    return m;
  }

  nlohmann::json to_json() const {
    return {{"labels", predicted_labels.labels},
            {"num_classes", predicted_labels.num_classes},
            {"metadata", metadata}};
  }

  static ModelArtifact from_json(const nlohmann::json& j) {
    ModelArtifact m;
    m.predicted_labels.labels = j.at("labels").get<std::vector<std::int32_t>>();
    m.predicted_labels.num_classes = j.at("num_classes").get<std::int32_t>();
    m.metadata = j.value("metadata", "");
    return m;
  }
};

/// Signed claim {g, y, pk}: model digest, DEL output of the model's predicted
/// labels, prover public key.
struct PoiProof {
  Digest model_digest{};
  del::Embedding y;
  Bytes prover_pk;
  Bytes signature;

  /// Canonical encoding of the signed fields, in declared order.
  Bytes body_bytes() const {
    ByteWriter w;
    w.raw(model_digest);
    w.f64_vec(y);
    w.bytes(prover_pk);
    return w.take();
  }

  Bytes canonical_bytes() const {
    ByteWriter w;
    w.raw(model_digest);
    w.f64_vec(y);
    w.bytes(prover_pk);
    w.bytes(signature);
    return w.take();
  }

  Digest proof_digest() const { return digest(canonical_bytes()); }

  Address prover_address() const { return address_of(prover_pk); }

  static PoiProof decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    PoiProof p = decode_partial(r);
    r.expect_end();
    return p;
  }

  static PoiProof decode_partial(ByteReader& r) {
    PoiProof p;
    for (auto& byte : p.model_digest) byte = r.u8();
    p.y = r.f64_vec();
    p.prover_pk = r.bytes();
    p.signature = r.bytes();
    return p;
  }

  nlohmann::json debug_json() const {
    nlohmann::json ys = nlohmann::json::array();
    for (double v : y) ys.push_back(double_to_string(v));
    return {{"model_digest", hex(model_digest)},
            {"y", ys},
            {"prover_pk", to_hex(prover_pk)},
            {"signature", to_hex(signature)}};
  }

  static PoiProof from_debug_json(const nlohmann::json& j) {
    PoiProof p;
    p.model_digest = digest_from_hex(j.at("model_digest").get<std::string>());
    for (const auto& s : j.at("y")) p.y.push_back(double_from_string(s.get<std::string>()));
    p.prover_pk = from_hex(j.at("prover_pk").get<std::string>());
    p.signature = from_hex(j.at("signature").get<std::string>());
    return p;
  }

  bool operator==(const PoiProof&) const = default;
};

/// Signed attestation {pi_P, d_c, delta, pk} that the inner proof passed the
/// four checks against the current best distance.
struct VerificationProof {
  PoiProof inner;
  double current_distance = 0.0;  // d_c at verification time
  double delta = 0.0;
  Bytes verifier_pk;
  Bytes signature;

  Bytes body_bytes() const {
    ByteWriter w;
    w.bytes(inner.canonical_bytes());
    w.f64(current_distance);
    w.f64(delta);
    w.bytes(verifier_pk);
    return w.take();
  }

  Bytes canonical_bytes() const {
    ByteWriter w;
    w.bytes(inner.canonical_bytes());
    w.f64(current_distance);
    w.f64(delta);
    w.bytes(verifier_pk);
    w.bytes(signature);
    return w.take();
  }

  Address verifier_address() const { return address_of(verifier_pk); }

  static VerificationProof decode(std::span<const std::uint8_t> b) {
    ByteReader r(b);
    VerificationProof v;
    Bytes inner_bytes = r.bytes();
    v.inner = PoiProof::decode(inner_bytes);
    v.current_distance = r.f64();
    v.delta = r.f64();
    v.verifier_pk = r.bytes();
    v.signature = r.bytes();
    r.expect_end();
    return v;
  }

  nlohmann::json debug_json() const {
    return {{"inner", inner.debug_json()},
            {"current_distance", double_to_string(current_distance)},
            {"delta", double_to_string(delta)},
            {"verifier_pk", to_hex(verifier_pk)},
            {"signature", to_hex(signature)}};
  }

  static VerificationProof from_debug_json(const nlohmann::json& j) {
    VerificationProof v;
    v.inner = PoiProof::from_debug_json(j.at("inner"));
    v.current_distance = double_from_string(j.at("current_distance").get<std::string>());
    v.delta = double_from_string(j.at("delta").get<std::string>());
    v.verifier_pk = from_hex(j.at("verifier_pk").get<std::string>());
    v.signature = from_hex(j.at("signature").get<std::string>());
    return v;
  }

  bool operator==(const VerificationProof&) const = default;
};

/// Generates the PoI proof for a model under the published DEL function.
inline PoiProof prove(const ModelArtifact& model, const del::DelModel& f,
                      const PeerIdentity& prover) {
  if (model.predicted_labels.labels.size() != f.label_count ||
      model.predicted_labels.num_classes != f.num_classes)
    throw ContractViolation("prove: model labels do not match the DEL function");
  PoiProof p;
  p.model_digest = model.model_digest();
  p.y = f.embed(model.predicted_labels);
  p.prover_pk = prover.public_key;
  p.signature = sign(prover, p.body_bytes());
  return p;
}

enum class VerifyError {
  BadSignature,
  DigestMismatch,
  EmbeddingMismatch,
  InsufficientImprovement,
};

inline const char* to_string(VerifyError e) {
  switch (e) {
    case VerifyError::BadSignature: return "BadSignature";
    case VerifyError::DigestMismatch: return "DigestMismatch";
    case VerifyError::EmbeddingMismatch: return "EmbeddingMismatch";
    case VerifyError::InsufficientImprovement: return "InsufficientImprovement";
  }
  return "?";
}

struct VerifyOutcome {
  std::optional<VerificationProof> proof;
  std::optional<VerifyError> error;

  bool ok() const { return proof.has_value(); }
};

/// The four checks of the verification procedure, in order: prover signature,
/// model digest, recomputed DEL output, distance improvement. Each failure
/// reports its own error; success returns the signed verification proof.
/// Note the inputs: the verifier sees y_t, never the true label vector.
inline VerifyOutcome verify(const ModelArtifact& model, const PoiProof& proof,
                            const del::DelModel& f, const del::Embedding& y_t,
                            double d_c, double delta, const PeerIdentity& verifier) {
  if (delta < 0.0) throw ContractViolation("verify: delta must be nonnegative");
  if (!(d_c >= 0.0) || d_c > 1.0)
    throw ContractViolation("verify: d_c must lie in [0, 1]");

  if (!verify_signature(proof.prover_pk, proof.body_bytes(), proof.signature))
    return {std::nullopt, VerifyError::BadSignature};

  if (proof.model_digest != model.model_digest())
    return {std::nullopt, VerifyError::DigestMismatch};

  del::Embedding recomputed;
  try {
    recomputed = f.embed(model.predicted_labels);
  } catch (const ContractViolation&) {
    return {std::nullopt, VerifyError::EmbeddingMismatch};
  }
  if (recomputed.size() != proof.y.size())
    return {std::nullopt, VerifyError::EmbeddingMismatch};
  for (std::size_t i = 0; i < recomputed.size(); ++i)
    if (!(std::fabs(recomputed[i] - proof.y[i]) <= kEmbedTolerance))
      return {std::nullopt, VerifyError::EmbeddingMismatch};

  if (!(del::distance(proof.y, y_t) < d_c - delta))
    return {std::nullopt, VerifyError::InsufficientImprovement};

  VerificationProof v;
  v.inner = proof;
  v.current_distance = d_c;
  v.delta = delta;
  v.verifier_pk = verifier.public_key;
  v.signature = sign(verifier, v.body_bytes());
  return {std::move(v), std::nullopt};
}

}  // namespace daimon::poi
