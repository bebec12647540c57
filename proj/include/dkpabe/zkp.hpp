#pragma once

// Pedersen commitments and Schnorr-style proofs of knowledge for linear
// relations among source-group elements.
//
// A LinearStatement is a conjunction of equations Y_i = prod_t base_t^{+-w_t}
// over a shared witness vector. Both issuing proofs (the user's knowledge of
// (u, rho1, rho2) and the authority's Sigma2 over its blinded key) are built
// on it. Responses are s = k - c*w; a verifier checks
// A_i == prod_t base_t^{+-s_t} * Y_i^c.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dkpabe/access.hpp"
#include "dkpabe/bytes.hpp"
#include "dkpabe/groups.hpp"

namespace dkpabe::zkp {

// ---- Pedersen --------------------------------------------------------------

struct PedersenCommitment {
  SourceElement com;  // g^message * h^blinder
  Scalar message;
  Scalar blinder;
};

PedersenCommitment pedersen_commit(GroupContext& ctx, const Scalar& message, Rng& rng);
bool pedersen_decommit(GroupContext& ctx, const SourceElement& com, const Scalar& message,
                       const Scalar& blinder);

// ---- transcripts -----------------------------------------------------------

inline constexpr std::string_view kUserPokTag = "dkpabe/pok-user/v1";
inline constexpr std::string_view kAuthorityPokTag = "dkpabe/pok-auth/v1";

// Append-only, length-prefixed log; the challenge is hash_to_scalar(log).
class Transcript {
 public:
  explicit Transcript(std::string_view tag);

  void append(std::string_view label, ByteView data);
  const Bytes& bytes() const { return log_.bytes(); }

 private:
  ByteWriter log_;
};

Scalar fiat_shamir_challenge(const GroupDescriptor& group, const Transcript& t);

// ---- linear relations ------------------------------------------------------

struct LinearTerm {
  SourceElement base;
  std::size_t witness = 0;
  bool negate = false;
};

struct LinearEquation {
  std::string label;
  SourceElement value;
  std::vector<LinearTerm> terms;
};

struct LinearStatement {
  std::size_t witness_count = 0;
  std::vector<LinearEquation> equations;

  // Canonical bytes of every value and base, in order.
  Bytes encode(const GroupDescriptor& group) const;
  std::array<std::uint8_t, 32> digest(const GroupDescriptor& group) const;
};

struct SigmaProof {
  std::array<std::uint8_t, 32> statement_digest{};
  std::vector<SourceElement> commitments;  // one per equation
  Scalar challenge;
  std::vector<Scalar> responses;  // one per witness
};

// Three-move prover. commit() may be called once; respond() wipes the nonces.
class SigmaProver {
 public:
  SigmaProver(LinearStatement statement, std::vector<Scalar> witnesses);
  ~SigmaProver();
  SigmaProver(const SigmaProver&) = delete;
  SigmaProver& operator=(const SigmaProver&) = delete;

  std::vector<SourceElement> commit(GroupContext& ctx, Rng& rng);
  // Fixed nonces, for exhaustive distribution tests.
  std::vector<SourceElement> commit_with_nonces(GroupContext& ctx, std::vector<Scalar> nonces);
  std::vector<Scalar> respond(const Scalar& challenge);

  const LinearStatement& statement() const { return statement_; }

 private:
  LinearStatement statement_;
  std::vector<Scalar> witnesses_;
  std::vector<Scalar> nonces_;
  bool responded_ = false;
};

// Structural mismatches (wrong counts, invalid elements) return false.
bool sigma_verify(GroupContext& ctx, const LinearStatement& statement,
                  const std::vector<SourceElement>& commitments, const Scalar& challenge,
                  const std::vector<Scalar>& responses);

// Responses drawn first, commitments solved for; same distribution as an
// honest transcript under the given challenge.
SigmaProof simulate(GroupContext& ctx, const LinearStatement& statement, const Scalar& challenge,
                    Rng& rng);
SigmaProof simulate_with_responses(GroupContext& ctx, const LinearStatement& statement,
                                   const Scalar& challenge, std::vector<Scalar> responses);

// Two accepting transcripts sharing commitments with distinct challenges.
std::vector<Scalar> extract_witness(const SigmaProof& a, const SigmaProof& b);

// Fiat-Shamir over (tag, context, statement, commitments).
SigmaProof prove_non_interactive(GroupContext& ctx, std::string_view tag, ByteView context,
                                 const LinearStatement& statement, const std::vector<Scalar>& witnesses,
                                 Rng& rng);
bool verify_non_interactive(GroupContext& ctx, std::string_view tag, ByteView context,
                            const LinearStatement& statement, const SigmaProof& proof);
Scalar non_interactive_challenge(const GroupDescriptor& group, std::string_view tag, ByteView context,
                                 const LinearStatement& statement,
                                 const std::vector<SourceElement>& commitments);

// Length-prefixed: statement digest, commitments, challenge, responses.
Bytes encode_proof(const GroupDescriptor& group, const SigmaProof& proof);
// MalformedProof on any encoding error.
SigmaProof decode_proof(const GroupDescriptor& group, ByteView bytes);

// ---- user proof: (u, rho1, rho2) -------------------------------------------

struct UserPokStatement {
  SourceElement psi1;  // g^{u rho1}
  SourceElement psi2;  // g^{rho1}
  SourceElement psi3;  // g^{u rho2}
  SourceElement psi4;  // g^{rho2}
  std::optional<SourceElement> com;  // g^u h^blinder
};

struct UserPokWitness {
  Scalar u;
  Scalar rho1;
  Scalar rho2;
  std::optional<Scalar> blinder;  // required iff the statement has com
};

// InvalidArgument when rho1 or rho2 is zero.
UserPokStatement make_user_statement(GroupContext& ctx, const UserPokWitness& w,
                                     const std::optional<SourceElement>& com = std::nullopt);

// Witnesses in order (u, rho1, rho2[, blinder]). Clauses: psi2 = g^rho1,
// psi4 = g^rho2, psi1 = psi2^u, psi3 = psi4^u[, com = g^u h^blinder].
LinearStatement user_relation(const GlobalParams& params, const UserPokStatement& st);
std::vector<Scalar> user_witness_vector(const UserPokWitness& w);

SigmaProof pok_user_prove(GroupContext& ctx, const UserPokStatement& st, const UserPokWitness& w,
                          ByteView session_id, Rng& rng);
bool pok_user_verify(GroupContext& ctx, const UserPokStatement& st, const SigmaProof& proof,
                     ByteView session_id);

// ---- authority proof (Sigma2) ----------------------------------------------

struct AuthorityPokStatement {
  SourceElement P;  // g^{1/(rho1 rho2)}
  SourceElement Q;  // h^{1/rho2}
  SourceElement R;  // h1^{1/rho1}
  SourceElement D;   // P^{-alpha} Q^{beta/x} R^{r/y}
  SourceElement D1;  // Q^{1/x}
  std::map<AttributeId, SourceElement> Dj;  // R^{q_j/(y t_j)}
};

struct AuthorityPokWitness {
  Scalar alpha;
  Scalar beta_over_x;
  Scalar r_over_y;
  Scalar inv_x;
  std::map<AttributeId, Scalar> leaf_exponents;  // q_j / (y t_j)
};

// Witnesses in order (alpha, beta/x, r/y, 1/x, leaf exponents by attribute).
LinearStatement authority_relation(const AuthorityPokStatement& st);
std::vector<Scalar> authority_witness_vector(const AuthorityPokWitness& w);

// WitnessStatementMismatch (checked on the transparent backend only).
SigmaProof pok_authority_prove(GroupContext& ctx, const AuthorityPokStatement& st,
                               const AuthorityPokWitness& w, ByteView session_id, Rng& rng);
bool pok_authority_verify(GroupContext& ctx, const AuthorityPokStatement& st,
                          const SigmaProof& proof, ByteView session_id);

}  // namespace dkpabe::zkp
