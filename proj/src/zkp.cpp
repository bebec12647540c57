#include "dkpabe/zkp.hpp"

#include <algorithm>

#include "dkpabe/digest.hpp"
#include "dkpabe/error.hpp"

namespace dkpabe::zkp {

PedersenCommitment pedersen_commit(GroupContext& ctx, const Scalar& message, Rng& rng) {
  PedersenCommitment c;
  c.message = message;
  c.blinder = ctx.group().random_scalar(rng);
  c.com = ctx.mul(ctx.exp(ctx.params().g, message), ctx.exp(ctx.params().h, c.blinder));
  return c;
}

bool pedersen_decommit(GroupContext& ctx, const SourceElement& com, const Scalar& message,
                       const Scalar& blinder) {
  return ctx.mul(ctx.exp(ctx.params().g, message), ctx.exp(ctx.params().h, blinder)) == com;
}

Transcript::Transcript(std::string_view tag) { log_.str(tag); }

void Transcript::append(std::string_view label, ByteView data) {
  log_.str(label);
  log_.blob(data);
}

Scalar fiat_shamir_challenge(const GroupDescriptor& group, const Transcript& t) {
  return group.hash_to_scalar(t.bytes());
}

Bytes LinearStatement::encode(const GroupDescriptor& group) const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(witness_count));
  w.u32(static_cast<std::uint32_t>(equations.size()));
  for (const auto& eq : equations) {
    w.str(eq.label);
    w.blob(group.encode(eq.value));
    w.u32(static_cast<std::uint32_t>(eq.terms.size()));
    for (const auto& t : eq.terms) {
      w.blob(group.encode(t.base));
      w.u32(static_cast<std::uint32_t>(t.witness));
      w.u8(t.negate ? 1 : 0);
    }
  }
  return std::move(w).take();
}

std::array<std::uint8_t, 32> LinearStatement::digest(const GroupDescriptor& group) const {
  return sha256(encode(group));
}

namespace {

bool well_formed(const LinearStatement& st) {
  for (const auto& eq : st.equations) {
    if (!eq.value.valid() || eq.terms.empty()) return false;
    for (const auto& t : eq.terms) {
      if (t.witness >= st.witness_count || !t.base.valid()) return false;
    }
  }
  return true;
}

SourceElement combine(GroupContext& ctx, const LinearEquation& eq, const std::vector<Scalar>& exps) {
  std::optional<SourceElement> acc;
  for (const auto& t : eq.terms) {
    Scalar e = t.negate ? -exps.at(t.witness) : exps.at(t.witness);
    auto v = ctx.exp(t.base, e);
    acc = acc ? ctx.mul(*acc, v) : v;
  }
  return *acc;
}

}  // namespace

SigmaProver::SigmaProver(LinearStatement statement, std::vector<Scalar> witnesses)
    : statement_(std::move(statement)), witnesses_(std::move(witnesses)) {
  if (witnesses_.size() != statement_.witness_count || !well_formed(statement_)) {
    fail(ErrorCode::kInvalidArgument, "witness vector does not fit statement");
  }
}

SigmaProver::~SigmaProver() {
  for (auto& w : witnesses_) w.wipe();
  for (auto& k : nonces_) k.wipe();
}

std::vector<SourceElement> SigmaProver::commit(GroupContext& ctx, Rng& rng) {
  std::vector<Scalar> nonces;
  for (std::size_t i = 0; i < statement_.witness_count; ++i) {
    nonces.push_back(ctx.group().random_scalar(rng));
  }
  return commit_with_nonces(ctx, std::move(nonces));
}

std::vector<SourceElement> SigmaProver::commit_with_nonces(GroupContext& ctx,
                                                           std::vector<Scalar> nonces) {
  if (!nonces_.empty() || responded_) fail(ErrorCode::kPhaseViolation, "prover already committed");
  if (nonces.size() != statement_.witness_count) fail(ErrorCode::kInvalidArgument, "nonce count");
  nonces_ = std::move(nonces);
  std::vector<SourceElement> out;
  for (const auto& eq : statement_.equations) out.push_back(combine(ctx, eq, nonces_));
  return out;
}

std::vector<Scalar> SigmaProver::respond(const Scalar& challenge) {
  if (nonces_.empty() || responded_) fail(ErrorCode::kPhaseViolation, "respond before commit");
  std::vector<Scalar> s;
  for (std::size_t i = 0; i < witnesses_.size(); ++i) s.push_back(nonces_[i] - challenge * witnesses_[i]);
  for (auto& k : nonces_) k.wipe();
  responded_ = true;
  return s;
}

bool sigma_verify(GroupContext& ctx, const LinearStatement& statement,
                  const std::vector<SourceElement>& commitments, const Scalar& challenge,
                  const std::vector<Scalar>& responses) {
  if (!well_formed(statement)) return false;
  if (commitments.size() != statement.equations.size()) return false;
  if (responses.size() != statement.witness_count) return false;
  const auto& field = ctx.field();
  if (!challenge.bound() || challenge.field()->modulus() != field->modulus()) return false;
  for (const auto& s : responses) {
    if (!s.bound() || s.field()->modulus() != field->modulus()) return false;
  }
  for (std::size_t i = 0; i < statement.equations.size(); ++i) {
    const auto& eq = statement.equations[i];
    if (!commitments[i].valid() || commitments[i].backend() != ctx.group().backend()) return false;
    auto rhs = ctx.mul(combine(ctx, eq, responses), ctx.exp(eq.value, challenge));
    if (!(rhs == commitments[i])) return false;
  }
  return true;
}

SigmaProof simulate_with_responses(GroupContext& ctx, const LinearStatement& statement,
                                   const Scalar& challenge, std::vector<Scalar> responses) {
  if (responses.size() != statement.witness_count) fail(ErrorCode::kInvalidArgument, "response count");
  SigmaProof p;
  p.statement_digest = statement.digest(ctx.group());
  p.challenge = challenge;
  for (const auto& eq : statement.equations) {
    p.commitments.push_back(ctx.mul(combine(ctx, eq, responses), ctx.exp(eq.value, challenge)));
  }
  p.responses = std::move(responses);
  return p;
}

SigmaProof simulate(GroupContext& ctx, const LinearStatement& statement, const Scalar& challenge,
                    Rng& rng) {
  std::vector<Scalar> s;
  for (std::size_t i = 0; i < statement.witness_count; ++i) s.push_back(ctx.group().random_scalar(rng));
  return simulate_with_responses(ctx, statement, challenge, std::move(s));
}

std::vector<Scalar> extract_witness(const SigmaProof& a, const SigmaProof& b) {
  if (!(a.commitments == b.commitments)) fail(ErrorCode::kInvalidArgument, "commitments differ");
  if (a.challenge == b.challenge) fail(ErrorCode::kInvalidArgument, "challenges must differ");
  if (a.responses.size() != b.responses.size()) fail(ErrorCode::kInvalidArgument, "response count");
  Scalar dc_inv = (b.challenge - a.challenge).inverse();
  std::vector<Scalar> w;
  for (std::size_t i = 0; i < a.responses.size(); ++i) {
    w.push_back((a.responses[i] - b.responses[i]) * dc_inv);
  }
  return w;
}

Scalar non_interactive_challenge(const GroupDescriptor& group, std::string_view tag, ByteView context,
                                 const LinearStatement& statement,
                                 const std::vector<SourceElement>& commitments) {
  Transcript t(tag);
  t.append("context", context);
  t.append("statement", statement.encode(group));
  for (const auto& c : commitments) t.append("commitment", group.encode(c));
  return fiat_shamir_challenge(group, t);
}

SigmaProof prove_non_interactive(GroupContext& ctx, std::string_view tag, ByteView context,
                                 const LinearStatement& statement, const std::vector<Scalar>& witnesses,
                                 Rng& rng) {
  SigmaProver prover(statement, witnesses);
  SigmaProof p;
  p.statement_digest = statement.digest(ctx.group());
  p.commitments = prover.commit(ctx, rng);
  p.challenge = non_interactive_challenge(ctx.group(), tag, context, statement, p.commitments);
  p.responses = prover.respond(p.challenge);
  return p;
}

bool verify_non_interactive(GroupContext& ctx, std::string_view tag, ByteView context,
                            const LinearStatement& statement, const SigmaProof& proof) {
  if (proof.statement_digest != statement.digest(ctx.group())) return false;
  if (proof.commitments.size() != statement.equations.size()) return false;
  for (const auto& c : proof.commitments) {
    if (!c.valid() || c.backend() != ctx.group().backend()) return false;
  }
  auto c = non_interactive_challenge(ctx.group(), tag, context, statement, proof.commitments);
  if (!proof.challenge.bound() || !(c == proof.challenge)) return false;
  return sigma_verify(ctx, statement, proof.commitments, proof.challenge, proof.responses);
}

namespace {
constexpr std::uint32_t kMaxProofItems = 1u << 16;
}

Bytes encode_proof(const GroupDescriptor& group, const SigmaProof& proof) {
  ByteWriter w;
  w.blob(proof.statement_digest);
  w.u32(static_cast<std::uint32_t>(proof.commitments.size()));
  for (const auto& c : proof.commitments) w.blob(group.encode(c));
  w.blob(group.encode(proof.challenge));
  w.u32(static_cast<std::uint32_t>(proof.responses.size()));
  for (const auto& s : proof.responses) w.blob(group.encode(s));
  return std::move(w).take();
}

SigmaProof decode_proof(const GroupDescriptor& group, ByteView bytes) {
  try {
    ByteReader r(bytes);
    SigmaProof p;
    auto digest = r.blob();
    if (digest.size() != p.statement_digest.size()) fail(ErrorCode::kMalformedProof, "digest size");
    std::copy(digest.begin(), digest.end(), p.statement_digest.begin());
    auto nc = r.u32();
    if (nc > kMaxProofItems) fail(ErrorCode::kMalformedProof, "too many commitments");
    for (std::uint32_t i = 0; i < nc; ++i) p.commitments.push_back(group.decode_source(r.blob()));
    p.challenge = group.decode_scalar(r.blob());
    auto ns = r.u32();
    if (ns > kMaxProofItems) fail(ErrorCode::kMalformedProof, "too many responses");
    for (std::uint32_t i = 0; i < ns; ++i) p.responses.push_back(group.decode_scalar(r.blob()));
    r.expect_done();
    return p;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformedProof) throw;
    fail(ErrorCode::kMalformedProof, e.what());
  }
}

// ---- user proof -------------------------------------------------------------

UserPokStatement make_user_statement(GroupContext& ctx, const UserPokWitness& w,
                                     const std::optional<SourceElement>& com) {
  if (w.rho1.is_zero() || w.rho2.is_zero()) fail(ErrorCode::kInvalidArgument, "rho must be nonzero");
  const auto& g = ctx.params().g;
  UserPokStatement st;
  st.psi2 = ctx.exp(g, w.rho1);
  st.psi4 = ctx.exp(g, w.rho2);
  st.psi1 = ctx.exp(st.psi2, w.u);
  st.psi3 = ctx.exp(st.psi4, w.u);
  st.com = com;
  return st;
}

LinearStatement user_relation(const GlobalParams& params, const UserPokStatement& st) {
  LinearStatement ls;
  ls.witness_count = st.com ? 4 : 3;
  ls.equations.push_back({"psi2", st.psi2, {{params.g, 1}}});
  ls.equations.push_back({"psi4", st.psi4, {{params.g, 2}}});
  ls.equations.push_back({"psi1", st.psi1, {{st.psi2, 0}}});
  ls.equations.push_back({"psi3", st.psi3, {{st.psi4, 0}}});
  if (st.com) ls.equations.push_back({"com", *st.com, {{params.g, 0}, {params.h, 3}}});
  return ls;
}

std::vector<Scalar> user_witness_vector(const UserPokWitness& w) {
  std::vector<Scalar> v{w.u, w.rho1, w.rho2};
  if (w.blinder) v.push_back(*w.blinder);
  return v;
}

SigmaProof pok_user_prove(GroupContext& ctx, const UserPokStatement& st, const UserPokWitness& w,
                          ByteView session_id, Rng& rng) {
  if (st.com.has_value() != w.blinder.has_value()) {
    fail(ErrorCode::kWitnessStatementMismatch, "commitment clause without blinder");
  }
  return prove_non_interactive(ctx, kUserPokTag, session_id, user_relation(ctx.params(), st),
                               user_witness_vector(w), rng);
}

bool pok_user_verify(GroupContext& ctx, const UserPokStatement& st, const SigmaProof& proof,
                     ByteView session_id) {
  return verify_non_interactive(ctx, kUserPokTag, session_id, user_relation(ctx.params(), st), proof);
}

// ---- authority proof -------------------------------------------------------

LinearStatement authority_relation(const AuthorityPokStatement& st) {
  LinearStatement ls;
  ls.witness_count = 4 + st.Dj.size();
  ls.equations.push_back({"D", st.D, {{st.P, 0, true}, {st.Q, 1}, {st.R, 2}}});
  ls.equations.push_back({"D1", st.D1, {{st.Q, 3}}});
  std::size_t idx = 4;
  for (const auto& [attr, d] : st.Dj) {
    ls.equations.push_back({"Dj/" + to_string(attr), d, {{st.R, idx++}}});
  }
  return ls;
}

std::vector<Scalar> authority_witness_vector(const AuthorityPokWitness& w) {
  std::vector<Scalar> v{w.alpha, w.beta_over_x, w.r_over_y, w.inv_x};
  for (const auto& [attr, e] : w.leaf_exponents) v.push_back(e);
  return v;
}

SigmaProof pok_authority_prove(GroupContext& ctx, const AuthorityPokStatement& st,
                               const AuthorityPokWitness& w, ByteView session_id, Rng& rng) {
  if (st.Dj.size() != w.leaf_exponents.size()) {
    fail(ErrorCode::kWitnessStatementMismatch, "leaf count");
  }
  for (const auto& [attr, d] : st.Dj) {
    if (!w.leaf_exponents.contains(attr)) fail(ErrorCode::kWitnessStatementMismatch, to_string(attr));
  }
  auto relation = authority_relation(st);
  auto witnesses = authority_witness_vector(w);
  if (ctx.group().backend() == Backend::kTransparent) {
    GroupContext scratch(ctx.params_ptr());
    for (const auto& eq : relation.equations) {
      if (!(combine(scratch, eq, witnesses) == eq.value)) {
        fail(ErrorCode::kWitnessStatementMismatch, "clause " + eq.label);
      }
    }
  }
  return prove_non_interactive(ctx, kAuthorityPokTag, session_id, relation, witnesses, rng);
}

bool pok_authority_verify(GroupContext& ctx, const AuthorityPokStatement& st,
                          const SigmaProof& proof, ByteView session_id) {
  return verify_non_interactive(ctx, kAuthorityPokTag, session_id, authority_relation(st), proof);
}

}  // namespace dkpabe::zkp
