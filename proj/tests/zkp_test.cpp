#include <gtest/gtest.h>

#include <set>

#include "dkpabe/error.hpp"
#include "dkpabe/zkp.hpp"
#include "test_support.hpp"

namespace dkpabe::zkp {
namespace {

using dkpabe::testing::curve_params;
using dkpabe::testing::transparent_params;

const ByteView kSession = as_bytes("session-0001");

struct UserInstance {
  UserPokStatement st;
  UserPokWitness w;
};

UserInstance user_instance(GroupContext& ctx, Rng& rng, bool with_com = true) {
  UserInstance in;
  in.w.u = ctx.group().random_scalar(rng);
  in.w.rho1 = ctx.group().random_nonzero_scalar(rng);
  in.w.rho2 = ctx.group().random_nonzero_scalar(rng);
  std::optional<SourceElement> com;
  if (with_com) {
    auto c = pedersen_commit(ctx, in.w.u, rng);
    in.w.blinder = c.blinder;
    com = c.com;
  }
  in.st = make_user_statement(ctx, in.w, com);
  return in;
}

struct AuthorityInstance {
  AuthorityPokStatement st;
  AuthorityPokWitness w;
};

AuthorityInstance authority_instance(GroupContext& ctx, Rng& rng, std::uint32_t leaves) {
  const auto& grp = ctx.group();
  const auto& P = ctx.params();
  AuthorityInstance in;
  in.st.P = ctx.exp(P.g, grp.random_nonzero_scalar(rng));
  in.st.Q = ctx.exp(P.h, grp.random_nonzero_scalar(rng));
  in.st.R = ctx.exp(P.h1, grp.random_nonzero_scalar(rng));
  in.w.alpha = grp.random_scalar(rng);
  in.w.beta_over_x = grp.random_scalar(rng);
  in.w.r_over_y = grp.random_scalar(rng);
  in.w.inv_x = grp.random_scalar(rng);
  in.st.D = ctx.mul(ctx.mul(ctx.exp(in.st.P, -in.w.alpha), ctx.exp(in.st.Q, in.w.beta_over_x)),
                    ctx.exp(in.st.R, in.w.r_over_y));
  in.st.D1 = ctx.exp(in.st.Q, in.w.inv_x);
  for (std::uint32_t j = 1; j <= leaves; ++j) {
    auto e = grp.random_scalar(rng);
    in.w.leaf_exponents[{1, j}] = e;
    in.st.Dj[{1, j}] = ctx.exp(in.st.R, e);
  }
  return in;
}

// ---- Pedersen --------------------------------------------------------------

TEST(Pedersen, CommitDecommit) {
  GroupContext ctx(curve_params());
  DeterministicRng rng(1);
  auto m = ctx.group().random_scalar(rng);
  auto c = pedersen_commit(ctx, m, rng);
  EXPECT_TRUE(pedersen_decommit(ctx, c.com, m, c.blinder));
  EXPECT_FALSE(pedersen_decommit(ctx, c.com, m + Scalar::one(ctx.field()), c.blinder));
  auto c2 = pedersen_commit(ctx, m, rng);
  EXPECT_FALSE(c.com == c2.com);
}

TEST(Pedersen, HidingExhaustiveAtSmallPrime) {
  GroupContext ctx(transparent_params(11));
  const auto& f = ctx.field();
  // For every pair of messages the multiset of commitments over all
  // blinders is the same.
  std::multiset<std::uint64_t> base;
  for (std::uint64_t m = 0; m < 11; ++m) {
    std::multiset<std::uint64_t> coms;
    for (std::uint64_t b = 0; b < 11; ++b) {
      auto com = ctx.mul(ctx.exp(ctx.params().g, Scalar::from_u64(f, m)),
                         ctx.exp(ctx.params().h, Scalar::from_u64(f, b)));
      coms.insert(*oracle::discrete_logs(com).second);
      EXPECT_TRUE(pedersen_decommit(ctx, com, Scalar::from_u64(f, m), Scalar::from_u64(f, b)));
    }
    if (m == 0) base = coms;
    EXPECT_EQ(coms, base);
  }
}

// ---- transcripts -----------------------------------------------------------

TEST(FiatShamir, DeterministicAndSensitive) {
  auto grp = GroupDescriptor::curve();
  Transcript a(kUserPokTag), b(kUserPokTag);
  a.append("x", as_bytes("payload"));
  b.append("x", as_bytes("payload"));
  EXPECT_EQ(fiat_shamir_challenge(grp, a), fiat_shamir_challenge(grp, b));
  Transcript c(kUserPokTag);
  c.append("x", as_bytes("paylobd"));
  EXPECT_FALSE(fiat_shamir_challenge(grp, a) == fiat_shamir_challenge(grp, c));
}

TEST(FiatShamir, TagsSeparateProofSystems) {
  auto grp = GroupDescriptor::curve();
  Transcript a(kUserPokTag), b(kAuthorityPokTag);
  a.append("x", as_bytes("same"));
  b.append("x", as_bytes("same"));
  EXPECT_FALSE(fiat_shamir_challenge(grp, a) == fiat_shamir_challenge(grp, b));
  // Length prefixes keep label/data boundaries unambiguous.
  Transcript c(kUserPokTag), d(kUserPokTag);
  c.append("ab", as_bytes("c"));
  d.append("a", as_bytes("bc"));
  EXPECT_FALSE(fiat_shamir_challenge(grp, c) == fiat_shamir_challenge(grp, d));
}

// ---- user proof ------------------------------------------------------------

TEST(UserPok, StatementRelations) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(2);
  auto in = user_instance(ctx, rng);
  auto log = [](const SourceElement& e) { return *oracle::discrete_logs(e).first; };
  const auto& w = in.w;
  EXPECT_EQ(log(in.st.psi2), w.rho1.to_u64());
  EXPECT_EQ(log(in.st.psi4), w.rho2.to_u64());
  EXPECT_EQ(log(in.st.psi1), (w.u * w.rho1).to_u64());
  EXPECT_EQ(log(in.st.psi3), (w.u * w.rho2).to_u64());
}

TEST(UserPok, CompletenessManyInstances) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(3);
  int accepted = 0;
  for (int i = 0; i < 1000; ++i) {
    auto in = user_instance(ctx, rng, i % 2 == 0);
    auto proof = pok_user_prove(ctx, in.st, in.w, kSession, rng);
    accepted += pok_user_verify(ctx, in.st, proof, kSession);
  }
  EXPECT_EQ(accepted, 1000);
}

TEST(UserPok, CompletenessCurve) {
  GroupContext ctx(curve_params());
  DeterministicRng rng(4);
  for (int i = 0; i < 10; ++i) {
    auto in = user_instance(ctx, rng);
    auto proof = pok_user_prove(ctx, in.st, in.w, kSession, rng);
    EXPECT_TRUE(pok_user_verify(ctx, in.st, proof, kSession));
    auto decoded = decode_proof(ctx.group(), encode_proof(ctx.group(), proof));
    EXPECT_TRUE(pok_user_verify(ctx, in.st, decoded, kSession));
  }
}

TEST(UserPok, WrongWitnessRejected) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(5);
  auto in = user_instance(ctx, rng);
  auto bad = in.w;
  bad.u = bad.u + Scalar::one(ctx.field());
  auto proof = pok_user_prove(ctx, in.st, bad, kSession, rng);
  EXPECT_FALSE(pok_user_verify(ctx, in.st, proof, kSession));
}

TEST(UserPok, SingleFieldPerturbationsRejected) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(6);
  auto in = user_instance(ctx, rng);
  auto proof = pok_user_prove(ctx, in.st, in.w, kSession, rng);
  ASSERT_TRUE(pok_user_verify(ctx, in.st, proof, kSession));
  auto one = Scalar::one(ctx.field());
  int probes = 0;
  for (std::size_t i = 0; i < proof.responses.size(); ++i, ++probes) {
    auto p = proof;
    p.responses[i] += one;
    EXPECT_FALSE(pok_user_verify(ctx, in.st, p, kSession));
  }
  for (std::size_t i = 0; i < proof.commitments.size(); ++i, ++probes) {
    auto p = proof;
    p.commitments[i] = ctx.mul(p.commitments[i], ctx.params().g);
    EXPECT_FALSE(pok_user_verify(ctx, in.st, p, kSession));
  }
  {
    auto p = proof;
    p.challenge += one;
    EXPECT_FALSE(pok_user_verify(ctx, in.st, p, kSession));
    p = proof;
    p.statement_digest[0] ^= 1;
    EXPECT_FALSE(pok_user_verify(ctx, in.st, p, kSession));
    p = proof;
    p.responses.pop_back();
    EXPECT_FALSE(pok_user_verify(ctx, in.st, p, kSession));
    probes += 3;
  }
  EXPECT_FALSE(pok_user_verify(ctx, in.st, proof, as_bytes("other-session")));
  auto swapped = in.st;
  std::swap(swapped.psi1, swapped.psi3);
  EXPECT_FALSE(pok_user_verify(ctx, swapped, proof, kSession));
  auto no_com = in.st;
  no_com.com.reset();
  EXPECT_FALSE(pok_user_verify(ctx, no_com, proof, kSession));
  EXPECT_GT(probes, 10);
}

TEST(UserPok, SpecialSoundnessExtractor) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto in = user_instance(ctx, rng, trial % 2 == 0);
    auto relation = user_relation(ctx.params(), in.st);
    std::vector<Scalar> nonces;
    for (std::size_t i = 0; i < relation.witness_count; ++i) nonces.push_back(ctx.group().random_scalar(rng));
    SigmaProver p1(relation, user_witness_vector(in.w)), p2(relation, user_witness_vector(in.w));
    SigmaProof a, b;
    a.commitments = p1.commit_with_nonces(ctx, nonces);
    b.commitments = p2.commit_with_nonces(ctx, nonces);
    a.challenge = ctx.group().random_scalar(rng);
    b.challenge = a.challenge + Scalar::from_u64(ctx.field(), 1 + trial);
    a.responses = p1.respond(a.challenge);
    b.responses = p2.respond(b.challenge);
    ASSERT_TRUE(sigma_verify(ctx, relation, a.commitments, a.challenge, a.responses));
    ASSERT_TRUE(sigma_verify(ctx, relation, b.commitments, b.challenge, b.responses));
    auto w = extract_witness(a, b);
    EXPECT_EQ(w, user_witness_vector(in.w));
  }
}

// Honest transcripts under a fixed challenge, over all nonce vectors, equal
// simulated transcripts over all response vectors.
TEST(UserPok, HonestVerifierZeroKnowledgeExhaustive) {
  constexpr std::uint64_t p = 11;
  GroupContext ctx(transparent_params(p));
  const auto& f = ctx.field();
  DeterministicRng rng(8);
  auto in = user_instance(ctx, rng, false);
  auto relation = user_relation(ctx.params(), in.st);
  auto challenge = Scalar::from_u64(f, 7);
  auto key = [&](const std::vector<SourceElement>& a, const std::vector<Scalar>& s) {
    Bytes out;
    for (const auto& e : a) {
      auto b = ctx.group().encode(e);
      out.insert(out.end(), b.begin(), b.end());
    }
    for (const auto& x : s) {
      auto b = x.to_bytes();
      out.insert(out.end(), b.begin(), b.end());
    }
    return out;
  };
  std::multiset<Bytes> real, simulated;
  for (std::uint64_t i = 0; i < p * p * p; ++i) {
    std::vector<Scalar> v{Scalar::from_u64(f, i % p), Scalar::from_u64(f, (i / p) % p),
                          Scalar::from_u64(f, i / (p * p))};
    SigmaProver prover(relation, user_witness_vector(in.w));
    auto a = prover.commit_with_nonces(ctx, v);
    auto s = prover.respond(challenge);
    ASSERT_TRUE(sigma_verify(ctx, relation, a, challenge, s));
    real.insert(key(a, s));
    auto sim = simulate_with_responses(ctx, relation, challenge, v);
    ASSERT_TRUE(sigma_verify(ctx, relation, sim.commitments, challenge, sim.responses));
    simulated.insert(key(sim.commitments, sim.responses));
  }
  EXPECT_EQ(real, simulated);
  EXPECT_EQ(real.size(), p * p * p);
}

TEST(UserPok, InteractiveMode) {
  GroupContext ctx(curve_params());
  DeterministicRng rng(9);
  auto in = user_instance(ctx, rng);
  auto relation = user_relation(ctx.params(), in.st);
  SigmaProver prover(relation, user_witness_vector(in.w));
  auto a = prover.commit(ctx, rng);
  auto c = ctx.group().random_scalar(rng);  // verifier's challenge
  auto s = prover.respond(c);
  EXPECT_TRUE(sigma_verify(ctx, relation, a, c, s));
  EXPECT_FALSE(sigma_verify(ctx, relation, a, c + Scalar::one(ctx.field()), s));
  EXPECT_THROW(prover.respond(c), Error);
}

TEST(UserPok, RejectsZeroRho) {
  GroupContext ctx(transparent_params());
  UserPokWitness w{Scalar::one(ctx.field()), Scalar::zero(ctx.field()), Scalar::one(ctx.field()), {}};
  EXPECT_THROW(make_user_statement(ctx, w), Error);
}

// ---- authority proof -------------------------------------------------------

TEST(AuthorityPok, CompletenessManyInstances) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(10);
  int accepted = 0;
  for (int i = 0; i < 1000; ++i) {
    auto in = authority_instance(ctx, rng, 1 + i % 4);
    auto proof = pok_authority_prove(ctx, in.st, in.w, kSession, rng);
    accepted += pok_authority_verify(ctx, in.st, proof, kSession);
  }
  EXPECT_EQ(accepted, 1000);
}

TEST(AuthorityPok, CompletenessCurve) {
  GroupContext ctx(curve_params());
  DeterministicRng rng(11);
  for (int i = 0; i < 5; ++i) {
    auto in = authority_instance(ctx, rng, 3);
    auto proof = pok_authority_prove(ctx, in.st, in.w, kSession, rng);
    EXPECT_TRUE(pok_authority_verify(ctx, in.st, proof, kSession));
  }
}

// Step-4 equation: P^{-b1'} Q^{b2'} R^{b3'} D^{c} equals the first commitment.
TEST(AuthorityPok, MainClauseEquation) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(12);
  auto in = authority_instance(ctx, rng, 2);
  auto proof = pok_authority_prove(ctx, in.st, in.w, kSession, rng);
  const auto& b = proof.responses;
  auto lhs = ctx.mul(ctx.mul(ctx.mul(ctx.exp(in.st.P, -b[0]), ctx.exp(in.st.Q, b[1])),
                             ctx.exp(in.st.R, b[2])),
                     ctx.exp(in.st.D, proof.challenge));
  EXPECT_EQ(lhs, proof.commitments[0]);
}

TEST(AuthorityPok, PerturbationsRejected) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(13);
  auto in = authority_instance(ctx, rng, 3);
  auto proof = pok_authority_prove(ctx, in.st, in.w, kSession, rng);
  auto one = Scalar::one(ctx.field());
  for (std::size_t i = 0; i < proof.responses.size(); ++i) {
    auto p = proof;
    p.responses[i] += one;
    EXPECT_FALSE(pok_authority_verify(ctx, in.st, p, kSession)) << i;
  }
  for (std::size_t i = 0; i < proof.commitments.size(); ++i) {
    auto p = proof;
    p.commitments[i] = ctx.mul(p.commitments[i], ctx.params().g);
    EXPECT_FALSE(pok_authority_verify(ctx, in.st, p, kSession)) << i;
  }
  // A corrupted blinded component breaks its clause.
  auto st = in.st;
  st.D1 = ctx.mul(st.D1, st.Q);
  EXPECT_FALSE(pok_authority_verify(ctx, st, proof, kSession));
  st = in.st;
  st.Dj.begin()->second = ctx.mul(st.Dj.begin()->second, st.R);
  EXPECT_FALSE(pok_authority_verify(ctx, st, proof, kSession));
}

TEST(AuthorityPok, ClauseDroppingRejected) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(14);
  auto in = authority_instance(ctx, rng, 3);
  // Prover proves only the D clause plus fewer leaves.
  auto partial = in.st;
  auto partial_w = in.w;
  partial.Dj.erase(partial.Dj.begin());
  partial_w.leaf_exponents.erase(partial_w.leaf_exponents.begin());
  auto proof = pok_authority_prove(ctx, partial, partial_w, kSession, rng);
  EXPECT_TRUE(pok_authority_verify(ctx, partial, proof, kSession));
  EXPECT_FALSE(pok_authority_verify(ctx, in.st, proof, kSession));
  auto p = proof;
  p.commitments.pop_back();
  EXPECT_FALSE(pok_authority_verify(ctx, partial, p, kSession));
}

TEST(AuthorityPok, ReplayAcrossSessions) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(15);
  auto in = authority_instance(ctx, rng, 2);
  auto a = pok_authority_prove(ctx, in.st, in.w, as_bytes("s1"), rng);
  auto b = pok_authority_prove(ctx, in.st, in.w, as_bytes("s1"), rng);
  EXPECT_FALSE(a.commitments == b.commitments);
  EXPECT_FALSE(a.challenge == b.challenge);
  EXPECT_FALSE(pok_authority_verify(ctx, in.st, a, as_bytes("s2")));
}

TEST(AuthorityPok, WitnessMismatchDetected) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(16);
  auto in = authority_instance(ctx, rng, 2);
  auto w = in.w;
  w.inv_x += Scalar::one(ctx.field());
  try {
    pok_authority_prove(ctx, in.st, w, kSession, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWitnessStatementMismatch);
  }
}

TEST(AuthorityPok, SpecialSoundnessExtractor) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(17);
  auto in = authority_instance(ctx, rng, 3);
  auto relation = authority_relation(in.st);
  auto wv = authority_witness_vector(in.w);
  std::vector<Scalar> nonces;
  for (std::size_t i = 0; i < wv.size(); ++i) nonces.push_back(ctx.group().random_scalar(rng));
  SigmaProver p1(relation, wv), p2(relation, wv);
  SigmaProof a, b;
  a.commitments = p1.commit_with_nonces(ctx, nonces);
  b.commitments = p2.commit_with_nonces(ctx, nonces);
  a.challenge = Scalar::from_u64(ctx.field(), 3);
  b.challenge = Scalar::from_u64(ctx.field(), 99);
  a.responses = p1.respond(a.challenge);
  b.responses = p2.respond(b.challenge);
  EXPECT_EQ(extract_witness(a, b), wv);
}

TEST(AuthorityPok, SimulatedTranscriptsVerify) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(18);
  auto in = authority_instance(ctx, rng, 2);
  auto relation = authority_relation(in.st);
  auto c = ctx.group().random_scalar(rng);
  auto sim = simulate(ctx, relation, c, rng);
  EXPECT_TRUE(sigma_verify(ctx, relation, sim.commitments, c, sim.responses));
}

// ---- encoding --------------------------------------------------------------

TEST(ProofEncoding, RoundTripAndGarbage) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(19);
  auto in = authority_instance(ctx, rng, 2);
  auto proof = pok_authority_prove(ctx, in.st, in.w, kSession, rng);
  auto bytes = encode_proof(ctx.group(), proof);
  auto back = decode_proof(ctx.group(), bytes);
  EXPECT_EQ(encode_proof(ctx.group(), back), bytes);
  EXPECT_TRUE(pok_authority_verify(ctx, in.st, back, kSession));
  auto code = [&](const Bytes& b) {
    try {
      decode_proof(ctx.group(), b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code(Bytes(bytes.begin(), bytes.end() - 1)), ErrorCode::kMalformedProof);
  EXPECT_EQ(code(Bytes{1, 2, 3}), ErrorCode::kMalformedProof);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_EQ(code(trailing), ErrorCode::kMalformedProof);
  GroupContext other(curve_params());
  EXPECT_THROW(decode_proof(other.group(), bytes), Error);
}

}  // namespace
}  // namespace dkpabe::zkp
