#include <gtest/gtest.h>

#include "dkpabe/error.hpp"
#include "dkpabe/kpabe.hpp"
#include "test_support.hpp"

namespace dkpabe {
namespace {

using oracle::discrete_log;
using oracle::discrete_logs;
using testing::curve_params;
using testing::issue_direct;
using testing::random_message;
using testing::random_scenario;
using testing::transparent_params;

// Logs of h and h1 at the default transparent prime, recomputed by hand from
// the SHA-512 derivation.
constexpr std::uint64_t kLogH = 552404146;
constexpr std::uint64_t kLogH1 = 1572213388;

std::uint64_t second_log(const SourceElement& e) { return *discrete_logs(e).second; }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

// ---- global setup ----------------------------------------------------------

TEST(GlobalSetup, Deterministic) {
  auto a = global_setup(128, Backend::kCurve);
  auto b = global_setup(128, Backend::kCurve);
  EXPECT_EQ(a.group, b.group);
  EXPECT_EQ(a.g, b.g);
  EXPECT_EQ(a.h, b.h);
  EXPECT_EQ(a.h1, b.h1);
  EXPECT_EQ(a.egg, b.egg);
  EXPECT_FALSE(a.h == a.g);
  EXPECT_FALSE(a.h1 == a.g);
  EXPECT_FALSE(a.h1 == a.h);
}

TEST(GlobalSetup, RejectsUnsupportedSecurity) {
  EXPECT_EQ(code_of([] { global_setup(256, Backend::kCurve); }), ErrorCode::kUnsupportedParameters);
  EXPECT_EQ(code_of([] { global_setup(80, Backend::kCurve); }), ErrorCode::kUnsupportedParameters);
}

TEST(GlobalSetup, TransparentFixtureAt101) {
  auto p = global_setup(0, Backend::kTransparent, 101);
  EXPECT_EQ(*discrete_logs(p.g).first, 1u);
  EXPECT_EQ(*discrete_logs(p.g).second, 1u);
  EXPECT_FALSE(discrete_logs(p.h).first.has_value());
  EXPECT_EQ(second_log(p.h), 41u);
  EXPECT_EQ(second_log(p.h1), 58u);
  EXPECT_EQ(discrete_log(p.egg), 1u);
}

TEST(GlobalSetup, TransparentFixtureDefault) {
  auto p = global_setup(0, Backend::kTransparent);
  EXPECT_EQ(second_log(p.h), kLogH);
  EXPECT_EQ(second_log(p.h1), kLogH1);
}

TEST(Uid, DerivationVector) {
  auto u = derive_uid(GroupDescriptor::transparent(GroupDescriptor::kDefaultTransparentPrime),
                      "alice@example.org");
  EXPECT_EQ(u.to_u64(), 1689048816u);
  auto g = GroupDescriptor::curve();
  EXPECT_EQ(derive_uid(g, "alice"), derive_uid(g, "alice"));
  EXPECT_FALSE(derive_uid(g, "alice") == derive_uid(g, "bob"));
}

// ---- authority setup -------------------------------------------------------

TEST(AuthoritySetup, OracleSingleAttribute) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(1);
  auto kp = authority_setup(ctx, 1, 1, rng);
  ASSERT_EQ(kp.pk.T.size(), 1u);
  EXPECT_EQ(discrete_log(kp.pk.Y), kp.sk.alpha.to_u64());
  EXPECT_EQ(second_log(kp.pk.Z), kp.sk.beta.to_u64());
  EXPECT_EQ(*discrete_logs(kp.pk.Z).first, kp.sk.beta.to_u64());
  EXPECT_EQ(second_log(kp.pk.T[0]), kp.sk.t[0].to_u64());
  EXPECT_FALSE(kp.sk.alpha.is_zero());
  EXPECT_EQ(kp.pk.attribute("a1"), (AttributeId{1, 1}));
  EXPECT_EQ(code_of([&] { kp.pk.attribute("nope"); }), ErrorCode::kUnknownAttribute);
}

TEST(AuthoritySetup, CostIsNPlusTwoExponentiations) {
  for (auto params : {transparent_params(), curve_params()}) {
    GroupContext ctx(params);
    DeterministicRng rng(2);
    for (std::uint32_t n : {1u, 3u, 4u, 7u}) {
      ctx.reset_counters();
      authority_setup(ctx, 1, n, rng);
      EXPECT_EQ(ctx.counters_snapshot(), (OpCounts{0, n + 2, 0}));
    }
  }
}

TEST(AuthoritySetup, RejectsBadInput) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(3);
  EXPECT_EQ(code_of([&] { authority_setup(ctx, 0, 2, rng); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { authority_setup(ctx, 1, "x", {"a", "a"}, rng); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { authority_setup(ctx, 1, "x", {}, rng); }), ErrorCode::kInvalidArgument);
}

// ---- keygen ----------------------------------------------------------------

TEST(Keygen, ComponentLogsMatchFormulas) {
  GroupContext ctx(transparent_params());
  const auto& f = ctx.field();
  DeterministicRng rng(4);
  auto kp = authority_setup(ctx, 1, 6, rng);
  for (int trial = 0; trial < 40; ++trial) {
    auto tree = testing::random_tree(rng, 1, 1 + trial % 6);
    auto u = ctx.group().random_scalar(rng);
    auto seed = rng.next_u64();
    DeterministicRng a(seed), b(seed);
    auto share = keygen(ctx, kp.sk, u, tree, a);
    // Replay the draws: r first, then the sharing.
    Scalar r = Scalar::random(f, b);
    while ((r + u).is_zero()) r = Scalar::random(f, b);
    auto q = share_secret(tree, r, b);

    Scalar lh = Scalar::from_u64(f, kLogH), lh1 = Scalar::from_u64(f, kLogH1);
    const auto& sk = kp.sk;
    Scalar d = -sk.alpha + sk.beta / (r + u) * lh + r / (sk.beta + u) * lh1;
    EXPECT_FALSE(discrete_logs(share.D).first.has_value());
    EXPECT_EQ(second_log(share.D), d.to_u64());
    EXPECT_EQ(Scalar::from_u64(f, second_log(share.D1)) * (r + u), lh);
    ASSERT_EQ(share.Dj.size(), q.size());
    for (const auto& [attr, qv] : q) {
      Scalar dj = Scalar::from_u64(f, second_log(share.Dj.at(attr)));
      EXPECT_EQ(dj * (sk.beta + u) * sk.t[attr.attribute - 1], lh1 * qv);
    }
  }
}

TEST(Keygen, SameUidAcrossAuthorities) {
  GroupContext ctx(transparent_params());
  const auto& f = ctx.field();
  DeterministicRng rng(5);
  auto a1 = authority_setup(ctx, 1, 3, rng);
  auto a2 = authority_setup(ctx, 2, 3, rng);
  auto u = ctx.group().random_scalar(rng);
  auto tree1 = AccessTree::leaf({1, 2});
  auto tree2 = AccessTree::leaf({2, 3});
  std::uint64_t seed1 = 100, seed2 = 200;
  DeterministicRng g1(seed1), g2(seed2);
  auto s1 = keygen(ctx, a1.sk, u, tree1, g1);
  auto s2 = keygen(ctx, a2.sk, u, tree2, g2);
  EXPECT_FALSE(s1.D1 == s2.D1);
  // r_k from the replayed stream; u recovered from D1 = h^{1/(r+u)}.
  DeterministicRng r1(seed1), r2(seed2);
  Scalar lh = Scalar::from_u64(f, kLogH);
  auto u1 = lh / Scalar::from_u64(f, second_log(s1.D1)) - Scalar::random(f, r1);
  auto u2 = lh / Scalar::from_u64(f, second_log(s2.D1)) - Scalar::random(f, r2);
  EXPECT_EQ(u1, u);
  EXPECT_EQ(u2, u);
}

TEST(Keygen, ResamplesDegenerateR) {
  auto params = transparent_params(101);
  GroupContext ctx(params);
  DeterministicRng rng(6);
  auto kp = authority_setup(ctx, 1, 2, rng);
  auto tree = AccessTree::any_of({AccessTree::leaf({1, 1}), AccessTree::leaf({1, 2})});
  int forced = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    DeterministicRng peek(seed);
    Scalar first = Scalar::random(ctx.field(), peek);
    Scalar u = -first;  // makes the first draw of r degenerate
    if ((kp.sk.beta + u).is_zero()) continue;
    DeterministicRng draw(seed);
    auto rnd = draw_keygen_randomness(tree, ctx.field(), draw, u);
    EXPECT_FALSE((rnd.r + u).is_zero());
    EXPECT_FALSE(rnd.r == first);
    DeterministicRng use(seed);
    auto share = keygen(ctx, kp.sk, u, tree, use);
    DeterministicRng enc(seed + 1000);
    auto m = random_message(ctx, enc);
    auto ct = encrypt(ctx, {kp.pk}, {{1, {{1, 2}}}}, m, enc);
    EXPECT_EQ(decrypt(ctx, {{1, share}}, ct), m);
    ++forced;
  }
  EXPECT_GT(forced, 40);
}

TEST(Keygen, Errors) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(7);
  auto kp = authority_setup(ctx, 1, 2, rng);
  auto u = ctx.group().random_scalar(rng);
  EXPECT_EQ(code_of([&] { keygen(ctx, kp.sk, u, AccessTree::leaf({2, 1}), rng); }),
            ErrorCode::kForeignLeaf);
  EXPECT_EQ(code_of([&] { keygen(ctx, kp.sk, u, AccessTree::leaf({1, 3}), rng); }),
            ErrorCode::kForeignLeaf);
  EXPECT_EQ(code_of([&] { keygen(ctx, kp.sk, -kp.sk.beta, AccessTree::leaf({1, 1}), rng); }),
            ErrorCode::kDegenerateUid);
}

TEST(Keygen, Cost) {
  GroupContext ctx(curve_params());
  DeterministicRng rng(8);
  auto kp = authority_setup(ctx, 1, 4, rng);
  auto tree = testing::random_tree(rng, 1, 4);
  ctx.reset_counters();
  keygen(ctx, kp.sk, ctx.group().random_scalar(rng), tree, rng);
  EXPECT_EQ(ctx.counters_snapshot(), (OpCounts{2, 4 + 4, 0}));
}

// ---- encryption ------------------------------------------------------------

TEST(Encrypt, OracleSingleAuthority) {
  GroupContext ctx(transparent_params());
  const auto& f = ctx.field();
  DeterministicRng rng(9);
  auto kp = authority_setup(ctx, 1, 3, rng);
  auto m = random_message(ctx, rng);
  DeterministicRng a(77), b(77);
  auto ct = encrypt(ctx, {kp.pk}, {{1, {{1, 2}}}}, m, a);
  Scalar s = Scalar::random_nonzero(f, b);
  EXPECT_EQ(*discrete_logs(ct.C2).first, s.to_u64());
  EXPECT_EQ(*discrete_logs(ct.C2).second, s.to_u64());
  EXPECT_EQ(second_log(ct.C3.at(1)), (kp.sk.beta * s).to_u64());
  ASSERT_EQ(ct.Ckj.size(), 1u);
  EXPECT_EQ(*discrete_logs(ct.Ckj.at({1, 2})).first, (kp.sk.t[1] * s).to_u64());
  auto c1 = Scalar::from_u64(f, discrete_log(m)) + kp.sk.alpha * s;
  EXPECT_EQ(discrete_log(ct.C1), c1.to_u64());
  EXPECT_EQ(ct.source_element_count(), 3u);
}

TEST(Encrypt, IdentityMessage) {
  GroupContext ctx(transparent_params());
  const auto& f = ctx.field();
  DeterministicRng rng(10);
  auto a1 = authority_setup(ctx, 1, 2, rng);
  auto a2 = authority_setup(ctx, 2, 2, rng);
  DeterministicRng a(5), b(5);
  auto ct = encrypt(ctx, {a1.pk, a2.pk}, {{1, {{1, 1}}}, {2, {{2, 2}}}},
                    ctx.group().target_identity(), a);
  Scalar s = Scalar::random_nonzero(f, b);
  EXPECT_EQ(discrete_log(ct.C1), ((a1.sk.alpha + a2.sk.alpha) * s).to_u64());
}

TEST(Encrypt, CostTwoAuthoritiesThreeAttributes) {
  for (auto params : {transparent_params(), curve_params()}) {
    GroupContext ctx(params);
    DeterministicRng rng(11);
    auto a1 = authority_setup(ctx, 1, 3, rng);
    auto a2 = authority_setup(ctx, 2, 3, rng);
    auto m = random_message(ctx, rng);
    ctx.reset_counters();
    auto ct = encrypt(ctx, {a1.pk, a2.pk},
                      {{1, {{1, 1}, {1, 2}, {1, 3}}}, {2, {{2, 1}, {2, 2}, {2, 3}}}}, m, rng);
    auto c = ctx.counters_snapshot();
    const std::uint64_t N = 2, n = 3;
    EXPECT_EQ(c.exponentiations, 1 + 2 * N + n * N);
    // Per-authority C3 means no C3 aggregation: N multiplications, N - 1
    // fewer than the aggregated form.
    EXPECT_EQ(c.multiplications, N);
    EXPECT_EQ((2 * N - 1) - c.multiplications, N - 1);
    EXPECT_EQ(c.pairings, 0u);
    EXPECT_EQ(ct.source_element_count(), 1 + N + n * N);
  }
}

TEST(Encrypt, Errors) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(12);
  auto kp = authority_setup(ctx, 1, 2, rng);
  auto m = ctx.group().target_identity();
  EXPECT_EQ(code_of([&] { encrypt(ctx, {kp.pk}, {}, m, rng); }), ErrorCode::kEmptyAuthoritySet);
  EXPECT_EQ(code_of([&] { encrypt(ctx, {kp.pk}, {{1, {}}}, m, rng); }), ErrorCode::kEmptyAuthoritySet);
  EXPECT_EQ(code_of([&] { encrypt(ctx, {kp.pk}, {{1, {{1, 3}}}}, m, rng); }),
            ErrorCode::kUnknownAttribute);
  EXPECT_EQ(code_of([&] { encrypt(ctx, {kp.pk}, {{2, {{2, 1}}}}, m, rng); }),
            ErrorCode::kUnknownAttribute);
  EXPECT_EQ(code_of([&] { encrypt(ctx, {kp.pk}, {{1, {{2, 1}}}}, m, rng); }),
            ErrorCode::kUnknownAttribute);
}

// ---- decryption ------------------------------------------------------------

TEST(DecryptNode, LeafOracle) {
  GroupContext ctx(transparent_params());
  const auto& f = ctx.field();
  DeterministicRng rng(13);
  auto kp = authority_setup(ctx, 1, 2, rng);
  auto u = ctx.group().random_scalar(rng);
  auto tree = AccessTree::leaf({1, 2});
  DeterministicRng k1(1), k2(1);
  auto share = keygen(ctx, kp.sk, u, tree, k1);
  Scalar r = Scalar::random(f, k2);
  DeterministicRng e1(2), e2(2);
  auto ct = encrypt(ctx, {kp.pk}, {{1, {{1, 2}}}}, ctx.group().target_identity(), e1);
  Scalar s = Scalar::random_nonzero(f, e2);
  auto plan = select_satisfying(tree, ct.attributes.at(1));
  auto v = decrypt_node(ctx, AccessTree::kRoot, plan, share, ct);
  auto expect = s * r / (kp.sk.beta + u) * Scalar::from_u64(f, kLogH1);
  EXPECT_EQ(discrete_log(v), expect.to_u64());
}

TEST(DecryptNode, OneOfTwoEqualsEitherChild) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(14);
  auto kp = authority_setup(ctx, 1, 2, rng);
  auto u = ctx.group().random_scalar(rng);
  auto tree = AccessTree::any_of({AccessTree::leaf({1, 1}), AccessTree::leaf({1, 2})});
  auto share = keygen(ctx, kp.sk, u, tree, rng);
  auto ct = encrypt(ctx, {kp.pk}, {{1, {{1, 1}, {1, 2}}}}, ctx.group().target_identity(), rng);
  auto root = decrypt_node(ctx, 0, select_satisfying(tree, {{1, 1}, {1, 2}}), share, ct);
  EXPECT_EQ(root, ctx.pair(ct.Ckj.at({1, 1}), share.Dj.at({1, 1})));
  EXPECT_EQ(root, ctx.pair(ct.Ckj.at({1, 2}), share.Dj.at({1, 2})));
}

TEST(DecryptNode, DepthOneMatchesProductFormula) {
  for (auto params : {transparent_params(), curve_params()}) {
    GroupContext ctx(params);
    const auto& f = ctx.field();
    DeterministicRng rng(15);
    auto kp = authority_setup(ctx, 1, 5, rng);
    auto u = ctx.group().random_scalar(rng);
    std::vector<AccessTree> leaves;
    for (std::uint32_t j = 1; j <= 5; ++j) leaves.push_back(AccessTree::leaf({1, j}));
    auto tree = AccessTree::gate(3, std::move(leaves));
    auto share = keygen(ctx, kp.sk, u, tree, rng);
    AttributeSet attrs{{1, 2}, {1, 4}, {1, 5}};
    auto ct = encrypt(ctx, {kp.pk}, {{1, attrs}}, ctx.group().target_identity(), rng);
    auto got = decrypt_node(ctx, 0, select_satisfying(tree, attrs), share, ct);
    // prod_j e(C_j, D^j)^{Delta_{j,S}(0)} with S the attribute indices.
    std::vector<Scalar> S;
    for (const auto& a : attrs) S.push_back(Scalar::from_u64(f, a.attribute));
    auto expect = ctx.group().target_identity();
    for (const auto& a : attrs) {
      auto delta = lagrange_coeff(Scalar::from_u64(f, a.attribute), S, Scalar::zero(f));
      expect = ctx.mul(expect, ctx.exp(ctx.pair(ct.Ckj.at(a), share.Dj.at(a)), delta));
    }
    EXPECT_EQ(got, expect);
  }
}

TEST(Decrypt, RoundTripBothBackends) {
  for (auto params : {transparent_params(), curve_params()}) {
    GroupContext ctx(params);
    DeterministicRng rng(16);
    int trials = params->group.backend() == Backend::kCurve ? 8 : 60;
    for (int t = 0; t < trials; ++t) {
      auto N = 1 + static_cast<std::uint32_t>(t % 4);
      auto sc = random_scenario(ctx, rng, N);
      auto u = ctx.group().random_scalar(rng);
      auto shares = issue_direct(ctx, sc, u, rng);
      auto m = random_message(ctx, rng);
      auto ct = encrypt(ctx, sc.pks(), sc.attr_sets, m, rng);
      ASSERT_EQ(decrypt(ctx, shares, ct), m);
    }
  }
}

TEST(Decrypt, Cost) {
  for (auto params : {transparent_params(), curve_params()}) {
    GroupContext ctx(params);
    DeterministicRng rng(17);
    for (std::uint64_t N : {1u, 2u, 3u}) {
      const std::uint64_t n = 3;
      std::vector<AuthorityKeyPair> kps;
      std::vector<AuthorityPublicKey> pks;
      std::map<std::uint32_t, AttributeSet> sets;
      std::map<std::uint32_t, UserKeyShare> shares;
      auto u = ctx.group().random_scalar(rng);
      for (std::uint32_t k = 1; k <= N; ++k) {
        kps.push_back(authority_setup(ctx, k, n, rng));
        pks.push_back(kps.back().pk);
        auto tree = AccessTree::all_of(
            {AccessTree::leaf({k, 1}), AccessTree::leaf({k, 2}), AccessTree::leaf({k, 3})});
        shares.emplace(k, keygen(ctx, kps.back().sk, u, tree, rng));
        sets[k] = tree.attributes();
      }
      auto m = random_message(ctx, rng);
      auto ct = encrypt(ctx, pks, sets, m, rng);
      ctx.reset_counters();
      EXPECT_EQ(decrypt(ctx, shares, ct), m);
      auto c = ctx.counters_snapshot();
      EXPECT_EQ(c.pairings, 2 * N + n * N);
      EXPECT_EQ(c.exponentiations, n * N);
      EXPECT_EQ(c.multiplications, 2 * N + n * N);
      EXPECT_EQ(c.pairings - (1 + N + n * N), N - 1);
    }
  }
}

TEST(Decrypt, Errors) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(18);
  auto sc = random_scenario(ctx, rng, 2, 4, true);
  auto u = ctx.group().random_scalar(rng);
  auto shares = issue_direct(ctx, sc, u, rng);
  auto ct = encrypt(ctx, sc.pks(), sc.attr_sets, random_message(ctx, rng), rng);
  EXPECT_EQ(code_of([&] { decrypt(ctx, shares, ct); }), ErrorCode::kPolicyUnsatisfied);
  shares.erase(sc.broken);
  EXPECT_EQ(code_of([&] { decrypt(ctx, shares, ct); }), ErrorCode::kMissingShare);
}

TEST(Decrypt, UnsatisfiedAlwaysRejected) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(19);
  for (int t = 0; t < 50; ++t) {
    auto sc = random_scenario(ctx, rng, 1 + t % 4, 6, true);
    auto shares = issue_direct(ctx, sc, ctx.group().random_scalar(rng), rng);
    auto ct = encrypt(ctx, sc.pks(), sc.attr_sets, random_message(ctx, rng), rng);
    ASSERT_EQ(code_of([&] { decrypt(ctx, shares, ct); }), ErrorCode::kPolicyUnsatisfied);
  }
}

TEST(Decrypt, NewAuthorityLeavesExistingMaterialValid) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(20);
  auto sc = random_scenario(ctx, rng, 2);
  auto u = ctx.group().random_scalar(rng);
  auto shares = issue_direct(ctx, sc, u, rng);
  auto m = random_message(ctx, rng);
  auto ct = encrypt(ctx, sc.pks(), sc.attr_sets, m, rng);
  auto a3 = authority_setup(ctx, 3, 2, rng);
  shares.emplace(3, keygen(ctx, a3.sk, u, AccessTree::leaf({3, 1}), rng));
  EXPECT_EQ(decrypt(ctx, shares, ct), m);
  auto pks = sc.pks();
  pks.push_back(a3.pk);
  auto sets = sc.attr_sets;
  sets[3] = {{3, 1}};
  auto ct3 = encrypt(ctx, pks, sets, m, rng);
  EXPECT_EQ(decrypt(ctx, shares, ct3), m);
}

// ---- collusion -------------------------------------------------------------

// Within one authority: u1 holds AND(a1, a3), u2 holds AND(a2, a4) and the
// ciphertext carries {a1, a2}. Neither decrypts alone; no forged share built
// from their pooled components does either.
TEST(Collusion, WithinAuthorityComponentMixesFail) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(21);
  auto kp = authority_setup(ctx, 1, 4, rng);
  auto u1 = ctx.group().random_scalar(rng), u2 = ctx.group().random_scalar(rng);
  auto l = [](std::uint32_t j) { return AccessTree::leaf({1, j}); };
  auto k1 = keygen(ctx, kp.sk, u1, AccessTree::all_of({l(1), l(3)}), rng);
  auto k2 = keygen(ctx, kp.sk, u2, AccessTree::all_of({l(2), l(4)}), rng);
  auto m = random_message(ctx, rng);
  auto ct = encrypt(ctx, {kp.pk}, {{1, {{1, 1}, {1, 2}}}}, m, rng);
  EXPECT_EQ(code_of([&] { decrypt(ctx, {{1, k1}}, ct); }), ErrorCode::kPolicyUnsatisfied);
  EXPECT_EQ(code_of([&] { decrypt(ctx, {{1, k2}}, ct); }), ErrorCode::kPolicyUnsatisfied);
  const UserKeyShare* src[2] = {&k1, &k2};
  int successes = 0, attempts = 0;
  for (const auto& forged : {AccessTree::all_of({l(1), l(2)}), AccessTree::any_of({l(1), l(2)})}) {
    for (int d = 0; d < 2; ++d) {
      for (int d1 = 0; d1 < 2; ++d1) {
        UserKeyShare mix{1, forged, src[d]->D, src[d1]->D1,
                         {{{1, 1}, k1.Dj.at({1, 1})}, {{1, 2}, k2.Dj.at({1, 2})}}};
        ++attempts;
        if (decrypt(ctx, {{1, mix}}, ct) == m) ++successes;
      }
    }
  }
  EXPECT_EQ(attempts, 8);
  EXPECT_EQ(successes, 0);
}

// Whole-share swap across authorities. Each authority's block cancels on its
// own, so a user-1 share for A1 plus a user-2 share for A2 decrypts. This
// pins the current behaviour; see the README's security notes.
TEST(Collusion, WholeShareSwapAcrossAuthoritiesDecrypts) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(22);
  auto a1 = authority_setup(ctx, 1, 1, rng);
  auto a2 = authority_setup(ctx, 2, 1, rng);
  auto u1 = ctx.group().random_scalar(rng), u2 = ctx.group().random_scalar(rng);
  auto s1 = keygen(ctx, a1.sk, u1, AccessTree::leaf({1, 1}), rng);
  auto s2 = keygen(ctx, a2.sk, u2, AccessTree::leaf({2, 1}), rng);
  auto m = random_message(ctx, rng);
  auto ct = encrypt(ctx, {a1.pk, a2.pk}, {{1, {{1, 1}}}, {2, {{2, 1}}}}, m, rng);
  EXPECT_EQ(decrypt(ctx, {{1, s1}, {2, s2}}, ct), m);
}

}  // namespace
}  // namespace dkpabe
