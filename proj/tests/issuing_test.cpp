#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>
#include <thread>
#include <tuple>

#include "dkpabe/error.hpp"
#include "dkpabe/issuing.hpp"
#include "test_support.hpp"

namespace dkpabe::issuing {
namespace {

using dkpabe::testing::curve_params;
using dkpabe::testing::random_tree;
using dkpabe::testing::transparent_params;
namespace oracle = dkpabe::oracle;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

std::shared_ptr<const twopc::HomSecretKey> paillier(unsigned bits) {
  static std::map<unsigned, std::shared_ptr<const twopc::HomSecretKey>> cache;
  auto& sk = cache[bits];
  if (!sk) {
    DeterministicRng rng(900 + bits);
    sk = twopc::paillier_generate(bits, rng);
  }
  return sk;
}

GrantLookup grant(const AccessTree& tree) {
  return [tree](const SourceElement&) { return std::optional<AccessTree>(tree); };
}

struct Transcript {
  Bytes m1, r1, c1, m2;
  AuthorityIssuingSession::View view;
};

// One honest run; key_seed drives r and the sharing exactly as keygen would.
UserKeyShare issue(GroupContext& ctx, const AuthorityKeyPair& keys, std::string_view gid,
                   const AccessTree& tree, std::uint64_t key_seed, Rng& rng, UserOptions opts,
                   Transcript* t = nullptr) {
  DeterministicRng key_rng(key_seed);
  UserIssuingSession user(ctx, keys.pk, gid, rng, std::move(opts));
  AuthorityIssuingSession auth(ctx, keys, rng, key_rng);
  auto m1 = user.start();
  auto r1 = auth.on_request(m1, grant(tree));
  auto c1 = user.on_replies(r1);
  auto m2 = auth.on_completion(c1);
  EXPECT_FALSE(auth.holds_secrets());
  if (t) {
    const auto& g = ctx.group();
    *t = {encode(g, m1), encode(g, r1), encode(g, c1), encode(g, m2), *auth.view()};
  }
  return user.finalize(m2);
}

UserOptions trusted() {
  UserOptions o;
  o.hom_key = twopc::trusted_test_backend();
  return o;
}

std::uint64_t log2nd(const SourceElement& e) { return *oracle::discrete_logs(e).second; }
std::uint64_t log1st(const SourceElement& e) { return *oracle::discrete_logs(e).first; }

TEST(Issuing, BlindMatchesKeygenTransparent) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(1);
  auto keys = authority_setup(ctx, 3, 6, rng);
  for (int i = 0; i < 60; ++i) {
    auto tree = random_tree(rng, 3, 1 + static_cast<std::uint32_t>(i % 6));
    std::string gid = "user" + std::to_string(i) + "@example.org";
    auto opts = i % 10 == 0 ? UserOptions{} : trusted();
    if (i % 10 == 0) opts.hom_key = paillier(512);
    auto blind = issue(ctx, keys, gid, tree, 5000 + i, rng, opts);
    DeterministicRng key_rng(5000 + i);
    auto direct = keygen(ctx, keys.sk, derive_uid(ctx.group(), gid), tree, key_rng);
    ASSERT_EQ(blind, direct) << "run " << i;
  }
}

TEST(Issuing, BlindMatchesKeygenCurve) {
  GroupContext ctx(curve_params());
  DeterministicRng rng(2);
  auto keys = authority_setup(ctx, 1, 3, rng);
  auto tree = AccessTree::gate(2, {AccessTree::leaf({1, 1}), AccessTree::leaf({1, 2}),
                                   AccessTree::leaf({1, 3})});
  UserOptions opts;
  opts.hom_key = paillier(1024);
  auto blind = issue(ctx, keys, "carol@example.org", tree, 77, rng, opts);
  DeterministicRng key_rng(77);
  auto direct = keygen(ctx, keys.sk, derive_uid(ctx.group(), "carol@example.org"), tree, key_rng);
  EXPECT_EQ(blind, direct);
}

TEST(Issuing, RequestIsReproducibleAndPokVerifies) {
  GroupContext ctx(transparent_params());
  DeterministicRng setup(3);
  auto keys = authority_setup(ctx, 1, 2, setup);
  Bytes first;
  for (int rep = 0; rep < 2; ++rep) {
    DeterministicRng rng(33);
    UserIssuingSession user(ctx, keys.pk, "dave", rng, trusted());
    auto m1 = user.start();
    EXPECT_TRUE(zkp::pok_user_verify(ctx, m1.statement, m1.pok, {m1.session.data(), m1.session.size()}));
    auto u = user.uid().to_u64();
    const std::uint64_t p = ctx.group().transparent_modulus();
    EXPECT_EQ(log1st(m1.statement.psi1), log1st(m1.statement.psi2) * u % p);
    EXPECT_EQ(log1st(m1.statement.psi3), log1st(m1.statement.psi4) * u % p);
    auto bytes = encode(ctx.group(), m1);
    if (rep == 0) first = bytes;
    EXPECT_EQ(bytes, first);
  }
}

// Exponents of every blinded component, read back through the oracle.
TEST(Issuing, BlindedComponentsMatchFormulas) {
  auto params = transparent_params();
  GroupContext ctx(params);
  const auto& f = ctx.field();
  DeterministicRng rng(4);
  auto keys = authority_setup(ctx, 2, 4, rng);
  auto tree = AccessTree::gate(1, {AccessTree::leaf({2, 1}),
                                   AccessTree::all_of({AccessTree::leaf({2, 2}), AccessTree::leaf({2, 4})})});
  auto rho1 = Scalar::from_u64(f, 12345), rho2 = Scalar::from_u64(f, 678);
  auto opts = trusted();
  opts.rho_override = {rho1, rho2};

  DeterministicRng key_rng(400);
  UserIssuingSession user(ctx, keys.pk, "erin", rng, opts);
  AuthorityIssuingSession auth(ctx, keys, rng, key_rng);
  auto c1 = user.on_replies(auth.on_request(user.start(), grant(tree)));
  auto m2 = auth.on_completion(c1);

  DeterministicRng replay(400);
  auto rnd = draw_keygen_randomness(tree, f, replay);
  auto u = user.uid();
  auto x = (rnd.r + u) * rho1, y = (keys.sk.beta + u) * rho2;
  EXPECT_EQ(auth.view()->x, x);
  EXPECT_EQ(auth.view()->y, y);

  auto lg = [&](const Scalar& s) { return s.to_u64(); };
  auto hl = Scalar::from_u64(f, log2nd(params->h)), h1l = Scalar::from_u64(f, log2nd(params->h1));
  EXPECT_EQ(log1st(c1.P), lg((rho1 * rho2).inverse()));
  EXPECT_EQ(log2nd(c1.Q), lg(hl / rho2));
  EXPECT_EQ(log2nd(c1.R), lg(h1l / rho1));
  auto pl = (rho1 * rho2).inverse(), ql = hl / rho2, rl = h1l / rho1;
  EXPECT_EQ(log2nd(m2.D), lg(-keys.sk.alpha * pl + ql * keys.sk.beta / x + rl * rnd.r / y));
  EXPECT_EQ(log2nd(m2.D1), lg(ql / x));
  ASSERT_EQ(m2.Dj.size(), 3u);
  for (const auto& [a, e] : m2.Dj) {
    EXPECT_EQ(log2nd(e), lg(rl * rnd.shares.at(a) / (y * keys.sk.t[a.attribute - 1])));
  }
  auto share = user.finalize(m2);
  EXPECT_EQ(log2nd(share.D1), lg(hl / (rnd.r + u)));
}

// (P^-a)^{r1 r2} = g^-a, (Q^{b/x})^{r1 r2} = h^{b/(r+u)}, (R^{r/y})^{r1 r2} = h1^{r/(b+u)}
// over every (rho1, rho2) at p = 101.
TEST(Issuing, UnblindingIdentitiesExhaustive) {
  constexpr std::uint64_t p = 101;
  auto params = transparent_params(p);
  GroupContext ctx(params);
  const auto& f = ctx.field();
  const auto& G = *params;
  DeterministicRng rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    Scalar alpha = Scalar::random_nonzero(f, rng), beta = Scalar::random(f, rng);
    Scalar r = Scalar::random(f, rng), u = Scalar::random(f, rng);
    if ((r + u).is_zero() || (beta + u).is_zero()) continue;
    for (std::uint64_t a = 1; a < p; ++a) {
      for (std::uint64_t b = 1; b < p; ++b) {
        auto rho1 = Scalar::from_u64(f, a), rho2 = Scalar::from_u64(f, b), rr = rho1 * rho2;
        auto x = (r + u) * rho1, y = (beta + u) * rho2;
        auto P = ctx.exp(G.g, rr.inverse()), Q = ctx.exp(G.h, rho2.inverse()),
             R = ctx.exp(G.h1, rho1.inverse());
        ASSERT_EQ(ctx.exp(ctx.exp(P, -alpha), rr), ctx.exp(G.g, -alpha));
        ASSERT_EQ(ctx.exp(ctx.exp(Q, beta / x), rr), ctx.exp(G.h, beta / (r + u)));
        ASSERT_EQ(ctx.exp(ctx.exp(R, r / y), rr), ctx.exp(G.h1, r / (beta + u)));
      }
    }
  }
}

TEST(Issuing, MessagesRoundTrip) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(6);
  auto keys = authority_setup(ctx, 1, 3, rng);
  Transcript t;
  auto opts = trusted();
  opts.hom_key = paillier(512);
  issue(ctx, keys, "frank", AccessTree::any_of({AccessTree::leaf({1, 1}), AccessTree::leaf({1, 3})}),
        60, rng, opts, &t);
  const auto& g = ctx.group();
  EXPECT_EQ(encode(g, decode_request(g, t.m1)), t.m1);
  EXPECT_EQ(encode(g, decode_replies(t.r1)), t.r1);
  EXPECT_EQ(encode(g, decode_completion(g, t.c1)), t.c1);
  EXPECT_EQ(encode(g, decode_blinded_keys(g, t.m2)), t.m2);
  for (const auto* msg : {&t.m1, &t.r1, &t.c1, &t.m2}) {
    Bytes cut(msg->begin(), msg->end() - 1);
    Bytes extra = *msg;
    extra.push_back(0);
    for (const auto& b : {cut, extra}) {
      EXPECT_EQ(code_of([&] {
                  if (msg == &t.m1) decode_request(g, b);
                  if (msg == &t.r1) decode_replies(b);
                  if (msg == &t.c1) decode_completion(g, b);
                  if (msg == &t.m2) decode_blinded_keys(g, b);
                }),
                ErrorCode::kMalformedInput);
    }
  }
}

bool contains(const Bytes& hay, ByteView needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

TEST(Issuing, NoMessageCarriesUidOrGid) {
  GroupContext ctx(curve_params());
  DeterministicRng rng(7);
  auto keys = authority_setup(ctx, 1, 2, rng);
  const std::string gid = "grace.hopper@example.org";
  UserOptions opts;
  opts.hom_key = paillier(1024);
  Transcript t;
  issue(ctx, keys, gid, AccessTree::leaf({1, 2}), 70, rng, opts, &t);
  auto u = derive_uid(ctx.group(), gid);
  auto ub = u.to_bytes();
  auto nb = (-u).to_bytes();
  for (const auto* msg : {&t.m1, &t.r1, &t.c1, &t.m2}) {
    EXPECT_FALSE(contains(*msg, as_bytes(gid)));
    EXPECT_FALSE(contains(*msg, ub));
    EXPECT_FALSE(contains(*msg, nb));
  }
}

// Over all (rho1, rho2) at p = 11 with r and beta fixed: (x, y) jointly, and
// the bases Psi2, Psi4, P, Q, R jointly, have the same multiset for every u;
// Psi1 and Psi3 have the same marginals.
TEST(Issuing, AuthorityViewIndependentOfUid) {
  constexpr std::uint64_t p = 11;
  auto params = transparent_params(p);
  GroupContext ctx(params);
  const auto& f = ctx.field();
  DeterministicRng setup(8);
  auto keys = authority_setup(ctx, 1, 2, setup);
  auto tree = AccessTree::leaf({1, 1});
  DeterministicRng probe(800);
  auto r = draw_keygen_randomness(tree, f, probe).r;

  std::map<std::uint64_t, std::string> gids;
  for (int i = 0; gids.size() < p && i < 10000; ++i) {
    std::string gid = "u" + std::to_string(i);
    gids.emplace(derive_uid(ctx.group(), gid).to_u64(), gid);
  }
  using Bases = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>;
  std::optional<std::multiset<std::pair<std::uint64_t, std::uint64_t>>> xy0;
  std::optional<std::multiset<Bases>> bases0;
  std::optional<std::multiset<std::uint64_t>> psi1_0, psi3_0;
  int compared = 0;
  DeterministicRng rng(801);
  for (const auto& [uv, gid] : gids) {
    auto u = Scalar::from_u64(f, uv);
    if (u.is_zero() || (r + u).is_zero() || (keys.sk.beta + u).is_zero()) continue;
    std::multiset<std::pair<std::uint64_t, std::uint64_t>> xy;
    std::multiset<Bases> bases;
    std::multiset<std::uint64_t> psi1, psi3;
    for (std::uint64_t a = 1; a < p; ++a) {
      for (std::uint64_t b = 1; b < p; ++b) {
        auto opts = trusted();
        opts.rho_override = {Scalar::from_u64(f, a), Scalar::from_u64(f, b)};
        opts.sanity_check = false;
        Transcript t;
        issue(ctx, keys, gid, tree, 800, rng, opts, &t);
        const auto& v = t.view;
        xy.insert({v.x.to_u64(), v.y.to_u64()});
        bases.insert({log1st(v.psi2), log1st(v.psi4), log1st(v.P), log2nd(v.Q), log2nd(v.R)});
        psi1.insert(log1st(v.psi1));
        psi3.insert(log1st(v.psi3));
      }
    }
    if (!xy0) {
      xy0 = xy, bases0 = bases, psi1_0 = psi1, psi3_0 = psi3;
    }
    EXPECT_EQ(xy, *xy0) << "u=" << uv;
    EXPECT_EQ(bases, *bases0) << "u=" << uv;
    EXPECT_EQ(psi1, *psi1_0) << "u=" << uv;
    EXPECT_EQ(psi3, *psi3_0) << "u=" << uv;
    ++compared;
  }
  EXPECT_GE(compared, 6);
}

// Psi1 = Psi2^u is public, so anyone who can take discrete logs (the oracle
// here, or a dictionary of candidate GIDs on the curve) links the request to u.
TEST(Issuing, JointViewDeterminesUidUnderDiscreteLogs) {
  auto params = transparent_params(101);
  GroupContext ctx(params);
  DeterministicRng rng(9);
  auto keys = authority_setup(ctx, 1, 1, rng);
  Transcript t;
  auto opts = trusted();
  issue(ctx, keys, "heidi", AccessTree::leaf({1, 1}), 90, rng, opts, &t);
  const auto& f = ctx.field();
  auto recovered = Scalar::from_u64(f, log1st(t.view.psi1)) / Scalar::from_u64(f, log1st(t.view.psi2));
  EXPECT_EQ(recovered, derive_uid(ctx.group(), "heidi"));
  // The dictionary form needs no oracle.
  EXPECT_EQ(ctx.exp(t.view.psi2, derive_uid(ctx.group(), "heidi")), t.view.psi1);
}

struct Pair {
  GroupContext& ctx;
  DeterministicRng key_rng{1000};
  UserIssuingSession user;
  AuthorityIssuingSession auth;
  Pair(GroupContext& c, const AuthorityKeyPair& keys, Rng& rng, UserOptions opts = trusted(),
       std::string_view gid = "ivan")
      : ctx(c), user(c, keys.pk, gid, rng, std::move(opts)), auth(c, keys, rng, key_rng) {}
};

TEST(Issuing, TamperedBlindSumsRejected) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(10);
  auto keys = authority_setup(ctx, 1, 2, rng);
  auto tree = AccessTree::leaf({1, 1});
  for (int which = 0; which < 2; ++which) {
    Pair s(ctx, keys, rng);
    auto c1 = s.user.on_replies(s.auth.on_request(s.user.start(), grant(tree)));
    auto& z = which == 0 ? c1.z_x : c1.z_y;
    z += Scalar::one(ctx.field());
    EXPECT_EQ(code_of([&] { s.auth.on_completion(c1); }), ErrorCode::kConsistencyCheckFailed);
    EXPECT_FALSE(s.auth.holds_secrets());
    EXPECT_EQ(code_of([&] { s.auth.on_completion(c1); }), ErrorCode::kPhaseViolation);
  }
}

TEST(Issuing, WrongBlindedBasesRejected) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(11);
  auto keys = authority_setup(ctx, 1, 2, rng);
  for (int which = 0; which < 2; ++which) {
    Pair s(ctx, keys, rng);
    auto c1 = s.user.on_replies(s.auth.on_request(s.user.start(), grant(AccessTree::leaf({1, 2}))));
    auto& e = which == 0 ? c1.Q : c1.R;
    e = ctx.mul(e, ctx.params().h);
    EXPECT_EQ(code_of([&] { s.auth.on_completion(c1); }), ErrorCode::kConsistencyCheckFailed);
    EXPECT_FALSE(s.auth.holds_secrets());
  }
}

TEST(Issuing, CorruptedBlindedKeyRejected) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(12);
  auto keys = authority_setup(ctx, 1, 3, rng);
  auto tree = AccessTree::all_of({AccessTree::leaf({1, 1}), AccessTree::leaf({1, 3})});
  for (int which = 0; which < 3; ++which) {
    Pair s(ctx, keys, rng);
    auto m2 = s.auth.on_completion(s.user.on_replies(s.auth.on_request(s.user.start(), grant(tree))));
    auto& e = which == 0 ? m2.D1 : which == 1 ? m2.D : m2.Dj.begin()->second;
    e = ctx.mul(e, ctx.params().h);
    EXPECT_EQ(code_of([&] { s.user.finalize(m2); }), ErrorCode::kSigma2Rejected);
    EXPECT_EQ(code_of([&] { s.user.finalize(m2); }), ErrorCode::kPhaseViolation);
  }
}

TEST(Issuing, BlindedKeysMustCoverTreeExactly) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(13);
  auto keys = authority_setup(ctx, 1, 3, rng);
  Pair s(ctx, keys, rng);
  auto m2 = s.auth.on_completion(
      s.user.on_replies(s.auth.on_request(s.user.start(), grant(AccessTree::any_of(
                                                                {AccessTree::leaf({1, 1}), AccessTree::leaf({1, 2})})))));
  m2.Dj.erase(m2.Dj.begin());
  EXPECT_EQ(code_of([&] { s.user.finalize(m2); }), ErrorCode::kMalformedInput);
}

// Sigma2 only proves the blinded key is well formed on (P, Q, R); an
// authority using an alpha that does not match its public key passes it.
TEST(Issuing, MismatchedAuthorityKeyCaughtBySanityCheck) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(14);
  auto keys = authority_setup(ctx, 1, 2, rng);
  auto forged = keys;
  forged.sk.alpha += Scalar::one(ctx.field());
  {
    Pair s(ctx, forged, rng);
    auto m2 = s.auth.on_completion(s.user.on_replies(s.auth.on_request(s.user.start(), grant(AccessTree::leaf({1, 1})))));
    EXPECT_EQ(code_of([&] { s.user.finalize(m2); }), ErrorCode::kUnblindSanityFailed);
  }
  {
    auto opts = trusted();
    opts.sanity_check = false;
    Pair s(ctx, forged, rng, opts);
    auto m2 = s.auth.on_completion(s.user.on_replies(s.auth.on_request(s.user.start(), grant(AccessTree::leaf({1, 1})))));
    EXPECT_NO_THROW(s.user.finalize(m2));
  }
}

TEST(Issuing, RequestRejections) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(15);
  auto keys = authority_setup(ctx, 1, 2, rng);
  auto other = authority_setup(ctx, 2, 2, rng);
  {
    Pair s(ctx, keys, rng);
    auto m1 = s.user.start();
    m1.statement.psi1 = ctx.mul(m1.statement.psi1, ctx.params().g);
    EXPECT_EQ(code_of([&] { s.auth.on_request(m1, grant(AccessTree::leaf({1, 1}))); }),
              ErrorCode::kPokRejected);
    EXPECT_FALSE(s.auth.holds_secrets());
  }
  {
    Pair s(ctx, keys, rng);
    auto m1 = s.user.start();
    m1.session[0] ^= 1;  // proof was bound to the original id
    EXPECT_EQ(code_of([&] { s.auth.on_request(m1, grant(AccessTree::leaf({1, 1}))); }),
              ErrorCode::kPokRejected);
  }
  {
    Pair s(ctx, keys, rng);
    auto m1 = s.user.start();
    EXPECT_EQ(code_of([&] { s.auth.on_request(m1, [](const SourceElement&) { return std::nullopt; }); }),
              ErrorCode::kProtocolAbort);
  }
  {
    Pair s(ctx, keys, rng);
    auto m1 = s.user.start();
    EXPECT_EQ(code_of([&] { s.auth.on_request(m1, grant(AccessTree::leaf({2, 1}))); }),
              ErrorCode::kForeignLeaf);
  }
  {
    // Curve-sized field with a key too small for it.
    GroupContext cctx(curve_params());
    auto ckeys = authority_setup(cctx, 1, 1, rng);
    UserOptions small;
    small.hom_key = paillier(512);
    Pair refused(cctx, ckeys, rng, small);
    EXPECT_EQ(code_of([&] { refused.user.start(); }), ErrorCode::kInvalidArgument);
    UserOptions opts;
    opts.hom_key = paillier(1024);
    Pair s(cctx, ckeys, rng, opts);
    auto m1 = s.user.start();
    m1.hom_key = paillier(512)->public_key();
    EXPECT_EQ(code_of([&] { s.auth.on_request(m1, grant(AccessTree::leaf({1, 1}))); }),
              ErrorCode::kProtocolAbort);
    EXPECT_FALSE(s.auth.holds_secrets());
  }
  (void)other;
}

TEST(Issuing, GrantLookupSeesEnrolledCommitment) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(16);
  auto keys = authority_setup(ctx, 1, 2, rng);
  auto u = derive_uid(ctx.group(), "judy");
  auto e = enroll(ctx, u, rng);
  auto fp = commitment_fingerprint(ctx.group(), e.com);
  EXPECT_EQ(fp.size(), 64u);
  for (int run = 0; run < 2; ++run) {
    auto opts = trusted();
    opts.enrollment = e;
    Pair s(ctx, keys, rng, opts, "judy");
    std::string seen;
    auto m2 = s.auth.on_completion(s.user.on_replies(s.auth.on_request(
        s.user.start(), [&](const SourceElement& com) {
          seen = commitment_fingerprint(ctx.group(), com);
          return std::optional<AccessTree>(AccessTree::leaf({1, 2}));
        })));
    EXPECT_EQ(seen, fp);
    EXPECT_NO_THROW(s.user.finalize(m2));
  }
  auto opts = trusted();
  opts.enrollment = enroll(ctx, derive_uid(ctx.group(), "mallory"), rng);
  Pair s(ctx, keys, rng, opts, "judy");
  EXPECT_EQ(code_of([&] { s.user.start(); }), ErrorCode::kInvalidArgument);
}

TEST(Issuing, PhasesAdvanceStrictly) {
  GroupContext ctx(transparent_params());
  DeterministicRng rng(17);
  auto keys = authority_setup(ctx, 1, 1, rng);
  Pair s(ctx, keys, rng);
  EXPECT_EQ(code_of([&] { s.user.on_replies({}); }), ErrorCode::kPhaseViolation);
  EXPECT_EQ(code_of([&] { s.auth.on_completion({}); }), ErrorCode::kPhaseViolation);
  auto m1 = s.user.start();
  EXPECT_EQ(code_of([&] { s.user.start(); }), ErrorCode::kPhaseViolation);
  auto r1 = s.auth.on_request(m1, grant(AccessTree::leaf({1, 1})));
  EXPECT_EQ(code_of([&] { s.auth.on_request(m1, grant(AccessTree::leaf({1, 1}))); }),
            ErrorCode::kPhaseViolation);
  EXPECT_EQ(code_of([&] { s.user.finalize({}); }), ErrorCode::kPhaseViolation);
  auto c1 = s.user.on_replies(r1);
  s.user.abort();
  EXPECT_EQ(code_of([&] { s.user.finalize(s.auth.on_completion(c1)); }), ErrorCode::kPhaseViolation);
  s.auth.abort();
  EXPECT_FALSE(s.auth.holds_secrets());
}

TEST(Issuing, ConcurrentSessionsShareOneAuthority) {
  GroupContext ctx(transparent_params());
  DeterministicRng setup(18);
  auto keys = authority_setup(ctx, 1, 4, setup);
  auto tree = AccessTree::gate(2, {AccessTree::leaf({1, 1}), AccessTree::leaf({1, 2}),
                                   AccessTree::leaf({1, 4})});
  std::vector<int> ok(8, 0);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] {
      DeterministicRng rng(1800 + i);
      for (int j = 0; j < 10; ++j) {
        std::string gid = "t" + std::to_string(i) + "-" + std::to_string(j);
        auto share = issue(ctx, keys, gid, tree, 9000 + i * 100 + j, rng, trusted());
        DeterministicRng key_rng(9000 + i * 100 + j);
        if (share == keygen(ctx, keys.sk, derive_uid(ctx.group(), gid), tree, key_rng)) ++ok[i];
      }
    });
  }
  for (auto& t : threads) t.join();
  for (int i = 0; i < 8; ++i) EXPECT_EQ(ok[i], 10);
}

}  // namespace
}  // namespace dkpabe::issuing
