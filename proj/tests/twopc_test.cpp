#include <gtest/gtest.h>

#include <map>
#include <set>

#include "dkpabe/error.hpp"
#include "dkpabe/twopc.hpp"
#include "test_support.hpp"

namespace dkpabe::twopc {
namespace {

using dkpabe::testing::transparent_params;

FieldRef field(std::uint64_t p = GroupDescriptor::kDefaultTransparentPrime) {
  return GroupDescriptor::transparent(p).field();
}

Scalar run(const std::shared_ptr<const HomSecretKey>& sk, const Scalar& u, const Scalar& rho,
           const Scalar& v, Rng& rng) {
  UserBlindSum user(sk, u, rho);
  AuthorityBlindSum auth(sk->public_key(), v);
  auto req = user.request(rng);
  auto resp = auth.respond(req, rng);
  return auth.finish(user.complete(resp));
}

std::shared_ptr<const HomSecretKey> test_paillier() {
  static auto sk = [] {
    DeterministicRng rng(1234);
    return paillier_generate(512, rng);
  }();
  return sk;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(BlindSum, TrustedSmallExample) {
  auto f = field(101);
  DeterministicRng rng(1);
  auto x = run(trusted_test_backend(), Scalar::from_u64(f, 3), Scalar::from_u64(f, 5),
               Scalar::from_u64(f, 7), rng);
  EXPECT_EQ(x.to_u64(), 50u);
}

TEST(BlindSum, ZeroUid) {
  auto f = field(101);
  DeterministicRng rng(2);
  for (auto sk : {trusted_test_backend(), test_paillier()}) {
    auto x = run(sk, Scalar::zero(f), Scalar::from_u64(f, 9), Scalar::from_u64(f, 13), rng);
    EXPECT_EQ(x.to_u64(), (9u * 13u) % 101u);
  }
}

TEST(Paillier, Homomorphism) {
  auto sk = test_paillier();
  auto pk = sk->public_key();
  DeterministicRng rng(3);
  EXPECT_EQ(mpz_sizeinbase(pk->plaintext_bound().get_mpz_t(), 2), 512u);
  for (int i = 0; i < 50; ++i) {
    mpz_class a = rng.next_u64(), b = rng.next_u64(), k = rng.next_u64();
    auto ca = pk->encrypt(a, rng), cb = pk->encrypt(b, rng);
    EXPECT_EQ(sk->decrypt(ca), a);
    EXPECT_EQ(sk->decrypt(pk->add(ca, cb)), a + b);
    EXPECT_EQ(sk->decrypt(pk->mul_const(ca, k)), a * k);
    EXPECT_FALSE(ca == pk->encrypt(a, rng));  // randomized
  }
  EXPECT_FALSE(pk->valid({0}));
  EXPECT_FALSE(pk->valid({pk->plaintext_bound() * pk->plaintext_bound()}));
  EXPECT_FALSE(pk->valid({pk->plaintext_bound()}));  // shares a factor with n
}

TEST(Paillier, KeyEncodingRoundTrip) {
  auto pk = test_paillier()->public_key();
  ByteWriter w;
  pk->write_to(w);
  ByteReader r(w.bytes());
  auto back = HomPublicKey::read_from(r);
  EXPECT_EQ(back->kind(), HomKind::kPaillier);
  EXPECT_EQ(back->plaintext_bound(), pk->plaintext_bound());
  Bytes bad = w.bytes();
  bad[0] = 9;
  ByteReader rb(bad);
  EXPECT_EQ(code_of([&] { HomPublicKey::read_from(rb); }), ErrorCode::kProtocolAbort);
  Bytes even = w.bytes();
  even.back() &= 0xFE;
  ByteReader re(even);
  EXPECT_EQ(code_of([&] { HomPublicKey::read_from(re); }), ErrorCode::kProtocolAbort);
}

TEST(BlindSum, PaillierMatchesTrustedBackend) {
  auto f = field();
  DeterministicRng rng(4);
  auto paillier = test_paillier();
  auto trusted = trusted_test_backend();
  for (int i = 0; i < 1000; ++i) {
    auto u = Scalar::random(f, rng);
    auto rho = Scalar::random_nonzero(f, rng);
    auto v = Scalar::random(f, rng);
    auto a = run(paillier, u, rho, v, rng);
    auto b = run(trusted, u, rho, v, rng);
    ASSERT_EQ(a, b);
    ASSERT_EQ(a, (v + u) * rho);
  }
}

TEST(BlindSum, CurveFieldNeedsLargerKey) {
  auto params = dkpabe::testing::curve_params();
  const auto& f = params->field();
  DeterministicRng rng(5);
  auto v = Scalar::random(f, rng);
  EXPECT_EQ(code_of([&] { AuthorityBlindSum(test_paillier()->public_key(), v); }),
            ErrorCode::kProtocolAbort);
  EXPECT_GE(default_paillier_bits(f), 2048u);
  auto sk = paillier_generate(1024, rng);
  for (int i = 0; i < 5; ++i) {
    auto u = Scalar::random(f, rng), rho = Scalar::random_nonzero(f, rng);
    EXPECT_EQ(run(sk, u, rho, v, rng), (v + u) * rho);
  }
}

TEST(BlindSum, ConsistencyHookHolds) {
  auto params = transparent_params();
  GroupContext ctx(params);
  DeterministicRng rng(6);
  for (int i = 0; i < 100; ++i) {
    auto u = ctx.group().random_scalar(rng);
    auto rho = ctx.group().random_nonzero_scalar(rng);
    auto v = ctx.group().random_scalar(rng);
    auto x = run(trusted_test_backend(), u, rho, v, rng);
    const auto& g = ctx.params().g;
    auto psi = ctx.exp(g, u * rho);
    EXPECT_EQ(ctx.exp(g, x), ctx.mul(psi, ctx.exp(ctx.exp(g, rho), v)));
  }
}

// The authority sees z and knows t; for fixed x its view over all (u, rho)
// with (v + u) rho = x is the same multiset. t mod p is exactly uniform since
// the mask bound is a multiple of p, so one residue period covers it.
TEST(BlindSum, AuthorityViewDependsOnlyOnOutput) {
  constexpr std::uint64_t p = 11;
  auto f = field(p);
  DeterministicRng rng(7);
  auto sk = trusted_test_backend();
  EXPECT_EQ(AuthorityBlindSum::mask_bound(p) % p, 0);
  for (std::uint64_t vv = 0; vv < p; ++vv) {
    auto v = Scalar::from_u64(f, vv);
    for (std::uint64_t xv = 0; xv < p; ++xv) {
      auto x = Scalar::from_u64(f, xv);
      std::optional<std::multiset<std::uint64_t>> first;
      int pairs = 0;
      for (std::uint64_t r = 1; r < p; ++r) {
        auto rho = Scalar::from_u64(f, r);
        auto u = x / rho - v;
        std::multiset<std::uint64_t> view;
        for (std::uint64_t t = 0; t < p; ++t) {
          UserBlindSum user(sk, u, rho);
          AuthorityBlindSum auth(sk->public_key(), v);
          auto resp = auth.respond_with_mask(user.request(rng), t, rng);
          auto z = user.complete(resp);
          view.insert(z.to_u64());
          ASSERT_EQ(auth.finish(z), x);
        }
        if (!first) first = view;
        EXPECT_EQ(view, *first);
        ++pairs;
      }
      EXPECT_EQ(pairs, 10);
    }
  }
}

TEST(BlindSum, PhaseAndInputErrors) {
  auto f = field();
  DeterministicRng rng(8);
  auto sk = trusted_test_backend();
  auto one = Scalar::one(f);
  EXPECT_EQ(code_of([&] { UserBlindSum(sk, one, Scalar::zero(f)); }), ErrorCode::kInvalidArgument);
  UserBlindSum user(sk, one, one);
  EXPECT_EQ(code_of([&] { user.complete({{1}}); }), ErrorCode::kPhaseViolation);
  auto req = user.request(rng);
  EXPECT_EQ(code_of([&] { user.request(rng); }), ErrorCode::kPhaseViolation);
  AuthorityBlindSum auth(sk->public_key(), one);
  EXPECT_EQ(code_of([&] { auth.finish(one); }), ErrorCode::kPhaseViolation);
  BlindSumRequest bogus{{-1}, {1}};
  EXPECT_EQ(code_of([&] { auth.respond(bogus, rng); }), ErrorCode::kProtocolAbort);
  auth.respond(req, rng);
  EXPECT_EQ(code_of([&] { auth.respond(req, rng); }), ErrorCode::kPhaseViolation);
  auto other = field(101);
  EXPECT_EQ(code_of([&] { auth.finish(Scalar::one(other)); }), ErrorCode::kProtocolAbort);
}

TEST(BlindSum, PaillierRejectsMalformedCiphertexts) {
  auto f = field();
  DeterministicRng rng(9);
  auto sk = test_paillier();
  auto n = sk->public_key()->plaintext_bound();
  AuthorityBlindSum auth(sk->public_key(), Scalar::one(f));
  EXPECT_EQ(code_of([&] { auth.respond({{0}, {1}}, rng); }), ErrorCode::kProtocolAbort);
  EXPECT_EQ(code_of([&] { auth.respond({{n * n}, {1}}, rng); }), ErrorCode::kProtocolAbort);
  UserBlindSum user(sk, Scalar::one(f), Scalar::one(f));
  user.request(rng);
  EXPECT_EQ(code_of([&] { user.complete({{n}}); }), ErrorCode::kProtocolAbort);
}

}  // namespace
}  // namespace dkpabe::twopc
