#include <gtest/gtest.h>

#include <map>

#include "dkpabe/error.hpp"
#include "dkpabe/groups.hpp"
#include "test_support.hpp"

namespace dkpabe {
namespace {

using testing::curve_params;
using testing::sc;
using testing::transparent_params;

class BothBackends : public ::testing::TestWithParam<Backend> {
 protected:
  std::shared_ptr<const GlobalParams> params() const {
    return GetParam() == Backend::kCurve ? curve_params() : transparent_params();
  }
};

INSTANTIATE_TEST_SUITE_P(Groups, BothBackends,
                         ::testing::Values(Backend::kCurve, Backend::kTransparent),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST_P(BothBackends, PairingIsNonDegenerate) {
  GroupContext ctx(params());
  auto e = ctx.pair(ctx.params().g, ctx.params().g);
  EXPECT_FALSE(ctx.group().is_identity(e));
  EXPECT_EQ(e, ctx.params().egg);
}

TEST_P(BothBackends, PairingWithZeroExponentIsIdentity) {
  GroupContext ctx(params());
  auto zero = ctx.exp(ctx.params().g, sc(ctx, 0));
  EXPECT_TRUE(ctx.group().is_identity(zero));
  EXPECT_TRUE(ctx.group().is_identity(ctx.pair(zero, ctx.params().h)));
}

TEST_P(BothBackends, ExponentIdentities) {
  GroupContext ctx(params());
  const auto& g = ctx.params().g;
  EXPECT_EQ(ctx.exp(g, sc(ctx, 1)), g);
  EXPECT_EQ(ctx.exp(g, sc(ctx, 0)), ctx.group().source_identity());
  EXPECT_EQ(ctx.exp(ctx.params().egg, sc(ctx, 0)), ctx.group().target_identity());
  EXPECT_EQ(ctx.exp(ctx.params().egg, sc(ctx, 1)), ctx.params().egg);
}

TEST_P(BothBackends, Bilinearity) {
  GroupContext ctx(params());
  DeterministicRng rng(7);
  const auto& p = ctx.params();
  for (const auto* y : {&p.g, &p.h, &p.h1}) {
    for (int trial = 0; trial < 3; ++trial) {
      auto a = ctx.group().random_scalar(rng);
      auto b = ctx.group().random_scalar(rng);
      auto lhs = ctx.pair(ctx.exp(p.g, a), ctx.exp(*y, b));
      auto rhs = ctx.exp(ctx.pair(p.g, *y), a * b);
      EXPECT_EQ(lhs, rhs);
    }
  }
}

TEST_P(BothBackends, GtArithmetic) {
  GroupContext ctx(params());
  DeterministicRng rng(8);
  const auto& egg = ctx.params().egg;
  auto a = ctx.group().random_scalar(rng);
  auto b = ctx.group().random_scalar(rng);
  EXPECT_EQ(ctx.mul(ctx.exp(egg, a), ctx.exp(egg, b)), ctx.exp(egg, a + b));
  EXPECT_EQ(ctx.div(ctx.exp(egg, a), ctx.exp(egg, b)), ctx.exp(egg, a - b));
  EXPECT_EQ(ctx.exp(ctx.exp(egg, a), b), ctx.exp(egg, a * b));
}

TEST_P(BothBackends, GeneratorsAreDistinctAndNonIdentity) {
  auto p = params();
  EXPECT_FALSE(p->group.is_identity(p->g));
  EXPECT_FALSE(p->group.is_identity(p->h));
  EXPECT_FALSE(p->group.is_identity(p->h1));
  EXPECT_NE(p->g, p->h);
  EXPECT_NE(p->h, p->h1);
  EXPECT_NE(p->g, p->h1);
  EXPECT_TRUE(p->g.has_first() && p->g.has_second());
  EXPECT_FALSE(p->h.has_first());
  EXPECT_TRUE(p->h.has_second());
}

TEST_P(BothBackends, HalvesSurviveOnlyWhenPresentInBothOperands) {
  GroupContext ctx(params());
  const auto& p = ctx.params();
  auto mixed = ctx.mul(p.g, p.h);
  EXPECT_FALSE(mixed.has_first());
  EXPECT_TRUE(mixed.has_second());
  EXPECT_THROW(ctx.pair(p.h, p.g), Error);
}

TEST_P(BothBackends, EncodingRoundTrips) {
  GroupContext ctx(params());
  DeterministicRng rng(9);
  const auto& group = ctx.group();
  for (int i = 0; i < 4; ++i) {
    auto k = group.random_scalar(rng);
    for (const auto& e : {ctx.exp(ctx.params().g, k), ctx.exp(ctx.params().h1, k),
                          group.source_identity()}) {
      auto bytes = group.encode(e);
      EXPECT_EQ(bytes[0], static_cast<std::uint8_t>(group.backend()));
      EXPECT_EQ(group.decode_source(bytes), e);
      EXPECT_EQ(group.encode(group.decode_source(bytes)), bytes);
    }
    auto t = ctx.exp(ctx.params().egg, k);
    EXPECT_EQ(group.decode_target(group.encode(t)), t);
    EXPECT_EQ(group.decode_scalar(group.encode(k)), k);
  }
}

TEST_P(BothBackends, DecodeRejectsTruncatedAndForeign) {
  auto p = params();
  auto bytes = p->group.encode(p->g);
  Bytes truncated(bytes.begin(), bytes.end() - 1);
  EXPECT_THROW(p->group.decode_source(truncated), Error);
  auto other = GetParam() == Backend::kCurve ? transparent_params() : curve_params();
  try {
    other->group.decode_source(bytes);
    FAIL() << "expected BackendMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendMismatch);
  }
}

TEST_P(BothBackends, HashToScalarIsDeterministic) {
  auto p = params();
  auto a = p->group.hash_to_scalar(as_bytes("alice"));
  EXPECT_EQ(a, p->group.hash_to_scalar(as_bytes("alice")));
  EXPECT_NE(a, p->group.hash_to_scalar(as_bytes("bob")));
  EXPECT_LT(a.value(), p->field()->modulus());
}

TEST(Groups, HashToScalarRegressionVectors) {
  auto curve = GroupDescriptor::curve();
  // SHA-512 of the empty string, reduced mod the BLS12-381 group order.
  EXPECT_EQ(to_hex(curve.hash_to_scalar({}).to_bytes()),
            "51718e7ee8b1aa9825ce326e8f286f16eee0b39b6346c0b0efbcbbcd5a0deedc");
  EXPECT_EQ(to_hex(curve.hash_to_scalar(as_bytes("alice@example.org")).to_bytes()),
            "5a1c0ba9a27fbad86b23297e2b31927d390b378581f14ce3cadd23a4f4488d8e");
  EXPECT_EQ(GroupDescriptor::transparent(2147483647).hash_to_scalar({}).to_u64(), 640167604u);
  EXPECT_EQ(GroupDescriptor::transparent(101).hash_to_scalar({}).to_u64(), 27u);
}

TEST(Groups, TransparentPairingMultipliesLogs) {
  GroupContext ctx(transparent_params(101));
  const auto& g = ctx.params().g;
  auto e = ctx.pair(ctx.exp(g, sc(ctx, 7)), ctx.exp(g, sc(ctx, 9)));
  EXPECT_EQ(oracle::discrete_log(e), 63u);
  auto big = ctx.pair(ctx.exp(g, sc(ctx, 50)), ctx.exp(g, sc(ctx, 60)));
  EXPECT_EQ(oracle::discrete_log(big), 3000u % 101u);
}

TEST(Groups, TransparentExponentArithmetic) {
  GroupContext ctx(transparent_params(101));
  auto g3 = ctx.exp(ctx.params().g, sc(ctx, 3));
  auto logs = oracle::discrete_logs(ctx.exp(g3, sc(ctx, 5)));
  EXPECT_EQ(logs.first, 15u);
  EXPECT_EQ(logs.second, 15u);
  auto wrap = oracle::discrete_logs(ctx.exp(g3, sc(ctx, 40)));
  EXPECT_EQ(wrap.first, 120u % 101u);
}

TEST(Groups, MirroredHalvesStayInLockstep) {
  GroupContext ctx(transparent_params(1009));
  DeterministicRng rng(11);
  auto acc = ctx.params().g;
  for (int step = 0; step < 500; ++step) {
    auto k = ctx.group().random_scalar(rng);
    if (rng.next_u64() % 2 == 0) {
      acc = ctx.exp(acc, k);
    } else {
      acc = ctx.mul(acc, ctx.exp(ctx.params().g, k));
    }
    auto logs = oracle::discrete_logs(acc);
    ASSERT_TRUE(logs.first && logs.second);
    ASSERT_EQ(*logs.first, *logs.second);
  }
}

TEST(Groups, DesynchronizedPairIsRejectedOnDecode) {
  auto p = transparent_params(101);
  auto forged = oracle::make_source(3, 4);
  EXPECT_THROW(p->group.decode_source(p->group.encode(forged)), Error);

  // Curve: first half of g with second half of g^2.
  auto c = curve_params();
  GroupContext ctx(c);
  auto g2 = ctx.exp(c->g, Scalar::from_u64(c->field(), 2));
  auto first = c->group.encode(c->g);
  auto second = c->group.encode(g2);
  Bytes spliced(first.begin(), first.begin() + 2 + 48);
  spliced.insert(spliced.end(), second.begin() + 2 + 48, second.end());
  EXPECT_THROW(c->group.decode_source(spliced), Error);
}

TEST(Groups, RandomNonzeroScalarsAreUniform) {
  auto group = GroupDescriptor::transparent(101);
  DeterministicRng rng(2024);
  std::map<std::uint64_t, int> hist;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    auto v = group.random_nonzero_scalar(rng).to_u64();
    ASSERT_NE(v, 0u);
    ASSERT_LT(v, 101u);
    ++hist[v];
  }
  EXPECT_EQ(hist.size(), 100u);
  double expected = kDraws / 100.0;
  double chi2 = 0;
  for (const auto& [v, n] : hist) chi2 += (n - expected) * (n - expected) / expected;
  // 99.9th percentile of chi-square with 99 degrees of freedom.
  EXPECT_LT(chi2, 148.2);
}

TEST(Groups, SeededRngIsReproducible) {
  auto group = GroupDescriptor::curve();
  DeterministicRng a(42), b(42), c(43);
  for (int i = 0; i < 5; ++i) {
    auto x = group.random_nonzero_scalar(a);
    EXPECT_EQ(x, group.random_nonzero_scalar(b));
    EXPECT_NE(x, group.random_nonzero_scalar(c));
  }
}

TEST(Groups, CountersAreExact) {
  GroupContext ctx(transparent_params());
  EXPECT_EQ(ctx.counters_snapshot(), (OpCounts{0, 0, 0}));
  auto e = ctx.pair(ctx.params().g, ctx.params().h);
  EXPECT_EQ(ctx.counters_snapshot().pairings, 1u);
  ctx.reset_counters();
  EXPECT_EQ(ctx.counters_snapshot(), (OpCounts{0, 0, 0}));

  // Scripted: 4 multiplications, 3 exponentiations, 2 pairings.
  auto a = ctx.exp(ctx.params().g, sc(ctx, 5));
  auto b = ctx.mul(a, a);
  b = ctx.mul(b, ctx.params().g);
  auto t = ctx.pair(a, b);
  t = ctx.mul(t, ctx.pair(b, a));
  t = ctx.exp(t, sc(ctx, 3));
  t = ctx.div(t, e);
  (void)ctx.exp(b, sc(ctx, 2));
  EXPECT_EQ(ctx.counters_snapshot(), (OpCounts{4, 3, 2}));
}

TEST(Groups, ScalarErrors) {
  auto f = GroupDescriptor::transparent(101).field();
  auto other = GroupDescriptor::transparent(103).field();
  EXPECT_THROW(Scalar::zero(f).inverse(), Error);
  EXPECT_THROW((void)(Scalar::one(f) + Scalar::one(other)), Error);
  EXPECT_THROW(Scalar::from_bytes(f, Bytes{102}), Error);
  EXPECT_EQ(Scalar::from_i64(f, -1).to_u64(), 100u);
  EXPECT_EQ((Scalar::from_u64(f, 7) / Scalar::from_u64(f, 7)), Scalar::one(f));
  EXPECT_THROW(GroupDescriptor::transparent(100), Error);
}

}  // namespace
}  // namespace dkpabe
