#include <gtest/gtest.h>

#include <map>
#include <set>

#include "dkpabe/access.hpp"
#include "dkpabe/error.hpp"
#include "test_support.hpp"

namespace dkpabe {
namespace {

using testing::random_tree;
using testing::transparent_params;

AttributeId at(std::uint32_t j) { return {1, j}; }

FieldRef field(std::uint64_t p = GroupDescriptor::kDefaultTransparentPrime) {
  return GroupDescriptor::transparent(p).field();
}

// Independent oracle: a gate is satisfied iff some k-subset of its children
// is entirely satisfied. Enumerated by bitmask.
bool oracle_sat(const AccessTree& t, std::size_t id, const AttributeSet& attrs) {
  const auto& n = t.node(id);
  if (n.leaf) return attrs.contains(*n.leaf);
  std::size_t num = n.children.size();
  for (std::uint32_t mask = 0; mask < (1u << num); ++mask) {
    if (static_cast<std::uint32_t>(__builtin_popcount(mask)) != n.threshold) continue;
    bool all = true;
    for (std::size_t i = 0; i < num && all; ++i) {
      if (mask & (1u << i)) all = oracle_sat(t, n.children[i], attrs);
    }
    if (all) return true;
  }
  return false;
}

// Lexicographically smallest all-satisfied k-subset at every used gate.
void combos(std::size_t num, std::size_t k, std::size_t start, std::vector<std::uint32_t>& cur,
            std::vector<std::vector<std::uint32_t>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < num; ++i) {
    cur.push_back(static_cast<std::uint32_t>(i + 1));
    combos(num, k, i + 1, cur, out);
    cur.pop_back();
  }
}

void oracle_plan(const AccessTree& t, std::size_t id, const AttributeSet& attrs,
                 DecryptionPlan& plan) {
  const auto& n = t.node(id);
  if (n.leaf) {
    plan.leaves.push_back(*n.leaf);
    return;
  }
  std::vector<std::vector<std::uint32_t>> all;
  std::vector<std::uint32_t> cur;
  combos(n.children.size(), n.threshold, 0, cur, all);
  for (const auto& c : all) {
    bool ok = true;
    for (auto idx : c) ok = ok && oracle_sat(t, n.children[idx - 1], attrs);
    if (!ok) continue;
    plan.chosen[id] = c;
    for (auto idx : c) oracle_plan(t, n.children[idx - 1], attrs, plan);
    return;
  }
  FAIL() << "oracle_plan on unsatisfied node";
}

AttributeSet subset(const std::vector<AttributeId>& leaves, std::uint32_t mask) {
  AttributeSet s;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (mask & (1u << i)) s.insert(leaves[i]);
  }
  return s;
}

std::vector<AccessTree> tree_corpus(std::uint64_t seed, int count) {
  DeterministicRng rng(seed);
  std::vector<AccessTree> out;
  for (int i = 0; i < count; ++i) {
    auto leaves = 1 + static_cast<std::uint32_t>(rng.next_u64() % 7);
    out.push_back(random_tree(rng, 1, leaves));
  }
  return out;
}

// ---- construction ----------------------------------------------------------

TEST(AccessTree, RejectsBadThresholds) {
  auto l = [](std::uint32_t j) { return AccessTree::leaf(at(j)); };
  EXPECT_THROW(AccessTree::gate(0, {l(1), l(2)}), Error);
  EXPECT_THROW(AccessTree::gate(3, {l(1), l(2)}), Error);
  EXPECT_THROW(AccessTree::gate(1, {}), Error);
  EXPECT_THROW(AccessTree::leaf({0, 1}), Error);
}

TEST(AccessTree, RejectsDuplicateLeaves) {
  try {
    AccessTree::any_of({AccessTree::leaf(at(1)), AccessTree::leaf(at(1))});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidTree);
  }
}

TEST(AccessTree, PreorderLayout) {
  auto t = AccessTree::gate(
      2, {AccessTree::any_of({AccessTree::leaf(at(1)), AccessTree::leaf(at(2))}),
          AccessTree::leaf(at(3))});
  ASSERT_EQ(t.nodes().size(), 5u);
  EXPECT_EQ(t.node(0).children, (std::vector<std::size_t>{1, 4}));
  EXPECT_EQ(t.node(1).children, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(t.leaves(), (std::vector<AttributeId>{at(1), at(2), at(3)}));
  EXPECT_EQ(t.depth(), 2u);
}

TEST(AccessTree, EncodeRoundTrip) {
  for (const auto& t : tree_corpus(11, 50)) {
    EXPECT_EQ(AccessTree::decode(t.encode()), t);
  }
}

TEST(AccessTree, DecodeRejectsGarbage) {
  auto t = AccessTree::all_of({AccessTree::leaf(at(1)), AccessTree::leaf(at(2))});
  Bytes b = t.encode();
  Bytes truncated(b.begin(), b.end() - 1);
  EXPECT_THROW(AccessTree::decode(truncated), Error);
  Bytes trailing = b;
  trailing.push_back(0);
  EXPECT_THROW(AccessTree::decode(trailing), Error);
  Bytes bad_threshold = b;
  bad_threshold[7] = 9;  // root threshold low byte
  EXPECT_THROW(AccessTree::decode(bad_threshold), Error);
  EXPECT_THROW(AccessTree::decode(Bytes{0, 0, 0, 0}), Error);
}

// ---- satisfaction ----------------------------------------------------------

TEST(Satisfies, SingleLeaf) {
  auto t = AccessTree::leaf(at(1));
  EXPECT_TRUE(satisfies(t, {at(1)}));
  EXPECT_FALSE(satisfies(t, {}));
  EXPECT_FALSE(satisfies(t, {at(2)}));
}

TEST(Satisfies, TwoOfThreeWithOneLeaf) {
  auto t = AccessTree::gate(2, {AccessTree::leaf(at(1)), AccessTree::leaf(at(2)),
                                AccessTree::leaf(at(3))});
  EXPECT_FALSE(satisfies(t, {at(2)}));
  EXPECT_TRUE(satisfies(t, {at(1), at(3)}));
}

TEST(Satisfies, DepthTwo) {
  auto t = AccessTree::all_of(
      {AccessTree::any_of({AccessTree::leaf(at(1)), AccessTree::leaf(at(2))}),
       AccessTree::leaf(at(3))});
  EXPECT_TRUE(satisfies(t, {at(2), at(3)}));
  EXPECT_FALSE(satisfies(t, {at(1), at(2)}));
}

TEST(Satisfies, ExhaustiveAgainstOracleAndMonotone) {
  int checked = 0;
  for (const auto& t : tree_corpus(1, 300)) {
    auto leaves = t.leaves();
    std::uint32_t full = 1u << leaves.size();
    std::vector<bool> sat(full);
    for (std::uint32_t m = 0; m < full; ++m) {
      auto s = subset(leaves, m);
      sat[m] = satisfies(t, s);
      ASSERT_EQ(sat[m], oracle_sat(t, 0, s));
      // Attributes outside the tree never matter.
      s.insert({2, 1});
      ASSERT_EQ(sat[m], satisfies(t, s));
      ++checked;
    }
    for (std::uint32_t m = 0; m < full; ++m) {
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (sat[m]) ASSERT_TRUE(sat[m | (1u << i)]);
      }
    }
    EXPECT_TRUE(sat[full - 1]);
    EXPECT_FALSE(sat[0]);
  }
  EXPECT_GT(checked, 1000);
}

// ---- plans -----------------------------------------------------------------

TEST(SelectSatisfying, SingleLeaf) {
  auto plan = select_satisfying(AccessTree::leaf(at(4)), {at(4)});
  EXPECT_EQ(plan.leaves, std::vector<AttributeId>{at(4)});
  EXPECT_TRUE(plan.chosen.empty());
}

TEST(SelectSatisfying, TieBreakPicksLowestIndex) {
  auto t = AccessTree::any_of({AccessTree::leaf(at(1)), AccessTree::leaf(at(2)),
                               AccessTree::leaf(at(3))});
  auto plan = select_satisfying(t, {at(2), at(3)});
  EXPECT_EQ(plan.leaves, std::vector<AttributeId>{at(2)});
  EXPECT_EQ(plan.chosen.at(0), std::vector<std::uint32_t>{2});
}

TEST(SelectSatisfying, UnsatisfiedThrows) {
  auto t = AccessTree::all_of({AccessTree::leaf(at(1)), AccessTree::leaf(at(2))});
  try {
    select_satisfying(t, {at(1)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsatisfied);
  }
}

TEST(SelectSatisfying, MatchesExhaustiveSearch) {
  for (const auto& t : tree_corpus(2, 200)) {
    auto leaves = t.leaves();
    for (std::uint32_t m = 0; m < (1u << leaves.size()); ++m) {
      auto s = subset(leaves, m);
      if (!satisfies(t, s)) continue;
      auto plan = select_satisfying(t, s);
      DecryptionPlan expect;
      oracle_plan(t, 0, s, expect);
      ASSERT_EQ(plan.chosen, expect.chosen);
      ASSERT_EQ(plan.leaves, expect.leaves);
      for (const auto& a : plan.leaves) ASSERT_TRUE(s.contains(a));
      for (const auto& [node, kids] : plan.chosen) {
        ASSERT_EQ(kids.size(), t.node(node).threshold);
      }
      auto again = select_satisfying(t, s);
      ASSERT_EQ(again.chosen, plan.chosen);
    }
  }
}

// ---- Lagrange --------------------------------------------------------------

TEST(Lagrange, SingletonIsOne) {
  auto f = field();
  auto x = Scalar::from_u64(f, 5);
  EXPECT_EQ(lagrange_coeff(x, {x}, Scalar::from_u64(f, 77)), Scalar::one(f));
}

TEST(Lagrange, OneTwoAtZero) {
  auto f = field();
  auto c = lagrange_coeff(Scalar::from_u64(f, 1), {Scalar::from_u64(f, 1), Scalar::from_u64(f, 2)},
                          Scalar::zero(f));
  EXPECT_EQ(c.to_u64(), 2u);
}

TEST(Lagrange, DuplicatePoints) {
  auto f = field();
  auto one = Scalar::one(f);
  try {
    lagrange_coeff(one, {one, one}, Scalar::zero(f));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicatePoints);
  }
  try {
    interpolate_at_zero({{one, one}, {one, Scalar::zero(f)}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicatePoints);
  }
}

TEST(Lagrange, RecoversRandomPolynomials) {
  auto f = field();
  DeterministicRng rng(3);
  for (int deg = 0; deg < 8; ++deg) {
    std::vector<Scalar> q;
    for (int i = 0; i <= deg; ++i) q.push_back(Scalar::random(f, rng));
    std::vector<Scalar> xs;
    for (int i = 0; i <= deg; ++i) xs.push_back(Scalar::from_u64(f, 3 * i + 1));
    Scalar acc = Scalar::zero(f);
    for (const auto& x : xs) acc += lagrange_coeff(x, xs, Scalar::zero(f)) * evaluate_polynomial(q, x);
    EXPECT_EQ(acc, q[0]);
  }
}

TEST(Interpolate, Constant) {
  auto f = field();
  auto c = Scalar::from_u64(f, 12345);
  EXPECT_EQ(interpolate_at_zero({{Scalar::one(f), c}}), c);
}

TEST(Interpolate, LineOverSmallPrime) {
  auto f = field(101);
  auto v = interpolate_at_zero({{Scalar::from_u64(f, 1), Scalar::from_u64(f, 3)},
                                {Scalar::from_u64(f, 2), Scalar::from_u64(f, 5)}});
  EXPECT_EQ(v.to_u64(), 1u);
}

// ---- sharing ---------------------------------------------------------------

TEST(ShareSecret, SingleLeafGetsSecret) {
  auto f = field();
  DeterministicRng rng(4);
  auto secret = Scalar::from_u64(f, 999);
  auto shares = share_secret(AccessTree::leaf(at(1)), secret, rng);
  ASSERT_EQ(shares.size(), 1u);
  EXPECT_EQ(shares.at(at(1)), secret);
}

TEST(ShareSecret, TwoOfTwo) {
  auto f = field();
  DeterministicRng rng(5);
  auto secret = Scalar::random(f, rng);
  auto t = AccessTree::all_of({AccessTree::leaf(at(1)), AccessTree::leaf(at(2))});
  auto shares = share_secret(t, secret, rng);
  auto v = interpolate_at_zero({{Scalar::from_u64(f, 1), shares.at(at(1))},
                                {Scalar::from_u64(f, 2), shares.at(at(2))}});
  EXPECT_EQ(v, secret);
  EXPECT_NE(shares.at(at(1)), secret);
}

TEST(ShareSecret, ReconstructionExhaustive) {
  for (std::uint64_t p : {std::uint64_t{101}, GroupDescriptor::kDefaultTransparentPrime}) {
    auto f = field(p);
    DeterministicRng rng(6 + p);
    for (const auto& t : tree_corpus(7, 150)) {
      auto secret = Scalar::random(f, rng);
      auto shares = share_secret(t, secret, rng);
      ASSERT_EQ(shares.size(), t.leaves().size());
      auto leaves = t.leaves();
      for (std::uint32_t m = 0; m < (1u << leaves.size()); ++m) {
        auto s = subset(leaves, m);
        if (!satisfies(t, s)) continue;
        ASSERT_EQ(reconstruct(t, select_satisfying(t, s), shares), secret);
      }
    }
  }
}

TEST(ShareSecret, NMinusOneSharesAdmitEverySecret) {
  constexpr std::uint64_t p = 101;
  auto f = field(p);
  DeterministicRng rng(8);
  for (std::uint32_t n = 2; n <= 4; ++n) {
    std::vector<AccessTree> kids;
    for (std::uint32_t j = 1; j <= n; ++j) kids.push_back(AccessTree::leaf(at(j)));
    auto t = AccessTree::all_of(std::move(kids));
    auto plan = select_satisfying(t, t.attributes());
    for (int trial = 0; trial < 5; ++trial) {
      auto shares = share_secret(t, Scalar::random(f, rng), rng);
      // Drop each leaf in turn and run over every completion.
      for (std::uint32_t missing = 1; missing <= n; ++missing) {
        std::set<std::uint64_t> reachable;
        for (std::uint64_t v = 0; v < p; ++v) {
          auto completed = shares;
          completed.at(at(missing)) = Scalar::from_u64(f, v);
          reachable.insert(reconstruct(t, plan, completed).to_u64());
        }
        ASSERT_EQ(reachable.size(), p);
      }
    }
  }
}

TEST(ShareSecret, DegreeBoundByFitting) {
  auto f = field();
  DeterministicRng rng(9);
  for (const auto& t : tree_corpus(10, 150)) {
    auto sharing = share_secret_detailed(t, Scalar::random(f, rng), rng);
    for (std::size_t id = 0; id < t.nodes().size(); ++id) {
      const auto& n = t.node(id);
      ASSERT_EQ(sharing.polynomials[id].size(), n.threshold);
      if (n.leaf) continue;
      // q_x evaluated at child indices equals each child's constant term.
      std::vector<std::pair<Scalar, Scalar>> pts;
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        pts.emplace_back(Scalar::from_u64(f, i + 1), sharing.polynomials[n.children[i]][0]);
      }
      // Any k points pin q_x(0); k - 1 points do not (exact degree).
      std::vector<std::pair<Scalar, Scalar>> head(pts.begin(), pts.begin() + n.threshold);
      EXPECT_EQ(interpolate_at_zero(head), sharing.polynomials[id][0]);
      std::vector<std::pair<Scalar, Scalar>> tail(pts.end() - n.threshold, pts.end());
      EXPECT_EQ(interpolate_at_zero(tail), sharing.polynomials[id][0]);
      if (n.threshold > 1) {
        std::vector<std::pair<Scalar, Scalar>> fewer(pts.begin(), pts.begin() + n.threshold - 1);
        EXPECT_NE(interpolate_at_zero(fewer), sharing.polynomials[id][0]);
        EXPECT_FALSE(sharing.polynomials[id].back().is_zero());
      }
    }
  }
}

TEST(ShareSecret, DeterministicForSeed) {
  auto f = field();
  auto t = tree_corpus(12, 1)[0];
  DeterministicRng a(13), b(13);
  auto s = Scalar::from_u64(f, 42);
  EXPECT_EQ(share_secret(t, s, a), share_secret(t, s, b));
}

// ---- policy text -----------------------------------------------------------

AttributeId resolve(std::string_view authority, std::string_view attribute) {
  static const std::map<std::string, std::uint32_t> auths{{"hospital", 1}, {"univ", 2}};
  static const std::map<std::string, std::uint32_t> attrs{{"doctor", 1}, {"nurse", 2}, {"staff", 3}};
  auto a = auths.find(std::string(authority));
  auto b = attrs.find(std::string(attribute));
  if (a == auths.end() || b == attrs.end()) fail(ErrorCode::kUnknownAttribute, std::string(attribute));
  return {a->second, b->second};
}

std::string name(const AttributeId& id) {
  static const char* auths[] = {"", "hospital", "univ"};
  static const char* attrs[] = {"", "doctor", "nurse", "staff"};
  return std::string(auths[id.authority]) + ":" + attrs[id.attribute];
}

TEST(Policy, ParsesGates) {
  auto t = parse_policy("THRESH(2; hospital:doctor, OR(hospital:nurse, univ:staff), univ:doctor)",
                        resolve);
  EXPECT_EQ(t.node(0).threshold, 2u);
  EXPECT_EQ(t.leaves().size(), 4u);
  EXPECT_TRUE(satisfies(t, {{1, 1}, {2, 3}}));
  EXPECT_FALSE(satisfies(t, {{1, 2}, {2, 3}}));
  auto leaf = parse_policy("  hospital:doctor ", resolve);
  EXPECT_EQ(leaf, AccessTree::leaf({1, 1}));
}

TEST(Policy, FormatRoundTrip) {
  for (const auto* text : {"AND(hospital:doctor, univ:staff)", "OR(hospital:nurse, univ:doctor)",
                           "THRESH(2; hospital:doctor, hospital:nurse, AND(univ:staff, univ:nurse))",
                           "hospital:staff", "THRESH(1; univ:staff)"}) {
    auto t = parse_policy(text, resolve);
    EXPECT_EQ(format_policy(t, name), text);
    EXPECT_EQ(parse_policy(format_policy(t, name), resolve), t);
  }
}

TEST(Policy, SyntaxErrors) {
  for (const auto* text : {"", "AND(", "AND()", "XOR(hospital:doctor)", "THRESH(0; hospital:doctor)",
                           "THRESH(3; hospital:doctor, hospital:nurse)", "THRESH(x; hospital:doctor)",
                           "hospital", "hospital:doctor,", "AND(hospital:doctor univ:staff)"}) {
    try {
      parse_policy(text, resolve);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kPolicySyntax) << text;
    }
  }
  EXPECT_THROW(parse_policy("hospital:janitor", resolve), Error);
  EXPECT_THROW(parse_policy("OR(hospital:doctor, hospital:doctor)", resolve), Error);
}

}  // namespace
}  // namespace dkpabe
