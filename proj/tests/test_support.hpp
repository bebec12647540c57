#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <vector>
#include <ostream>

#include "dkpabe/access.hpp"
#include "dkpabe/groups.hpp"
#include "dkpabe/kpabe.hpp"

namespace dkpabe {
inline void PrintTo(Backend b, std::ostream* os) { *os << to_string(b); }
}  // namespace dkpabe

namespace dkpabe::testing {

inline std::shared_ptr<const GlobalParams> transparent_params(
    std::uint64_t p = GroupDescriptor::kDefaultTransparentPrime) {
  return std::make_shared<const GlobalParams>(derive_global_params(GroupDescriptor::transparent(p)));
}

inline std::shared_ptr<const GlobalParams> curve_params() {
  static const auto params =
      std::make_shared<const GlobalParams>(derive_global_params(GroupDescriptor::curve()));
  return params;
}

inline Scalar sc(const GroupContext& ctx, std::int64_t v) { return Scalar::from_i64(ctx.field(), v); }

// Random tree over attributes (authority, first_attr .. first_attr+leaves-1),
// assigned to leaves in preorder. Nesting depth at most 3.
inline AccessTree random_tree(Rng& rng, std::uint32_t authority, std::uint32_t leaves,
                              std::uint32_t first_attr = 1, int depth = 0) {
  if (leaves == 1) return AccessTree::leaf({authority, first_attr});
  std::uint32_t num = 2 + static_cast<std::uint32_t>(rng.next_u64() % std::min<std::uint32_t>(leaves - 1, 3));
  if (depth >= 2) num = leaves;
  // Split the leaves into num nonempty groups.
  std::vector<std::uint32_t> sizes(num, 1);
  for (std::uint32_t extra = leaves - num; extra > 0; --extra) sizes[rng.next_u64() % num]++;
  std::vector<AccessTree> kids;
  std::uint32_t next = first_attr;
  for (auto sz : sizes) {
    kids.push_back(random_tree(rng, authority, sz, next, depth + 1));
    next += sz;
  }
  auto threshold = 1 + static_cast<std::uint32_t>(rng.next_u64() % num);
  return AccessTree::gate(threshold, std::move(kids));
}

// N authorities with up to max_n attributes each, one tree per authority and a
// ciphertext attribute set per authority. When `unsatisfied` is set exactly
// one authority's set fails its tree; otherwise all are satisfied.
struct Scenario {
  std::vector<AuthorityKeyPair> authorities;
  std::map<std::uint32_t, AccessTree> trees;
  std::map<std::uint32_t, AttributeSet> attr_sets;
  std::uint32_t broken = 0;

  std::vector<AuthorityPublicKey> pks() const {
    std::vector<AuthorityPublicKey> out;
    for (const auto& a : authorities) out.push_back(a.pk);
    return out;
  }
};

inline AttributeSet random_attr_set(Rng& rng, std::uint32_t k, std::uint32_t n) {
  AttributeSet s;
  while (s.empty()) {
    for (std::uint32_t j = 1; j <= n; ++j) {
      if (rng.next_u64() & 1) s.insert({k, j});
    }
  }
  return s;
}

inline Scenario random_scenario(GroupContext& ctx, Rng& rng, std::uint32_t N,
                                std::uint32_t max_n = 6, bool unsatisfied = false) {
  Scenario sc;
  if (unsatisfied) sc.broken = 1 + static_cast<std::uint32_t>(rng.next_u64() % N);
  for (std::uint32_t k = 1; k <= N; ++k) {
    bool want = k != sc.broken;
    std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.next_u64() % max_n);
    if (!want) n = std::max<std::uint32_t>(n, 2);
    sc.authorities.push_back(authority_setup(ctx, k, n, rng));
    for (;;) {
      std::uint32_t leaves = 1 + static_cast<std::uint32_t>(rng.next_u64() % n);
      auto tree = random_tree(rng, k, leaves);
      std::optional<AttributeSet> found;
      for (int tries = 0; tries < 64 && !found; ++tries) {
        auto s = random_attr_set(rng, k, n);
        if (satisfies(tree, s) == want) found = s;
      }
      if (!found) continue;
      sc.trees.emplace(k, tree);
      sc.attr_sets.emplace(k, *found);
      break;
    }
  }
  return sc;
}

inline std::map<std::uint32_t, UserKeyShare> issue_direct(GroupContext& ctx, const Scenario& sc,
                                                          const Scalar& u, Rng& rng) {
  std::map<std::uint32_t, UserKeyShare> out;
  for (const auto& a : sc.authorities) out.emplace(a.sk.id, keygen(ctx, a.sk, u, sc.trees.at(a.sk.id), rng));
  return out;
}

inline TargetElement random_message(GroupContext& ctx, Rng& rng) {
  return ctx.exp(ctx.params().egg, ctx.group().random_scalar(rng));
}

}  // namespace dkpabe::testing
