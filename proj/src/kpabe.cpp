#include "dkpabe/kpabe.hpp"

#include "dkpabe/error.hpp"

namespace dkpabe {

GlobalParams global_setup(unsigned security_bits, Backend backend, std::uint64_t transparent_prime) {
  switch (backend) {
    case Backend::kCurve:
      if (security_bits != 128) {
        fail(ErrorCode::kUnsupportedParameters,
             "curve backend supports 128-bit security only, got " + std::to_string(security_bits));
      }
      return derive_global_params(GroupDescriptor::curve());
    case Backend::kTransparent:
      return derive_global_params(GroupDescriptor::transparent(transparent_prime));
  }
  fail(ErrorCode::kUnsupportedParameters, "unknown backend");
}

bool AuthorityPublicKey::owns(const AttributeId& a) const {
  return a.authority == id && a.attribute >= 1 && a.attribute <= attribute_count();
}

AttributeId AuthorityPublicKey::attribute(std::string_view attribute_name) const {
  for (std::size_t i = 0; i < attribute_names.size(); ++i) {
    if (attribute_names[i] == attribute_name) return {id, static_cast<std::uint32_t>(i + 1)};
  }
  fail(ErrorCode::kUnknownAttribute,
       "authority " + name + " has no attribute '" + std::string(attribute_name) + "'");
}

const std::string& AuthorityPublicKey::attribute_name(std::uint32_t j) const {
  if (j == 0 || j > attribute_names.size()) {
    fail(ErrorCode::kUnknownAttribute, "attribute index " + std::to_string(j));
  }
  return attribute_names[j - 1];
}

void AuthoritySecretKey::wipe() {
  alpha.wipe();
  beta.wipe();
  for (auto& v : t) v.wipe();
}

AuthorityKeyPair authority_setup(GroupContext& ctx, std::uint32_t id, std::string name,
                                 std::vector<std::string> attribute_names, Rng& rng) {
  if (id == 0) fail(ErrorCode::kInvalidArgument, "authority ids are 1-based");
  if (attribute_names.empty()) fail(ErrorCode::kInvalidArgument, "authority needs attributes");
  for (std::size_t i = 0; i < attribute_names.size(); ++i) {
    for (std::size_t j = i + 1; j < attribute_names.size(); ++j) {
      if (attribute_names[i] == attribute_names[j]) {
        fail(ErrorCode::kInvalidArgument, "duplicate attribute name " + attribute_names[i]);
      }
    }
  }
  const auto& group = ctx.group();
  const auto& P = ctx.params();
  AuthorityKeyPair kp;
  kp.sk.id = id;
  kp.sk.alpha = group.random_nonzero_scalar(rng);
  kp.sk.beta = group.random_nonzero_scalar(rng);
  for (std::size_t i = 0; i < attribute_names.size(); ++i) {
    kp.sk.t.push_back(group.random_nonzero_scalar(rng));
  }
  kp.pk.id = id;
  kp.pk.name = std::move(name);
  kp.pk.attribute_names = std::move(attribute_names);
  kp.pk.Y = ctx.exp(P.egg, kp.sk.alpha);
  kp.pk.Z = ctx.exp(P.g, kp.sk.beta);
  for (const auto& t : kp.sk.t) kp.pk.T.push_back(ctx.exp(P.g, t));
  return kp;
}

AuthorityKeyPair authority_setup(GroupContext& ctx, std::uint32_t id, std::uint32_t n, Rng& rng) {
  std::vector<std::string> names;
  for (std::uint32_t j = 1; j <= n; ++j) names.push_back("a" + std::to_string(j));
  return authority_setup(ctx, id, "authority" + std::to_string(id), std::move(names), rng);
}

Scalar derive_uid(const GroupDescriptor& group, std::string_view gid) {
  ByteWriter w;
  w.str("dkpabe/uid/v1");
  w.str(gid);
  return group.hash_to_scalar(w.bytes());
}

KeygenRandomness draw_keygen_randomness(const AccessTree& tree, const FieldRef& field, Rng& rng,
                                        const std::optional<Scalar>& u) {
  KeygenRandomness out;
  do {
    out.r = Scalar::random(field, rng);
  } while (u && (out.r + *u).is_zero());
  out.shares = share_secret(tree, out.r, rng);
  return out;
}

void check_keygen_inputs(const AuthoritySecretKey& sk, const Scalar& u, const AccessTree& tree) {
  for (const auto& a : tree.leaves()) {
    if (a.authority != sk.id || a.attribute == 0 || a.attribute > sk.t.size()) {
      fail(ErrorCode::kForeignLeaf,
           "leaf " + to_string(a) + " is not an attribute of authority " + std::to_string(sk.id));
    }
  }
  if ((sk.beta + u).is_zero()) fail(ErrorCode::kDegenerateUid, "beta + u = 0");
}

UserKeyShare keygen_with(GroupContext& ctx, const AuthoritySecretKey& sk, const Scalar& u,
                         const AccessTree& tree, const KeygenRandomness& rnd) {
  check_keygen_inputs(sk, u, tree);
  Scalar ru = rnd.r + u;
  if (ru.is_zero()) fail(ErrorCode::kInvalidArgument, "r + u = 0");
  Scalar bu_inv = (sk.beta + u).inverse();
  Scalar ru_inv = ru.inverse();
  const auto& P = ctx.params();

  UserKeyShare share{sk.id, tree, {}, {}, {}};
  share.D = ctx.mul(ctx.mul(ctx.exp(P.g, -sk.alpha), ctx.exp(P.h, sk.beta * ru_inv)),
                    ctx.exp(P.h1, rnd.r * bu_inv));
  share.D1 = ctx.exp(P.h, ru_inv);
  for (const auto& [a, q] : rnd.shares) {
    share.Dj.emplace(a, ctx.exp(P.h1, q * bu_inv / sk.t.at(a.attribute - 1)));
  }
  return share;
}

UserKeyShare keygen(GroupContext& ctx, const AuthoritySecretKey& sk, const Scalar& u,
                    const AccessTree& tree, Rng& rng) {
  check_keygen_inputs(sk, u, tree);
  return keygen_with(ctx, sk, u, tree, draw_keygen_randomness(tree, ctx.field(), rng, u));
}

Ciphertext encrypt(GroupContext& ctx, const std::vector<AuthorityPublicKey>& pks,
                   const std::map<std::uint32_t, AttributeSet>& attr_sets, const TargetElement& m,
                   Rng& rng) {
  if (attr_sets.empty()) fail(ErrorCode::kEmptyAuthoritySet, "no authorities");
  std::map<std::uint32_t, const AuthorityPublicKey*> by_id;
  for (const auto& pk : pks) by_id[pk.id] = &pk;
  for (const auto& [k, attrs] : attr_sets) {
    auto it = by_id.find(k);
    if (it == by_id.end()) fail(ErrorCode::kUnknownAttribute, "no public key for authority " + std::to_string(k));
    if (attrs.empty()) fail(ErrorCode::kEmptyAuthoritySet, "empty attribute set for authority " + std::to_string(k));
    for (const auto& a : attrs) {
      if (!it->second->owns(a)) fail(ErrorCode::kUnknownAttribute, to_string(a));
    }
  }

  Scalar s = ctx.group().random_nonzero_scalar(rng);
  Ciphertext ct;
  ct.attributes = attr_sets;
  ct.C1 = m;
  ct.C2 = ctx.exp(ctx.params().g, s);
  for (const auto& [k, attrs] : attr_sets) {
    const auto& pk = *by_id.at(k);
    ct.C1 = ctx.mul(ct.C1, ctx.exp(pk.Y, s));
    ct.C3.emplace(k, ctx.exp(pk.Z, s));
    for (const auto& a : attrs) ct.Ckj.emplace(a, ctx.exp(pk.T[a.attribute - 1], s));
  }
  s.wipe();
  return ct;
}

TargetElement decrypt_node(GroupContext& ctx, std::size_t node, const DecryptionPlan& plan,
                           const UserKeyShare& share, const Ciphertext& ct) {
  const auto& n = share.tree.node(node);
  if (n.leaf) {
    auto d = share.Dj.find(*n.leaf);
    if (d == share.Dj.end()) fail(ErrorCode::kMissingLeafKey, to_string(*n.leaf));
    auto c = ct.Ckj.find(*n.leaf);
    if (c == ct.Ckj.end()) fail(ErrorCode::kPolicyUnsatisfied, "ciphertext lacks " + to_string(*n.leaf));
    return ctx.pair(c->second, d->second);
  }
  auto it = plan.chosen.find(node);
  if (it == plan.chosen.end()) fail(ErrorCode::kInvalidArgument, "node not in plan");
  const auto& field = ctx.field();
  std::vector<Scalar> xs;
  for (auto idx : it->second) xs.push_back(Scalar::from_u64(field, idx));
  Scalar zero = Scalar::zero(field);
  std::optional<TargetElement> acc;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto child = decrypt_node(ctx, n.children.at(it->second[i] - 1), plan, share, ct);
    auto term = ctx.exp(child, lagrange_coeff(xs[i], xs, zero));
    acc = acc ? ctx.mul(*acc, term) : term;
  }
  return *acc;
}

TargetElement decrypt(GroupContext& ctx, const std::map<std::uint32_t, UserKeyShare>& shares,
                      const Ciphertext& ct) {
  if (ct.attributes.empty()) fail(ErrorCode::kEmptyAuthoritySet, "ciphertext names no authority");
  for (const auto& [k, attrs] : ct.attributes) {
    auto it = shares.find(k);
    if (it == shares.end() || it->second.authority != k) {
      fail(ErrorCode::kMissingShare, "no key share for authority " + std::to_string(k));
    }
    if (!satisfies(it->second.tree, attrs)) {
      fail(ErrorCode::kPolicyUnsatisfied, "authority " + std::to_string(k) + " policy not satisfied");
    }
    if (!ct.C3.contains(k)) fail(ErrorCode::kMalformedInput, "ciphertext lacks C3 for authority " + std::to_string(k));
  }

  std::optional<TargetElement> X, Y, S;
  auto fold = [&](std::optional<TargetElement>& acc, const TargetElement& v) {
    acc = acc ? ctx.mul(*acc, v) : v;
  };
  for (const auto& [k, attrs] : ct.attributes) fold(X, ctx.pair(ct.C2, shares.at(k).D));
  for (const auto& [k, attrs] : ct.attributes) fold(Y, ctx.pair(ct.C3.at(k), shares.at(k).D1));
  for (const auto& [k, attrs] : ct.attributes) {
    const auto& share = shares.at(k);
    auto plan = select_satisfying(share.tree, attrs);
    fold(S, decrypt_node(ctx, AccessTree::kRoot, plan, share, ct));
  }
  return ctx.div(ctx.mul(ct.C1, *X), ctx.mul(*Y, *S));
}

}  // namespace dkpabe
