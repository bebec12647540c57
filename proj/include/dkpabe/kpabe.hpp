#pragma once

// Decentralized multi-authority KP-ABE: global setup, authority setup, direct
// key generation, encryption and decryption.
//
// Every authority k contributes its own C3_k = Z_k^s to a ciphertext and the
// decryptor pairs it with the matching D1_k, so ciphertexts carry
// 1 + N + sum|A_k| source elements and one target element.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dkpabe/access.hpp"
#include "dkpabe/groups.hpp"

namespace dkpabe {

// Curve: security_bits must be 128. Transparent: security_bits is ignored
// (the backend is insecure at any size) and p must be a prime below 2^62.
GlobalParams global_setup(unsigned security_bits, Backend backend,
                          std::uint64_t transparent_prime = GroupDescriptor::kDefaultTransparentPrime);

struct AuthorityPublicKey {
  std::uint32_t id = 0;
  std::string name;
  std::vector<std::string> attribute_names;  // index j - 1
  TargetElement Y;                           // e(g, g)^alpha
  SourceElement Z;                           // g^beta
  std::vector<SourceElement> T;              // g^t_j, index j - 1

  std::uint32_t attribute_count() const { return static_cast<std::uint32_t>(T.size()); }
  bool owns(const AttributeId& a) const;
  // UnknownAttribute when the name is not in the table.
  AttributeId attribute(std::string_view attribute_name) const;
  const std::string& attribute_name(std::uint32_t j) const;
};

struct AuthoritySecretKey {
  std::uint32_t id = 0;
  Scalar alpha;
  Scalar beta;
  std::vector<Scalar> t;  // index j - 1

  void wipe();
};

struct AuthorityKeyPair {
  AuthorityPublicKey pk;
  AuthoritySecretKey sk;
};

// Draws alpha, beta, t_1..t_n (all nonzero, in that order). Costs n + 2
// exponentiations; needs nothing from any other authority.
AuthorityKeyPair authority_setup(GroupContext& ctx, std::uint32_t id, std::string name,
                                 std::vector<std::string> attribute_names, Rng& rng);
// Attribute names default to "a1".."an".
AuthorityKeyPair authority_setup(GroupContext& ctx, std::uint32_t id, std::uint32_t n, Rng& rng);

// u = H(GID), computed once by the user.
Scalar derive_uid(const GroupDescriptor& group, std::string_view gid);

struct UserKeyShare {
  std::uint32_t authority = 0;
  AccessTree tree = AccessTree::leaf({1, 1});
  SourceElement D;
  SourceElement D1;
  std::map<AttributeId, SourceElement> Dj;

  bool operator==(const UserKeyShare& o) const = default;
};

// The authority's per-user randomness: r and its sharing over the tree.
struct KeygenRandomness {
  Scalar r;
  LeafShareMap shares;
};

// Draws r (redrawn while r + u == 0 when u is given), then the sharing
// polynomials in preorder. Blind issuance draws the same values in the same
// order from the same stream.
KeygenRandomness draw_keygen_randomness(const AccessTree& tree, const FieldRef& field, Rng& rng,
                                        const std::optional<Scalar>& u = std::nullopt);

// ForeignLeaf if a leaf is not one of this authority's attributes;
// DegenerateUid if beta + u == 0.
void check_keygen_inputs(const AuthoritySecretKey& sk, const Scalar& u, const AccessTree& tree);

UserKeyShare keygen(GroupContext& ctx, const AuthoritySecretKey& sk, const Scalar& u,
                    const AccessTree& tree, Rng& rng);
UserKeyShare keygen_with(GroupContext& ctx, const AuthoritySecretKey& sk, const Scalar& u,
                         const AccessTree& tree, const KeygenRandomness& rnd);

struct Ciphertext {
  std::map<std::uint32_t, AttributeSet> attributes;  // A_k per authority in I_C
  TargetElement C1;
  SourceElement C2;
  std::map<std::uint32_t, SourceElement> C3;
  std::map<AttributeId, SourceElement> Ckj;

  std::size_t source_element_count() const { return 1 + C3.size() + Ckj.size(); }
  bool operator==(const Ciphertext& o) const = default;
};

// s is the first (nonzero) draw from rng. UnknownAttribute for attributes
// outside the authority's universe or authorities without a public key;
// EmptyAuthoritySet when no authority, or an empty A_k, is given.
Ciphertext encrypt(GroupContext& ctx, const std::vector<AuthorityPublicKey>& pks,
                   const std::map<std::uint32_t, AttributeSet>& attr_sets, const TargetElement& m,
                   Rng& rng);

// e(g, h1)^{s q_node(0) / (beta + u)} for a node of the plan.
TargetElement decrypt_node(GroupContext& ctx, std::size_t node, const DecryptionPlan& plan,
                           const UserKeyShare& share, const Ciphertext& ct);

// MissingShare / PolicyUnsatisfied name the offending authority.
TargetElement decrypt(GroupContext& ctx, const std::map<std::uint32_t, UserKeyShare>& shares,
                      const Ciphertext& ct);

}  // namespace dkpabe
