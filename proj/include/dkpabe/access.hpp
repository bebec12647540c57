#pragma once

// Monotone threshold access trees and the polynomial secret sharing that
// rides on them.
//
// A node's evaluation point inside its parent is its 1-based child index, so
// q_x(0) = q_parent(index(x)) and interpolation sets are child-index sets.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dkpabe/bytes.hpp"
#include "dkpabe/groups.hpp"

namespace dkpabe {

// Attribute j (1-based) of authority k (1-based).
struct AttributeId {
  std::uint32_t authority = 0;
  std::uint32_t attribute = 0;

  auto operator<=>(const AttributeId&) const = default;
};

std::string to_string(const AttributeId& id);

using AttributeSet = std::set<AttributeId>;
using LeafShareMap = std::map<AttributeId, Scalar>;

class AccessTree {
 public:
  struct Node {
    std::uint32_t threshold = 1;
    std::vector<std::size_t> children;  // node ids, in child-index order
    std::optional<AttributeId> leaf;
  };

  static AccessTree leaf(AttributeId attribute);
  // InvalidTree unless 0 < threshold <= children.size() and all leaf
  // attributes are distinct.
  static AccessTree gate(std::uint32_t threshold, std::vector<AccessTree> children);
  static AccessTree all_of(std::vector<AccessTree> children);
  static AccessTree any_of(std::vector<AccessTree> children);

  // Nodes in preorder; the root is node 0.
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(std::size_t id) const { return nodes_.at(id); }
  static constexpr std::size_t kRoot = 0;

  // Leaf attributes in preorder.
  std::vector<AttributeId> leaves() const;
  AttributeSet attributes() const;
  std::size_t depth() const;

  // Preorder records: u32 threshold, u32 child count, u8 leaf flag,
  // u32 authority, u32 attribute; prefixed by a u32 node count.
  Bytes encode() const;
  static AccessTree decode(ByteView bytes);

  bool operator==(const AccessTree& o) const;

 private:
  AccessTree() = default;
  void validate() const;

  std::vector<Node> nodes_;
};

bool satisfies(const AccessTree& tree, const AttributeSet& attrs);

// For each used internal node, the chosen 1-based child indices (exactly
// threshold many); and the leaves reached.
struct DecryptionPlan {
  std::map<std::size_t, std::vector<std::uint32_t>> chosen;
  std::vector<AttributeId> leaves;
};

// Deterministic: at every gate the lowest-indexed satisfied children win.
// Throws Unsatisfied when the tree is not satisfied by attrs.
DecryptionPlan select_satisfying(const AccessTree& tree, const AttributeSet& attrs);

// Per-node polynomial coefficients (constant term first) plus the leaf shares.
struct TreeSharing {
  std::vector<std::vector<Scalar>> polynomials;
  LeafShareMap leaf_shares;
};

// Top-down: q_root(0) = secret, q_x(0) = q_parent(index(x)), degree k_x - 1.
// Coefficients are drawn from rng in preorder, constant term excluded.
TreeSharing share_secret_detailed(const AccessTree& tree, const Scalar& secret, Rng& rng);
LeafShareMap share_secret(const AccessTree& tree, const Scalar& secret, Rng& rng);

Scalar evaluate_polynomial(const std::vector<Scalar>& coefficients, const Scalar& x);

// prod_{x_j in S, x_j != x_i} (x - x_j) / (x_i - x_j). DuplicatePoints on
// repeated abscissae; InvalidArgument when x_i is not in S.
Scalar lagrange_coeff(const Scalar& x_i, const std::vector<Scalar>& set, const Scalar& x);

Scalar interpolate_at_zero(const std::vector<std::pair<Scalar, Scalar>>& points);

// Bottom-up Lagrange recombination of the leaf shares along the plan.
Scalar reconstruct(const AccessTree& tree, const DecryptionPlan& plan, const LeafShareMap& shares);

// Textual policies: THRESH(k; a, b, ...), AND(...), OR(...), authority:attribute.
using AttributeResolver =
    std::function<AttributeId(std::string_view authority, std::string_view attribute)>;
using AttributeNamer = std::function<std::string(const AttributeId&)>;

AccessTree parse_policy(std::string_view text, const AttributeResolver& resolve);
std::string format_policy(const AccessTree& tree, const AttributeNamer& name);

}  // namespace dkpabe
