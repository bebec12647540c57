#include "dkpabe/access.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "dkpabe/error.hpp"

namespace dkpabe {

std::string to_string(const AttributeId& id) {
  return std::to_string(id.authority) + "." + std::to_string(id.attribute);
}

AccessTree AccessTree::leaf(AttributeId attribute) {
  if (attribute.authority == 0 || attribute.attribute == 0) {
    fail(ErrorCode::kInvalidTree, "attribute indices are 1-based");
  }
  AccessTree t;
  t.nodes_.push_back(Node{1, {}, attribute});
  return t;
}

AccessTree AccessTree::gate(std::uint32_t threshold, std::vector<AccessTree> children) {
  if (children.empty()) fail(ErrorCode::kInvalidTree, "gate without children");
  if (threshold == 0 || threshold > children.size()) {
    fail(ErrorCode::kInvalidTree, "threshold " + std::to_string(threshold) + " out of range for " +
                                      std::to_string(children.size()) + " children");
  }
  AccessTree t;
  t.nodes_.push_back(Node{threshold, {}, std::nullopt});
  for (const auto& child : children) {
    std::size_t offset = t.nodes_.size();
    t.nodes_[0].children.push_back(offset);
    for (Node n : child.nodes_) {
      for (auto& c : n.children) c += offset;
      t.nodes_.push_back(std::move(n));
    }
  }
  t.validate();
  return t;
}

AccessTree AccessTree::all_of(std::vector<AccessTree> children) {
  auto n = static_cast<std::uint32_t>(children.size());
  return gate(n, std::move(children));
}

AccessTree AccessTree::any_of(std::vector<AccessTree> children) {
  return gate(1, std::move(children));
}

void AccessTree::validate() const {
  if (nodes_.empty()) fail(ErrorCode::kInvalidTree, "empty tree");
  AttributeSet seen;
  for (const auto& n : nodes_) {
    if (n.leaf) {
      if (!n.children.empty() || n.threshold != 1) fail(ErrorCode::kInvalidTree, "malformed leaf");
      if (!seen.insert(*n.leaf).second) {
        fail(ErrorCode::kInvalidTree, "duplicate leaf attribute " + to_string(*n.leaf));
      }
    } else if (n.children.empty() || n.threshold == 0 || n.threshold > n.children.size()) {
      fail(ErrorCode::kInvalidTree, "bad threshold");
    }
  }
}

std::vector<AttributeId> AccessTree::leaves() const {
  std::vector<AttributeId> out;
  for (const auto& n : nodes_) {
    if (n.leaf) out.push_back(*n.leaf);
  }
  return out;
}

AttributeSet AccessTree::attributes() const {
  auto l = leaves();
  return {l.begin(), l.end()};
}

std::size_t AccessTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (auto c : nodes_[i].children) d[c] = d[i] + 1;
    best = std::max(best, d[i]);
  }
  return best;
}

Bytes AccessTree::encode() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(nodes_.size()));
  for (const auto& n : nodes_) {
    w.u32(n.threshold);
    w.u32(static_cast<std::uint32_t>(n.children.size()));
    w.u8(n.leaf ? 1 : 0);
    w.u32(n.leaf ? n.leaf->authority : 0);
    w.u32(n.leaf ? n.leaf->attribute : 0);
  }
  return std::move(w).take();
}

namespace {

constexpr std::size_t kMaxTreeNodes = 1u << 16;

struct Record {
  std::uint32_t threshold;
  std::uint32_t children;
  std::optional<AttributeId> leaf;
};

AccessTree build(const std::vector<Record>& recs, std::size_t& pos) {
  if (pos >= recs.size()) fail(ErrorCode::kMalformedInput, "tree records exhausted");
  const Record& r = recs[pos++];
  if (r.leaf) {
    if (r.children != 0 || r.threshold != 1) fail(ErrorCode::kMalformedInput, "malformed leaf record");
    return AccessTree::leaf(*r.leaf);
  }
  if (r.children == 0 || r.children > recs.size() - pos) {
    fail(ErrorCode::kMalformedInput, "bad child count");
  }
  std::vector<AccessTree> kids;
  kids.reserve(r.children);
  for (std::uint32_t i = 0; i < r.children; ++i) kids.push_back(build(recs, pos));
  return AccessTree::gate(r.threshold, std::move(kids));
}

}  // namespace

AccessTree AccessTree::decode(ByteView bytes) {
  ByteReader r(bytes);
  std::uint32_t count = r.u32();
  if (count == 0 || count > kMaxTreeNodes) fail(ErrorCode::kMalformedInput, "bad node count");
  std::vector<Record> recs;
  recs.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Record rec{};
    rec.threshold = r.u32();
    rec.children = r.u32();
    std::uint8_t flag = r.u8();
    std::uint32_t k = r.u32();
    std::uint32_t j = r.u32();
    if (flag > 1) fail(ErrorCode::kMalformedInput, "bad leaf flag");
    if (flag == 1) {
      rec.leaf = AttributeId{k, j};
    } else if (k != 0 || j != 0) {
      fail(ErrorCode::kMalformedInput, "attribute on internal node");
    }
    recs.push_back(rec);
  }
  r.expect_done();
  std::size_t pos = 0;
  AccessTree t = build(recs, pos);
  if (pos != recs.size()) fail(ErrorCode::kMalformedInput, "trailing tree records");
  return t;
}

bool AccessTree::operator==(const AccessTree& o) const {
  if (nodes_.size() != o.nodes_.size()) return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& a = nodes_[i];
    const auto& b = o.nodes_[i];
    if (a.threshold != b.threshold || a.children != b.children || a.leaf != b.leaf) return false;
  }
  return true;
}

namespace {

bool satisfied_node(const AccessTree& tree, std::size_t id, const AttributeSet& attrs) {
  const auto& n = tree.node(id);
  if (n.leaf) return attrs.contains(*n.leaf);
  std::uint32_t hits = 0;
  for (auto c : n.children) {
    if (satisfied_node(tree, c, attrs) && ++hits == n.threshold) return true;
  }
  return false;
}

void plan_node(const AccessTree& tree, std::size_t id, const AttributeSet& attrs,
               DecryptionPlan& plan) {
  const auto& n = tree.node(id);
  if (n.leaf) {
    plan.leaves.push_back(*n.leaf);
    return;
  }
  auto& chosen = plan.chosen[id];
  for (std::size_t i = 0; i < n.children.size() && chosen.size() < n.threshold; ++i) {
    if (satisfied_node(tree, n.children[i], attrs)) {
      chosen.push_back(static_cast<std::uint32_t>(i + 1));
      plan_node(tree, n.children[i], attrs, plan);
    }
  }
}

}  // namespace

bool satisfies(const AccessTree& tree, const AttributeSet& attrs) {
  return satisfied_node(tree, AccessTree::kRoot, attrs);
}

DecryptionPlan select_satisfying(const AccessTree& tree, const AttributeSet& attrs) {
  if (!satisfies(tree, attrs)) fail(ErrorCode::kUnsatisfied, "attribute set does not satisfy tree");
  DecryptionPlan plan;
  plan_node(tree, AccessTree::kRoot, attrs, plan);
  return plan;
}

Scalar evaluate_polynomial(const std::vector<Scalar>& coefficients, const Scalar& x) {
  if (coefficients.empty()) fail(ErrorCode::kInvalidArgument, "empty polynomial");
  Scalar acc = coefficients.back();
  for (auto it = coefficients.rbegin() + 1; it != coefficients.rend(); ++it) acc = acc * x + *it;
  return acc;
}

TreeSharing share_secret_detailed(const AccessTree& tree, const Scalar& secret, Rng& rng) {
  const auto& field = secret.field();
  const auto& nodes = tree.nodes();
  TreeSharing out;
  out.polynomials.resize(nodes.size());
  std::vector<Scalar> constant(nodes.size());
  constant[AccessTree::kRoot] = secret;
  // Preorder guarantees a parent is visited before its children.
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const auto& n = nodes[id];
    auto& poly = out.polynomials[id];
    poly.push_back(constant[id]);
    for (std::uint32_t d = 1; d < n.threshold; ++d) poly.push_back(Scalar::random(field, rng));
    if (n.leaf) {
      out.leaf_shares.emplace(*n.leaf, poly[0]);
      continue;
    }
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      constant[n.children[i]] = evaluate_polynomial(poly, Scalar::from_u64(field, i + 1));
    }
  }
  return out;
}

LeafShareMap share_secret(const AccessTree& tree, const Scalar& secret, Rng& rng) {
  return share_secret_detailed(tree, secret, rng).leaf_shares;
}

Scalar lagrange_coeff(const Scalar& x_i, const std::vector<Scalar>& set, const Scalar& x) {
  for (std::size_t a = 0; a < set.size(); ++a) {
    for (std::size_t b = a + 1; b < set.size(); ++b) {
      if (set[a] == set[b]) fail(ErrorCode::kDuplicatePoints, "repeated abscissa");
    }
  }
  if (std::find(set.begin(), set.end(), x_i) == set.end()) {
    fail(ErrorCode::kInvalidArgument, "x_i not in interpolation set");
  }
  Scalar num = Scalar::one(x_i.field());
  Scalar den = Scalar::one(x_i.field());
  for (const auto& x_j : set) {
    if (x_j == x_i) continue;
    num *= x - x_j;
    den *= x_i - x_j;
  }
  return num / den;
}

Scalar interpolate_at_zero(const std::vector<std::pair<Scalar, Scalar>>& points) {
  if (points.empty()) fail(ErrorCode::kInvalidArgument, "no points");
  std::vector<Scalar> xs;
  xs.reserve(points.size());
  for (const auto& p : points) xs.push_back(p.first);
  Scalar zero = Scalar::zero(xs[0].field());
  Scalar acc = zero;
  for (const auto& p : points) acc += lagrange_coeff(p.first, xs, zero) * p.second;
  return acc;
}

namespace {

Scalar reconstruct_node(const AccessTree& tree, std::size_t id, const DecryptionPlan& plan,
                        const LeafShareMap& shares, const FieldRef& field) {
  const auto& n = tree.node(id);
  if (n.leaf) {
    auto it = shares.find(*n.leaf);
    if (it == shares.end()) fail(ErrorCode::kMissingLeafKey, to_string(*n.leaf));
    return it->second;
  }
  auto it = plan.chosen.find(id);
  if (it == plan.chosen.end()) fail(ErrorCode::kInvalidArgument, "node not in plan");
  std::vector<Scalar> xs;
  for (auto idx : it->second) xs.push_back(Scalar::from_u64(field, idx));
  Scalar zero = Scalar::zero(field);
  Scalar acc = zero;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Scalar child = reconstruct_node(tree, n.children.at(it->second[i] - 1), plan, shares, field);
    acc += lagrange_coeff(xs[i], xs, zero) * child;
  }
  return acc;
}

}  // namespace

Scalar reconstruct(const AccessTree& tree, const DecryptionPlan& plan, const LeafShareMap& shares) {
  if (shares.empty()) fail(ErrorCode::kInvalidArgument, "no shares");
  return reconstruct_node(tree, AccessTree::kRoot, plan, shares, shares.begin()->second.field());
}

// ---- policy text -----------------------------------------------------------

namespace {

class PolicyParser {
 public:
  PolicyParser(std::string_view text, const AttributeResolver& resolve)
      : text_(text), resolve_(resolve) {}

  AccessTree parse() {
    AccessTree t = expr();
    skip_ws();
    if (pos_ != text_.size()) error("unexpected trailing input");
    return t;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::kPolicySyntax, what + " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) error(std::string("expected '") + c + "'");
  }

  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == '@';
  }

  std::string_view name() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && name_char(text_[pos_])) ++pos_;
    if (start == pos_) error("expected name");
    return text_.substr(start, pos_ - start);
  }

  std::vector<AccessTree> children() {
    std::vector<AccessTree> out;
    out.push_back(expr());
    while (eat(',')) out.push_back(expr());
    expect(')');
    return out;
  }

  AccessTree expr() {
    if (++depth_ > kMaxDepth) error("nesting too deep");
    std::string_view head = name();
    AccessTree t = [&] {
      if (eat('(')) {
        if (head == "AND") return AccessTree::all_of(children());
        if (head == "OR") return AccessTree::any_of(children());
        if (head == "THRESH") {
          std::string_view k = name();
          std::uint32_t threshold = 0;
          auto [p, ec] = std::from_chars(k.data(), k.data() + k.size(), threshold);
          if (ec != std::errc{} || p != k.data() + k.size()) error("bad threshold");
          expect(';');
          auto kids = children();
          if (threshold == 0 || threshold > kids.size()) error("threshold out of range");
          return AccessTree::gate(threshold, std::move(kids));
        }
        error("unknown gate '" + std::string(head) + "'");
      }
      expect(':');
      std::string_view attr = name();
      return AccessTree::leaf(resolve_(head, attr));
    }();
    --depth_;
    return t;
  }

  static constexpr int kMaxDepth = 64;

  std::string_view text_;
  const AttributeResolver& resolve_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

void format_node(const AccessTree& tree, std::size_t id, const AttributeNamer& name,
                 std::string& out) {
  const auto& n = tree.node(id);
  if (n.leaf) {
    out += name(*n.leaf);
    return;
  }
  if (n.threshold == n.children.size() && n.children.size() > 1) {
    out += "AND(";
  } else if (n.threshold == 1 && n.children.size() > 1) {
    out += "OR(";
  } else {
    out += "THRESH(" + std::to_string(n.threshold) + "; ";
  }
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    if (i) out += ", ";
    format_node(tree, n.children[i], name, out);
  }
  out += ")";
}

}  // namespace

AccessTree parse_policy(std::string_view text, const AttributeResolver& resolve) {
  return PolicyParser(text, resolve).parse();
}

std::string format_policy(const AccessTree& tree, const AttributeNamer& name) {
  std::string out;
  format_node(tree, AccessTree::kRoot, name, out);
  return out;
}

}  // namespace dkpabe
