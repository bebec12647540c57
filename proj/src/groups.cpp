#include "dkpabe/groups.hpp"

#include <openssl/crypto.h>

#include <cstring>

#include "dkpabe/digest.hpp"
#include "dkpabe/error.hpp"

namespace dkpabe {

struct SourceAccess {
  using Curve = SourceElement::Curve;
  using Transparent = SourceElement::Transparent;
  static auto& rep(SourceElement& e) { return e.rep_; }
  static const auto& rep(const SourceElement& e) { return e.rep_; }
  static SourceElement make(Curve c) {
    SourceElement e;
    e.rep_ = std::move(c);
    return e;
  }
  static SourceElement make(Transparent t) {
    SourceElement e;
    e.rep_ = std::move(t);
    return e;
  }
};

struct TargetAccess {
  static const auto& rep(const TargetElement& e) { return e.rep_; }
  static TargetElement make(const blst_fp12& f) {
    TargetElement e;
    e.rep_ = f;
    return e;
  }
  static TargetElement make(std::uint64_t log) {
    TargetElement e;
    e.rep_ = log;
    return e;
  }
};

namespace {

using Curve = SourceAccess::Curve;
using Transparent = SourceAccess::Transparent;

constexpr std::size_t kG1Compressed = 48;
constexpr std::size_t kG2Compressed = 96;
constexpr std::size_t kGtBytes = 576;
constexpr char kBls12381Order[] =
    "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001";
constexpr char kHashToG2Dst[] = "DKPABE-V1-BLS12381G2_XMD:SHA-256_SSWU_RO_";

__extension__ typedef unsigned __int128 u128;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % p);
}

std::uint64_t addmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>((static_cast<u128>(a) + b) % p);
}

// 32-byte little-endian scalar as blst expects.
std::array<std::uint8_t, 32> scalar_le(const Scalar& k) {
  std::array<std::uint8_t, 32> out{};
  std::size_t count = 0;
  mpz_export(out.data(), &count, -1, 1, 0, 0, k.value().get_mpz_t());
  return out;
}

blst_p1 p1_identity() {
  blst_p1 p;
  std::memset(&p, 0, sizeof(p));
  return p;
}

blst_p2 p2_identity() {
  blst_p2 p;
  std::memset(&p, 0, sizeof(p));
  return p;
}

blst_p1 p1_mult(const blst_p1& base, const Scalar& k) {
  if (k.is_zero()) return p1_identity();
  auto le = scalar_le(k);
  blst_p1 out;
  blst_p1_mult(&out, &base, le.data(), 255);
  return out;
}

blst_p2 p2_mult(const blst_p2& base, const Scalar& k) {
  if (k.is_zero()) return p2_identity();
  auto le = scalar_le(k);
  blst_p2 out;
  blst_p2_mult(&out, &base, le.data(), 255);
  return out;
}

blst_fp12 fp12_mul(const blst_fp12& a, const blst_fp12& b) {
  blst_fp12 out;
  blst_fp12_mul(&out, &a, &b);
  return out;
}

// Elements of GT live in the cyclotomic subgroup, where inversion is
// conjugation and squaring has a cheaper formula.
blst_fp12 fp12_inverse(const blst_fp12& a) {
  blst_fp12 out = a;
  blst_fp12_conjugate(&out);
  return out;
}

blst_fp12 gt_pow(const blst_fp12& base, const Scalar& k) {
  if (k.is_zero()) return *blst_fp12_one();
  // Fixed 4-bit window, most significant nibble first.
  std::array<blst_fp12, 16> table;
  table[0] = *blst_fp12_one();
  table[1] = base;
  for (std::size_t i = 2; i < table.size(); ++i) table[i] = fp12_mul(table[i - 1], base);

  auto le = scalar_le(k);
  blst_fp12 acc = *blst_fp12_one();
  bool started = false;
  for (int byte = 31; byte >= 0; --byte) {
    for (int half = 1; half >= 0; --half) {
      unsigned nib = (le[byte] >> (4 * half)) & 0xf;
      if (started) {
        for (int s = 0; s < 4; ++s) blst_fp12_cyclotomic_sqr(&acc, &acc);
      }
      if (nib != 0) {
        acc = started ? fp12_mul(acc, table[nib]) : table[nib];
        started = true;
      }
    }
  }
  return acc;
}

blst_fp12 curve_pair(const blst_p1& a, const blst_p2& b) {
  if (blst_p1_is_inf(&a) || blst_p2_is_inf(&b)) return *blst_fp12_one();
  blst_p1_affine pa;
  blst_p2_affine qb;
  blst_p1_to_affine(&pa, &a);
  blst_p2_to_affine(&qb, &b);
  blst_fp12 ml, out;
  blst_miller_loop(&ml, &qb, &pa);
  blst_final_exp(&out, &ml);
  return out;
}

const Curve& as_curve(const SourceElement& e) {
  const auto* c = std::get_if<Curve>(&SourceAccess::rep(e));
  if (!c) fail(ErrorCode::kBackendMismatch, "expected a curve element");
  return *c;
}

const Transparent& as_transparent(const SourceElement& e) {
  const auto* t = std::get_if<Transparent>(&SourceAccess::rep(e));
  if (!t) fail(ErrorCode::kBackendMismatch, "expected a transparent element");
  return *t;
}

const blst_fp12& as_curve(const TargetElement& e) {
  const auto* f = std::get_if<blst_fp12>(&TargetAccess::rep(e));
  if (!f) fail(ErrorCode::kBackendMismatch, "expected a curve target element");
  return *f;
}

std::uint64_t as_transparent(const TargetElement& e) {
  const auto* t = std::get_if<std::uint64_t>(&TargetAccess::rep(e));
  if (!t) fail(ErrorCode::kBackendMismatch, "expected a transparent target element");
  return *t;
}

template <class T, class F>
std::optional<T> both(const std::optional<T>& a, const std::optional<T>& b, F f) {
  if (a && b) return f(*a, *b);
  return std::nullopt;
}

template <class T, class F>
std::optional<T> each(const std::optional<T>& a, F f) {
  if (a) return f(*a);
  return std::nullopt;
}

SourceElement raw_mul(const GroupDescriptor& group, const SourceElement& a,
                      const SourceElement& b) {
  if (group.backend() == Backend::kCurve) {
    const auto& x = as_curve(a);
    const auto& y = as_curve(b);
    return SourceAccess::make(Curve{
        both(x.first, y.first,
             [](const blst_p1& l, const blst_p1& r) {
               blst_p1 out;
               blst_p1_add_or_double(&out, &l, &r);
               return out;
             }),
        both(x.second, y.second, [](const blst_p2& l, const blst_p2& r) {
          blst_p2 out;
          blst_p2_add_or_double(&out, &l, &r);
          return out;
        })});
  }
  const auto& x = as_transparent(a);
  const auto& y = as_transparent(b);
  auto p = group.transparent_modulus();
  auto add = [p](std::uint64_t l, std::uint64_t r) { return addmod(l, r, p); };
  return SourceAccess::make(Transparent{both(x.first, y.first, add), both(x.second, y.second, add)});
}

SourceElement raw_exp(const GroupDescriptor& group, const SourceElement& base, const Scalar& k) {
  if (group.backend() == Backend::kCurve) {
    const auto& x = as_curve(base);
    return SourceAccess::make(
        Curve{each(x.first, [&](const blst_p1& v) { return p1_mult(v, k); }),
              each(x.second, [&](const blst_p2& v) { return p2_mult(v, k); })});
  }
  const auto& x = as_transparent(base);
  auto p = group.transparent_modulus();
  auto kk = k.to_u64();
  auto pw = [&](std::uint64_t v) { return mulmod(v, kk, p); };
  return SourceAccess::make(Transparent{each(x.first, pw), each(x.second, pw)});
}

TargetElement raw_pair(const GroupDescriptor& group, const SourceElement& a,
                       const SourceElement& b) {
  if (group.backend() == Backend::kCurve) {
    const auto& x = as_curve(a);
    const auto& y = as_curve(b);
    if (!x.first || !y.second) {
      fail(ErrorCode::kInvalidArgument,
           "pairing needs the first-group half of the left operand and the second-group half "
           "of the right operand");
    }
    return TargetAccess::make(curve_pair(*x.first, *y.second));
  }
  const auto& x = as_transparent(a);
  const auto& y = as_transparent(b);
  if (!x.first || !y.second) {
    fail(ErrorCode::kInvalidArgument,
         "pairing needs the first-group half of the left operand and the second-group half of "
         "the right operand");
  }
  return TargetAccess::make(mulmod(*x.first, *y.second, group.transparent_modulus()));
}

void write_be(Bytes& out, std::uint64_t v, std::size_t width) {
  for (std::size_t i = width; i-- > 0;) {
    out.push_back(i < 8 ? static_cast<std::uint8_t>(v >> (8 * i)) : 0);
  }
}

std::uint64_t read_be(ByteView in) {
  std::uint64_t v = 0;
  for (auto b : in) v = v << 8 | b;
  return v;
}

void check_scalar_field(const GroupDescriptor& group, const Scalar& k) {
  if (!k.bound()) fail(ErrorCode::kInvalidArgument, "unbound scalar");
  if (k.field() != group.field() && k.field()->modulus() != group.field()->modulus()) {
    fail(ErrorCode::kBackendMismatch, "scalar from a different field");
  }
}

}  // namespace

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::kCurve: return "curve";
    case Backend::kTransparent: return "transparent";
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  if (name == "curve") return Backend::kCurve;
  if (name == "transparent") return Backend::kTransparent;
  fail(ErrorCode::kUnsupportedParameters, "unknown backend '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- Scalar

ScalarField::ScalarField(mpz_class modulus) : modulus_(std::move(modulus)) {
  if (modulus_ < 2) fail(ErrorCode::kUnsupportedParameters, "field modulus must be >= 2");
  bits_ = mpz_sizeinbase(modulus_.get_mpz_t(), 2);
  byte_width_ = (bits_ + 7) / 8;
}

Scalar::Scalar(FieldRef field, const mpz_class& value) : field_(std::move(field)) {
  if (!field_) fail(ErrorCode::kInvalidArgument, "scalar needs a field");
  mpz_mod(value_.get_mpz_t(), value.get_mpz_t(), field_->modulus().get_mpz_t());
}

Scalar Scalar::from_u64(const FieldRef& field, std::uint64_t v) {
  mpz_class m;
  mpz_import(m.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return {field, m};
}

Scalar Scalar::from_i64(const FieldRef& field, std::int64_t v) {
  if (v >= 0) return from_u64(field, static_cast<std::uint64_t>(v));
  return -from_u64(field, static_cast<std::uint64_t>(-(v + 1)) + 1);
}

Scalar Scalar::random(const FieldRef& field, Rng& rng) {
  Bytes buf = rng.bytes(field->byte_width() + 16);
  mpz_class m;
  mpz_import(m.get_mpz_t(), buf.size(), 1, 1, 0, 0, buf.data());
  return {field, m};
}

Scalar Scalar::random_nonzero(const FieldRef& field, Rng& rng) {
  Bytes buf = rng.bytes(field->byte_width() + 16);
  mpz_class m;
  mpz_import(m.get_mpz_t(), buf.size(), 1, 1, 0, 0, buf.data());
  mpz_class pm1 = field->modulus() - 1;
  m %= pm1;
  return {field, m + 1};
}

Scalar Scalar::from_bytes(const FieldRef& field, ByteView bytes) {
  if (bytes.size() != field->byte_width()) fail(ErrorCode::kMalformedInput, "scalar width");
  mpz_class m;
  mpz_import(m.get_mpz_t(), bytes.size(), 1, 1, 0, 0, bytes.data());
  if (m >= field->modulus()) fail(ErrorCode::kMalformedInput, "scalar not reduced");
  return {field, m};
}

Bytes Scalar::to_bytes() const {
  if (!field_) fail(ErrorCode::kInvalidArgument, "unbound scalar");
  Bytes out(field_->byte_width(), 0);
  std::size_t count = (mpz_sizeinbase(value_.get_mpz_t(), 2) + 7) / 8;
  if (value_ != 0) {
    mpz_export(out.data() + out.size() - count, &count, 1, 1, 0, 0, value_.get_mpz_t());
  }
  return out;
}

std::uint64_t Scalar::to_u64() const {
  if (mpz_sizeinbase(value_.get_mpz_t(), 2) > 64) {
    fail(ErrorCode::kInvalidArgument, "scalar does not fit in 64 bits");
  }
  std::uint64_t v = 0;
  mpz_export(&v, nullptr, -1, sizeof(v), 0, 0, value_.get_mpz_t());
  return v;
}

const FieldRef& Scalar::same_field(const Scalar& o) const {
  if (!field_ || !o.field_) fail(ErrorCode::kInvalidArgument, "unbound scalar");
  if (field_ != o.field_ && field_->modulus() != o.field_->modulus()) {
    fail(ErrorCode::kBackendMismatch, "scalars from different fields");
  }
  return field_;
}

Scalar Scalar::inverse() const {
  if (!field_) fail(ErrorCode::kInvalidArgument, "unbound scalar");
  if (is_zero()) fail(ErrorCode::kInvalidArgument, "zero has no inverse");
  mpz_class out;
  mpz_invert(out.get_mpz_t(), value_.get_mpz_t(), field_->modulus().get_mpz_t());
  return {field_, out};
}

Scalar Scalar::operator+(const Scalar& o) const { return {same_field(o), value_ + o.value_}; }
Scalar Scalar::operator-(const Scalar& o) const { return {same_field(o), value_ - o.value_}; }
Scalar Scalar::operator*(const Scalar& o) const { return {same_field(o), value_ * o.value_}; }

Scalar Scalar::operator-() const {
  if (!field_) fail(ErrorCode::kInvalidArgument, "unbound scalar");
  return {field_, -value_};
}

bool Scalar::operator==(const Scalar& o) const {
  if (!field_ || !o.field_) return !field_ && !o.field_;
  return field_->modulus() == o.field_->modulus() && value_ == o.value_;
}

void Scalar::wipe() {
  auto* z = value_.get_mpz_t();
  OPENSSL_cleanse(z->_mp_d, static_cast<std::size_t>(z->_mp_alloc) * sizeof(mp_limb_t));
  value_ = 0;
}

// ------------------------------------------------------------- Elements

Backend SourceElement::backend() const {
  if (std::holds_alternative<Curve>(rep_)) return Backend::kCurve;
  if (std::holds_alternative<Transparent>(rep_)) return Backend::kTransparent;
  fail(ErrorCode::kInvalidArgument, "empty source element");
}

bool SourceElement::has_first() const {
  if (const auto* c = std::get_if<Curve>(&rep_)) return c->first.has_value();
  if (const auto* t = std::get_if<Transparent>(&rep_)) return t->first.has_value();
  return false;
}

bool SourceElement::has_second() const {
  if (const auto* c = std::get_if<Curve>(&rep_)) return c->second.has_value();
  if (const auto* t = std::get_if<Transparent>(&rep_)) return t->second.has_value();
  return false;
}

bool SourceElement::operator==(const SourceElement& o) const {
  if (rep_.index() != o.rep_.index()) return false;
  if (const auto* c = std::get_if<Curve>(&rep_)) {
    const auto& d = std::get<Curve>(o.rep_);
    if (c->first.has_value() != d.first.has_value()) return false;
    if (c->second.has_value() != d.second.has_value()) return false;
    if (c->first && !blst_p1_is_equal(&*c->first, &*d.first)) return false;
    if (c->second && !blst_p2_is_equal(&*c->second, &*d.second)) return false;
    return true;
  }
  if (const auto* t = std::get_if<Transparent>(&rep_)) {
    const auto& u = std::get<Transparent>(o.rep_);
    return t->first == u.first && t->second == u.second;
  }
  return true;
}

Backend TargetElement::backend() const {
  if (std::holds_alternative<blst_fp12>(rep_)) return Backend::kCurve;
  if (std::holds_alternative<std::uint64_t>(rep_)) return Backend::kTransparent;
  fail(ErrorCode::kInvalidArgument, "empty target element");
}

bool TargetElement::operator==(const TargetElement& o) const {
  if (rep_.index() != o.rep_.index()) return false;
  if (const auto* f = std::get_if<blst_fp12>(&rep_)) {
    return blst_fp12_is_equal(f, &std::get<blst_fp12>(o.rep_));
  }
  if (const auto* t = std::get_if<std::uint64_t>(&rep_)) return *t == std::get<std::uint64_t>(o.rep_);
  return true;
}

// ------------------------------------------------------ GroupDescriptor

GroupDescriptor GroupDescriptor::curve() {
  static const FieldRef field = std::make_shared<ScalarField>(mpz_class(kBls12381Order, 16));
  return {Backend::kCurve, field, 0};
}

GroupDescriptor GroupDescriptor::transparent(std::uint64_t p) {
  if (p < 3 || p >= (std::uint64_t{1} << 62)) {
    fail(ErrorCode::kUnsupportedParameters, "transparent modulus must be in [3, 2^62)");
  }
  mpz_class m;
  mpz_import(m.get_mpz_t(), 1, 1, sizeof(p), 0, 0, &p);
  if (mpz_probab_prime_p(m.get_mpz_t(), 40) == 0) {
    fail(ErrorCode::kUnsupportedParameters, "transparent modulus must be prime");
  }
  return {Backend::kTransparent, std::make_shared<ScalarField>(m), p};
}

bool GroupDescriptor::operator==(const GroupDescriptor& o) const {
  return backend_ == o.backend_ && p_ == o.p_;
}

void GroupDescriptor::check(const SourceElement& a) const {
  if (!a.valid()) fail(ErrorCode::kInvalidArgument, "empty source element");
  if (a.backend() != backend_) fail(ErrorCode::kBackendMismatch, "source element backend");
}

void GroupDescriptor::check(const TargetElement& a) const {
  if (!a.valid()) fail(ErrorCode::kInvalidArgument, "empty target element");
  if (a.backend() != backend_) fail(ErrorCode::kBackendMismatch, "target element backend");
}

SourceElement GroupDescriptor::generator() const {
  if (backend_ == Backend::kCurve) {
    return SourceAccess::make(Curve{*blst_p1_generator(), *blst_p2_generator()});
  }
  return SourceAccess::make(Transparent{1, 1});
}

SourceElement GroupDescriptor::hash_to_source(std::string_view domain, ByteView msg) const {
  if (backend_ == Backend::kCurve) {
    ByteWriter w;
    w.str(domain);
    w.raw(msg);
    blst_p2 out;
    blst_hash_to_g2(&out, w.bytes().data(), w.bytes().size(),
                    reinterpret_cast<const byte*>(kHashToG2Dst), sizeof(kHashToG2Dst) - 1,
                    nullptr, 0);
    return SourceAccess::make(Curve{std::nullopt, out});
  }
  for (std::uint32_t ctr = 0;; ++ctr) {
    ByteWriter w;
    w.str(domain);
    w.blob(msg);
    w.u32(ctr);
    Scalar log = hash_to_scalar(w.bytes());
    if (!log.is_zero()) return SourceAccess::make(Transparent{std::nullopt, log.to_u64()});
  }
}

SourceElement GroupDescriptor::source_identity() const {
  if (backend_ == Backend::kCurve) return SourceAccess::make(Curve{p1_identity(), p2_identity()});
  return SourceAccess::make(Transparent{0, 0});
}

TargetElement GroupDescriptor::target_identity() const {
  if (backend_ == Backend::kCurve) return TargetAccess::make(*blst_fp12_one());
  return TargetAccess::make(std::uint64_t{0});
}

bool GroupDescriptor::is_identity(const SourceElement& a) const {
  check(a);
  if (backend_ == Backend::kCurve) {
    const auto& c = as_curve(a);
    return (!c.first || blst_p1_is_inf(&*c.first)) && (!c.second || blst_p2_is_inf(&*c.second));
  }
  const auto& t = as_transparent(a);
  return (!t.first || *t.first == 0) && (!t.second || *t.second == 0);
}

bool GroupDescriptor::is_identity(const TargetElement& a) const {
  check(a);
  if (backend_ == Backend::kCurve) return blst_fp12_is_one(&as_curve(a));
  return as_transparent(a) == 0;
}

Scalar GroupDescriptor::hash_to_scalar(ByteView bytes) const {
  auto digest = sha512(bytes);
  mpz_class m;
  mpz_import(m.get_mpz_t(), digest.size(), 1, 1, 0, 0, digest.data());
  return {field_, m};
}

Bytes GroupDescriptor::encode(const SourceElement& a) const {
  check(a);
  Bytes out;
  out.push_back(static_cast<std::uint8_t>(backend_));
  std::uint8_t presence = (a.has_first() ? 1 : 0) | (a.has_second() ? 2 : 0);
  out.push_back(presence);
  if (backend_ == Backend::kCurve) {
    const auto& c = as_curve(a);
    if (c.first) {
      std::uint8_t buf[kG1Compressed];
      blst_p1_compress(buf, &*c.first);
      out.insert(out.end(), buf, buf + sizeof(buf));
    }
    if (c.second) {
      std::uint8_t buf[kG2Compressed];
      blst_p2_compress(buf, &*c.second);
      out.insert(out.end(), buf, buf + sizeof(buf));
    }
    return out;
  }
  const auto& t = as_transparent(a);
  if (t.first) write_be(out, *t.first, scalar_size());
  if (t.second) write_be(out, *t.second, scalar_size());
  return out;
}

Bytes GroupDescriptor::encode(const TargetElement& a) const {
  check(a);
  Bytes out;
  out.push_back(static_cast<std::uint8_t>(backend_));
  if (backend_ == Backend::kCurve) {
    std::uint8_t buf[kGtBytes];
    blst_bendian_from_fp12(buf, &as_curve(a));
    out.insert(out.end(), buf, buf + sizeof(buf));
    return out;
  }
  write_be(out, as_transparent(a), scalar_size());
  return out;
}

Bytes GroupDescriptor::encode(const Scalar& s) const {
  check_scalar_field(*this, s);
  return s.to_bytes();
}

SourceElement GroupDescriptor::decode_source(ByteView bytes) const {
  ByteReader r(bytes);
  auto tag = r.u8();
  if (tag != static_cast<std::uint8_t>(backend_)) {
    fail(ErrorCode::kBackendMismatch, "element encoded for another backend");
  }
  auto presence = r.u8();
  if (presence == 0 || presence > 3) fail(ErrorCode::kMalformedInput, "element presence byte");
  bool has_first = presence & 1;
  bool has_second = presence & 2;
  if (backend_ == Backend::kCurve) {
    Curve c;
    if (has_first) {
      blst_p1_affine aff;
      if (blst_p1_uncompress(&aff, r.raw(kG1Compressed).data()) != BLST_SUCCESS ||
          !blst_p1_affine_in_g1(&aff)) {
        fail(ErrorCode::kMalformedInput, "invalid G1 point");
      }
      blst_p1 p;
      blst_p1_from_affine(&p, &aff);
      c.first = p;
    }
    if (has_second) {
      blst_p2_affine aff;
      if (blst_p2_uncompress(&aff, r.raw(kG2Compressed).data()) != BLST_SUCCESS ||
          !blst_p2_affine_in_g2(&aff)) {
        fail(ErrorCode::kMalformedInput, "invalid G2 point");
      }
      blst_p2 p;
      blst_p2_from_affine(&p, &aff);
      c.second = p;
    }
    r.expect_done();
    if (c.first && c.second) {
      // e(a1, g2) == e(g1, a2) iff both halves share a discrete log.
      auto lhs = curve_pair(*c.first, *blst_p2_generator());
      auto rhs = curve_pair(*blst_p1_generator(), *c.second);
      if (!blst_fp12_is_equal(&lhs, &rhs)) {
        fail(ErrorCode::kMalformedInput, "desynchronized mirrored element");
      }
    }
    return SourceAccess::make(std::move(c));
  }
  Transparent t;
  auto read_log = [&]() {
    auto v = read_be(r.raw(scalar_size()));
    if (v >= p_) fail(ErrorCode::kMalformedInput, "transparent log not reduced");
    return v;
  };
  if (has_first) t.first = read_log();
  if (has_second) t.second = read_log();
  r.expect_done();
  if (t.first && t.second && *t.first != *t.second) {
    fail(ErrorCode::kMalformedInput, "desynchronized mirrored element");
  }
  return SourceAccess::make(t);
}

TargetElement GroupDescriptor::decode_target(ByteView bytes) const {
  ByteReader r(bytes);
  auto tag = r.u8();
  if (tag != static_cast<std::uint8_t>(backend_)) {
    fail(ErrorCode::kBackendMismatch, "element encoded for another backend");
  }
  if (backend_ == Backend::kCurve) {
    auto raw = r.raw(kGtBytes);
    r.expect_done();
    blst_fp12 f;
    const std::uint8_t* p = raw.data();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 2; ++j) {
        blst_fp_from_bendian(&f.fp6[j].fp2[i].fp[0], p);
        p += 48;
        blst_fp_from_bendian(&f.fp6[j].fp2[i].fp[1], p);
        p += 48;
      }
    }
    std::uint8_t again[kGtBytes];
    blst_bendian_from_fp12(again, &f);
    if (std::memcmp(again, raw.data(), kGtBytes) != 0 || !blst_fp12_in_group(&f)) {
      fail(ErrorCode::kMalformedInput, "invalid GT element");
    }
    return TargetAccess::make(f);
  }
  auto v = read_be(r.raw(scalar_size()));
  r.expect_done();
  if (v >= p_) fail(ErrorCode::kMalformedInput, "transparent log not reduced");
  return TargetAccess::make(v);
}

Scalar GroupDescriptor::decode_scalar(ByteView bytes) const {
  return Scalar::from_bytes(field_, bytes);
}

void GroupDescriptor::write_to(ByteWriter& w) const {
  w.u8(static_cast<std::uint8_t>(backend_));
  if (backend_ == Backend::kTransparent) w.u64(p_);
}

GroupDescriptor GroupDescriptor::read_from(ByteReader& r) {
  auto tag = r.u8();
  if (tag == static_cast<std::uint8_t>(Backend::kCurve)) return curve();
  if (tag == static_cast<std::uint8_t>(Backend::kTransparent)) return transparent(r.u64());
  fail(ErrorCode::kMalformedInput, "unknown backend tag");
}

GlobalParams derive_global_params(const GroupDescriptor& group) {
  GlobalParams params{group, group.generator(),
                      group.hash_to_source("dkpabe/global-setup/v1", as_bytes("h")),
                      group.hash_to_source("dkpabe/global-setup/v1", as_bytes("h1")), {}};
  params.egg = raw_pair(group, params.g, params.g);
  return params;
}

// --------------------------------------------------------- GroupContext

GroupContext::GroupContext(std::shared_ptr<const GlobalParams> params)
    : params_(std::move(params)) {
  if (!params_) fail(ErrorCode::kInvalidArgument, "null params");
}

SourceElement GroupContext::mul(const SourceElement& a, const SourceElement& b) {
  const auto& g = group();
  if (!a.valid() || !b.valid()) fail(ErrorCode::kInvalidArgument, "empty source element");
  if (a.backend() != g.backend() || b.backend() != g.backend()) {
    fail(ErrorCode::kBackendMismatch, "operands from different backends");
  }
  muls_.fetch_add(1, std::memory_order_relaxed);
  return raw_mul(g, a, b);
}

SourceElement GroupContext::exp(const SourceElement& base, const Scalar& k) {
  const auto& g = group();
  if (!base.valid()) fail(ErrorCode::kInvalidArgument, "empty source element");
  if (base.backend() != g.backend()) fail(ErrorCode::kBackendMismatch, "base backend");
  check_scalar_field(g, k);
  exps_.fetch_add(1, std::memory_order_relaxed);
  return raw_exp(g, base, k);
}

TargetElement GroupContext::mul(const TargetElement& a, const TargetElement& b) {
  const auto& g = group();
  if (!a.valid() || !b.valid()) fail(ErrorCode::kInvalidArgument, "empty target element");
  if (a.backend() != g.backend() || b.backend() != g.backend()) {
    fail(ErrorCode::kBackendMismatch, "operands from different backends");
  }
  muls_.fetch_add(1, std::memory_order_relaxed);
  if (g.backend() == Backend::kCurve) {
    return TargetAccess::make(fp12_mul(as_curve(a), as_curve(b)));
  }
  return TargetAccess::make(addmod(as_transparent(a), as_transparent(b), g.transparent_modulus()));
}

TargetElement GroupContext::div(const TargetElement& a, const TargetElement& b) {
  const auto& g = group();
  if (!a.valid() || !b.valid()) fail(ErrorCode::kInvalidArgument, "empty target element");
  if (a.backend() != g.backend() || b.backend() != g.backend()) {
    fail(ErrorCode::kBackendMismatch, "operands from different backends");
  }
  muls_.fetch_add(1, std::memory_order_relaxed);
  if (g.backend() == Backend::kCurve) {
    return TargetAccess::make(fp12_mul(as_curve(a), fp12_inverse(as_curve(b))));
  }
  auto p = g.transparent_modulus();
  return TargetAccess::make(addmod(as_transparent(a), p - as_transparent(b), p));
}

TargetElement GroupContext::exp(const TargetElement& base, const Scalar& k) {
  const auto& g = group();
  if (!base.valid()) fail(ErrorCode::kInvalidArgument, "empty target element");
  if (base.backend() != g.backend()) fail(ErrorCode::kBackendMismatch, "base backend");
  check_scalar_field(g, k);
  exps_.fetch_add(1, std::memory_order_relaxed);
  if (g.backend() == Backend::kCurve) return TargetAccess::make(gt_pow(as_curve(base), k));
  return TargetAccess::make(mulmod(as_transparent(base), k.to_u64(), g.transparent_modulus()));
}

TargetElement GroupContext::pair(const SourceElement& a, const SourceElement& b) {
  const auto& g = group();
  if (!a.valid() || !b.valid()) fail(ErrorCode::kInvalidArgument, "empty source element");
  if (a.backend() != b.backend()) fail(ErrorCode::kBackendMismatch, "pairing across backends");
  if (a.backend() != g.backend()) fail(ErrorCode::kBackendMismatch, "pairing operand backend");
  pairings_.fetch_add(1, std::memory_order_relaxed);
  return raw_pair(g, a, b);
}

OpCounts GroupContext::counters_snapshot() const {
  return {muls_.load(std::memory_order_relaxed), exps_.load(std::memory_order_relaxed),
          pairings_.load(std::memory_order_relaxed)};
}

void GroupContext::reset_counters() {
  muls_.store(0, std::memory_order_relaxed);
  exps_.store(0, std::memory_order_relaxed);
  pairings_.store(0, std::memory_order_relaxed);
}

// --------------------------------------------------------------- oracle

namespace oracle {

SourceLogs discrete_logs(const SourceElement& a) {
  const auto& t = as_transparent(a);
  return {t.first, t.second};
}

std::uint64_t discrete_log(const TargetElement& a) { return as_transparent(a); }

SourceElement make_source(std::optional<std::uint64_t> first, std::optional<std::uint64_t> second) {
  return SourceAccess::make(Transparent{first, second});
}

TargetElement make_target(std::uint64_t log) { return TargetAccess::make(log); }

}  // namespace oracle

}  // namespace dkpabe
