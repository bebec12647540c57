#pragma once

// Bilinear-group abstraction shared by every other module.
//
// Two interchangeable backends sit behind one set of value types:
//   * kCurve       BLS12-381 via blst (production, 128-bit security);
//   * kTransparent elements are their own discrete logs modulo a small prime.
//                  Insecure by construction; it exists as a brute-force oracle.
//
// The scheme is written for a symmetric pairing e: G1 x G1 -> GT. A
// SourceElement therefore carries up to two encodings of the same discrete
// log, one per source group of the asymmetric curve ("halves"). Elements
// derived from g carry both halves; elements derived from h or h1 (which are
// hashed into the second group so nobody knows their logs) carry only the
// second. Products keep the halves present in both operands. pair(a, b) uses
// a's first half and b's second half.

#include <blst.h>
#include <gmpxx.h>

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <variant>

#include "dkpabe/bytes.hpp"
#include "dkpabe/rng.hpp"

namespace dkpabe {

enum class Backend : std::uint8_t { kCurve = 0x01, kTransparent = 0x02 };

std::string_view to_string(Backend backend);
Backend parse_backend(std::string_view name);

class ScalarField {
 public:
  explicit ScalarField(mpz_class modulus);

  const mpz_class& modulus() const { return modulus_; }
  std::size_t byte_width() const { return byte_width_; }
  std::size_t bits() const { return bits_; }

 private:
  mpz_class modulus_;
  std::size_t bits_;
  std::size_t byte_width_;
};

using FieldRef = std::shared_ptr<const ScalarField>;

// Element of Z_p. A default-constructed Scalar is unbound and only good for
// assignment; arithmetic between different fields throws BackendMismatch.
class Scalar {
 public:
  Scalar() = default;
  Scalar(FieldRef field, const mpz_class& value);

  static Scalar zero(const FieldRef& field) { return {field, 0}; }
  static Scalar one(const FieldRef& field) { return {field, 1}; }
  static Scalar from_u64(const FieldRef& field, std::uint64_t v);
  static Scalar from_i64(const FieldRef& field, std::int64_t v);
  // Uniform over [0, p) / [1, p) using 128 extra bits before reduction.
  static Scalar random(const FieldRef& field, Rng& rng);
  static Scalar random_nonzero(const FieldRef& field, Rng& rng);
  // Fixed-width big-endian; rejects values >= p.
  static Scalar from_bytes(const FieldRef& field, ByteView bytes);

  Bytes to_bytes() const;
  std::uint64_t to_u64() const;

  const mpz_class& value() const { return value_; }
  const FieldRef& field() const { return field_; }
  bool bound() const { return field_ != nullptr; }
  bool is_zero() const { return value_ == 0; }

  Scalar inverse() const;  // InvalidArgument for zero

  Scalar operator+(const Scalar& o) const;
  Scalar operator-(const Scalar& o) const;
  Scalar operator*(const Scalar& o) const;
  Scalar operator/(const Scalar& o) const { return *this * o.inverse(); }
  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

  bool operator==(const Scalar& o) const;

  // Overwrites the value; used when session randomness is destroyed.
  void wipe();

 private:
  const FieldRef& same_field(const Scalar& o) const;

  FieldRef field_;
  mpz_class value_;
};

class SourceElement {
 public:
  SourceElement() = default;

  Backend backend() const;
  bool has_first() const;
  bool has_second() const;
  bool valid() const { return !std::holds_alternative<std::monostate>(rep_); }

  bool operator==(const SourceElement& o) const;

 private:
  friend class GroupDescriptor;
  friend class GroupContext;
  friend struct SourceAccess;

  struct Curve {
    std::optional<blst_p1> first;
    std::optional<blst_p2> second;
  };
  struct Transparent {
    std::optional<std::uint64_t> first;
    std::optional<std::uint64_t> second;
  };

  std::variant<std::monostate, Curve, Transparent> rep_;
};

class TargetElement {
 public:
  TargetElement() = default;

  Backend backend() const;
  bool valid() const { return !std::holds_alternative<std::monostate>(rep_); }

  bool operator==(const TargetElement& o) const;

 private:
  friend class GroupDescriptor;
  friend class GroupContext;
  friend struct TargetAccess;

  std::variant<std::monostate, blst_fp12, std::uint64_t> rep_;
};

// Backend plus scalar field. Provides every uncounted operation: generator
// derivation, hashing, sampling, canonical encodings, identity checks.
class GroupDescriptor {
 public:
  static GroupDescriptor curve();
  // p must be a prime below 2^62.
  static GroupDescriptor transparent(std::uint64_t p);

  static constexpr std::uint64_t kDefaultTransparentPrime = 2147483647;  // 2^31 - 1

  Backend backend() const { return backend_; }
  const FieldRef& field() const { return field_; }
  std::uint64_t transparent_modulus() const { return p_; }
  bool operator==(const GroupDescriptor& o) const;

  SourceElement generator() const;
  // Second-group-only element with a discrete log nobody knows (on the curve).
  SourceElement hash_to_source(std::string_view domain, ByteView msg) const;
  SourceElement source_identity() const;
  TargetElement target_identity() const;
  bool is_identity(const SourceElement& a) const;
  bool is_identity(const TargetElement& a) const;

  // SHA-512 of the input, read big-endian and reduced mod p.
  Scalar hash_to_scalar(ByteView bytes) const;
  Scalar random_scalar(Rng& rng) const { return Scalar::random(field_, rng); }
  Scalar random_nonzero_scalar(Rng& rng) const { return Scalar::random_nonzero(field_, rng); }

  // Canonical encodings: backend tag, then (source only) a presence byte,
  // then compressed points or fixed-width big-endian logs.
  Bytes encode(const SourceElement& a) const;
  Bytes encode(const TargetElement& a) const;
  Bytes encode(const Scalar& s) const;
  SourceElement decode_source(ByteView bytes) const;
  TargetElement decode_target(ByteView bytes) const;
  Scalar decode_scalar(ByteView bytes) const;
  std::size_t scalar_size() const { return field_->byte_width(); }

  // Byte tag identifying the group for serialized containers.
  void write_to(ByteWriter& w) const;
  static GroupDescriptor read_from(ByteReader& r);

 private:
  GroupDescriptor(Backend backend, FieldRef field, std::uint64_t p)
      : backend_(backend), field_(std::move(field)), p_(p) {}

  void check(const SourceElement& a) const;
  void check(const TargetElement& a) const;

  Backend backend_;
  FieldRef field_;
  std::uint64_t p_ = 0;
};

// Group descriptor plus the public generators g, h, h1 and the cached
// e(g, g) used by authority setup.
struct GlobalParams {
  GroupDescriptor group;
  SourceElement g;
  SourceElement h;
  SourceElement h1;
  TargetElement egg;

  const FieldRef& field() const { return group.field(); }
};

// Deterministic: generators come from fixed domain-separation strings.
GlobalParams derive_global_params(const GroupDescriptor& group);

struct OpCounts {
  std::uint64_t multiplications = 0;
  std::uint64_t exponentiations = 0;
  std::uint64_t pairings = 0;

  bool operator==(const OpCounts&) const = default;
  OpCounts operator-(const OpCounts& o) const {
    return {multiplications - o.multiplications, exponentiations - o.exponentiations,
            pairings - o.pairings};
  }
  OpCounts operator+(const OpCounts& o) const {
    return {multiplications + o.multiplications, exponentiations + o.exponentiations,
            pairings + o.pairings};
  }
};

// Counted group arithmetic. Elements are pure values; the counters are the
// only mutable state and are safe to bump from several threads.
class GroupContext {
 public:
  explicit GroupContext(std::shared_ptr<const GlobalParams> params);
  GroupContext(const GroupContext&) = delete;
  GroupContext& operator=(const GroupContext&) = delete;

  const GlobalParams& params() const { return *params_; }
  const std::shared_ptr<const GlobalParams>& params_ptr() const { return params_; }
  const GroupDescriptor& group() const { return params_->group; }
  const FieldRef& field() const { return params_->group.field(); }

  SourceElement mul(const SourceElement& a, const SourceElement& b);
  SourceElement exp(const SourceElement& base, const Scalar& k);
  TargetElement mul(const TargetElement& a, const TargetElement& b);
  TargetElement div(const TargetElement& a, const TargetElement& b);
  TargetElement exp(const TargetElement& base, const Scalar& k);
  TargetElement pair(const SourceElement& a, const SourceElement& b);

  OpCounts counters_snapshot() const;
  void reset_counters();

 private:
  std::shared_ptr<const GlobalParams> params_;
  std::atomic<std::uint64_t> muls_{0};
  std::atomic<std::uint64_t> exps_{0};
  std::atomic<std::uint64_t> pairings_{0};
};

// Discrete-log view of transparent elements, for oracle tests.
namespace oracle {

struct SourceLogs {
  std::optional<std::uint64_t> first;
  std::optional<std::uint64_t> second;
};

SourceLogs discrete_logs(const SourceElement& a);
std::uint64_t discrete_log(const TargetElement& a);
SourceElement make_source(std::optional<std::uint64_t> first, std::optional<std::uint64_t> second);
TargetElement make_target(std::uint64_t log);

}  // namespace oracle

}  // namespace dkpabe
