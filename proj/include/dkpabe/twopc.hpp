#pragma once

// Two-party computation of x = (v + u) * rho mod p, where the user holds
// (u, rho) and the authority holds v. Only the authority learns x.
//
//   user -> authority   Enc(u rho mod p), Enc(rho)          (user's key)
//   authority -> user   Enc(u rho + rho v + t)              t uniform in [0, 2^128 p^2)
//   user -> authority   z = Dec(.) mod p
//   authority           x = z - t mod p
//
// Encryption is additively homomorphic under a key the user generates per
// session. Paillier is the real backend; the trusted-test backend keeps
// plaintexts in the clear and exists only for deterministic protocol tests.

#include <gmpxx.h>

#include <cstdint>
#include <memory>

#include "dkpabe/bytes.hpp"
#include "dkpabe/groups.hpp"

namespace dkpabe::twopc {

enum class HomKind : std::uint8_t { kPaillier = 1, kTrustedTest = 2 };

struct HomCiphertext {
  mpz_class value;

  bool operator==(const HomCiphertext& o) const { return value == o.value; }
};

class HomPublicKey {
 public:
  virtual ~HomPublicKey() = default;

  virtual HomKind kind() const = 0;
  // Plaintexts live in [0, plaintext_bound()).
  virtual mpz_class plaintext_bound() const = 0;
  virtual HomCiphertext encrypt(const mpz_class& m, Rng& rng) const = 0;
  virtual HomCiphertext add(const HomCiphertext& a, const HomCiphertext& b) const = 0;
  virtual HomCiphertext mul_const(const HomCiphertext& a, const mpz_class& k) const = 0;
  // Rejects values outside the ciphertext space.
  virtual bool valid(const HomCiphertext& c) const = 0;

  void write_to(ByteWriter& w) const;
  // ProtocolAbort on malformed keys.
  static std::shared_ptr<const HomPublicKey> read_from(ByteReader& r);

 protected:
  virtual void write_body(ByteWriter& w) const = 0;
};

class HomSecretKey {
 public:
  virtual ~HomSecretKey() = default;
  virtual std::shared_ptr<const HomPublicKey> public_key() const = 0;
  virtual mpz_class decrypt(const HomCiphertext& c) const = 0;
};

// Modulus of exactly `bits` bits from two random primes of bits/2 bits.
std::shared_ptr<const HomSecretKey> paillier_generate(unsigned bits, Rng& rng);
std::shared_ptr<const HomSecretKey> trusted_test_backend();

// Smallest plaintext space the protocol needs for field size p, and the
// Paillier modulus size used by default (at least 2048 bits).
mpz_class required_plaintext_bound(const mpz_class& p);
unsigned default_paillier_bits(const FieldRef& field);

void write_ciphertext(ByteWriter& w, const HomCiphertext& c);
HomCiphertext read_ciphertext(ByteReader& r);

struct BlindSumRequest {
  HomCiphertext enc_u_rho;
  HomCiphertext enc_rho;
};

struct BlindSumResponse {
  HomCiphertext enc_masked;
};

class UserBlindSum {
 public:
  UserBlindSum(std::shared_ptr<const HomSecretKey> sk, const Scalar& u, const Scalar& rho);
  ~UserBlindSum() { wipe(); }
  UserBlindSum(const UserBlindSum&) = delete;
  UserBlindSum& operator=(const UserBlindSum&) = delete;

  BlindSumRequest request(Rng& rng);
  // Returns z for the authority. ProtocolAbort on an invalid response.
  Scalar complete(const BlindSumResponse& response);
  void wipe();

 private:
  enum class Phase { kFresh, kRequested, kDone };

  std::shared_ptr<const HomSecretKey> sk_;
  Scalar u_;
  Scalar rho_;
  Phase phase_ = Phase::kFresh;
};

class AuthorityBlindSum {
 public:
  // ProtocolAbort when the user's key is too small for this field.
  AuthorityBlindSum(std::shared_ptr<const HomPublicKey> pk, const Scalar& v);
  ~AuthorityBlindSum() { wipe(); }
  AuthorityBlindSum(const AuthorityBlindSum&) = delete;
  AuthorityBlindSum& operator=(const AuthorityBlindSum&) = delete;

  BlindSumResponse respond(const BlindSumRequest& request, Rng& rng);
  // Explicit mask t in [0, 2^128 p^2), for tests that enumerate views.
  BlindSumResponse respond_with_mask(const BlindSumRequest& request, const mpz_class& t, Rng& rng);
  Scalar finish(const Scalar& z);
  void wipe();

  static mpz_class mask_bound(const mpz_class& p);

 private:
  enum class Phase { kFresh, kResponded, kDone };

  std::shared_ptr<const HomPublicKey> pk_;
  Scalar v_;
  mpz_class t_;
  Phase phase_ = Phase::kFresh;
};

}  // namespace dkpabe::twopc
