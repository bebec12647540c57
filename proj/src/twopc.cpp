#include "dkpabe/twopc.hpp"

#include <algorithm>

#include "dkpabe/error.hpp"

namespace dkpabe::twopc {

namespace {

constexpr unsigned kMaxModulusBits = 8192;
constexpr unsigned kMaskSlackBits = 128;

Bytes mpz_to_bytes(const mpz_class& v) {
  std::size_t size = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  Bytes out(size);
  std::size_t written = 0;
  if (v != 0) mpz_export(out.data(), &written, 1, 1, 0, 0, v.get_mpz_t());
  out.resize(written);
  return out;
}

mpz_class mpz_from_bytes(ByteView b) {
  mpz_class v;
  if (!b.empty()) mpz_import(v.get_mpz_t(), b.size(), 1, 1, 0, 0, b.data());
  return v;
}

mpz_class random_below(const mpz_class& bound, Rng& rng) {
  std::size_t bytes = (mpz_sizeinbase(bound.get_mpz_t(), 2) + 7) / 8 + 16;
  mpz_class v = mpz_from_bytes(rng.bytes(bytes));
  return v % bound;
}

mpz_class random_prime(unsigned bits, Rng& rng) {
  for (;;) {
    mpz_class c = mpz_from_bytes(rng.bytes((bits + 7) / 8));
    mpz_class top = mpz_class(1) << (bits - 1);
    c %= top;
    c |= top;
    c |= (mpz_class(1) << (bits - 2));  // keeps p*q at full size
    c |= 1;
    mpz_class p;
    mpz_nextprime(p.get_mpz_t(), c.get_mpz_t());
    if (mpz_sizeinbase(p.get_mpz_t(), 2) == bits) return p;
  }
}

class PaillierPublicKey final : public HomPublicKey {
 public:
  explicit PaillierPublicKey(mpz_class n) : n_(std::move(n)), n2_(n_ * n_) {}

  HomKind kind() const override { return HomKind::kPaillier; }
  mpz_class plaintext_bound() const override { return n_; }
  const mpz_class& n() const { return n_; }
  const mpz_class& n2() const { return n2_; }

  HomCiphertext encrypt(const mpz_class& m, Rng& rng) const override {
    if (m < 0 || m >= n_) fail(ErrorCode::kInvalidArgument, "plaintext out of range");
    mpz_class r, g;
    do {
      r = random_below(n_, rng);
      mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), n_.get_mpz_t());
    } while (r == 0 || g != 1);
    mpz_class rn;
    mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), n_.get_mpz_t(), n2_.get_mpz_t());
    mpz_class c = ((1 + m * n_) % n2_) * rn % n2_;
    r = 0;
    return {c};
  }

  HomCiphertext add(const HomCiphertext& a, const HomCiphertext& b) const override {
    return {a.value * b.value % n2_};
  }

  HomCiphertext mul_const(const HomCiphertext& a, const mpz_class& k) const override {
    if (k < 0) fail(ErrorCode::kInvalidArgument, "negative multiplier");
    mpz_class out;
    mpz_powm(out.get_mpz_t(), a.value.get_mpz_t(), k.get_mpz_t(), n2_.get_mpz_t());
    return {out};
  }

  bool valid(const HomCiphertext& c) const override {
    if (c.value <= 0 || c.value >= n2_) return false;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), c.value.get_mpz_t(), n_.get_mpz_t());
    return g == 1;
  }

 protected:
  void write_body(ByteWriter& w) const override { w.blob(mpz_to_bytes(n_)); }

 private:
  mpz_class n_;
  mpz_class n2_;
};

class PaillierSecretKey final : public HomSecretKey {
 public:
  PaillierSecretKey(const mpz_class& p, const mpz_class& q)
      : pk_(std::make_shared<PaillierPublicKey>(p * q)) {
    mpz_class pm = p - 1, qm = q - 1;
    mpz_lcm(lambda_.get_mpz_t(), pm.get_mpz_t(), qm.get_mpz_t());
    if (mpz_invert(mu_.get_mpz_t(), lambda_.get_mpz_t(), pk_->n().get_mpz_t()) == 0) {
      fail(ErrorCode::kInvalidArgument, "degenerate Paillier key");
    }
  }
  ~PaillierSecretKey() override {
    lambda_ = 0;
    mu_ = 0;
  }

  std::shared_ptr<const HomPublicKey> public_key() const override { return pk_; }

  mpz_class decrypt(const HomCiphertext& c) const override {
    if (!pk_->valid(c)) fail(ErrorCode::kProtocolAbort, "invalid ciphertext");
    mpz_class u;
    mpz_powm(u.get_mpz_t(), c.value.get_mpz_t(), lambda_.get_mpz_t(), pk_->n2().get_mpz_t());
    mpz_class l = (u - 1) / pk_->n();
    return l * mu_ % pk_->n();
  }

 private:
  std::shared_ptr<const PaillierPublicKey> pk_;
  mpz_class lambda_;
  mpz_class mu_;
};

class TrustedTestPublicKey final : public HomPublicKey {
 public:
  HomKind kind() const override { return HomKind::kTrustedTest; }
  mpz_class plaintext_bound() const override { return mpz_class(1) << 1024; }
  HomCiphertext encrypt(const mpz_class& m, Rng&) const override {
    if (m < 0 || m >= plaintext_bound()) fail(ErrorCode::kInvalidArgument, "plaintext out of range");
    return {m};
  }
  HomCiphertext add(const HomCiphertext& a, const HomCiphertext& b) const override {
    return {a.value + b.value};
  }
  HomCiphertext mul_const(const HomCiphertext& a, const mpz_class& k) const override {
    return {a.value * k};
  }
  bool valid(const HomCiphertext& c) const override {
    return c.value >= 0 && c.value < plaintext_bound();
  }

 protected:
  void write_body(ByteWriter&) const override {}
};

class TrustedTestSecretKey final : public HomSecretKey {
 public:
  std::shared_ptr<const HomPublicKey> public_key() const override { return pk_; }
  mpz_class decrypt(const HomCiphertext& c) const override {
    if (!pk_->valid(c)) fail(ErrorCode::kProtocolAbort, "invalid ciphertext");
    return c.value;
  }

 private:
  std::shared_ptr<const HomPublicKey> pk_ = std::make_shared<TrustedTestPublicKey>();
};

const mpz_class& modulus_of(const Scalar& s) { return s.field()->modulus(); }

}  // namespace

void HomPublicKey::write_to(ByteWriter& w) const {
  w.u8(static_cast<std::uint8_t>(kind()));
  write_body(w);
}

std::shared_ptr<const HomPublicKey> HomPublicKey::read_from(ByteReader& r) {
  try {
    auto kind = static_cast<HomKind>(r.u8());
    switch (kind) {
      case HomKind::kPaillier: {
        auto nb = r.blob();
        if (nb.size() * 8 > kMaxModulusBits) fail(ErrorCode::kProtocolAbort, "modulus too large");
        mpz_class n = mpz_from_bytes(nb);
        if (n < 3 || mpz_even_p(n.get_mpz_t())) fail(ErrorCode::kProtocolAbort, "bad modulus");
        return std::make_shared<PaillierPublicKey>(n);
      }
      case HomKind::kTrustedTest:
        return std::make_shared<TrustedTestPublicKey>();
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kProtocolAbort) throw;
    fail(ErrorCode::kProtocolAbort, e.what());
  }
  fail(ErrorCode::kProtocolAbort, "unknown homomorphic backend");
}

std::shared_ptr<const HomSecretKey> paillier_generate(unsigned bits, Rng& rng) {
  if (bits < 64 || bits % 2 != 0 || bits > kMaxModulusBits) {
    fail(ErrorCode::kInvalidArgument, "unsupported Paillier modulus size");
  }
  for (;;) {
    mpz_class p = random_prime(bits / 2, rng);
    mpz_class q = random_prime(bits / 2, rng);
    if (p == q) continue;
    mpz_class n = p * q;
    if (mpz_sizeinbase(n.get_mpz_t(), 2) != bits) continue;
    return std::make_shared<PaillierSecretKey>(p, q);
  }
}

std::shared_ptr<const HomSecretKey> trusted_test_backend() {
  return std::make_shared<TrustedTestSecretKey>();
}

mpz_class AuthorityBlindSum::mask_bound(const mpz_class& p) {
  return (mpz_class(1) << kMaskSlackBits) * p * p;
}

mpz_class required_plaintext_bound(const mpz_class& p) {
  // u rho + rho v + t < p + p^2 + 2^128 p^2.
  return p + p * p + AuthorityBlindSum::mask_bound(p);
}

unsigned default_paillier_bits(const FieldRef& field) {
  auto need = static_cast<unsigned>(mpz_sizeinbase(required_plaintext_bound(field->modulus()).get_mpz_t(), 2));
  unsigned bits = std::max(2048u, need + 2);
  return bits + (bits % 2);
}

void write_ciphertext(ByteWriter& w, const HomCiphertext& c) { w.blob(mpz_to_bytes(c.value)); }

HomCiphertext read_ciphertext(ByteReader& r) {
  auto b = r.blob();
  if (b.size() * 8 > 2 * kMaxModulusBits) fail(ErrorCode::kProtocolAbort, "ciphertext too large");
  return {mpz_from_bytes(b)};
}

// ---- user side -------------------------------------------------------------

UserBlindSum::UserBlindSum(std::shared_ptr<const HomSecretKey> sk, const Scalar& u, const Scalar& rho)
    : sk_(std::move(sk)), u_(u), rho_(rho) {
  if (rho_.is_zero()) fail(ErrorCode::kInvalidArgument, "rho must be nonzero");
  if (sk_->public_key()->plaintext_bound() <= required_plaintext_bound(modulus_of(rho_))) {
    fail(ErrorCode::kInvalidArgument, "homomorphic key too small for field");
  }
}

BlindSumRequest UserBlindSum::request(Rng& rng) {
  if (phase_ != Phase::kFresh) fail(ErrorCode::kPhaseViolation, "request already sent");
  const auto& pk = *sk_->public_key();
  BlindSumRequest req{pk.encrypt((u_ * rho_).value(), rng), pk.encrypt(rho_.value(), rng)};
  phase_ = Phase::kRequested;
  return req;
}

Scalar UserBlindSum::complete(const BlindSumResponse& response) {
  if (phase_ != Phase::kRequested) fail(ErrorCode::kPhaseViolation, "no outstanding request");
  phase_ = Phase::kDone;
  if (!sk_->public_key()->valid(response.enc_masked)) {
    wipe();
    fail(ErrorCode::kProtocolAbort, "invalid blind-sum response");
  }
  mpz_class w = sk_->decrypt(response.enc_masked);
  Scalar z(rho_.field(), w % modulus_of(rho_));
  w = 0;
  wipe();
  return z;
}

void UserBlindSum::wipe() {
  u_.wipe();
  rho_.wipe();
}

// ---- authority side --------------------------------------------------------

AuthorityBlindSum::AuthorityBlindSum(std::shared_ptr<const HomPublicKey> pk, const Scalar& v)
    : pk_(std::move(pk)), v_(v) {
  if (!pk_ || pk_->plaintext_bound() <= required_plaintext_bound(modulus_of(v_))) {
    fail(ErrorCode::kProtocolAbort, "user's homomorphic key is too small");
  }
}

BlindSumResponse AuthorityBlindSum::respond(const BlindSumRequest& request, Rng& rng) {
  return respond_with_mask(request, random_below(mask_bound(modulus_of(v_)), rng), rng);
}

BlindSumResponse AuthorityBlindSum::respond_with_mask(const BlindSumRequest& request,
                                                      const mpz_class& t, Rng& rng) {
  if (phase_ != Phase::kFresh) fail(ErrorCode::kPhaseViolation, "already responded");
  if (t < 0 || t >= mask_bound(modulus_of(v_))) fail(ErrorCode::kInvalidArgument, "mask out of range");
  if (!pk_->valid(request.enc_u_rho) || !pk_->valid(request.enc_rho)) {
    fail(ErrorCode::kProtocolAbort, "invalid blind-sum request");
  }
  t_ = t;
  auto masked = pk_->add(pk_->add(request.enc_u_rho, pk_->mul_const(request.enc_rho, v_.value())),
                         pk_->encrypt(t_, rng));
  phase_ = Phase::kResponded;
  return {masked};
}

Scalar AuthorityBlindSum::finish(const Scalar& z) {
  if (phase_ != Phase::kResponded) fail(ErrorCode::kPhaseViolation, "finish before respond");
  if (!z.bound() || z.field()->modulus() != modulus_of(v_)) {
    fail(ErrorCode::kProtocolAbort, "reply from wrong field");
  }
  Scalar x = z - Scalar(v_.field(), t_ % modulus_of(v_));
  phase_ = Phase::kDone;
  wipe();
  return x;
}

void AuthorityBlindSum::wipe() {
  v_.wipe();
  t_ = 0;
}

}  // namespace dkpabe::twopc
