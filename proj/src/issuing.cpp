#include "dkpabe/issuing.hpp"

#include "dkpabe/digest.hpp"
#include "dkpabe/error.hpp"

namespace dkpabe::issuing {
namespace {

ByteView sid_view(const SessionId& s) { return {s.data(), s.size()}; }

void put(ByteWriter& w, const GroupDescriptor& g, const SourceElement& e) { w.blob(g.encode(e)); }
void put(ByteWriter& w, const GroupDescriptor& g, const Scalar& s) { w.blob(g.encode(s)); }

SourceElement get_source(ByteReader& r, const GroupDescriptor& g) { return g.decode_source(r.blob()); }
Scalar get_scalar(ByteReader& r, const GroupDescriptor& g) { return g.decode_scalar(r.blob()); }

void put_leaf_map(ByteWriter& w, const GroupDescriptor& g,
                  const std::map<AttributeId, SourceElement>& m) {
  w.u32(static_cast<std::uint32_t>(m.size()));
  for (const auto& [a, e] : m) {
    w.u32(a.authority);
    w.u32(a.attribute);
    put(w, g, e);
  }
}

std::map<AttributeId, SourceElement> get_leaf_map(ByteReader& r, const GroupDescriptor& g) {
  std::uint32_t n = r.u32();
  if (n > r.remaining()) fail(ErrorCode::kMalformedInput, "leaf map count");
  std::map<AttributeId, SourceElement> m;
  for (std::uint32_t i = 0; i < n; ++i) {
    AttributeId a{r.u32(), r.u32()};
    if (!m.emplace(a, get_source(r, g)).second) fail(ErrorCode::kMalformedInput, "duplicate leaf");
  }
  return m;
}

// Every decode failure surfaces as MalformedInput with the original reason.
template <typename F>
auto guarded(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformedInput) throw;
    fail(ErrorCode::kMalformedInput, std::string(what) + ": " + e.what());
  }
}

}  // namespace

Bytes encode(const GroupDescriptor& group, const IssuingRequest& m) {
  ByteWriter w;
  w.raw(sid_view(m.session));
  put(w, group, m.com);
  put(w, group, m.statement.psi1);
  put(w, group, m.statement.psi2);
  put(w, group, m.statement.psi3);
  put(w, group, m.statement.psi4);
  w.blob(zkp::encode_proof(group, m.pok));
  m.hom_key->write_to(w);
  twopc::write_ciphertext(w, m.blind_x.enc_u_rho);
  twopc::write_ciphertext(w, m.blind_x.enc_rho);
  twopc::write_ciphertext(w, m.blind_y.enc_u_rho);
  twopc::write_ciphertext(w, m.blind_y.enc_rho);
  return std::move(w).take();
}

IssuingRequest decode_request(const GroupDescriptor& group, ByteView bytes) {
  return guarded("issuing request", [&] {
    ByteReader r(bytes);
    IssuingRequest m;
    auto sid = r.raw(m.session.size());
    std::copy(sid.begin(), sid.end(), m.session.begin());
    m.com = get_source(r, group);
    m.statement.psi1 = get_source(r, group);
    m.statement.psi2 = get_source(r, group);
    m.statement.psi3 = get_source(r, group);
    m.statement.psi4 = get_source(r, group);
    m.statement.com = m.com;
    m.pok = zkp::decode_proof(group, r.blob());
    m.hom_key = twopc::HomPublicKey::read_from(r);
    m.blind_x.enc_u_rho = twopc::read_ciphertext(r);
    m.blind_x.enc_rho = twopc::read_ciphertext(r);
    m.blind_y.enc_u_rho = twopc::read_ciphertext(r);
    m.blind_y.enc_rho = twopc::read_ciphertext(r);
    r.expect_done();
    return m;
  });
}

Bytes encode(const GroupDescriptor&, const BlindSumReplies& m) {
  ByteWriter w;
  twopc::write_ciphertext(w, m.x.enc_masked);
  twopc::write_ciphertext(w, m.y.enc_masked);
  return std::move(w).take();
}

BlindSumReplies decode_replies(ByteView bytes) {
  return guarded("blind-sum replies", [&] {
    ByteReader r(bytes);
    BlindSumReplies m;
    m.x.enc_masked = twopc::read_ciphertext(r);
    m.y.enc_masked = twopc::read_ciphertext(r);
    r.expect_done();
    return m;
  });
}

Bytes encode(const GroupDescriptor& group, const IssuingCompletion& m) {
  ByteWriter w;
  put(w, group, m.z_x);
  put(w, group, m.z_y);
  put(w, group, m.P);
  put(w, group, m.Q);
  put(w, group, m.R);
  return std::move(w).take();
}

IssuingCompletion decode_completion(const GroupDescriptor& group, ByteView bytes) {
  return guarded("issuing completion", [&] {
    ByteReader r(bytes);
    IssuingCompletion m;
    m.z_x = get_scalar(r, group);
    m.z_y = get_scalar(r, group);
    m.P = get_source(r, group);
    m.Q = get_source(r, group);
    m.R = get_source(r, group);
    r.expect_done();
    return m;
  });
}

Bytes encode(const GroupDescriptor& group, const BlindedKeys& m) {
  ByteWriter w;
  w.blob(m.tree.encode());
  put(w, group, m.D);
  put(w, group, m.D1);
  put_leaf_map(w, group, m.Dj);
  w.blob(zkp::encode_proof(group, m.sigma2));
  return std::move(w).take();
}

BlindedKeys decode_blinded_keys(const GroupDescriptor& group, ByteView bytes) {
  return guarded("blinded keys", [&] {
    ByteReader r(bytes);
    BlindedKeys m;
    m.tree = AccessTree::decode(r.blob());
    m.D = get_source(r, group);
    m.D1 = get_source(r, group);
    m.Dj = get_leaf_map(r, group);
    m.sigma2 = zkp::decode_proof(group, r.blob());
    r.expect_done();
    return m;
  });
}

std::string commitment_fingerprint(const GroupDescriptor& group, const SourceElement& com) {
  auto d = sha256(group.encode(com));
  return to_hex({d.data(), d.size()});
}

Enrollment enroll(GroupContext& ctx, const Scalar& u, Rng& rng) {
  auto c = zkp::pedersen_commit(ctx, u, rng);
  return {c.com, c.blinder};
}

// ---- user -------------------------------------------------------------------

UserIssuingSession::UserIssuingSession(GroupContext& ctx, AuthorityPublicKey pk,
                                       std::string_view gid, Rng& rng, UserOptions options)
    : ctx_(ctx), pk_(std::move(pk)), rng_(rng), options_(std::move(options)) {
  u_ = derive_uid(ctx_.group(), gid);
  hom_ = options_.hom_key;
  if (!hom_) hom_ = twopc::paillier_generate(twopc::default_paillier_bits(ctx_.field()), rng_);
}

UserIssuingSession::~UserIssuingSession() { abort(); }

void UserIssuingSession::require(Phase p) const {
  if (phase_ != p) fail(ErrorCode::kPhaseViolation, "user issuing session out of order");
}

IssuingRequest UserIssuingSession::start() {
  require(Phase::kFresh);
  if (options_.enrollment) {
    com_ = options_.enrollment->com;
    blinder_ = options_.enrollment->blinder;
    if (!zkp::pedersen_decommit(ctx_, com_, u_, blinder_)) {
      fail(ErrorCode::kInvalidArgument, "enrollment does not open to this GID");
    }
  } else {
    auto e = enroll(ctx_, u_, rng_);
    com_ = e.com;
    blinder_ = e.blinder;
  }
  if (options_.rho_override) {
    rho1_ = options_.rho_override->first;
    rho2_ = options_.rho_override->second;
  } else {
    rho1_ = ctx_.group().random_nonzero_scalar(rng_);
    rho2_ = ctx_.group().random_nonzero_scalar(rng_);
  }
  rng_.fill(session_);

  zkp::UserPokWitness w{u_, rho1_, rho2_, blinder_};
  statement_ = zkp::make_user_statement(ctx_, w, com_);

  IssuingRequest m;
  m.session = session_;
  m.com = com_;
  m.statement = statement_;
  m.pok = zkp::pok_user_prove(ctx_, statement_, w, sid_view(session_), rng_);
  m.hom_key = hom_->public_key();
  sum_x_ = std::make_unique<twopc::UserBlindSum>(hom_, u_, rho1_);
  sum_y_ = std::make_unique<twopc::UserBlindSum>(hom_, u_, rho2_);
  m.blind_x = sum_x_->request(rng_);
  m.blind_y = sum_y_->request(rng_);
  w.u.wipe();
  w.rho1.wipe();
  w.rho2.wipe();
  w.blinder->wipe();
  phase_ = Phase::kStarted;
  return m;
}

IssuingCompletion UserIssuingSession::on_replies(const BlindSumReplies& replies) {
  require(Phase::kStarted);
  IssuingCompletion c;
  try {
    c.z_x = sum_x_->complete(replies.x);
    c.z_y = sum_y_->complete(replies.y);
  } catch (...) {
    abort();
    throw;
  }
  const auto& params = ctx_.params();
  P_ = ctx_.exp(params.g, (rho1_ * rho2_).inverse());
  Q_ = ctx_.exp(params.h, rho2_.inverse());
  R_ = ctx_.exp(params.h1, rho1_.inverse());
  c.P = P_;
  c.Q = Q_;
  c.R = R_;
  phase_ = Phase::kCompleted;
  return c;
}

UserKeyShare UserIssuingSession::finalize(const BlindedKeys& keys) {
  require(Phase::kCompleted);
  try {
    for (const auto& a : keys.tree.leaves()) {
      if (!pk_.owns(a)) fail(ErrorCode::kMalformedInput, "granted leaf " + to_string(a) + " is foreign");
    }
    auto leaves = keys.tree.attributes();
    if (keys.Dj.size() != leaves.size()) fail(ErrorCode::kMalformedInput, "leaf components do not match tree");
    for (const auto& a : leaves) {
      if (!keys.Dj.count(a)) fail(ErrorCode::kMalformedInput, "missing component for " + to_string(a));
    }

    zkp::AuthorityPokStatement st{P_, Q_, R_, keys.D, keys.D1, keys.Dj};
    if (!zkp::pok_authority_verify(ctx_, st, keys.sigma2, sid_view(session_))) {
      fail(ErrorCode::kSigma2Rejected, "blinded keys do not verify");
    }

    Scalar rho = rho1_ * rho2_;
    UserKeyShare share{pk_.id, keys.tree, ctx_.exp(keys.D, rho), ctx_.exp(keys.D1, rho), {}};
    for (const auto& [a, e] : keys.Dj) share.Dj.emplace(a, ctx_.exp(e, rho));
    rho.wipe();

    if (options_.sanity_check) {
      std::map<std::uint32_t, AttributeSet> attrs{{pk_.id, keys.tree.attributes()}};
      auto m = ctx_.exp(ctx_.params().egg, ctx_.group().random_nonzero_scalar(rng_));
      auto ct = encrypt(ctx_, {pk_}, attrs, m, rng_);
      bool ok = false;
      try {
        ok = decrypt(ctx_, {{pk_.id, share}}, ct) == m;
      } catch (const Error&) {
      }
      if (!ok) fail(ErrorCode::kUnblindSanityFailed, "trial decryption with the issued share failed");
    }
    abort();
    phase_ = Phase::kFinished;
    return share;
  } catch (...) {
    abort();
    throw;
  }
}

void UserIssuingSession::abort() {
  rho1_.wipe();
  rho2_.wipe();
  blinder_.wipe();
  if (sum_x_) sum_x_->wipe();
  if (sum_y_) sum_y_->wipe();
  sum_x_.reset();
  sum_y_.reset();
  hom_.reset();
  options_.rho_override.reset();
  if (options_.enrollment) options_.enrollment->blinder.wipe();
  phase_ = Phase::kAborted;
}

// ---- authority ----------------------------------------------------------------

AuthorityIssuingSession::AuthorityIssuingSession(GroupContext& ctx, const AuthorityKeyPair& keys,
                                                 Rng& protocol_rng, Rng& key_rng)
    : ctx_(ctx), keys_(keys), protocol_rng_(protocol_rng), key_rng_(key_rng) {}

AuthorityIssuingSession::~AuthorityIssuingSession() { abort(); }

void AuthorityIssuingSession::require(Phase p) const {
  if (phase_ != p) fail(ErrorCode::kPhaseViolation, "authority issuing session out of order");
}

void AuthorityIssuingSession::abort() {
  if (rnd_) {
    rnd_->r.wipe();
    for (auto& [a, q] : rnd_->shares) q.wipe();
  }
  rnd_.reset();
  tree_.reset();
  if (sum_x_) sum_x_->wipe();
  if (sum_y_) sum_y_->wipe();
  sum_x_.reset();
  sum_y_.reset();
  if (phase_ != Phase::kFinished) phase_ = Phase::kAborted;
}

void AuthorityIssuingSession::abort_with(ErrorCode code, const std::string& what) {
  abort();
  fail(code, what);
}

bool AuthorityIssuingSession::holds_secrets() const {
  return rnd_.has_value() || tree_.has_value() || sum_x_ || sum_y_;
}

BlindSumReplies AuthorityIssuingSession::on_request(const IssuingRequest& m1, const GrantLookup& lookup) {
  require(Phase::kFresh);
  try {
    session_ = m1.session;
    statement_ = m1.statement;
    statement_.com = m1.com;
    if (!m1.hom_key) abort_with(ErrorCode::kProtocolAbort, "missing homomorphic key");
    if (!zkp::pok_user_verify(ctx_, statement_, m1.pok, sid_view(session_))) {
      abort_with(ErrorCode::kPokRejected, "user proof of knowledge rejected");
    }
    auto tree = lookup ? lookup(m1.com) : std::nullopt;
    if (!tree) abort_with(ErrorCode::kProtocolAbort, "no grant for this commitment");
    for (const auto& a : tree->leaves()) {
      if (!keys_.pk.owns(a)) abort_with(ErrorCode::kForeignLeaf, "granted leaf " + to_string(a) + " is foreign");
    }
    tree_ = std::move(tree);
    rnd_ = draw_keygen_randomness(*tree_, ctx_.field(), key_rng_);

    sum_x_ = std::make_unique<twopc::AuthorityBlindSum>(m1.hom_key, rnd_->r);
    sum_y_ = std::make_unique<twopc::AuthorityBlindSum>(m1.hom_key, keys_.sk.beta);
    BlindSumReplies out{sum_x_->respond(m1.blind_x, protocol_rng_),
                        sum_y_->respond(m1.blind_y, protocol_rng_)};
    phase_ = Phase::kRequested;
    return out;
  } catch (...) {
    abort();
    throw;
  }
}

BlindedKeys AuthorityIssuingSession::on_completion(const IssuingCompletion& c1) {
  require(Phase::kRequested);
  try {
    Scalar x = sum_x_->finish(c1.z_x);
    Scalar y = sum_y_->finish(c1.z_y);
    view_ = View{statement_.psi1, statement_.psi2, statement_.psi3, statement_.psi4,
                 x, y, c1.P, c1.Q, c1.R};

    const auto& params = ctx_.params();
    const auto& sk = keys_.sk;
    if (!(ctx_.exp(params.g, x) == ctx_.mul(statement_.psi1, ctx_.exp(statement_.psi2, rnd_->r)))) {
      abort_with(ErrorCode::kConsistencyCheckFailed, "x");
    }
    if (!(ctx_.exp(params.g, y) == ctx_.mul(statement_.psi3, ctx_.exp(statement_.psi4, sk.beta)))) {
      abort_with(ErrorCode::kConsistencyCheckFailed, "y");
    }
    // Psi2, Psi4 carry rho1, rho2 in the exponent; Q and R must invert them.
    if (!c1.P.valid() || !c1.Q.has_second() || !c1.R.has_second() ||
        !(ctx_.pair(statement_.psi4, c1.Q) == ctx_.pair(params.g, params.h)) ||
        !(ctx_.pair(statement_.psi2, c1.R) == ctx_.pair(params.g, params.h1))) {
      abort_with(ErrorCode::kConsistencyCheckFailed, "blinded bases");
    }
    // x = 0 means r = -u and y = 0 means beta = -u; neither yields a key.
    if (x.is_zero() || y.is_zero()) abort_with(ErrorCode::kProtocolAbort, "degenerate blind sum");

    Scalar inv_x = x.inverse();
    Scalar inv_y = y.inverse();
    zkp::AuthorityPokWitness w{sk.alpha, sk.beta * inv_x, rnd_->r * inv_y, inv_x, {}};
    BlindedKeys out;
    out.tree = *tree_;
    out.D = ctx_.mul(ctx_.mul(ctx_.exp(c1.P, -sk.alpha), ctx_.exp(c1.Q, w.beta_over_x)),
                     ctx_.exp(c1.R, w.r_over_y));
    out.D1 = ctx_.exp(c1.Q, inv_x);
    for (const auto& [a, q] : rnd_->shares) {
      Scalar e = q * inv_y / sk.t.at(a.attribute - 1);
      out.Dj.emplace(a, ctx_.exp(c1.R, e));
      w.leaf_exponents.emplace(a, e);
    }
    zkp::AuthorityPokStatement st{c1.P, c1.Q, c1.R, out.D, out.D1, out.Dj};
    out.sigma2 = zkp::pok_authority_prove(ctx_, st, w, sid_view(session_), protocol_rng_);

    w.alpha.wipe();
    w.beta_over_x.wipe();
    w.r_over_y.wipe();
    w.inv_x.wipe();
    for (auto& [a, e] : w.leaf_exponents) e.wipe();
    x.wipe();
    y.wipe();
    inv_x.wipe();
    inv_y.wipe();
    phase_ = Phase::kFinished;
    abort();
    return out;
  } catch (...) {
    abort();
    throw;
  }
}

}  // namespace dkpabe::issuing
