#pragma once

// Blind key issuing between a user and one authority.
//
//   M1  user -> authority   session id, com, Psi1..Psi4, PoK, blind-sum requests
//   R1  authority -> user   blind-sum responses for x and y
//   C1  user -> authority   z_x, z_y, P, Q, R
//   M2  authority -> user   tree, blinded key components, Sigma2
//
// x = (r + u) rho1 and y = (beta + u) rho2; the authority checks
// g^x = Psi1 Psi2^r and g^y = Psi3 Psi4^beta before computing anything on
// P = g^{1/(rho1 rho2)}, Q = h^{1/rho2}, R = h1^{1/rho1}. The user unblinds
// by raising every component to rho1 rho2.

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "dkpabe/access.hpp"
#include "dkpabe/error.hpp"
#include "dkpabe/groups.hpp"
#include "dkpabe/kpabe.hpp"
#include "dkpabe/twopc.hpp"
#include "dkpabe/zkp.hpp"

namespace dkpabe::issuing {

using SessionId = std::array<std::uint8_t, 16>;

struct IssuingRequest {
  SessionId session{};
  SourceElement com;
  zkp::UserPokStatement statement;  // com is repeated inside as the fifth clause
  zkp::SigmaProof pok;
  std::shared_ptr<const twopc::HomPublicKey> hom_key;
  twopc::BlindSumRequest blind_x;
  twopc::BlindSumRequest blind_y;
};

struct BlindSumReplies {
  twopc::BlindSumResponse x;
  twopc::BlindSumResponse y;
};

struct IssuingCompletion {
  Scalar z_x;
  Scalar z_y;
  SourceElement P;
  SourceElement Q;
  SourceElement R;
};

struct BlindedKeys {
  AccessTree tree = AccessTree::leaf({1, 1});
  SourceElement D;
  SourceElement D1;
  std::map<AttributeId, SourceElement> Dj;
  zkp::SigmaProof sigma2;
};

Bytes encode(const GroupDescriptor& group, const IssuingRequest& m);
Bytes encode(const GroupDescriptor& group, const BlindSumReplies& m);
Bytes encode(const GroupDescriptor& group, const IssuingCompletion& m);
Bytes encode(const GroupDescriptor& group, const BlindedKeys& m);
// MalformedInput on anything that does not parse.
IssuingRequest decode_request(const GroupDescriptor& group, ByteView bytes);
BlindSumReplies decode_replies(ByteView bytes);
IssuingCompletion decode_completion(const GroupDescriptor& group, ByteView bytes);
BlindedKeys decode_blinded_keys(const GroupDescriptor& group, ByteView bytes);

// SHA-256 of the encoded commitment; the grant-table key.
std::string commitment_fingerprint(const GroupDescriptor& group, const SourceElement& com);

// Persistent Pedersen opening a user keeps per authority so the authority
// can find its grant row without linking across authorities.
struct Enrollment {
  SourceElement com;
  Scalar blinder;
};
Enrollment enroll(GroupContext& ctx, const Scalar& u, Rng& rng);

struct UserOptions {
  // Existing enrollment; a fresh commitment is made when absent.
  std::optional<Enrollment> enrollment;
  // Homomorphic key for the blind sums; a Paillier key of
  // twopc::default_paillier_bits() is generated per session when absent.
  std::shared_ptr<const twopc::HomSecretKey> hom_key;
  // Fixes (rho1, rho2); only for exhaustive view tests.
  std::optional<std::pair<Scalar, Scalar>> rho_override;
  // Trial-decrypts a fresh ciphertext after unblinding.
  bool sanity_check = true;
};

class UserIssuingSession {
 public:
  UserIssuingSession(GroupContext& ctx, AuthorityPublicKey pk, std::string_view gid, Rng& rng,
                     UserOptions options = {});
  ~UserIssuingSession();
  UserIssuingSession(const UserIssuingSession&) = delete;
  UserIssuingSession& operator=(const UserIssuingSession&) = delete;

  IssuingRequest start();
  IssuingCompletion on_replies(const BlindSumReplies& replies);
  // Sigma2Rejected, MalformedInput, UnblindSanityFailed.
  UserKeyShare finalize(const BlindedKeys& keys);
  // Drops every secret; the session is unusable afterwards.
  void abort();

  const Scalar& uid() const { return u_; }
  const SessionId& session_id() const { return session_; }
  const SourceElement& commitment() const { return com_; }

 private:
  enum class Phase { kFresh, kStarted, kCompleted, kFinished, kAborted };
  void require(Phase p) const;

  GroupContext& ctx_;
  AuthorityPublicKey pk_;
  Rng& rng_;
  UserOptions options_;
  Scalar u_;
  Scalar rho1_;
  Scalar rho2_;
  Scalar blinder_;
  SourceElement com_;
  SessionId session_{};
  zkp::UserPokStatement statement_;
  std::shared_ptr<const twopc::HomSecretKey> hom_;
  std::unique_ptr<twopc::UserBlindSum> sum_x_;
  std::unique_ptr<twopc::UserBlindSum> sum_y_;
  SourceElement P_, Q_, R_;
  Phase phase_ = Phase::kFresh;
};

// Finds the tree granted to a commitment, or nullopt.
using GrantLookup = std::function<std::optional<AccessTree>(const SourceElement& com)>;

class AuthorityIssuingSession {
 public:
  // protocol_rng drives masks and proof nonces; key_rng supplies r and the
  // sharing polynomials in the same order keygen draws them.
  AuthorityIssuingSession(GroupContext& ctx, const AuthorityKeyPair& keys, Rng& protocol_rng,
                          Rng& key_rng);
  ~AuthorityIssuingSession();
  AuthorityIssuingSession(const AuthorityIssuingSession&) = delete;
  AuthorityIssuingSession& operator=(const AuthorityIssuingSession&) = delete;

  // PokRejected, ProtocolAbort (no grant, bad key), ForeignLeaf.
  BlindSumReplies on_request(const IssuingRequest& m1, const GrantLookup& lookup);
  // ConsistencyCheckFailed, ProtocolAbort.
  BlindedKeys on_completion(const IssuingCompletion& c1);
  void abort();

  const SessionId& session_id() const { return session_; }
  // Values the authority has seen, for view tests.
  struct View {
    SourceElement psi1, psi2, psi3, psi4;
    Scalar x, y;
    SourceElement P, Q, R;
  };
  const std::optional<View>& view() const { return view_; }
  bool holds_secrets() const;

 private:
  enum class Phase { kFresh, kRequested, kFinished, kAborted };
  void require(Phase p) const;
  [[noreturn]] void abort_with(ErrorCode code, const std::string& what);

  GroupContext& ctx_;
  const AuthorityKeyPair& keys_;
  Rng& protocol_rng_;
  Rng& key_rng_;
  SessionId session_{};
  zkp::UserPokStatement statement_;
  std::optional<AccessTree> tree_;
  std::optional<KeygenRandomness> rnd_;
  std::unique_ptr<twopc::AuthorityBlindSum> sum_x_;
  std::unique_ptr<twopc::AuthorityBlindSum> sum_y_;
  std::optional<View> view_;
  Phase phase_ = Phase::kFresh;
};

}  // namespace dkpabe::issuing
