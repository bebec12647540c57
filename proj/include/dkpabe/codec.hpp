#pragma once

// Versioned key-store container and the canonical payload encodings of every
// persisted object.
//
//   "DKPA" | u16 version | u8 backend | u8 role | u32 length | payload | SHA-256
//
// The checksum covers everything before it.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "dkpabe/bytes.hpp"
#include "dkpabe/groups.hpp"
#include "dkpabe/issuing.hpp"
#include "dkpabe/kpabe.hpp"

namespace dkpabe::codec {

inline constexpr std::array<std::uint8_t, 4> kMagic = {'D', 'K', 'P', 'A'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 4 + 2 + 1 + 1 + 4;
inline constexpr std::size_t kChecksumSize = 32;

enum class Role : std::uint8_t {
  kGlobalParams = 1,
  kAuthorityPublicKey = 2,
  kAuthoritySecretKey = 3,
  kUserShare = 4,
  kEnrollment = 5,
  kCiphertext = 6,
};

std::string_view to_string(Role role);

struct Header {
  std::uint16_t version = kVersion;
  Backend backend = Backend::kCurve;
  Role role = Role::kGlobalParams;
  std::uint32_t payload_length = 0;
};

struct Entry {
  Header header;
  Bytes payload;
};

Bytes wrap(Backend backend, Role role, ByteView payload);
// BadMagic, BadVersion, TruncatedInput, BadChecksum, MalformedInput (trailing bytes).
Entry unwrap(ByteView bytes);
// Same checks; BackendMismatch for the wrong backend, MalformedInput for the wrong role.
Bytes unwrap_expect(ByteView bytes, Backend backend, Role role);

// Parses only the fixed header; used by inspect.
Header read_header(ByteView bytes);

// ---- payloads ------------------------------------------------------------------

Bytes encode_params(const GlobalParams& params);
// Rebuilds the generators and checks they match the stored ones.
GlobalParams decode_params(ByteView payload);

void write_public_key(ByteWriter& w, const GroupDescriptor& g, const AuthorityPublicKey& pk);
AuthorityPublicKey read_public_key(ByteReader& r, const GroupDescriptor& g);

Bytes encode_public_key(const GroupDescriptor& g, const AuthorityPublicKey& pk);
AuthorityPublicKey decode_public_key(const GroupDescriptor& g, ByteView payload);
// Public key followed by (alpha, beta, t).
Bytes encode_key_pair(const GroupDescriptor& g, const AuthorityKeyPair& keys);
AuthorityKeyPair decode_key_pair(const GroupDescriptor& g, ByteView payload);
Bytes encode_share(const GroupDescriptor& g, const UserKeyShare& share);
UserKeyShare decode_share(const GroupDescriptor& g, ByteView payload);

struct StoredEnrollment {
  std::uint32_t authority = 0;
  issuing::Enrollment enrollment;
};
Bytes encode_enrollment(const GroupDescriptor& g, const StoredEnrollment& e);
StoredEnrollment decode_enrollment(const GroupDescriptor& g, ByteView payload);

void write_ciphertext(ByteWriter& w, const GroupDescriptor& g, const Ciphertext& ct);
Ciphertext read_ciphertext(ByteReader& r, const GroupDescriptor& g);

// Container helpers: encode payload and wrap in one step.
Bytes store(const GlobalParams& params);
Bytes store(const GroupDescriptor& g, const AuthorityPublicKey& pk);
Bytes store(const GroupDescriptor& g, const AuthorityKeyPair& keys);
Bytes store(const GroupDescriptor& g, const UserKeyShare& share);
Bytes store(const GroupDescriptor& g, const StoredEnrollment& e);

GlobalParams load_params(ByteView bytes);
AuthorityPublicKey load_public_key(const GroupDescriptor& g, ByteView bytes);
AuthorityKeyPair load_key_pair(const GroupDescriptor& g, ByteView bytes);
UserKeyShare load_share(const GroupDescriptor& g, ByteView bytes);
StoredEnrollment load_enrollment(const GroupDescriptor& g, ByteView bytes);

// Whole-file helpers; Io on failure. write_file goes through a temporary
// file in the same directory and renames it into place. Secret files are
// created owner-only.
Bytes read_file(const std::string& path);
void write_file(const std::string& path, ByteView bytes, bool secret = false);

}  // namespace dkpabe::codec
