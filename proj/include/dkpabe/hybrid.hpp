#pragma once

// KEM-DEM file encryption. A random target element K is encrypted under the
// attribute sets; the payload is sealed with AES-256-GCM under
// HKDF-SHA256(encode(K), label). The whole key-store header is the AAD.
//
//   container(role=ciphertext, payload = label | kpabe ciphertext | nonce | u64 length)
//   AES-GCM body (length bytes) | 16-byte tag

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dkpabe/codec.hpp"
#include "dkpabe/kpabe.hpp"

namespace dkpabe::hybrid {

inline constexpr std::string_view kLabel = "dkpabe/hybrid/aes-256-gcm/v1";

struct Header {
  std::string label;
  Ciphertext kem;
  std::array<std::uint8_t, 12> nonce{};
  std::uint64_t length = 0;
  Bytes raw;  // header bytes as stored, the AAD
};

// Reads and checks the header from the front of a stream.
Header read_header(const GroupDescriptor& group, std::istream& in);

void encrypt_stream(GroupContext& ctx, const std::vector<AuthorityPublicKey>& pks,
                    const std::map<std::uint32_t, AttributeSet>& attr_sets, std::istream& in,
                    std::uint64_t length, std::ostream& out, Rng& rng);
// Writes plaintext as it is decrypted; the caller must discard `out` unless
// this returns normally (AuthenticationFailed otherwise). Policy failures are
// raised before any byte is written.
void decrypt_stream(GroupContext& ctx, const std::map<std::uint32_t, UserKeyShare>& shares,
                    std::istream& in, std::ostream& out);

Bytes encrypt(GroupContext& ctx, const std::vector<AuthorityPublicKey>& pks,
              const std::map<std::uint32_t, AttributeSet>& attr_sets, ByteView payload, Rng& rng);
Bytes decrypt(GroupContext& ctx, const std::map<std::uint32_t, UserKeyShare>& shares, ByteView file);

// Decrypts into a temporary file next to out_path and renames it only after
// the tag verifies.
void encrypt_file(GroupContext& ctx, const std::vector<AuthorityPublicKey>& pks,
                  const std::map<std::uint32_t, AttributeSet>& attr_sets, const std::string& in_path,
                  const std::string& out_path, Rng& rng);
void decrypt_file(GroupContext& ctx, const std::map<std::uint32_t, UserKeyShare>& shares,
                  const std::string& in_path, const std::string& out_path);

}  // namespace dkpabe::hybrid
