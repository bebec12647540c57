#include "dkpabe/hybrid.hpp"

#include <openssl/evp.h>
#include <openssl/kdf.h>

#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include "dkpabe/error.hpp"

namespace dkpabe::hybrid {
namespace {

constexpr std::size_t kChunk = 64 * 1024;
constexpr std::size_t kTagSize = 16;
constexpr std::uint32_t kMaxHeaderPayload = 16u << 20;

struct CipherCtx {
  EVP_CIPHER_CTX* p = EVP_CIPHER_CTX_new();
  ~CipherCtx() { EVP_CIPHER_CTX_free(p); }
};

std::array<std::uint8_t, 32> derive_key(const GroupDescriptor& g, const TargetElement& k, std::string_view label) {
  Bytes ikm = g.encode(k);
  std::array<std::uint8_t, 32> key{};
  std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)> pctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr),
                                                                   EVP_PKEY_CTX_free);
  std::size_t len = key.size();
  if (!pctx || EVP_PKEY_derive_init(pctx.get()) <= 0 ||
      EVP_PKEY_CTX_set_hkdf_md(pctx.get(), EVP_sha256()) <= 0 ||
      EVP_PKEY_CTX_set1_hkdf_key(pctx.get(), ikm.data(), static_cast<int>(ikm.size())) <= 0 ||
      EVP_PKEY_CTX_add1_hkdf_info(pctx.get(), reinterpret_cast<const unsigned char*>(label.data()),
                                  static_cast<int>(label.size())) <= 0 ||
      EVP_PKEY_derive(pctx.get(), key.data(), &len) <= 0) {
    fail(ErrorCode::kInvalidArgument, "HKDF failed");
  }
  OPENSSL_cleanse(ikm.data(), ikm.size());
  return key;
}

void read_exact(std::istream& in, std::uint8_t* out, std::size_t n, const char* what) {
  in.read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) fail(ErrorCode::kTruncatedInput, what);
}

void write_all(std::ostream& out, const std::uint8_t* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!out) fail(ErrorCode::kIo, "write failed");
}

}  // namespace

Header read_header(const GroupDescriptor& group, std::istream& in) {
  Bytes raw(codec::kHeaderSize);
  read_exact(in, raw.data(), raw.size(), "ciphertext header");
  auto h = codec::read_header(raw);
  if (h.payload_length > kMaxHeaderPayload) fail(ErrorCode::kMalformedInput, "header too large");
  raw.resize(codec::kHeaderSize + h.payload_length + codec::kChecksumSize);
  read_exact(in, raw.data() + codec::kHeaderSize, raw.size() - codec::kHeaderSize, "ciphertext header");
  Bytes payload = codec::unwrap_expect(raw, group.backend(), codec::Role::kCiphertext);

  Header out;
  ByteReader r(payload);
  out.label = r.str();
  if (out.label != kLabel) fail(ErrorCode::kMalformedInput, "unknown key-derivation label");
  {
    ByteReader kr(r.blob());
    out.kem = codec::read_ciphertext(kr, group);
    kr.expect_done();
  }
  auto nonce = r.raw(out.nonce.size());
  std::copy(nonce.begin(), nonce.end(), out.nonce.begin());
  out.length = r.u64();
  r.expect_done();
  out.raw = std::move(raw);
  return out;
}

void encrypt_stream(GroupContext& ctx, const std::vector<AuthorityPublicKey>& pks,
                    const std::map<std::uint32_t, AttributeSet>& attr_sets, std::istream& in,
                    std::uint64_t length, std::ostream& out, Rng& rng) {
  const auto& g = ctx.group();
  TargetElement k = ctx.exp(ctx.params().egg, g.random_nonzero_scalar(rng));
  Ciphertext kem = encrypt(ctx, pks, attr_sets, k, rng);

  std::array<std::uint8_t, 12> nonce{};
  rng.fill(nonce);
  ByteWriter kw;
  codec::write_ciphertext(kw, g, kem);
  ByteWriter hw;
  hw.str(kLabel);
  hw.blob(kw.bytes());
  hw.raw(nonce);
  hw.u64(length);
  Bytes header = codec::wrap(g.backend(), codec::Role::kCiphertext, hw.bytes());
  write_all(out, header.data(), header.size());

  auto key = derive_key(g, k, kLabel);
  CipherCtx c;
  int n = 0;
  if (!c.p || EVP_EncryptInit_ex(c.p, EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(c.p, EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()), nullptr) != 1 ||
      EVP_EncryptInit_ex(c.p, nullptr, nullptr, key.data(), nonce.data()) != 1 ||
      EVP_EncryptUpdate(c.p, nullptr, &n, header.data(), static_cast<int>(header.size())) != 1) {
    fail(ErrorCode::kInvalidArgument, "cipher setup failed");
  }
  OPENSSL_cleanse(key.data(), key.size());

  Bytes buf(kChunk), enc(kChunk + 16);
  std::uint64_t left = length;
  while (left > 0) {
    std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(left, kChunk));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(want));
    if (static_cast<std::size_t>(in.gcount()) != want) fail(ErrorCode::kIo, "input shorter than announced");
    if (EVP_EncryptUpdate(c.p, enc.data(), &n, buf.data(), static_cast<int>(want)) != 1) {
      fail(ErrorCode::kInvalidArgument, "encryption failed");
    }
    write_all(out, enc.data(), static_cast<std::size_t>(n));
    left -= want;
  }
  std::array<std::uint8_t, kTagSize> tag{};
  if (EVP_EncryptFinal_ex(c.p, enc.data(), &n) != 1 ||
      EVP_CIPHER_CTX_ctrl(c.p, EVP_CTRL_GCM_GET_TAG, static_cast<int>(tag.size()), tag.data()) != 1) {
    fail(ErrorCode::kInvalidArgument, "encryption failed");
  }
  write_all(out, enc.data(), static_cast<std::size_t>(n));
  write_all(out, tag.data(), tag.size());
}

void decrypt_stream(GroupContext& ctx, const std::map<std::uint32_t, UserKeyShare>& shares,
                    std::istream& in, std::ostream& out) {
  const auto& g = ctx.group();
  Header h = read_header(g, in);
  TargetElement k = decrypt(ctx, shares, h.kem);
  auto key = derive_key(g, k, h.label);

  CipherCtx c;
  int n = 0;
  if (!c.p || EVP_DecryptInit_ex(c.p, EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(c.p, EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(h.nonce.size()), nullptr) != 1 ||
      EVP_DecryptInit_ex(c.p, nullptr, nullptr, key.data(), h.nonce.data()) != 1 ||
      EVP_DecryptUpdate(c.p, nullptr, &n, h.raw.data(), static_cast<int>(h.raw.size())) != 1) {
    fail(ErrorCode::kInvalidArgument, "cipher setup failed");
  }
  OPENSSL_cleanse(key.data(), key.size());

  Bytes buf(kChunk), dec(kChunk + 16);
  std::uint64_t left = h.length;
  while (left > 0) {
    std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(left, kChunk));
    read_exact(in, buf.data(), want, "ciphertext body");
    if (EVP_DecryptUpdate(c.p, dec.data(), &n, buf.data(), static_cast<int>(want)) != 1) {
      fail(ErrorCode::kAuthenticationFailed, "decryption failed");
    }
    write_all(out, dec.data(), static_cast<std::size_t>(n));
    left -= want;
  }
  std::array<std::uint8_t, kTagSize> tag{};
  read_exact(in, tag.data(), tag.size(), "authentication tag");
  if (in.peek() != std::char_traits<char>::eof()) fail(ErrorCode::kAuthenticationFailed, "trailing bytes");
  if (EVP_CIPHER_CTX_ctrl(c.p, EVP_CTRL_GCM_SET_TAG, static_cast<int>(tag.size()), tag.data()) != 1 ||
      EVP_DecryptFinal_ex(c.p, dec.data(), &n) != 1) {
    fail(ErrorCode::kAuthenticationFailed, "authentication tag mismatch");
  }
  write_all(out, dec.data(), static_cast<std::size_t>(n));
}

Bytes encrypt(GroupContext& ctx, const std::vector<AuthorityPublicKey>& pks,
              const std::map<std::uint32_t, AttributeSet>& attr_sets, ByteView payload, Rng& rng) {
  std::istringstream in(std::string(payload.begin(), payload.end()));
  std::ostringstream out;
  encrypt_stream(ctx, pks, attr_sets, in, payload.size(), out, rng);
  auto s = std::move(out).str();
  return Bytes(s.begin(), s.end());
}

Bytes decrypt(GroupContext& ctx, const std::map<std::uint32_t, UserKeyShare>& shares, ByteView file) {
  std::istringstream in(std::string(file.begin(), file.end()));
  std::ostringstream out;
  decrypt_stream(ctx, shares, in, out);
  auto s = std::move(out).str();
  return Bytes(s.begin(), s.end());
}

void encrypt_file(GroupContext& ctx, const std::vector<AuthorityPublicKey>& pks,
                  const std::map<std::uint32_t, AttributeSet>& attr_sets, const std::string& in_path,
                  const std::string& out_path, Rng& rng) {
  namespace fs = std::filesystem;
  std::error_code ec;
  auto size = fs::file_size(in_path, ec);
  if (ec) fail(ErrorCode::kIo, "cannot stat " + in_path);
  std::ifstream in(in_path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + in_path);
  fs::path tmp = out_path + ".partial";
  try {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot create " + tmp.string());
    encrypt_stream(ctx, pks, attr_sets, in, size, out, rng);
    out.close();
    if (!out) fail(ErrorCode::kIo, "write failed: " + tmp.string());
    fs::rename(tmp, out_path, ec);
    if (ec) fail(ErrorCode::kIo, "cannot rename into " + out_path);
  } catch (...) {
    fs::remove(tmp, ec);
    throw;
  }
}

void decrypt_file(GroupContext& ctx, const std::map<std::uint32_t, UserKeyShare>& shares,
                  const std::string& in_path, const std::string& out_path) {
  namespace fs = std::filesystem;
  std::ifstream in(in_path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + in_path);
  fs::path tmp = out_path + ".partial";
  std::error_code ec;
  try {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot create " + tmp.string());
    fs::permissions(tmp, fs::perms::owner_read | fs::perms::owner_write, ec);
    decrypt_stream(ctx, shares, in, out);
    out.close();
    if (!out) fail(ErrorCode::kIo, "write failed: " + tmp.string());
    fs::rename(tmp, out_path, ec);
    if (ec) fail(ErrorCode::kIo, "cannot rename into " + out_path);
  } catch (...) {
    fs::remove(tmp, ec);
    throw;
  }
}

}  // namespace dkpabe::hybrid
