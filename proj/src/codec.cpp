#include "dkpabe/codec.hpp"

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "dkpabe/digest.hpp"
#include "dkpabe/error.hpp"

namespace dkpabe::codec {
namespace {

void put(ByteWriter& w, const GroupDescriptor& g, const SourceElement& e) { w.blob(g.encode(e)); }
void put(ByteWriter& w, const GroupDescriptor& g, const TargetElement& e) { w.blob(g.encode(e)); }
void put(ByteWriter& w, const GroupDescriptor& g, const Scalar& s) { w.blob(g.encode(s)); }
SourceElement get_source(ByteReader& r, const GroupDescriptor& g) { return g.decode_source(r.blob()); }
TargetElement get_target(ByteReader& r, const GroupDescriptor& g) { return g.decode_target(r.blob()); }
Scalar get_scalar(ByteReader& r, const GroupDescriptor& g) { return g.decode_scalar(r.blob()); }

// Keys start with the group they live in so a transparent key for one prime
// is not silently reinterpreted under another.
void put_group(ByteWriter& w, const GroupDescriptor& g) { g.write_to(w); }
void expect_group(ByteReader& r, const GroupDescriptor& g) {
  if (!(GroupDescriptor::read_from(r) == g)) fail(ErrorCode::kBackendMismatch, "object belongs to another group");
}

std::uint32_t bounded_count(ByteReader& r, std::size_t min_item_size) {
  std::uint32_t n = r.u32();
  if (static_cast<std::uint64_t>(n) * min_item_size > r.remaining()) fail(ErrorCode::kTruncatedInput, "count exceeds input");
  return n;
}

void write_source_map(ByteWriter& w, const GroupDescriptor& g, const std::map<AttributeId, SourceElement>& m) {
  w.u32(static_cast<std::uint32_t>(m.size()));
  for (const auto& [a, e] : m) {
    w.u32(a.authority);
    w.u32(a.attribute);
    put(w, g, e);
  }
}

std::map<AttributeId, SourceElement> read_source_map(ByteReader& r, const GroupDescriptor& g) {
  std::map<AttributeId, SourceElement> m;
  for (std::uint32_t i = 0, n = bounded_count(r, 12); i < n; ++i) {
    AttributeId a{r.u32(), r.u32()};
    if (!m.emplace(a, get_source(r, g)).second) fail(ErrorCode::kMalformedInput, "duplicate attribute");
  }
  return m;
}

template <typename F>
auto parse(ByteView payload, F&& f) {
  ByteReader r(payload);
  auto out = f(r);
  r.expect_done();
  return out;
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kGlobalParams: return "global-params";
    case Role::kAuthorityPublicKey: return "authority-pk";
    case Role::kAuthoritySecretKey: return "authority-sk";
    case Role::kUserShare: return "user-share";
    case Role::kEnrollment: return "enrollment";
    case Role::kCiphertext: return "ciphertext";
  }
  return "unknown";
}

Bytes wrap(Backend backend, Role role, ByteView payload) {
  ByteWriter w;
  w.raw(kMagic);
  w.u16(kVersion);
  w.u8(static_cast<std::uint8_t>(backend));
  w.u8(static_cast<std::uint8_t>(role));
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.raw(payload);
  auto sum = sha256(w.bytes());
  w.raw(sum);
  return std::move(w).take();
}

Header read_header(ByteView bytes) {
  if (bytes.size() < kMagic.size()) fail(ErrorCode::kTruncatedInput, "shorter than the magic");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) fail(ErrorCode::kBadMagic, "not a key-store file");
  if (bytes.size() < kHeaderSize) fail(ErrorCode::kTruncatedInput, "header");
  ByteReader r(bytes.subspan(kMagic.size()));
  Header h;
  h.version = r.u16();
  if (h.version != kVersion) fail(ErrorCode::kBadVersion, "format version " + std::to_string(h.version));
  auto backend = r.u8();
  if (backend != static_cast<std::uint8_t>(Backend::kCurve) &&
      backend != static_cast<std::uint8_t>(Backend::kTransparent)) {
    fail(ErrorCode::kMalformedInput, "unknown backend tag");
  }
  h.backend = static_cast<Backend>(backend);
  auto role = r.u8();
  if (role < 1 || role > static_cast<std::uint8_t>(Role::kCiphertext)) fail(ErrorCode::kMalformedInput, "unknown role");
  h.role = static_cast<Role>(role);
  h.payload_length = r.u32();
  return h;
}

Entry unwrap(ByteView bytes) {
  Header h = read_header(bytes);
  std::size_t total = kHeaderSize + static_cast<std::size_t>(h.payload_length) + kChecksumSize;
  if (bytes.size() < total) fail(ErrorCode::kTruncatedInput, "payload or checksum");
  if (bytes.size() > total) fail(ErrorCode::kMalformedInput, "trailing bytes");
  auto sum = sha256(bytes.first(total - kChecksumSize));
  if (!std::equal(sum.begin(), sum.end(), bytes.begin() + static_cast<std::ptrdiff_t>(total - kChecksumSize))) {
    fail(ErrorCode::kBadChecksum, "checksum mismatch");
  }
  auto payload = bytes.subspan(kHeaderSize, h.payload_length);
  return {h, Bytes(payload.begin(), payload.end())};
}

Bytes unwrap_expect(ByteView bytes, Backend backend, Role role) {
  auto e = unwrap(bytes);
  if (e.header.backend != backend) {
    fail(ErrorCode::kBackendMismatch, std::string("file is for the ") + std::string(dkpabe::to_string(e.header.backend)) +
                                          " backend");
  }
  if (e.header.role != role) {
    fail(ErrorCode::kMalformedInput, "expected " + std::string(to_string(role)) + ", found " +
                                         std::string(to_string(e.header.role)));
  }
  return std::move(e.payload);
}

// ---- payloads ------------------------------------------------------------------

Bytes encode_params(const GlobalParams& params) {
  ByteWriter w;
  const auto& g = params.group;
  put_group(w, g);
  put(w, g, params.g);
  put(w, g, params.h);
  put(w, g, params.h1);
  return std::move(w).take();
}

GlobalParams decode_params(ByteView payload) {
  return parse(payload, [](ByteReader& r) {
    auto group = GroupDescriptor::read_from(r);
    auto params = derive_global_params(group);
    auto g = get_source(r, group), h = get_source(r, group), h1 = get_source(r, group);
    if (!(g == params.g && h == params.h && h1 == params.h1)) {
      fail(ErrorCode::kMalformedInput, "stored generators do not match the derivation");
    }
    return params;
  });
}

void write_public_key(ByteWriter& w, const GroupDescriptor& g, const AuthorityPublicKey& pk) {
  put_group(w, g);
  w.u32(pk.id);
  w.str(pk.name);
  w.u32(pk.attribute_count());
  for (std::uint32_t j = 0; j < pk.attribute_count(); ++j) {
    w.str(pk.attribute_names.at(j));
    put(w, g, pk.T[j]);
  }
  put(w, g, pk.Y);
  put(w, g, pk.Z);
}

AuthorityPublicKey read_public_key(ByteReader& r, const GroupDescriptor& g) {
  expect_group(r, g);
  AuthorityPublicKey pk;
  pk.id = r.u32();
  if (pk.id == 0) fail(ErrorCode::kMalformedInput, "authority id 0");
  pk.name = r.str();
  for (std::uint32_t j = 0, n = bounded_count(r, 8); j < n; ++j) {
    pk.attribute_names.push_back(r.str());
    pk.T.push_back(get_source(r, g));
  }
  if (pk.T.empty()) fail(ErrorCode::kMalformedInput, "authority without attributes");
  pk.Y = get_target(r, g);
  pk.Z = get_source(r, g);
  return pk;
}

Bytes encode_public_key(const GroupDescriptor& g, const AuthorityPublicKey& pk) {
  ByteWriter w;
  write_public_key(w, g, pk);
  return std::move(w).take();
}

AuthorityPublicKey decode_public_key(const GroupDescriptor& g, ByteView payload) {
  return parse(payload, [&](ByteReader& r) { return read_public_key(r, g); });
}

Bytes encode_key_pair(const GroupDescriptor& g, const AuthorityKeyPair& keys) {
  ByteWriter w;
  write_public_key(w, g, keys.pk);
  put(w, g, keys.sk.alpha);
  put(w, g, keys.sk.beta);
  for (const auto& t : keys.sk.t) put(w, g, t);
  return std::move(w).take();
}

AuthorityKeyPair decode_key_pair(const GroupDescriptor& g, ByteView payload) {
  return parse(payload, [&](ByteReader& r) {
    AuthorityKeyPair keys;
    keys.pk = read_public_key(r, g);
    keys.sk.id = keys.pk.id;
    keys.sk.alpha = get_scalar(r, g);
    keys.sk.beta = get_scalar(r, g);
    for (std::uint32_t j = 0; j < keys.pk.attribute_count(); ++j) keys.sk.t.push_back(get_scalar(r, g));
    return keys;
  });
}

Bytes encode_share(const GroupDescriptor& g, const UserKeyShare& share) {
  ByteWriter w;
  put_group(w, g);
  w.u32(share.authority);
  w.blob(share.tree.encode());
  put(w, g, share.D);
  put(w, g, share.D1);
  write_source_map(w, g, share.Dj);
  return std::move(w).take();
}

UserKeyShare decode_share(const GroupDescriptor& g, ByteView payload) {
  return parse(payload, [&](ByteReader& r) {
    expect_group(r, g);
    UserKeyShare s;
    s.authority = r.u32();
    s.tree = AccessTree::decode(r.blob());
    s.D = get_source(r, g);
    s.D1 = get_source(r, g);
    s.Dj = read_source_map(r, g);
    return s;
  });
}

Bytes encode_enrollment(const GroupDescriptor& g, const StoredEnrollment& e) {
  ByteWriter w;
  put_group(w, g);
  w.u32(e.authority);
  put(w, g, e.enrollment.com);
  put(w, g, e.enrollment.blinder);
  return std::move(w).take();
}

StoredEnrollment decode_enrollment(const GroupDescriptor& g, ByteView payload) {
  return parse(payload, [&](ByteReader& r) {
    expect_group(r, g);
    StoredEnrollment e;
    e.authority = r.u32();
    e.enrollment.com = get_source(r, g);
    e.enrollment.blinder = get_scalar(r, g);
    return e;
  });
}

void write_ciphertext(ByteWriter& w, const GroupDescriptor& g, const Ciphertext& ct) {
  put_group(w, g);
  w.u32(static_cast<std::uint32_t>(ct.attributes.size()));
  for (const auto& [k, attrs] : ct.attributes) {
    w.u32(k);
    w.u32(static_cast<std::uint32_t>(attrs.size()));
    for (const auto& a : attrs) w.u32(a.attribute);
  }
  put(w, g, ct.C1);
  put(w, g, ct.C2);
  w.u32(static_cast<std::uint32_t>(ct.C3.size()));
  for (const auto& [k, e] : ct.C3) {
    w.u32(k);
    put(w, g, e);
  }
  write_source_map(w, g, ct.Ckj);
}

Ciphertext read_ciphertext(ByteReader& r, const GroupDescriptor& g) {
  expect_group(r, g);
  Ciphertext ct;
  for (std::uint32_t i = 0, n = bounded_count(r, 8); i < n; ++i) {
    std::uint32_t k = r.u32();
    AttributeSet attrs;
    for (std::uint32_t j = 0, m = bounded_count(r, 4); j < m; ++j) attrs.insert({k, r.u32()});
    if (!ct.attributes.emplace(k, std::move(attrs)).second) fail(ErrorCode::kMalformedInput, "duplicate authority");
  }
  ct.C1 = get_target(r, g);
  ct.C2 = get_source(r, g);
  for (std::uint32_t i = 0, n = bounded_count(r, 8); i < n; ++i) {
    std::uint32_t k = r.u32();
    if (!ct.C3.emplace(k, get_source(r, g)).second) fail(ErrorCode::kMalformedInput, "duplicate C3");
  }
  ct.Ckj = read_source_map(r, g);
  for (const auto& [a, e] : ct.Ckj) {
    auto it = ct.attributes.find(a.authority);
    if (it == ct.attributes.end() || !it->second.count(a)) fail(ErrorCode::kMalformedInput, "stray attribute component");
  }
  std::size_t listed = 0;
  for (const auto& [k, attrs] : ct.attributes) listed += attrs.size();
  if (listed != ct.Ckj.size()) fail(ErrorCode::kMalformedInput, "attribute components missing");
  return ct;
}

Bytes store(const GlobalParams& params) {
  return wrap(params.group.backend(), Role::kGlobalParams, encode_params(params));
}
Bytes store(const GroupDescriptor& g, const AuthorityPublicKey& pk) {
  return wrap(g.backend(), Role::kAuthorityPublicKey, encode_public_key(g, pk));
}
Bytes store(const GroupDescriptor& g, const AuthorityKeyPair& keys) {
  return wrap(g.backend(), Role::kAuthoritySecretKey, encode_key_pair(g, keys));
}
Bytes store(const GroupDescriptor& g, const UserKeyShare& share) {
  return wrap(g.backend(), Role::kUserShare, encode_share(g, share));
}
Bytes store(const GroupDescriptor& g, const StoredEnrollment& e) {
  return wrap(g.backend(), Role::kEnrollment, encode_enrollment(g, e));
}

GlobalParams load_params(ByteView bytes) {
  auto e = unwrap(bytes);
  if (e.header.role != Role::kGlobalParams) fail(ErrorCode::kMalformedInput, "not a global-params file");
  auto params = decode_params(e.payload);
  if (params.group.backend() != e.header.backend) fail(ErrorCode::kMalformedInput, "header and payload backend differ");
  return params;
}
AuthorityPublicKey load_public_key(const GroupDescriptor& g, ByteView bytes) {
  return decode_public_key(g, unwrap_expect(bytes, g.backend(), Role::kAuthorityPublicKey));
}
AuthorityKeyPair load_key_pair(const GroupDescriptor& g, ByteView bytes) {
  return decode_key_pair(g, unwrap_expect(bytes, g.backend(), Role::kAuthoritySecretKey));
}
UserKeyShare load_share(const GroupDescriptor& g, ByteView bytes) {
  return decode_share(g, unwrap_expect(bytes, g.backend(), Role::kUserShare));
}
StoredEnrollment load_enrollment(const GroupDescriptor& g, ByteView bytes) {
  return decode_enrollment(g, unwrap_expect(bytes, g.backend(), Role::kEnrollment));
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  Bytes out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::kIo, "read failed: " + path);
  return out;
}

void write_file(const std::string& path, ByteView bytes, bool secret) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot create " + tmp.string());
    std::error_code perm_ec;
    if (secret) fs::permissions(tmp, fs::perms::owner_read | fs::perms::owner_write, perm_ec);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      fail(ErrorCode::kIo, "write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::kIo, "cannot rename into " + path);
  }
}

}  // namespace dkpabe::codec
