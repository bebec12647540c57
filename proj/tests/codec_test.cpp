#include <gtest/gtest.h>

#include <filesystem>
#include <functional>

#include "dkpabe/codec.hpp"
#include "dkpabe/digest.hpp"
#include "dkpabe/error.hpp"
#include "test_support.hpp"

namespace dkpabe::codec {
namespace {

using dkpabe::testing::curve_params;
using dkpabe::testing::random_message;
using dkpabe::testing::transparent_params;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

// Re-signs a container after editing its header or payload.
Bytes reseal(Bytes b) {
  b.resize(b.size() - kChecksumSize);
  auto sum = sha256(b);
  b.insert(b.end(), sum.begin(), sum.end());
  return b;
}

struct Objects {
  std::shared_ptr<const GlobalParams> params;
  AuthorityKeyPair kp;
  UserKeyShare share;
  StoredEnrollment enrollment;
  Ciphertext ct;
};

Objects make(std::shared_ptr<const GlobalParams> params) {
  GroupContext ctx(params);
  DeterministicRng rng(5);
  Objects o{params, authority_setup(ctx, 3, "clinic", {"doctor", "nurse", "cardio"}, rng), {}, {}, {}};
  auto u = derive_uid(ctx.group(), "erin");
  auto tree = AccessTree::gate(2, {AccessTree::leaf({3, 1}), AccessTree::leaf({3, 2}), AccessTree::leaf({3, 3})});
  o.share = keygen(ctx, o.kp.sk, u, tree, rng);
  o.enrollment = {3, issuing::enroll(ctx, u, rng)};
  o.ct = encrypt(ctx, {o.kp.pk}, {{3, {{3, 1}, {3, 3}}}}, random_message(ctx, rng), rng);
  return o;
}

class CodecTest : public ::testing::TestWithParam<Backend> {
 protected:
  Objects o = make(GetParam() == Backend::kCurve ? curve_params() : transparent_params());
  const GroupDescriptor& g() const { return o.params->group; }
};

TEST_P(CodecTest, RoundTrips) {
  auto params = load_params(store(*o.params));
  EXPECT_EQ(params.group, g());
  EXPECT_EQ(params.g, o.params->g);
  EXPECT_EQ(params.h1, o.params->h1);

  auto pk = load_public_key(g(), store(g(), o.kp.pk));
  EXPECT_EQ(pk.id, 3u);
  EXPECT_EQ(pk.name, "clinic");
  EXPECT_EQ(pk.attribute_names, o.kp.pk.attribute_names);
  EXPECT_EQ(pk.Y, o.kp.pk.Y);
  EXPECT_EQ(pk.Z, o.kp.pk.Z);
  EXPECT_EQ(pk.T, o.kp.pk.T);

  auto kp = load_key_pair(g(), store(g(), o.kp));
  EXPECT_EQ(kp.sk.alpha, o.kp.sk.alpha);
  EXPECT_EQ(kp.sk.beta, o.kp.sk.beta);
  EXPECT_EQ(kp.sk.t, o.kp.sk.t);
  EXPECT_EQ(kp.pk.T, o.kp.pk.T);

  EXPECT_EQ(load_share(g(), store(g(), o.share)), o.share);

  auto en = load_enrollment(g(), store(g(), o.enrollment));
  EXPECT_EQ(en.authority, 3u);
  EXPECT_EQ(en.enrollment.com, o.enrollment.enrollment.com);
  EXPECT_EQ(en.enrollment.blinder, o.enrollment.enrollment.blinder);

  ByteWriter w;
  write_ciphertext(w, g(), o.ct);
  ByteReader r(w.bytes());
  EXPECT_EQ(read_ciphertext(r, g()), o.ct);
  EXPECT_TRUE(r.done());
}

TEST_P(CodecTest, EncodingIsCanonical) {
  auto a = store(g(), o.share);
  EXPECT_EQ(store(g(), load_share(g(), a)), a);
  auto b = store(g(), o.kp);
  EXPECT_EQ(store(g(), load_key_pair(g(), b)), b);
}

TEST_P(CodecTest, EveryFlippedByteIsRejected) {
  auto bytes = store(g(), o.share);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    auto bad = bytes;
    bad[i] ^= 0x01;
    EXPECT_THROW(load_share(g(), bad), Error) << "byte " << i;
  }
}

TEST_P(CodecTest, ContainerErrors) {
  auto bytes = store(g(), o.kp.pk);

  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(code_of([&] { load_public_key(g(), bad); }), ErrorCode::kBadMagic);

  bad = bytes;
  bad[5] = 2;
  EXPECT_EQ(code_of([&] { load_public_key(g(), reseal(bad)); }), ErrorCode::kBadVersion);

  bad = bytes;
  bad[20] ^= 0x80;
  EXPECT_EQ(code_of([&] { load_public_key(g(), bad); }), ErrorCode::kBadChecksum);

  for (std::size_t n : {std::size_t{0}, std::size_t{3}, kHeaderSize - 1, kHeaderSize, bytes.size() - 1}) {
    Bytes cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
    EXPECT_EQ(code_of([&] { load_public_key(g(), cut); }), ErrorCode::kTruncatedInput) << n;
  }

  bad = bytes;
  bad.push_back(0);
  EXPECT_EQ(code_of([&] { load_public_key(g(), bad); }), ErrorCode::kMalformedInput);

  // Right container, wrong role.
  EXPECT_EQ(code_of([&] { load_share(g(), bytes); }), ErrorCode::kMalformedInput);
}

TEST_P(CodecTest, PayloadGarbageBehindValidChecksum) {
  // A well-formed container around a truncated payload must be rejected by
  // the payload decoder, not crash.
  auto payload = encode_share(g(), o.share);
  for (std::size_t n = 0; n < payload.size(); n += 7) {
    auto cut = wrap(g().backend(), Role::kUserShare, ByteView(payload.data(), n));
    EXPECT_THROW(load_share(g(), cut), Error) << n;
  }
}

INSTANTIATE_TEST_SUITE_P(Backends, CodecTest, ::testing::Values(Backend::kCurve, Backend::kTransparent));

TEST(Codec, BackendMismatchMatrix) {
  auto curve = make(curve_params());
  auto trans = make(transparent_params());
  auto odd = transparent_params(1000003);
  const auto& cg = curve.params->group;
  const auto& tg = trans.params->group;

  struct Case {
    const char* what;
    std::function<Bytes(const Objects&)> save;
  };
  std::vector<Case> cases;
  cases.push_back({"pk", [](const Objects& o) { return store(o.params->group, o.kp.pk); }});
  cases.push_back({"sk", [](const Objects& o) { return store(o.params->group, o.kp); }});
  cases.push_back({"share", [](const Objects& o) { return store(o.params->group, o.share); }});
  cases.push_back({"enrollment", [](const Objects& o) { return store(o.params->group, o.enrollment); }});

  auto load = [](const char* what, const GroupDescriptor& g, const Bytes& b) {
    std::string w = what;
    if (w == "pk") load_public_key(g, b);
    if (w == "sk") load_key_pair(g, b);
    if (w == "share") load_share(g, b);
    if (w == "enrollment") load_enrollment(g, b);
  };

  for (const auto& c : cases) {
    auto cb = c.save(curve);
    auto tb = c.save(trans);
    EXPECT_NO_THROW(load(c.what, cg, cb));
    EXPECT_NO_THROW(load(c.what, tg, tb));
    EXPECT_EQ(code_of([&] { load(c.what, tg, cb); }), ErrorCode::kBackendMismatch) << c.what;
    EXPECT_EQ(code_of([&] { load(c.what, cg, tb); }), ErrorCode::kBackendMismatch) << c.what;
    // Same backend, different group order: caught by the payload's group tag.
    EXPECT_EQ(code_of([&] { load(c.what, odd->group, tb); }), ErrorCode::kBackendMismatch) << c.what;
  }
}

TEST(Codec, ParamsMustMatchDerivation) {
  auto params = *transparent_params();
  params.h1 = params.h;
  EXPECT_THROW(load_params(store(params)), Error);
}

TEST(Codec, SecretFilesAreOwnerOnly) {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / ("dkpabe-codec-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto path = (dir / "k").string();
  write_file(path, as_bytes("secret"), true);
  auto perms = fs::status(path).permissions();
  EXPECT_EQ(perms & (fs::perms::group_all | fs::perms::others_all), fs::perms::none);
  auto back = read_file(path);
  EXPECT_EQ(std::string(back.begin(), back.end()), "secret");
  EXPECT_EQ(code_of([&] { read_file((dir / "missing").string()); }), ErrorCode::kIo);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace dkpabe::codec
