#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <sstream>

#include "dkpabe/error.hpp"
#include "dkpabe/hybrid.hpp"
#include "test_support.hpp"

namespace dkpabe::hybrid {
namespace {

using dkpabe::testing::curve_params;
using dkpabe::testing::transparent_params;
namespace fs = std::filesystem;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

struct World {
  GroupContext ctx;
  DeterministicRng rng{77};
  std::vector<AuthorityKeyPair> kps;
  std::vector<AuthorityPublicKey> pks;
  std::map<std::uint32_t, UserKeyShare> shares;
  std::map<std::uint32_t, AttributeSet> sets;

  explicit World(std::shared_ptr<const GlobalParams> params) : ctx(std::move(params)) {
    auto u = derive_uid(ctx.group(), "frank");
    for (std::uint32_t k = 1; k <= 2; ++k) {
      kps.push_back(authority_setup(ctx, k, 3, rng));
      pks.push_back(kps.back().pk);
      auto tree = AccessTree::all_of({AccessTree::leaf({k, 1}), AccessTree::leaf({k, 2})});
      shares.emplace(k, keygen(ctx, kps.back().sk, u, tree, rng));
      sets[k] = {{k, 1}, {k, 2}};
    }
  }
};

Bytes pattern(std::size_t n) {
  Bytes b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>((i * 131) ^ (i >> 9));
  return b;
}

TEST(Hybrid, RoundTripSizes) {
  World w(transparent_params());
  for (std::size_t n : {0, 1, 15, 16, 17, 65535, 65536, 65537, 200000}) {
    auto pt = pattern(n);
    auto file = encrypt(w.ctx, w.pks, w.sets, pt, w.rng);
    EXPECT_EQ(decrypt(w.ctx, w.shares, file), pt) << n;
  }
}

TEST(Hybrid, TenMebibytesOnCurve) {
  World w(curve_params());
  auto pt = pattern(10u << 20);
  auto file = encrypt(w.ctx, w.pks, w.sets, pt, w.rng);
  EXPECT_EQ(decrypt(w.ctx, w.shares, file), pt);
}

TEST(Hybrid, TamperingIsDetected) {
  World w(transparent_params());
  auto pt = pattern(1000);
  auto file = encrypt(w.ctx, w.pks, w.sets, pt, w.rng);
  std::size_t body = file.size() - 1000 - 16;

  // Body and tag bytes fail authentication.
  for (std::size_t i : {body, body + 500, file.size() - 17, file.size() - 16, file.size() - 1}) {
    auto bad = file;
    bad[i] ^= 0x04;
    EXPECT_EQ(code_of([&] { decrypt(w.ctx, w.shares, bad); }), ErrorCode::kAuthenticationFailed) << i;
  }
  // Header bytes are caught by the container checksum.
  auto bad = file;
  bad[body - 40] ^= 0x04;
  EXPECT_EQ(code_of([&] { decrypt(w.ctx, w.shares, bad); }), ErrorCode::kBadChecksum);

  auto longer = file;
  longer.push_back(0);
  EXPECT_EQ(code_of([&] { decrypt(w.ctx, w.shares, longer); }), ErrorCode::kAuthenticationFailed);
  Bytes shorter(file.begin(), file.end() - 1);
  EXPECT_EQ(code_of([&] { decrypt(w.ctx, w.shares, shorter); }), ErrorCode::kTruncatedInput);
}

TEST(Hybrid, PolicyFailureWritesNothing) {
  World w(transparent_params());
  auto file = encrypt(w.ctx, w.pks, {{1, {{1, 3}}}, {2, {{2, 1}, {2, 2}}}}, pattern(5000), w.rng);
  std::istringstream in(std::string(file.begin(), file.end()));
  std::ostringstream out;
  EXPECT_EQ(code_of([&] { decrypt_stream(w.ctx, w.shares, in, out); }), ErrorCode::kPolicyUnsatisfied);
  EXPECT_TRUE(out.str().empty());

  auto partial = w.shares;
  partial.erase(2);
  auto ok = encrypt(w.ctx, w.pks, w.sets, pattern(10), w.rng);
  EXPECT_EQ(code_of([&] { decrypt(w.ctx, partial, ok); }), ErrorCode::kMissingShare);
}

TEST(Hybrid, FilesAreReplacedOnlyOnSuccess) {
  World w(transparent_params());
  auto dir = fs::temp_directory_path() / ("dkpabe-hybrid-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto in = (dir / "in").string(), ct = (dir / "ct").string(), out = (dir / "out").string();
  auto pt = pattern(300000);
  codec::write_file(in, pt);
  encrypt_file(w.ctx, w.pks, w.sets, in, ct, w.rng);
  decrypt_file(w.ctx, w.shares, ct, out);
  EXPECT_EQ(codec::read_file(out), pt);

  auto bytes = codec::read_file(ct);
  bytes.back() ^= 1;
  codec::write_file(ct, bytes);
  fs::remove(out);
  EXPECT_EQ(code_of([&] { decrypt_file(w.ctx, w.shares, ct, out); }), ErrorCode::kAuthenticationFailed);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_FALSE(fs::exists(out + ".partial"));
  fs::remove_all(dir);
}

TEST(Hybrid, HeaderIsReadable) {
  World w(transparent_params());
  auto file = encrypt(w.ctx, w.pks, w.sets, pattern(42), w.rng);
  std::istringstream in(std::string(file.begin(), file.end()));
  auto h = read_header(w.ctx.group(), in);
  EXPECT_EQ(h.label, kLabel);
  EXPECT_EQ(h.length, 42u);
  EXPECT_EQ(h.kem.attributes, w.sets);
  EXPECT_EQ(h.raw.size() + 42 + 16, file.size());
}

TEST(Hybrid, WrongBackendRejected) {
  World t(transparent_params());
  World c(curve_params());
  auto file = encrypt(t.ctx, t.pks, t.sets, pattern(8), t.rng);
  EXPECT_EQ(code_of([&] { decrypt(c.ctx, c.shares, file); }), ErrorCode::kBackendMismatch);
}

}  // namespace
}  // namespace dkpabe::hybrid
