#include <gtest/gtest.h>
#include <sys/socket.h>

#include <filesystem>
#include <functional>
#include <thread>

#include "dkpabe/codec.hpp"
#include "dkpabe/error.hpp"
#include "dkpabe/grants.hpp"
#include "dkpabe/hybrid.hpp"
#include "dkpabe/service.hpp"
#include "test_support.hpp"

namespace dkpabe {
namespace {

using dkpabe::testing::curve_params;
using dkpabe::testing::transparent_params;
using wire::Frame;
using wire::FrameType;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

issuing::UserOptions fast(const issuing::Enrollment& e) {
  issuing::UserOptions o;
  o.enrollment = e;
  o.hom_key = twopc::trusted_test_backend();
  return o;
}

// One authority served on a background thread.
struct Running {
  std::shared_ptr<GrantTable> table;
  std::unique_ptr<AuthorityService> service;
  std::thread thread;
  wire::Endpoint at;

  Running(std::shared_ptr<const GlobalParams> params, const AuthorityKeyPair& kp, ServiceOptions opts = {}) {
    table = std::make_shared<GrantTable>(kp.pk);
    auto t = table;
    service = std::make_unique<AuthorityService>(
        params, kp, [t](std::string_view fp) { return t->find(fp); }, opts);
    at = {"127.0.0.1", service->port()};
    thread = std::thread([this] { service->run(); });
  }
  ~Running() {
    service->stop();
    thread.join();
  }
};

struct Fixture {
  std::shared_ptr<const GlobalParams> params;
  GroupContext ctx;
  DeterministicRng rng{31};
  std::vector<AuthorityKeyPair> kps;

  explicit Fixture(std::shared_ptr<const GlobalParams> p) : params(p), ctx(p) {
    kps.push_back(authority_setup(ctx, 1, "hospital", {"doctor", "nurse", "cardio"}, rng));
    kps.push_back(authority_setup(ctx, 2, "insurer", {"gold", "silver"}, rng));
  }
  issuing::Enrollment enroll(std::string_view gid) {
    return issuing::enroll(ctx, derive_uid(ctx.group(), gid), rng);
  }
  std::string fp(const issuing::Enrollment& e) { return issuing::commitment_fingerprint(ctx.group(), e.com); }
};

AccessTree both(std::uint32_t k) { return AccessTree::all_of({AccessTree::leaf({k, 1}), AccessTree::leaf({k, 2})}); }

TEST(Service, EndToEndTwoAuthorities) {
  Fixture fx(transparent_params());
  Running a(fx.params, fx.kps[0]), b(fx.params, fx.kps[1]);

  auto pk1 = fetch_public_key(fx.ctx.group(), a.at);
  EXPECT_EQ(pk1.name, "hospital");
  EXPECT_EQ(pk1.T, fx.kps[0].pk.T);

  std::map<std::uint32_t, UserKeyShare> shares;
  for (auto* r : {&a, &b}) {
    const auto& pk = r == &a ? fx.kps[0].pk : fx.kps[1].pk;
    auto e = fx.enroll("grace");
    r->table->put(fx.fp(e), both(pk.id));
    shares.emplace(pk.id, request_keys(fx.ctx, pk, "grace", r->at, fx.rng, fast(e)));
  }
  std::map<std::uint32_t, AttributeSet> sets = {{1, {{1, 1}, {1, 2}}}, {2, {{2, 1}, {2, 2}}}};
  Bytes pt = {'o', 'k'};
  auto file = hybrid::encrypt(fx.ctx, {fx.kps[0].pk, fx.kps[1].pk}, sets, pt, fx.rng);
  EXPECT_EQ(hybrid::decrypt(fx.ctx, shares, file), pt);
  EXPECT_EQ(a.service->stats().issued, 1u);
  EXPECT_EQ(b.service->stats().issued, 1u);
}

TEST(Service, EndToEndCurveWithPaillier) {
  Fixture fx(curve_params());
  Running a(fx.params, fx.kps[0]);
  auto e = fx.enroll("heidi");
  a.table->put(fx.fp(e), both(1));
  issuing::UserOptions o;
  o.enrollment = e;
  auto share = request_keys(fx.ctx, fx.kps[0].pk, "heidi", a.at, fx.rng, o);
  EXPECT_EQ(share.tree, both(1));
}

TEST(Service, AuthorityErrorsReachTheClient) {
  Fixture fx(transparent_params());
  Running a(fx.params, fx.kps[0]);
  auto e = fx.enroll("ivan");
  EXPECT_EQ(code_of([&] { request_keys(fx.ctx, fx.kps[0].pk, "ivan", a.at, fx.rng, fast(e)); }),
            ErrorCode::kProtocolAbort);
  EXPECT_EQ(a.service->stats().refused, 1u);

  // Keys of another authority: the public key does not match the server's
  // secret key, which the user's sanity check or Sigma2 catches.
  a.table->put(fx.fp(e), both(1));
  EXPECT_THROW(request_keys(fx.ctx, fx.kps[1].pk, "ivan", a.at, fx.rng, fast(e)), Error);
}

TEST(Service, MalformedFramesCloseTheConnection) {
  Fixture fx(transparent_params());
  Running a(fx.params, fx.kps[0]);

  {
    auto s = wire::connect_to(a.at, std::chrono::milliseconds(5000));
    s.write_frame({FrameType::kRequest, {}, {1, 2, 3}});
    EXPECT_EQ(code_of([&] { s.read_frame(); }), ErrorCode::kIo);
  }
  {
    auto s = wire::connect_to(a.at, std::chrono::milliseconds(5000));
    Bytes junk = {0, 0, 0, 20, 0x55};
    junk.resize(24);
    ::send(s.fd(), junk.data(), junk.size(), 0);
    EXPECT_EQ(code_of([&] { s.read_frame(); }), ErrorCode::kIo);
  }
  {
    auto s = wire::connect_to(a.at, std::chrono::milliseconds(5000));
    Bytes huge = {0x10, 0, 0, 0};
    ::send(s.fd(), huge.data(), huge.size(), 0);
    EXPECT_EQ(code_of([&] { s.read_frame(); }), ErrorCode::kIo);
  }
  {
    // Out of order: error frame, then close.
    auto s = wire::connect_to(a.at, std::chrono::milliseconds(5000));
    s.write_frame({FrameType::kCompletion, {}, {}});
    auto f = s.read_frame();
    ASSERT_EQ(f.type, FrameType::kError);
    EXPECT_EQ(code_of([&] { wire::raise_error_frame(f); }), ErrorCode::kPhaseViolation);
  }
  // Still serving.
  auto e = fx.enroll("judy");
  a.table->put(fx.fp(e), both(1));
  EXPECT_NO_THROW(request_keys(fx.ctx, fx.kps[0].pk, "judy", a.at, fx.rng, fast(e)));
  EXPECT_EQ(a.service->stats().dropped, 3u);
}

TEST(Service, ConcurrentSessions) {
  Fixture fx(transparent_params());
  Running a(fx.params, fx.kps[0]);
  constexpr int kUsers = 12;
  std::vector<issuing::Enrollment> enrollments;
  for (int i = 0; i < kUsers; ++i) {
    enrollments.push_back(fx.enroll("user" + std::to_string(i)));
    a.table->put(fx.fp(enrollments.back()), both(1));
  }
  std::vector<std::optional<UserKeyShare>> out(kUsers);
  std::vector<std::thread> threads;
  for (int i = 0; i < kUsers; ++i) {
    threads.emplace_back([&, i] {
      GroupContext ctx(fx.params);
      DeterministicRng rng(500 + i);
      out[i] = request_keys(ctx, fx.kps[0].pk, "user" + std::to_string(i), a.at, rng, fast(enrollments[i]));
    });
  }
  for (auto& t : threads) t.join();
  for (int i = 0; i < kUsers; ++i) ASSERT_TRUE(out[i].has_value()) << i;
  EXPECT_EQ(a.service->stats().issued, static_cast<std::uint64_t>(kUsers));
}

TEST(Service, StopWaitsForIdleConnections) {
  Fixture fx(transparent_params());
  ServiceOptions opts;
  opts.io_timeout = std::chrono::milliseconds(300);
  auto started = std::chrono::steady_clock::now();
  {
    Running a(fx.params, fx.kps[0], opts);
    auto idle = wire::connect_to(a.at, std::chrono::milliseconds(5000));
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  EXPECT_LT(std::chrono::steady_clock::now() - started, std::chrono::seconds(3));
}

TEST(Service, GrantFileIsReloaded) {
  namespace fs = std::filesystem;
  Fixture fx(transparent_params());
  auto dir = fs::temp_directory_path() / ("dkpabe-svc-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto path = (dir / "grants.json").string();
  GrantTable(fx.kps[0].pk).save(path);
  auto file = std::make_shared<GrantFile>(path, fx.kps[0].pk);
  AuthorityService svc(fx.params, fx.kps[0], [file](std::string_view fp) { return file->find(fp); });
  std::thread t([&] { svc.run(); });
  wire::Endpoint at{"127.0.0.1", svc.port()};

  auto e = fx.enroll("mallory");
  EXPECT_EQ(code_of([&] { request_keys(fx.ctx, fx.kps[0].pk, "mallory", at, fx.rng, fast(e)); }),
            ErrorCode::kProtocolAbort);
  GrantTable table(fx.kps[0].pk);
  table.put(fx.fp(e), both(1));
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  table.save(path);
  fs::last_write_time(path, fs::file_time_type::clock::now() + std::chrono::seconds(1));
  EXPECT_NO_THROW(request_keys(fx.ctx, fx.kps[0].pk, "mallory", at, fx.rng, fast(e)));
  svc.stop();
  t.join();
  fs::remove_all(dir);
}

}  // namespace
}  // namespace dkpabe
