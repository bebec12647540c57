#include "dkpabe/service.hpp"

#include <poll.h>
#include <sys/socket.h>

#include <spdlog/spdlog.h>

#include "dkpabe/codec.hpp"
#include "dkpabe/error.hpp"

namespace dkpabe {
namespace {

using wire::Frame;
using wire::FrameType;

std::string short_id(const issuing::SessionId& s) {
  return to_hex(ByteView(s.data(), 8));
}

bool is_parse_error(ErrorCode c) {
  return c == ErrorCode::kMalformedInput || c == ErrorCode::kTruncatedInput || c == ErrorCode::kFrameTooLarge ||
         c == ErrorCode::kIo;
}

}  // namespace

AuthorityService::AuthorityService(std::shared_ptr<const GlobalParams> params, AuthorityKeyPair keys,
                                   GrantProvider grants, ServiceOptions options)
    : ctx_(std::move(params)),
      keys_(std::move(keys)),
      grants_(std::move(grants)),
      options_(std::move(options)),
      listener_(wire::listen_on(options_.listen)),
      port_(wire::local_port(listener_)) {}

AuthorityService::~AuthorityService() {
  stop();
  reap(true);
  keys_.sk.wipe();
}

AuthorityService::Stats AuthorityService::stats() const {
  return {issued_.load(), refused_.load(), dropped_.load()};
}

void AuthorityService::reap(bool all) {
  for (auto it = workers_.begin(); it != workers_.end();) {
    if (all || it->done.load()) {
      if (it->thread.joinable()) it->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

void AuthorityService::run() {
  spdlog::info("authority {} (id {}) serving on port {}", keys_.pk.name, keys_.pk.id, port_);
  std::uint64_t next_conn = 0;
  while (!stopping_.load()) {
    pollfd p{listener_.fd(), POLLIN, 0};
    int rc = ::poll(&p, 1, 100);
    reap(false);
    if (rc <= 0 || !(p.revents & POLLIN)) continue;
    int fd = ::accept(listener_.fd(), nullptr, nullptr);
    if (fd < 0) continue;
    wire::Socket sock(fd);
    if (workers_.size() >= options_.max_connections) {
      spdlog::warn("connection limit reached; refusing");
      dropped_.fetch_add(1);
      continue;
    }
    auto& w = workers_.emplace_back();
    std::uint64_t conn = next_conn++;
    w.thread = std::thread([this, &w, conn, s = std::move(sock)]() mutable {
      serve(std::move(s), conn);
      w.done.store(true);
    });
  }
  listener_.close();
  spdlog::info("shutting down; waiting for {} connection(s)", workers_.size());
  reap(true);
}

void AuthorityService::serve(wire::Socket sock, std::uint64_t conn) {
  sock.set_timeout(options_.io_timeout);
  SystemRng protocol_rng, key_rng;
  std::unique_ptr<issuing::AuthorityIssuingSession> session;
  issuing::SessionId sid{};
  std::string phase = "hello";
  const auto& g = ctx_.group();

  auto lookup = [&](const SourceElement& com) -> std::optional<AccessTree> {
    auto fp = issuing::commitment_fingerprint(g, com);
    auto tree = grants_(fp);
    spdlog::info("[{}] grant lookup {}...: {}", short_id(sid), fp.substr(0, 12), tree ? "found" : "none");
    return tree;
  };

  try {
    for (;;) {
      Frame f;
      try {
        f = sock.read_frame(options_.max_frame);
      } catch (const Error& e) {
        // A clean close between sessions is not an error.
        if (!(e.code() == ErrorCode::kIo && (phase == "hello" || phase == "done"))) {
          spdlog::warn("conn {} [{}] {}: {}", conn, short_id(sid), phase, e.what());
          dropped_.fetch_add(1);
        }
        return;
      }
      try {
        switch (f.type) {
          case FrameType::kHello:
            if (session) fail(ErrorCode::kPhaseViolation, "hello inside a session");
            sock.write_frame({FrameType::kPublicKey, f.session, codec::store(g, keys_.pk)}, options_.max_frame);
            break;
          case FrameType::kRequest: {
            if (session) fail(ErrorCode::kPhaseViolation, "second request on one connection");
            sid = f.session;
            phase = "request";
            auto m1 = issuing::decode_request(g, f.payload);
            if (m1.session != f.session) fail(ErrorCode::kMalformedInput, "frame and request session differ");
            session = std::make_unique<issuing::AuthorityIssuingSession>(ctx_, keys_, protocol_rng, key_rng);
            auto r1 = session->on_request(m1, lookup);
            sock.write_frame({FrameType::kReplies, sid, issuing::encode(g, r1)}, options_.max_frame);
            phase = "completion";
            spdlog::info("[{}] request accepted", short_id(sid));
            break;
          }
          case FrameType::kCompletion: {
            if (!session || phase != "completion") fail(ErrorCode::kPhaseViolation, "completion before request");
            if (f.session != sid) fail(ErrorCode::kPhaseViolation, "completion for another session");
            auto c1 = issuing::decode_completion(g, f.payload);
            auto m2 = session->on_completion(c1);
            session.reset();
            phase = "done";
            issued_.fetch_add(1);
            sock.write_frame({FrameType::kBlindedKeys, sid, issuing::encode(g, m2)}, options_.max_frame);
            spdlog::info("[{}] blinded keys issued", short_id(sid));
            return;
          }
          default:
            fail(ErrorCode::kPhaseViolation, "unexpected frame type");
        }
      } catch (const Error& e) {
        if (session) session->abort();
        if (is_parse_error(e.code()) && e.code() != ErrorCode::kIo) {
          spdlog::warn("[{}] {}: malformed frame: {}", short_id(sid), phase, e.what());
          dropped_.fetch_add(1);
          return;
        }
        if (e.code() == ErrorCode::kIo) throw;
        spdlog::warn("[{}] {}: {}: {}", short_id(sid), phase, to_string(e.code()), e.what());
        refused_.fetch_add(1);
        try {
          sock.write_frame(wire::error_frame(f.session, e.code(), e.what()), options_.max_frame);
        } catch (const Error&) {
        }
        return;
      }
    }
  } catch (const std::exception& e) {
    if (session) session->abort();
    spdlog::warn("conn {} [{}] {}: {}", conn, short_id(sid), phase, e.what());
    dropped_.fetch_add(1);
  }
}

namespace {

Frame expect(wire::Socket& s, FrameType type, const ClientOptions& o) {
  Frame f = s.read_frame(o.max_frame);
  if (f.type == FrameType::kError) wire::raise_error_frame(f);
  if (f.type != type) fail(ErrorCode::kProtocolAbort, "unexpected frame from authority");
  return f;
}

}  // namespace

AuthorityPublicKey fetch_public_key(const GroupDescriptor& group, const wire::Endpoint& at,
                                    const ClientOptions& options) {
  auto s = wire::connect_to(at, options.timeout);
  s.write_frame({FrameType::kHello, {}, {}}, options.max_frame);
  auto f = expect(s, FrameType::kPublicKey, options);
  return codec::load_public_key(group, f.payload);
}

UserKeyShare request_keys(GroupContext& ctx, const AuthorityPublicKey& pk, std::string_view gid,
                          const wire::Endpoint& at, Rng& rng, issuing::UserOptions user_options,
                          const ClientOptions& options) {
  const auto& g = ctx.group();
  issuing::UserIssuingSession user(ctx, pk, gid, rng, std::move(user_options));
  auto m1 = user.start();
  auto s = wire::connect_to(at, options.timeout);
  s.write_frame({FrameType::kRequest, m1.session, issuing::encode(g, m1)}, options.max_frame);
  auto r1 = issuing::decode_replies(expect(s, FrameType::kReplies, options).payload);
  auto c1 = user.on_replies(r1);
  s.write_frame({FrameType::kCompletion, m1.session, issuing::encode(g, c1)}, options.max_frame);
  auto m2 = issuing::decode_blinded_keys(g, expect(s, FrameType::kBlindedKeys, options).payload);
  return user.finalize(m2);
}

}  // namespace dkpabe
