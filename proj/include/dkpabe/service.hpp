#pragma once

// TCP key service of one authority and the matching client calls.
//
// A connection carries either a Hello (answered with the public key) or one
// issuing session: Request -> Replies, Completion -> BlindedKeys. Protocol
// errors are answered with an Error frame and the connection is closed;
// frames that do not parse close the connection without a reply.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string_view>
#include <thread>

#include "dkpabe/issuing.hpp"
#include "dkpabe/kpabe.hpp"
#include "dkpabe/wire.hpp"

namespace dkpabe {

// Commitment fingerprint -> granted tree.
using GrantProvider = std::function<std::optional<AccessTree>(std::string_view fingerprint)>;

struct ServiceOptions {
  wire::Endpoint listen{"127.0.0.1", 0};
  std::size_t max_frame = wire::kDefaultMaxFrame;
  std::chrono::milliseconds io_timeout{30000};
  std::size_t max_connections = 64;
};

class AuthorityService {
 public:
  // Binds immediately; Io when the address is taken.
  AuthorityService(std::shared_ptr<const GlobalParams> params, AuthorityKeyPair keys, GrantProvider grants,
                   ServiceOptions options = {});
  ~AuthorityService();
  AuthorityService(const AuthorityService&) = delete;
  AuthorityService& operator=(const AuthorityService&) = delete;

  std::uint16_t port() const { return port_; }
  // Serves until stop(); then waits for open connections to finish.
  void run();
  // Safe from any thread and from a signal handler.
  void stop() noexcept { stopping_.store(true); }

  struct Stats {
    std::uint64_t issued = 0;
    std::uint64_t refused = 0;  // error frame sent
    std::uint64_t dropped = 0;  // malformed traffic or I/O failure
  };
  Stats stats() const;

 private:
  struct Worker {
    std::thread thread;
    std::atomic<bool> done{false};
  };

  void serve(wire::Socket sock, std::uint64_t conn);
  void reap(bool all);

  GroupContext ctx_;
  AuthorityKeyPair keys_;
  GrantProvider grants_;
  ServiceOptions options_;
  wire::Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::list<Worker> workers_;
  std::atomic<std::uint64_t> issued_{0}, refused_{0}, dropped_{0};
};

struct ClientOptions {
  std::chrono::milliseconds timeout{30000};
  std::size_t max_frame = wire::kDefaultMaxFrame;
};

AuthorityPublicKey fetch_public_key(const GroupDescriptor& group, const wire::Endpoint& at,
                                    const ClientOptions& options = {});

// Runs one issuing session. Errors reported by the authority are rethrown
// with their code.
UserKeyShare request_keys(GroupContext& ctx, const AuthorityPublicKey& pk, std::string_view gid,
                          const wire::Endpoint& at, Rng& rng, issuing::UserOptions user_options = {},
                          const ClientOptions& options = {});

}  // namespace dkpabe
