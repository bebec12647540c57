#pragma once

// Length-prefixed frames for the key service, plus the blocking socket
// helpers both ends use.
//
//   u32 length (big-endian, covers the rest) | u8 type | 16-byte session | payload

#include <chrono>
#include <cstdint>
#include <string>

#include "dkpabe/bytes.hpp"
#include "dkpabe/error.hpp"
#include "dkpabe/issuing.hpp"

namespace dkpabe::wire {

enum class FrameType : std::uint8_t {
  kRequest = 0x01,      // M1
  kReplies = 0x02,      // blind-sum replies
  kCompletion = 0x03,   // z_x, z_y, P, Q, R
  kBlindedKeys = 0x04,  // M2
  kHello = 0x10,        // asks for the authority public key
  kPublicKey = 0x11,    // key-store entry of the public key
  kError = 0x7F,        // u32 code | str message
};

inline constexpr std::size_t kDefaultMaxFrame = 1u << 20;
inline constexpr std::size_t kFrameOverhead = 1 + 16;

struct Frame {
  FrameType type = FrameType::kError;
  issuing::SessionId session{};
  Bytes payload;

  bool operator==(const Frame&) const = default;
};

bool known_type(std::uint8_t t);

// FrameTooLarge when the length field would exceed max_frame.
Bytes encode_frame(const Frame& f, std::size_t max_frame = kDefaultMaxFrame);
// Exactly one frame. FrameTooLarge, TruncatedInput, MalformedInput.
Frame decode_frame(ByteView bytes, std::size_t max_frame = kDefaultMaxFrame);

Frame error_frame(const issuing::SessionId& session, ErrorCode code, std::string_view message);
// Rethrows the peer's error as a local Error with the same code.
[[noreturn]] void raise_error_frame(const Frame& f);

// host:port; an empty host means all interfaces when listening.
struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};
Endpoint parse_endpoint(std::string_view text);
std::string to_string(const Endpoint& e);

// Owns a socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() { close(); }
  Socket(Socket&& o) noexcept : fd_(o.release()) {}
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool open() const { return fd_ >= 0; }
  int release();
  void close();
  // Receive and send timeouts.
  void set_timeout(std::chrono::milliseconds t);

  void write_frame(const Frame& f, std::size_t max_frame = kDefaultMaxFrame);
  // Io on EOF or timeout; FrameTooLarge before reading an oversized body.
  Frame read_frame(std::size_t max_frame = kDefaultMaxFrame);

 private:
  int fd_ = -1;
};

Socket connect_to(const Endpoint& e, std::chrono::milliseconds timeout);
// Listening socket; port 0 picks an ephemeral port.
Socket listen_on(const Endpoint& e, int backlog = 64);
std::uint16_t local_port(const Socket& s);

}  // namespace dkpabe::wire
