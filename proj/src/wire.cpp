#include "dkpabe/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <optional>

namespace dkpabe::wire {
namespace {

[[noreturn]] void io_fail(const std::string& what) {
  fail(ErrorCode::kIo, what + ": " + std::strerror(errno));
}

std::uint32_t load_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

void send_all(int fd, const std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    ssize_t w = ::send(fd, p, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      io_fail("send");
    }
    p += w;
    n -= static_cast<std::size_t>(w);
  }
}

void recv_all(int fd, std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    ssize_t r = ::recv(fd, p, n, 0);
    if (r == 0) fail(ErrorCode::kIo, "connection closed by peer");
    if (r < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) fail(ErrorCode::kIo, "receive timed out");
      io_fail("recv");
    }
    p += r;
    n -= static_cast<std::size_t>(r);
  }
}

std::optional<ErrorCode> code_from_name(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::kIo); ++i) {
    auto c = static_cast<ErrorCode>(i);
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

addrinfo* resolve(const Endpoint& e, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  auto port = std::to_string(e.port);
  int rc = ::getaddrinfo(e.host.empty() ? nullptr : e.host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) fail(ErrorCode::kIo, "cannot resolve " + to_string(e) + ": " + ::gai_strerror(rc));
  return res;
}

}  // namespace

bool known_type(std::uint8_t t) {
  switch (static_cast<FrameType>(t)) {
    case FrameType::kRequest:
    case FrameType::kReplies:
    case FrameType::kCompletion:
    case FrameType::kBlindedKeys:
    case FrameType::kHello:
    case FrameType::kPublicKey:
    case FrameType::kError:
      return true;
  }
  return false;
}

Bytes encode_frame(const Frame& f, std::size_t max_frame) {
  std::size_t len = kFrameOverhead + f.payload.size();
  if (len > max_frame) fail(ErrorCode::kFrameTooLarge, std::to_string(len) + " bytes");
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(len));
  w.u8(static_cast<std::uint8_t>(f.type));
  w.raw({f.session.data(), f.session.size()});
  w.raw(f.payload);
  return std::move(w).take();
}

Frame decode_frame(ByteView bytes, std::size_t max_frame) {
  if (bytes.size() < 4) fail(ErrorCode::kTruncatedInput, "frame length");
  std::uint32_t len = load_be32(bytes.data());
  if (len > max_frame) fail(ErrorCode::kFrameTooLarge, std::to_string(len) + " bytes");
  if (len < kFrameOverhead) fail(ErrorCode::kMalformedInput, "frame shorter than its header");
  if (bytes.size() < 4 + std::size_t{len}) fail(ErrorCode::kTruncatedInput, "frame body");
  if (bytes.size() > 4 + std::size_t{len}) fail(ErrorCode::kMalformedInput, "bytes after frame");
  if (!known_type(bytes[4])) fail(ErrorCode::kMalformedInput, "unknown frame type");
  Frame f;
  f.type = static_cast<FrameType>(bytes[4]);
  std::copy(bytes.begin() + 5, bytes.begin() + 21, f.session.begin());
  f.payload.assign(bytes.begin() + 21, bytes.end());
  return f;
}

Frame error_frame(const issuing::SessionId& session, ErrorCode code, std::string_view message) {
  ByteWriter w;
  w.str(to_string(code));
  w.str(message);
  return {FrameType::kError, session, std::move(w).take()};
}

void raise_error_frame(const Frame& f) {
  try {
    ByteReader r(f.payload);
    auto name = r.str();
    auto message = r.str();
    auto code = code_from_name(name);
    fail(code.value_or(ErrorCode::kProtocolAbort), "peer: " + message);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kTruncatedInput) fail(ErrorCode::kProtocolAbort, "undecodable error frame");
    throw;
  }
}

Endpoint parse_endpoint(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos) fail(ErrorCode::kInvalidArgument, "expected host:port, got " + std::string(text));
  Endpoint e;
  e.host = std::string(text.substr(0, colon));
  if (e.host.size() >= 2 && e.host.front() == '[' && e.host.back() == ']') e.host = e.host.substr(1, e.host.size() - 2);
  auto port = text.substr(colon + 1);
  unsigned v = 0;
  auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), v);
  if (ec != std::errc() || p != port.data() + port.size() || v > 65535) {
    fail(ErrorCode::kInvalidArgument, "bad port in " + std::string(text));
  }
  e.port = static_cast<std::uint16_t>(v);
  return e;
}

std::string to_string(const Endpoint& e) {
  if (e.host.find(':') != std::string::npos) return "[" + e.host + "]:" + std::to_string(e.port);
  return e.host + ":" + std::to_string(e.port);
}

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    close();
    fd_ = o.release();
  }
  return *this;
}

int Socket::release() {
  int fd = fd_;
  fd_ = -1;
  return fd;
}

void Socket::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Socket::set_timeout(std::chrono::milliseconds t) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(t.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((t.count() % 1000) * 1000);
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

void Socket::write_frame(const Frame& f, std::size_t max_frame) {
  auto bytes = encode_frame(f, max_frame);
  send_all(fd_, bytes.data(), bytes.size());
}

Frame Socket::read_frame(std::size_t max_frame) {
  std::uint8_t head[4];
  recv_all(fd_, head, sizeof head);
  std::uint32_t len = load_be32(head);
  if (len > max_frame) fail(ErrorCode::kFrameTooLarge, std::to_string(len) + " bytes");
  if (len < kFrameOverhead) fail(ErrorCode::kMalformedInput, "frame shorter than its header");
  Bytes buf(4 + std::size_t{len});
  std::copy(head, head + 4, buf.begin());
  recv_all(fd_, buf.data() + 4, len);
  return decode_frame(buf, max_frame);
}

Socket connect_to(const Endpoint& e, std::chrono::milliseconds timeout) {
  addrinfo* res = resolve(e, false);
  std::string last = "no addresses";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.open()) continue;
    s.set_timeout(timeout);
    if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      ::freeaddrinfo(res);
      return s;
    }
    last = std::strerror(errno);
  }
  ::freeaddrinfo(res);
  fail(ErrorCode::kIo, "cannot connect to " + to_string(e) + ": " + last);
}

Socket listen_on(const Endpoint& e, int backlog) {
  addrinfo* res = resolve(e, true);
  std::string last = "no addresses";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.open()) continue;
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(s.fd(), backlog) == 0) {
      ::freeaddrinfo(res);
      return s;
    }
    last = std::strerror(errno);
  }
  ::freeaddrinfo(res);
  fail(ErrorCode::kIo, "cannot listen on " + to_string(e) + ": " + last);
}

std::uint16_t local_port(const Socket& s) {
  sockaddr_storage ss{};
  socklen_t len = sizeof ss;
  if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&ss), &len) != 0) io_fail("getsockname");
  if (ss.ss_family == AF_INET) return ntohs(reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
  return ntohs(reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port);
}

}  // namespace dkpabe::wire
