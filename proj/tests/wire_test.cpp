#include <gtest/gtest.h>
#include <sys/socket.h>

#include <functional>
#include <thread>

#include "dkpabe/error.hpp"
#include "dkpabe/wire.hpp"

namespace dkpabe::wire {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

Frame sample() {
  Frame f{FrameType::kCompletion, {}, {1, 2, 3, 4, 5}};
  for (std::size_t i = 0; i < f.session.size(); ++i) f.session[i] = static_cast<std::uint8_t>(i * 7);
  return f;
}

TEST(Frames, RoundTrip) {
  auto f = sample();
  auto bytes = encode_frame(f);
  EXPECT_EQ(bytes.size(), 4 + kFrameOverhead + 5);
  EXPECT_EQ(decode_frame(bytes), f);
  Frame empty{FrameType::kHello, {}, {}};
  EXPECT_EQ(decode_frame(encode_frame(empty)), empty);
}

TEST(Frames, Rejections) {
  auto bytes = encode_frame(sample());
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    Bytes cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
    EXPECT_EQ(code_of([&] { decode_frame(cut); }), ErrorCode::kTruncatedInput) << n;
  }
  auto longer = bytes;
  longer.push_back(9);
  EXPECT_EQ(code_of([&] { decode_frame(longer); }), ErrorCode::kMalformedInput);

  auto bad = bytes;
  bad[4] = 0x42;
  EXPECT_EQ(code_of([&] { decode_frame(bad); }), ErrorCode::kMalformedInput);

  Bytes tiny = {0, 0, 0, 3, 1, 0, 0};
  EXPECT_EQ(code_of([&] { decode_frame(tiny); }), ErrorCode::kMalformedInput);

  EXPECT_EQ(code_of([&] { decode_frame(bytes, 10); }), ErrorCode::kFrameTooLarge);
  Frame big{FrameType::kRequest, {}, Bytes(100)};
  EXPECT_EQ(code_of([&] { encode_frame(big, 100); }), ErrorCode::kFrameTooLarge);
  EXPECT_NO_THROW(encode_frame(big, 117));
}

TEST(Frames, ErrorFramesCarryTheCode) {
  auto f = error_frame({}, ErrorCode::kPokRejected, "bad proof");
  EXPECT_EQ(f.type, FrameType::kError);
  try {
    raise_error_frame(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPokRejected);
    EXPECT_NE(std::string(e.what()).find("bad proof"), std::string::npos);
  }
  Frame junk{FrameType::kError, {}, {0, 0}};
  EXPECT_EQ(code_of([&] { raise_error_frame(junk); }), ErrorCode::kProtocolAbort);
}

TEST(Endpoints, Parse) {
  auto e = parse_endpoint("127.0.0.1:8080");
  EXPECT_EQ(e.host, "127.0.0.1");
  EXPECT_EQ(e.port, 8080);
  e = parse_endpoint("[::1]:0");
  EXPECT_EQ(e.host, "::1");
  EXPECT_EQ(to_string(e), "[::1]:0");
  EXPECT_EQ(parse_endpoint(":9").host, "");
  for (auto bad : {"nohost", "h:", "h:65536", "h:12x", "h:-1"}) {
    EXPECT_EQ(code_of([&] { parse_endpoint(bad); }), ErrorCode::kInvalidArgument) << bad;
  }
}

TEST(Sockets, FramesOverLoopback) {
  auto listener = listen_on({"127.0.0.1", 0});
  auto port = local_port(listener);
  ASSERT_NE(port, 0);
  std::thread server([&] {
    Socket s(::accept(listener.fd(), nullptr, nullptr));
    auto f = s.read_frame();
    f.payload.push_back(0xFF);
    s.write_frame(f);
    // Announce an oversized frame; the client must refuse before reading it.
    Bytes head = {0x7F, 0xFF, 0xFF, 0xFF};
    ::send(s.fd(), head.data(), head.size(), 0);
  });
  auto c = connect_to({"127.0.0.1", port}, std::chrono::milliseconds(5000));
  auto f = sample();
  c.write_frame(f);
  auto back = c.read_frame();
  f.payload.push_back(0xFF);
  EXPECT_EQ(back, f);
  EXPECT_EQ(code_of([&] { c.read_frame(); }), ErrorCode::kFrameTooLarge);
  server.join();
  EXPECT_EQ(code_of([&] { c.read_frame(); }), ErrorCode::kIo);
}

TEST(Sockets, ReadTimesOut) {
  auto listener = listen_on({"127.0.0.1", 0});
  auto c = connect_to({"127.0.0.1", local_port(listener)}, std::chrono::milliseconds(200));
  EXPECT_EQ(code_of([&] { c.read_frame(); }), ErrorCode::kIo);
}

TEST(Sockets, ConnectFailureIsIo) {
  auto listener = listen_on({"127.0.0.1", 0});
  auto port = local_port(listener);
  listener.close();
  EXPECT_EQ(code_of([&] { connect_to({"127.0.0.1", port}, std::chrono::milliseconds(500)); }), ErrorCode::kIo);
}

}  // namespace
}  // namespace dkpabe::wire
