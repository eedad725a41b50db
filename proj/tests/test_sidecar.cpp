#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>

#include <condition_variable>
#include <functional>
#include <set>

#include "gencom/lpf.hpp"
#include "gencom/rng.hpp"
#include "gencom/sidecar.hpp"
#include "test_support.hpp"

using namespace gencom;
using namespace std::chrono_literals;

namespace {

// Minimal in-process sidecar. Each request line is answered from its own
// worker after a small id-dependent delay, so responses come back out of order.
class FakeSidecar {
 public:
  enum class Mode { echo, error, silent, garbage };

  explicit FakeSidecar(Mode mode = Mode::echo) : mode_(mode) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    sa.sin_port = 0;
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0 || ::listen(listen_fd_, 8) != 0)
      throw std::runtime_error("fake sidecar: bind/listen failed");
    socklen_t len = sizeof sa;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&sa), &len);
    port_ = ntohs(sa.sin_port);
    acceptor_ = std::thread([this] { accept_loop(); });
  }

  ~FakeSidecar() {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    acceptor_.join();
    std::lock_guard lock(mu_);
    for (int fd : conns_) ::shutdown(fd, SHUT_RDWR);
  }

  SidecarAddress address() const { return {"127.0.0.1", port_}; }

  std::size_t requests_seen() {
    std::lock_guard lock(mu_);
    return seen_;
  }

 private:
  void accept_loop() {
    std::vector<std::thread> sessions;
    for (;;) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) break;
      {
        std::lock_guard lock(mu_);
        conns_.push_back(fd);
      }
      sessions.emplace_back([this, fd] { serve(fd); });
    }
    for (auto& t : sessions) t.join();
  }

  void serve(int fd) {
    std::mutex write_mu;
    std::vector<std::thread> workers;
    std::string buf;
    char chunk[65536];
    for (;;) {
      const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
      if (n <= 0) break;
      buf.append(chunk, static_cast<std::size_t>(n));
      for (auto nl = buf.find('\n'); nl != std::string::npos; nl = buf.find('\n')) {
        std::string line = buf.substr(0, nl);
        buf.erase(0, nl + 1);
        {
          std::lock_guard lock(mu_);
          ++seen_;
        }
        workers.emplace_back([this, fd, &write_mu, line = std::move(line)] {
          const auto req = nlohmann::json::parse(line);
          const std::string id = req["id"];
          std::this_thread::sleep_for(std::chrono::microseconds(fnv1a64(id) % 3000));
          std::string out;
          switch (mode_) {
            case Mode::echo: {
              nlohmann::json r{{"id", id}, {"ok", true}, {"image", req["image"]}};
              out = r.dump() + "\n";
              break;
            }
            case Mode::error:
              out = nlohmann::json{{"id", id}, {"ok", false}, {"error", "model not loaded"}}.dump() + "\n";
              break;
            case Mode::silent:
              return;
            case Mode::garbage:
              out = "{not json\n";
              break;
          }
          std::lock_guard lock(write_mu);
          ::send(fd, out.data(), out.size(), MSG_NOSIGNAL);
        });
      }
    }
    for (auto& t : workers) t.join();
    ::close(fd);
  }

  Mode mode_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<int> conns_;
  std::size_t seen_ = 0;
};

// A port with nothing listening: bind, read the port, close.
std::uint16_t closed_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa);
  socklen_t len = sizeof sa;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&sa), &len);
  ::close(fd);
  return ntohs(sa.sin_port);
}

struct Received {
  BlockGrid grid;
  std::size_t width, height;
};

Received received_grid() {
  const auto img = test_support::shipped_images()[0];
  auto g = lpf_grid(lpf_encode(img, {8, ReconstructionMode::bilinear}));
  for (std::size_t i = 0; i < g.values.size(); i += 37) g.values[i] ^= 0x80;
  return {g, img.width, img.height};
}

}  // namespace

TEST(Base64, Rfc4648Vectors) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"", ""}, {"f", "Zg=="}, {"fo", "Zm8="}, {"foo", "Zm9v"}, {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="}, {"foobar", "Zm9vYmFy"}};
  for (const auto& [plain, enc] : cases) {
    const std::vector<std::uint8_t> bytes(plain.begin(), plain.end());
    EXPECT_EQ(base64_encode(bytes), enc);
    EXPECT_EQ(base64_decode(enc), bytes);
  }
  EXPECT_THROW(base64_decode("abc"), FormatError);
  EXPECT_THROW(base64_decode("a$c="), FormatError);
}

TEST(Base64, BinaryRoundTrip) {
  for (std::size_t n : {1u, 2u, 3u, 100u, 1001u}) {
    std::vector<std::uint8_t> bytes(n);
    for (std::size_t i = 0; i < n; ++i) bytes[i] = static_cast<std::uint8_t>(counter_u64(n, i));
    EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
  }
}

TEST(Png, RoundTripGreyAndRgb) {
  const auto grey = test_support::shipped_images()[1];
  EXPECT_EQ(decode_png(encode_png(grey)), grey);
  Image rgb(17, 9, 3);
  for (std::size_t i = 0; i < rgb.pixels.size(); ++i) rgb.pixels[i] = static_cast<std::uint8_t>(i * 7);
  EXPECT_EQ(decode_png(encode_png(rgb)), rgb);
  EXPECT_THROW(decode_png(std::vector<std::uint8_t>{1, 2, 3}), FormatError);
}

TEST(Protocol, RequestLineShape) {
  SidecarRequest r{"abc", "echo", "Zm9v", std::nullopt, {{"k", 1}}};
  const auto line = r.to_line();
  ASSERT_EQ(line.back(), '\n');
  EXPECT_EQ(std::count(line.begin(), line.end(), '\n'), 1);
  const auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j["id"], "abc");
  EXPECT_EQ(j["op"], "echo");
  EXPECT_EQ(j["image"], "Zm9v");
  EXPECT_FALSE(j.contains("image_b"));
  EXPECT_EQ(j["params"]["k"], 1);
}

TEST(Protocol, ResponseParsing) {
  const auto ok = SidecarResponse::parse(R"({"id":"7","ok":true,"score":0.5})");
  EXPECT_EQ(ok.id, "7");
  EXPECT_TRUE(ok.ok);
  EXPECT_EQ(ok.score, 0.5);
  EXPECT_FALSE(ok.image);
  EXPECT_THROW(SidecarResponse::parse(R"({"id":"7","ok":false})"), FormatError);
  EXPECT_THROW(SidecarResponse::parse(R"({"ok":true})"), nlohmann::json::exception);
}

TEST(Protocol, AddressParsing) {
  const auto a = SidecarAddress::parse("localhost:9000");
  EXPECT_EQ(a.host, "localhost");
  EXPECT_EQ(a.port, 9000);
  EXPECT_EQ(SidecarAddress::parse("[::1]:80").host, "[::1]");
  EXPECT_THROW(SidecarAddress::parse("nohost"), ConfigError);
  EXPECT_THROW(SidecarAddress::parse("h:0"), ConfigError);
  EXPECT_THROW(SidecarAddress::parse("h:70000"), ConfigError);
}

TEST(Client, EchoIsByteIdentical) {
  FakeSidecar server;
  SidecarClient client(server.address());
  const auto img = test_support::shipped_images()[2];
  const std::string payload = base64_encode(encode_png(img));
  const auto resp = client.call({"", "echo", payload, std::nullopt, {}}, 5s);
  ASSERT_TRUE(resp.ok);
  EXPECT_EQ(*resp.image, payload);
  EXPECT_EQ(decode_png(base64_decode(*resp.image)), img);
}

TEST(Client, HundredConcurrentRequestsMatchIds) {
  FakeSidecar server;
  SidecarClient client(server.address());
  std::vector<std::string> got(100);
  std::vector<std::thread> threads;
  for (int i = 0; i < 100; ++i)
    threads.emplace_back([&, i] {
      const std::string id = "req-" + std::to_string(i);
      const std::vector<std::uint8_t> body(static_cast<std::size_t>(i + 1), static_cast<std::uint8_t>(i));
      const auto resp = client.call({id, "echo", base64_encode(body), std::nullopt, {}}, 10s);
      EXPECT_EQ(resp.id, id);
      EXPECT_EQ(base64_decode(*resp.image), body);
      got[i] = resp.id;
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(std::set<std::string>(got.begin(), got.end()).size(), 100u);
  EXPECT_EQ(server.requests_seen(), 100u);
}

TEST(Client, DuplicateInFlightIdRejected) {
  FakeSidecar server(FakeSidecar::Mode::silent);
  SidecarClient client(server.address());
  std::thread first([&] { EXPECT_THROW(client.call({"same", "echo", "", std::nullopt, {}}, 300ms), SidecarError); });
  std::this_thread::sleep_for(50ms);
  EXPECT_THROW(client.call({"same", "echo", "", std::nullopt, {}}, 300ms), ContractViolation);
  first.join();
}

TEST(Client, TimeoutIsReported) {
  FakeSidecar server(FakeSidecar::Mode::silent);
  SidecarClient client(server.address());
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW(client.call({"", "echo", "", std::nullopt, {}}, 200ms), SidecarError);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 2s);
}

TEST(Client, UnreachableThrows) {
  EXPECT_THROW(SidecarClient({"127.0.0.1", closed_port()}), SidecarError);
}

TEST(ExternalDecoder, EchoSidecarReturnsBilinearInput) {
  FakeSidecar server;
  const auto r = received_grid();
  ExternalDecoder dec({server.address(), 5s});
  const Image out = dec.restore({r.grid, nullptr, 8, r.width, r.height});
  EXPECT_EQ(out, upscale_bilinear(r.grid, 8, r.width, r.height));
  EXPECT_EQ(dec.downgrades(), 0u);
}

TEST(ExternalDecoder, UnreachableFallsBackToInpaint) {
  const auto r = received_grid();
  ExternalDecoder dec({{"127.0.0.1", closed_port()}, 1s});
  const Image out = dec.restore({r.grid, nullptr, 8, r.width, r.height});
  EXPECT_EQ(out, InpaintDecoder().restore({r.grid, nullptr, 8, r.width, r.height}));
  EXPECT_EQ(dec.downgrades(), 1u);
}

TEST(ExternalDecoder, ErrorResponseFallsBack) {
  FakeSidecar server(FakeSidecar::Mode::error);
  const auto r = received_grid();
  ExternalDecoder dec({server.address(), 5s});
  EXPECT_EQ(dec.restore({r.grid, nullptr, 8, r.width, r.height}),
            InpaintDecoder().restore({r.grid, nullptr, 8, r.width, r.height}));
}

TEST(ExternalDecoder, MalformedResponseTimesOutAndFallsBack) {
  FakeSidecar server(FakeSidecar::Mode::garbage);
  const auto r = received_grid();
  ExternalDecoder dec({server.address(), 300ms});
  EXPECT_EQ(dec.restore({r.grid, nullptr, 8, r.width, r.height}),
            InpaintDecoder().restore({r.grid, nullptr, 8, r.width, r.height}));
  EXPECT_EQ(dec.downgrades(), 1u);
}

TEST(ExternalDecoder, FallbackCanBeDisabled) {
  const auto r = received_grid();
  ExternalDecoderOptions opts{{"127.0.0.1", closed_port()}, 1s};
  opts.allow_fallback = false;
  ExternalDecoder dec(opts);
  EXPECT_THROW(dec.restore({r.grid, nullptr, 8, r.width, r.height}), SidecarError);
}

TEST(ExternalDecoder, AddressFromEnvironment) {
  ::setenv("GENCOM_SIDECAR_ADDR", "10.1.2.3:4567", 1);
  const auto a = SidecarAddress::from_env();
  ::unsetenv("GENCOM_SIDECAR_ADDR");
  EXPECT_EQ(a.host, "10.1.2.3");
  EXPECT_EQ(a.port, 4567);
  EXPECT_EQ(SidecarAddress::from_env().str(), SidecarAddress{}.str());
}
