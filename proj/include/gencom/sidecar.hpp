#pragma once

// Client side of the GenAI sidecar protocol: newline-delimited JSON over TCP.
//   request  {"id", "op", "image": base64 PNG, "image_b"?: base64 PNG, "params": {...}}
//   response {"id", "ok", "image"?: base64 PNG, "score"?: float, "error"?: string}
// Several requests may be in flight on one connection; responses are matched by id.

#include <netdb.h>
#include <openssl/evp.h>
#include <png.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <future>
#include <json.hpp>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <spdlog/spdlog.h>
#include <string>
#include <thread>
#include <vector>

#include "gencom/error.hpp"
#include "gencom/image.hpp"
#include "gencom/semdec.hpp"

namespace gencom {

// ---------------------------------------------------------------------------
// Payload encoding

inline std::string base64_encode(std::span<const std::uint8_t> data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(), static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

inline std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4) throw FormatError("base64 length must be a multiple of 4");
  std::vector<std::uint8_t> out(3 * (text.size() / 4));
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw FormatError("invalid base64");
  // EVP_DecodeBlock keeps the zero bytes produced by '=' padding
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') pad = text.size() > 1 && text[text.size() - 2] == '=' ? 2 : 1;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

inline std::vector<std::uint8_t> encode_png(const Image& img) {
  if (img.channels != 1 && img.channels != 3) throw ContractViolation("PNG export supports 1 or 3 channels");
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(img.width);
  pi.height = static_cast<png_uint_32>(img.height);
  pi.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&pi, nullptr, &size, 0, img.pixels.data(), 0, nullptr))
    throw FormatError(std::string("png encode: ") + pi.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&pi, out.data(), &size, 0, img.pixels.data(), 0, nullptr))
    throw FormatError(std::string("png encode: ") + pi.message);
  out.resize(size);
  return out;
}

// Decodes to 1 channel for grey inputs, otherwise 3; alpha is composited away.
inline Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&pi, bytes.data(), bytes.size()))
    throw FormatError(std::string("png decode: ") + pi.message);
  const bool grey = !(pi.format & PNG_FORMAT_FLAG_COLOR);
  pi.format = grey ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Image img(pi.width, pi.height, grey ? 1 : 3);
  if (!png_image_finish_read(&pi, nullptr, img.pixels.data(), 0, nullptr)) {
    png_image_free(&pi);
    throw FormatError(std::string("png decode: ") + pi.message);
  }
  return img;
}

// ---------------------------------------------------------------------------
// Wire messages

struct SidecarRequest {
  std::string id;
  std::string op;  // restore | clip_sim | niqe | echo
  std::string image;  // base64 PNG
  std::optional<std::string> image_b;
  nlohmann::json params = nlohmann::json::object();

  std::string to_line() const {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["op"] = op;
    j["image"] = image;
    if (image_b) j["image_b"] = *image_b;
    j["params"] = params;
    return j.dump() + "\n";
  }
};

struct SidecarResponse {
  std::string id;
  bool ok = false;
  std::optional<std::string> image;
  std::optional<double> score;
  std::optional<std::string> error;

  static SidecarResponse parse(std::string_view line) {
    const auto j = nlohmann::json::parse(line);
    SidecarResponse r;
    r.id = j.at("id").get<std::string>();
    r.ok = j.at("ok").get<bool>();
    if (j.contains("image") && !j["image"].is_null()) r.image = j["image"].get<std::string>();
    if (j.contains("score") && !j["score"].is_null()) r.score = j["score"].get<double>();
    if (j.contains("error") && !j["error"].is_null()) r.error = j["error"].get<std::string>();
    if (!r.ok && !r.error) throw FormatError("response with ok=false carries no error");
    return r;
  }
};

struct SidecarAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7860;

  static SidecarAddress parse(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0) throw ConfigError("sidecar address", "expected host:port, got '" + text + "'");
    SidecarAddress a;
    a.host = text.substr(0, colon);
    const std::string port = text.substr(colon + 1);
    char* end = nullptr;
    const long p = std::strtol(port.c_str(), &end, 10);
    if (port.empty() || *end || p <= 0 || p > 65535) throw ConfigError("sidecar address", "bad port '" + port + "'");
    a.port = static_cast<std::uint16_t>(p);
    return a;
  }

  // GENCOM_SIDECAR_ADDR=host:port, falling back to the default.
  static SidecarAddress from_env() {
    const char* v = std::getenv("GENCOM_SIDECAR_ADDR");
    return v && *v ? parse(v) : SidecarAddress{};
  }

  std::string str() const { return host + ":" + std::to_string(port); }
};

// ---------------------------------------------------------------------------
// Connection

class SidecarClient {
 public:
  static constexpr std::ptrdiff_t kMaxInFlight = 128;

  SidecarClient(const SidecarAddress& addr, std::chrono::milliseconds connect_timeout = std::chrono::milliseconds(2000),
                std::ptrdiff_t max_in_flight = kMaxInFlight)
      : addr_(addr), slots_(std::clamp<std::ptrdiff_t>(max_in_flight, 1, kMaxInFlight)) {
    fd_ = connect_to(addr, connect_timeout);
    reader_ = std::thread([this] { read_loop(); });
  }

  SidecarClient(const SidecarClient&) = delete;
  SidecarClient& operator=(const SidecarClient&) = delete;

  ~SidecarClient() {
    ::shutdown(fd_, SHUT_RDWR);
    if (reader_.joinable()) reader_.join();
    ::close(fd_);
  }

  const SidecarAddress& address() const noexcept { return addr_; }

  bool closed() {
    std::lock_guard lock(mu_);
    return closed_;
  }

  // Sends a request and waits for its response. Throws SidecarError on
  // transport failure or timeout; an ok=false response is returned as is.
  SidecarResponse call(SidecarRequest req, std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    if (!slots_.try_acquire_until(deadline)) throw SidecarError("sidecar: too many requests in flight");
    if (req.id.empty()) req.id = "r" + std::to_string(next_id_.fetch_add(1));
    std::future<SidecarResponse> fut;
    {
      std::lock_guard lock(mu_);
      if (closed_) {
        slots_.release();
        throw SidecarError("sidecar connection closed" + (close_reason_.empty() ? "" : ": " + close_reason_));
      }
      auto [it, fresh] = pending_.try_emplace(req.id);
      if (!fresh) {
        slots_.release();
        throw ContractViolation("duplicate sidecar request id " + req.id);
      }
      fut = it->second.get_future();
    }
    try {
      send_all(req.to_line());
    } catch (...) {
      abandon(req.id);
      throw;
    }
    if (fut.wait_until(deadline) != std::future_status::ready) {
      abandon(req.id);
      throw SidecarError("sidecar request " + req.id + " timed out");
    }
    return fut.get();
  }

 private:
  static int connect_to(const SidecarAddress& addr, std::chrono::milliseconds timeout) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (const int rc = ::getaddrinfo(addr.host.c_str(), std::to_string(addr.port).c_str(), &hints, &res); rc != 0)
      throw SidecarError("sidecar " + addr.str() + ": " + ::gai_strerror(rc));
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
    std::string last = "no address";
    for (auto* ai = res; ai; ai = ai->ai_next) {
      const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
      if (fd < 0) continue;
      const int flags = ::fcntl(fd, F_GETFL);
      ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
      int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
      if (rc < 0 && errno == EINPROGRESS) {
        pollfd p{fd, POLLOUT, 0};
        const int ready = ::poll(&p, 1, static_cast<int>(timeout.count()));
        if (ready == 1) {
          int err = 0;
          socklen_t len = sizeof err;
          ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
          rc = err ? -1 : 0;
          errno = err;
        } else {
          rc = -1;
          if (ready == 0) errno = ETIMEDOUT;
        }
      }
      if (rc == 0) {
        ::fcntl(fd, F_SETFL, flags);
        return fd;
      }
      last = std::strerror(errno);
      ::close(fd);
    }
    throw SidecarError("sidecar " + addr.str() + " unreachable: " + last);
  }

  void send_all(const std::string& data) {
    std::lock_guard lock(write_mu_);
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw SidecarError(std::string("sidecar send failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  void abandon(const std::string& id) {
    std::lock_guard lock(mu_);
    if (pending_.erase(id)) slots_.release();
  }

  void deliver(SidecarResponse resp) {
    std::lock_guard lock(mu_);
    auto it = pending_.find(resp.id);
    if (it == pending_.end()) {
      spdlog::warn("sidecar: response for unknown or expired id '{}' dropped", resp.id);
      return;
    }
    it->second.set_value(std::move(resp));
    pending_.erase(it);
    slots_.release();
  }

  void read_loop() {
    std::string buf;
    char chunk[65536];
    std::string reason;
    for (;;) {
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n == 0) {
        reason = "peer closed";
        break;
      }
      if (n < 0) {
        if (errno == EINTR) continue;
        reason = std::strerror(errno);
        break;
      }
      buf.append(chunk, static_cast<std::size_t>(n));
      std::size_t start = 0;
      for (auto nl = buf.find('\n', start); nl != std::string::npos; nl = buf.find('\n', start)) {
        const std::string_view line(buf.data() + start, nl - start);
        start = nl + 1;
        if (line.empty()) continue;
        try {
          deliver(SidecarResponse::parse(line));
        } catch (const std::exception& e) {
          spdlog::warn("sidecar: malformed response line ignored ({})", e.what());
        }
      }
      buf.erase(0, start);
    }
    std::lock_guard lock(mu_);
    closed_ = true;
    close_reason_ = reason;
    for (auto& [id, p] : pending_) {
      p.set_exception(std::make_exception_ptr(SidecarError("sidecar connection lost: " + reason)));
      slots_.release();
    }
    pending_.clear();
  }

  SidecarAddress addr_;
  int fd_ = -1;
  std::thread reader_;
  std::mutex mu_;
  std::mutex write_mu_;
  std::map<std::string, std::promise<SidecarResponse>> pending_;
  std::counting_semaphore<kMaxInFlight> slots_;
  std::atomic<std::uint64_t> next_id_{1};
  bool closed_ = false;
  std::string close_reason_;
};

// ---------------------------------------------------------------------------
// Decoder backed by the sidecar

struct ExternalDecoderOptions {
  SidecarAddress address = SidecarAddress::from_env();
  std::chrono::milliseconds timeout{30000};
  std::chrono::milliseconds connect_timeout{2000};
  bool allow_fallback = true;
  std::ptrdiff_t max_in_flight = 16;
  InpaintOptions fallback{};
};

// Sends the bilinear upscale of the received grid for restoration. Any
// transport failure, error response, malformed image or timeout downgrades to
// the inpaint decoder (or rethrows when fallback is disabled).
class ExternalDecoder final : public SemanticDecoder {
 public:
  explicit ExternalDecoder(ExternalDecoderOptions opts = {}) : opts_(std::move(opts)), fallback_(opts_.fallback) {}

  std::string id() const override { return "external"; }
  DecoderCapabilities capabilities() const override { return {true, 255}; }

  Image restore(const RestoreRequest& req) const override { return restore(req, nullptr); }

  // `fell_back`, when given, reports whether this call was served by the fallback.
  Image restore(const RestoreRequest& req, bool* fell_back) const {
    if (fell_back) *fell_back = false;
    try {
      return remote_restore(req);
    } catch (const std::exception& e) {
      if (!opts_.allow_fallback) throw;
      spdlog::warn("external decoder unavailable ({}); falling back to {}", e.what(), fallback_.id());
      downgrades_.fetch_add(1);
      if (fell_back) *fell_back = true;
      return fallback_.restore(req);
    }
  }

  const ExternalDecoderOptions& options() const noexcept { return opts_; }

  std::size_t downgrades() const noexcept { return downgrades_.load(); }

 private:
  Image remote_restore(const RestoreRequest& req) const {
    const Image input = upscale_bilinear(req.grid, req.block_size, req.width, req.height);
    SidecarRequest r;
    r.op = "restore";
    r.image = base64_encode(encode_png(input));
    r.params = {{"block_size", req.block_size},
                {"width", req.width},
                {"height", req.height},
                {"mask_fraction", req.mask ? req.mask->fraction : 0.0}};
    const auto resp = client().call(std::move(r), opts_.timeout);
    if (!resp.ok) throw SidecarError("sidecar error: " + resp.error.value_or("?"));
    if (!resp.image) throw SidecarError("sidecar restore response carries no image");
    Image out = decode_png(base64_decode(*resp.image));
    if (out.width != req.width || out.height != req.height || out.channels != input.channels)
      throw SidecarError("sidecar returned an image of the wrong shape");
    return out;
  }

  SidecarClient& client() const {
    std::lock_guard lock(mu_);
    if (!client_ || client_->closed()) {
      client_.reset();
      client_ = std::make_unique<SidecarClient>(opts_.address, opts_.connect_timeout, opts_.max_in_flight);
    }
    return *client_;
  }

  ExternalDecoderOptions opts_;
  InpaintDecoder fallback_;
  mutable std::mutex mu_;
  mutable std::unique_ptr<SidecarClient> client_;
  mutable std::atomic<std::size_t> downgrades_{0};
};

}  // namespace gencom
