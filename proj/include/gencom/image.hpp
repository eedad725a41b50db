#pragma once

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "gencom/error.hpp"

namespace gencom {

// Row-major interleaved 8-bit image, 1 (gray) or 3 (RGB) channels.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, std::size_t c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), pixels(w * h * c, fill) {
    if (c != 1 && c != 3) throw ContractViolation("image channels must be 1 or 3");
  }
  Image(std::size_t w, std::size_t h, std::size_t c, std::vector<std::uint8_t> data)
      : width(w), height(h), channels(c), pixels(std::move(data)) {
    if (c != 1 && c != 3) throw ContractViolation("image channels must be 1 or 3");
    if (pixels.size() != w * h * c) throw ContractViolation("pixel count does not match dimensions");
  }

  std::size_t sample_count() const noexcept { return pixels.size(); }

  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return pixels[(y * width + x) * channels + c];
  }
  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return pixels[(y * width + x) * channels + c];
  }

  bool operator==(const Image&) const = default;
};

namespace detail {

// Reads one whitespace-delimited header token, skipping '#' comments.
inline std::string pnm_token(const std::vector<std::uint8_t>& buf, std::size_t& pos) {
  for (;;) {
    while (pos < buf.size() && std::isspace(buf[pos])) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string tok;
  while (pos < buf.size() && !std::isspace(buf[pos]) && buf[pos] != '#') tok.push_back(static_cast<char>(buf[pos++]));
  if (tok.empty()) throw FormatError("malformed header: unexpected end of header");
  return tok;
}

inline std::size_t pnm_number(const std::vector<std::uint8_t>& buf, std::size_t& pos, const char* field) {
  const std::string tok = pnm_token(buf, pos);
  std::size_t value = 0;
  for (char ch : tok) {
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw FormatError(std::string("malformed header: non-numeric ") + field);
    value = value * 10 + static_cast<std::size_t>(ch - '0');
    if (value > (1u << 24)) throw FormatError(std::string("malformed header: ") + field + " too large");
  }
  return value;
}

}  // namespace detail

// Parses binary PGM (P5) or PPM (P6) with maxval 255.
inline Image decode_pnm(const std::vector<std::uint8_t>& buf) {
  std::size_t pos = 0;
  const std::string magic = detail::pnm_token(buf, pos);
  std::size_t channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw FormatError("malformed header: magic must be P5 or P6");
  }
  const std::size_t w = detail::pnm_number(buf, pos, "width");
  const std::size_t h = detail::pnm_number(buf, pos, "height");
  const std::size_t maxval = detail::pnm_number(buf, pos, "maxval");
  if (w == 0 || h == 0) throw FormatError("malformed header: zero dimension");
  if (maxval != 255) throw FormatError("unsupported maxval " + std::to_string(maxval) + " (only 255)");
  if (pos >= buf.size() || !std::isspace(buf[pos])) throw FormatError("truncated payload: missing raster");
  ++pos;  // single whitespace separates header from raster
  const std::size_t need = w * h * channels;
  if (buf.size() - pos < need)
    throw FormatError("truncated payload: expected " + std::to_string(need) + " bytes, got " +
                      std::to_string(buf.size() - pos));
  std::vector<std::uint8_t> px(buf.begin() + static_cast<std::ptrdiff_t>(pos),
                               buf.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return Image(w, h, channels, std::move(px));
}

inline std::vector<std::uint8_t> encode_pnm(const Image& img) {
  const std::string header = std::string(img.channels == 3 ? "P6" : "P5") + "\n" + std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

inline Image load_image(const std::filesystem::path& path) { return decode_pnm(read_file(path)); }

inline void save_image(const Image& img, const std::filesystem::path& path) { write_file(path, encode_pnm(img)); }

}  // namespace gencom
