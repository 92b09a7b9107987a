#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cohgram/error.hpp"

// 8-bit RGB PNG writer using stored (uncompressed) deflate blocks. Output
// is valid PNG readable by any viewer; no zlib dependency needed. The
// matching reader only accepts files this writer produces.

namespace cohgram::png {

namespace detail {

inline const std::array<std::uint32_t, 256>& crc_table() {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t n = 0; n < 256; ++n) {
      std::uint32_t c = n;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[n] = c;
    }
    return t;
  }();
  return table;
}

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
  std::uint32_t c = 0xFFFFFFFFu;
  const auto& t = crc_table();
  for (std::size_t i = 0; i < len; ++i) c = t[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

inline std::uint32_t adler32(const std::uint8_t* data, std::size_t len) {
  std::uint32_t a = 1, b = 0;
  for (std::size_t i = 0; i < len; ++i) {
    a = (a + data[i]) % 65521u;
    b = (b + a) % 65521u;
  }
  return (b << 16) | a;
}

inline void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                         const std::vector<std::uint8_t>& data) {
  put_u32be(out, static_cast<std::uint32_t>(data.size()));
  std::vector<std::uint8_t> body(type, type + 4);
  body.insert(body.end(), data.begin(), data.end());
  out.insert(out.end(), body.begin(), body.end());
  put_u32be(out, crc32(body.data(), body.size()));
}

inline std::vector<std::uint8_t> deflate_stored(const std::vector<std::uint8_t>& raw) {
  std::vector<std::uint8_t> z;
  z.push_back(0x78);  // CMF: deflate, 32K window
  z.push_back(0x01);  // FLG: no dict, check bits
  std::size_t pos = 0;
  do {
    const std::size_t n = std::min<std::size_t>(raw.size() - pos, 65535);
    const bool final = pos + n == raw.size();
    z.push_back(final ? 0x01 : 0x00);
    z.push_back(static_cast<std::uint8_t>(n & 0xFF));
    z.push_back(static_cast<std::uint8_t>(n >> 8));
    z.push_back(static_cast<std::uint8_t>(~n & 0xFF));
    z.push_back(static_cast<std::uint8_t>((~n >> 8) & 0xFF));
    z.insert(z.end(), raw.begin() + pos, raw.begin() + pos + n);
    pos += n;
  } while (pos < raw.size());
  put_u32be(z, adler32(raw.data(), raw.size()));
  return z;
}

}  // namespace detail

// pixels: row-major RGB triples, size = 3 * width * height.
inline std::vector<std::uint8_t> encode_rgb8(const std::vector<std::uint8_t>& pixels,
                                             std::size_t width, std::size_t height) {
  if (width == 0 || height == 0 || pixels.size() != 3 * width * height)
    fail(errc::dim_mismatch, "pixel buffer does not match " + std::to_string(width) + "x" +
                                 std::to_string(height) + " RGB");
  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

  std::vector<std::uint8_t> ihdr;
  detail::put_u32be(ihdr, static_cast<std::uint32_t>(width));
  detail::put_u32be(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type: truecolor
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter method
  ihdr.push_back(0);  // no interlace
  detail::append_chunk(out, "IHDR", ihdr);

  std::vector<std::uint8_t> raw;
  raw.reserve(height * (1 + 3 * width));
  for (std::size_t y = 0; y < height; ++y) {
    raw.push_back(0);  // filter type None
    const auto* row = pixels.data() + y * 3 * width;
    raw.insert(raw.end(), row, row + 3 * width);
  }
  detail::append_chunk(out, "IDAT", detail::deflate_stored(raw));
  detail::append_chunk(out, "IEND", {});
  return out;
}

inline void write_rgb8(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels,
                       std::size_t width, std::size_t height) {
  const auto bytes = encode_rgb8(pixels, width, height);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(errc::io_failure, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(errc::io_failure, "short write to " + path.string());
}

struct DecodedImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // RGB triples
};

namespace detail {

inline std::uint32_t get_u32be(const std::vector<std::uint8_t>& b, std::size_t at) {
  return (std::uint32_t(b[at]) << 24) | (std::uint32_t(b[at + 1]) << 16) |
         (std::uint32_t(b[at + 2]) << 8) | std::uint32_t(b[at + 3]);
}

inline std::vector<std::uint8_t> inflate_stored(const std::vector<std::uint8_t>& z) {
  if (z.size() < 6) fail(errc::malformed_header, "zlib stream too short");
  std::vector<std::uint8_t> raw;
  std::size_t pos = 2;  // skip CMF/FLG
  for (;;) {
    if (pos + 5 > z.size()) fail(errc::truncated_payload, "truncated deflate block");
    const std::uint8_t hdr = z[pos];
    if ((hdr & 0x06) != 0) fail(errc::malformed_header, "only stored deflate blocks supported");
    const std::size_t n = z[pos + 1] | (std::size_t(z[pos + 2]) << 8);
    pos += 5;
    if (pos + n > z.size()) fail(errc::truncated_payload, "truncated deflate block");
    raw.insert(raw.end(), z.begin() + pos, z.begin() + pos + n);
    pos += n;
    if (hdr & 0x01) break;
  }
  if (pos + 4 > z.size()) fail(errc::truncated_payload, "missing adler32");
  if (get_u32be(z, pos) != adler32(raw.data(), raw.size()))
    fail(errc::malformed_header, "adler32 mismatch");
  return raw;
}

}  // namespace detail

inline DecodedImage decode_rgb8(const std::vector<std::uint8_t>& bytes) {
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() < 8 || !std::equal(sig, sig + 8, bytes.begin()))
    fail(errc::bad_magic, "not a PNG file");
  DecodedImage img;
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t len = detail::get_u32be(bytes, pos);
    const std::string type(bytes.begin() + pos + 4, bytes.begin() + pos + 8);
    if (pos + 12 + len > bytes.size()) fail(errc::truncated_payload, "truncated chunk " + type);
    const std::uint8_t* data = bytes.data() + pos + 8;
    if (type == "IHDR") {
      if (len != 13) fail(errc::malformed_header, "bad IHDR length");
      img.width = detail::get_u32be(bytes, pos + 8);
      img.height = detail::get_u32be(bytes, pos + 12);
      if (data[8] != 8 || data[9] != 2)
        fail(errc::malformed_header, "only 8-bit truecolor supported");
    } else if (type == "IDAT") {
      idat.insert(idat.end(), data, data + len);
    } else if (type == "IEND") {
      break;
    }
    pos += 12 + len;
  }
  if (img.width == 0 || img.height == 0) fail(errc::malformed_header, "missing IHDR");
  const auto raw = detail::inflate_stored(idat);
  const std::size_t stride = 1 + 3 * img.width;
  if (raw.size() != stride * img.height) fail(errc::dim_mismatch, "scanline data size mismatch");
  img.pixels.reserve(3 * img.width * img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    if (raw[y * stride] != 0) fail(errc::malformed_header, "only filter type 0 supported");
    img.pixels.insert(img.pixels.end(), raw.begin() + y * stride + 1,
                      raw.begin() + (y + 1) * stride);
  }
  return img;
}

inline DecodedImage read_rgb8(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(errc::io_failure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode_rgb8(bytes);
}

}  // namespace cohgram::png
