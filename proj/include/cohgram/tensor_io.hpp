#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cohgram/error.hpp"

// COHGRAM1 tensor container:
//
//   bytes 0..7    magic "COHGRAM1"
//   bytes 8..11   header length, little-endian uint32
//   header        UTF-8 JSON: {"dims": [...], "dtype": "float32",
//                              "axes": [...], "meta": {...}}
//   payload       little-endian float32, row-major,
//                 product(dims) * 4 bytes
//
// Written floats are 32-bit; computation upstream stays 64-bit.

namespace cohgram {

inline constexpr char kTensorMagic[8] = {'C', 'O', 'H', 'G', 'R', 'A', 'M', '1'};

struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<float> data;  // row-major
  std::vector<std::string> axes;
  nlohmann::json meta;
};

namespace detail {

inline void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f32le(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32le(out, bits);
}

inline float get_f32le(const std::uint8_t* p) {
  const std::uint32_t bits = get_u32le(p);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace detail

inline std::vector<std::uint8_t> write_tensor(std::span<const float> data,
                                              const std::vector<std::size_t>& dims,
                                              const nlohmann::json& meta = nlohmann::json::object(),
                                              const std::vector<std::string>& axes = {}) {
  if (dims.empty()) fail(errc::dim_mismatch, "dims must be nonempty");
  std::size_t count = 1;
  for (std::size_t d : dims) {
    if (d == 0) fail(errc::dim_mismatch, "dims must be positive");
    count *= d;
  }
  if (count != data.size())
    fail(errc::dim_mismatch, "element count " + std::to_string(data.size()) +
                                 " does not match product(dims) = " + std::to_string(count));

  nlohmann::json header;
  header["dims"] = dims;
  header["dtype"] = "float32";
  header["axes"] = axes;
  header["meta"] = meta;
  const std::string header_str = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(12 + header_str.size() + 4 * data.size());
  for (std::uint8_t b : kTensorMagic) out.push_back(b);
  detail::put_u32le(out, static_cast<std::uint32_t>(header_str.size()));
  out.insert(out.end(), header_str.begin(), header_str.end());
  for (float f : data) detail::put_f32le(out, f);
  return out;
}

inline Tensor read_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kTensorMagic, 8) != 0)
    fail(errc::bad_magic, "not a COHGRAM1 tensor");
  if (bytes.size() < 12) fail(errc::malformed_header, "container truncated before header length");
  const std::uint32_t header_len = detail::get_u32le(bytes.data() + 8);
  if (bytes.size() < 12 + static_cast<std::size_t>(header_len))
    fail(errc::malformed_header, "container truncated inside header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + header_len);
  } catch (const nlohmann::json::exception&) {
    fail(errc::header_not_json, "header is not valid JSON");
  }

  Tensor t;
  try {
    t.dims = header.at("dims").get<std::vector<std::size_t>>();
    if (header.at("dtype").get<std::string>() != "float32")
      fail(errc::malformed_header, "unsupported dtype: " + header.at("dtype").get<std::string>());
    if (header.contains("axes")) t.axes = header["axes"].get<std::vector<std::string>>();
    if (header.contains("meta")) t.meta = header["meta"];
  } catch (const nlohmann::json::exception& e) {
    fail(errc::malformed_header, std::string("bad header fields: ") + e.what());
  }
  if (t.dims.empty()) fail(errc::malformed_header, "dims must be nonempty");

  std::size_t count = 1;
  for (std::size_t d : t.dims) {
    if (d == 0) fail(errc::malformed_header, "dims must be positive");
    count *= d;
  }
  const std::size_t payload = bytes.size() - 12 - header_len;
  if (payload < 4 * count)
    fail(errc::truncated_payload, "payload holds " + std::to_string(payload) + " bytes, expected " +
                                      std::to_string(4 * count));
  if (payload > 4 * count)
    fail(errc::malformed_header, "trailing bytes after payload");

  t.data.resize(count);
  const std::uint8_t* p = bytes.data() + 12 + header_len;
  for (std::size_t i = 0; i < count; ++i) t.data[i] = detail::get_f32le(p + 4 * i);
  return t;
}

inline void write_tensor_file(const std::filesystem::path& path, std::span<const float> data,
                              const std::vector<std::size_t>& dims,
                              const nlohmann::json& meta = nlohmann::json::object(),
                              const std::vector<std::string>& axes = {}) {
  const auto bytes = write_tensor(data, dims, meta, axes);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(errc::io_failure, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(errc::io_failure, "short write to " + path.string());
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(errc::io_failure, "cannot open " + path.string());
  f.seekg(0, std::ios::end);
  const std::streamsize size = f.tellg();
  f.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  f.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!f) fail(errc::io_failure, "short read from " + path.string());
  return bytes;
}

inline Tensor read_tensor_file(const std::filesystem::path& path) {
  return read_tensor(read_file_bytes(path));
}

}  // namespace cohgram
