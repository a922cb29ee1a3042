#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ssar::io {

/// Little-endian byte sink.
class ByteWriter {
 public:
  void bytes(std::span<const unsigned char> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  void text(std::string_view s) {
    buf_.insert(buf_.end(), reinterpret_cast<const unsigned char*>(s.data()),
                reinterpret_cast<const unsigned char*>(s.data()) + s.size());
  }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) { put(v); }
  void u64(std::uint64_t v) { put(v); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void f64s(std::span<const double> vs) {
    for (double v : vs) f64(v);
  }
  /// u32 length prefix followed by the bytes.
  void string(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    text(s);
  }

  const std::vector<unsigned char>& buffer() const { return buf_; }
  void write_file(const std::filesystem::path& path) const;

 private:
  template <class T>
  void put(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  std::vector<unsigned char> buf_;
};

/// Little-endian byte source with offset tracking. Every read past the end
/// throws ssar::Error{"truncated"} reporting expected vs actual byte counts.
class ByteReader {
 public:
  explicit ByteReader(std::vector<unsigned char> data) : data_(std::move(data)) {}
  static ByteReader from_file(const std::filesystem::path& path);

  std::size_t offset() const { return offset_; }
  std::size_t size() const { return data_.size(); }
  std::size_t remaining() const { return data_.size() - offset_; }

  std::string text(std::size_t n);
  std::uint8_t u8() { return get<std::uint8_t>(); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  void f64s(std::span<double> out) {
    for (double& v : out) v = f64();
  }
  std::string string() { return text(u32()); }

  /// Throws "truncated" unless `n` more bytes are available.
  void require(std::size_t n) const;

 private:
  template <class T>
  T get() {
    require(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(data_[offset_ + i]) << (8 * i));
    offset_ += sizeof(T);
    return v;
  }
  std::vector<unsigned char> data_;
  std::size_t offset_ = 0;
};

}  // namespace ssar::io
