#pragma once

// Little-endian binary helpers shared by every on-disk format.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "dawmr/common.hpp"

namespace dawmr::binio {

template <typename T>
T to_little(T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    std::reverse(bytes.begin(), bytes.end());
    std::memcpy(&value, bytes.data(), sizeof(T));
  }
  return value;
}

class Writer {
 public:
  explicit Writer(const std::string& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open for writing: " + path);
  }

  void magic(std::string_view tag) { raw(tag.data(), tag.size()); }

  template <typename T>
  void put(T value) {
    value = to_little(value);
    raw(&value, sizeof(T));
  }

  template <typename T>
  void put_array(std::span<const T> values) {
    if constexpr (std::endian::native == std::endian::little || sizeof(T) == 1) {
      raw(values.data(), values.size_bytes());
    } else {
      for (const T& v : values) put(v);
    }
  }

  void close() {
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_);
    out_.close();
  }

 private:
  void raw(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) throw IoError("write failed: " + path_);
  }

  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open for reading: " + path);
    in_.seekg(0, std::ios::end);
    size_ = static_cast<std::uint64_t>(in_.tellg());
    in_.seekg(0, std::ios::beg);
  }

  void expect_magic(std::string_view tag) {
    std::string got(tag.size(), '\0');
    raw(got.data(), got.size());
    if (got != tag) throw FormatError(path_ + ": bad magic, expected " + std::string(tag));
  }

  template <typename T>
  T get() {
    T value;
    raw(&value, sizeof(T));
    return to_little(value);
  }

  template <typename T>
  std::vector<T> get_array(std::uint64_t count) {
    if (count > remaining() / sizeof(T)) throw FormatError(path_ + ": truncated payload");
    std::vector<T> values(count);
    raw(values.data(), count * sizeof(T));
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
      for (T& v : values) v = to_little(v);
    }
    return values;
  }

  std::uint64_t remaining() {
    return size_ - static_cast<std::uint64_t>(in_.tellg());
  }

  const std::string& path() const { return path_; }

 private:
  void raw(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError(path_ + ": truncated file");
  }

  std::string path_;
  std::ifstream in_;
  std::uint64_t size_ = 0;
};

}  // namespace dawmr::binio
