#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace driftbench {

/// File-format violation; the message names the byte offset of the problem.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " at byte offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Little-endian append-only byte buffer.
class ByteWriter {
 public:
  void put_bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  void put_u16(std::uint16_t v) {
    buf_.push_back(static_cast<char>(v & 0xff));
    buf_.push_back(static_cast<char>((v >> 8) & 0xff));
  }
  void put_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void put_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }
  void put_magic(const char magic[4]) { put_bytes(magic, 4); }

  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

/// Cursor over a fully loaded byte buffer. Every read checks bounds and
/// reports the offset where the data ran out.
class ByteReader {
 public:
  explicit ByteReader(std::string data) : data_(std::move(data)) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n)
      throw FormatError(std::string("truncated ") + what + ": need " +
                            std::to_string(n) + " bytes, have " +
                            std::to_string(remaining()),
                        pos_);
  }

  void get_bytes(void* p, std::size_t n, const char* what) {
    require(n, what);
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint16_t get_u16(const char* what) {
    require(2, what);
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i)
      v |= static_cast<std::uint16_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 2;
    return v;
  }
  std::uint32_t get_u32(const char* what) {
    require(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t get_u64(const char* what) {
    require(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  float get_f32(const char* what) { return std::bit_cast<float>(get_u32(what)); }

  void expect_magic(const char magic[4], const char* format_name) {
    require(4, "magic");
    if (std::memcmp(data_.data() + pos_, magic, 4) != 0)
      throw FormatError(std::string("bad magic for ") + format_name, pos_);
    pos_ += 4;
  }

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

/// Whole-file helpers; read_file throws std::runtime_error on IO failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace driftbench
