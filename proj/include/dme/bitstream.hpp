#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace dme {

/// Little-endian bit packer: bit p of the stream lives at byte p/8, bit p%8;
/// multi-bit fields are written least-significant bit first. Field widths of
/// zero are legal and write nothing.
class BitWriter {
 public:
  void write(std::uint64_t value, unsigned bits) {
    if (bits > 64) throw std::invalid_argument("BitWriter: width > 64");
    if (bits < 64 && (value >> bits) != 0) {
      throw std::invalid_argument("BitWriter: value does not fit width");
    }
    for (unsigned b = 0; b < bits; ++b) {
      const std::size_t pos = bit_count_ + b;
      if (pos / 8 == bytes_.size()) bytes_.push_back(0);
      if ((value >> b) & 1u) bytes_[pos / 8] |= std::uint8_t(1u << (pos % 8));
    }
    bit_count_ += bits;
  }

  std::size_t bit_count() const { return bit_count_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bit_count_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t read(unsigned bits) {
    if (bits > 64) throw std::invalid_argument("BitReader: width > 64");
    std::uint64_t value = 0;
    for (unsigned b = 0; b < bits; ++b) {
      const std::size_t pos = cursor_ + b;
      if (pos / 8 >= bytes_.size()) {
        throw std::out_of_range("BitReader: read past end");
      }
      if ((bytes_[pos / 8] >> (pos % 8)) & 1u) value |= std::uint64_t{1} << b;
    }
    cursor_ += bits;
    return value;
  }

  std::size_t cursor() const { return cursor_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t cursor_ = 0;
};

}  // namespace dme
