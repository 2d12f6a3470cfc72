#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "swarmlink/types.hpp"

namespace swarmlink {

std::string to_hex(ByteView bytes);
/// Returns nullopt on odd length or non-hex characters.
std::optional<Bytes> from_hex(std::string_view hex);

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

/// Append-only big-endian encoder.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(std::size_t reserve) { buf_.reserve(reserve); }

  ByteWriter& u8(std::uint8_t v);
  ByteWriter& u16(std::uint16_t v);
  ByteWriter& u32(std::uint32_t v);
  ByteWriter& u48(std::uint64_t v);
  ByteWriter& u64(std::uint64_t v);
  ByteWriter& bytes(ByteView v);
  ByteWriter& str(std::string_view s);

  std::size_t size() const noexcept { return buf_.size(); }
  const Bytes& view() const noexcept { return buf_; }
  Bytes take() && { return std::move(buf_); }

 private:
  Bytes buf_;
};

/// Big-endian decoder over a borrowed buffer. Reads past the end set the
/// failure flag and return zeros; check ok() once after a batch of reads.
class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u48();
  std::uint64_t u64();
  Bytes bytes(std::size_t n);
  template <std::size_t N>
  ByteArray<N> array() {
    ByteArray<N> out{};
    if (!need(N)) return out;
    for (std::size_t i = 0; i < N; ++i) out[i] = data_[pos_ + i];
    pos_ += N;
    return out;
  }

  std::size_t remaining() const noexcept { return ok_ ? data_.size() - pos_ : 0; }
  bool ok() const noexcept { return ok_; }
  bool at_end() const noexcept { return ok_ && pos_ == data_.size(); }

 private:
  bool need(std::size_t n);

  ByteView data_;
  std::size_t pos_ = 0;
  bool ok_ = true;
};

}  // namespace swarmlink
