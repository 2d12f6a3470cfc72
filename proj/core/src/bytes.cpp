#include "swarmlink/bytes.hpp"

#include "swarmlink/result.hpp"

namespace swarmlink {

std::string_view to_string(Errc e) noexcept {
  switch (e) {
    case Errc::InvalidPoint: return "InvalidPoint";
    case Errc::EmptyContext: return "EmptyContext";
    case Errc::AuthError: return "AuthError";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::SignatureError: return "SignatureError";
    case Errc::UnknownHandshake: return "UnknownHandshake";
    case Errc::Expired: return "Expired";
    case Errc::NoSession: return "NoSession";
    case Errc::StaleEpoch: return "StaleEpoch";
    case Errc::UnknownEpoch: return "UnknownEpoch";
    case Errc::MessageTooLarge: return "MessageTooLarge";
    case Errc::NoBroadcastKey: return "NoBroadcastKey";
    case Errc::CounterExhausted: return "CounterExhausted";
    case Errc::ReplayError: return "ReplayError";
    case Errc::MtuExceeded: return "MtuExceeded";
    case Errc::NoViableLink: return "NoViableLink";
    case Errc::Malformed: return "Malformed";
  }
  return "Unknown";
}

BadResultAccess::BadResultAccess(Errc e)
    : std::logic_error("Result holds error " + std::string(to_string(e))), error_(e) {}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {
int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

std::optional<Bytes> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]);
    int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

ByteWriter& ByteWriter::u8(std::uint8_t v) {
  buf_.push_back(v);
  return *this;
}
ByteWriter& ByteWriter::u16(std::uint16_t v) {
  buf_.push_back(static_cast<std::uint8_t>(v >> 8));
  buf_.push_back(static_cast<std::uint8_t>(v));
  return *this;
}
ByteWriter& ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}
ByteWriter& ByteWriter::u48(std::uint64_t v) {
  for (int shift = 40; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}
ByteWriter& ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}
ByteWriter& ByteWriter::bytes(ByteView v) {
  buf_.insert(buf_.end(), v.begin(), v.end());
  return *this;
}
ByteWriter& ByteWriter::str(std::string_view s) {
  buf_.insert(buf_.end(), s.begin(), s.end());
  return *this;
}

bool ByteReader::need(std::size_t n) {
  if (!ok_ || data_.size() - pos_ < n) {
    ok_ = false;
    return false;
  }
  return true;
}

std::uint8_t ByteReader::u8() {
  if (!need(1)) return 0;
  return data_[pos_++];
}
std::uint16_t ByteReader::u16() {
  if (!need(2)) return 0;
  std::uint16_t v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
  pos_ += 2;
  return v;
}
std::uint32_t ByteReader::u32() {
  if (!need(4)) return 0;
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
  return v;
}
std::uint64_t ByteReader::u48() {
  if (!need(6)) return 0;
  std::uint64_t v = 0;
  for (int i = 0; i < 6; ++i) v = (v << 8) | data_[pos_++];
  return v;
}
std::uint64_t ByteReader::u64() {
  if (!need(8)) return 0;
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
  return v;
}
Bytes ByteReader::bytes(std::size_t n) {
  if (!need(n)) return {};
  Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
            data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
  pos_ += n;
  return out;
}

}  // namespace swarmlink
