#pragma once

// SHA-256 digests and the big-endian, length-prefixed byte encoder used for
// every hashed structure in the ledger. The layout is documented in
// docs/FORMATS.md and must stay bit-exact.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

namespace p2ptrade {

struct Digest {
  static constexpr std::size_t kSize = 32;
  std::array<std::uint8_t, kSize> bytes{};

  static Digest zero() { return Digest{}; }

  bool is_zero() const {
    for (auto b : bytes)
      if (b != 0) return false;
    return true;
  }

  std::string hex() const {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(kSize * 2);
    for (auto b : bytes) {
      out.push_back(kHex[b >> 4]);
      out.push_back(kHex[b & 0x0f]);
    }
    return out;
  }

  static Digest from_hex(std::string_view s) {
    if (s.size() != kSize * 2) throw std::invalid_argument("digest hex must be 64 characters");
    auto nibble = [](char c) -> std::uint8_t {
      if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
      if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
      if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
      throw std::invalid_argument("invalid hex digit in digest");
    };
    Digest d;
    for (std::size_t i = 0; i < kSize; ++i)
      d.bytes[i] = static_cast<std::uint8_t>((nibble(s[2 * i]) << 4) | nibble(s[2 * i + 1]));
    return d;
  }

  friend bool operator==(const Digest&, const Digest&) = default;
};

inline Digest sha256(std::span<const std::uint8_t> data) {
  Digest d;
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), d.bytes.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != Digest::kSize)
    throw std::runtime_error("EVP_Digest(sha256) failed");
  return d;
}

inline Digest sha256(std::string_view data) {
  return sha256(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(data.data()),
                                              data.size()));
}

/// Hash of two child digests, left then right.
inline Digest hash_pair(const Digest& left, const Digest& right) {
  std::array<std::uint8_t, 2 * Digest::kSize> buf{};
  std::copy(left.bytes.begin(), left.bytes.end(), buf.begin());
  std::copy(right.bytes.begin(), right.bytes.end(), buf.begin() + Digest::kSize);
  return sha256(std::span<const std::uint8_t>(buf));
}

/// Every field is written as a 4-byte big-endian length followed by its payload.
class CanonicalWriter {
 public:
  CanonicalWriter& field(std::string_view s) {
    length(s.size());
    buf_.insert(buf_.end(), s.begin(), s.end());
    return *this;
  }

  CanonicalWriter& field(std::int64_t v) {
    length(8);
    auto u = static_cast<std::uint64_t>(v);
    for (int shift = 56; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(u >> shift));
    return *this;
  }

  CanonicalWriter& field(const Digest& d) {
    length(Digest::kSize);
    buf_.insert(buf_.end(), d.bytes.begin(), d.bytes.end());
    return *this;
  }

  const std::vector<std::uint8_t>& bytes() const { return buf_; }
  Digest digest() const { return sha256(std::span<const std::uint8_t>(buf_)); }

 private:
  void length(std::size_t n) {
    if (n > 0xffffffffu) throw std::length_error("canonical field exceeds 4 GiB");
    auto u = static_cast<std::uint32_t>(n);
    for (int shift = 24; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(u >> shift));
  }

  std::vector<std::uint8_t> buf_;
};

}  // namespace p2ptrade
