#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

namespace debias {

// 64-bit FNV-1a, used for audit-trail snapshot hashes of vector sets.
class Fnv1a64 {
 public:
  Fnv1a64& update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= kPrime;
    }
    return *this;
  }

  Fnv1a64& update(std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (word >> (8 * i)) & 0xffu;
      state_ *= kPrime;
    }
    return *this;
  }

  Fnv1a64& update(double value) { return update(std::bit_cast<std::uint64_t>(value)); }

  std::uint64_t digest() const { return state_; }

 private:
  static constexpr std::uint64_t kPrime = 1099511628211ull;
  std::uint64_t state_ = 14695981039346656037ull;
};

inline std::string hex_digest(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace debias
