#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace mpsi {

inline bool is_pow2(uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

inline uint64_t next_pow2(uint64_t x) { return x <= 1 ? 1 : std::bit_ceil(x); }

inline uint32_t log2_exact(uint64_t x) { return static_cast<uint32_t>(std::countr_zero(x)); }

// largest power of two <= x; x must be >= 1
inline uint64_t pow2_floor(uint64_t x) { return std::bit_floor(x); }

// bits needed to represent values 0..max_value
inline uint32_t bit_width_for(uint64_t max_value) {
  return max_value == 0 ? 1 : static_cast<uint32_t>(std::bit_width(max_value));
}

// Pack a vector of 0/1 bytes into bytes, LSB-first within each byte.
inline std::vector<uint8_t> pack_bits(const std::vector<uint8_t>& bits) {
  std::vector<uint8_t> out((bits.size() + 7) / 8, 0);
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
  return out;
}

inline std::vector<uint8_t> unpack_bits(const uint8_t* data, size_t bit_count) {
  std::vector<uint8_t> bits(bit_count);
  for (size_t i = 0; i < bit_count; ++i) bits[i] = (data[i / 8] >> (i % 8)) & 1;
  return bits;
}

inline void put_u32be(uint8_t* p, uint32_t x) {
  p[0] = static_cast<uint8_t>(x >> 24);
  p[1] = static_cast<uint8_t>(x >> 16);
  p[2] = static_cast<uint8_t>(x >> 8);
  p[3] = static_cast<uint8_t>(x);
}

inline void put_u32be(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(static_cast<uint8_t>(x >> 24));
  v.push_back(static_cast<uint8_t>(x >> 16));
  v.push_back(static_cast<uint8_t>(x >> 8));
  v.push_back(static_cast<uint8_t>(x));
}

inline uint32_t get_u32be(const uint8_t* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

inline void put_u64le(std::vector<uint8_t>& v, uint64_t x) {
  for (int i = 0; i < 8; ++i) v.push_back(static_cast<uint8_t>(x >> (8 * i)));
}

inline uint64_t get_u64le(const uint8_t* p) {
  uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= uint64_t(p[i]) << (8 * i);
  return x;
}

}  // namespace mpsi
