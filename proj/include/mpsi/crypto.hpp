#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace mpsi {

// 128-bit block, the unit of wire labels, PRG output and the fixed-key cipher.
struct Block {
  uint64_t lo = 0;
  uint64_t hi = 0;

  friend Block operator^(const Block& a, const Block& b) { return {a.lo ^ b.lo, a.hi ^ b.hi}; }
  Block& operator^=(const Block& b) {
    lo ^= b.lo;
    hi ^= b.hi;
    return *this;
  }
  friend bool operator==(const Block& a, const Block& b) { return a.lo == b.lo && a.hi == b.hi; }
  friend bool operator!=(const Block& a, const Block& b) { return !(a == b); }

  uint8_t lsb() const { return static_cast<uint8_t>(lo & 1); }

  void to_bytes(uint8_t out[16]) const {
    std::memcpy(out, &lo, 8);
    std::memcpy(out + 8, &hi, 8);
  }
  static Block from_bytes(const uint8_t in[16]) {
    Block b;
    std::memcpy(&b.lo, in, 8);
    std::memcpy(&b.hi, in + 8, 8);
    return b;
  }

  // doubling in GF(2^128), used to separate the two operands of the garbling hash
  Block gf_double() const {
    Block r;
    uint64_t carry = hi >> 63;
    r.hi = (hi << 1) | (lo >> 63);
    r.lo = (lo << 1) ^ (carry ? 0x87 : 0);
    return r;
  }
};

std::array<uint8_t, 32> sha256(const uint8_t* data, size_t len);
std::array<uint8_t, 32> sha256(const std::string& s);

// AES-128 in ECB mode used as a fixed permutation / PRF building block.
class Aes128 {
 public:
  explicit Aes128(const Block& key);
  Aes128(const Aes128&) = delete;
  Aes128& operator=(const Aes128&) = delete;
  Aes128(Aes128&& other) noexcept;
  Aes128& operator=(Aes128&& other) noexcept;
  ~Aes128();

  Block encrypt(const Block& in) const;

 private:
  void* ctx_ = nullptr;  // EVP_CIPHER_CTX
};

// Correlation-robust hash H(x) = pi(s) ^ s with tweak-separated domains,
// built from AES-128 under a fixed public key.
class FixedKeyHash {
 public:
  FixedKeyHash();

  // one-input variant (decode maps, OT extension rows)
  Block h1(const Block& a, uint64_t tweak, uint64_t domain) const;
  // two-input variant (garbled AND rows)
  Block h2(const Block& a, const Block& b, uint64_t tweak) const;

 private:
  Aes128 aes_;
};

// Deterministic AES-CTR pseudorandom generator. All protocol randomness is
// drawn from instances of this so runs are reproducible per seed.
class Prg {
 public:
  explicit Prg(const Block& key);
  // derives a key from a small integer seed plus a role tag
  static Prg from_seed(uint64_t seed, const std::string& tag);

  Block next_block();
  uint64_t next_u64();
  // uniform in [0, bound), bound >= 1
  uint64_t next_below(uint64_t bound);
  uint8_t next_bit();
  void fill(uint8_t* out, size_t len);

 private:
  Aes128 aes_;
  uint64_t counter_ = 0;
  Block buf_;
  unsigned buf_used_ = 16;  // bytes consumed from buf_
};

}  // namespace mpsi
