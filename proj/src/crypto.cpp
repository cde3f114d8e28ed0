#include "mpsi/crypto.hpp"

#include <openssl/evp.h>

#include <stdexcept>

#include "mpsi/errors.hpp"

namespace mpsi {

std::array<uint8_t, 32> sha256(const uint8_t* data, size_t len) {
  std::array<uint8_t, 32> out{};
  unsigned out_len = 0;
  if (EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) != 1 || out_len != 32)
    throw Error("sha256 failed");
  return out;
}

std::array<uint8_t, 32> sha256(const std::string& s) {
  return sha256(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

static EVP_CIPHER_CTX* make_aes_ctx(const Block& key) {
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx) throw Error("EVP_CIPHER_CTX_new failed");
  uint8_t kb[16];
  key.to_bytes(kb);
  if (EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, kb, nullptr) != 1) {
    EVP_CIPHER_CTX_free(ctx);
    throw Error("AES init failed");
  }
  EVP_CIPHER_CTX_set_padding(ctx, 0);
  return ctx;
}

Aes128::Aes128(const Block& key) : ctx_(make_aes_ctx(key)) {}

Aes128::Aes128(Aes128&& other) noexcept : ctx_(other.ctx_) { other.ctx_ = nullptr; }

Aes128& Aes128::operator=(Aes128&& other) noexcept {
  if (this != &other) {
    if (ctx_) EVP_CIPHER_CTX_free(static_cast<EVP_CIPHER_CTX*>(ctx_));
    ctx_ = other.ctx_;
    other.ctx_ = nullptr;
  }
  return *this;
}

Aes128::~Aes128() {
  if (ctx_) EVP_CIPHER_CTX_free(static_cast<EVP_CIPHER_CTX*>(ctx_));
}

Block Aes128::encrypt(const Block& in) const {
  uint8_t ib[16], ob[16];
  in.to_bytes(ib);
  int out_len = 0;
  auto* ctx = static_cast<EVP_CIPHER_CTX*>(ctx_);
  if (EVP_EncryptUpdate(ctx, ob, &out_len, ib, 16) != 1 || out_len != 16)
    throw Error("AES encrypt failed");
  return Block::from_bytes(ob);
}

static Block fixed_hash_key() {
  auto d = sha256("mpsi fixed-key hash v1");
  return Block::from_bytes(d.data());
}

FixedKeyHash::FixedKeyHash() : aes_(fixed_hash_key()) {}

Block FixedKeyHash::h1(const Block& a, uint64_t tweak, uint64_t domain) const {
  Block s = a.gf_double() ^ Block{tweak, domain};
  return aes_.encrypt(s) ^ s;
}

Block FixedKeyHash::h2(const Block& a, const Block& b, uint64_t tweak) const {
  Block s = a.gf_double() ^ b.gf_double().gf_double() ^ Block{tweak, 1};
  return aes_.encrypt(s) ^ s;
}

Prg::Prg(const Block& key) : aes_(key) {}

Prg Prg::from_seed(uint64_t seed, const std::string& tag) {
  std::string material = "mpsi prg v1|" + tag + "|";
  uint8_t le[8];
  for (int i = 0; i < 8; ++i) le[i] = static_cast<uint8_t>(seed >> (8 * i));
  material.append(reinterpret_cast<const char*>(le), 8);
  auto d = sha256(material);
  return Prg(Block::from_bytes(d.data()));
}

Block Prg::next_block() { return aes_.encrypt(Block{counter_++, 0}); }

uint64_t Prg::next_u64() {
  if (buf_used_ + 8 > 16) {
    buf_ = next_block();
    buf_used_ = 0;
  }
  uint64_t v = buf_used_ == 0 ? buf_.lo : buf_.hi;
  buf_used_ += 8;
  return v;
}

uint64_t Prg::next_below(uint64_t bound) {
  if (bound == 0) throw Error("next_below: zero bound");
  if ((bound & (bound - 1)) == 0) return next_u64() & (bound - 1);
  // rejection sampling to stay uniform
  uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

uint8_t Prg::next_bit() { return static_cast<uint8_t>(next_u64() & 1); }

void Prg::fill(uint8_t* out, size_t len) {
  size_t off = 0;
  while (off + 16 <= len) {
    Block b = next_block();
    b.to_bytes(out + off);
    off += 16;
  }
  if (off < len) {
    uint8_t tmp[16];
    next_block().to_bytes(tmp);
    std::memcpy(out + off, tmp, len - off);
  }
}

}  // namespace mpsi
