#include "mpsi/ot.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>
#include <openssl/rand.h>

#include <cstring>
#include <stdexcept>

#include "mpsi/bits.hpp"
#include "mpsi/errors.hpp"

namespace mpsi {

namespace {

constexpr size_t kPointBytes = 33;  // compressed P-256 point
constexpr size_t kBaseCount = 128;  // base OTs consumed by the extension

// ---------------------------------------------------------------------------
// Thin RAII wrappers around the OpenSSL EC primitives used by the base OT.

struct EcError : std::runtime_error {
  explicit EcError(const char* what) : std::runtime_error(what) {}
};

struct BnCtx {
  BN_CTX* ctx;
  BnCtx() : ctx(BN_CTX_new()) {
    if (!ctx) throw EcError("BN_CTX_new");
  }
  ~BnCtx() { BN_CTX_free(ctx); }
};

struct Scalar {
  BIGNUM* bn;
  Scalar() : bn(BN_new()) {
    if (!bn) throw EcError("BN_new");
  }
  ~Scalar() { BN_free(bn); }
};

class Curve {
 public:
  Curve() : group_(EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1)) {
    if (!group_) throw EcError("EC_GROUP_new_by_curve_name");
  }
  ~Curve() { EC_GROUP_free(group_); }
  Curve(const Curve&) = delete;
  Curve& operator=(const Curve&) = delete;

  const EC_GROUP* group() const { return group_; }

  void random_scalar(Scalar& out, BnCtx& ctx) const {
    Scalar order;
    if (EC_GROUP_get_order(group_, order.bn, ctx.ctx) != 1) throw EcError("EC_GROUP_get_order");
    do {
      if (BN_rand_range(out.bn, order.bn) != 1) throw EcError("BN_rand_range");
    } while (BN_is_zero(out.bn));
  }

 private:
  EC_GROUP* group_;
};

class Point {
 public:
  explicit Point(const Curve& curve) : curve_(&curve), pt_(EC_POINT_new(curve.group())) {
    if (!pt_) throw EcError("EC_POINT_new");
  }
  Point(const Point& other) : Point(*other.curve_) {
    if (EC_POINT_copy(pt_, other.pt_) != 1) throw EcError("EC_POINT_copy");
  }
  Point& operator=(const Point&) = delete;
  ~Point() { EC_POINT_free(pt_); }

  EC_POINT* get() { return pt_; }
  const EC_POINT* get() const { return pt_; }

  // this = scalar * G
  void base_mul(const Scalar& k, BnCtx& ctx) {
    if (EC_POINT_mul(curve_->group(), pt_, k.bn, nullptr, nullptr, ctx.ctx) != 1)
      throw EcError("EC_POINT_mul");
  }
  // this = scalar * q
  void mul(const Scalar& k, const Point& q, BnCtx& ctx) {
    if (EC_POINT_mul(curve_->group(), pt_, nullptr, q.get(), k.bn, ctx.ctx) != 1)
      throw EcError("EC_POINT_mul");
  }
  void add(const Point& a, const Point& b, BnCtx& ctx) {
    if (EC_POINT_add(curve_->group(), pt_, a.get(), b.get(), ctx.ctx) != 1)
      throw EcError("EC_POINT_add");
  }
  void invert(BnCtx& ctx) {
    if (EC_POINT_invert(curve_->group(), pt_, ctx.ctx) != 1) throw EcError("EC_POINT_invert");
  }

  void serialize(uint8_t out[kPointBytes], BnCtx& ctx) const {
    if (EC_POINT_point2oct(curve_->group(), pt_, POINT_CONVERSION_COMPRESSED, out, kPointBytes,
                           ctx.ctx) != kPointBytes)
      throw EcError("EC_POINT_point2oct");
  }
  void deserialize(const uint8_t in[kPointBytes], BnCtx& ctx) {
    if (EC_POINT_oct2point(curve_->group(), pt_, in, kPointBytes, ctx.ctx) != 1)
      throw ProtocolViolation("malformed curve point in base OT message");
  }

 private:
  const Curve* curve_;
  EC_POINT* pt_;
};

// Key for transfer index i derived from a shared curve point.
Block point_key(const uint8_t point[kPointBytes], uint64_t index) {
  uint8_t buf[kPointBytes + 8];
  std::memcpy(buf, point, kPointBytes);
  for (int k = 0; k < 8; ++k) buf[kPointBytes + k] = static_cast<uint8_t>(index >> (8 * k));
  const auto digest = sha256(buf, sizeof(buf));
  return Block::from_bytes(digest.data());
}

Block random_block() {
  uint8_t buf[16];
  if (RAND_bytes(buf, sizeof(buf)) != 1) throw EcError("RAND_bytes");
  return Block::from_bytes(buf);
}

void append_block(std::vector<uint8_t>& out, const Block& b) {
  uint8_t buf[16];
  b.to_bytes(buf);
  out.insert(out.end(), buf, buf + 16);
}

Block block_at(const std::vector<uint8_t>& buf, size_t index) {
  return Block::from_bytes(buf.data() + 16 * index);
}

// ---------------------------------------------------------------------------
// Base OT (two-round elliptic-curve protocol).
//
// Sender picks a, publishes A = aG. Receiver with choice c picks b and replies
// B = bG + cA. Sender derives k0 from aB and k1 from a(B - A); the receiver
// can derive only k_c from bA. Messages travel encrypted under those keys.

void base_ot_send(Channel& ch, const std::vector<std::array<Block, 2>>& messages,
                  bool send_header) {
  Curve curve;
  BnCtx ctx;
  const size_t count = messages.size();

  Scalar a;
  curve.random_scalar(a, ctx);
  Point big_a(curve);
  big_a.base_mul(a, ctx);
  Point a_big_a(curve);
  a_big_a.mul(a, big_a, ctx);  // a * A, subtracted to derive k1
  Point neg_a_big_a(a_big_a);
  neg_a_big_a.invert(ctx);

  std::vector<uint8_t> first;
  if (send_header) {
    first.push_back(static_cast<uint8_t>(OtMode::Base));
    first.resize(first.size() + 4);
    put_u32be(first.data() + 1, static_cast<uint32_t>(count));
  }
  first.resize(first.size() + kPointBytes);
  big_a.serialize(first.data() + first.size() - kPointBytes, ctx);
  ch.send_frame(FrameType::OtMsg, first);

  const auto replies = ch.recv_expect(FrameType::OtMsg);
  if (replies.size() != count * kPointBytes)
    throw ProtocolViolation("base OT reply has wrong size");

  std::vector<uint8_t> ciphertexts;
  ciphertexts.reserve(count * 32);
  Point b_pt(curve), k_pt(curve);
  uint8_t point_buf[kPointBytes];
  for (size_t i = 0; i < count; ++i) {
    b_pt.deserialize(replies.data() + i * kPointBytes, ctx);
    k_pt.mul(a, b_pt, ctx);  // a * B
    k_pt.serialize(point_buf, ctx);
    const Block k0 = point_key(point_buf, i);
    Point k1_pt(curve);
    k1_pt.add(k_pt, neg_a_big_a, ctx);  // a * (B - A)
    k1_pt.serialize(point_buf, ctx);
    const Block k1 = point_key(point_buf, i);
    append_block(ciphertexts, messages[i][0] ^ k0);
    append_block(ciphertexts, messages[i][1] ^ k1);
  }
  ch.send_frame(FrameType::OtMsg, ciphertexts);
}

std::vector<Block> base_ot_receive(Channel& ch, const std::vector<uint8_t>& choices,
                                   bool expect_header) {
  Curve curve;
  BnCtx ctx;
  const size_t count = choices.size();

  const auto first = ch.recv_expect(FrameType::OtMsg);
  size_t off = 0;
  if (expect_header) {
    if (first.size() != 5 + kPointBytes) throw ProtocolViolation("base OT header has wrong size");
    if (first[0] != static_cast<uint8_t>(OtMode::Base))
      throw ProtocolViolation("peer negotiated a different OT mode");
    if (get_u32be(first.data() + 1) != count)
      throw ProtocolViolation("base OT transfer count mismatch");
    off = 5;
  } else if (first.size() != kPointBytes) {
    throw ProtocolViolation("base OT setup message has wrong size");
  }
  Point big_a(curve);
  big_a.deserialize(first.data() + off, ctx);

  std::vector<uint8_t> replies(count * kPointBytes);
  std::vector<Block> keys(count);
  Point b_pt(curve), k_pt(curve);
  uint8_t point_buf[kPointBytes];
  for (size_t i = 0; i < count; ++i) {
    if (choices[i] > 1) throw ProtocolViolation("choice bits must be 0 or 1");
    Scalar b;
    curve.random_scalar(b, ctx);
    b_pt.base_mul(b, ctx);
    if (choices[i] == 1) b_pt.add(b_pt, big_a, ctx);
    b_pt.serialize(replies.data() + i * kPointBytes, ctx);
    k_pt.mul(b, big_a, ctx);  // b * A
    k_pt.serialize(point_buf, ctx);
    keys[i] = point_key(point_buf, i);
  }
  ch.send_frame(FrameType::OtMsg, replies);

  const auto ciphertexts = ch.recv_expect(FrameType::OtMsg);
  if (ciphertexts.size() != count * 32)
    throw ProtocolViolation("base OT ciphertext batch has wrong size");
  std::vector<Block> out(count);
  for (size_t i = 0; i < count; ++i)
    out[i] = block_at(ciphertexts, 2 * i + choices[i]) ^ keys[i];
  return out;
}

// ---------------------------------------------------------------------------
// IKNP extension. The extension receiver (who holds the choice bits) plays
// base-OT *sender* with 128 random seed pairs; the extension sender plays
// base-OT receiver with a random 128-bit selection s that doubles as the
// correlation secret. Column PRGs stretch the seeds, the receiver sends the
// masked correction columns, and after a bit transpose each row is hashed to
// a one-time pad for the actual message pair.

constexpr uint64_t kIknpDomain = 3;

size_t padded_rows(size_t count) { return (count + kBaseCount - 1) / kBaseCount * kBaseCount; }

uint8_t column_bit(const std::vector<uint8_t>& col, size_t row) {
  return (col[row >> 3] >> (row & 7)) & 1;
}

Block transpose_row(const std::vector<std::vector<uint8_t>>& cols, size_t row) {
  Block b{0, 0};
  for (size_t i = 0; i < 64; ++i)
    b.lo |= static_cast<uint64_t>(column_bit(cols[i], row)) << i;
  for (size_t i = 0; i < 64; ++i)
    b.hi |= static_cast<uint64_t>(column_bit(cols[64 + i], row)) << i;
  return b;
}

void iknp_send(Channel& ch, const std::vector<std::array<Block, 2>>& messages) {
  const size_t count = messages.size();
  const size_t rows = padded_rows(count);
  const size_t col_bytes = rows / 8;

  // Reverse-direction base OTs: learn one seed of each pair, selected by s.
  std::vector<uint8_t> s_bits(kBaseCount);
  Block s{0, 0};
  for (size_t i = 0; i < kBaseCount; ++i) {
    uint8_t bit;
    do {
      if (RAND_bytes(&bit, 1) != 1) throw EcError("RAND_bytes");
      bit &= 1;
    } while (false);
    s_bits[i] = bit;
    if (i < 64)
      s.lo |= static_cast<uint64_t>(bit) << i;
    else
      s.hi |= static_cast<uint64_t>(bit) << (i - 64);
  }
  const auto seeds = base_ot_receive(ch, s_bits, /*expect_header=*/false);

  // Receive the correction columns and reconstruct Q column by column.
  const auto u = ch.recv_expect(FrameType::OtMsg);
  if (u.size() != kBaseCount * col_bytes)
    throw ProtocolViolation("OT extension correction block has wrong size");
  std::vector<std::vector<uint8_t>> q_cols(kBaseCount);
  for (size_t i = 0; i < kBaseCount; ++i) {
    q_cols[i].resize(col_bytes);
    Prg prg(seeds[i]);
    prg.fill(q_cols[i].data(), col_bytes);
    if (s_bits[i]) {
      const uint8_t* ucol = u.data() + i * col_bytes;
      for (size_t k = 0; k < col_bytes; ++k) q_cols[i][k] ^= ucol[k];
    }
  }

  FixedKeyHash hash;
  std::vector<uint8_t> ciphertexts;
  ciphertexts.reserve(count * 32);
  for (size_t j = 0; j < count; ++j) {
    const Block q = transpose_row(q_cols, j);
    append_block(ciphertexts, messages[j][0] ^ hash.h1(q, j, kIknpDomain));
    append_block(ciphertexts, messages[j][1] ^ hash.h1(q ^ s, j, kIknpDomain));
  }
  ch.send_frame(FrameType::OtMsg, ciphertexts);
}

std::vector<Block> iknp_receive(Channel& ch, const std::vector<uint8_t>& choices) {
  const size_t count = choices.size();
  const size_t rows = padded_rows(count);
  const size_t col_bytes = rows / 8;

  // Choice bits packed as a column vector r (padding rows choose 0).
  std::vector<uint8_t> r_packed(col_bytes, 0);
  for (size_t j = 0; j < count; ++j) {
    if (choices[j] > 1) throw ProtocolViolation("choice bits must be 0 or 1");
    if (choices[j]) r_packed[j >> 3] |= static_cast<uint8_t>(1u << (j & 7));
  }

  // Reverse-direction base OTs: deal out 128 random seed pairs.
  std::vector<std::array<Block, 2>> seed_pairs(kBaseCount);
  for (auto& pair : seed_pairs) pair = {random_block(), random_block()};
  base_ot_send(ch, seed_pairs, /*send_header=*/false);

  // T columns from the first seed; corrections u_i = G(k0) ^ G(k1) ^ r.
  std::vector<std::vector<uint8_t>> t_cols(kBaseCount);
  std::vector<uint8_t> u(kBaseCount * col_bytes);
  std::vector<uint8_t> other(col_bytes);
  for (size_t i = 0; i < kBaseCount; ++i) {
    t_cols[i].resize(col_bytes);
    Prg prg0(seed_pairs[i][0]);
    prg0.fill(t_cols[i].data(), col_bytes);
    Prg prg1(seed_pairs[i][1]);
    prg1.fill(other.data(), col_bytes);
    uint8_t* ucol = u.data() + i * col_bytes;
    for (size_t k = 0; k < col_bytes; ++k) ucol[k] = t_cols[i][k] ^ other[k] ^ r_packed[k];
  }
  ch.send_frame(FrameType::OtMsg, u);

  const auto ciphertexts = ch.recv_expect(FrameType::OtMsg);
  if (ciphertexts.size() != count * 32)
    throw ProtocolViolation("OT extension ciphertext batch has wrong size");
  FixedKeyHash hash;
  std::vector<Block> out(count);
  for (size_t j = 0; j < count; ++j) {
    const Block t = transpose_row(t_cols, j);
    out[j] = block_at(ciphertexts, 2 * j + choices[j]) ^ hash.h1(t, j, kIknpDomain);
  }
  return out;
}

}  // namespace

const char* ot_mode_name(OtMode m) {
  switch (m) {
    case OtMode::Auto: return "auto";
    case OtMode::Base: return "base";
    case OtMode::Extension: return "extension";
    case OtMode::InsecureDealer: return "insecure-dealer";
  }
  return "?";
}

OtMode parse_ot_mode(const std::string& s) {
  if (s == "auto") return OtMode::Auto;
  if (s == "base") return OtMode::Base;
  if (s == "extension") return OtMode::Extension;
  if (s == "insecure-dealer") return OtMode::InsecureDealer;
  throw ConfigError("unknown OT mode '" + s + "'");
}

OtMode resolve_ot_mode(OtMode mode, size_t count) {
  if (mode != OtMode::Auto) return mode;
  return count >= 128 ? OtMode::Extension : OtMode::Base;
}

void ot_send(Channel& ch, const std::vector<std::array<Block, 2>>& messages, OtMode mode) {
  if (messages.empty()) return;
  const OtMode resolved = resolve_ot_mode(mode, messages.size());
  if (resolved == OtMode::Base) {
    base_ot_send(ch, messages, /*send_header=*/true);
    return;
  }
  std::vector<uint8_t> header(5);
  header[0] = static_cast<uint8_t>(resolved);
  put_u32be(header.data() + 1, static_cast<uint32_t>(messages.size()));
  if (resolved == OtMode::InsecureDealer) {
    std::vector<uint8_t> payload = header;
    payload.reserve(5 + 32 * messages.size());
    for (const auto& pair : messages) {
      append_block(payload, pair[0]);
      append_block(payload, pair[1]);
    }
    ch.send_frame(FrameType::OtMsg, payload);
    return;
  }
  ch.send_frame(FrameType::OtMsg, header);
  iknp_send(ch, messages);
}

std::vector<Block> ot_receive(Channel& ch, const std::vector<uint8_t>& choices, OtMode mode) {
  if (choices.empty()) return {};
  const OtMode resolved = resolve_ot_mode(mode, choices.size());
  if (resolved == OtMode::Base)
    return base_ot_receive(ch, choices, /*expect_header=*/true);

  const auto header = ch.recv_expect(FrameType::OtMsg);
  if (header.size() < 5) throw ProtocolViolation("OT header has wrong size");
  if (header[0] != static_cast<uint8_t>(resolved))
    throw ProtocolViolation("peer negotiated a different OT mode");
  if (get_u32be(header.data() + 1) != choices.size())
    throw ProtocolViolation("OT transfer count mismatch");

  if (resolved == OtMode::InsecureDealer) {
    if (header.size() != 5 + 32 * choices.size())
      throw ProtocolViolation("OT dealer batch has wrong size");
    std::vector<Block> out(choices.size());
    for (size_t j = 0; j < choices.size(); ++j) {
      if (choices[j] > 1) throw ProtocolViolation("choice bits must be 0 or 1");
      out[j] = Block::from_bytes(header.data() + 5 + 32 * j + 16 * choices[j]);
    }
    return out;
  }
  if (header.size() != 5) throw ProtocolViolation("OT header has wrong size");
  return iknp_receive(ch, choices);
}

}  // namespace mpsi
