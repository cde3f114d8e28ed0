#include "mpsi/garble.hpp"

#include "mpsi/errors.hpp"

namespace mpsi {

namespace {

constexpr uint64_t kDecodeDomain = 2;

}  // namespace

GarbleOutput garble(const Circuit& c, uint64_t seed) {
  Prg prg = Prg::from_seed(seed, "garble");
  FixedKeyHash hash;

  Block delta = prg.next_block();
  delta.lo |= 1;  // odd offset makes label color bits complementary

  std::vector<Block> zero(c.wire_bound());
  const uint32_t n_in = c.input_count();
  for (uint32_t i = 0; i < n_in; ++i) zero[i] = prg.next_block();

  GarbleOutput out;
  out.delta = delta;
  out.tables.and_rows.reserve(4 * c.and_count());
  out.tables.const_actives.reserve(c.const_gate_count());

  for (size_t g = 0; g < c.gates.size(); ++g) {
    const Gate& gate = c.gates[g];
    switch (gate.kind) {
      case GateKind::Xor:
        zero[gate.out] = zero[gate.a] ^ zero[gate.b];
        break;
      case GateKind::Inv:
        zero[gate.out] = zero[gate.a] ^ delta;
        break;
      case GateKind::Const0:
        zero[gate.out] = prg.next_block();
        out.tables.const_actives.push_back(zero[gate.out]);
        break;
      case GateKind::Const1:
        zero[gate.out] = prg.next_block();
        out.tables.const_actives.push_back(zero[gate.out] ^ delta);
        break;
      case GateKind::And: {
        const Block w0c = prg.next_block();
        zero[gate.out] = w0c;
        const uint8_t la = zero[gate.a].lsb();
        const uint8_t lb = zero[gate.b].lsb();
        Block rows[4];
        for (uint8_t ca = 0; ca < 2; ++ca) {
          for (uint8_t cb = 0; cb < 2; ++cb) {
            const uint8_t va = ca ^ la;  // truth value whose label has color ca
            const uint8_t vb = cb ^ lb;
            Block A = zero[gate.a];
            if (va) A ^= delta;
            Block B = zero[gate.b];
            if (vb) B ^= delta;
            Block C = w0c;
            if (va & vb) C ^= delta;
            rows[2 * ca + cb] = hash.h2(A, B, static_cast<uint64_t>(g)) ^ C;
          }
        }
        for (const Block& r : rows) out.tables.and_rows.push_back(r);
        break;
      }
    }
  }

  out.input_labels.assign(zero.begin(), zero.begin() + n_in);
  out.decode.entries.resize(c.outputs.size());
  for (size_t i = 0; i < c.outputs.size(); ++i) {
    const Block w0 = zero[c.outputs[i]];
    out.decode.entries[i] = {hash.h1(w0, i, kDecodeDomain),
                             hash.h1(w0 ^ delta, i, kDecodeDomain)};
  }
  return out;
}

std::vector<Block> evaluate_garbled(const Circuit& c, const GarbledTables& tables,
                                    const std::vector<Block>& input_labels) {
  if (input_labels.size() != c.input_count())
    throw InputLengthMismatch("expected one label per circuit input");
  if (tables.and_rows.size() != 4 * c.and_count())
    throw ProtocolViolation("garbled tables do not match the circuit's AND count");
  if (tables.const_actives.size() != c.const_gate_count())
    throw ProtocolViolation("constant labels do not match the circuit's CONST count");

  FixedKeyHash hash;
  std::vector<Block> label(c.wire_bound());
  for (size_t i = 0; i < input_labels.size(); ++i) label[i] = input_labels[i];

  size_t and_idx = 0;
  size_t const_idx = 0;
  for (size_t g = 0; g < c.gates.size(); ++g) {
    const Gate& gate = c.gates[g];
    switch (gate.kind) {
      case GateKind::Xor:
        label[gate.out] = label[gate.a] ^ label[gate.b];
        break;
      case GateKind::Inv:
        label[gate.out] = label[gate.a];
        break;
      case GateKind::Const0:
      case GateKind::Const1:
        label[gate.out] = tables.const_actives[const_idx++];
        break;
      case GateKind::And: {
        const Block& A = label[gate.a];
        const Block& B = label[gate.b];
        const size_t row = 2 * A.lsb() + B.lsb();
        label[gate.out] = tables.and_rows[4 * and_idx + row] ^
                          hash.h2(A, B, static_cast<uint64_t>(g));
        ++and_idx;
        break;
      }
    }
  }

  std::vector<Block> out(c.outputs.size());
  for (size_t i = 0; i < c.outputs.size(); ++i) out[i] = label[c.outputs[i]];
  return out;
}

std::vector<uint8_t> decode_outputs(const DecodeMap& decode,
                                    const std::vector<Block>& output_labels) {
  if (decode.entries.size() != output_labels.size())
    throw ProtocolViolation("decode map does not match the output count");
  FixedKeyHash hash;
  std::vector<uint8_t> bits(output_labels.size());
  for (size_t i = 0; i < output_labels.size(); ++i) {
    const Block h = hash.h1(output_labels[i], i, kDecodeDomain);
    if (h == decode.entries[i][0])
      bits[i] = 0;
    else if (h == decode.entries[i][1])
      bits[i] = 1;
    else
      throw DecodeFailure("output label matches neither decode entry");
  }
  return bits;
}

std::vector<uint8_t> serialize_blocks(const std::vector<Block>& blocks) {
  std::vector<uint8_t> out(16 * blocks.size());
  for (size_t i = 0; i < blocks.size(); ++i) blocks[i].to_bytes(out.data() + 16 * i);
  return out;
}

std::vector<Block> deserialize_blocks(const std::vector<uint8_t>& bytes) {
  if (bytes.size() % 16 != 0) throw ProtocolViolation("block payload length not a multiple of 16");
  std::vector<Block> out(bytes.size() / 16);
  for (size_t i = 0; i < out.size(); ++i) out[i] = Block::from_bytes(bytes.data() + 16 * i);
  return out;
}

}  // namespace mpsi
