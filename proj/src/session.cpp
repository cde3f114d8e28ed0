#include "mpsi/session.hpp"

#include <cstring>

#include "mpsi/bits.hpp"
#include "mpsi/errors.hpp"
#include "mpsi/garble.hpp"

namespace mpsi {

namespace {

constexpr uint8_t kWireVersion = 1;

std::vector<uint8_t> hello_payload(SessionRole role, const TwopcConfig& cfg) {
  std::vector<uint8_t> p;
  p.push_back(kWireVersion);
  put_u32be(p, cfg.security.kappa);
  p.push_back(static_cast<uint8_t>(cfg.ot_mode));
  p.push_back(cfg.insecure_ot_allowed ? 1 : 0);
  p.push_back(static_cast<uint8_t>(role));
  put_u32be(p, cfg.party_index);
  put_u32be(p, cfg.bin_id);
  return p;
}

void check_peer_hello(const std::vector<uint8_t>& peer, SessionRole my_role,
                      const TwopcConfig& cfg) {
  if (peer.size() != 16) throw HandshakeMismatch("hello payload has wrong size");
  if (peer[0] != kWireVersion) throw HandshakeMismatch("wire protocol version mismatch");
  if (get_u32be(peer.data() + 1) != cfg.security.kappa)
    throw HandshakeMismatch("security parameter mismatch");
  if (peer[5] != static_cast<uint8_t>(cfg.ot_mode))
    throw HandshakeMismatch("OT mode mismatch");
  if (peer[6] != (cfg.insecure_ot_allowed ? 1 : 0))
    throw HandshakeMismatch("insecure OT allowance mismatch");
  const uint8_t expected_peer_role =
      my_role == SessionRole::Generator ? static_cast<uint8_t>(SessionRole::Evaluator)
                                        : static_cast<uint8_t>(SessionRole::Generator);
  if (peer[7] != expected_peer_role) throw HandshakeMismatch("both endpoints claim the same role");
  if (get_u32be(peer.data() + 12) != cfg.bin_id) throw HandshakeMismatch("bin id mismatch");
}

std::vector<uint8_t> pack_result_bits(const std::vector<uint8_t>& bits) {
  std::vector<uint8_t> payload;
  put_u32be(payload, static_cast<uint32_t>(bits.size()));
  const auto packed = pack_bits(bits);
  payload.insert(payload.end(), packed.begin(), packed.end());
  return payload;
}

std::vector<uint8_t> unpack_result_bits(const std::vector<uint8_t>& payload, size_t expected) {
  if (payload.size() < 4) throw ProtocolViolation("result frame has wrong size");
  const uint32_t count = get_u32be(payload.data());
  if (count != expected || payload.size() != 4 + (expected + 7) / 8)
    throw ProtocolViolation("result frame does not match the circuit's output count");
  return unpack_bits(payload.data() + 4, expected);
}

}  // namespace

SessionOutcome run_session(Channel& ch, SessionRole role, const Circuit& c,
                           const std::vector<uint8_t>& my_input_bits, const TwopcConfig& cfg) {
  if (cfg.ot_mode == OtMode::InsecureDealer && !cfg.insecure_ot_allowed)
    throw ConfigError("insecure OT mode requires explicit opt-in");
  if (cfg.security.kappa != 128) throw ConfigError("only 128-bit labels are supported");
  const size_t my_expected =
      role == SessionRole::Generator ? c.n_inputs_p1 : c.n_inputs_p2;
  if (my_input_bits.size() != my_expected)
    throw InputLengthMismatch("session input has " + std::to_string(my_input_bits.size()) +
                              " bits, circuit expects " + std::to_string(my_expected));
  for (uint8_t b : my_input_bits)
    if (b > 1) throw InputLengthMismatch("input bits must be 0 or 1");

  ch.send_frame(FrameType::Hello, hello_payload(role, cfg));
  check_peer_hello(ch.recv_expect(FrameType::Hello), role, cfg);

  const std::string hash_hex = circuit_hash_hex(c);
  ch.send_frame(FrameType::CircuitHash,
                std::vector<uint8_t>(hash_hex.begin(), hash_hex.end()));
  const auto peer_hash = ch.recv_expect(FrameType::CircuitHash);
  if (std::string(peer_hash.begin(), peer_hash.end()) != hash_hex)
    throw HandshakeMismatch("circuit hash mismatch: endpoints built different circuits");

  SessionOutcome outcome;
  if (role == SessionRole::Generator) {
    const GarbleOutput gb = garble(c, cfg.seed);

    std::vector<std::array<Block, 2>> ot_messages(c.n_inputs_p2);
    for (uint32_t j = 0; j < c.n_inputs_p2; ++j) {
      const Block w0 = gb.input_labels[c.n_inputs_p1 + j];
      ot_messages[j] = {w0, w0 ^ gb.delta};
    }
    ot_send(ch, ot_messages, cfg.ot_mode);

    ch.send_frame(FrameType::Tables, serialize_blocks(gb.tables.and_rows));

    std::vector<Block> label_blocks;
    label_blocks.reserve(c.n_inputs_p1 + gb.tables.const_actives.size());
    for (uint32_t i = 0; i < c.n_inputs_p1; ++i) {
      Block active = gb.input_labels[i];
      if (my_input_bits[i]) active ^= gb.delta;
      label_blocks.push_back(active);
    }
    label_blocks.insert(label_blocks.end(), gb.tables.const_actives.begin(),
                        gb.tables.const_actives.end());
    ch.send_frame(FrameType::Labels, serialize_blocks(label_blocks));

    std::vector<Block> decode_blocks;
    decode_blocks.reserve(2 * gb.decode.entries.size());
    for (const auto& e : gb.decode.entries) {
      decode_blocks.push_back(e[0]);
      decode_blocks.push_back(e[1]);
    }
    ch.send_frame(FrameType::Output, serialize_blocks(decode_blocks));

    outcome.output_bits = unpack_result_bits(ch.recv_expect(FrameType::Result),
                                             c.outputs.size());
  } else {
    const std::vector<Block> my_labels = ot_receive(ch, my_input_bits, cfg.ot_mode);

    GarbledTables tables;
    tables.and_rows = deserialize_blocks(ch.recv_expect(FrameType::Tables));

    const auto label_blocks = deserialize_blocks(ch.recv_expect(FrameType::Labels));
    const size_t const_count = c.const_gate_count();
    if (label_blocks.size() != c.n_inputs_p1 + const_count)
      throw ProtocolViolation("label frame does not match the circuit's shape");
    std::vector<Block> inputs(label_blocks.begin(), label_blocks.begin() + c.n_inputs_p1);
    inputs.insert(inputs.end(), my_labels.begin(), my_labels.end());
    tables.const_actives.assign(label_blocks.begin() + c.n_inputs_p1, label_blocks.end());

    const std::vector<Block> output_labels = evaluate_garbled(c, tables, inputs);

    const auto decode_blocks = deserialize_blocks(ch.recv_expect(FrameType::Output));
    if (decode_blocks.size() != 2 * c.outputs.size())
      throw ProtocolViolation("decode frame does not match the circuit's output count");
    DecodeMap decode;
    decode.entries.resize(c.outputs.size());
    for (size_t i = 0; i < c.outputs.size(); ++i)
      decode.entries[i] = {decode_blocks[2 * i], decode_blocks[2 * i + 1]};

    outcome.output_bits = decode_outputs(decode, output_labels);
    ch.send_frame(FrameType::Result, pack_result_bits(outcome.output_bits));
  }

  outcome.stats = ch.stats();
  return outcome;
}

std::vector<uint8_t> cleartext_session(const Circuit& c, const std::vector<uint8_t>& p1_bits,
                                       const std::vector<uint8_t>& p2_bits) {
  std::vector<uint8_t> combined;
  combined.reserve(p1_bits.size() + p2_bits.size());
  combined.insert(combined.end(), p1_bits.begin(), p1_bits.end());
  combined.insert(combined.end(), p2_bits.begin(), p2_bits.end());
  return eval_plaintext(c, combined);
}

}  // namespace mpsi
