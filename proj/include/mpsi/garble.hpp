#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mpsi/circuit.hpp"
#include "mpsi/crypto.hpp"

namespace mpsi {

// Garbled-circuit material produced by the generator. XOR gates are free
// (labels combine by XOR under a global offset delta with lsb 1), INV gates
// are free (the evaluator forwards the label unchanged), and every AND gate
// costs a four-row table indexed by the two input labels' color bits.
struct GarbledTables {
  std::vector<Block> and_rows;       // 4 rows per AND gate, in gate order
  std::vector<Block> const_actives;  // active label per CONST gate, in gate order
};

// Per output wire: hash of the 0-label and of the 1-label. The evaluator
// matches the hash of its active label against the pair to decode the bit.
struct DecodeMap {
  std::vector<std::array<Block, 2>> entries;
};

struct GarbleOutput {
  GarbledTables tables;
  DecodeMap decode;
  Block delta;                      // global offset; W1 = W0 ^ delta
  std::vector<Block> input_labels;  // 0-label per input wire (p1 then p2)
};

// Deterministic: the same circuit and seed always produce the same material.
GarbleOutput garble(const Circuit& c, uint64_t seed);

// Evaluator side: walks the gates with one active label per wire.
// input_labels must hold one label per circuit input (p1 then p2).
std::vector<Block> evaluate_garbled(const Circuit& c, const GarbledTables& tables,
                                    const std::vector<Block>& input_labels);

// Throws DecodeFailure when a label hash matches neither decode entry
// (corrupted tables, wrong labels, or a tampered transcript).
std::vector<uint8_t> decode_outputs(const DecodeMap& decode,
                                    const std::vector<Block>& output_labels);

std::vector<uint8_t> serialize_blocks(const std::vector<Block>& blocks);
std::vector<Block> deserialize_blocks(const std::vector<uint8_t>& bytes);

}  // namespace mpsi
