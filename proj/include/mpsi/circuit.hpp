#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpsi/errors.hpp"

namespace mpsi {

using WireId = uint32_t;
inline constexpr WireId kNoWire = 0xffffffffu;

// XOR/INV/CONST are free under the cost model; AND is the only paying gate.
enum class GateKind : uint8_t { Xor, And, Inv, Const0, Const1 };

struct Gate {
  GateKind kind;
  WireId a = kNoWire;  // first input (unused for CONST*)
  WireId b = kNoWire;  // second input (only XOR/AND)
  WireId out = kNoWire;
};

struct Circuit {
  uint32_t n_inputs_p1 = 0;
  uint32_t n_inputs_p2 = 0;
  std::vector<Gate> gates;
  std::vector<WireId> outputs;

  uint32_t input_count() const { return n_inputs_p1 + n_inputs_p2; }
  // one past the largest wire id in use
  uint32_t wire_bound() const;
  uint64_t and_count() const;
  uint64_t const_gate_count() const;
};

struct CircuitStats {
  uint64_t xor_count = 0;
  uint64_t and_count = 0;
  uint64_t inv_count = 0;
  uint64_t const_count = 0;
  uint64_t gate_count = 0;
  uint64_t wire_count = 0;
  uint64_t and_depth = 0;  // free gates contribute no depth
};

CircuitStats circuit_stats(const Circuit& c);

// AND gates within the half-open gate-index range [begin, end)
uint64_t and_count_in(const Circuit& c, size_t begin, size_t end);

// Evaluates on 0/1 values. Throws InputLengthMismatch unless
// inputs.size() == input_count(). Returns one byte per declared output.
std::vector<uint8_t> eval_plaintext(const Circuit& c, const std::vector<uint8_t>& inputs);

// Canonical text form:
//   CIRC v1 <n_inputs_p1> <n_inputs_p2> <n_outputs>
//   XOR a b -> c | AND a b -> c | INV a -> c | CONST0 -> c | CONST1 -> c
//   OUT c1 c2 ...
std::string serialize(const Circuit& c);
Circuit deserialize(const std::string& text);

// SHA-256 of the canonical text form, hex-encoded.
std::string circuit_hash_hex(const Circuit& c);

class CircuitBuilder {
 public:
  CircuitBuilder(uint32_t n_inputs_p1, uint32_t n_inputs_p2);

  WireId input_p1(uint32_t i) const;
  WireId input_p2(uint32_t i) const;

  WireId add_gate(GateKind kind, WireId a = kNoWire, WireId b = kNoWire);

  WireId xor_(WireId a, WireId b) { return add_gate(GateKind::Xor, a, b); }
  WireId and_(WireId a, WireId b) { return add_gate(GateKind::And, a, b); }
  WireId inv_(WireId a) { return add_gate(GateKind::Inv, a); }
  WireId xnor_(WireId a, WireId b) { return inv_(xor_(a, b)); }
  WireId or_(WireId a, WireId b) { return inv_(and_(inv_(a), inv_(b))); }

  // cached: repeated calls reuse the first constant gate
  WireId const0();
  WireId const1();

  void set_outputs(std::vector<WireId> outs);
  size_t gate_count() const { return circuit_.gates.size(); }
  uint32_t next_wire() const { return next_; }

  Circuit take();

 private:
  void check_defined(WireId w) const;

  Circuit circuit_;
  uint32_t next_;
  WireId cached_const0_ = kNoWire;
  WireId cached_const1_ = kNoWire;
  bool taken_ = false;
};

}  // namespace mpsi
