#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpsi/circuit.hpp"
#include "mpsi/crypto.hpp"
#include "mpsi/hashing.hpp"

namespace mpsi {

// How the intersection is computed.
enum class Mode {
  Mbwa,         // bitwise AND over characteristic vectors
  Mscs,         // merge / compare / shuffle over sorted lists
  HashingMscs,  // permutation hashing into bins, one small Mscs per bin
};

// What the parties learn.
enum class FunctionKind {
  BitVector,       // characteristic vector of the intersection (Mbwa only)
  Cardinality,     // |intersection| only
  RevealShuffled,  // the intersection elements, in shuffled record order
};

// Output record encoding for the compare stage.
enum class Variant {
  Masked,  // record = value AND-masked by the match bit; zero is reserved
  Robust,  // record = explicit match bit followed by the masked value
};

const char* mode_name(Mode m);
const char* function_name(FunctionKind f);
const char* variant_name(Variant v);
Mode parse_mode(const std::string& s);
FunctionKind parse_function(const std::string& s);
Variant parse_variant(const std::string& s);

// Module-level compatibility rules (session policy such as the minimum party
// count for a live run is enforced by the CLI on top of this).
void validate_protocol_choice(Mode mode, FunctionKind f, Variant v, uint32_t m, uint32_t sigma);

// Sorts, rejects duplicates and out-of-domain elements (valid domain is
// [0, 2^sigma - 2]; the all-ones word is the merge sentinel). The Masked
// variant of the plain list protocol additionally reserves 0 for "no match".
std::vector<uint64_t> normalize_input_set(std::vector<uint64_t> set, uint32_t sigma, Mode mode,
                                          Variant v);

// XOR secret shares of an input, bit-addressable (one byte per bit).
struct SharePair {
  std::vector<uint8_t> to_p1;
  std::vector<uint8_t> to_p2;
};

// Sorts the words ascending, then XOR-splits them position by position, so
// both share lists carry the sorted order. Rejects duplicates and words
// outside [0, 2^width - 2]. Bit layout: word-major, most-significant bit
// first.
SharePair share_sorted_set(const std::vector<uint64_t>& words, uint32_t width, Prg& prg);

// Shares the characteristic vector over [0, 2^sigma); bit i <=> element i.
SharePair share_bitvector(const std::vector<uint64_t>& set, uint32_t sigma, Prg& prg);

// Half-open gate-index range of one pipeline stage.
struct StageSpan {
  size_t begin = 0;
  size_t end = 0;
};

// A complete two-input circuit for the chosen protocol, together with the
// layout metadata needed to assemble inputs and read back outputs.
//
// Input layout for each computing party's side: the m parties' share halves
// in party order (share_bits_per_party() bits each), then that computing
// party's own shuffle control bits (controls_per_party, RevealShuffled only).
struct ProtocolCircuit {
  Circuit circuit;
  Mode mode = Mode::Mscs;
  FunctionKind f = FunctionKind::RevealShuffled;
  Variant variant = Variant::Robust;
  uint32_t m = 0;
  uint64_t n = 0;      // per-party list length (set size, or bin capacity)
  uint32_t width = 0;  // word width through the merge (element width for Mbwa)
  StageSpan reconstruct_stage;
  StageSpan merge_stage;
  StageSpan compare_stage;
  StageSpan output_stage;
  uint32_t record_width = 0;        // shuffled record width (RevealShuffled only)
  uint32_t controls_per_party = 0;  // shuffle control bits per computing party

  uint64_t share_bits_per_party() const;
  uint64_t side_input_bits() const { return m * share_bits_per_party() + controls_per_party; }
};

ProtocolCircuit build_mbwa(uint32_t m, uint32_t sigma);
ProtocolCircuit build_mscs(uint32_t m, uint64_t n, uint32_t width, FunctionKind f, Variant v);

// One bin of the hashing protocol: a plain merge/compare pipeline over the
// bin records (flag bit followed by the stored remainder), list length =
// bin capacity.
ProtocolCircuit build_hashing_bin_circuit(uint32_t m, const BinLayout& layout, FunctionKind f,
                                          Variant v);

// Number of compare windows that would report a match purely from the
// all-ones padding sentinels (zero for this window placement; computed by
// simulation rather than assumed).
uint64_t sentinel_window_matches(uint32_t m, uint64_t n);

std::vector<uint8_t> random_control_bits(uint32_t count, Prg& prg);

// Concatenates the m share halves destined for one computing party with that
// party's own control bits, in circuit input order.
std::vector<uint8_t> assemble_side_input(const ProtocolCircuit& pc,
                                         const std::vector<std::vector<uint8_t>>& share_halves,
                                         const std::vector<uint8_t>& controls);

struct OutputContext {
  Mode mode = Mode::Mscs;
  FunctionKind f = FunctionKind::RevealShuffled;
  Variant variant = Variant::Robust;
  uint32_t m = 0;
  uint64_t n = 0;
  uint32_t width = 0;
  uint64_t sentinel_matches = 0;
  const BinLayout* layout = nullptr;  // required for HashingMscs
  uint32_t bin_index = 0;
};

// Context matching a built circuit; for HashingMscs the caller still has to
// point `layout` at the live BinLayout and set `bin_index` per session.
OutputContext output_context(const ProtocolCircuit& pc);

struct ProtocolResult {
  std::vector<uint64_t> elements;  // sorted; empty when has_elements is false
  uint64_t cardinality = 0;
  bool has_elements = true;
};

// Decodes raw output bits (one byte per bit, circuit output order).
ProtocolResult interpret_output(const std::vector<uint8_t>& bits, const OutputContext& ctx);

}  // namespace mpsi
