#pragma once

#include <span>
#include <vector>

#include "mpsi/circuit.hpp"

namespace mpsi {

// A sigma-bit word as circuit wires, most-significant bit first.
struct Word {
  std::vector<WireId> bits;
  uint32_t width() const { return static_cast<uint32_t>(bits.size()); }
};

Word constant_word(CircuitBuilder& b, uint64_t value, uint32_t width);

// a > b as unsigned big-endian integers; sigma AND gates
WireId comparator_gt(CircuitBuilder& b, const Word& a, const Word& w);

// (c ? (y, x) : (x, y)); sigma AND gates
std::pair<Word, Word> cond_swap(CircuitBuilder& b, WireId c, const Word& x, const Word& y);

// (min, max); 2*sigma AND gates
std::pair<Word, Word> sorter2(CircuitBuilder& b, const Word& x, const Word& y);

// 1 iff x == y; sigma-1 AND gates
WireId equality(CircuitBuilder& b, const Word& x, const Word& y);

// bitwise c AND v; sigma AND gates
Word select_masked(CircuitBuilder& b, WireId c, const Word& v);

struct DupSelect {
  WireId indicator;
  Word value;
};

// Window of 2m-1 sorted elements: detects a run of m equal values and selects
// the common element (the window centre e_{m-1}). (m+1)*sigma - 1 AND gates.
DupSelect dup_select_window(CircuitBuilder& b, std::span<const Word> elems, uint32_t m);

// Final window of exactly m elements; 2*sigma - 1 AND gates.
DupSelect dup_select_final(CircuitBuilder& b, std::span<const Word> elems, uint32_t m);

// Binary counter over indicator bits; output width is exactly
// ceil(log2(count+1)), most-significant bit first.
Word popcount_tail(CircuitBuilder& b, std::span<const WireId> indicators);

}  // namespace mpsi
