#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mpsi/gadgets.hpp"

namespace mpsi {

// Compare-exchange schedule that sorts any k-bitonic sequence of length n
// (n a power of two). Pairs are (lo, hi): min goes to lo, max to hi.
struct ComparatorSchedule {
  uint32_t n = 0;
  uint32_t k = 0;
  std::vector<std::pair<uint32_t, uint32_t>> pairs;
};

ComparatorSchedule kbs_schedule(uint32_t n, uint32_t k);

// Closed form (n/4)*log2(n)*log2(n/2) + n - 1 for power-of-two n.
uint64_t comparator_count(uint32_t n);

// Merges m sorted lists of sigma-bit words into one sorted sequence.
// Odd-indexed lists are reversed by wiring; the concatenation is padded with
// all-ones sentinel words to the next power of two (as an extension of the
// last list, so it stays a union of m monotone runs). Returns the padded,
// sorted sequence. If debug_values is given, each list is checked to be
// strictly compatible with ascending order (throws UnsortedInput).
std::vector<Word> emit_merge_network(CircuitBuilder& b, const std::vector<std::vector<Word>>& lists,
                                     const std::vector<std::vector<uint64_t>>* debug_values = nullptr);

}  // namespace mpsi
