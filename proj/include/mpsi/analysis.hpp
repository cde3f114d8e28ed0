#pragma once

#include <cstdint>

#include "mpsi/hashing.hpp"
#include "mpsi/protocol.hpp"

namespace mpsi {

// Closed-form AND-gate counts per pipeline stage, matching the generated
// circuits gate for gate. `width` is the element width fed to the sorter
// (sigma for the plain pipeline, the stored remainder width inside a bin).
struct StageCostEstimate {
  uint64_t reconstruct_ands = 0;  // share recombination is XOR-only
  uint64_t merge_ands = 0;
  uint64_t compare_ands = 0;
  uint64_t output_ands = 0;
  uint64_t total() const { return reconstruct_ands + merge_ands + compare_ands + output_ands; }
};

// Exact AND count of the binary counter over n indicator bits.
uint64_t counter_tree_ands(uint64_t n);

// Width of a shuffled record: the masked value alone, or flag plus value.
uint32_t record_width_for(uint32_t width, Variant v);

// One sorted-run intersection circuit over m lists of n `width`-bit words.
StageCostEstimate estimate_plain(uint32_t m, uint64_t n, uint32_t width, FunctionKind f,
                                 Variant v);

// Sum over beta parallel bin circuits, each an m-list intersection of
// `capacity` records. `bin_width` is the merge width inside a bin: the
// stored remainder bits, plus the real/dummy flag for the robust variant.
StageCostEstimate estimate_hashing(uint32_t m, uint64_t beta, uint64_t capacity,
                                   uint32_t bin_width, FunctionKind f, Variant v);

}  // namespace mpsi
