#include "mpsi/analysis.hpp"

#include "mpsi/bits.hpp"

namespace mpsi {

namespace {

// Comparators in the bitonic merge of a power-of-two sequence:
// (n/4) * log2(n) * (log2(n) - 1) + n - 1. Wide-integer twin of the
// schedule-backed count so estimates work beyond 32-bit sizes.
uint64_t merge_comparator_count(uint64_t n_pow2) {
  if (n_pow2 <= 1) return 0;
  const uint64_t lg = log2_exact(n_pow2);
  return (n_pow2 / 4) * lg * (lg - 1) + n_pow2 - 1;
}

// Wide-integer twin of the switch-layout count.
uint64_t shuffle_switch_count(uint64_t n) {
  if (n <= 1) return 0;
  if (n == 2) return 1;
  const uint64_t h = n / 2;
  const bool odd = n & 1;
  return h + (odd ? h : h - 1) + shuffle_switch_count(h) + shuffle_switch_count(h + odd);
}

// The binary counter combines partial counts pairwise; its AND count depends
// only on the operand widths, so the whole tree can be costed by tracking
// counter shapes instead of emitting wires.
struct CounterShape {
  uint32_t width = 0;
  uint64_t max = 0;
};

uint64_t add_shape_ands(const CounterShape& x, const CounterShape& y, CounterShape& out) {
  out.max = x.max + y.max;
  out.width = bit_width_for(out.max);
  uint64_t ands = 0;
  bool carry = false;
  for (uint32_t i = 0; i < out.width; ++i) {
    const bool a = i < x.width;
    const bool c = i < y.width;
    if (a && c) {  // half or full adder: one AND either way
      ++ands;
      carry = true;
    } else if (a || c) {  // single operand bit; carry propagates if present
      if (carry) ++ands;
    } else {  // position holds the pending carry alone
      carry = false;
    }
  }
  return ands;
}

}  // namespace

uint64_t counter_tree_ands(uint64_t n) {
  if (n == 0) return 0;
  // Invariant per level: a run of identical shapes plus at most one odd tail,
  // exactly mirroring the pairwise combine order of the generated counter.
  uint64_t ands = 0;
  CounterShape run{1, 1};
  uint64_t run_count = n;
  bool has_tail = false;
  CounterShape tail{};
  while (run_count + (has_tail ? 1 : 0) > 1) {
    CounterShape combined;
    const uint64_t pairs = run_count / 2;
    if (pairs > 0)
      ands += pairs * add_shape_ands(run, run, combined);
    else
      combined = run;  // lone run element pairs with the tail below
    if (run_count % 2 == 1) {
      if (has_tail) {
        CounterShape merged;
        ands += add_shape_ands(run, tail, merged);
        tail = merged;
      } else {
        tail = run;
        has_tail = true;
      }
    }
    run = combined;
    run_count = pairs;
    if (run_count == 0 && has_tail) {
      run = tail;
      run_count = 1;
      has_tail = false;
    }
  }
  return ands;
}

uint32_t record_width_for(uint32_t width, Variant v) {
  return v == Variant::Robust ? width + 1 : width;
}

StageCostEstimate estimate_plain(uint32_t m, uint64_t n, uint32_t width, FunctionKind f,
                                 Variant v) {
  StageCostEstimate e;
  if (n == 0) return e;
  const uint64_t w = width;
  e.reconstruct_ands = 0;  // share recombination is XOR-only
  e.merge_ands = 2 * w * merge_comparator_count(next_pow2(m * n));
  e.compare_ands = ((m + 1) * w - 1) * (n - 1) + (2 * w - 1);
  switch (f) {
    case FunctionKind::Cardinality:
      e.output_ands = counter_tree_ands(n);
      break;
    case FunctionKind::RevealShuffled:
      e.output_ands = 2 * shuffle_switch_count(n) * record_width_for(width, v);
      break;
    case FunctionKind::BitVector:
      throw ConfigError("bit-vector output has no sorted-run pipeline");
  }
  return e;
}

StageCostEstimate estimate_hashing(uint32_t m, uint64_t beta, uint64_t capacity,
                                   uint32_t bin_width, FunctionKind f, Variant v) {
  const StageCostEstimate bin = estimate_plain(m, capacity, bin_width, f, v);
  StageCostEstimate e;
  e.reconstruct_ands = beta * bin.reconstruct_ands;
  e.merge_ands = beta * bin.merge_ands;
  e.compare_ands = beta * bin.compare_ands;
  e.output_ands = beta * bin.output_ands;
  return e;
}

}  // namespace mpsi
