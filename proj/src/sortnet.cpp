#include "mpsi/sortnet.hpp"

#include <algorithm>

#include "mpsi/bits.hpp"

namespace mpsi {

namespace {

// Recursive generator: sort even- and odd-position subsequences, exchange
// pairs (2i, 2i+1), then run log-many strided exchange stages
// (2i+1, 2i+2*delta). The first stage (delta = n/2) is vacuous for
// power-of-two n, which is why the d-reduction for n <= 2k never changes the
// emitted schedule here.
void kbs_rec(uint32_t n, uint32_t k, uint32_t base, uint32_t stride,
             std::vector<std::pair<uint32_t, uint32_t>>& out) {
  if (n <= 1) return;
  kbs_rec(n / 2, k, base, stride * 2, out);               // even positions
  kbs_rec(n / 2, k, base + stride, stride * 2, out);      // odd positions
  for (uint32_t i = 0; i < n / 2; ++i)                    // pair-up stage
    out.emplace_back(base + stride * (2 * i), base + stride * (2 * i + 1));
  uint32_t d = log2_exact(next_pow2(n));
  if (n <= 2 * k && d > 0) --d;
  for (uint32_t t = 1; t <= d; ++t) {
    uint32_t delta = 1u << (d - t);
    for (uint32_t i = 0; i + delta < n / 2; ++i)
      out.emplace_back(base + stride * (2 * i + 1), base + stride * (2 * (i + delta)));
  }
}

}  // namespace

ComparatorSchedule kbs_schedule(uint32_t n, uint32_t k) {
  if (!is_pow2(n)) throw NotPowerOfTwo("schedule length " + std::to_string(n) + " is not a power of two");
  if (k == 0) throw Error("k must be positive");
  ComparatorSchedule s;
  s.n = n;
  s.k = k;
  kbs_rec(n, k, 0, 1, s.pairs);
  return s;
}

uint64_t comparator_count(uint32_t n) {
  if (!is_pow2(n)) throw NotPowerOfTwo("count defined for power-of-two n");
  if (n == 1) return 0;
  uint64_t lg = log2_exact(n);
  return (uint64_t(n) / 4) * lg * (lg - 1) + n - 1;
}

std::vector<Word> emit_merge_network(CircuitBuilder& b, const std::vector<std::vector<Word>>& lists,
                                     const std::vector<std::vector<uint64_t>>* debug_values) {
  if (lists.empty()) throw WidthMismatch("no input lists");
  const uint32_t m = static_cast<uint32_t>(lists.size());
  uint32_t sigma = 0;
  uint64_t total = 0;
  for (const auto& l : lists) {
    total += l.size();
    for (const Word& w : l) {
      if (sigma == 0) sigma = w.width();
      if (w.width() != sigma || sigma == 0) throw WidthMismatch("inconsistent word widths");
    }
  }
  if (total == 0) throw WidthMismatch("no input words");

  if (debug_values) {
    if (debug_values->size() != lists.size()) throw UnsortedInput("debug value shape mismatch");
    for (size_t i = 0; i < lists.size(); ++i) {
      const auto& v = (*debug_values)[i];
      if (v.size() != lists[i].size()) throw UnsortedInput("debug value shape mismatch");
      for (size_t j = 1; j < v.size(); ++j)
        if (v[j - 1] > v[j])
          throw UnsortedInput("list " + std::to_string(i) + " not ascending at position " + std::to_string(j));
    }
  }

  const uint32_t n_padded = static_cast<uint32_t>(next_pow2(total));
  const uint64_t pad = n_padded - total;
  if (!is_pow2(n_padded)) throw NotPowerOfTwo("internal padding bug");

  Word sentinel;
  if (pad > 0) {
    WireId ones = b.const1();
    sentinel.bits.assign(sigma, ones);
  }

  std::vector<Word> flat;
  flat.reserve(n_padded);
  for (uint32_t i = 0; i < m; ++i) {
    std::vector<Word> seq = lists[i];
    if (i == m - 1)
      for (uint64_t j = 0; j < pad; ++j) seq.push_back(sentinel);
    if (i % 2 == 1) std::reverse(seq.begin(), seq.end());
    for (auto& w : seq) flat.push_back(std::move(w));
  }

  const uint32_t k = (m + 1) / 2;
  ComparatorSchedule sched = kbs_schedule(n_padded, k);
  for (auto [lo, hi] : sched.pairs) {
    auto [mn, mx] = sorter2(b, flat[lo], flat[hi]);
    flat[lo] = std::move(mn);
    flat[hi] = std::move(mx);
  }
  return flat;
}

}  // namespace mpsi
