#include "mpsi/hashing.hpp"

#include <algorithm>
#include <cmath>

#include "mpsi/bits.hpp"

namespace mpsi {

std::pair<uint32_t, uint64_t> perm_hash(uint64_t x, uint32_t sigma, uint32_t beta,
                                        const std::function<uint64_t(uint64_t)>& f) {
  if (!is_pow2(beta)) throw DomainViolation("beta must be a power of two");
  if (sigma == 0 || sigma > 63) throw DomainViolation("sigma out of range");
  if (x >> sigma) throw DomainViolation("element wider than sigma bits");
  const uint32_t lb = log2_exact(beta);
  if (lb >= sigma) throw DomainViolation("beta consumes the whole element");
  const uint64_t x_r = x & ((uint64_t(1) << (sigma - lb)) - 1);
  const uint64_t x_l = x >> (sigma - lb);
  const uint32_t bin = static_cast<uint32_t>((x_l ^ f(x_r)) & (beta - 1));
  return {bin, x_r};
}

BinLayout::BinLayout(uint32_t sigma, uint32_t beta, uint32_t capacity, uint64_t prf_seed)
    : sigma_(sigma), beta_(beta), capacity_(capacity), prf_seed_(prf_seed) {
  if (!is_pow2(beta)) throw DomainViolation("beta must be a power of two");
  if (sigma == 0 || sigma > 63) throw DomainViolation("sigma out of range");
  log2_beta_ = log2_exact(beta);
  if (log2_beta_ >= sigma) throw DomainViolation("beta consumes the whole element");
  if (capacity == 0) throw DomainViolation("zero bin capacity");
  auto digest = sha256("mpsi bin prf v1|" + std::to_string(prf_seed));
  prf_aes_ = std::make_shared<Aes128>(Block::from_bytes(digest.data()));
}

uint64_t BinLayout::prf(uint64_t x_r) const {
  if (beta_ == 1) return 0;
  Block out = prf_aes_->encrypt(Block{x_r, 0});
  return out.lo & (beta_ - 1);
}

std::pair<uint32_t, uint64_t> BinLayout::place(uint64_t x) const {
  return perm_hash(x, sigma_, beta_, [this](uint64_t xr) { return prf(xr); });
}

uint64_t BinLayout::reconstruct(uint32_t bin, uint64_t stored) const {
  const uint64_t x_l = (uint64_t(bin) ^ prf(stored)) & (beta_ - 1);
  return (x_l << sigma_stored()) | stored;
}

BinLayout BinLayout::from_params(uint32_t sigma, uint64_t n, double gamma, double delta, uint64_t prf_seed) {
  const uint64_t b0 = min_bin_capacity(gamma, n, delta);
  uint64_t beta = n >= b0 ? pow2_floor(n / b0) : 1;
  if (beta == 0) beta = 1;
  const uint64_t b = (n + beta - 1) / beta;  // recomputed ideal load
  const uint64_t cap = static_cast<uint64_t>(std::ceil((1.0 + delta) * double(b)));
  if (beta > 0xffffffffull || cap > 0xffffffffull) throw DomainViolation("layout out of range");
  return BinLayout(sigma, static_cast<uint32_t>(beta), static_cast<uint32_t>(cap), prf_seed);
}

PartyBins build_bins(const std::vector<uint64_t>& set, const BinLayout& layout, uint32_t party_index,
                     uint32_t m) {
  if (party_index == 0 || party_index > m) throw DomainViolation("party index out of range");
  const uint32_t sp = layout.sigma_stored();
  const uint64_t B = layout.capacity();
  // party-unique dummy ids must fit below the all-ones payload
  if (sp >= 63 || uint64_t(m) * B >= (uint64_t(1) << sp))
    throw Infeasible("m*B dummies do not fit in " + std::to_string(sp) + " stored bits");

  const uint64_t max_element = (uint64_t(1) << layout.sigma()) - 2;
  PartyBins out;
  out.bins.assign(layout.beta(), {});
  std::vector<uint8_t> seen_guard;
  std::vector<uint64_t> sorted = set;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] > max_element) throw DomainViolation("element exceeds 2^sigma - 2");
    if (i > 0 && sorted[i] == sorted[i - 1]) throw DuplicateElement("duplicate element in input set");
  }
  for (uint64_t x : set) {
    auto [bin, stored] = layout.place(x);
    if (out.bins[bin].size() >= B)
      throw BinOverflow("bin " + std::to_string(bin) + " exceeds capacity " + std::to_string(B));
    out.bins[bin].push_back(stored);  // flag 0 || x_R
  }
  const uint64_t flag = uint64_t(1) << sp;
  for (uint32_t bin = 0; bin < layout.beta(); ++bin) {
    auto& records = out.bins[bin];
    uint64_t t = records.size();
    while (records.size() < B) {
      records.push_back(flag | (uint64_t(party_index - 1) * B + t));
      ++t;
    }
    std::sort(records.begin(), records.end());
  }
  return out;
}

double failure_bound(uint32_t m, uint64_t n, uint64_t b, double delta) {
  return double(m) * (double(n) / double(b)) * std::exp(-delta * delta * double(b) / 3.0);
}

double failure_bound_simplified_log2(uint64_t n, uint64_t b, double delta) {
  return -delta * delta * double(b) / 3.0 + std::log2(double(n));
}

uint64_t min_bin_capacity(double gamma, uint64_t n, double delta) {
  if (delta <= 0) throw DomainViolation("delta must be positive");
  const double bound = 3.0 * (std::log2(double(n)) + gamma) / (delta * delta);
  return static_cast<uint64_t>(std::floor(bound)) + 1;
}

double gate_upper_bound(uint32_t m, double n, double sigma) {
  const double mn = double(m) * n;
  const double lg = mn >= 1 ? std::log2(mn) : 0.0;
  return sigma * (mn / 2.0 * lg * lg + 8.0 * mn / 3.0 + n);
}

OptimizeResult optimize_params(uint32_t m, uint64_t n, uint32_t sigma, double gamma) {
  if (n == 0) throw Infeasible("empty set");
  if (sigma == 0 || sigma > 63 || (sigma < 63 && n > (uint64_t(1) << sigma) - 1))
    throw Infeasible("cannot draw " + std::to_string(n) + " distinct elements from " +
                     std::to_string(sigma) + "-bit domain");
  bool found = false;
  OptimizeResult best;
  double best_ideal = 0.0;
  for (int dstep = 1; dstep <= 100; ++dstep) {
    const double delta = dstep / 100.0;
    const uint64_t b_min = min_bin_capacity(gamma, n, delta);
    // distinct beta classes; the cheapest b within a class is the smallest
    uint64_t beta_cap = n >= b_min ? pow2_floor(n / b_min) : 1;
    if (beta_cap == 0) beta_cap = 1;
    for (uint64_t beta = 1; beta <= beta_cap; beta *= 2) {
      const uint32_t lb = log2_exact(beta);
      if (lb + 1 > sigma) break;  // need sigma' >= 1
      // smallest b with pow2floor(n/b) == beta; beta bins of that size hold the set
      const uint64_t b = std::max(b_min, n / (2 * beta) + 1);
      if (n / b < beta) continue;
      const double B = std::ceil((1.0 + delta) * double(b));
      const double sp = double(sigma - lb);
      const double cost = double(beta) * gate_upper_bound(m, B, sp) / double(n);
      // per-element cost at the bare load bound, before padding and the
      // power-of-two rounding of the bin count
      const double ideal = gate_upper_bound(m, double(b), sp) / double(b);
      if (!found || ideal < best_ideal) best_ideal = ideal;
      if (!found || cost < best.gates_per_element) {
        best.delta = delta;
        best.b = b;
        best.beta = static_cast<uint32_t>(beta);
        best.capacity = static_cast<uint64_t>(B);
        best.sigma_stored = sigma - lb;
        best.gates_per_element = cost;
      }
      found = true;
    }
  }
  if (!found) throw Infeasible("no admissible (delta, b) point");
  best.gates_per_element_ideal = best_ideal;
  return best;
}

const std::vector<ReferenceRow>& reference_rows() {
  static const std::vector<ReferenceRow> rows = {
      {8, 12, 292, 0.82, 1470},  {8, 16, 292, 0.72, 1932},  {8, 20, 292, 0.67, 2387},
      {12, 16, 316, 0.81, 1514}, {12, 20, 316, 0.71, 1983}, {12, 24, 316, 0.66, 2447},
      {16, 20, 341, 0.80, 1554}, {16, 24, 341, 0.71, 2032}, {16, 28, 341, 0.65, 2503},
      {24, 28, 389, 0.78, 1629}, {24, 32, 389, 0.69, 2121}, {32, 36, 438, 0.77, 1697},
      {32, 40, 438, 0.68, 2201},
  };
  return rows;
}

}  // namespace mpsi
