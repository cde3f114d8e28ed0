#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "mpsi/crypto.hpp"
#include "mpsi/errors.hpp"

namespace mpsi {

// Splits x = x_L || x_R (x_L the log2(beta) high bits) and places x in bin
// x_L ^ f(x_R), storing only x_R. Two elements agreeing on (bin, stored) are
// equal, so per-bin comparisons lose nothing.
std::pair<uint32_t, uint64_t> perm_hash(uint64_t x, uint32_t sigma, uint32_t beta,
                                        const std::function<uint64_t(uint64_t)>& f);

// Public per-protocol bin schema; identical at every party.
class BinLayout {
 public:
  // beta must be a power of two; capacity is the per-bin slot count B.
  BinLayout(uint32_t sigma, uint32_t beta, uint32_t capacity, uint64_t prf_seed);

  uint32_t sigma() const { return sigma_; }
  uint32_t beta() const { return beta_; }
  uint32_t log2_beta() const { return log2_beta_; }
  uint32_t capacity() const { return capacity_; }
  uint32_t sigma_stored() const { return sigma_ - log2_beta_; }
  // record width inside a bin circuit: stored bits plus the real/dummy flag
  uint32_t record_width() const { return sigma_stored() + 1; }
  uint64_t prf_seed() const { return prf_seed_; }

  uint64_t prf(uint64_t x_r) const;  // keyed PRF into [0, beta)
  std::pair<uint32_t, uint64_t> place(uint64_t x) const;
  // inverse of place() for a real stored value
  uint64_t reconstruct(uint32_t bin, uint64_t stored) const;

  // layout derived from the failure analysis: b = smallest integer load
  // bound for (gamma, delta), beta = pow2floor(n/b) (min 1), b recomputed as
  // n/beta, capacity B = ceil((1+delta)*b)
  static BinLayout from_params(uint32_t sigma, uint64_t n, double gamma, double delta, uint64_t prf_seed);

 private:
  uint32_t sigma_, beta_, log2_beta_, capacity_;
  uint64_t prf_seed_;
  std::shared_ptr<Aes128> prf_aes_;
};

// One party's bins. Records are (flag || payload) of width sigma_stored+1:
// real elements carry flag 0 and payload x_R; padding dummies carry flag 1
// and a party-unique id, so dummies never match across parties and never
// collide with the all-ones sentinel. Each bin is sorted ascending.
struct PartyBins {
  std::vector<std::vector<uint64_t>> bins;
};

PartyBins build_bins(const std::vector<uint64_t>& set, const BinLayout& layout, uint32_t party_index,
                     uint32_t m);

// Union bound m * (n/b) * exp(-delta^2 b / 3) on any-bin overflow.
double failure_bound(uint32_t m, uint64_t n, uint64_t b, double delta);
// log2 of the simplified single-party form 2^(-delta^2 b/3 + log2 n)
double failure_bound_simplified_log2(uint64_t n, uint64_t b, double delta);

// Smallest integer b with b > 3*(log2(n) + gamma) / delta^2.
uint64_t min_bin_capacity(double gamma, uint64_t n, double delta);

// sigma * (mn/2 * log2(mn)^2 + 8mn/3 + n) — non-free gate upper bound for one
// m-party comparison circuit over n elements of sigma bits.
double gate_upper_bound(uint32_t m, double n, double sigma);

struct OptimizeResult {
  double delta = 0;
  uint64_t b = 0;
  uint32_t beta = 1;
  uint64_t capacity = 0;  // B
  uint32_t sigma_stored = 0;
  // objective: beta * gate_upper_bound(m, B, sigma') / n
  double gates_per_element = 0;
  // same bound evaluated at the ideal load b instead of the padded capacity
  // B, per element of a bin: gate_upper_bound(m, b, sigma') / b
  double gates_per_element_ideal = 0;
};

// Grid search over delta in (0,1] and admissible b >= min_bin_capacity.
OptimizeResult optimize_params(uint32_t m, uint64_t n, uint32_t sigma, double gamma);

// Published operating points for three parties at statistical level 40,
// printed next to optimizer output for comparison.
struct ReferenceRow {
  uint32_t log2_n;
  uint32_t sigma;
  uint64_t b;
  double delta;
  double gates_per_element;
};

const std::vector<ReferenceRow>& reference_rows();

}  // namespace mpsi
