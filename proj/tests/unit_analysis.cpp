#include <vector>

#include "doctest.h"
#include "mpsi/analysis.hpp"
#include "mpsi/circuit.hpp"
#include "mpsi/gadgets.hpp"
#include "mpsi/hashing.hpp"
#include "mpsi/protocol.hpp"

using namespace mpsi;

namespace {

// Independent reference: actually build the counter and count its AND gates.
uint64_t counter_ands_by_construction(uint64_t n) {
  CircuitBuilder b(n, 0);
  std::vector<WireId> ind;
  for (uint64_t i = 0; i < n; ++i) ind.push_back(b.input_p1(i));
  const Word w = popcount_tail(b, ind);
  b.set_outputs(w.bits);
  return b.take().and_count();
}

}  // namespace

TEST_CASE("counter cost equals the built counter") {
  for (uint64_t n = 1; n <= 128; ++n) {
    CAPTURE(n);
    CHECK(counter_tree_ands(n) == counter_ands_by_construction(n));
  }
  CHECK(counter_tree_ands(1000) == counter_ands_by_construction(1000));
}

TEST_CASE("record width per variant") {
  CHECK(record_width_for(12, Variant::Robust) == 13);
  CHECK(record_width_for(12, Variant::Masked) == 12);
}

TEST_CASE("plain pipeline estimate matches generated circuits stage by stage") {
  for (uint32_t m : {3u, 4u, 5u}) {
    for (uint64_t n : {4ull, 8ull, 16ull}) {
      for (uint32_t sigma : {8u, 12u}) {
        for (FunctionKind f : {FunctionKind::Cardinality, FunctionKind::RevealShuffled}) {
          for (Variant v : {Variant::Robust, Variant::Masked}) {
            CAPTURE(m);
            CAPTURE(n);
            CAPTURE(sigma);
            const StageCostEstimate est = estimate_plain(m, n, sigma, f, v);
            const ProtocolCircuit pc = build_mscs(m, n, sigma, f, v);
            const Circuit& c = pc.circuit;
            CHECK(est.reconstruct_ands ==
                  and_count_in(c, pc.reconstruct_stage.begin, pc.reconstruct_stage.end));
            CHECK(est.merge_ands == and_count_in(c, pc.merge_stage.begin, pc.merge_stage.end));
            CHECK(est.compare_ands ==
                  and_count_in(c, pc.compare_stage.begin, pc.compare_stage.end));
            CHECK(est.output_ands ==
                  and_count_in(c, pc.output_stage.begin, pc.output_stage.end));
            CHECK(est.total() == c.and_count());
          }
        }
      }
    }
  }
}

TEST_CASE("hashed pipeline estimate is beta copies of the bin circuit") {
  for (FunctionKind f : {FunctionKind::Cardinality, FunctionKind::RevealShuffled}) {
    for (Variant v : {Variant::Robust, Variant::Masked}) {
      const BinLayout layout = BinLayout::from_params(16, 256, 5.0, 1.0, 1);
      REQUIRE(layout.beta() == 4);
      const uint32_t m = 3;
      const ProtocolCircuit pc = build_hashing_bin_circuit(m, layout, f, v);
      const StageCostEstimate est =
          estimate_hashing(m, layout.beta(), layout.capacity(), pc.width, f, v);
      const Circuit& c = pc.circuit;
      CHECK(est.reconstruct_ands ==
            layout.beta() * and_count_in(c, pc.reconstruct_stage.begin, pc.reconstruct_stage.end));
      CHECK(est.merge_ands ==
            layout.beta() * and_count_in(c, pc.merge_stage.begin, pc.merge_stage.end));
      CHECK(est.compare_ands ==
            layout.beta() * and_count_in(c, pc.compare_stage.begin, pc.compare_stage.end));
      CHECK(est.output_ands ==
            layout.beta() * and_count_in(c, pc.output_stage.begin, pc.output_stage.end));
      CHECK(est.total() == layout.beta() * c.and_count());
    }
  }
}

TEST_CASE("estimates scale to sizes too large to build") {
  // Sanity-only: the closed forms stay finite and ordered at large n.
  const StageCostEstimate small = estimate_plain(3, 1ull << 10, 32, FunctionKind::Cardinality,
                                                 Variant::Robust);
  const StageCostEstimate big = estimate_plain(3, 1ull << 20, 32, FunctionKind::Cardinality,
                                               Variant::Robust);
  CHECK(big.merge_ands > small.merge_ands);
  CHECK(big.total() > 0);
}
