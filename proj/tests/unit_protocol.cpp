#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "mpsi/bits.hpp"
#include "mpsi/circuit.hpp"
#include "mpsi/errors.hpp"
#include "mpsi/hashing.hpp"
#include "mpsi/protocol.hpp"
#include "test_util.hpp"

using namespace mpsi;
using testutil::intersect_all;
using testutil::random_distinct_set;

namespace {

// Test-side cost formulas, written out independently of the library.
uint64_t merge_ands_formula(uint64_t m, uint64_t n, uint64_t sigma) {
  uint64_t p = 1;
  while (p < m * n) p <<= 1;
  uint64_t lg = 0;
  while ((1ull << lg) < p) ++lg;
  return 2 * sigma * ((p / 4) * lg * (lg - 1) + p - 1);
}

uint64_t compare_ands_formula(uint64_t m, uint64_t n, uint64_t sigma) {
  return ((m + 1) * sigma - 1) * (n - 1) + 2 * sigma - 1;
}

uint64_t waksman_formula_pow2(uint64_t n) {
  uint64_t lg = 0;
  while ((1ull << lg) < n) ++lg;
  return n * lg - n + 1;
}

std::vector<uint8_t> concat_sides(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
  std::vector<uint8_t> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

uint64_t count_gates(const Circuit& c, GateKind kind) {
  uint64_t count = 0;
  for (const Gate& g : c.gates) count += g.kind == kind;
  return count;
}

// Shares the given sets and evaluates the protocol circuit in cleartext,
// returning the decoded result (single list-mode pipeline).
ProtocolResult run_plain_cleartext(const ProtocolCircuit& pc,
                                   const std::vector<std::vector<uint64_t>>& sets, uint64_t seed) {
  Prg prg = Prg::from_seed(seed, "protocol-test");
  std::vector<std::vector<uint8_t>> h1(pc.m), h2(pc.m);
  for (uint32_t i = 0; i < pc.m; ++i) {
    SharePair sp = pc.mode == Mode::Mbwa ? share_bitvector(sets[i], pc.width, prg)
                                         : share_sorted_set(sets[i], pc.width, prg);
    h1[i] = std::move(sp.to_p1);
    h2[i] = std::move(sp.to_p2);
  }
  const auto c1 = random_control_bits(pc.controls_per_party, prg);
  const auto c2 = random_control_bits(pc.controls_per_party, prg);
  const auto bits = eval_plaintext(
      pc.circuit, concat_sides(assemble_side_input(pc, h1, c1), assemble_side_input(pc, h2, c2)));
  return interpret_output(bits, output_context(pc));
}

}  // namespace

TEST_CASE("mode, function and variant names round-trip") {
  CHECK(parse_mode("mbwa") == Mode::Mbwa);
  CHECK(parse_mode("mscs") == Mode::Mscs);
  CHECK(parse_mode("hashing-mscs") == Mode::HashingMscs);
  CHECK(parse_function("reveal") == FunctionKind::RevealShuffled);
  CHECK(parse_function("cardinality") == FunctionKind::Cardinality);
  CHECK(parse_function("bitvector") == FunctionKind::BitVector);
  CHECK(parse_variant("robust") == Variant::Robust);
  CHECK(parse_variant("masked") == Variant::Masked);
  CHECK(parse_variant("exact") == Variant::Masked);  // CLI alias
  CHECK(std::string(mode_name(Mode::HashingMscs)) == "hashing-mscs");
  CHECK(std::string(function_name(FunctionKind::RevealShuffled)) == "reveal");
  CHECK(std::string(variant_name(Variant::Robust)) == "robust");
  CHECK_THROWS_AS(parse_mode("cuckoo"), ConfigError);
  CHECK_THROWS_AS(parse_function("sum"), ConfigError);
  CHECK_THROWS_AS(parse_variant("fancy"), InvalidVariant);
}

TEST_CASE("protocol choice validation") {
  CHECK_NOTHROW(validate_protocol_choice(Mode::Mbwa, FunctionKind::BitVector, Variant::Robust, 3, 12));
  CHECK_THROWS_AS(validate_protocol_choice(Mode::Mbwa, FunctionKind::Cardinality, Variant::Robust, 3, 12),
                  ConfigError);
  CHECK_THROWS_AS(validate_protocol_choice(Mode::Mbwa, FunctionKind::BitVector, Variant::Robust, 3, 25),
                  UniverseTooLarge);
  CHECK_THROWS_AS(validate_protocol_choice(Mode::Mscs, FunctionKind::BitVector, Variant::Robust, 3, 12),
                  ConfigError);
  CHECK_THROWS_AS(validate_protocol_choice(Mode::Mscs, FunctionKind::Cardinality, Variant::Robust, 1, 12),
                  ConfigError);
  CHECK_THROWS_AS(validate_protocol_choice(Mode::Mscs, FunctionKind::Cardinality, Variant::Robust, 3, 0),
                  ConfigError);
}

TEST_CASE("input normalization sorts and polices the domain") {
  CHECK(normalize_input_set({5, 1, 3}, 4, Mode::Mscs, Variant::Robust) ==
        std::vector<uint64_t>{1, 3, 5});
  // 2^4 - 1 = 15 is the sentinel, 14 the maximum
  CHECK_NOTHROW(normalize_input_set({14}, 4, Mode::Mscs, Variant::Robust));
  CHECK_THROWS_AS(normalize_input_set({15}, 4, Mode::Mscs, Variant::Robust), DomainViolation);
  CHECK_THROWS_AS(normalize_input_set({3, 3}, 4, Mode::Mscs, Variant::Robust), DuplicateElement);
  // 0 is fine in the robust variant, reserved in the masked list variant
  CHECK_NOTHROW(normalize_input_set({0, 1}, 4, Mode::Mscs, Variant::Robust));
  CHECK_THROWS_AS(normalize_input_set({0, 1}, 4, Mode::Mscs, Variant::Masked), DomainViolation);
  CHECK_NOTHROW(normalize_input_set({0, 1}, 4, Mode::HashingMscs, Variant::Robust));
}

TEST_CASE("sorted-set sharing reconstructs the sorted words") {
  Prg prg = Prg::from_seed(1, "share-test");
  const std::vector<uint64_t> words = {9, 2, 13, 4};  // deliberately unsorted
  const uint32_t width = 5;
  const SharePair sp = share_sorted_set(words, width, prg);
  REQUIRE(sp.to_p1.size() == words.size() * width);
  REQUIRE(sp.to_p2.size() == sp.to_p1.size());
  std::vector<uint64_t> reconstructed;
  for (size_t j = 0; j < words.size(); ++j) {
    uint64_t v = 0;
    for (uint32_t k = 0; k < width; ++k)
      v = (v << 1) | (sp.to_p1[j * width + k] ^ sp.to_p2[j * width + k]);
    reconstructed.push_back(v);
  }
  CHECK(reconstructed == std::vector<uint64_t>{2, 4, 9, 13});
  CHECK_THROWS_AS(share_sorted_set({31}, 5, prg), DomainViolation);  // sentinel
  CHECK_THROWS_AS(share_sorted_set({3, 3}, 5, prg), DuplicateElement);
}

TEST_CASE("share halves look uniform under a fixed seed") {
  Prg prg = Prg::from_seed(2, "share-test");
  const uint32_t width = 16;
  uint64_t ones = 0, total = 0;
  for (int t = 0; t < 40; ++t) {
    const SharePair sp = share_sorted_set({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16},
                                          width, prg);
    for (uint8_t b : sp.to_p1) {
      ones += b;
      ++total;
    }
  }
  // 4-standard-deviation band around total/2 for fair coin flips
  const double sd = std::sqrt(double(total) * 0.25);
  CHECK(std::abs(double(ones) - double(total) / 2.0) < 4.0 * sd);
}

TEST_CASE("characteristic-vector sharing covers the whole universe") {
  Prg prg = Prg::from_seed(3, "share-test");
  const uint32_t sigma = 6;
  const std::vector<uint64_t> set = {0, 5, 17, 62};
  const SharePair sp = share_bitvector(set, sigma, prg);
  REQUIRE(sp.to_p1.size() == 64);
  for (uint64_t x = 0; x < 64; ++x) {
    const uint8_t bit = sp.to_p1[x] ^ sp.to_p2[x];
    const bool member = std::find(set.begin(), set.end(), x) != set.end();
    CHECK(bit == (member ? 1 : 0));
  }
  CHECK_THROWS_AS(share_bitvector({63}, 6, prg), DomainViolation);  // 2^6-1 reserved
  CHECK_THROWS_AS(share_bitvector({1}, 25, prg), UniverseTooLarge);
}

TEST_CASE("characteristic-vector circuit census") {
  for (uint32_t m : {3u, 5u}) {
    for (uint32_t sigma : {4u, 8u}) {
      const ProtocolCircuit pc = build_mbwa(m, sigma);
      const uint64_t universe = 1ull << sigma;
      CHECK(count_gates(pc.circuit, GateKind::Xor) == m * universe);
      CHECK(pc.circuit.and_count() == (m - 1) * universe);
      CHECK(pc.circuit.gates.size() == (2 * m - 1) * universe);
      CHECK(pc.share_bits_per_party() == universe);
      CHECK(pc.side_input_bits() == m * universe);
      CHECK(pc.circuit.outputs.size() == universe);
      CHECK(and_count_in(pc.circuit, pc.reconstruct_stage.begin, pc.reconstruct_stage.end) == 0);
    }
  }
}

TEST_CASE("sorted-list circuit stage census") {
  for (uint32_t m : {3u, 4u, 5u}) {
    for (uint64_t n : {4ull, 8ull}) {
      for (uint32_t sigma : {8u, 12u}) {
        for (FunctionKind f : {FunctionKind::Cardinality, FunctionKind::RevealShuffled}) {
          const Variant v = Variant::Robust;
          const ProtocolCircuit pc = build_mscs(m, n, sigma, f, v);
          const Circuit& c = pc.circuit;
          // spans partition the gate list in pipeline order
          CHECK(pc.reconstruct_stage.begin == 0);
          CHECK(pc.reconstruct_stage.end == pc.merge_stage.begin);
          CHECK(pc.merge_stage.end == pc.compare_stage.begin);
          CHECK(pc.compare_stage.end == pc.output_stage.begin);
          CHECK(pc.output_stage.end == c.gates.size());

          CHECK(and_count_in(c, pc.reconstruct_stage.begin, pc.reconstruct_stage.end) == 0);
          CHECK(and_count_in(c, pc.merge_stage.begin, pc.merge_stage.end) ==
                merge_ands_formula(m, n, sigma));
          CHECK(and_count_in(c, pc.compare_stage.begin, pc.compare_stage.end) ==
                compare_ands_formula(m, n, sigma));
          if (f == FunctionKind::RevealShuffled) {
            CHECK(pc.controls_per_party == waksman_formula_pow2(n));  // n is a power of two here
            CHECK(pc.record_width == sigma + 1);
            CHECK(and_count_in(c, pc.output_stage.begin, pc.output_stage.end) ==
                  2 * pc.controls_per_party * pc.record_width);
            CHECK(c.outputs.size() == n * pc.record_width);
          } else {
            CHECK(pc.controls_per_party == 0);
            CHECK(c.outputs.size() == bit_width_for(n));
          }
          CHECK(pc.share_bits_per_party() == n * sigma);
        }
      }
    }
  }
}

TEST_CASE("masked records drop the flag bit") {
  const ProtocolCircuit pc = build_mscs(3, 4, 8, FunctionKind::RevealShuffled, Variant::Masked);
  CHECK(pc.record_width == 8);
  CHECK(and_count_in(pc.circuit, pc.compare_stage.begin, pc.compare_stage.end) ==
        compare_ands_formula(3, 4, 8));
  CHECK(pc.circuit.outputs.size() == 4 * 8);
}

TEST_CASE("padding sentinels never fire a compare window") {
  for (uint32_t m : {2u, 3u, 4u, 5u, 7u}) {
    for (uint64_t n : {2ull, 3ull, 4ull, 8ull, 16ull}) {
      CHECK(sentinel_window_matches(m, n) == 0);
    }
  }
}

TEST_CASE("side input assembly validates lengths and preserves order") {
  const ProtocolCircuit pc = build_mscs(3, 4, 8, FunctionKind::RevealShuffled, Variant::Robust);
  std::vector<std::vector<uint8_t>> halves(3, std::vector<uint8_t>(pc.share_bits_per_party(), 0));
  halves[1].back() = 1;
  std::vector<uint8_t> controls(pc.controls_per_party, 0);
  controls[0] = 1;
  const auto side = assemble_side_input(pc, halves, controls);
  REQUIRE(side.size() == pc.side_input_bits());
  CHECK(side[2 * pc.share_bits_per_party() - 1] == 1);  // end of party 2's half
  CHECK(side[3 * pc.share_bits_per_party()] == 1);      // first control bit
  CHECK(std::count(side.begin(), side.end(), 1) == 2);

  std::vector<std::vector<uint8_t>> too_few(2, std::vector<uint8_t>(pc.share_bits_per_party(), 0));
  CHECK_THROWS_AS(assemble_side_input(pc, too_few, controls), InputLengthMismatch);
  std::vector<uint8_t> bad_controls(pc.controls_per_party + 1, 0);
  CHECK_THROWS_AS(assemble_side_input(pc, halves, bad_controls), InputLengthMismatch);
  halves[0].pop_back();
  CHECK_THROWS_AS(assemble_side_input(pc, halves, controls), InputLengthMismatch);
}

TEST_CASE("output interpretation on hand-built bit vectors") {
  SUBCASE("characteristic vector") {
    OutputContext ctx;
    ctx.mode = Mode::Mbwa;
    ctx.f = FunctionKind::BitVector;
    ctx.width = 3;
    std::vector<uint8_t> bits(8, 0);
    bits[2] = bits[5] = 1;
    const ProtocolResult r = interpret_output(bits, ctx);
    CHECK(r.elements == std::vector<uint64_t>{2, 5});
    CHECK(r.cardinality == 2);
    bits[7] = 1;  // reserved top element
    CHECK_THROWS_AS(interpret_output(bits, ctx), MalformedOutput);
    CHECK_THROWS_AS(interpret_output(std::vector<uint8_t>(7, 0), ctx), MalformedOutput);
  }
  SUBCASE("cardinality word is most-significant bit first") {
    OutputContext ctx;
    ctx.mode = Mode::Mscs;
    ctx.f = FunctionKind::Cardinality;
    ctx.n = 5;  // counter width ceil(log2(6)) = 3
    const ProtocolResult r = interpret_output({1, 0, 1}, ctx);
    CHECK(r.cardinality == 5);
    CHECK_FALSE(r.has_elements);
    CHECK(r.elements.empty());
    CHECK_THROWS_AS(interpret_output({1, 0}, ctx), MalformedOutput);
  }
  SUBCASE("robust records carry an indicator plus the value") {
    OutputContext ctx;
    ctx.mode = Mode::Mscs;
    ctx.f = FunctionKind::RevealShuffled;
    ctx.variant = Variant::Robust;
    ctx.n = 3;
    ctx.width = 4;
    // record 0: match of value 9; record 1: no match; record 2: match of 3
    std::vector<uint8_t> bits = {1, 1, 0, 0, 1,  0, 0, 0, 0, 0,  1, 0, 0, 1, 1};
    const ProtocolResult r = interpret_output(bits, ctx);
    CHECK(r.elements == std::vector<uint64_t>{3, 9});
    bits[6] = 1;  // non-zero value with indicator 0
    CHECK_THROWS_AS(interpret_output(bits, ctx), MalformedOutput);
  }
  SUBCASE("masked records treat zero as no-match") {
    OutputContext ctx;
    ctx.mode = Mode::Mscs;
    ctx.f = FunctionKind::RevealShuffled;
    ctx.variant = Variant::Masked;
    ctx.n = 3;
    ctx.width = 4;
    std::vector<uint8_t> bits = {0, 1, 1, 0,  0, 0, 0, 0,  0, 1, 0, 1};
    const ProtocolResult r = interpret_output(bits, ctx);
    CHECK(r.elements == std::vector<uint64_t>{5, 6});
  }
  SUBCASE("hashing records reconstruct through the layout") {
    const BinLayout layout(10, 4, 8, 5);
    OutputContext ctx;
    ctx.mode = Mode::HashingMscs;
    ctx.f = FunctionKind::RevealShuffled;
    ctx.variant = Variant::Robust;
    ctx.n = 2;
    ctx.width = layout.record_width();  // flag + stored remainder
    ctx.layout = &layout;
    const uint64_t element = 123;
    const auto [bin, stored] = layout.place(element);
    ctx.bin_index = bin;
    std::vector<uint8_t> bits;
    bits.push_back(1);  // match indicator
    bits.push_back(0);  // real-record flag
    for (int k = int(layout.sigma_stored()) - 1; k >= 0; --k)
      bits.push_back(uint8_t((stored >> k) & 1));
    for (uint32_t k = 0; k < ctx.width + 1; ++k) bits.push_back(0);  // empty slot
    const ProtocolResult r = interpret_output(bits, ctx);
    CHECK(r.elements == std::vector<uint64_t>{element});
    // a matched dummy (flag bit set) is a protocol failure
    bits[1] = 1;
    CHECK_THROWS_AS(interpret_output(bits, ctx), MalformedOutput);
  }
}

TEST_CASE("cleartext pipeline equals brute force for sorted-list mode") {
  std::mt19937_64 rng(31);
  uint64_t seed = 100;
  for (uint32_t m : {3u, 4u}) {
    for (uint64_t n : {4ull, 8ull}) {
      const uint32_t sigma = 8;
      for (FunctionKind f : {FunctionKind::Cardinality, FunctionKind::RevealShuffled}) {
        for (Variant v : {Variant::Robust, Variant::Masked}) {
          const ProtocolCircuit pc = build_mscs(m, n, sigma, f, v);
          for (int t = 0; t < 5; ++t) {
            std::vector<std::vector<uint64_t>> sets;
            // min element 1 keeps masked-variant inputs legal
            std::vector<uint64_t> base = random_distinct_set(rng, n, (1ull << sigma) - 3);
            for (auto& e : base) ++e;
            for (uint32_t i = 0; i < m; ++i) {
              std::vector<uint64_t> s = base;
              // shared prefix, party-specific tail
              const size_t keep = 1 + rng() % n;
              s.resize(keep);
              while (s.size() < n) {
                const uint64_t x = 1 + rng() % ((1ull << sigma) - 2);
                if (std::find(s.begin(), s.end(), x) == s.end()) s.push_back(x);
              }
              sets.push_back(normalize_input_set(s, sigma, Mode::Mscs, v));
            }
            const auto oracle = intersect_all(sets);
            const ProtocolResult r = run_plain_cleartext(pc, sets, seed++);
            CHECK(r.cardinality == oracle.size());
            if (f == FunctionKind::RevealShuffled) CHECK(r.elements == oracle);
          }
        }
      }
    }
  }
}

TEST_CASE("cleartext pipeline equals brute force for the characteristic vector") {
  std::mt19937_64 rng(32);
  for (uint32_t m : {3u, 5u}) {
    const uint32_t sigma = 6;
    const ProtocolCircuit pc = build_mbwa(m, sigma);
    for (int t = 0; t < 5; ++t) {
      std::vector<std::vector<uint64_t>> sets;
      for (uint32_t i = 0; i < m; ++i)
        sets.push_back(random_distinct_set(rng, 8, (1ull << sigma) - 2));
      // force a non-empty intersection half of the time
      if (t % 2 == 0)
        for (auto& s : sets)
          if (std::find(s.begin(), s.end(), 7) == s.end()) s.push_back(7);
      for (auto& s : sets) s = normalize_input_set(s, sigma, Mode::Mbwa, Variant::Robust);
      // sets may differ in size for the characteristic-vector mode
      const auto oracle = intersect_all(sets);
      const ProtocolResult r = run_plain_cleartext(pc, sets, 500 + t);
      CHECK(r.elements == oracle);
    }
  }
}

TEST_CASE("cleartext hashed-bin pipeline equals brute force") {
  std::mt19937_64 rng(33);
  const uint32_t m = 3, sigma = 12;
  const uint64_t n = 64;
  const BinLayout layout = BinLayout::from_params(sigma, n, 2.0, 1.0, 9);
  REQUIRE(layout.beta() >= 2);
  for (FunctionKind f : {FunctionKind::Cardinality, FunctionKind::RevealShuffled}) {
    const ProtocolCircuit pc = build_hashing_bin_circuit(m, layout, f, Variant::Robust);
    CHECK(pc.n == layout.capacity());
    CHECK(pc.width == layout.record_width());
    for (int t = 0; t < 3; ++t) {
      std::vector<std::vector<uint64_t>> sets;
      std::vector<uint64_t> base = random_distinct_set(rng, n, (1ull << sigma) - 2);
      for (uint32_t i = 0; i < m; ++i) {
        std::vector<uint64_t> s(base.begin(), base.begin() + 20 + 5 * i);
        while (s.size() < n) {
          const uint64_t x = rng() % ((1ull << sigma) - 1);
          if (std::find(s.begin(), s.end(), x) == s.end() &&
              std::find(base.begin(), base.end(), x) == base.end())
            s.push_back(x);
        }
        sets.push_back(normalize_input_set(s, sigma, Mode::HashingMscs, Variant::Robust));
      }
      const auto oracle = intersect_all(sets);

      Prg prg = Prg::from_seed(700 + t, "protocol-test");
      std::vector<PartyBins> bins;
      for (uint32_t i = 0; i < m; ++i) bins.push_back(build_bins(sets[i], layout, i + 1, m));
      OutputContext ctx = output_context(pc);
      ctx.layout = &layout;
      std::vector<uint64_t> found;
      uint64_t total = 0;
      for (uint32_t bin = 0; bin < layout.beta(); ++bin) {
        std::vector<std::vector<uint8_t>> h1(m), h2(m);
        for (uint32_t i = 0; i < m; ++i) {
          SharePair sp = share_sorted_set(bins[i].bins[bin], layout.record_width(), prg);
          h1[i] = std::move(sp.to_p1);
          h2[i] = std::move(sp.to_p2);
        }
        const auto c1 = random_control_bits(pc.controls_per_party, prg);
        const auto c2 = random_control_bits(pc.controls_per_party, prg);
        const auto bits =
            eval_plaintext(pc.circuit, concat_sides(assemble_side_input(pc, h1, c1),
                                                    assemble_side_input(pc, h2, c2)));
        ctx.bin_index = bin;
        const ProtocolResult r = interpret_output(bits, ctx);
        total += r.cardinality;
        found.insert(found.end(), r.elements.begin(), r.elements.end());
      }
      CHECK(total == oracle.size());
      if (f == FunctionKind::RevealShuffled) {
        std::sort(found.begin(), found.end());
        CHECK(found == oracle);
      }
    }
  }
}

TEST_CASE("masked hashing model has bare stored words") {
  const BinLayout layout = BinLayout::from_params(16, 64, 5.0, 1.0, 3);
  const ProtocolCircuit pc =
      build_hashing_bin_circuit(3, layout, FunctionKind::Cardinality, Variant::Masked);
  CHECK(pc.width == layout.sigma_stored());
  CHECK(pc.mode == Mode::HashingMscs);
}
