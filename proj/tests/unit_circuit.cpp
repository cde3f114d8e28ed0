#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mpsi/circuit.hpp"
#include "mpsi/errors.hpp"
#include "test_util.hpp"

using namespace mpsi;

namespace {

// A small random circuit over the full gate alphabet.
Circuit random_circuit(std::mt19937_64& rng, uint32_t max_gates) {
  const uint32_t n1 = 1 + rng() % 6;
  const uint32_t n2 = 1 + rng() % 6;
  CircuitBuilder b(n1, n2);
  std::vector<WireId> live;
  for (uint32_t i = 0; i < n1; ++i) live.push_back(b.input_p1(i));
  for (uint32_t i = 0; i < n2; ++i) live.push_back(b.input_p2(i));
  const uint32_t gates = 1 + rng() % max_gates;
  for (uint32_t g = 0; g < gates; ++g) {
    const WireId a = live[rng() % live.size()];
    const WireId c = live[rng() % live.size()];
    switch (rng() % 5) {
      case 0: live.push_back(b.xor_(a, c)); break;
      case 1: live.push_back(b.and_(a, c)); break;
      case 2: live.push_back(b.inv_(a)); break;
      case 3: live.push_back(b.const0()); break;
      default: live.push_back(b.const1()); break;
    }
  }
  std::vector<WireId> outs;
  const uint32_t n_out = 1 + rng() % 4;
  for (uint32_t i = 0; i < n_out; ++i) outs.push_back(live[rng() % live.size()]);
  b.set_outputs(std::move(outs));
  return b.take();
}

// Independent single-pass evaluator used as the oracle for eval_plaintext.
std::vector<uint8_t> eval_oracle(const Circuit& c, const std::vector<uint8_t>& inputs) {
  std::vector<uint8_t> w(c.wire_bound(), 0);
  for (size_t i = 0; i < inputs.size(); ++i) w[i] = inputs[i];
  for (const Gate& g : c.gates) {
    switch (g.kind) {
      case GateKind::Xor: w[g.out] = w[g.a] ^ w[g.b]; break;
      case GateKind::And: w[g.out] = w[g.a] & w[g.b]; break;
      case GateKind::Inv: w[g.out] = 1 ^ w[g.a]; break;
      case GateKind::Const0: w[g.out] = 0; break;
      case GateKind::Const1: w[g.out] = 1; break;
    }
  }
  std::vector<uint8_t> out;
  for (WireId o : c.outputs) out.push_back(w[o]);
  return out;
}

}  // namespace

TEST_CASE("gate truth tables via the builder") {
  CircuitBuilder b(2, 0);
  const WireId x = b.input_p1(0), y = b.input_p1(1);
  b.set_outputs({b.xor_(x, y), b.and_(x, y), b.inv_(x), b.const0(), b.const1(),
                 b.xnor_(x, y), b.or_(x, y)});
  const Circuit c = b.take();
  for (uint8_t xv = 0; xv < 2; ++xv)
    for (uint8_t yv = 0; yv < 2; ++yv) {
      const auto out = eval_plaintext(c, {xv, yv});
      CHECK(out[0] == (xv ^ yv));
      CHECK(out[1] == (xv & yv));
      CHECK(out[2] == (1 ^ xv));
      CHECK(out[3] == 0);
      CHECK(out[4] == 1);
      CHECK(out[5] == (1 ^ xv ^ yv));
      CHECK(out[6] == (xv | yv));
    }
}

TEST_CASE("constants are cached per builder") {
  CircuitBuilder b(1, 0);
  const WireId a = b.const0();
  const WireId a2 = b.const0();
  const WireId u = b.const1();
  const WireId u2 = b.const1();
  CHECK(a == a2);
  CHECK(u == u2);
  b.set_outputs({a, u, b.input_p1(0)});
  const Circuit c = b.take();
  CHECK(c.const_gate_count() == 2);
}

TEST_CASE("eval_plaintext matches an independent evaluator on random circuits") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    const Circuit c = random_circuit(rng, 60);
    for (int k = 0; k < 4; ++k) {
      std::vector<uint8_t> in(c.input_count());
      for (auto& bit : in) bit = rng() & 1;
      CHECK(eval_plaintext(c, in) == eval_oracle(c, in));
    }
  }
}

TEST_CASE("eval_plaintext validates input length and bit values") {
  CircuitBuilder b(2, 1);
  b.set_outputs({b.and_(b.input_p1(0), b.input_p2(0))});
  const Circuit c = b.take();
  CHECK_THROWS_AS(eval_plaintext(c, {1, 0}), InputLengthMismatch);
  CHECK_THROWS_AS(eval_plaintext(c, {1, 0, 1, 1}), InputLengthMismatch);
  CHECK_THROWS_AS(eval_plaintext(c, {1, 0, 2}), InputLengthMismatch);
}

TEST_CASE("text round trip preserves the circuit exactly") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const Circuit c = random_circuit(rng, 40);
    const std::string text = serialize(c);
    const Circuit c2 = deserialize(text);
    CHECK(serialize(c2) == text);
    CHECK(c2.n_inputs_p1 == c.n_inputs_p1);
    CHECK(c2.n_inputs_p2 == c.n_inputs_p2);
    CHECK(c2.outputs == c.outputs);
    CHECK(c2.and_count() == c.and_count());
    std::vector<uint8_t> in(c.input_count());
    for (auto& bit : in) bit = rng() & 1;
    CHECK(eval_plaintext(c, in) == eval_plaintext(c2, in));
  }
}

TEST_CASE("serialized header and gate lines follow the documented grammar") {
  CircuitBuilder b(1, 1);
  const WireId x = b.input_p1(0), y = b.input_p2(0);
  const WireId z = b.and_(x, y);
  b.set_outputs({z});
  const std::string text = serialize(b.take());
  std::istringstream is(text);
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "CIRC v1 1 1 1");
  REQUIRE(std::getline(is, line));
  CHECK(line == "AND 0 1 -> 2");
  REQUIRE(std::getline(is, line));
  CHECK(line == "OUT 2");
}

TEST_CASE("parse errors report 1-based line numbers") {
  const auto line_of = [](const std::string& text) {
    try {
      deserialize(text);
    } catch (const ParseError& e) {
      return e.line;
    }
    return -1;
  };
  CHECK(line_of("") == 1);
  CHECK(line_of("BOGUS HEADER\n") == 1);
  CHECK(line_of("CIRC v2 1 0 1\nOUT 0\n") == 1);
  CHECK(line_of("CIRC v1 2 0 1\nAND 0 1 2\nOUT 3\n") == 2);          // missing arrow
  CHECK(line_of("CIRC v1 2 0 1\nXOR 0 1 -> 2\nFROB 2 -> 3\nOUT 2\n") == 3);
  CHECK(line_of("CIRC v1 2 0 1\nAND 0 5 -> 2\nOUT 2\n") == 2);       // undefined wire
  CHECK(line_of("CIRC v1 2 0 1\nAND 0 1 -> 1\nOUT 1\n") == 2);       // redefinition
  CHECK(line_of("CIRC v1 2 0 2\nAND 0 1 -> 2\nOUT 2\n") == 3);       // OUT arity
  CHECK(line_of("CIRC v1 2 0 1\nAND 0 1 -> 2\n") == 3);              // missing OUT
}

TEST_CASE("stage AND counting over gate ranges") {
  CircuitBuilder b(3, 0);
  const WireId x = b.input_p1(0), y = b.input_p1(1), z = b.input_p1(2);
  const WireId a = b.and_(x, y);          // gate 0
  const WireId c = b.xor_(a, z);          // gate 1
  const WireId d = b.and_(c, x);          // gate 2
  const WireId e = b.and_(d, y);          // gate 3
  b.set_outputs({e});
  const Circuit circ = b.take();
  CHECK(circ.and_count() == 3);
  CHECK(and_count_in(circ, 0, 1) == 1);
  CHECK(and_count_in(circ, 1, 2) == 0);
  CHECK(and_count_in(circ, 0, 4) == 3);
  CHECK(and_count_in(circ, 2, 4) == 2);
  CHECK(and_count_in(circ, 4, 4) == 0);
}

TEST_CASE("circuit hash is stable, hex, and structure sensitive") {
  std::mt19937_64 rng(3);
  const Circuit c = random_circuit(rng, 30);
  const std::string h1 = circuit_hash_hex(c);
  const std::string h2 = circuit_hash_hex(deserialize(serialize(c)));
  CHECK(h1 == h2);
  CHECK(h1.size() == 64);
  for (char ch : h1) CHECK(((ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f')));

  CircuitBuilder ba(2, 0);
  ba.set_outputs({ba.and_(ba.input_p1(0), ba.input_p1(1))});
  CircuitBuilder bb(2, 0);
  bb.set_outputs({bb.xor_(bb.input_p1(0), bb.input_p1(1))});
  CHECK(circuit_hash_hex(ba.take()) != circuit_hash_hex(bb.take()));
}

TEST_CASE("builder rejects out-of-range references") {
  CircuitBuilder b(2, 1);
  CHECK_THROWS_AS(b.input_p1(2), UndefinedWire);
  CHECK_THROWS_AS(b.input_p2(1), UndefinedWire);
  const WireId x = b.input_p1(0);
  CHECK_THROWS_AS(b.xor_(x, 999), UndefinedWire);
  CHECK_THROWS_AS((void)b.set_outputs({999}), UndefinedWire);
}
