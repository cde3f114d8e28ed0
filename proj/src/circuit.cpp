#include "mpsi/circuit.hpp"

#include <algorithm>
#include <sstream>

#include "mpsi/crypto.hpp"

namespace mpsi {

uint32_t Circuit::wire_bound() const {
  uint32_t bound = input_count();
  for (const Gate& g : gates) bound = std::max(bound, g.out + 1);
  return bound;
}

uint64_t Circuit::and_count() const {
  uint64_t n = 0;
  for (const Gate& g : gates) n += g.kind == GateKind::And;
  return n;
}

uint64_t Circuit::const_gate_count() const {
  uint64_t n = 0;
  for (const Gate& g : gates)
    n += g.kind == GateKind::Const0 || g.kind == GateKind::Const1;
  return n;
}

CircuitStats circuit_stats(const Circuit& c) {
  CircuitStats s;
  s.gate_count = c.gates.size();
  s.wire_count = c.wire_bound();
  std::vector<uint64_t> depth(c.wire_bound(), 0);
  for (const Gate& g : c.gates) {
    uint64_t d = 0;
    switch (g.kind) {
      case GateKind::Xor:
        ++s.xor_count;
        d = std::max(depth[g.a], depth[g.b]);
        break;
      case GateKind::And:
        ++s.and_count;
        d = std::max(depth[g.a], depth[g.b]) + 1;
        break;
      case GateKind::Inv:
        ++s.inv_count;
        d = depth[g.a];
        break;
      case GateKind::Const0:
      case GateKind::Const1:
        ++s.const_count;
        d = 0;
        break;
    }
    depth[g.out] = d;
    s.and_depth = std::max(s.and_depth, d);
  }
  return s;
}

uint64_t and_count_in(const Circuit& c, size_t begin, size_t end) {
  uint64_t n = 0;
  end = std::min(end, c.gates.size());
  for (size_t i = begin; i < end; ++i) n += c.gates[i].kind == GateKind::And;
  return n;
}

std::vector<uint8_t> eval_plaintext(const Circuit& c, const std::vector<uint8_t>& inputs) {
  if (inputs.size() != c.input_count())
    throw InputLengthMismatch("expected " + std::to_string(c.input_count()) + " input bits, got " +
                              std::to_string(inputs.size()));
  std::vector<uint8_t> val(c.wire_bound(), 0);
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i] > 1)
      throw InputLengthMismatch("input bit " + std::to_string(i) + " is not 0 or 1");
    val[i] = inputs[i];
  }
  for (const Gate& g : c.gates) {
    switch (g.kind) {
      case GateKind::Xor: val[g.out] = val[g.a] ^ val[g.b]; break;
      case GateKind::And: val[g.out] = val[g.a] & val[g.b]; break;
      case GateKind::Inv: val[g.out] = val[g.a] ^ 1; break;
      case GateKind::Const0: val[g.out] = 0; break;
      case GateKind::Const1: val[g.out] = 1; break;
    }
  }
  std::vector<uint8_t> out(c.outputs.size());
  for (size_t i = 0; i < c.outputs.size(); ++i) out[i] = val[c.outputs[i]];
  return out;
}

std::string serialize(const Circuit& c) {
  std::ostringstream os;
  os << "CIRC v1 " << c.n_inputs_p1 << ' ' << c.n_inputs_p2 << ' ' << c.outputs.size() << '\n';
  for (const Gate& g : c.gates) {
    switch (g.kind) {
      case GateKind::Xor: os << "XOR " << g.a << ' ' << g.b << " -> " << g.out << '\n'; break;
      case GateKind::And: os << "AND " << g.a << ' ' << g.b << " -> " << g.out << '\n'; break;
      case GateKind::Inv: os << "INV " << g.a << " -> " << g.out << '\n'; break;
      case GateKind::Const0: os << "CONST0 -> " << g.out << '\n'; break;
      case GateKind::Const1: os << "CONST1 -> " << g.out << '\n'; break;
    }
  }
  os << "OUT";
  for (WireId w : c.outputs) os << ' ' << w;
  os << '\n';
  return os.str();
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

uint32_t parse_u32(const std::string& tok, int line_no, const char* what) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    throw ParseError(line_no, std::string("bad ") + what + " '" + tok + "'");
  unsigned long v = 0;
  try {
    v = std::stoul(tok);
  } catch (...) {
    throw ParseError(line_no, std::string("bad ") + what + " '" + tok + "'");
  }
  if (v > 0xfffffffeul) throw ParseError(line_no, std::string(what) + " out of range");
  return static_cast<uint32_t>(v);
}

}  // namespace

Circuit deserialize(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int line_no = 0;

  Circuit c;
  uint32_t declared_outputs = 0;

  if (!std::getline(is, line)) throw ParseError(1, "empty input");
  ++line_no;
  {
    auto toks = tokenize(line);
    if (toks.size() != 5 || toks[0] != "CIRC" || toks[1] != "v1")
      throw ParseError(line_no, "expected header 'CIRC v1 <n1> <n2> <nout>'");
    c.n_inputs_p1 = parse_u32(toks[2], line_no, "input count");
    c.n_inputs_p2 = parse_u32(toks[3], line_no, "input count");
    declared_outputs = parse_u32(toks[4], line_no, "output count");
  }

  bool saw_out = false;
  std::vector<std::pair<int, std::vector<std::string>>> gate_lines;
  std::vector<std::string> out_toks;
  int out_line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto toks = tokenize(line);
    if (saw_out) {
      if (!toks.empty()) throw ParseError(line_no, "content after OUT line");
      continue;
    }
    if (toks.empty()) throw ParseError(line_no, "blank line");
    if (toks[0] == "OUT") {
      saw_out = true;
      out_toks = std::move(toks);
      out_line_no = line_no;
      continue;
    }
    gate_lines.emplace_back(line_no, std::move(toks));
  }
  if (!saw_out) throw ParseError(line_no + 1, "missing OUT line");

  uint64_t bound64 = uint64_t(c.input_count()) + gate_lines.size();
  if (bound64 > 0xfffffffeull) throw ParseError(1, "circuit too large");
  const uint32_t bound = static_cast<uint32_t>(bound64);
  std::vector<uint8_t> defined(bound, 0);
  for (uint32_t i = 0; i < c.input_count(); ++i) defined[i] = 1;

  auto use_wire = [&](const std::string& tok, int ln) {
    uint32_t w = parse_u32(tok, ln, "wire");
    if (w >= bound || !defined[w]) throw ParseError(ln, "wire " + tok + " used before definition");
    return w;
  };
  auto def_wire = [&](const std::string& tok, int ln) {
    uint32_t w = parse_u32(tok, ln, "wire");
    if (w >= bound) throw ParseError(ln, "wire " + tok + " out of range");
    if (defined[w]) throw ParseError(ln, "wire " + tok + " defined twice");
    defined[w] = 1;
    return w;
  };

  for (auto& [ln, toks] : gate_lines) {
    Gate g;
    const std::string& kind = toks[0];
    if (kind == "XOR" || kind == "AND") {
      if (toks.size() != 5 || toks[3] != "->") throw ParseError(ln, "expected '" + kind + " a b -> c'");
      g.kind = kind == "XOR" ? GateKind::Xor : GateKind::And;
      g.a = use_wire(toks[1], ln);
      g.b = use_wire(toks[2], ln);
      g.out = def_wire(toks[4], ln);
    } else if (kind == "INV") {
      if (toks.size() != 4 || toks[2] != "->") throw ParseError(ln, "expected 'INV a -> c'");
      g.kind = GateKind::Inv;
      g.a = use_wire(toks[1], ln);
      g.out = def_wire(toks[3], ln);
    } else if (kind == "CONST0" || kind == "CONST1") {
      if (toks.size() != 3 || toks[1] != "->") throw ParseError(ln, "expected '" + kind + " -> c'");
      g.kind = kind == "CONST0" ? GateKind::Const0 : GateKind::Const1;
      g.out = def_wire(toks[2], ln);
    } else {
      throw ParseError(ln, "unknown gate kind '" + kind + "'");
    }
    c.gates.push_back(g);
  }

  if (out_toks.size() != size_t(declared_outputs) + 1)
    throw ParseError(out_line_no, "OUT lists " + std::to_string(out_toks.size() - 1) + " wires, header declares " +
                                      std::to_string(declared_outputs));
  for (size_t i = 1; i < out_toks.size(); ++i) c.outputs.push_back(use_wire(out_toks[i], out_line_no));
  return c;
}

std::string circuit_hash_hex(const Circuit& c) {
  auto digest = sha256(serialize(c));
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (uint8_t b : digest) {
    out.push_back(hex[b >> 4]);
    out.push_back(hex[b & 0xf]);
  }
  return out;
}

CircuitBuilder::CircuitBuilder(uint32_t n1, uint32_t n2) {
  circuit_.n_inputs_p1 = n1;
  circuit_.n_inputs_p2 = n2;
  next_ = n1 + n2;
}

WireId CircuitBuilder::input_p1(uint32_t i) const {
  if (i >= circuit_.n_inputs_p1) throw UndefinedWire("p1 input " + std::to_string(i) + " out of range");
  return i;
}

WireId CircuitBuilder::input_p2(uint32_t i) const {
  if (i >= circuit_.n_inputs_p2) throw UndefinedWire("p2 input " + std::to_string(i) + " out of range");
  return circuit_.n_inputs_p1 + i;
}

void CircuitBuilder::check_defined(WireId w) const {
  if (w >= next_) throw UndefinedWire("wire " + std::to_string(w) + " not defined yet");
}

WireId CircuitBuilder::add_gate(GateKind kind, WireId a, WireId b) {
  Gate g;
  g.kind = kind;
  switch (kind) {
    case GateKind::Xor:
    case GateKind::And:
      if (a == kNoWire || b == kNoWire) throw ArityMismatch("binary gate needs two inputs");
      check_defined(a);
      check_defined(b);
      g.a = a;
      g.b = b;
      break;
    case GateKind::Inv:
      if (a == kNoWire || b != kNoWire) throw ArityMismatch("INV takes exactly one input");
      check_defined(a);
      g.a = a;
      break;
    case GateKind::Const0:
    case GateKind::Const1:
      if (a != kNoWire || b != kNoWire) throw ArityMismatch("constant gate takes no inputs");
      break;
  }
  g.out = next_++;
  circuit_.gates.push_back(g);
  return g.out;
}

WireId CircuitBuilder::const0() {
  if (cached_const0_ == kNoWire) cached_const0_ = add_gate(GateKind::Const0);
  return cached_const0_;
}

WireId CircuitBuilder::const1() {
  if (cached_const1_ == kNoWire) cached_const1_ = add_gate(GateKind::Const1);
  return cached_const1_;
}

void CircuitBuilder::set_outputs(std::vector<WireId> outs) {
  for (WireId w : outs) check_defined(w);
  circuit_.outputs = std::move(outs);
}

Circuit CircuitBuilder::take() {
  if (taken_) throw Error("builder already finalized");
  taken_ = true;
  return std::move(circuit_);
}

}  // namespace mpsi
