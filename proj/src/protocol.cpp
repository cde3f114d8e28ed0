#include "mpsi/protocol.hpp"

#include <algorithm>
#include <span>

#include "mpsi/bits.hpp"
#include "mpsi/errors.hpp"
#include "mpsi/shufflenet.hpp"
#include "mpsi/sortnet.hpp"

namespace mpsi {

namespace {

constexpr uint32_t kMaxMbwaSigma = 24;  // 2^24-entry characteristic vectors at most

uint64_t all_ones(uint32_t width) { return (uint64_t(1) << width) - 1; }

uint64_t decode_msb_first(const std::vector<uint8_t>& bits, size_t at, uint32_t width) {
  uint64_t v = 0;
  for (uint32_t k = 0; k < width; ++k) v = (v << 1) | (bits[at + k] & 1);
  return v;
}

WireId and_tree(CircuitBuilder& b, std::vector<WireId> v) {
  while (v.size() > 1) {
    std::vector<WireId> next;
    next.reserve((v.size() + 1) / 2);
    for (size_t i = 0; i + 1 < v.size(); i += 2) next.push_back(b.and_(v[i], v[i + 1]));
    if (v.size() % 2) next.push_back(v.back());
    v = std::move(next);
  }
  return v[0];
}

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Mbwa: return "mbwa";
    case Mode::Mscs: return "mscs";
    case Mode::HashingMscs: return "hashing-mscs";
  }
  return "?";
}

const char* function_name(FunctionKind f) {
  switch (f) {
    case FunctionKind::BitVector: return "bitvector";
    case FunctionKind::Cardinality: return "cardinality";
    case FunctionKind::RevealShuffled: return "reveal";
  }
  return "?";
}

const char* variant_name(Variant v) {
  return v == Variant::Masked ? "masked" : "robust";
}

Mode parse_mode(const std::string& s) {
  if (s == "mbwa") return Mode::Mbwa;
  if (s == "mscs") return Mode::Mscs;
  if (s == "hashing-mscs" || s == "hashing") return Mode::HashingMscs;
  throw ConfigError("unknown mode '" + s + "' (expected mbwa, mscs or hashing-mscs)");
}

FunctionKind parse_function(const std::string& s) {
  if (s == "bitvector") return FunctionKind::BitVector;
  if (s == "cardinality") return FunctionKind::Cardinality;
  if (s == "reveal") return FunctionKind::RevealShuffled;
  throw ConfigError("unknown function '" + s + "' (expected reveal, cardinality or bitvector)");
}

Variant parse_variant(const std::string& s) {
  if (s == "masked" || s == "exact") return Variant::Masked;
  if (s == "robust") return Variant::Robust;
  throw InvalidVariant("unknown variant '" + s + "' (expected robust, or masked for analysis)");
}

void validate_protocol_choice(Mode mode, FunctionKind f, Variant, uint32_t m, uint32_t sigma) {
  if (m < 2) throw ConfigError("need at least two parties");
  if (sigma == 0 || sigma > 63) throw ConfigError("element width must be in [1, 63]");
  if (mode == Mode::Mbwa) {
    if (f != FunctionKind::BitVector)
      throw ConfigError("mbwa computes the characteristic vector; use --f bitvector");
    if (sigma > kMaxMbwaSigma)
      throw UniverseTooLarge("mbwa is limited to " + std::to_string(kMaxMbwaSigma) + "-bit elements");
  } else if (f == FunctionKind::BitVector) {
    throw ConfigError("bitvector output is only available in mbwa mode");
  }
}

std::vector<uint64_t> normalize_input_set(std::vector<uint64_t> set, uint32_t sigma, Mode mode,
                                          Variant v) {
  if (sigma == 0 || sigma > 63) throw ConfigError("element width must be in [1, 63]");
  std::sort(set.begin(), set.end());
  const uint64_t max_element = all_ones(sigma) - 1;
  for (size_t i = 0; i < set.size(); ++i) {
    if (set[i] > max_element)
      throw DomainViolation("element " + std::to_string(set[i]) + " exceeds the domain maximum " +
                            std::to_string(max_element));
    if (i > 0 && set[i] == set[i - 1])
      throw DuplicateElement("duplicate element " + std::to_string(set[i]));
  }
  if (v == Variant::Masked && mode == Mode::Mscs && !set.empty() && set.front() == 0)
    throw DomainViolation("element 0 is reserved for 'no match' in the masked variant");
  return set;
}

uint64_t ProtocolCircuit::share_bits_per_party() const {
  if (mode == Mode::Mbwa) return uint64_t(1) << width;
  return n * width;
}

SharePair share_sorted_set(const std::vector<uint64_t>& words, uint32_t width, Prg& prg) {
  if (width == 0 || width > 63) throw ConfigError("word width must be in [1, 63]");
  std::vector<uint64_t> sorted = words;
  std::sort(sorted.begin(), sorted.end());
  const uint64_t max_word = all_ones(width) - 1;
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] > max_word) throw DomainViolation("word exceeds the domain maximum");
    if (i > 0 && sorted[i] == sorted[i - 1]) throw DuplicateElement("repeated word");
  }
  SharePair out;
  out.to_p1.resize(sorted.size() * width);
  out.to_p2.resize(out.to_p1.size());
  for (size_t j = 0; j < sorted.size(); ++j) {
    for (uint32_t k = 0; k < width; ++k) {
      const uint8_t bit = (sorted[j] >> (width - 1 - k)) & 1;
      const uint8_t r = prg.next_bit();
      out.to_p1[j * width + k] = r;
      out.to_p2[j * width + k] = r ^ bit;
    }
  }
  return out;
}

SharePair share_bitvector(const std::vector<uint64_t>& set, uint32_t sigma, Prg& prg) {
  if (sigma == 0 || sigma > kMaxMbwaSigma)
    throw UniverseTooLarge("characteristic vectors are limited to " +
                           std::to_string(kMaxMbwaSigma) + "-bit elements");
  const uint64_t universe = uint64_t(1) << sigma;
  std::vector<uint8_t> vec(universe, 0);
  for (uint64_t x : set) {
    if (x > universe - 2) throw DomainViolation("element exceeds the domain maximum");
    if (vec[x]) throw DuplicateElement("duplicate element " + std::to_string(x));
    vec[x] = 1;
  }
  SharePair out;
  out.to_p1.resize(universe);
  out.to_p2.resize(universe);
  for (uint64_t x = 0; x < universe; ++x) {
    const uint8_t r = prg.next_bit();
    out.to_p1[x] = r;
    out.to_p2[x] = r ^ vec[x];
  }
  return out;
}

ProtocolCircuit build_mbwa(uint32_t m, uint32_t sigma) {
  validate_protocol_choice(Mode::Mbwa, FunctionKind::BitVector, Variant::Robust, m, sigma);
  const uint64_t universe = uint64_t(1) << sigma;
  const uint64_t side = m * universe;
  if (side > 0x40000000ull) throw UniverseTooLarge("input side exceeds the builder limit");
  CircuitBuilder b(static_cast<uint32_t>(side), static_cast<uint32_t>(side));

  ProtocolCircuit pc;
  pc.mode = Mode::Mbwa;
  pc.f = FunctionKind::BitVector;
  pc.m = m;
  pc.n = 0;
  pc.width = sigma;

  pc.reconstruct_stage.begin = b.gate_count();
  std::vector<WireId> bits(side);
  for (uint32_t p = 0; p < m; ++p)
    for (uint64_t x = 0; x < universe; ++x)
      bits[p * universe + x] = b.xor_(b.input_p1(static_cast<uint32_t>(p * universe + x)),
                                      b.input_p2(static_cast<uint32_t>(p * universe + x)));
  pc.reconstruct_stage.end = b.gate_count();

  pc.compare_stage.begin = b.gate_count();
  std::vector<WireId> outs(universe);
  for (uint64_t x = 0; x < universe; ++x) {
    std::vector<WireId> per_party(m);
    for (uint32_t p = 0; p < m; ++p) per_party[p] = bits[p * universe + x];
    outs[x] = and_tree(b, std::move(per_party));
  }
  pc.compare_stage.end = b.gate_count();
  pc.merge_stage = {pc.reconstruct_stage.end, pc.reconstruct_stage.end};
  pc.output_stage = {pc.compare_stage.end, pc.compare_stage.end};

  b.set_outputs(outs);
  pc.circuit = b.take();
  return pc;
}

ProtocolCircuit build_mscs(uint32_t m, uint64_t n, uint32_t width, FunctionKind f, Variant v) {
  validate_protocol_choice(Mode::Mscs, f, v, m, width);
  if (n == 0) throw ConfigError("per-party list length must be positive");
  const SwitchLayout shuffle_layout =
      f == FunctionKind::RevealShuffled ? waksman_layout(static_cast<uint32_t>(n)) : SwitchLayout{};
  const uint64_t share_bits = n * width;
  const uint64_t side = m * share_bits + shuffle_layout.control_count();
  if (side > 0x40000000ull) throw UniverseTooLarge("input side exceeds the builder limit");
  CircuitBuilder b(static_cast<uint32_t>(side), static_cast<uint32_t>(side));

  ProtocolCircuit pc;
  pc.mode = Mode::Mscs;
  pc.f = f;
  pc.variant = v;
  pc.m = m;
  pc.n = n;
  pc.width = width;
  pc.controls_per_party = shuffle_layout.control_count();

  pc.reconstruct_stage.begin = b.gate_count();
  std::vector<std::vector<Word>> lists(m);
  for (uint32_t p = 0; p < m; ++p) {
    lists[p].resize(n);
    for (uint64_t j = 0; j < n; ++j) {
      Word w;
      w.bits.reserve(width);
      for (uint32_t k = 0; k < width; ++k) {
        const uint32_t at = static_cast<uint32_t>(p * share_bits + j * width + k);
        w.bits.push_back(b.xor_(b.input_p1(at), b.input_p2(at)));
      }
      lists[p][j] = std::move(w);
    }
  }
  pc.reconstruct_stage.end = b.gate_count();

  pc.merge_stage.begin = b.gate_count();
  std::vector<Word> merged = emit_merge_network(b, lists);
  pc.merge_stage.end = b.gate_count();

  pc.compare_stage.begin = b.gate_count();
  std::vector<WireId> indicators;
  std::vector<Word> values;
  indicators.reserve(n);
  values.reserve(n);
  for (uint64_t j = 0; j + 1 < n; ++j) {
    std::span<const Word> window(&merged[j * m], 2 * m - 1);
    DupSelect d = dup_select_window(b, window, m);
    indicators.push_back(d.indicator);
    values.push_back(std::move(d.value));
  }
  {
    std::span<const Word> window(&merged[m * (n - 1)], m);
    DupSelect d = dup_select_final(b, window, m);
    indicators.push_back(d.indicator);
    values.push_back(std::move(d.value));
  }
  pc.compare_stage.end = b.gate_count();

  pc.output_stage.begin = b.gate_count();
  std::vector<WireId> outs;
  if (f == FunctionKind::Cardinality) {
    Word count = popcount_tail(b, indicators);
    outs = count.bits;
  } else {
    std::vector<Word> records(n);
    for (uint64_t j = 0; j < n; ++j) {
      if (v == Variant::Robust) {
        records[j].bits.reserve(width + 1);
        records[j].bits.push_back(indicators[j]);
        records[j].bits.insert(records[j].bits.end(), values[j].bits.begin(),
                               values[j].bits.end());
      } else {
        records[j] = std::move(values[j]);
      }
    }
    pc.record_width = records.front().width();
    std::vector<WireId> c1(pc.controls_per_party), c2(pc.controls_per_party);
    for (uint32_t t = 0; t < pc.controls_per_party; ++t) {
      c1[t] = b.input_p1(static_cast<uint32_t>(m * share_bits + t));
      c2[t] = b.input_p2(static_cast<uint32_t>(m * share_bits + t));
    }
    std::vector<Word> shuffled = emit_double_shuffle(b, std::move(records), c1, c2);
    for (const Word& w : shuffled) outs.insert(outs.end(), w.bits.begin(), w.bits.end());
  }
  pc.output_stage.end = b.gate_count();

  b.set_outputs(outs);
  pc.circuit = b.take();
  return pc;
}

ProtocolCircuit build_hashing_bin_circuit(uint32_t m, const BinLayout& layout, FunctionKind f,
                                          Variant v) {
  const uint32_t sp = layout.sigma_stored();
  // The robust variant runs flagged records; the masked variant is an
  // analysis-only model of bare stored words (no flag bit).
  uint32_t w = sp;
  if (v == Variant::Robust) {
    if (sp >= 63 || uint64_t(m) * layout.capacity() >= (uint64_t(1) << sp))
      throw Infeasible("m*capacity dummies do not fit in " + std::to_string(sp) + " stored bits");
    w = layout.record_width();
  }
  ProtocolCircuit pc = build_mscs(m, layout.capacity(), w, f, v);
  pc.mode = Mode::HashingMscs;
  return pc;
}

uint64_t sentinel_window_matches(uint32_t m, uint64_t n) {
  const uint64_t mn = uint64_t(m) * n;
  auto fires_on_sentinels = [&](uint64_t start, uint64_t len) {
    for (uint64_t i = 0; i + (m - 1) < len; ++i)
      if (start + i >= mn) return true;  // both probe slots are padding
    return false;
  };
  uint64_t count = 0;
  for (uint64_t j = 0; j + 1 < n; ++j)
    if (fires_on_sentinels(j * m, 2 * uint64_t(m) - 1)) ++count;
  if (fires_on_sentinels(m * (n - 1), m)) ++count;
  return count;
}

std::vector<uint8_t> random_control_bits(uint32_t count, Prg& prg) {
  std::vector<uint8_t> out(count);
  for (uint32_t i = 0; i < count; ++i) out[i] = prg.next_bit();
  return out;
}

std::vector<uint8_t> assemble_side_input(const ProtocolCircuit& pc,
                                         const std::vector<std::vector<uint8_t>>& share_halves,
                                         const std::vector<uint8_t>& controls) {
  if (share_halves.size() != pc.m)
    throw InputLengthMismatch("expected one share half per party");
  if (controls.size() != pc.controls_per_party)
    throw InputLengthMismatch("control bit count does not match the shuffle layout");
  std::vector<uint8_t> out;
  out.reserve(pc.side_input_bits());
  for (const auto& half : share_halves) {
    if (half.size() != pc.share_bits_per_party())
      throw InputLengthMismatch("share half has the wrong bit length");
    out.insert(out.end(), half.begin(), half.end());
  }
  out.insert(out.end(), controls.begin(), controls.end());
  return out;
}

OutputContext output_context(const ProtocolCircuit& pc) {
  OutputContext ctx;
  ctx.mode = pc.mode;
  ctx.f = pc.f;
  ctx.variant = pc.variant;
  ctx.m = pc.m;
  ctx.n = pc.n;
  ctx.width = pc.width;
  ctx.sentinel_matches = pc.mode == Mode::Mbwa ? 0 : sentinel_window_matches(pc.m, pc.n);
  return ctx;
}

namespace {

uint64_t resolve_element(uint64_t value, const OutputContext& ctx) {
  if (ctx.mode == Mode::HashingMscs) {
    if (ctx.layout == nullptr)
      throw ConfigError("hashing output needs the bin layout to reconstruct elements");
    const uint32_t sp = ctx.layout->sigma_stored();
    if (ctx.width == sp + 1) {  // flagged records
      if ((value >> sp) & 1) throw MalformedOutput("padding record reported as a match");
      value &= (uint64_t(1) << sp) - 1;
    }
    return ctx.layout->reconstruct(ctx.bin_index, value);
  }
  return value;
}

}  // namespace

ProtocolResult interpret_output(const std::vector<uint8_t>& bits, const OutputContext& ctx) {
  ProtocolResult res;
  switch (ctx.f) {
    case FunctionKind::BitVector: {
      const uint64_t universe = uint64_t(1) << ctx.width;
      if (bits.size() != universe) throw MalformedOutput("characteristic vector has wrong length");
      for (uint64_t x = 0; x < universe; ++x) {
        if (!bits[x]) continue;
        if (x == universe - 1) throw MalformedOutput("reserved top element reported present");
        res.elements.push_back(x);
      }
      res.cardinality = res.elements.size();
      return res;
    }
    case FunctionKind::Cardinality: {
      const uint32_t w = bit_width_for(ctx.n);
      if (bits.size() != w) throw MalformedOutput("count word has wrong length");
      const uint64_t raw = decode_msb_first(bits, 0, w);
      if (raw < ctx.sentinel_matches)
        throw MalformedOutput("count is below the known padding-match count");
      res.cardinality = raw - ctx.sentinel_matches;
      res.has_elements = false;
      return res;
    }
    case FunctionKind::RevealShuffled: {
      const uint32_t rw = ctx.variant == Variant::Robust ? ctx.width + 1 : ctx.width;
      if (bits.size() != ctx.n * rw) throw MalformedOutput("record block has wrong length");
      for (uint64_t j = 0; j < ctx.n; ++j) {
        const size_t at = j * rw;
        uint64_t value;
        if (ctx.variant == Variant::Robust) {
          const uint8_t ind = bits[at] & 1;
          value = decode_msb_first(bits, at + 1, ctx.width);
          if (!ind) {
            if (value != 0) throw MalformedOutput("non-zero value without a match bit");
            continue;
          }
        } else {
          value = decode_msb_first(bits, at, ctx.width);
          if (value == 0) continue;
        }
        if (value == all_ones(ctx.width)) continue;  // padding sentinel artifact
        res.elements.push_back(resolve_element(value, ctx));
      }
      std::sort(res.elements.begin(), res.elements.end());
      res.cardinality = res.elements.size();
      return res;
    }
  }
  throw MalformedOutput("unknown function kind");
}

}  // namespace mpsi
