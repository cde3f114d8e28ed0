#include "mpsi/gadgets.hpp"

#include "mpsi/bits.hpp"

namespace mpsi {

namespace {

void check_same_width(const Word& x, const Word& y) {
  if (x.width() != y.width() || x.width() == 0)
    throw WidthMismatch("word widths " + std::to_string(x.width()) + " vs " + std::to_string(y.width()));
}

// balanced AND tree over `bits`; bits.size()-1 AND gates
WireId and_tree(CircuitBuilder& b, std::vector<WireId> bits) {
  if (bits.empty()) throw WidthMismatch("empty AND tree");
  while (bits.size() > 1) {
    std::vector<WireId> next;
    next.reserve((bits.size() + 1) / 2);
    for (size_t i = 0; i + 1 < bits.size(); i += 2) next.push_back(b.and_(bits[i], bits[i + 1]));
    if (bits.size() % 2) next.push_back(bits.back());
    bits = std::move(next);
  }
  return bits[0];
}

// OR via De Morgan: INV gates are free, so this costs bits.size()-1 ANDs
WireId or_tree(CircuitBuilder& b, std::vector<WireId> bits) {
  for (WireId& w : bits) w = b.inv_(w);
  return b.inv_(and_tree(b, std::move(bits)));
}

}  // namespace

Word constant_word(CircuitBuilder& b, uint64_t value, uint32_t width) {
  if (width == 0 || (width < 64 && value >> width))
    throw WidthMismatch("constant does not fit in " + std::to_string(width) + " bits");
  Word w;
  w.bits.resize(width);
  for (uint32_t i = 0; i < width; ++i)
    w.bits[i] = ((value >> (width - 1 - i)) & 1) ? b.const1() : b.const0();
  return w;
}

WireId comparator_gt(CircuitBuilder& b, const Word& a, const Word& w) {
  check_same_width(a, w);
  const uint32_t sigma = a.width();
  // carry-chain from the least significant bit upward:
  //   c' = ((a_i ^ c) & (b_i ^ c)) ^ a_i   keeps c when bits agree, else a_i
  WireId ai = a.bits[sigma - 1], bi = w.bits[sigma - 1];
  WireId c = b.and_(ai, b.inv_(bi));  // first step with c_0 = 0
  for (uint32_t i = 2; i <= sigma; ++i) {
    ai = a.bits[sigma - i];
    bi = w.bits[sigma - i];
    c = b.xor_(b.and_(b.xor_(ai, c), b.xor_(bi, c)), ai);
  }
  return c;
}

std::pair<Word, Word> cond_swap(CircuitBuilder& b, WireId c, const Word& x, const Word& y) {
  check_same_width(x, y);
  Word lo, hi;
  lo.bits.reserve(x.width());
  hi.bits.reserve(x.width());
  for (uint32_t i = 0; i < x.width(); ++i) {
    WireId t = b.and_(c, b.xor_(x.bits[i], y.bits[i]));
    lo.bits.push_back(b.xor_(x.bits[i], t));
    hi.bits.push_back(b.xor_(y.bits[i], t));
  }
  return {lo, hi};
}

std::pair<Word, Word> sorter2(CircuitBuilder& b, const Word& x, const Word& y) {
  WireId gt = comparator_gt(b, x, y);
  return cond_swap(b, gt, x, y);
}

WireId equality(CircuitBuilder& b, const Word& x, const Word& y) {
  check_same_width(x, y);
  std::vector<WireId> eq;
  eq.reserve(x.width());
  for (uint32_t i = 0; i < x.width(); ++i) eq.push_back(b.xnor_(x.bits[i], y.bits[i]));
  return and_tree(b, std::move(eq));
}

Word select_masked(CircuitBuilder& b, WireId c, const Word& v) {
  Word out;
  out.bits.reserve(v.width());
  for (WireId w : v.bits) out.bits.push_back(b.and_(c, w));
  return out;
}

DupSelect dup_select_window(CircuitBuilder& b, std::span<const Word> elems, uint32_t m) {
  if (m < 2) throw WrongWindowSize("window needs m >= 2");
  if (elems.size() != size_t(2 * m - 1))
    throw WrongWindowSize("window of " + std::to_string(elems.size()) + " elements, expected " +
                          std::to_string(2 * m - 1));
  // A run of m equal values starting at offset i (0 <= i <= m-1) makes
  // e_i == e_{i+m-1}; in a sorted window the converse holds too. All
  // candidate runs contain the centre element e_{m-1}.
  std::vector<WireId> eq;
  eq.reserve(m);
  for (uint32_t i = 0; i < m; ++i) eq.push_back(equality(b, elems[i], elems[i + m - 1]));
  WireId ind = or_tree(b, std::move(eq));
  return {ind, select_masked(b, ind, elems[m - 1])};
}

DupSelect dup_select_final(CircuitBuilder& b, std::span<const Word> elems, uint32_t m) {
  if (m < 2) throw WrongWindowSize("window needs m >= 2");
  if (elems.size() != size_t(m))
    throw WrongWindowSize("final window of " + std::to_string(elems.size()) + " elements, expected " +
                          std::to_string(m));
  WireId ind = equality(b, elems[0], elems[m - 1]);
  return {ind, select_masked(b, ind, elems[0])};
}

namespace {

struct Counter {
  std::vector<WireId> bits_lsb;  // least significant first
  uint64_t max_value;
};

// ripple add; result width covers max_a + max_b exactly
Counter add_counters(CircuitBuilder& b, const Counter& x, const Counter& y) {
  Counter r;
  r.max_value = x.max_value + y.max_value;
  const uint32_t out_w = bit_width_for(r.max_value);
  WireId carry = kNoWire;
  for (uint32_t i = 0; i < out_w; ++i) {
    WireId a = i < x.bits_lsb.size() ? x.bits_lsb[i] : kNoWire;
    WireId c = i < y.bits_lsb.size() ? y.bits_lsb[i] : kNoWire;
    if (a != kNoWire && c == kNoWire) std::swap(a, c);
    if (a == kNoWire && c == kNoWire) {
      r.bits_lsb.push_back(carry != kNoWire ? carry : b.const0());
      carry = kNoWire;
    } else if (a == kNoWire) {  // single operand bit c
      if (carry == kNoWire) {
        r.bits_lsb.push_back(c);
      } else {
        r.bits_lsb.push_back(b.xor_(c, carry));
        carry = b.and_(c, carry);
      }
    } else {  // full position
      if (carry == kNoWire) {
        r.bits_lsb.push_back(b.xor_(a, c));
        carry = b.and_(a, c);
      } else {
        // s = a ^ c ^ k;  k' = k ^ ((a ^ k) & (c ^ k))   (one AND per full adder)
        WireId axk = b.xor_(a, carry);
        WireId cxk = b.xor_(c, carry);
        r.bits_lsb.push_back(b.xor_(axk, c));
        carry = b.xor_(b.and_(axk, cxk), carry);
      }
    }
  }
  return r;
}

}  // namespace

Word popcount_tail(CircuitBuilder& b, std::span<const WireId> indicators) {
  if (indicators.empty()) throw WidthMismatch("popcount over zero indicators");
  std::vector<Counter> terms;
  terms.reserve(indicators.size());
  for (WireId w : indicators) terms.push_back(Counter{{w}, 1});
  while (terms.size() > 1) {
    std::vector<Counter> next;
    next.reserve((terms.size() + 1) / 2);
    for (size_t i = 0; i + 1 < terms.size(); i += 2) next.push_back(add_counters(b, terms[i], terms[i + 1]));
    if (terms.size() % 2) next.push_back(terms.back());
    terms = std::move(next);
  }
  Word out;
  out.bits.assign(terms[0].bits_lsb.rbegin(), terms[0].bits_lsb.rend());
  return out;
}

}  // namespace mpsi
