#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mpsi/gadgets.hpp"

namespace mpsi {

// Rearrangeable permutation network of 2x2 switches (control 0 = pass,
// 1 = cross). Switches conditionally swap two positions of a working array,
// in emission order: input column, upper subnetwork, lower subnetwork,
// output column. For odd sizes the unpaired line feeds the larger (lower)
// subnetwork on both sides.
struct SwitchLayout {
  uint32_t n = 0;
  struct Switch {
    uint32_t a = 0;
    uint32_t b = 0;
    uint16_t layer = 0;  // recursion depth
    uint8_t side = 0;    // 0 = input column, 1 = output column
  };
  std::vector<Switch> switches;
  uint32_t control_count() const { return static_cast<uint32_t>(switches.size()); }
};

SwitchLayout waksman_layout(uint32_t n);

// n*log2(n) - n + 1 at powers of two; recursive count otherwise.
uint64_t waksman_switch_count(uint32_t n);

// Control bits (in layout order) realizing out[o] = in[perm[o]].
std::vector<uint8_t> waksman_route(uint32_t n, const std::vector<uint32_t>& perm);

template <typename T>
void apply_switches(const SwitchLayout& layout, const std::vector<uint8_t>& controls, std::vector<T>& items) {
  if (controls.size() != layout.switches.size() || items.size() != layout.n)
    throw InvalidPermutation("control/item count does not match layout");
  for (size_t i = 0; i < layout.switches.size(); ++i)
    if (controls[i]) std::swap(items[layout.switches[i].a], items[layout.switches[i].b]);
}

// Two cascaded networks with independent control vectors (one per computing
// party); 2 * switch_count * record_width AND gates.
std::vector<Word> emit_double_shuffle(CircuitBuilder& b, std::vector<Word> records,
                                      std::span<const WireId> controls1, std::span<const WireId> controls2);

}  // namespace mpsi
