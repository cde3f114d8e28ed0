#include "mpsi/shufflenet.hpp"

#include <algorithm>
#include <numeric>

namespace mpsi {

namespace {

void layout_rec(uint32_t n, const std::vector<uint32_t>& map, uint16_t depth,
                std::vector<SwitchLayout::Switch>& out) {
  if (n <= 1) return;
  if (n == 2) {
    out.push_back({map[0], map[1], depth, 0});
    return;
  }
  const uint32_t h = n / 2;
  const bool odd = n & 1;
  for (uint32_t i = 0; i < h; ++i) out.push_back({map[2 * i], map[2 * i + 1], depth, 0});
  std::vector<uint32_t> upper(h), lower(h + odd);
  for (uint32_t i = 0; i < h; ++i) {
    upper[i] = map[2 * i];
    lower[i] = map[2 * i + 1];
  }
  if (odd) lower[h] = map[n - 1];
  layout_rec(h, upper, depth + 1, out);
  layout_rec(h + odd, lower, depth + 1, out);
  const uint32_t out_switches = odd ? h : h - 1;
  for (uint32_t j = 0; j < out_switches; ++j) out.push_back({map[2 * j], map[2 * j + 1], depth, 1});
}

void route_rec(uint32_t n, const std::vector<uint32_t>& perm, std::vector<uint8_t>& out) {
  if (n <= 1) return;
  if (n == 2) {
    out.push_back(perm[0] == 1 ? 1 : 0);
    return;
  }
  const uint32_t h = n / 2;
  const bool odd = n & 1;

  std::vector<uint32_t> inv(n);
  for (uint32_t o = 0; o < n; ++o) inv[perm[o]] = o;

  // color of the element delivered to each output: 0 = upper, 1 = lower
  std::vector<int8_t> color(n, -1);
  std::vector<std::pair<uint32_t, uint8_t>> work;

  auto partner_out = [&](uint32_t o) -> int64_t {
    if (odd) return o == n - 1 ? -1 : int64_t(o ^ 1);
    return o >= n - 2 ? -1 : int64_t(o ^ 1);
  };
  auto partner_in = [&](uint32_t x) -> int64_t {
    if (odd && x == n - 1) return -1;
    return int64_t(x ^ 1);
  };
  auto assign = [&](uint32_t o, uint8_t col) {
    if (color[o] != -1) {
      if (color[o] != int8_t(col)) throw Error("internal routing conflict");
      return;
    }
    color[o] = int8_t(col);
    work.emplace_back(o, col);
  };
  auto drain = [&]() {
    while (!work.empty()) {
      auto [o, col] = work.back();
      work.pop_back();
      int64_t po = partner_out(o);
      if (po >= 0) assign(uint32_t(po), col ^ 1);
      int64_t px = partner_in(perm[o]);
      if (px >= 0) assign(inv[uint32_t(px)], col ^ 1);
    }
  };

  if (odd) {
    assign(n - 1, 1);       // unswitched output line comes from the lower subnetwork
    assign(inv[n - 1], 1);  // unswitched input line enters the lower subnetwork
  } else {
    assign(n - 2, 0);  // out[n-2] is wired straight from the upper subnetwork
    assign(n - 1, 1);  // out[n-1] straight from the lower one
  }
  drain();
  for (uint32_t o = 0; o < n; ++o) {
    if (color[o] == -1) {
      assign(o, 0);
      drain();
    }
  }

  std::vector<uint8_t> in_controls(h);
  for (uint32_t i = 0; i < h; ++i) in_controls[i] = uint8_t(color[inv[2 * i]]);

  auto out_slot = [&](uint32_t o) { return (odd && o == n - 1) ? h : o / 2; };
  auto in_slot = [&](uint32_t x) { return (odd && x == n - 1) ? h : x / 2; };
  std::vector<uint32_t> upper_perm(h), lower_perm(h + odd);
  for (uint32_t o = 0; o < n; ++o) {
    if (color[o] == 0)
      upper_perm[out_slot(o)] = in_slot(perm[o]);
    else
      lower_perm[out_slot(o)] = in_slot(perm[o]);
  }

  out.insert(out.end(), in_controls.begin(), in_controls.end());
  route_rec(h, upper_perm, out);
  route_rec(h + odd, lower_perm, out);
  const uint32_t out_switches = odd ? h : h - 1;
  for (uint32_t j = 0; j < out_switches; ++j) out.push_back(uint8_t(color[2 * j]));
}

}  // namespace

SwitchLayout waksman_layout(uint32_t n) {
  if (n == 0) throw InvalidPermutation("empty network");
  SwitchLayout l;
  l.n = n;
  std::vector<uint32_t> map(n);
  std::iota(map.begin(), map.end(), 0);
  layout_rec(n, map, 0, l.switches);
  return l;
}

uint64_t waksman_switch_count(uint32_t n) {
  if (n <= 1) return 0;
  if (n == 2) return 1;
  const uint32_t h = n / 2;
  const bool odd = n & 1;
  return h + (odd ? h : h - 1) + waksman_switch_count(h) + waksman_switch_count(h + odd);
}

std::vector<uint8_t> waksman_route(uint32_t n, const std::vector<uint32_t>& perm) {
  if (perm.size() != n) throw InvalidPermutation("permutation length != n");
  std::vector<uint8_t> seen(n, 0);
  for (uint32_t v : perm) {
    if (v >= n || seen[v]) throw InvalidPermutation("not a permutation of 0..n-1");
    seen[v] = 1;
  }
  std::vector<uint8_t> controls;
  controls.reserve(waksman_switch_count(n));
  route_rec(n, perm, controls);
  return controls;
}

std::vector<Word> emit_double_shuffle(CircuitBuilder& b, std::vector<Word> records,
                                      std::span<const WireId> controls1, std::span<const WireId> controls2) {
  const uint32_t n = static_cast<uint32_t>(records.size());
  SwitchLayout layout = waksman_layout(n);
  if (controls1.size() != layout.switches.size() || controls2.size() != layout.switches.size())
    throw WidthMismatch("control vector length != switch count");
  for (std::span<const WireId> controls : {controls1, controls2}) {
    for (size_t i = 0; i < layout.switches.size(); ++i) {
      const auto& sw = layout.switches[i];
      auto [x, y] = cond_swap(b, controls[i], records[sw.a], records[sw.b]);
      records[sw.a] = std::move(x);
      records[sw.b] = std::move(y);
    }
  }
  return records;
}

}  // namespace mpsi
