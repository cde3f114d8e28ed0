#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "mpsi/channel.hpp"
#include "mpsi/crypto.hpp"

namespace mpsi {

// Oblivious transfer of 128-bit message pairs. The sender holds `count`
// pairs (m0, m1); the receiver holds `count` choice bits and learns exactly
// m_{c} for each pair, while the sender learns nothing about the choices.
enum class OtMode : uint8_t {
  Auto = 0,        // pick Base or Extension from the transfer count
  Base = 1,        // elliptic-curve base OT for every transfer
  Extension = 2,   // IKNP extension bootstrapped from 128 base OTs
  InsecureDealer = 3,  // sends both messages in the clear; testing only
};

const char* ot_mode_name(OtMode m);
OtMode parse_ot_mode(const std::string& s);

// Auto resolves to Extension when the transfer count amortizes the base-OT
// setup (count >= 128), otherwise Base. Explicit modes pass through.
OtMode resolve_ot_mode(OtMode mode, size_t count);

// Sender side. Blocks until the transfer completes. A zero-length transfer
// exchanges no frames at all.
void ot_send(Channel& ch, const std::vector<std::array<Block, 2>>& messages, OtMode mode);

// Receiver side; choices[i] must be 0 or 1. Returns one block per choice.
std::vector<Block> ot_receive(Channel& ch, const std::vector<uint8_t>& choices, OtMode mode);

}  // namespace mpsi
