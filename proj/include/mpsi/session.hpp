#pragma once

#include <cstdint>
#include <vector>

#include "mpsi/channel.hpp"
#include "mpsi/circuit.hpp"
#include "mpsi/ot.hpp"

namespace mpsi {

// The generator garbles and the evaluator evaluates; both end up with the
// plaintext output bits. Party 1 of the outer protocol always generates.
enum class SessionRole : uint8_t { Generator = 1, Evaluator = 2 };

struct SecurityParams {
  uint32_t kappa = 128;  // computational: label width in bits
  uint32_t lambda = 80;  // statistical: declared for parameter derivations
};

struct TwopcConfig {
  uint64_t seed = 0;  // garbling randomness (generator side only)
  OtMode ot_mode = OtMode::Auto;
  bool insecure_ot_allowed = false;
  SecurityParams security{};
  uint32_t bin_id = 0;      // cross-checked in the hello exchange
  uint32_t party_index = 0;  // diagnostic tag, not cross-checked
};

struct SessionOutcome {
  std::vector<uint8_t> output_bits;  // one byte per circuit output
  CommStats stats;
};

// Runs one semi-honest two-party evaluation of `c` over the channel:
// hello and circuit-hash cross-checks, OT for the evaluator's input labels,
// garbled tables and generator labels, then output decoding on the evaluator
// side with the plaintext bits echoed back so both roles return them.
// `my_input_bits` is the p1 segment for the generator, p2 for the evaluator.
SessionOutcome run_session(Channel& ch, SessionRole role, const Circuit& c,
                           const std::vector<uint8_t>& my_input_bits, const TwopcConfig& cfg);

// Reference path used by tests and the self-check: same interface contract,
// evaluated locally without any cryptography.
std::vector<uint8_t> cleartext_session(const Circuit& c, const std::vector<uint8_t>& p1_bits,
                                       const std::vector<uint8_t>& p2_bits);

}  // namespace mpsi
