#pragma once

#include <stdexcept>
#include <string>

namespace mpsi {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// circuit
struct UndefinedWire : Error {
  using Error::Error;
};
struct ArityMismatch : Error {
  using Error::Error;
};
struct InputLengthMismatch : Error {
  using Error::Error;
};
struct ParseError : Error {
  int line;
  ParseError(int line_no, const std::string& msg)
      : Error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

// gadgets / networks
struct WidthMismatch : Error {
  using Error::Error;
};
struct WrongWindowSize : Error {
  using Error::Error;
};
struct NotPowerOfTwo : Error {
  using Error::Error;
};
struct UnsortedInput : Error {
  using Error::Error;
};
struct InvalidPermutation : Error {
  using Error::Error;
};

// hashing
struct DomainViolation : Error {
  using Error::Error;
};
struct BinOverflow : Error {
  using Error::Error;
};
struct Infeasible : Error {
  using Error::Error;
};

// protocol
struct DuplicateElement : Error {
  using Error::Error;
};
struct UniverseTooLarge : Error {
  using Error::Error;
};
struct InvalidVariant : Error {
  using Error::Error;
};
struct MalformedOutput : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

// two-party engine
struct ChannelClosed : Error {
  using Error::Error;
};
struct ProtocolViolation : Error {
  using Error::Error;
};
struct HandshakeMismatch : Error {
  using Error::Error;
};
struct DecodeFailure : Error {
  using Error::Error;
};
struct SessionAborted : Error {
  using Error::Error;
};

}  // namespace mpsi
