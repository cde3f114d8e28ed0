#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mpsi/errors.hpp"

namespace mpsi {

// Frame types of the length-prefixed wire protocol. A frame is a 4-byte
// big-endian length (counting the type byte plus the payload), one type
// byte, then the payload.
enum class FrameType : uint8_t {
  Hello = 1,
  CircuitHash = 2,
  Share = 3,
  OtMsg = 4,
  Tables = 5,
  Labels = 6,
  Output = 7,
  Result = 8,
  Abort = 9,
};

const char* frame_name(FrameType t);

struct PhaseBytes {
  uint64_t sent = 0;
  uint64_t received = 0;
  uint64_t total() const { return sent + received; }
};

// Payload byte accounting per protocol phase, both directions. Frames are
// bucketed by their type, so both endpoints agree on the classification.
struct CommStats {
  PhaseBytes handshake;  // Hello, CircuitHash, Abort
  PhaseBytes share;      // Share
  PhaseBytes ot;         // OtMsg
  PhaseBytes tables;     // Tables
  PhaseBytes labels;     // Labels
  PhaseBytes output;     // Output, Result
  uint32_t rows_per_and = 4;

  void add(FrameType t, uint64_t payload_bytes, bool sent);
  uint64_t total_sent() const;
  uint64_t total_received() const;
  uint64_t total() const { return total_sent() + total_received(); }
  void merge(const CommStats& other);
  std::string summary() const;  // single key=value line
};

struct Frame {
  FrameType type{};
  std::vector<uint8_t> payload;
};

class Channel {
 public:
  virtual ~Channel() = default;

  void send_frame(FrameType type, const std::vector<uint8_t>& payload);
  Frame recv_frame();

  // Returns the payload of the next frame, which must have the given type;
  // a peer Abort frame raises SessionAborted with the peer's reason.
  std::vector<uint8_t> recv_expect(FrameType type);

  CommStats& stats() { return stats_; }
  const CommStats& stats() const { return stats_; }

 protected:
  virtual void write_all(const uint8_t* data, size_t len) = 0;
  virtual void read_all(uint8_t* data, size_t len) = 0;

 private:
  CommStats stats_;
};

class TcpChannel final : public Channel {
 public:
  explicit TcpChannel(int fd);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;
  int fd() const { return fd_; }

 protected:
  void write_all(const uint8_t* data, size_t len) override;
  void read_all(uint8_t* data, size_t len) override;

 private:
  int fd_ = -1;
};

// "host:port" -> (host, port); host defaults to 0.0.0.0 for a bare port.
std::pair<std::string, uint16_t> parse_endpoint(const std::string& s);

int tcp_listen(const std::string& host, uint16_t port, int backlog = 64);
std::unique_ptr<TcpChannel> tcp_accept(int listen_fd);
// Retries while the peer is not listening yet, up to timeout_ms.
std::unique_ptr<TcpChannel> tcp_connect(const std::string& host, uint16_t port,
                                        int timeout_ms = 15000);

// Connected in-process stream pair (for loopback tests).
std::pair<std::unique_ptr<TcpChannel>, std::unique_ptr<TcpChannel>> stream_channel_pair();

}  // namespace mpsi
