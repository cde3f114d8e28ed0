#include "mpsi/channel.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <sstream>
#include <thread>

#include "mpsi/bits.hpp"

namespace mpsi {

namespace {

constexpr uint64_t kMaxFrameBytes = 1ull << 30;

std::string errno_text(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

}  // namespace

const char* frame_name(FrameType t) {
  switch (t) {
    case FrameType::Hello: return "HELLO";
    case FrameType::CircuitHash: return "CIRC_HASH";
    case FrameType::Share: return "SHARE";
    case FrameType::OtMsg: return "OT_MSG";
    case FrameType::Tables: return "TABLES";
    case FrameType::Labels: return "LABELS";
    case FrameType::Output: return "OUTPUT";
    case FrameType::Result: return "RESULT";
    case FrameType::Abort: return "ABORT";
  }
  return "?";
}

void CommStats::add(FrameType t, uint64_t payload_bytes, bool sent) {
  PhaseBytes* p = nullptr;
  switch (t) {
    case FrameType::Hello:
    case FrameType::CircuitHash:
    case FrameType::Abort: p = &handshake; break;
    case FrameType::Share: p = &share; break;
    case FrameType::OtMsg: p = &ot; break;
    case FrameType::Tables: p = &tables; break;
    case FrameType::Labels: p = &labels; break;
    case FrameType::Output:
    case FrameType::Result: p = &output; break;
  }
  if (p == nullptr) throw ProtocolViolation("unknown frame type in accounting");
  if (sent)
    p->sent += payload_bytes;
  else
    p->received += payload_bytes;
}

uint64_t CommStats::total_sent() const {
  return handshake.sent + share.sent + ot.sent + tables.sent + labels.sent + output.sent;
}

uint64_t CommStats::total_received() const {
  return handshake.received + share.received + ot.received + tables.received + labels.received +
         output.received;
}

void CommStats::merge(const CommStats& other) {
  auto acc = [](PhaseBytes& a, const PhaseBytes& b) {
    a.sent += b.sent;
    a.received += b.received;
  };
  acc(handshake, other.handshake);
  acc(share, other.share);
  acc(ot, other.ot);
  acc(tables, other.tables);
  acc(labels, other.labels);
  acc(output, other.output);
}

std::string CommStats::summary() const {
  std::ostringstream os;
  auto put = [&](const char* name, const PhaseBytes& p) {
    os << name << "_sent=" << p.sent << " " << name << "_recv=" << p.received << " ";
  };
  put("handshake", handshake);
  put("share", share);
  put("ot", ot);
  put("tables", tables);
  put("labels", labels);
  put("output", output);
  os << "rows_per_and=" << rows_per_and << " total_bytes=" << total();
  return os.str();
}

void Channel::send_frame(FrameType type, const std::vector<uint8_t>& payload) {
  if (payload.size() + 1 > kMaxFrameBytes) throw ProtocolViolation("frame too large to send");
  std::vector<uint8_t> header(5);
  put_u32be(header.data(), static_cast<uint32_t>(payload.size() + 1));
  header[4] = static_cast<uint8_t>(type);
  write_all(header.data(), header.size());
  if (!payload.empty()) write_all(payload.data(), payload.size());
  stats_.add(type, payload.size(), /*sent=*/true);
}

Frame Channel::recv_frame() {
  uint8_t lenbuf[4];
  read_all(lenbuf, 4);
  const uint32_t len = get_u32be(lenbuf);
  if (len == 0 || len > kMaxFrameBytes) throw ProtocolViolation("invalid frame length");
  uint8_t type_byte = 0;
  read_all(&type_byte, 1);
  if (type_byte < 1 || type_byte > 9) throw ProtocolViolation("unknown frame type");
  Frame f;
  f.type = static_cast<FrameType>(type_byte);
  f.payload.resize(len - 1);
  if (!f.payload.empty()) read_all(f.payload.data(), f.payload.size());
  stats_.add(f.type, f.payload.size(), /*sent=*/false);
  return f;
}

std::vector<uint8_t> Channel::recv_expect(FrameType type) {
  Frame f = recv_frame();
  if (f.type == FrameType::Abort && type != FrameType::Abort)
    throw SessionAborted(std::string(f.payload.begin(), f.payload.end()));
  if (f.type != type)
    throw ProtocolViolation(std::string("expected ") + frame_name(type) + " frame, got " +
                            frame_name(f.type));
  return std::move(f.payload);
}

TcpChannel::TcpChannel(int fd) : fd_(fd) {
  if (fd_ < 0) throw ChannelClosed("invalid socket descriptor");
  int one = 1;
  // Best effort: unix-domain pairs used in tests do not support this option.
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpChannel::write_all(const uint8_t* data, size_t len) {
  size_t off = 0;
  while (off < len) {
    const ssize_t k = ::send(fd_, data + off, len - off, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      throw ChannelClosed(errno_text("send"));
    }
    off += static_cast<size_t>(k);
  }
}

void TcpChannel::read_all(uint8_t* data, size_t len) {
  size_t off = 0;
  while (off < len) {
    const ssize_t k = ::recv(fd_, data + off, len - off, 0);
    if (k == 0) throw ChannelClosed("connection closed by peer");
    if (k < 0) {
      if (errno == EINTR) continue;
      throw ChannelClosed(errno_text("recv"));
    }
    off += static_cast<size_t>(k);
  }
}

std::pair<std::string, uint16_t> parse_endpoint(const std::string& s) {
  const size_t colon = s.rfind(':');
  std::string host = colon == std::string::npos ? std::string() : s.substr(0, colon);
  const std::string port_str = colon == std::string::npos ? s : s.substr(colon + 1);
  if (host.empty()) host = "0.0.0.0";
  char* end = nullptr;
  const unsigned long port = std::strtoul(port_str.c_str(), &end, 10);
  if (end == nullptr || *end != '\0' || port == 0 || port > 65535)
    throw ConfigError("invalid endpoint '" + s + "' (expected host:port)");
  return {host, static_cast<uint16_t>(port)};
}

namespace {

struct AddrInfo {
  addrinfo* res = nullptr;
  ~AddrInfo() {
    if (res) ::freeaddrinfo(res);
  }
};

}  // namespace

int tcp_listen(const std::string& host, uint16_t port, int backlog) {
  AddrInfo ai;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  const std::string port_str = std::to_string(port);
  if (::getaddrinfo(host.empty() ? nullptr : host.c_str(), port_str.c_str(), &hints, &ai.res) != 0)
    throw ChannelClosed("cannot resolve listen address " + host);
  const int fd = ::socket(ai.res->ai_family, ai.res->ai_socktype, ai.res->ai_protocol);
  if (fd < 0) throw ChannelClosed(errno_text("socket"));
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd, ai.res->ai_addr, ai.res->ai_addrlen) != 0) {
    const std::string msg = errno_text("bind");
    ::close(fd);
    throw ChannelClosed(msg + " on port " + port_str);
  }
  if (::listen(fd, backlog) != 0) {
    const std::string msg = errno_text("listen");
    ::close(fd);
    throw ChannelClosed(msg);
  }
  return fd;
}

std::unique_ptr<TcpChannel> tcp_accept(int listen_fd) {
  while (true) {
    const int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd >= 0) return std::make_unique<TcpChannel>(fd);
    if (errno == EINTR) continue;
    throw ChannelClosed(errno_text("accept"));
  }
}

std::unique_ptr<TcpChannel> tcp_connect(const std::string& host, uint16_t port, int timeout_ms) {
  AddrInfo ai;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  const std::string port_str = std::to_string(port);
  if (::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &ai.res) != 0)
    throw ChannelClosed("cannot resolve " + host);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  while (true) {
    const int fd = ::socket(ai.res->ai_family, ai.res->ai_socktype, ai.res->ai_protocol);
    if (fd < 0) throw ChannelClosed(errno_text("socket"));
    if (::connect(fd, ai.res->ai_addr, ai.res->ai_addrlen) == 0)
      return std::make_unique<TcpChannel>(fd);
    const int err = errno;
    ::close(fd);
    const bool retryable = err == ECONNREFUSED || err == ECONNRESET || err == ETIMEDOUT ||
                           err == EAGAIN || err == EINTR;
    if (!retryable || std::chrono::steady_clock::now() >= deadline)
      throw ChannelClosed("connect to " + host + ":" + port_str + ": " + std::strerror(err));
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

std::pair<std::unique_ptr<TcpChannel>, std::unique_ptr<TcpChannel>> stream_channel_pair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0)
    throw ChannelClosed(errno_text("socketpair"));
  return {std::make_unique<TcpChannel>(fds[0]), std::make_unique<TcpChannel>(fds[1])};
}

}  // namespace mpsi
