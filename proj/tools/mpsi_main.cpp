// Command-line entry point: one binary exposing the protocol runner and the
// supporting offline tools (circuit generation, cost analysis, bin-parameter
// optimization, self checks, micro benchmarks).

#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "mpsi/analysis.hpp"
#include "mpsi/bits.hpp"
#include "mpsi/channel.hpp"
#include "mpsi/circuit.hpp"
#include "mpsi/crypto.hpp"
#include "mpsi/errors.hpp"
#include "mpsi/gadgets.hpp"
#include "mpsi/garble.hpp"
#include "mpsi/hashing.hpp"
#include "mpsi/ot.hpp"
#include "mpsi/protocol.hpp"
#include "mpsi/session.hpp"
#include "mpsi/shufflenet.hpp"
#include "mpsi/sortnet.hpp"

namespace {

using namespace mpsi;

// ---------------------------------------------------------------------------
// logging (MPSI_LOG=off|info|debug, default info, stderr)

enum class LogLevel { Off = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("MPSI_LOG");
    if (!env) return LogLevel::Info;
    const std::string v(env);
    if (v == "off") return LogLevel::Off;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Info;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) std::cerr << "[debug] " << msg << "\n";
}

std::string fmt_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// options

struct RunOptions {
  std::string role;
  uint32_t m = 0;
  uint64_t n = 0;
  uint32_t sigma = 0;
  std::string mode_s = "mscs";
  std::string f_s = "reveal";
  std::string variant_s = "robust";
  std::string ot_s = "auto";
  double gamma = 40.0;
  double delta = 1.0;
  uint64_t hash_seed = 0;
  std::string listen;
  std::string connect;
  std::string input;
  std::string output;
  uint64_t seed = 0;
  bool seed_set = false;
  bool insecure_ot = false;
  std::string config;
};

struct GenOptions {
  std::string stage;
  uint32_t m = 3;
  uint64_t n = 0;
  uint32_t sigma = 0;
  std::string f_s = "reveal";
  std::string variant_s = "robust";
  std::string output;
};

struct AnalyzeOptions {
  uint32_t m = 3;
  uint64_t n = 0;
  uint32_t sigma = 0;
  std::string mode_s = "hashing-mscs";
  std::string f_s = "reveal";
  std::string variant_s = "robust";
  double gamma = 40.0;
  double delta = 1.0;
};

struct OptimizeOptions {
  uint32_t m = 3;
  uint64_t n = 0;
  uint32_t sigma = 0;
  double gamma = 40.0;
};

// ---------------------------------------------------------------------------
// config file: plain key=value lines, '#' comments, unknown keys rejected,
// command-line flags take precedence

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    if (kv.count(key))
      throw ConfigError(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

uint64_t parse_u64_value(const std::string& v, const std::string& key) {
  char* end = nullptr;
  errno = 0;
  const uint64_t x = std::strtoull(v.c_str(), &end, 0);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    throw ConfigError("config key '" + key + "': invalid integer '" + v + "'");
  return x;
}

double parse_double_value(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config key '" + key + "': invalid number '" + v + "'");
  return x;
}

bool parse_bool_value(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("config key '" + key + "': invalid boolean '" + v + "'");
}

void apply_run_config(CLI::App* sub, RunOptions& o) {
  const auto kv = load_config_file(o.config);
  const auto flag_set = [&](const char* flag) { return sub->count(flag) > 0; };
  for (const auto& [key, value] : kv) {
    if (key == "role") {
      if (!flag_set("--role")) o.role = value;
    } else if (key == "m") {
      if (!flag_set("--m")) o.m = static_cast<uint32_t>(parse_u64_value(value, key));
    } else if (key == "n") {
      if (!flag_set("--n")) o.n = parse_u64_value(value, key);
    } else if (key == "sigma") {
      if (!flag_set("--sigma")) o.sigma = static_cast<uint32_t>(parse_u64_value(value, key));
    } else if (key == "mode") {
      if (!flag_set("--mode")) o.mode_s = value;
    } else if (key == "f") {
      if (!flag_set("--f")) o.f_s = value;
    } else if (key == "variant") {
      if (!flag_set("--variant")) o.variant_s = value;
    } else if (key == "gamma") {
      if (!flag_set("--gamma")) o.gamma = parse_double_value(value, key);
    } else if (key == "delta") {
      if (!flag_set("--delta")) o.delta = parse_double_value(value, key);
    } else if (key == "hash-seed") {
      if (!flag_set("--hash-seed")) o.hash_seed = parse_u64_value(value, key);
    } else if (key == "listen") {
      if (!flag_set("--listen")) o.listen = value;
    } else if (key == "connect") {
      if (!flag_set("--connect")) o.connect = value;
    } else if (key == "input") {
      if (!flag_set("--input")) o.input = value;
    } else if (key == "output") {
      if (!flag_set("--output")) o.output = value;
    } else if (key == "seed") {
      if (!flag_set("--seed")) {
        o.seed = parse_u64_value(value, key);
        o.seed_set = true;
      }
    } else if (key == "ot") {
      if (!flag_set("--ot")) o.ot_s = value;
    } else if (key == "insecure-ot") {
      if (!flag_set("--insecure-ot")) o.insecure_ot = parse_bool_value(value, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// input / output files

std::vector<uint64_t> parse_input_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input file '" + path + "'");
  std::vector<uint64_t> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const int base = (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) ? 16 : 10;
    char* end = nullptr;
    errno = 0;
    const uint64_t x = std::strtoull(t.c_str(), &end, base);
    if (errno != 0 || end == t.c_str() || *end != '\0')
      throw ConfigError(path + ":" + std::to_string(lineno) + ": invalid element '" + t + "'");
    out.push_back(x);
  }
  return out;
}

std::string render_result(const ProtocolResult& r, FunctionKind f) {
  std::ostringstream os;
  if (f == FunctionKind::Cardinality) {
    os << "# cardinality: " << r.cardinality << "\n";
  } else {
    for (uint64_t e : r.elements) os << e << "\n";
  }
  return os.str();
}

void write_result_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << text;
}

void write_text_file(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << text;
}

// ---------------------------------------------------------------------------
// run: shared plumbing

constexpr uint8_t kRoleP1 = 1;
constexpr uint8_t kRoleP2 = 2;
constexpr uint8_t kRoleDealer = 3;

struct RunPlan {
  Mode mode = Mode::Mscs;
  FunctionKind f = FunctionKind::RevealShuffled;
  Variant variant = Variant::Robust;
  OtMode ot = OtMode::Auto;
  uint32_t beta = 1;
  std::optional<BinLayout> layout;
  ProtocolCircuit pc;
  std::array<uint8_t, 8> digest{};
};

std::array<uint8_t, 8> params_digest(const RunOptions& o, const RunPlan& plan) {
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "m=%u|n=%llu|sigma=%u|mode=%s|f=%s|variant=%s|gamma=%.17g|delta=%.17g|"
                "hash_seed=%llu|insecure=%d|ot=%s|kappa=128",
                o.m, static_cast<unsigned long long>(o.n), o.sigma, mode_name(plan.mode),
                function_name(plan.f), variant_name(plan.variant), o.gamma, o.delta,
                static_cast<unsigned long long>(o.hash_seed), o.insecure_ot ? 1 : 0,
                ot_mode_name(plan.ot));
  const auto d = sha256(std::string(buf));
  std::array<uint8_t, 8> out{};
  std::copy_n(d.begin(), 8, out.begin());
  return out;
}

std::vector<uint8_t> make_hello(uint8_t role, uint32_t party, uint32_t bin,
                                const std::array<uint8_t, 8>& digest) {
  std::vector<uint8_t> p;
  p.push_back(role);
  put_u32be(p, party);
  put_u32be(p, bin);
  p.insert(p.end(), digest.begin(), digest.end());
  return p;
}

struct HelloInfo {
  uint8_t role = 0;
  uint32_t party = 0;
  uint32_t bin = 0;
};

HelloInfo read_hello(const std::vector<uint8_t>& payload, const std::array<uint8_t, 8>& digest) {
  if (payload.size() != 17) throw HandshakeMismatch("hello payload has wrong size");
  HelloInfo h{payload[0], get_u32be(payload.data() + 1), get_u32be(payload.data() + 5)};
  if (!std::equal(digest.begin(), digest.end(), payload.begin() + 9))
    throw HandshakeMismatch("endpoints were started with different protocol parameters");
  return h;
}

std::vector<uint8_t> share_frame(uint32_t party, uint32_t bin, const std::vector<uint8_t>& bits) {
  std::vector<uint8_t> p;
  put_u32be(p, party);
  put_u32be(p, bin);
  put_u32be(p, static_cast<uint32_t>(bits.size()));
  const auto packed = pack_bits(bits);
  p.insert(p.end(), packed.begin(), packed.end());
  return p;
}

std::vector<uint8_t> parse_share_frame(const std::vector<uint8_t>& payload, uint32_t expect_party,
                                       uint32_t expect_bin, uint64_t expect_bits) {
  if (payload.size() < 12) throw ProtocolViolation("share frame has wrong size");
  const uint32_t party = get_u32be(payload.data());
  const uint32_t bin = get_u32be(payload.data() + 4);
  const uint32_t bits = get_u32be(payload.data() + 8);
  if (party != expect_party || bin != expect_bin)
    throw ProtocolViolation("share frame labeled for party " + std::to_string(party) + " bin " +
                            std::to_string(bin) + ", expected party " +
                            std::to_string(expect_party) + " bin " + std::to_string(expect_bin));
  if (bits != expect_bits || payload.size() != 12 + (expect_bits + 7) / 8)
    throw ProtocolViolation("share frame carries the wrong number of bits");
  return unpack_bits(payload.data() + 12, bits);
}

uint64_t derive_bin_seed(uint64_t seed, uint32_t bin) {
  std::vector<uint8_t> buf;
  const std::string tag = "mpsi bin seed|";
  buf.insert(buf.end(), tag.begin(), tag.end());
  put_u64le(buf, seed);
  for (int k = 0; k < 4; ++k) buf.push_back(static_cast<uint8_t>(bin >> (8 * k)));
  const auto d = sha256(buf.data(), buf.size());
  return get_u64le(d.data());
}

std::vector<SharePair> make_shares(const RunPlan& plan, const RunOptions& o,
                                   const std::vector<uint64_t>& set, uint32_t party_index,
                                   Prg& prg) {
  std::vector<SharePair> out;
  if (plan.mode == Mode::Mbwa) {
    out.push_back(share_bitvector(set, o.sigma, prg));
  } else if (plan.mode == Mode::Mscs) {
    out.push_back(share_sorted_set(set, o.sigma, prg));
  } else {
    PartyBins pb = build_bins(set, *plan.layout, party_index, o.m);
    out.reserve(pb.bins.size());
    for (const auto& bin : pb.bins)
      out.push_back(share_sorted_set(bin, plan.layout->record_width(), prg));
  }
  return out;
}

void broadcast_abort(const std::vector<Channel*>& conns, const std::string& reason) {
  const std::vector<uint8_t> payload(reason.begin(), reason.end());
  for (Channel* ch : conns) {
    try {
      ch->send_frame(FrameType::Abort, payload);
    } catch (...) {
      // peer already gone; nothing further to do
    }
  }
}

ProtocolResult interpret_all(const RunPlan& plan,
                             const std::vector<std::vector<uint8_t>>& outputs) {
  OutputContext ctx = output_context(plan.pc);
  if (plan.layout) ctx.layout = &*plan.layout;
  ProtocolResult merged;
  merged.has_elements = plan.f != FunctionKind::Cardinality;
  for (uint32_t b = 0; b < outputs.size(); ++b) {
    ctx.bin_index = b;
    const ProtocolResult r = interpret_output(outputs[b], ctx);
    merged.cardinality += r.cardinality;
    merged.elements.insert(merged.elements.end(), r.elements.begin(), r.elements.end());
  }
  std::sort(merged.elements.begin(), merged.elements.end());
  return merged;
}

// One garbled-circuit session per bin, in parallel threads.
std::pair<std::vector<std::vector<uint8_t>>, CommStats> run_bin_sessions(
    const RunPlan& plan, const RunOptions& o, SessionRole role,
    std::vector<std::unique_ptr<TcpChannel>>& bins,
    const std::vector<std::vector<std::vector<uint8_t>>>& halves,
    const std::vector<std::vector<uint8_t>>& controls) {
  const uint32_t beta = plan.beta;
  std::vector<std::vector<uint8_t>> outputs(beta);
  std::vector<CommStats> stats(beta);
  std::vector<std::exception_ptr> errors(beta);

  auto work = [&](uint32_t b) {
    try {
      std::vector<std::vector<uint8_t>> party_halves(o.m);
      for (uint32_t i = 1; i <= o.m; ++i) party_halves[i - 1] = halves[i][b];
      const auto side_input = assemble_side_input(plan.pc, party_halves, controls[b]);
      TwopcConfig cfg;
      cfg.seed = derive_bin_seed(o.seed, b);
      cfg.ot_mode = plan.ot;
      cfg.insecure_ot_allowed = o.insecure_ot;
      cfg.bin_id = b;
      cfg.party_index = role == SessionRole::Generator ? 1 : 2;
      SessionOutcome out = run_session(*bins[b], role, plan.pc.circuit, side_input, cfg);
      outputs[b] = std::move(out.output_bits);
      stats[b] = out.stats;
      log_debug("bin " + std::to_string(b) + " session done");
    } catch (...) {
      errors[b] = std::current_exception();
    }
  };

  if (beta == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(beta);
    for (uint32_t b = 0; b < beta; ++b) threads.emplace_back(work, b);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  CommStats total;
  for (const auto& s : stats) total.merge(s);
  return {std::move(outputs), total};
}

// ---------------------------------------------------------------------------
// run: the three roles

int run_p1(const RunOptions& o, RunPlan& plan, const std::vector<uint64_t>& set) {
  if (o.listen.empty()) throw ConfigError("role p1 requires --listen");
  const auto [host, port] = parse_endpoint(o.listen);
  const int lfd = tcp_listen(host, port);
  log_info("p1: listening on " + o.listen);

  const uint32_t m = o.m;
  const uint32_t beta = plan.beta;
  std::vector<std::unique_ptr<TcpChannel>> dealers(m + 1);
  std::vector<std::unique_ptr<TcpChannel>> bins(beta);
  std::vector<Channel*> all;
  const size_t expected = (m - 2) + beta;
  for (size_t k = 0; k < expected; ++k) {
    auto ch = tcp_accept(lfd);
    const HelloInfo h = read_hello(ch->recv_expect(FrameType::Hello), plan.digest);
    ch->send_frame(FrameType::Hello, make_hello(kRoleP1, 1, h.bin, plan.digest));
    if (h.role == kRoleP2) {
      if (h.party != 2 || h.bin >= beta || bins[h.bin])
        throw ProtocolViolation("unexpected evaluator bin connection");
      all.push_back(ch.get());
      bins[h.bin] = std::move(ch);
    } else if (h.role == kRoleDealer) {
      if (h.party < 3 || h.party > m || dealers[h.party])
        throw ProtocolViolation("unexpected dealer connection for party " +
                                std::to_string(h.party));
      all.push_back(ch.get());
      dealers[h.party] = std::move(ch);
    } else {
      throw ProtocolViolation("unexpected hello role");
    }
  }
  ::close(lfd);
  log_info("p1: all peers connected");

  try {
    Prg prg = Prg::from_seed(o.seed, "party1");
    auto own = make_shares(plan, o, set, 1, prg);
    const uint64_t bits_per = plan.pc.share_bits_per_party();

    std::vector<std::vector<std::vector<uint8_t>>> halves(
        m + 1, std::vector<std::vector<uint8_t>>(beta));
    for (uint32_t b = 0; b < beta; ++b) halves[1][b] = std::move(own[b].to_p1);
    for (uint32_t i = 3; i <= m; ++i)
      for (uint32_t b = 0; b < beta; ++b)
        halves[i][b] =
            parse_share_frame(dealers[i]->recv_expect(FrameType::Share), i, b, bits_per);
    for (uint32_t b = 0; b < beta; ++b)
      halves[2][b] = parse_share_frame(bins[0]->recv_expect(FrameType::Share), 2, b, bits_per);
    for (uint32_t b = 0; b < beta; ++b)
      bins[0]->send_frame(FrameType::Share, share_frame(1, b, own[b].to_p2));
    log_info("p1: share exchange complete");

    std::vector<std::vector<uint8_t>> controls(beta);
    for (uint32_t b = 0; b < beta; ++b)
      controls[b] = random_control_bits(plan.pc.controls_per_party, prg);

    auto [outputs, stats] = run_bin_sessions(plan, o, SessionRole::Generator, bins, halves,
                                             controls);
    const ProtocolResult result = interpret_all(plan, outputs);
    const std::string text = render_result(result, plan.f);
    for (uint32_t i = 3; i <= m; ++i)
      dealers[i]->send_frame(FrameType::Result, std::vector<uint8_t>(text.begin(), text.end()));
    log_info("p1: comm " + stats.summary());
    write_result_text(o.output, text);
  } catch (const std::exception& e) {
    broadcast_abort(all, e.what());
    throw;
  }
  return 0;
}

int run_p2(const RunOptions& o, RunPlan& plan, const std::vector<uint64_t>& set) {
  if (o.listen.empty()) throw ConfigError("role p2 requires --listen (dealer connections)");
  if (o.connect.empty()) throw ConfigError("role p2 requires --connect (the p1 endpoint)");
  std::vector<std::string> peers;
  {
    std::stringstream ss(o.connect);
    std::string item;
    while (std::getline(ss, item, ',')) peers.push_back(trim(item));
  }
  if (peers.size() != 1) throw ConfigError("role p2 expects exactly one --connect endpoint");

  const auto [lhost, lport] = parse_endpoint(o.listen);
  const int lfd = tcp_listen(lhost, lport);
  log_info("p2: listening on " + o.listen);

  const uint32_t m = o.m;
  const uint32_t beta = plan.beta;
  std::vector<Channel*> all;

  const auto [p1host, p1port] = parse_endpoint(peers[0]);
  std::vector<std::unique_ptr<TcpChannel>> bins(beta);
  for (uint32_t b = 0; b < beta; ++b) {
    bins[b] = tcp_connect(p1host, p1port);
    bins[b]->send_frame(FrameType::Hello, make_hello(kRoleP2, 2, b, plan.digest));
    const HelloInfo h = read_hello(bins[b]->recv_expect(FrameType::Hello), plan.digest);
    if (h.role != kRoleP1) throw HandshakeMismatch("expected the generator endpoint");
    all.push_back(bins[b].get());
  }
  log_info("p2: connected to p1 on " + std::to_string(beta) + " bin channel(s)");

  std::vector<std::unique_ptr<TcpChannel>> dealers(m + 1);
  for (uint32_t k = 0; k < m - 2; ++k) {
    auto ch = tcp_accept(lfd);
    const HelloInfo h = read_hello(ch->recv_expect(FrameType::Hello), plan.digest);
    ch->send_frame(FrameType::Hello, make_hello(kRoleP2, 2, 0, plan.digest));
    if (h.role != kRoleDealer || h.party < 3 || h.party > m || dealers[h.party])
      throw ProtocolViolation("unexpected connection while waiting for dealers");
    all.push_back(ch.get());
    dealers[h.party] = std::move(ch);
  }
  ::close(lfd);
  log_info("p2: all peers connected");

  try {
    Prg prg = Prg::from_seed(o.seed, "party2");
    auto own = make_shares(plan, o, set, 2, prg);
    const uint64_t bits_per = plan.pc.share_bits_per_party();

    std::vector<std::vector<std::vector<uint8_t>>> halves(
        m + 1, std::vector<std::vector<uint8_t>>(beta));
    for (uint32_t b = 0; b < beta; ++b) halves[2][b] = std::move(own[b].to_p2);
    for (uint32_t b = 0; b < beta; ++b)
      bins[0]->send_frame(FrameType::Share, share_frame(2, b, own[b].to_p1));
    for (uint32_t i = 3; i <= m; ++i)
      for (uint32_t b = 0; b < beta; ++b)
        halves[i][b] =
            parse_share_frame(dealers[i]->recv_expect(FrameType::Share), i, b, bits_per);
    for (uint32_t b = 0; b < beta; ++b)
      halves[1][b] = parse_share_frame(bins[0]->recv_expect(FrameType::Share), 1, b, bits_per);
    log_info("p2: share exchange complete");

    std::vector<std::vector<uint8_t>> controls(beta);
    for (uint32_t b = 0; b < beta; ++b)
      controls[b] = random_control_bits(plan.pc.controls_per_party, prg);

    auto [outputs, stats] = run_bin_sessions(plan, o, SessionRole::Evaluator, bins, halves,
                                             controls);
    const ProtocolResult result = interpret_all(plan, outputs);
    const std::string text = render_result(result, plan.f);
    for (uint32_t i = 3; i <= m; ++i)
      dealers[i]->send_frame(FrameType::Result, std::vector<uint8_t>(text.begin(), text.end()));
    log_info("p2: comm " + stats.summary());
    write_result_text(o.output, text);
  } catch (const std::exception& e) {
    broadcast_abort(all, e.what());
    throw;
  }
  return 0;
}

int run_dealer(const RunOptions& o, RunPlan& plan, const std::vector<uint64_t>& set,
               uint32_t party_index) {
  if (o.connect.empty()) throw ConfigError("dealer roles require --connect (p1 and p2 endpoints)");
  std::vector<std::string> peers;
  {
    std::stringstream ss(o.connect);
    std::string item;
    while (std::getline(ss, item, ',')) peers.push_back(trim(item));
  }
  if (peers.size() != 2)
    throw ConfigError("dealer roles expect exactly two --connect endpoints (p1, p2)");

  const auto [h1, p1] = parse_endpoint(peers[0]);
  auto ch1 = tcp_connect(h1, p1);
  ch1->send_frame(FrameType::Hello, make_hello(kRoleDealer, party_index, 0, plan.digest));
  if (read_hello(ch1->recv_expect(FrameType::Hello), plan.digest).role != kRoleP1)
    throw HandshakeMismatch("first --connect endpoint is not p1");

  const auto [h2, p2] = parse_endpoint(peers[1]);
  auto ch2 = tcp_connect(h2, p2);
  ch2->send_frame(FrameType::Hello, make_hello(kRoleDealer, party_index, 0, plan.digest));
  if (read_hello(ch2->recv_expect(FrameType::Hello), plan.digest).role != kRoleP2)
    throw HandshakeMismatch("second --connect endpoint is not p2");
  log_info("dealer " + std::to_string(party_index) + ": connected to both computing parties");

  const std::vector<Channel*> all = {ch1.get(), ch2.get()};
  try {
    Prg prg = Prg::from_seed(o.seed, "dealer");
    auto own = make_shares(plan, o, set, party_index, prg);
    for (uint32_t b = 0; b < plan.beta; ++b)
      ch1->send_frame(FrameType::Share, share_frame(party_index, b, own[b].to_p1));
    for (uint32_t b = 0; b < plan.beta; ++b)
      ch2->send_frame(FrameType::Share, share_frame(party_index, b, own[b].to_p2));
    log_info("dealer " + std::to_string(party_index) + ": shares sent");

    const auto t1 = ch1->recv_expect(FrameType::Result);
    const auto t2 = ch2->recv_expect(FrameType::Result);
    if (t1 != t2) throw ProtocolViolation("computing endpoints returned different results");
    write_result_text(o.output, std::string(t1.begin(), t1.end()));
  } catch (const std::exception& e) {
    broadcast_abort(all, e.what());
    throw;
  }
  return 0;
}

int cmd_run(RunOptions& o) {
  enum class Kind { P1, P2, Dealer };
  Kind kind;
  uint32_t dealer_index = 0;
  if (o.role == "p1") {
    kind = Kind::P1;
  } else if (o.role == "p2") {
    kind = Kind::P2;
  } else if (o.role.rfind("dealer:", 0) == 0) {
    kind = Kind::Dealer;
    dealer_index = static_cast<uint32_t>(parse_u64_value(o.role.substr(7), "role"));
  } else if (o.role.empty()) {
    throw ConfigError("--role is required (p1 | p2 | dealer:<i>)");
  } else {
    throw ConfigError("unknown role '" + o.role + "' (expected p1 | p2 | dealer:<i>)");
  }

  if (o.m < 3)
    throw ConfigError("--m must be at least 3 (two computing parties plus at least one dealer)");
  if (o.sigma < 2 || o.sigma > 63) throw ConfigError("--sigma must be in [2, 63]");
  if (o.n == 0) throw ConfigError("--n must be positive");
  if (kind == Kind::Dealer && (dealer_index < 3 || dealer_index > o.m))
    throw ConfigError("dealer index must be in [3, m]");
  if (o.input.empty()) throw ConfigError("--input is required for run");

  RunPlan plan;
  plan.mode = parse_mode(o.mode_s);
  plan.f = parse_function(o.f_s);
  plan.variant = parse_variant(o.variant_s);
  plan.ot = parse_ot_mode(o.ot_s);
  validate_protocol_choice(plan.mode, plan.f, plan.variant, o.m, o.sigma);
  if (plan.mode == Mode::HashingMscs && plan.variant == Variant::Masked)
    throw ConfigError("variant '" + o.variant_s +
                      "' is analysis-only with hashed bins; use --variant robust for live runs");
  if (plan.ot == OtMode::InsecureDealer && !o.insecure_ot)
    throw ConfigError("--ot insecure-dealer requires --insecure-ot");

  if (plan.mode == Mode::HashingMscs) {
    plan.layout.emplace(BinLayout::from_params(o.sigma, o.n, o.gamma, o.delta, o.hash_seed));
    plan.beta = plan.layout->beta();
    plan.pc = build_hashing_bin_circuit(o.m, *plan.layout, plan.f, plan.variant);
    log_info("bin layout: beta=" + std::to_string(plan.beta) +
             " capacity=" + std::to_string(plan.layout->capacity()) +
             " stored_width=" + std::to_string(plan.layout->sigma_stored()));
  } else if (plan.mode == Mode::Mbwa) {
    plan.pc = build_mbwa(o.m, o.sigma);
  } else {
    plan.pc = build_mscs(o.m, o.n, o.sigma, plan.f, plan.variant);
  }
  plan.digest = params_digest(o, plan);
  log_info("circuit: " + std::to_string(plan.pc.circuit.gates.size()) + " gates, " +
           std::to_string(plan.pc.circuit.and_count()) + " AND");

  const auto raw = parse_input_file(o.input);
  const auto set = normalize_input_set(raw, o.sigma, plan.mode, plan.variant);
  if (set.size() != o.n)
    throw ConfigError("input file holds " + std::to_string(set.size()) +
                      " distinct elements, --n is " + std::to_string(o.n));

  if (!o.seed_set) {
    std::random_device rd;
    o.seed = (static_cast<uint64_t>(rd()) << 32) | rd();
  }

  switch (kind) {
    case Kind::P1: return run_p1(o, plan, set);
    case Kind::P2: return run_p2(o, plan, set);
    case Kind::Dealer: return run_dealer(o, plan, set, dealer_index);
  }
  return 1;
}

// ---------------------------------------------------------------------------
// gen-circuit

Circuit standalone_merge_circuit(uint32_t m, uint64_t n, uint32_t sigma) {
  CircuitBuilder b(static_cast<uint32_t>(m * n * sigma), 0);
  std::vector<std::vector<Word>> lists(m, std::vector<Word>(n));
  for (uint32_t i = 0; i < m; ++i)
    for (uint64_t j = 0; j < n; ++j) {
      Word w;
      w.bits.resize(sigma);
      for (uint32_t k = 0; k < sigma; ++k)
        w.bits[k] = b.input_p1(static_cast<uint32_t>((i * n + j) * sigma + k));
      lists[i][j] = std::move(w);
    }
  const auto merged = emit_merge_network(b, lists);
  std::vector<WireId> outs;
  for (const Word& w : merged) outs.insert(outs.end(), w.bits.begin(), w.bits.end());
  b.set_outputs(std::move(outs));
  return b.take();
}

Circuit standalone_compare_circuit(uint32_t m, uint64_t n, uint32_t sigma) {
  const uint64_t total = m * n;
  CircuitBuilder b(static_cast<uint32_t>(total * sigma), 0);
  std::vector<Word> words(total);
  for (uint64_t j = 0; j < total; ++j) {
    words[j].bits.resize(sigma);
    for (uint32_t k = 0; k < sigma; ++k)
      words[j].bits[k] = b.input_p1(static_cast<uint32_t>(j * sigma + k));
  }
  std::vector<WireId> outs;
  auto add_window = [&](const DupSelect& d) {
    outs.push_back(d.indicator);
    outs.insert(outs.end(), d.value.bits.begin(), d.value.bits.end());
  };
  for (uint64_t j = 0; j + 1 < n; ++j)
    add_window(dup_select_window(
        b, std::span<const Word>(words.data() + j * m, 2 * m - 1), m));
  add_window(dup_select_final(
      b, std::span<const Word>(words.data() + (n - 1) * m, m), m));
  b.set_outputs(std::move(outs));
  return b.take();
}

int cmd_gen_circuit(const GenOptions& o) {
  if (o.sigma == 0) throw ConfigError("--sigma is required");
  Circuit c;
  if (o.stage == "mbwa") {
    c = build_mbwa(o.m, o.sigma).circuit;
  } else if (o.stage == "mscs") {
    if (o.n == 0) throw ConfigError("--n is required for stage mscs");
    const FunctionKind f = parse_function(o.f_s);
    const Variant v = parse_variant(o.variant_s);
    validate_protocol_choice(Mode::Mscs, f, v, o.m, o.sigma);
    c = build_mscs(o.m, o.n, o.sigma, f, v).circuit;
  } else if (o.stage == "merge") {
    if (o.n == 0) throw ConfigError("--n is required for stage merge");
    c = standalone_merge_circuit(o.m, o.n, o.sigma);
  } else if (o.stage == "compare") {
    if (o.n == 0) throw ConfigError("--n is required for stage compare");
    c = standalone_compare_circuit(o.m, o.n, o.sigma);
  } else {
    throw ConfigError("--stage must be one of mbwa | merge | compare | mscs");
  }
  write_text_file(o.output, serialize(c));
  log_info("stage " + o.stage + ": " + std::to_string(c.gates.size()) + " gates, " +
           std::to_string(c.and_count()) + " AND");
  return 0;
}

// ---------------------------------------------------------------------------
// analyze

constexpr uint64_t kBuildThreshold = 4'000'000;  // ANDs; above this, formulas only

void print_stage_keys(const char* prefix, const StageCostEstimate& e) {
  std::cout << prefix << "_reconstruct_ands=" << e.reconstruct_ands << "\n";
  std::cout << prefix << "_merge_ands=" << e.merge_ands << "\n";
  std::cout << prefix << "_compare_ands=" << e.compare_ands << "\n";
  std::cout << prefix << "_output_ands=" << e.output_ands << "\n";
  std::cout << prefix << "_total_ands=" << e.total() << "\n";
}

void print_generated_keys(const char* prefix, const ProtocolCircuit& pc, uint64_t multiplier) {
  const Circuit& c = pc.circuit;
  const auto in_span = [&](const StageSpan& s) {
    return multiplier * and_count_in(c, s.begin, s.end);
  };
  const uint64_t rec = in_span(pc.reconstruct_stage);
  const uint64_t mer = in_span(pc.merge_stage);
  const uint64_t cmp = in_span(pc.compare_stage);
  const uint64_t out = in_span(pc.output_stage);
  std::cout << prefix << "_reconstruct_ands=" << rec << "\n";
  std::cout << prefix << "_merge_ands=" << mer << "\n";
  std::cout << prefix << "_compare_ands=" << cmp << "\n";
  std::cout << prefix << "_output_ands=" << out << "\n";
  std::cout << prefix << "_total_ands=" << multiplier * c.and_count() << "\n";
}

int cmd_analyze(const AnalyzeOptions& o) {
  if (o.sigma == 0) throw ConfigError("--sigma is required");
  const Mode mode = parse_mode(o.mode_s);
  const FunctionKind f = parse_function(o.f_s);
  const Variant v = parse_variant(o.variant_s);
  validate_protocol_choice(mode, f, v, o.m, o.sigma);

  std::cout << "m=" << o.m << "\n"
            << "n=" << o.n << "\n"
            << "sigma=" << o.sigma << "\n"
            << "mode=" << mode_name(mode) << "\n"
            << "f=" << function_name(f) << "\n"
            << "variant=" << variant_name(v) << "\n";

  if (mode == Mode::Mbwa) {
    const uint64_t universe = 1ull << o.sigma;
    std::cout << "plain_xor_gates=" << o.m * universe << "\n";
    std::cout << "plain_total_ands=" << (o.m - 1) * universe << "\n";
    return 0;
  }
  if (o.n == 0) throw ConfigError("--n is required");

  const StageCostEstimate plain = estimate_plain(o.m, o.n, o.sigma, f, v);
  print_stage_keys("plain", plain);
  std::cout << "plain_bound_ands=" << fmt_g(gate_upper_bound(o.m, double(o.n), double(o.sigma)))
            << "\n";
  if (plain.total() <= kBuildThreshold) {
    const ProtocolCircuit pc = build_mscs(o.m, o.n, o.sigma, f, v);
    print_generated_keys("plain_generated", pc, 1);
  } else {
    std::cout << "plain_generated=skipped (estimate above build threshold)\n";
  }

  if (mode == Mode::HashingMscs) {
    // Layout actually used by run: load bound from the failure analysis.
    const BinLayout layout = BinLayout::from_params(o.sigma, o.n, o.gamma, o.delta, 0);
    const uint32_t exec_width =
        v == Variant::Robust ? layout.record_width() : layout.sigma_stored();
    const uint64_t exec_load = (o.n + layout.beta() - 1) / layout.beta();
    const StageCostEstimate exec =
        estimate_hashing(o.m, layout.beta(), layout.capacity(), exec_width, f, v);
    std::cout << "exec_delta=" << fmt_g(o.delta) << "\n"
              << "exec_gamma=" << fmt_g(o.gamma) << "\n"
              << "exec_beta=" << layout.beta() << "\n"
              << "exec_bin_load=" << exec_load << "\n"
              << "exec_capacity=" << layout.capacity() << "\n"
              << "exec_stored_width=" << layout.sigma_stored() << "\n"
              << "exec_bin_width=" << exec_width << "\n";
    print_stage_keys("exec", exec);
    std::cout << "exec_bound_ands="
              << fmt_g(double(layout.beta()) *
                       gate_upper_bound(o.m, double(layout.capacity()),
                                        double(layout.sigma_stored())))
              << "\n";
    std::cout << "exec_failure_bound=" << fmt_g(failure_bound(o.m, o.n, exec_load, o.delta))
              << "\n";
    std::cout << "exec_failure_bound_log2="
              << fmt_g(failure_bound_simplified_log2(o.n, exec_load, o.delta)) << "\n";
    std::cout << "exec_reduction_percent="
              << fmt_g(100.0 * (double(plain.total()) - double(exec.total())) /
                       double(plain.total()))
              << "\n";
    if (exec.total() <= kBuildThreshold) {
      const ProtocolCircuit bin_pc = build_hashing_bin_circuit(o.m, layout, f, v);
      print_generated_keys("exec_generated", bin_pc, layout.beta());
    } else {
      std::cout << "exec_generated=skipped (estimate above build threshold)\n";
    }

    // Layout chosen by the cost optimizer (circuit-size model).
    const OptimizeResult opt = optimize_params(o.m, o.n, o.sigma, o.gamma);
    const uint32_t opt_width = v == Variant::Robust ? opt.sigma_stored + 1 : opt.sigma_stored;
    const StageCostEstimate oest =
        estimate_hashing(o.m, opt.beta, opt.capacity, opt_width, f, v);
    std::cout << "opt_delta=" << fmt_g(opt.delta) << "\n"
              << "opt_bin_load=" << opt.b << "\n"
              << "opt_beta=" << opt.beta << "\n"
              << "opt_capacity=" << opt.capacity << "\n"
              << "opt_stored_width=" << opt.sigma_stored << "\n"
              << "opt_bin_width=" << opt_width << "\n"
              << "opt_gates_per_element=" << fmt_g(opt.gates_per_element) << "\n"
              << "opt_gates_per_element_ideal=" << fmt_g(opt.gates_per_element_ideal) << "\n";
    print_stage_keys("opt", oest);
    std::cout << "opt_bound_ands="
              << fmt_g(double(opt.beta) *
                       gate_upper_bound(o.m, double(opt.capacity), double(opt.sigma_stored)))
              << "\n";
    std::cout << "opt_reduction_percent="
              << fmt_g(100.0 * (double(plain.total()) - double(oest.total())) /
                       double(plain.total()))
              << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// optimize-hash

void print_opt_row(uint32_t log2n, uint32_t sigma, double gamma, const OptimizeResult& r,
                   const ReferenceRow* ref) {
  std::printf("%6u %5u %6.0f %5.2f %6llu %5u %8llu %14.1f %14.1f", log2n, sigma, gamma, r.delta,
              static_cast<unsigned long long>(r.b), r.beta,
              static_cast<unsigned long long>(r.capacity), r.gates_per_element,
              r.gates_per_element_ideal);
  if (ref) {
    const double dev = 100.0 * (r.gates_per_element_ideal - ref->gates_per_element) /
                       ref->gates_per_element;
    std::printf(" %10.1f %8.2f%%", ref->gates_per_element, dev);
  }
  std::printf("\n");
}

int cmd_optimize_hash(const OptimizeOptions& o) {
  const bool single = o.n != 0 && o.sigma != 0;
  std::printf("#%5s %5s %6s %5s %6s %5s %8s %14s %14s", "log2n", "sigma", "gamma", "delta", "b",
              "beta", "B", "gates/elem", "gates/elem*");
  if (!single) std::printf(" %10s %9s", "published", "dev");
  std::printf("\n");
  if (single) {
    const OptimizeResult r = optimize_params(o.m, o.n, o.sigma, o.gamma);
    print_opt_row(bit_width_for(o.n) - (is_pow2(o.n) ? 1 : 0), o.sigma, o.gamma, r, nullptr);
    return 0;
  }
  for (const ReferenceRow& ref : reference_rows()) {
    try {
      const OptimizeResult r =
          optimize_params(o.m, 1ull << ref.log2_n, ref.sigma, o.gamma);
      print_opt_row(ref.log2_n, ref.sigma, o.gamma, r, &ref);
    } catch (const Infeasible&) {
      std::printf("%6u %5u %6.0f  Infeasible\n", ref.log2_n, ref.sigma, o.gamma);
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// selftest

int cmd_selftest() {
  int failures = 0;
  int checks = 0;
  const auto check = [&](const char* name, bool ok) {
    ++checks;
    std::cout << (ok ? "ok " : "FAIL ") << "- " << name << "\n";
    if (!ok) ++failures;
  };
  const auto word_bits = [](std::vector<uint8_t>& bits, uint64_t v, uint32_t w) {
    for (int k = int(w) - 1; k >= 0; --k) bits.push_back((v >> k) & 1);
  };
  const auto read_word = [](const std::vector<uint8_t>& bits, size_t off, uint32_t w) {
    uint64_t v = 0;
    for (uint32_t k = 0; k < w; ++k) v = (v << 1) | bits[off + k];
    return v;
  };

  // 1. circuit text round trip
  {
    CircuitBuilder b(2, 1);
    b.set_outputs({b.and_(b.xor_(b.input_p1(0), b.input_p1(1)), b.inv_(b.input_p2(0)))});
    const Circuit c = b.take();
    const Circuit c2 = deserialize(serialize(c));
    bool ok = serialize(c) == serialize(c2);
    for (uint8_t x = 0; x < 8 && ok; ++x) {
      const std::vector<uint8_t> in = {uint8_t(x & 1), uint8_t((x >> 1) & 1), uint8_t(x >> 2)};
      ok = eval_plaintext(c, in) == eval_plaintext(c2, in);
    }
    check("circuit serialization round trip", ok);
  }

  // 2. two-element sorter, exhaustive at width 3
  {
    CircuitBuilder b(6, 0);
    Word x{{b.input_p1(0), b.input_p1(1), b.input_p1(2)}};
    Word y{{b.input_p1(3), b.input_p1(4), b.input_p1(5)}};
    auto [lo, hi] = sorter2(b, x, y);
    std::vector<WireId> outs(lo.bits);
    outs.insert(outs.end(), hi.bits.begin(), hi.bits.end());
    b.set_outputs(std::move(outs));
    const Circuit c = b.take();
    bool ok = true;
    for (uint64_t xv = 0; xv < 8 && ok; ++xv)
      for (uint64_t yv = 0; yv < 8 && ok; ++yv) {
        std::vector<uint8_t> in;
        word_bits(in, xv, 3);
        word_bits(in, yv, 3);
        const auto out = eval_plaintext(c, in);
        ok = read_word(out, 0, 3) == std::min(xv, yv) && read_word(out, 3, 3) == std::max(xv, yv);
      }
    check("two-element sorter (exhaustive, width 3)", ok);
  }

  // 3. merge network on random sorted lists
  {
    const uint32_t m = 3, sigma = 8;
    const uint64_t n = 4;
    const Circuit c = standalone_merge_circuit(m, n, sigma);
    std::mt19937_64 rng(11);
    bool ok = true;
    for (int trial = 0; trial < 5 && ok; ++trial) {
      std::vector<uint64_t> values;
      std::vector<uint8_t> in;
      for (uint32_t i = 0; i < m; ++i) {
        std::vector<uint64_t> list(n);
        for (auto& v : list) v = rng() % 254;
        std::sort(list.begin(), list.end());
        for (uint64_t v : list) {
          values.push_back(v);
          word_bits(in, v, sigma);
        }
      }
      const uint64_t padded = next_pow2(m * n);
      for (uint64_t k = m * n; k < padded; ++k) values.push_back(255);
      std::sort(values.begin(), values.end());
      const auto out = eval_plaintext(c, in);
      for (uint64_t j = 0; j < padded && ok; ++j)
        ok = read_word(out, j * sigma, sigma) == values[j];
    }
    check("merge network sorts concatenated lists", ok);
  }

  // 4. permutation network routing
  {
    std::mt19937_64 rng(22);
    bool ok = true;
    for (uint32_t n : {1u, 2u, 3u, 5u, 8u, 9u, 16u}) {
      const SwitchLayout layout = waksman_layout(n);
      std::vector<uint32_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      const auto controls = waksman_route(n, perm);
      std::vector<uint32_t> items(n);
      std::iota(items.begin(), items.end(), 0);
      apply_switches(layout, controls, items);
      for (uint32_t o = 0; o < n && ok; ++o) ok = items[o] == perm[o];
      if (!ok) break;
    }
    check("switch network realizes requested permutations", ok);
  }

  // 5. bin placement round trip
  {
    const BinLayout layout = BinLayout::from_params(16, 256, 20, 1.0, 7);
    std::mt19937_64 rng(33);
    bool ok = layout.beta() >= 2;
    for (int i = 0; i < 200 && ok; ++i) {
      const uint64_t x = rng() % ((1ull << 16) - 1);
      const auto [bin, stored] = layout.place(x);
      ok = layout.reconstruct(bin, stored) == x;
    }
    check("bin placement reconstructs elements", ok);
  }

  // 6. garbled session matches cleartext (loopback)
  {
    CircuitBuilder b(4, 4);
    Word x{{b.input_p1(0), b.input_p1(1), b.input_p1(2), b.input_p1(3)}};
    Word y{{b.input_p2(0), b.input_p2(1), b.input_p2(2), b.input_p2(3)}};
    auto [lo, hi] = sorter2(b, x, y);
    std::vector<WireId> outs(lo.bits);
    outs.insert(outs.end(), hi.bits.begin(), hi.bits.end());
    b.set_outputs(std::move(outs));
    const Circuit c = b.take();
    bool ok = true;
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 3 && ok; ++trial) {
      std::vector<uint8_t> in1, in2;
      word_bits(in1, rng() & 15, 4);
      word_bits(in2, rng() & 15, 4);
      auto [chg, che] = stream_channel_pair();
      TwopcConfig cfg;
      cfg.seed = 900 + trial;
      SessionOutcome gen_out, eval_out;
      std::exception_ptr err;
      std::thread gen([&] {
        try {
          gen_out = run_session(*chg, SessionRole::Generator, c, in1, cfg);
        } catch (...) {
          err = std::current_exception();
        }
      });
      eval_out = run_session(*che, SessionRole::Evaluator, c, in2, cfg);
      gen.join();
      if (err) std::rethrow_exception(err);
      const auto expect = cleartext_session(c, in1, in2);
      ok = gen_out.output_bits == expect && eval_out.output_bits == expect;
    }
    check("garbled session equals cleartext evaluation", ok);
  }

  // 7. sorted-list intersection pipeline, cleartext
  {
    const uint32_t m = 3, sigma = 8;
    const std::vector<std::vector<uint64_t>> sets = {
        {1, 2, 3, 4}, {2, 3, 4, 5}, {3, 4, 5, 6}};
    const ProtocolCircuit pc = build_mscs(m, 4, sigma, FunctionKind::Cardinality,
                                          Variant::Robust);
    Prg prg = Prg::from_seed(55, "selftest");
    std::vector<std::vector<uint8_t>> h1(m), h2(m);
    for (uint32_t i = 0; i < m; ++i) {
      SharePair sp = share_sorted_set(sets[i], sigma, prg);
      h1[i] = std::move(sp.to_p1);
      h2[i] = std::move(sp.to_p2);
    }
    const auto in1 = assemble_side_input(pc, h1, {});
    const auto in2 = assemble_side_input(pc, h2, {});
    const auto bits = cleartext_session(pc.circuit, in1, in2);
    const ProtocolResult r = interpret_output(bits, output_context(pc));
    check("sorted-list intersection cardinality", r.cardinality == 2);
  }

  // 8. hashed-bin pipeline end to end, cleartext
  {
    const uint32_t m = 3, sigma = 12;
    const uint64_t n = 64;
    const BinLayout layout = BinLayout::from_params(sigma, n, 2.0, 1.0, 1);
    std::mt19937_64 rng(66);
    std::vector<uint64_t> common;
    while (common.size() < 10) {
      const uint64_t x = rng() % ((1ull << sigma) - 1);
      if (std::find(common.begin(), common.end(), x) == common.end()) common.push_back(x);
    }
    std::vector<std::vector<uint64_t>> sets(m, common);
    for (uint32_t i = 0; i < m; ++i) {
      while (sets[i].size() < n) {
        const uint64_t x = rng() % ((1ull << sigma) - 1);
        bool used = false;
        for (const auto& s : sets)
          if (std::find(s.begin(), s.end(), x) != s.end()) used = true;
        if (!used) sets[i].push_back(x);
      }
      std::sort(sets[i].begin(), sets[i].end());
    }
    const ProtocolCircuit pc =
        build_hashing_bin_circuit(m, layout, FunctionKind::RevealShuffled, Variant::Robust);
    Prg prg = Prg::from_seed(77, "selftest");
    std::vector<PartyBins> pbs;
    for (uint32_t i = 0; i < m; ++i) pbs.push_back(build_bins(sets[i], layout, i + 1, m));
    OutputContext ctx = output_context(pc);
    ctx.layout = &layout;
    std::vector<uint64_t> found;
    for (uint32_t bin = 0; bin < layout.beta(); ++bin) {
      std::vector<std::vector<uint8_t>> h1(m), h2(m);
      for (uint32_t i = 0; i < m; ++i) {
        SharePair sp = share_sorted_set(pbs[i].bins[bin], layout.record_width(), prg);
        h1[i] = std::move(sp.to_p1);
        h2[i] = std::move(sp.to_p2);
      }
      const auto c1 = random_control_bits(pc.controls_per_party, prg);
      const auto c2 = random_control_bits(pc.controls_per_party, prg);
      const auto bits = cleartext_session(pc.circuit, assemble_side_input(pc, h1, c1),
                                          assemble_side_input(pc, h2, c2));
      ctx.bin_index = bin;
      const ProtocolResult r = interpret_output(bits, ctx);
      found.insert(found.end(), r.elements.begin(), r.elements.end());
    }
    std::sort(found.begin(), found.end());
    std::sort(common.begin(), common.end());
    check("hashed-bin intersection recovers the common elements", found == common);
  }

  std::cout << (failures == 0 ? "selftest: all " : "selftest: FAILED ") << checks
            << " checks" << (failures ? (", " + std::to_string(failures) + " failing") : "")
            << "\n";
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// bench

int cmd_bench() {
  using clock = std::chrono::steady_clock;

  {
    const ProtocolCircuit pc =
        build_mscs(3, 64, 32, FunctionKind::RevealShuffled, Variant::Robust);
    const uint64_t ands = pc.circuit.and_count();
    const auto t0 = clock::now();
    const GarbleOutput g = garble(pc.circuit, 1);
    const auto t1 = clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    std::cout << "garble_and_gates=" << ands << "\n";
    std::cout << "garble_ms=" << fmt_g(secs * 1e3) << "\n";
    std::cout << "garble_ands_per_sec=" << fmt_g(double(ands) / secs) << "\n";
    std::cout << "garble_table_bytes=" << g.tables.and_rows.size() * 16 << "\n";
  }

  {
    const ProtocolCircuit pc = build_mscs(3, 16, 16, FunctionKind::Cardinality, Variant::Robust);
    const std::vector<uint8_t> in1(pc.circuit.n_inputs_p1, 0);
    const std::vector<uint8_t> in2(pc.circuit.n_inputs_p2, 0);
    auto [chg, che] = stream_channel_pair();
    TwopcConfig cfg;
    cfg.seed = 2;
    std::exception_ptr err;
    const auto t0 = clock::now();
    SessionOutcome gen_out;
    std::thread gen([&] {
      try {
        gen_out = run_session(*chg, SessionRole::Generator, pc.circuit, in1, cfg);
      } catch (...) {
        err = std::current_exception();
      }
    });
    const SessionOutcome eval_out =
        run_session(*che, SessionRole::Evaluator, pc.circuit, in2, cfg);
    gen.join();
    if (err) std::rethrow_exception(err);
    const auto t1 = clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    std::cout << "session_and_gates=" << pc.circuit.and_count() << "\n";
    std::cout << "session_ms=" << fmt_g(secs * 1e3) << "\n";
    std::cout << "session_bytes=" << eval_out.stats.total() << "\n";
  }
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"multi-party private set intersection on a garbled-circuit core"};
  app.require_subcommand(1);

  RunOptions ro;
  GenOptions go;
  AnalyzeOptions ao;
  OptimizeOptions oo;

  CLI::App* run = app.add_subcommand("run", "run one protocol party");
  run->add_option("--role", ro.role, "p1 | p2 | dealer:<i>");
  run->add_option("--m", ro.m, "total party count (>= 3)");
  run->add_option("--n", ro.n, "per-party set size");
  run->add_option("--sigma", ro.sigma, "element width in bits");
  run->add_option("--mode", ro.mode_s, "mbwa | mscs | hashing-mscs");
  run->add_option("--f", ro.f_s, "reveal | cardinality | bitvector");
  run->add_option("--variant", ro.variant_s, "exact | robust");
  run->add_option("--gamma", ro.gamma, "statistical slack for bin sizing");
  run->add_option("--delta", ro.delta, "bin padding factor");
  run->add_option("--hash-seed", ro.hash_seed, "public seed of the bin placement function");
  run->add_option("--listen", ro.listen, "host:port to accept peers on");
  run->add_option("--connect", ro.connect, "comma-separated peer endpoints");
  run->add_option("--input", ro.input, "input set file, one element per line");
  run->add_option("--output", ro.output, "result file (stdout when omitted)");
  run->add_option("--seed", ro.seed, "local randomness seed");
  run->add_option("--ot", ro.ot_s, "auto | base | extension | insecure-dealer");
  run->add_flag("--insecure-ot", ro.insecure_ot, "allow the cleartext OT dealer (testing only)");
  run->add_option("--config", ro.config, "key=value config file; flags take precedence");

  CLI::App* gen = app.add_subcommand("gen-circuit", "emit a circuit in text form");
  gen->add_option("--stage", go.stage, "mbwa | merge | compare | mscs")->required();
  gen->add_option("--m", go.m, "party / list count");
  gen->add_option("--n", go.n, "per-list length");
  gen->add_option("--sigma", go.sigma, "element width in bits");
  gen->add_option("--f", go.f_s, "reveal | cardinality (stage mscs)");
  gen->add_option("--variant", go.variant_s, "exact | robust (stage mscs)");
  gen->add_option("--output", go.output, "circuit file (stdout when omitted)");

  CLI::App* ana = app.add_subcommand("analyze", "report AND-gate costs per stage");
  ana->add_option("--m", ao.m, "party count");
  ana->add_option("--n", ao.n, "per-party set size");
  ana->add_option("--sigma", ao.sigma, "element width in bits");
  ana->add_option("--mode", ao.mode_s, "mbwa | mscs | hashing-mscs");
  ana->add_option("--f", ao.f_s, "reveal | cardinality | bitvector");
  ana->add_option("--variant", ao.variant_s, "exact | robust");
  ana->add_option("--gamma", ao.gamma, "statistical slack for bin sizing");
  ana->add_option("--delta", ao.delta, "bin padding factor of the execution layout");

  CLI::App* opt = app.add_subcommand("optimize-hash", "search bin parameters");
  opt->add_option("--m", oo.m, "party count");
  opt->add_option("--n", oo.n, "set size (omit to sweep the published points)");
  opt->add_option("--sigma", oo.sigma, "element width (omit to sweep the published points)");
  opt->add_option("--gamma", oo.gamma, "statistical slack");

  CLI::App* self = app.add_subcommand("selftest", "run the built-in check battery");
  CLI::App* bench = app.add_subcommand("bench", "micro benchmarks, key=value output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      ro.seed_set = run->count("--seed") > 0;
      if (!ro.config.empty()) apply_run_config(run, ro);
      return cmd_run(ro);
    }
    if (gen->parsed()) return cmd_gen_circuit(go);
    if (ana->parsed()) return cmd_analyze(ao);
    if (opt->parsed()) return cmd_optimize_hash(oo);
    if (self->parsed()) return cmd_selftest();
    if (bench->parsed()) return cmd_bench();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DuplicateElement& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UniverseTooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidVariant& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InputLengthMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const BinOverflow& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "hash failure, protocol terminated\n";
    return 3;
  } catch (const SessionAborted& e) {
    std::cerr << "error: peer aborted: " << e.what() << "\n";
    std::cerr << "hash failure, protocol terminated\n";
    return 3;
  } catch (const ChannelClosed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const HandshakeMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const ProtocolViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const DecodeFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
