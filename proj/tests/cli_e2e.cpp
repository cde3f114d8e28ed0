// Drives the installed binary through its command-line surface: multi-process
// protocol runs over loopback TCP, circuit generation, cost reports and the
// documented exit codes. The binary path arrives in the MPSI_BIN environment
// variable.
#include <sys/wait.h>

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "mpsi/circuit.hpp"
#include "mpsi/hashing.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

std::string binary_path() {
  const char* p = std::getenv("MPSI_BIN");
  REQUIRE_MESSAGE(p != nullptr, "MPSI_BIN must point at the CLI binary");
  return p;
}

struct CmdResult {
  int code = -1;
  std::string out;  // stdout and stderr combined
};

CmdResult run_cmd(const std::string& args) {
  const std::string cmd = binary_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult r;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "mpsi_e2e.XXXXXX").string();
    REQUIRE(mkdtemp(tmpl.data()) != nullptr);
    path = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_lines(const std::string& path, const std::vector<uint64_t>& values) {
  std::ofstream out(path);
  REQUIRE(out.good());
  for (uint64_t v : values) out << v << "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string joined_lines(const std::vector<uint64_t>& values) {
  std::string s;
  for (uint64_t v : values) s += std::to_string(v) + "\n";
  return s;
}

// Launches one process per command in parallel and waits for all of them.
std::vector<CmdResult> run_parties(const std::vector<std::string>& argv) {
  std::vector<CmdResult> results(argv.size());
  std::vector<std::thread> threads;
  for (size_t i = 0; i < argv.size(); ++i)
    threads.emplace_back([&, i] { results[i] = run_cmd(argv[i]); });
  for (auto& t : threads) t.join();
  return results;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const size_t eq = line.find('=');
    if (eq == std::string::npos || line.find(' ') < eq) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

int port_base() { return 21700; }

}  // namespace

TEST_CASE("usage and config errors exit with code 2") {
  CHECK(run_cmd("").code == 2);  // a subcommand is required
  CHECK(run_cmd("--help").code == 0);

  CmdResult r = run_cmd("run --m 3 --n 4 --sigma 8 --input /dev/null");
  CHECK(r.code == 2);
  CHECK(r.out.find("--role") != std::string::npos);

  r = run_cmd("run --role duke --m 3 --n 4 --sigma 8 --input /dev/null");
  CHECK(r.code == 2);

  r = run_cmd("run --role p1 --m 2 --n 4 --sigma 8 --input /dev/null");
  CHECK(r.code == 2);

  r = run_cmd("run --role p1 --m 3 --n 4 --sigma 64 --input /dev/null");
  CHECK(r.code == 2);

  r = run_cmd("run --role p1 --m 3 --n 4 --sigma 8 --mode mbwa --f cardinality --input /dev/null");
  CHECK(r.code == 2);

  // the masked record variant is analysis-only once hashing is involved
  r = run_cmd("run --role p1 --m 3 --n 4 --sigma 8 --mode hashing-mscs --f reveal "
              "--variant exact --input /dev/null --listen 127.0.0.1:1");
  CHECK(r.code == 2);
  CHECK(r.out.find("analysis-only") != std::string::npos);

  r = run_cmd("run --role p1 --m 3 --n 4 --sigma 8 --ot insecure-dealer --input /dev/null");
  CHECK(r.code == 2);
  CHECK(r.out.find("--insecure-ot") != std::string::npos);
}

TEST_CASE("config files reject unknown and duplicate keys") {
  TempDir dir;
  write_text(dir.file("bad1.cfg"), "m=3\nwidgets=7\n");
  CmdResult r = run_cmd("run --config " + dir.file("bad1.cfg"));
  CHECK(r.code == 2);
  CHECK(r.out.find("widgets") != std::string::npos);

  write_text(dir.file("bad2.cfg"), "m=3\nm=4\n");
  r = run_cmd("run --config " + dir.file("bad2.cfg"));
  CHECK(r.code == 2);
  CHECK(r.out.find("duplicate") != std::string::npos);

  write_text(dir.file("bad3.cfg"), "just a line\n");
  r = run_cmd("run --config " + dir.file("bad3.cfg"));
  CHECK(r.code == 2);
  CHECK(r.out.find("expected key=value") != std::string::npos);
}

TEST_CASE("input files reject malformed elements with a line number") {
  TempDir dir;
  write_text(dir.file("in.txt"), "1\n2\nthree\n");
  const CmdResult r = run_cmd("run --role p1 --m 3 --n 3 --sigma 8 --listen 127.0.0.1:" +
                              std::to_string(port_base()) + " --input " + dir.file("in.txt"));
  CHECK(r.code == 2);
  CHECK(r.out.find(":3: invalid element") != std::string::npos);
}

TEST_CASE("three-party sorted-list reveal over loopback") {
  TempDir dir;
  const int p = port_base() + 10;
  const std::vector<std::vector<uint64_t>> sets = {
      {1, 2, 3, 4}, {2, 3, 4, 5}, {3, 4, 5, 6}};
  const std::vector<uint64_t> expect = testutil::intersect_all(sets);
  REQUIRE(expect == std::vector<uint64_t>{3, 4});
  for (int i = 0; i < 3; ++i) write_lines(dir.file("in" + std::to_string(i)), sets[i]);

  // p1 takes most parameters from a config file; explicit flags must win
  // over the config's decoys (mode, n).
  write_text(dir.file("p1.cfg"),
             "# computing party one\n"
             "mode=mbwa\n"
             "n=5\n"
             "m=3\n"
             "sigma=8\n"
             "f=reveal\n"
             "variant=robust\n"
             "seed=4242\n"
             "input=" + dir.file("in0") + "\n"
             "output=" + dir.file("out0") + "\n");
  const std::string shared = " --m 3 --n 4 --sigma 8 --mode mscs --f reveal --variant robust";
  const auto rs = run_parties({
      "run --role p1 --config " + dir.file("p1.cfg") + " --mode mscs --n 4"
          " --listen 127.0.0.1:" + std::to_string(p),
      "run --role p2" + shared + " --listen 127.0.0.1:" + std::to_string(p + 1) +
          " --connect 127.0.0.1:" + std::to_string(p) + " --input " + dir.file("in1") +
          " --output " + dir.file("out1") + " --seed 7",
      "run --role dealer:3" + shared + " --connect 127.0.0.1:" + std::to_string(p) +
          ",127.0.0.1:" + std::to_string(p + 1) + " --input " + dir.file("in2") +
          " --output " + dir.file("out2") + " --seed 8",
  });
  for (const auto& r : rs) {
    CAPTURE(r.out);
    CHECK(r.code == 0);
  }
  for (int i = 0; i < 3; ++i)
    CHECK(read_text(dir.file("out" + std::to_string(i))) == joined_lines(expect));
}

TEST_CASE("three-party cardinality over loopback") {
  TempDir dir;
  const int p = port_base() + 20;
  const std::vector<std::vector<uint64_t>> sets = {
      {10, 20, 30, 40, 50}, {20, 30, 77, 40, 90}, {30, 40, 20, 91, 92}};
  for (int i = 0; i < 3; ++i) write_lines(dir.file("in" + std::to_string(i)), sets[i]);
  const std::string shared =
      " --m 3 --n 5 --sigma 8 --mode mscs --f cardinality --variant robust --seed 11";
  const auto rs = run_parties({
      "run --role p1" + shared + " --listen 127.0.0.1:" + std::to_string(p) + " --input " +
          dir.file("in0") + " --output " + dir.file("out0"),
      "run --role p2" + shared + " --listen 127.0.0.1:" + std::to_string(p + 1) +
          " --connect 127.0.0.1:" + std::to_string(p) + " --input " + dir.file("in1") +
          " --output " + dir.file("out1"),
      "run --role dealer:3" + shared + " --connect 127.0.0.1:" + std::to_string(p) +
          ",127.0.0.1:" + std::to_string(p + 1) + " --input " + dir.file("in2") +
          " --output " + dir.file("out2"),
  });
  for (const auto& r : rs) {
    CAPTURE(r.out);
    CHECK(r.code == 0);
  }
  for (int i = 0; i < 3; ++i)
    CHECK(read_text(dir.file("out" + std::to_string(i))) == "# cardinality: 3\n");
}

TEST_CASE("characteristic-vector mode with the cleartext transfer dealer") {
  TempDir dir;
  const int p = port_base() + 30;
  const std::vector<std::vector<uint64_t>> sets = {
      {1, 2, 3, 250}, {2, 3, 9, 250}, {2, 3, 77, 250}};
  const std::vector<uint64_t> expect = testutil::intersect_all(sets);
  REQUIRE(expect == std::vector<uint64_t>{2, 3, 250});
  for (int i = 0; i < 3; ++i) write_lines(dir.file("in" + std::to_string(i)), sets[i]);
  const std::string shared = " --m 3 --n 4 --sigma 8 --mode mbwa --f bitvector"
                             " --ot insecure-dealer --insecure-ot --seed 21";
  const auto rs = run_parties({
      "run --role p1" + shared + " --listen 127.0.0.1:" + std::to_string(p) + " --input " +
          dir.file("in0") + " --output " + dir.file("out0"),
      "run --role p2" + shared + " --listen 127.0.0.1:" + std::to_string(p + 1) +
          " --connect 127.0.0.1:" + std::to_string(p) + " --input " + dir.file("in1") +
          " --output " + dir.file("out1"),
      "run --role dealer:3" + shared + " --connect 127.0.0.1:" + std::to_string(p) +
          ",127.0.0.1:" + std::to_string(p + 1) + " --input " + dir.file("in2") +
          " --output " + dir.file("out2"),
  });
  for (const auto& r : rs) {
    CAPTURE(r.out);
    CHECK(r.code == 0);
  }
  for (int i = 0; i < 3; ++i)
    CHECK(read_text(dir.file("out" + std::to_string(i))) == joined_lines(expect));
}

TEST_CASE("hashed-bin protocol end to end") {
  TempDir dir;
  const int p = port_base() + 40;
  const uint32_t sigma = 12;
  const uint64_t n = 64;
  const mpsi::BinLayout layout = mpsi::BinLayout::from_params(sigma, n, 2.0, 1.0, 1);
  REQUIRE(layout.beta() == 2);

  std::mt19937_64 rng(404);
  const std::vector<uint64_t> pool =
      testutil::random_distinct_set(rng, 10 + 3 * 54, (1ull << sigma) - 2);
  const std::vector<uint64_t> common(pool.begin(), pool.begin() + 10);
  std::vector<std::vector<uint64_t>> sets(3, common);
  for (int i = 0; i < 3; ++i) {
    sets[i].insert(sets[i].end(), pool.begin() + 10 + 54 * i, pool.begin() + 10 + 54 * (i + 1));
    std::sort(sets[i].begin(), sets[i].end());
    // make sure the fixture itself cannot overflow a bin
    REQUIRE_NOTHROW(mpsi::build_bins(sets[i], layout, uint32_t(i + 1), 3));
    write_lines(dir.file("in" + std::to_string(i)), sets[i]);
  }
  std::vector<uint64_t> expect = common;
  std::sort(expect.begin(), expect.end());

  const std::string shared = " --m 3 --n 64 --sigma 12 --mode hashing-mscs --f reveal"
                             " --variant robust --gamma 2 --delta 1 --hash-seed 1 --seed 31";
  const auto rs = run_parties({
      "run --role p1" + shared + " --listen 127.0.0.1:" + std::to_string(p) + " --input " +
          dir.file("in0") + " --output " + dir.file("out0"),
      "run --role p2" + shared + " --listen 127.0.0.1:" + std::to_string(p + 1) +
          " --connect 127.0.0.1:" + std::to_string(p) + " --input " + dir.file("in1") +
          " --output " + dir.file("out1"),
      "run --role dealer:3" + shared + " --connect 127.0.0.1:" + std::to_string(p) +
          ",127.0.0.1:" + std::to_string(p + 1) + " --input " + dir.file("in2") +
          " --output " + dir.file("out2"),
  });
  for (const auto& r : rs) {
    CAPTURE(r.out);
    CHECK(r.code == 0);
  }
  for (int i = 0; i < 3; ++i)
    CHECK(read_text(dir.file("out" + std::to_string(i))) == joined_lines(expect));
}

TEST_CASE("a bin overflow aborts every party") {
  TempDir dir;
  const int p = port_base() + 50;
  const uint32_t sigma = 16;
  const uint64_t n = 128;
  const mpsi::BinLayout layout = mpsi::BinLayout::from_params(sigma, n, 1.0, 1.0, 1);
  REQUIRE(layout.beta() == 4);
  REQUIRE(layout.capacity() < n);

  // p1's set: more bin-0 elements than one bin can hold
  std::vector<uint64_t> attack;
  for (uint64_t x = 0; x < (1ull << sigma) - 1 && attack.size() < n; ++x) {
    const bool want_bin0 = attack.size() < layout.capacity() + 1;
    if ((layout.place(x).first == 0) == want_bin0) attack.push_back(x);
  }
  REQUIRE(attack.size() == n);
  std::sort(attack.begin(), attack.end());
  write_lines(dir.file("in0"), attack);

  std::mt19937_64 rng(505);
  for (int i = 1; i < 3; ++i) {
    const auto set = testutil::random_distinct_set(rng, n, (1ull << sigma) - 2);
    REQUIRE_NOTHROW(mpsi::build_bins(set, layout, uint32_t(i + 1), 3));
    write_lines(dir.file("in" + std::to_string(i)), set);
  }

  const std::string shared = " --m 3 --n 128 --sigma 16 --mode hashing-mscs --f reveal"
                             " --variant robust --gamma 1 --delta 1 --hash-seed 1 --seed 41";
  const auto rs = run_parties({
      "run --role p1" + shared + " --listen 127.0.0.1:" + std::to_string(p) + " --input " +
          dir.file("in0") + " --output " + dir.file("out0"),
      "run --role p2" + shared + " --listen 127.0.0.1:" + std::to_string(p + 1) +
          " --connect 127.0.0.1:" + std::to_string(p) + " --input " + dir.file("in1"),
      "run --role dealer:3" + shared + " --connect 127.0.0.1:" + std::to_string(p) +
          ",127.0.0.1:" + std::to_string(p + 1) + " --input " + dir.file("in2"),
  });
  CAPTURE(rs[0].out);
  CHECK(rs[0].code == 3);
  CHECK(rs[0].out.find("hash failure, protocol terminated") != std::string::npos);
  CHECK(rs[1].code != 0);
  CHECK(rs[2].code != 0);
  CHECK_FALSE(fs::exists(dir.file("out0")));
}

TEST_CASE("circuit generation produces parseable text with exact gate counts") {
  TempDir dir;
  CmdResult r = run_cmd("gen-circuit --stage merge --m 3 --n 4 --sigma 8 --output " +
                        dir.file("merge.circ"));
  CHECK(r.code == 0);
  const mpsi::Circuit merge = mpsi::deserialize(read_text(dir.file("merge.circ")));
  // 16 padded words: 2 sigma ((p/4) lg (lg-1) + p - 1) = 2*8*63
  CHECK(merge.and_count() == 1008);

  r = run_cmd("gen-circuit --stage compare --m 3 --n 4 --sigma 8 --output " +
              dir.file("cmp.circ"));
  CHECK(r.code == 0);
  const mpsi::Circuit cmp = mpsi::deserialize(read_text(dir.file("cmp.circ")));
  CHECK(cmp.and_count() == ((3 + 1) * 8 - 1) * 3 + 2 * 8 - 1);  // 108
  CHECK(cmp.and_count() == (4 * 4 - 2) * 8 - 4);                // three-party closed form

  r = run_cmd("gen-circuit --stage mbwa --m 3 --sigma 4 --output " + dir.file("bwa.circ"));
  CHECK(r.code == 0);
  const mpsi::Circuit bwa = mpsi::deserialize(read_text(dir.file("bwa.circ")));
  CHECK(bwa.and_count() == 2 * 16);
  CHECK(bwa.gates.size() == 5 * 16);

  r = run_cmd("gen-circuit --stage mscs --m 3 --n 4 --sigma 8 --f cardinality --output " +
              dir.file("mscs.circ"));
  CHECK(r.code == 0);
  CHECK(mpsi::deserialize(read_text(dir.file("mscs.circ"))).and_count() > 1008 + 108);

  CHECK(run_cmd("gen-circuit --stage warp --sigma 8").code == 2);
  CHECK(run_cmd("gen-circuit --stage merge --m 3 --sigma 8").code == 2);  // missing --n
}

TEST_CASE("cost report prints a machine-readable breakdown") {
  CmdResult r = run_cmd("analyze --m 3 --n 16 --sigma 8 --mode mscs --f cardinality");
  CHECK(r.code == 0);
  auto kv = parse_kv(r.out);
  CHECK(kv["m"] == "3");
  CHECK(kv["plain_merge_ands"] == "8688");  // 2*8*543 for 64 padded words
  CHECK(kv["plain_total_ands"] == kv["plain_generated_total_ands"]);
  CHECK(kv.count("plain_bound_ands") == 1);

  r = run_cmd("analyze --m 3 --n 64 --sigma 12 --mode hashing-mscs --f reveal"
              " --variant robust --gamma 2 --delta 1");
  CHECK(r.code == 0);
  kv = parse_kv(r.out);
  CHECK(kv["exec_beta"] == "2");
  CHECK(kv["exec_total_ands"] == kv["exec_generated_total_ands"]);
  CHECK(kv.count("exec_failure_bound_log2") == 1);
  CHECK(kv.count("opt_gates_per_element") == 1);
  CHECK(kv.count("opt_reduction_percent") == 1);

  r = run_cmd("analyze --m 3 --sigma 10 --mode mbwa --f bitvector");
  CHECK(r.code == 0);
  kv = parse_kv(r.out);
  CHECK(kv["plain_xor_gates"] == "3072");
  CHECK(kv["plain_total_ands"] == "2048");
}

TEST_CASE("bin parameter search prints the sweep and single points") {
  CmdResult r = run_cmd("optimize-hash --m 3 --gamma 40");
  CHECK(r.code == 0);
  int data_rows = 0;
  std::stringstream ss(r.out);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] != '#' && line.find_first_not_of(' ') != std::string::npos &&
        std::isdigit(static_cast<unsigned char>(line[line.find_first_not_of(' ')])))
      ++data_rows;
  CHECK(data_rows == 13);

  r = run_cmd("optimize-hash --m 3 --n 4096 --sigma 32 --gamma 40");
  CHECK(r.code == 0);
  CHECK(r.out.find("gates/elem") != std::string::npos);
}

TEST_CASE("built-in self checks pass") {
  const CmdResult r = run_cmd("selftest");
  CAPTURE(r.out);
  CHECK(r.code == 0);
  CHECK(r.out.find("ok - ") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("benchmarks emit key=value metrics") {
  const CmdResult r = run_cmd("bench");
  CAPTURE(r.out);
  CHECK(r.code == 0);
  const auto kv = parse_kv(r.out);
  CHECK(kv.count("garble_and_gates") == 1);
  CHECK(kv.count("garble_ands_per_sec") == 1);
  CHECK(kv.count("session_bytes") == 1);
}
