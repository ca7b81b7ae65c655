// Black-box tests for the accsim command-line interface.
// argv[1] = path to the accsim binary, argv[2] = directory with scenario files.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void expect(bool cond, const std::string& what) {
  if (cond) {
    std::cout << "ok: " << what << "\n";
  } else {
    std::cout << "FAIL: " << what << "\n";
    ++g_failures;
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CmdResult {
  int exit_code = -1;
  std::string out, err;
};

CmdResult run_cmd(const std::string& cmd, const fs::path& tmp) {
  fs::path out = tmp / "stdout.txt", err = tmp / "stderr.txt";
  std::string full = cmd + " > " + out.string() + " 2> " + err.string();
  int status = std::system(full.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: cli_tests <accsim-binary> <scenario-dir>\n";
    return 2;
  }
  const std::string bin = argv[1];
  const fs::path scen = argv[2];
  const fs::path tmp = fs::temp_directory_path() / "accsim_cli_tests";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  // clean run: exit 0, artifacts on disk, verdict on stdout
  {
    auto r = run_cmd(bin + " run --scenario " + (scen / "failure_free.json").string() +
                         " --out " + (tmp / "ff").string(),
                     tmp);
    expect(r.exit_code == 0, "clean run exits 0");
    expect(fs::exists(tmp / "ff/trace.jsonl") && fs::exists(tmp / "ff/metrics.csv") &&
               fs::exists(tmp / "ff/verdict.json"),
           "run writes trace.jsonl, metrics.csv, verdict.json");
    expect(contains(r.out, "\"safety\""), "run prints the verdict JSON");
  }

  // safety violation: exit 1
  {
    auto r = run_cmd(bin + " run --scenario " + (scen / "forged_decision.json").string() +
                         " --out " + (tmp / "forged").string(),
                     tmp);
    expect(r.exit_code == 1, "forged-decision scenario exits 1");
    expect(contains(slurp(tmp / "forged/verdict.json"), "\"agreement_violations\""),
           "verdict records the violation counters");
  }

  // config errors: exit 2 with a machine-readable error record on stderr
  {
    auto r = run_cmd(bin + " run --scenario " + (tmp / "missing.json").string(), tmp);
    expect(r.exit_code == 2, "missing scenario file exits 2");
    expect(contains(r.err, "\"error\""), "missing scenario emits a JSON error record");

    std::ofstream(tmp / "bad.json") << "{\"seed\": 1, \"protocol\": \"3pc\"}";
    r = run_cmd(bin + " run --scenario " + (tmp / "bad.json").string(), tmp);
    expect(r.exit_code == 2, "invalid scenario exits 2");
    expect(contains(r.err, "\"error\""), "invalid scenario emits a JSON error record");

    r = run_cmd(bin + " frobnicate", tmp);
    expect(r.exit_code == 2, "unknown subcommand exits 2");
    expect(contains(r.err, "\"error\""), "unknown subcommand emits a JSON error record");
  }

  // adaptive run: trace records both the downgrade and the climb back up
  {
    auto r = run_cmd(bin + " run --scenario " + (scen / "nf_cycle.json").string() +
                         " --out " + (tmp / "nf").string(),
                     tmp);
    expect(r.exit_code == 0, "adaptive delay-cycle scenario exits 0");
    std::string trace = slurp(tmp / "nf/trace.jsonl");
    expect(contains(trace, "\"old\":\"ff\",\"new\":\"nf\""),
           "trace shows a downgrade to the network-tolerant mode");
    expect(contains(trace, "\"new\":\"ff\",\"rule\":\"downgrade\""),
           "trace shows the counter-driven return to the strict mode");
  }

  // check round-trips a trace and agrees with the original verdict
  {
    auto r = run_cmd(bin + " check --scenario " + (scen / "failure_free.json").string() +
                         " --trace " + (tmp / "ff/trace.jsonl").string(),
                     tmp);
    expect(r.exit_code == 0, "check accepts a clean trace");
    r = run_cmd(bin + " check --scenario " + (scen / "forged_decision.json").string() +
                    " --trace " + (tmp / "forged/trace.jsonl").string(),
                tmp);
    expect(r.exit_code == 1, "check flags the forged trace");
  }

  // delaycount: exact CSV table
  {
    auto r = run_cmd(bin + " delaycount --d-ms 10", tmp);
    expect(r.exit_code == 0, "delaycount exits 0");
    expect(contains(r.out,
                    "protocol,coordinator,participant_commit,participant_abort,"
                    "participant_crash") &&
               contains(r.out, "ff,3,1,1,-") && contains(r.out, "cf,3,3,1,1") &&
               contains(r.out, "nf,2,2,2,2") && contains(r.out, "2pc,4,2,2,2"),
           "delaycount prints the exact table");
  }

  // modelcheck: blocking classification per protocol
  {
    auto r = run_cmd(bin + " modelcheck --protocol cf --n 2", tmp);
    expect(r.exit_code == 0 && contains(r.out, "nonblocking: yes"),
           "modelcheck classifies the crash-tolerant protocol nonblocking");
    r = run_cmd(bin + " modelcheck --protocol ff --n 2", tmp);
    expect(r.exit_code == 0 && contains(r.out, "nonblocking: no"),
           "modelcheck classifies the strict protocol blocking");
    r = run_cmd(bin + " modelcheck --protocol nf --n 2", tmp);
    expect(r.exit_code == 2, "modelcheck rejects unsupported protocols with exit 2");
  }

  // same seed, same bytes
  {
    run_cmd(bin + " run --scenario " + (scen / "crash_cycle.json").string() + " --out " +
                (tmp / "d1").string(),
            tmp);
    run_cmd(bin + " run --scenario " + (scen / "crash_cycle.json").string() + " --out " +
                (tmp / "d2").string(),
            tmp);
    bool same = slurp(tmp / "d1/trace.jsonl") == slurp(tmp / "d2/trace.jsonl") &&
                slurp(tmp / "d1/metrics.csv") == slurp(tmp / "d2/metrics.csv") &&
                slurp(tmp / "d1/verdict.json") == slurp(tmp / "d2/verdict.json");
    expect(same && !slurp(tmp / "d1/trace.jsonl").empty(),
           "repeated runs produce byte-identical artifacts");
  }

  // tune writes a usable q-table and "tuned" alphas resolve through it
  {
    auto r = run_cmd(bin + " tune --scenario " + (scen / "crash_cycle.json").string() +
                         " --budget-s 2 --out " + (tmp / "qtable.json").string(),
                     tmp);
    expect(r.exit_code == 0 && fs::exists(tmp / "qtable.json"),
           "tune exits 0 and writes the q-table");

    std::ofstream(tmp / "tuned.json")
        << "{\"name\":\"tuned\",\"seed\":5,\"participants\":3,\"horizon_ms\":400,"
           "\"link\":{\"base_ms\":10},\"protocol\":\"auto\","
           "\"alpha_cf\":\"tuned\",\"alpha_nf\":\"tuned\","
           "\"workload\":{\"clients\":4,\"key_space\":64}}";
    r = run_cmd(bin + " run --scenario " + (tmp / "tuned.json").string() + " --qtable " +
                    (tmp / "qtable.json").string() + " --out " + (tmp / "tuned").string(),
                tmp);
    expect(r.exit_code == 0, "tuned alphas resolve from a trained q-table");
    r = run_cmd(bin + " run --scenario " + (tmp / "tuned.json").string(), tmp);
    expect(r.exit_code == 2 && contains(r.err, "\"error\""),
           "tuned alphas without --qtable exit 2 with a JSON error record");
  }

  // bench: per-seed CSV plus summary
  {
    auto r = run_cmd(bin + " bench --scenario " + (scen / "failure_free.json").string() +
                         " --seeds 3 --serial --out " + (tmp / "bench.csv").string(),
                     tmp);
    expect(r.exit_code == 0, "bench exits 0 on a clean sweep");
    std::string csv = slurp(tmp / "bench.csv");
    int rows = 0;
    for (char c : csv)
      if (c == '\n') ++rows;
    expect(rows == 4 && contains(csv, "seed,"), "bench CSV has a header plus one row per seed");
  }

  fs::remove_all(tmp);
  if (g_failures == 0) {
    std::cout << "ALL CLI TESTS PASSED\n";
    return 0;
  }
  std::cout << g_failures << " CLI TEST(S) FAILED\n";
  return 1;
}
