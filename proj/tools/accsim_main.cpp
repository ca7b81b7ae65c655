// accsim: deterministic simulator and analysis toolkit for failure-aware
// atomic commit protocols. Subcommands: run, check, modelcheck, tune,
// delaycount, bench.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "acc/artifacts.hpp"
#include "acc/checker.hpp"
#include "acc/fsa.hpp"
#include "acc/runtime.hpp"
#include "acc/scenario.hpp"
#include "acc/trainer.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace acc;

constexpr int kExitPass = 0;
constexpr int kExitSafety = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

void emit_error(const std::string& type, const std::string& message) {
  Json err{{"error", Json{{"type", type}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
}

Scenario load_scenario(const std::string& path, const std::string& qtable_path) {
  Scenario sc = Scenario::from_file(path);
  if (sc.tuned_alpha_cf || sc.tuned_alpha_nf) {
    if (qtable_path.empty())
      throw ScenarioError{
          "scenario uses \"tuned\" alphas; pass --qtable with a table produced "
          "by the tune subcommand"};
    std::ifstream in(qtable_path);
    if (!in) throw ScenarioError{"cannot open q-table file: " + qtable_path};
    Json j;
    try {
      in >> j;
    } catch (const Json::exception& e) {
      throw ScenarioError{std::string("q-table JSON error: ") + e.what()};
    }
    QTable q = QTable::from_json(j.contains("q") ? j["q"] : j);
    if (sc.tuned_alpha_cf) sc.alpha_cf = extract_alpha(q, Level::CF);
    if (sc.tuned_alpha_nf) sc.alpha_nf = extract_alpha(q, Level::NF);
  }
  return sc;
}

int cmd_run(const std::string& path, const std::string& out_dir,
            const std::string& qtable_path) {
  Scenario sc = load_scenario(path, qtable_path);
  Runtime rt(sc);
  rt.run();
  SafetyVerdict v = write_run_artifacts(rt, out_dir);
  std::cout << verdict_json(rt, v).dump(2) << "\n";
  return v.safety_ok() ? kExitPass : kExitSafety;
}

int cmd_check(const std::string& path, const std::string& trace_path,
              const std::string& out_path) {
  Scenario sc = Scenario::from_file(path);
  GlobalTrace trace = trace_from_jsonl(trace_path);
  SafetyVerdict v = check_safety(trace, sc);
  Json j = v.to_json();
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    out << j.dump(2) << "\n";
  }
  std::cout << j.dump(2) << "\n";
  return v.safety_ok() ? kExitPass : kExitSafety;
}

int cmd_modelcheck(const std::string& proto_s, int n, const std::string& out_path) {
  auto p = protocol_from_string(proto_s);
  if (!p || (*p != Protocol::FF && *p != Protocol::CF))
    throw ScenarioError{"modelcheck supports protocols ff and cf"};
  FsaResult res = explore_fsa(*p, n);
  std::cout << res.render();
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    out << res.to_json().dump(2) << "\n";
  }
  return kExitPass;
}

int cmd_tune(const std::string& path, double budget_s, const std::string& out_path) {
  Scenario sc = Scenario::from_file(path);
  TunerConfig cfg;
  cfg.budget_s = budget_s;
  TuneOutcome out = train_tuner(sc, cfg);
  if (out.episodes == 0) {
    emit_error("budget", "training budget too small to complete any episode");
    return kExitBudget;
  }
  std::ofstream f(out_path, std::ios::binary);
  f << out.to_json().dump(2) << "\n";
  Json brief{{"alpha_cf", out.alpha_cf},
             {"alpha_nf", out.alpha_nf},
             {"episodes", out.episodes},
             {"seconds", out.seconds}};
  std::cout << brief.dump(2) << "\n";
  return kExitPass;
}

// ----------------------------------------------------------------- delaycount

Scenario delay_scenario(Protocol p, double d_ms, int variant) {
  Scenario sc;
  sc.name = std::string(to_string(p)) + (variant == 0 ? "-commit"
                                         : variant == 1 ? "-abort"
                                                        : "-crash");
  sc.seed = 1;
  sc.participants = 2;
  sc.horizon_ms = 50.0 * d_ms;
  sc.link_base_ms = d_ms;
  sc.link_jitter_ms = 0;
  sc.r = 1;
  sc.protocol = to_string(p);
  sc.workload.clients = 1;
  sc.workload.keys_per_txn = 2;
  sc.workload.cross_shard_fraction = 1.0;
  sc.workload.key_space = 12;
  sc.txn_limit = 1;
  if (variant == 1) sc.forced_no_nodes = {1};
  if (variant == 2) {
    FailureEntry e;
    e.kind = FailureEntry::CrashFail;
    e.target = 1;
    e.tau_ms = 30.0 * d_ms;
    e.start_ms = 0;
    e.cycles = 1;
    sc.failures.entries.push_back(e);
  }
  return sc;
}

std::string fmt_count(double c) {
  if (c < 0) return "-";
  if (std::fabs(c - std::round(c)) < 1e-6) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(std::llround(c)));
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", c);
  return buf;
}

int cmd_delaycount(double d_ms, const std::string& out_path) {
  std::ostringstream csv;
  csv << "protocol,coordinator,participant_commit,participant_abort,"
         "participant_crash\n";
  for (Protocol p : {Protocol::FF, Protocol::CF, Protocol::NF, Protocol::TwoPC}) {
    double coord = -1, commit = -1, abort_c = -1, crash = -1;
    for (int variant = 0; variant < 3; ++variant) {
      if (variant == 2 && p == Protocol::FF) continue;  // blocks; no finite count
      Runtime rt(delay_scenario(p, d_ms, variant));
      rt.run();
      DelayCount dc = count_message_delays(rt.trace(), d_ms);
      // node 2 is a Yes-voting, never-failing participant in every variant
      double part = dc.participant.count(2) ? dc.participant.at(2) : -1;
      if (variant == 0) {
        coord = dc.coordinator;
        commit = part;
      } else if (variant == 1) {
        abort_c = part;
      } else {
        crash = part;
      }
    }
    csv << to_string(p) << "," << fmt_count(coord) << "," << fmt_count(commit)
        << "," << fmt_count(abort_c) << "," << fmt_count(crash) << "\n";
  }
  std::cout << csv.str();
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    out << csv.str();
  }
  return kExitPass;
}

// ---------------------------------------------------------------------- bench

int cmd_bench(const std::string& path, int seeds, bool serial,
              const std::string& out_path) {
  Scenario base = Scenario::from_file(path);
  if (seeds < 1) throw ScenarioError{"bench needs at least one seed"};

  std::vector<Metrics> results(static_cast<size_t>(seeds));
  std::vector<int> safety_fail(static_cast<size_t>(seeds), 0);
  auto one = [&](int i) {
    Scenario sc = base;
    sc.seed = base.seed + static_cast<uint64_t>(i);
    Runtime rt(sc);
    rt.run();
    results[static_cast<size_t>(i)] = rt.metrics();
    if (!check_safety(rt.trace(), sc).safety_ok())
      safety_fail[static_cast<size_t>(i)] = 1;
  };

  auto t0 = std::chrono::steady_clock::now();
  if (serial) {
    for (int i = 0; i < seeds; ++i) one(i);
  } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < seeds; ++i) one(i);
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ostringstream csv;
  csv << "seed,issued,committed,aborted,tps,p99_ms,retries_mean\n";
  int violations = 0;
  for (int i = 0; i < seeds; ++i) {
    const Metrics& m = results[static_cast<size_t>(i)];
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%llu,%lld,%lld,%lld,%.6f,%.6f,%.6f\n",
                  static_cast<unsigned long long>(base.seed + static_cast<uint64_t>(i)),
                  static_cast<long long>(m.issued),
                  static_cast<long long>(m.committed),
                  static_cast<long long>(m.aborted_final), m.tps, m.p99_ms,
                  m.retries_mean);
    csv << buf;
    violations += safety_fail[static_cast<size_t>(i)];
  }
  std::cout << csv.str();
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    out << csv.str();
  }
  std::cerr << Json{{"seeds", seeds},
                    {"mode", serial ? "serial" : "parallel"},
                    {"wall_s", secs},
                    {"safety_violations", violations}}
                   .dump()
            << "\n";
  return violations == 0 ? kExitPass : kExitSafety;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"accsim: deterministic atomic-commit protocol simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", qtable_path, trace_path, out_path;
  std::string proto_s = "cf";
  int n = 2, seeds = 8;
  double budget_s = 5.0, d_ms = 10.0;
  bool serial = false;

  auto* run = app.add_subcommand("run", "execute a scenario and emit artifacts");
  run->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--out", out_dir, "artifact directory (trace.jsonl, metrics.csv, verdict.json)");
  run->add_option("--qtable", qtable_path, "trained q-table for \"tuned\" alphas");

  auto* check = app.add_subcommand("check", "re-verify an existing trace");
  check->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  check->add_option("--trace", trace_path, "trace.jsonl to verify")->required();
  check->add_option("--out", out_path, "write the verdict JSON here too");

  auto* mc = app.add_subcommand("modelcheck", "exhaustive state-pair reachability");
  mc->add_option("--protocol", proto_s, "ff or cf");
  mc->add_option("--n", n, "participant count (>= 2)");
  mc->add_option("--out", out_path, "write the matrix JSON here");

  auto* tune = app.add_subcommand("tune", "learn downgrade thresholds for a scenario");
  tune->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  tune->add_option("--budget-s", budget_s, "wall-clock training budget in seconds");
  tune->add_option("--out", out_path, "q-table output path")->required();

  auto* dc = app.add_subcommand("delaycount", "message-delay table across protocols");
  dc->add_option("--d-ms", d_ms, "uniform one-way link delay in ms");
  dc->add_option("--out", out_path, "CSV output path");

  auto* bench = app.add_subcommand("bench", "sweep a scenario across seeds");
  bench->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  bench->add_option("--seeds", seeds, "number of consecutive seeds");
  bench->add_flag("--serial", serial, "disable the parallel sweep");
  bench->add_option("--out", out_path, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) emit_error("usage", e.what());
    return e.get_exit_code() == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(scenario_path, out_dir, qtable_path);
    if (check->parsed()) return cmd_check(scenario_path, trace_path, out_path);
    if (mc->parsed()) return cmd_modelcheck(proto_s, n, out_path);
    if (tune->parsed()) return cmd_tune(scenario_path, budget_s, out_path);
    if (dc->parsed()) return cmd_delaycount(d_ms, out_path);
    if (bench->parsed()) return cmd_bench(scenario_path, seeds, serial, out_path);
  } catch (const acc::ScenarioError& e) {
    emit_error("config", e.message);
    return kExitConfig;
  } catch (const std::exception& e) {
    emit_error("config", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
