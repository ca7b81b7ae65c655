// End-to-end acceptance gate: one pass/fail line per shipped guarantee.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <set>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "acc/artifacts.hpp"
#include "acc/checker.hpp"
#include "acc/fsa.hpp"
#include "acc/runtime.hpp"
#include "acc/scenario.hpp"
#include "acc/trainer.hpp"

using namespace acc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_s() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

Scenario base_scenario(uint64_t seed) {
  Scenario sc;
  sc.seed = seed;
  sc.participants = 3;
  sc.horizon_ms = 1000;
  sc.link_base_ms = 10;
  sc.link_jitter_ms = 0;
  sc.r = 1;
  sc.alpha_cf = 4;
  sc.alpha_nf = 4;
  sc.workload.clients = 6;
  sc.workload.skew = 0.5;
  sc.workload.keys_per_txn = 4;
  sc.workload.cross_shard_fraction = 1.0;
  sc.workload.key_space = 300;
  return sc;
}

// ------------------------------------------------- 1: message-delay counting

Scenario delay_count_scenario(Protocol p, int variant) {
  Scenario sc;
  sc.seed = 1;
  sc.participants = 2;
  sc.horizon_ms = 500;
  sc.link_base_ms = 10;
  sc.link_jitter_ms = 0;
  sc.r = 1;
  sc.protocol = to_string(p);
  sc.workload.clients = 1;
  sc.workload.skew = 0;
  sc.workload.keys_per_txn = 2;
  sc.workload.cross_shard_fraction = 1.0;
  sc.workload.key_space = 12;
  sc.txn_limit = 1;
  if (variant == 1) sc.forced_no_nodes = {1};
  if (variant == 2)
    sc.failures.entries.push_back({FailureEntry::CrashFail, 1, 300, 0, 0, 1});
  return sc;
}

Outcome criterion_delay_table() {
  struct Row {
    Protocol p;
    double coord, commit, abort_c, crash;  // -1 = no defined value
  };
  const Row expected[] = {
      {Protocol::FF, 3, 1, 1, -1},
      {Protocol::CF, 3, 3, 1, 1},
      {Protocol::NF, 2, 2, 2, 2},
      {Protocol::TwoPC, 4, 2, 2, 2},
  };
  double t0 = now_s();
  std::ostringstream why;
  bool ok = true;
  for (const Row& row : expected) {
    double got[4] = {-1, -1, -1, -1};
    for (int variant = 0; variant < 3; ++variant) {
      if (variant == 2 && row.p == Protocol::FF) continue;
      Runtime rt(delay_count_scenario(row.p, variant));
      rt.run();
      DelayCount dc = count_message_delays(rt.trace(), 10.0);
      if (!dc.integral) {
        ok = false;
        why << to_string(row.p) << " variant " << variant << " not integral; ";
      }
      double part = dc.participant.count(2) ? dc.participant.at(2) : -1;
      if (variant == 0) {
        got[0] = dc.coordinator;
        got[1] = part;
      } else if (variant == 1) {
        got[2] = part;
      } else {
        got[3] = part;
      }
    }
    double want[4] = {row.coord, row.commit, row.abort_c, row.crash};
    for (int i = 0; i < 4; ++i)
      if (got[i] != want[i]) {
        ok = false;
        why << to_string(row.p) << " col " << i << " got " << got[i] << " want "
            << want[i] << "; ";
      }
  }
  double secs = now_s() - t0;
  if (secs >= 1.0) {
    ok = false;
    why << "took " << secs << "s (budget 1s); ";
  }
  if (ok) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "all 4 protocol rows integer-exact in %.2fs", secs);
    return {true, buf};
  }
  return {false, why.str()};
}

// ---------------------------------------- 2: reachable state-pair matrices

Outcome criterion_state_matrices() {
  // frozen expected matrices (row/col order as rendered)
  const std::vector<FsaLocal> ff_order{FsaLocal::Q, FsaLocal::W, FsaLocal::A,
                                       FsaLocal::C};
  const bool ff_exp[4][4] = {
      {1, 1, 1, 0}, {1, 1, 1, 1}, {1, 1, 1, 0}, {0, 1, 0, 1}};
  const std::vector<FsaLocal> cf_order{FsaLocal::Q,  FsaLocal::W, FsaLocal::TA,
                                       FsaLocal::TC, FsaLocal::A, FsaLocal::C};
  const bool cf_exp[6][6] = {{1, 1, 1, 0, 0, 0}, {1, 1, 1, 1, 0, 0},
                             {1, 1, 1, 0, 1, 0}, {0, 1, 0, 1, 0, 1},
                             {0, 0, 1, 0, 1, 0}, {0, 0, 0, 1, 0, 1}};

  double t0 = now_s();
  std::ostringstream why;
  bool ok = true;
  for (int n : {2, 3}) {
    FsaResult ff = explore_fsa(Protocol::FF, n);
    for (size_t i = 0; i < ff_order.size(); ++i)
      for (size_t j = 0; j < ff_order.size(); ++j)
        if (ff.concurrent(ff_order[i], ff_order[j]) != ff_exp[i][j]) {
          ok = false;
          why << "ff n=" << n << " cell (" << to_string(ff_order[i]) << ","
              << to_string(ff_order[j]) << ") wrong; ";
        }
    if (ff.nonblocking) {
      ok = false;
      why << "ff n=" << n << " wrongly classified nonblocking; ";
    }

    FsaResult cf = explore_fsa(Protocol::CF, n);
    for (size_t i = 0; i < cf_order.size(); ++i)
      for (size_t j = 0; j < cf_order.size(); ++j)
        if (cf.concurrent(cf_order[i], cf_order[j]) != cf_exp[i][j]) {
          ok = false;
          why << "cf n=" << n << " cell (" << to_string(cf_order[i]) << ","
              << to_string(cf_order[j]) << ") wrong; ";
        }
    if (!cf.nonblocking) {
      ok = false;
      why << "cf n=" << n << " wrongly classified blocking; ";
    }
  }
  double secs = now_s() - t0;
  if (secs >= 10.0) {
    ok = false;
    why << "took " << secs << "s (budget 10s); ";
  }
  if (ok) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "ff and cf matrices match for n=2,3 in %.2fs", secs);
    return {true, buf};
  }
  return {false, why.str()};
}

// ------------------------- 3 + 5: safety sweep and detection exactness

struct SweepTally {
  int64_t scenarios = 0;
  int64_t txns = 0;
  int64_t agreement = 0;
  int64_t validity = 0;
  int64_t unexcused = 0;
  int64_t unterminated = 0;
  int64_t soundness_violations = 0;
  int64_t completeness_violations = 0;
  int64_t detection_events = 0;
  int64_t ff_failure_aborts = 0;
};

void sweep_one(const std::string& proto, int mode, double skew, uint64_t seed,
               SweepTally& t) {
  Scenario sc = base_scenario(seed);
  sc.protocol = proto;
  sc.workload.skew = skew;
  NodeId c1 = 1 + static_cast<NodeId>(seed % 3);
  NodeId c2 = 1 + static_cast<NodeId>((seed + 1) % 3);
  if (mode == 1 || mode == 3)
    sc.failures.entries.push_back({FailureEntry::CrashFail, c1, 100, 0, 150, 0});
  if (mode == 2 || mode == 3)
    sc.failures.entries.push_back({FailureEntry::DelayFail, c2, 100, 30, 150, 0});
  sc.name = proto + "-m" + std::to_string(mode);

  Runtime rt(sc);
  rt.run();
  SafetyVerdict v = check_safety(rt.trace(), sc);
  t.scenarios++;
  t.txns += v.txns;
  t.agreement += v.agreement_violations;
  t.validity += v.validity_violations;
  t.unexcused += v.unexcused_aborts;
  t.unterminated += v.unterminated;

  // detection soundness/completeness against the injected schedule
  auto intervals = sc.failures.expand(ms_to_us(sc.horizon_ms));
  SimTime tc_us = ms_to_us(rt.crash_timeout_ms());
  for (const auto& [id, tr] : rt.txns()) {
    if (!tr.event_nodes.empty()) {
      t.detection_events++;
      bool overlaps = false;
      for (const auto& iv : intervals)
        if (iv.t0 <= tr.propose_t + tc_us && iv.t1 >= tr.propose_t) overlaps = true;
      if (!overlaps) t.soundness_violations++;
    }
    // every injected failure that aborts an all-Yes txn under the strict
    // protocol must be noticed (relaxed levels hide expected failures)
    if (tr.proto == Protocol::FF && tr.final_decision == Decision::Abort &&
        !tr.saw_no) {
      t.ff_failure_aborts++;
      if (tr.event_nodes.empty()) t.completeness_violations++;
    }
  }
}

void criterion_sweep(Outcome& safety_out, Outcome& detection_out) {
  const std::vector<std::string> protos{"ff", "cf", "nf", "2pc", "auto"};
  const std::vector<double> skews{0.0, 0.5, 0.99};
  const int kSeeds = 17;

  struct Job {
    std::string proto;
    int mode;
    double skew;
    uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& p : protos)
    for (int mode = 0; mode < 4; ++mode)
      for (double skew : skews)
        for (int s = 0; s < kSeeds; ++s)
          jobs.push_back({p, mode, skew, 9000 + jobs.size()});

  std::vector<SweepTally> tallies(jobs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (size_t i = 0; i < jobs.size(); ++i)
    sweep_one(jobs[i].proto, jobs[i].mode, jobs[i].skew, jobs[i].seed, tallies[i]);

  SweepTally t;
  for (const auto& x : tallies) {
    t.scenarios += x.scenarios;
    t.txns += x.txns;
    t.agreement += x.agreement;
    t.validity += x.validity;
    t.unexcused += x.unexcused;
    t.unterminated += x.unterminated;
    t.soundness_violations += x.soundness_violations;
    t.completeness_violations += x.completeness_violations;
    t.detection_events += x.detection_events;
    t.ff_failure_aborts += x.ff_failure_aborts;
  }

  {
    std::ostringstream d;
    d << t.scenarios << " scenarios, " << t.txns << " txns: " << t.agreement
      << " agreement, " << t.validity << " validity, " << t.unexcused
      << " unexcused-abort, " << t.unterminated << " unterminated";
    bool ok = t.scenarios >= 1000 && t.agreement == 0 && t.validity == 0 &&
              t.unexcused == 0 && t.unterminated == 0;
    safety_out = {ok, d.str()};
  }
  {
    std::ostringstream d;
    d << t.detection_events << " detected txns, " << t.ff_failure_aborts
      << " strict-mode failure aborts: " << t.soundness_violations
      << " unsound, " << t.completeness_violations << " missed";
    bool ok = t.soundness_violations == 0 && t.completeness_violations == 0 &&
              t.detection_events > 0 && t.ff_failure_aborts > 0;
    detection_out = {ok, d.str()};
  }
}

// --------------------------------------------- 4: termination under failures

Outcome criterion_liveness() {
  std::ostringstream why;
  bool ok = true;

  // crash-tolerant mode, permanent participant crash: everything terminates
  {
    Scenario sc = base_scenario(4001);
    sc.protocol = "cf";
    sc.horizon_ms = 1500;
    sc.failures.entries.push_back(
        {FailureEntry::CrashFail, 1, 100000, 0, 100, 1});
    Runtime rt(sc);
    rt.run();
    SafetyVerdict v = check_safety(rt.trace(), sc);
    if (v.txns < 10 || v.unterminated != 0 || !v.safety_ok()) {
      ok = false;
      why << "crash-tolerant run: " << v.unterminated << " unterminated of "
          << v.txns << "; ";
    }
  }
  // network-tolerant mode, crash plus delay: everything terminates
  {
    Scenario sc = base_scenario(4002);
    sc.protocol = "nf";
    sc.horizon_ms = 1500;
    sc.failures.entries.push_back(
        {FailureEntry::CrashFail, 1, 100000, 0, 100, 1});
    sc.failures.entries.push_back({FailureEntry::DelayFail, 2, 80, 30, 0, 0});
    Runtime rt(sc);
    rt.run();
    SafetyVerdict v = check_safety(rt.trace(), sc);
    if (v.txns < 10 || v.unterminated != 0 || !v.safety_ok()) {
      ok = false;
      why << "network-tolerant run: " << v.unterminated << " unterminated of "
          << v.txns << "; ";
    }
  }
  // the blocking baseline with a dead coordinator leaves txns hanging
  int64_t holes = 0;
  {
    Scenario sc = base_scenario(4003);
    sc.protocol = "2pc";
    sc.horizon_ms = 1500;
    sc.failures.entries.push_back(
        {FailureEntry::CrashFail, 0, 100000, 0, 100, 1});
    Runtime rt(sc);
    rt.run();
    SafetyVerdict v = check_safety(rt.trace(), sc);
    holes = v.unterminated;
    if (holes < 1) {
      ok = false;
      why << "blocking baseline terminated everything despite a dead "
             "coordinator; ";
    }
    if (!v.safety_ok()) {
      ok = false;
      why << "blocking baseline violated safety; ";
    }
  }
  if (ok) {
    std::ostringstream d;
    d << "tolerant modes fully terminate; blocking baseline left " << holes
      << " txns hanging";
    return {true, d.str()};
  }
  return {false, why.str()};
}

// ----------------------------------------------------- 6: adaptivity margins

int64_t committed_for(const Scenario& sc) {
  Runtime rt(sc);
  rt.run();
  return rt.metrics().committed;
}

Outcome criterion_adaptivity() {
  auto contention = [](const std::string& proto, uint64_t seed) {
    Scenario sc;
    sc.seed = seed;
    sc.participants = 3;
    sc.horizon_ms = 3000;
    sc.link_base_ms = 10;
    sc.protocol = proto;
    sc.workload.clients = 64;
    sc.workload.skew = 0.5;
    sc.workload.keys_per_txn = 4;
    sc.workload.cross_shard_fraction = 1.0;
    sc.workload.key_space = 64;
    return sc;
  };
  auto delay_cycle = [](const std::string& proto, uint64_t seed) {
    Scenario sc;
    sc.seed = seed;
    sc.participants = 3;
    sc.horizon_ms = 3000;
    sc.link_base_ms = 10;
    sc.crash_timeout_ms = 250;
    sc.protocol = proto;
    sc.alpha_cf = 2;
    sc.alpha_nf = 2;
    sc.workload.clients = 64;
    sc.workload.skew = 0.5;
    sc.workload.keys_per_txn = 4;
    sc.workload.cross_shard_fraction = 1.0;
    sc.workload.key_space = 1200;
    sc.failures.entries.push_back({FailureEntry::DelayFail, 1, 50, 80, 200, 0});
    return sc;
  };

  bool ok = true;
  std::ostringstream why;
  int wins_nf = 0, wins_2pc = 0, wins_ff = 0;
  const int kSeeds = 10;
  for (int s = 0; s < kSeeds; ++s) {
    uint64_t seed = 500 + static_cast<uint64_t>(s);
    int64_t c_auto = committed_for(contention("auto", seed));
    int64_t c_nf = committed_for(contention("nf", seed));
    int64_t c_2pc = committed_for(contention("2pc", seed));
    if (c_auto > c_nf) wins_nf++;
    if (c_auto > c_2pc) wins_2pc++;

    uint64_t dseed = 600 + static_cast<uint64_t>(s);
    int64_t d_auto = committed_for(delay_cycle("auto", dseed));
    int64_t d_ff = committed_for(delay_cycle("ff", dseed));
    if (d_auto > d_ff) wins_ff++;
  }
  if (wins_nf != kSeeds || wins_2pc != kSeeds || wins_ff != kSeeds) {
    ok = false;
    why << "sign test: beat network-tolerant " << wins_nf << "/" << kSeeds
        << ", blocking baseline " << wins_2pc << "/" << kSeeds
        << ", strict-under-delay " << wins_ff << "/" << kSeeds;
  }
  if (ok) {
    std::ostringstream d;
    d << "adaptive mode won every pairing, " << kSeeds << "/" << kSeeds
      << " seeds each";
    return {true, d.str()};
  }
  return {false, why.str()};
}

// ------------------------------------------------------ 7: tuned thresholds

Outcome criterion_tuner() {
  struct Sched {
    const char* name;
    FailureEntry entry;
    double tc;
  };
  const Sched scheds[] = {
      {"crash-50ms", {FailureEntry::CrashFail, 1, 50, 0, 100, 0}, 0},
      {"crash-1s", {FailureEntry::CrashFail, 1, 1000, 0, 100, 0}, 0},
      {"delay-50ms", {FailureEntry::DelayFail, 1, 50, 80, 100, 0}, 250},
      {"delay-1s", {FailureEntry::DelayFail, 1, 1000, 80, 100, 0}, 250},
  };

  auto make = [](const Sched& sd, uint64_t seed, int acf, int anf) {
    Scenario sc;
    sc.seed = seed;
    sc.participants = 3;
    sc.horizon_ms = 1500;
    sc.link_base_ms = 10;
    sc.crash_timeout_ms = sd.tc;
    sc.protocol = "auto";
    sc.alpha_cf = acf;
    sc.alpha_nf = anf;
    sc.workload.clients = 32;
    sc.workload.skew = 0.5;
    sc.workload.keys_per_txn = 4;
    sc.workload.cross_shard_fraction = 1.0;
    sc.workload.key_space = 64;
    sc.failures.entries.push_back(sd.entry);
    return sc;
  };
  auto evaluate = [&](const Sched& sd, int acf, int anf) {
    int64_t total = 0;
    for (uint64_t s = 7000; s < 7003; ++s) total += committed_for(make(sd, s, acf, anf));
    return static_cast<double>(total) / 3.0;
  };

  bool ok = true;
  std::ostringstream why, detail;
  for (const Sched& sd : scheds) {
    TunerConfig cfg;
    Scenario train_base = make(sd, 42, 4, 4);
    double t0 = now_s();
    TuneOutcome tuned = train_tuner(train_base, cfg);
    double train_s = now_s() - t0;
    if (train_s > cfg.budget_s + 2.0 || tuned.episodes == 0) {
      ok = false;
      why << sd.name << ": training took " << train_s << "s over the "
          << cfg.budget_s << "s budget; ";
    }
    double best_corner = 0;
    for (int acf : {1, 256})
      for (int anf : {1, 256})
        best_corner = std::max(best_corner, evaluate(sd, acf, anf));
    double tuned_mu = evaluate(sd, tuned.alpha_cf, tuned.alpha_nf);
    detail << sd.name << " tuned(" << tuned.alpha_cf << "," << tuned.alpha_nf
           << ")=" << tuned_mu << " best-corner=" << best_corner << "; ";
    if (tuned_mu < 0.9 * best_corner) {
      ok = false;
      why << sd.name << ": tuned " << tuned_mu << " < 0.9 * " << best_corner
          << "; ";
    }
  }
  return {ok, ok ? detail.str() : why.str()};
}

// ----------------------------------------------------------- 8: determinism

Outcome criterion_determinism() {
  Scenario sc = base_scenario(8001);
  sc.protocol = "auto";
  sc.horizon_ms = 1200;
  sc.link_jitter_ms = 2;
  sc.workload.clients = 8;
  sc.failures.entries.push_back({FailureEntry::CrashFail, 2, 100, 0, 200, 1});
  sc.failures.entries.push_back({FailureEntry::DelayFail, 1, 100, 30, 0, 2});

  namespace fs = std::filesystem;
  fs::path tmp = fs::temp_directory_path() / "accsim_det";
  fs::remove_all(tmp);
  auto run_into = [&](const std::string& dir) {
    Runtime rt(sc);
    rt.run();
    write_run_artifacts(rt, (tmp / dir).string());
  };
  run_into("a");
  run_into("b");

  auto slurp = [&](const std::string& rel) {
    std::ifstream in(tmp / rel, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool ok = true;
  std::ostringstream why;
  size_t trace_bytes = 0;
  for (const char* f : {"trace.jsonl", "metrics.csv", "verdict.json"}) {
    std::string a = slurp(std::string("a/") + f);
    std::string b = slurp(std::string("b/") + f);
    if (f == std::string("trace.jsonl")) trace_bytes = a.size();
    if (a.empty() || a != b) {
      ok = false;
      why << f << " differs between identical runs; ";
    }
  }
  fs::remove_all(tmp);
  if (ok) {
    std::ostringstream d;
    d << "trace/metrics/verdict byte-identical across reruns (" << trace_bytes
      << "-byte trace)";
    return {true, d.str()};
  }
  return {false, why.str()};
}

// ----------------------------------------------- 9: crash-recovery equivalence

Outcome criterion_recovery() {
  const std::vector<std::string> protos{"ff", "cf", "nf", "2pc", "auto"};
  int64_t runs = 0, txns = 0;
  int64_t disagreements = 0, vote_violations = 0, unresolved = 0,
          atomicity_violations = 0, residual = 0;
  std::ostringstream why;

  for (uint64_t s = 0; s < 200; ++s) {
    Scenario sc = base_scenario(30000 + s);
    sc.protocol = protos[s % protos.size()];
    sc.failures.entries.push_back(
        {FailureEntry::CrashFail, 1 + static_cast<NodeId>(s % 3), 120, 0, 150, 2});
    if (s % 2 == 1)
      sc.failures.entries.push_back({FailureEntry::CrashFail, 0, 100, 0, 600, 1});
    Runtime rt(sc);
    rt.run();
    runs++;
    residual += rt.residual_locks();

    // union of surviving logs, per txn
    struct LogFacts {
      bool commit = false, abort = false;
      std::set<NodeId> ready_yes, ready_no, deciders;
    };
    std::map<TxnId, LogFacts> facts;
    for (NodeId n = 0; n < sc.node_count(); ++n) {
      for (const LogEntry& e : rt.node(n).log) {
        LogFacts& f = facts[e.txn];
        switch (e.kind) {
          case LogKind::CommitLog:
            f.commit = true;
            f.deciders.insert(n);
            break;
          case LogKind::AbortLog:
            f.abort = true;
            f.deciders.insert(n);
            break;
          case LogKind::ReadyYes:
            f.ready_yes.insert(n);
            break;
          case LogKind::ReadyNo:
            f.ready_no.insert(n);
            break;
          default:
            break;
        }
      }
    }
    for (const auto& [id, tr] : rt.txns()) {
      txns++;
      auto it = facts.find(id);
      const LogFacts f = it == facts.end() ? LogFacts{} : it->second;
      if (f.commit && f.abort) disagreements++;
      if (f.commit && !f.ready_no.empty()) vote_violations++;
      if (f.commit) {  // commit needs every touched shard's Yes on record
        for (NodeId n : tr.ct)
          if (!f.ready_yes.count(n)) vote_violations++;
      }
      if (!f.commit && !f.abort) unresolved++;
      // atomicity of the applied state
      for (NodeId n : tr.ct) {
        bool applied = rt.node(n).shard.applied.count(id) > 0;
        if (f.commit && !f.abort && !applied) atomicity_violations++;
        if (!f.commit && applied) atomicity_violations++;
      }
    }
  }
  bool ok = runs == 200 && disagreements == 0 && vote_violations == 0 &&
            unresolved == 0 && atomicity_violations == 0 && residual == 0 &&
            txns > 1000;
  std::ostringstream d;
  d << runs << " runs, " << txns << " txns: " << disagreements
    << " log disagreements, " << vote_violations << " unjustified commits, "
    << unresolved << " unresolved, " << atomicity_violations
    << " atomicity breaks, " << residual << " residual locks";
  return {ok, d.str()};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    Outcome out;
  };
  std::vector<Entry> entries;

  entries.push_back({1, "message-delay table", criterion_delay_table()});
  entries.push_back({2, "state-pair matrices", criterion_state_matrices()});
  Outcome safety, detection;
  criterion_sweep(safety, detection);
  entries.push_back({3, "safety sweep", safety});
  entries.push_back({4, "termination holes", criterion_liveness()});
  entries.push_back({5, "failure detection exactness", detection});
  entries.push_back({6, "adaptivity margins", criterion_adaptivity()});
  entries.push_back({7, "tuned downgrade thresholds", criterion_tuner()});
  entries.push_back({8, "bytewise determinism", criterion_determinism()});
  entries.push_back({9, "crash-recovery equivalence", criterion_recovery()});

  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.id < b.id; });
  bool all = true;
  for (const Entry& e : entries) {
    std::cout << "criterion " << e.id << " (" << e.name << "): "
              << (e.out.pass ? "PASS" : "FAIL") << " - " << e.out.detail << "\n";
    if (!e.out.pass) all = false;
  }
  std::cout << (all ? "ALL CRITERIA PASSED" : "CRITERIA FAILED") << "\n";
  return all ? 0 : 1;
}
