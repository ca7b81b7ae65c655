#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "acc/core.hpp"
#include "acc/delay.hpp"
#include "acc/machines.hpp"
#include "acc/levels.hpp"
#include "acc/scenario.hpp"
#include "acc/sim.hpp"
#include "acc/store.hpp"
#include "acc/tuner.hpp"

namespace acc {

// Log-query session used both by recovered nodes and by live nodes whose
// crash timeout expired while they were waiting for a decision.
struct RecoverySession {
  TxnId txn = -1;
  bool coord_role = false;
  std::set<NodeId> targets;
  std::map<NodeId, LogReplyPayload> replies;
  double backoff_ms = 0;
};

struct NodeRt {
  uint64_t epoch = 0;  // bumped on crash; invalidates stale timers
  std::vector<LogEntry> log;
  uint64_t log_seq = 0;
  Shard shard;
  // Everything below is volatile: wiped on crash.
  std::map<TxnId, ParticipantState> pstates;
  std::map<TxnId, CoordinatorState> cstates;
  std::map<TxnId, RecoverySession> sessions;
};

// Coordinator-side bookkeeping for one issued transaction (kept outside the
// node's volatile state: it models the client plus the audit instrumentation).
struct TxnRt {
  int client = -1;
  int attempt = 0;
  SimTime issue_t = 0;
  SimTime propose_t = 0;
  TxnBody body;
  Protocol proto = Protocol::FF;
  std::vector<NodeId> ct;
  bool replied = false;
  bool saw_no = false;          // an explicit No vote was observed
  bool failure_shaped = false;  // aborted without any explicit No
  bool detection_done = false;
  bool run_recorded = false;
  std::optional<Decision> final_decision;
  std::map<NodeId, ResultTuple> results;  // first reply per node
  std::map<NodeId, SimTime> recv_time;
  std::set<NodeId> event_nodes;  // nodes blamed by failure detection
};

struct ClientRt {
  int attempt = 0;
  TxnBody body;
};

// Drives one seeded simulation: clients, protocol machines, failure injection,
// detection/level management, crash recovery and the trace/metrics outputs.
class Runtime {
 public:
  explicit Runtime(Scenario sc, TunerDriver* driver = nullptr);

  void run();

  const Scenario& scenario() const { return sc_; }
  const GlobalTrace& trace() const { return trace_; }
  GlobalTrace& trace() { return trace_; }
  Metrics metrics() const { return collect_metrics(trace_, 0, horizon_us_); }
  Json summary() const;

  const NodeRt& node(NodeId n) const { return nodes_.at(n); }
  const std::map<TxnId, TxnRt>& txns() const { return txns_; }
  Level level(NodeId n) const { return levels_.at(n).level; }
  int residual_locks() const;
  SimTime end_time() const { return end_us_; }
  double crash_timeout_ms() const { return tc_ms_; }

 private:
  struct LogView {
    LogReplyPayload reply;
    const ProposePayload* propose = nullptr;
  };

  void dispatch(const SimEvent& ev);
  void issue_txn(int client);
  void handle_deliver(const SimEvent& ev);
  void handle_coord_deliver(const Message& m);
  void handle_part_deliver(NodeId n, const Message& m);
  void handle_timer(const SimEvent& ev);
  void handle_crash(NodeId n);
  void handle_recover(NodeId n);
  void recover_node(NodeId n);

  void apply_actions(NodeId node, TxnId txn, const Actions& acts, const TxnBody* body);
  void handle_termination(NodeId node, TxnId txn);
  void reply_client(TxnId txn, Decision d);

  Vote compute_vote(NodeId n, TxnId txn, const TxnBody& body);
  LogView scan_log(NodeId n, TxnId txn) const;

  void start_participant_session(NodeId n, TxnId txn);
  void start_coord_session(TxnId txn);
  void send_session_queries(NodeId n, TxnId txn);
  void schedule_session_retry(NodeId n, TxnId txn);
  void evaluate_session(NodeId n, TxnId txn);
  void adopt_participant(NodeId n, TxnId txn, Decision d);
  void adopt_coordinator(TxnId txn, Decision d);

  void finalize_detection(TxnId txn);
  void maybe_record_run(TxnId txn);
  void apply_level_event(NodeId n, TxnId txn, const LevelEvent& ev, const std::string& rule);
  void apply_run(NodeId n, TxnId txn, bool clean);
  bool window_complete(const TxnRt& tr) const;
  Level max_level() const;

  uint64_t schedule_cb(SimTime t, NodeId node, std::function<void()> fn);
  void forge_violation();

  Scenario sc_;
  TunerDriver* driver_ = nullptr;
  DelayMatrix dm_;
  double tc_ms_ = 0;
  SimTime horizon_us_ = 0;
  SimTime end_us_ = 0;
  SimWorld world_;
  GlobalTrace trace_;
  std::map<NodeId, NodeRt> nodes_;
  std::map<NodeId, LevelMachine> levels_;  // shards only
  std::map<TxnId, TxnRt> txns_;
  std::vector<ClientRt> clients_;
  TxnId next_txn_ = 1;
  int64_t issued_ = 0;
  ZipfGen zipf_;
  std::mt19937_64 wl_rng_;
  RewardCollector reward_;
  std::map<uint64_t, std::function<void()>> callbacks_;
  uint64_t next_cb_ = 1;
  std::optional<Protocol> static_proto_;
};

}  // namespace acc
