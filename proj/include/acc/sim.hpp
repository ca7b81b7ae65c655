#pragma once

#include <cstdint>
#include <map>
#include <queue>
#include <random>
#include <vector>

#include "acc/core.hpp"

namespace acc {

struct LinkCfg {
  double base_ms = 0;
  double jitter_ms = 0;
};

struct SimEvent {
  enum Kind {
    Crash,
    Recover,
    DelayOn,
    DelayOff,
    Deliver,
    Timer,
    ClientWake,
    Callback,
  } kind = Deliver;
  NodeId node = -1;
  Message msg;
  double extra_ms = 0;      // DelayOn
  TxnId txn = -1;           // Timer
  int timer_id = 0;         // Timer
  uint64_t epoch = 0;       // Timer: dropped if the node crashed since arming
  int client = -1;          // ClientWake
  uint64_t callback_id = 0; // Callback: runtime-owned continuation
};

// Trace record types; the safety oracle and the delay counter consume these.
struct TraceRec {
  enum Type {
    Send,
    Deliver,
    VoteRec,
    LocalDecision,
    ClientReply,
    Crash,
    Recover,
    LevelChange,
    TimerFired,
    TerminationEntered,
    Fault,
  } type = Send;
  SimTime t = 0;
  NodeId node = -1;
  NodeId peer = -1;
  TxnId txn = -1;
  MsgKind msg_kind = MsgKind::Propose;
  Vote vote = Vote::Yes;
  Decision decision = Decision::Undecide;
  Protocol protocol = Protocol::FF;
  int timer_id = 0;
  double latency_ms = 0;       // ClientReply
  int attempt = 0;             // ClientReply
  std::string level_old, level_new, rule;  // LevelChange
  std::string detail;          // Fault / ClientReply outcome
};

struct GlobalTrace {
  std::vector<TraceRec> recs;
  void add(TraceRec r) { recs.push_back(std::move(r)); }
  Json to_json_line(const TraceRec& r) const;
  void write_jsonl(const std::string& path) const;
};

// Inverse of write_jsonl; throws std::runtime_error on malformed input.
GlobalTrace trace_from_jsonl(const std::string& path);

// Failure injection: within each cycle of 2*tau, the failure is active for the
// first tau and absent for the second tau.
struct FailureEntry {
  enum Kind { CrashFail, DelayFail } kind = CrashFail;
  NodeId target = -1;
  double tau_ms = 0;
  double extra_ms = 0;  // DelayFail only
  double start_ms = 0;
  int cycles = 0;       // 0 = repeat until horizon
};

struct FailureInterval {
  FailureEntry::Kind kind;
  NodeId target;
  SimTime t0, t1;
};

struct FailureSchedule {
  std::vector<FailureEntry> entries;
  std::vector<FailureInterval> expand(SimTime horizon) const;
};

class SimWorld {
 public:
  SimWorld(uint64_t seed, int node_count) : rng_(seed) {
    for (NodeId n = 0; n < node_count; ++n) alive_[n] = true;
  }

  SimTime now() const { return now_; }
  double local_clock_ms(NodeId n) const {
    auto it = skew_ms_.find(n);
    return us_to_ms(now_) + (it == skew_ms_.end() ? 0.0 : it->second);
  }

  void set_link(NodeId a, NodeId b, LinkCfg cfg) {
    links_[{a, b}] = cfg;
    links_[{b, a}] = cfg;
  }
  void set_skew(NodeId n, double ms) { skew_ms_[n] = ms; }

  bool alive(NodeId n) const { return alive_.at(n); }
  void set_alive(NodeId n, bool v) { alive_[n] = v; }
  void set_extra_delay(NodeId n, double ms) { extra_ms_[n] = ms; }

  // Never drops; crashed receivers are filtered at delivery time.
  void send(const Message& m, GlobalTrace& trace);

  void set_timer(NodeId node, TxnId txn, int timer_id, uint64_t epoch, double delay_ms);
  void schedule_control(SimTime t, SimEvent ev);          // class 0
  void schedule_client(SimTime t, int client);            // class 1 (like a delivery)
  void schedule_callback(SimTime t, uint64_t id, NodeId node);  // class 1

  void apply_failure_schedule(const FailureSchedule& fs, SimTime horizon);

  // Pops the next event with time <= horizon; advances the clock. Returns false
  // when the queue is exhausted up to the horizon.
  bool pop(SimEvent& out, SimTime horizon);

  bool empty_before(SimTime horizon) const {
    return q_.empty() || q_.top().time > horizon;
  }

 private:
  struct Ordered {
    SimTime time;
    int cls;
    uint64_t seq;
    SimEvent ev;
    bool operator>(const Ordered& o) const {
      if (time != o.time) return time > o.time;
      if (cls != o.cls) return cls > o.cls;
      return seq > o.seq;
    }
  };

  void push(SimTime t, int cls, SimEvent ev) {
    q_.push(Ordered{t, cls, next_seq_++, std::move(ev)});
  }

  double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  SimTime now_ = 0;
  uint64_t next_seq_ = 0;
  std::priority_queue<Ordered, std::vector<Ordered>, std::greater<>> q_;
  std::mt19937_64 rng_;
  std::map<std::pair<NodeId, NodeId>, LinkCfg> links_;
  std::map<NodeId, bool> alive_;
  std::map<NodeId, double> skew_ms_;
  std::map<NodeId, double> extra_ms_;
};

}  // namespace acc
