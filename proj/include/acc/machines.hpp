#pragma once

#include <optional>
#include <vector>

#include "acc/core.hpp"
#include "acc/delay.hpp"

namespace acc {

// Timer identifiers shared by all machines.
enum TimerId : int {
  kWindowTimer = 1,   // vote-collection window (W)
  kCrashTimer = 2,    // crash timeout while awaiting a decision
  kVoteTimer = 3,     // NF / 2PC coordinator vote collection
  kResendTimer = 4,   // 2PC decision re-broadcast until acked
};

struct ProtocolEvent {
  enum Kind { Start, Deliver, Timer } kind = Start;
  double now_ms = 0;  // local clock reading (skew applied by the harness)
  // Start
  TxnId txn = -1;
  std::vector<NodeId> ct;
  Protocol proto = Protocol::FF;
  TxnBody body;
  // Deliver
  Message msg;
  std::optional<Vote> local_vote;  // precomputed for Propose deliveries
  // Timer
  int timer_id = 0;
};

struct ProtocolAction {
  enum Kind {
    Send,
    SetTimer,
    AppendLog,
    DecideLocal,
    ReplyClient,
    EnterTermination,
    Fault,
  } kind = Send;
  Message msg;
  int timer_id = 0;
  double delay_ms = 0;
  LogEntry entry;
  Decision decision = Decision::Undecide;
  std::string fault;

  static ProtocolAction send(Message m) {
    ProtocolAction a;
    a.kind = Send;
    a.msg = std::move(m);
    return a;
  }
  static ProtocolAction timer(int id, double ms) {
    ProtocolAction a;
    a.kind = SetTimer;
    a.timer_id = id;
    a.delay_ms = ms;
    return a;
  }
  static ProtocolAction log(TxnId txn, LogKind k, std::optional<ProposePayload> body = {}) {
    ProtocolAction a;
    a.kind = AppendLog;
    a.entry.txn = txn;
    a.entry.kind = k;
    a.entry.body = std::move(body);
    return a;
  }
  static ProtocolAction decide(Decision d) {
    ProtocolAction a;
    a.kind = DecideLocal;
    a.decision = d;
    return a;
  }
  static ProtocolAction reply(Decision d) {
    ProtocolAction a;
    a.kind = ReplyClient;
    a.decision = d;
    return a;
  }
  static ProtocolAction termination() {
    ProtocolAction a;
    a.kind = EnterTermination;
    return a;
  }
  static ProtocolAction fault_action(std::string why) {
    ProtocolAction a;
    a.kind = Fault;
    a.fault = std::move(why);
    return a;
  }
};

using Actions = std::vector<ProtocolAction>;

struct ParticipantState {
  enum Phase { Idle, Voted, WindowOpen, TentativeCommit, AwaitDecision, Done };

  NodeId self = -1;
  NodeId cstar = -1;
  TxnId txn = -1;
  Protocol proto = Protocol::FF;
  std::vector<NodeId> ct;
  DelayMatrix delays;
  double crash_timeout_ms = 0;

  Phase phase = Idle;
  std::optional<Vote> vote;
  std::map<NodeId, Vote> received_votes;  // stashed even before Propose arrives
  std::optional<Decision> decision;
  std::optional<Decision> stashed_decision;  // decision that outran the Propose
  bool replied_undecide = false;
  bool forwarded_decision = false;
  TxnBody body;
  double propose_recv_ms = 0;
};

struct CoordinatorState {
  enum Phase { Idle, Collecting, Deciding, Done, Termination };

  NodeId self = -1;
  TxnId txn = -1;
  Protocol proto = Protocol::FF;
  std::set<NodeId> ct;
  DelayMatrix delays;
  double crash_timeout_ms = 0;

  Phase phase = Idle;
  ResultSet results;
  std::map<NodeId, Vote> votes;  // NF / 2PC vote collection
  std::set<NodeId> acks;         // 2PC
  std::optional<Decision> decision;
  TxnBody body;
  double propose_sent_ms = 0;
};

// Pure step functions: identical (state, event) -> identical (state', actions).
std::pair<ParticipantState, Actions> participant_step(ParticipantState s,
                                                      const ProtocolEvent& e);
std::pair<CoordinatorState, Actions> coordinator_step(CoordinatorState s,
                                                      const ProtocolEvent& e);

// Decision reached during the harness-driven termination procedure is fed back
// through this helper so the machine emits its normal logging/broadcast actions.
std::pair<ParticipantState, Actions> participant_adopt_decision(ParticipantState s,
                                                                Decision d);
std::pair<CoordinatorState, Actions> coordinator_adopt_decision(CoordinatorState s,
                                                                Decision d);

}  // namespace acc
