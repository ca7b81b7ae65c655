#include "acc/machines.hpp"

#include <algorithm>

namespace acc {

namespace {

Message make_msg(MsgKind k, TxnId txn, NodeId from, NodeId to) {
  Message m;
  m.kind = k;
  m.txn = txn;
  m.from = from;
  m.to = to;
  return m;
}

Message vote_msg(TxnId txn, NodeId from, NodeId to, Vote v) {
  Message m = make_msg(MsgKind::VoteMsg, txn, from, to);
  m.vote = v;
  m.voter = from;
  return m;
}

Message decision_msg(TxnId txn, NodeId from, NodeId to, Decision d) {
  Message m = make_msg(MsgKind::DecisionMsg, txn, from, to);
  m.decision = d;
  return m;
}

Message result_msg(TxnId txn, NodeId from, NodeId to, Vote v, Decision d) {
  Message m = make_msg(MsgKind::ResultReply, txn, from, to);
  m.result = ResultTuple{from, v, d};
  return m;
}

LogKind decision_log_kind(Decision d) {
  return d == Decision::Commit ? LogKind::CommitLog : LogKind::AbortLog;
}

LogKind transit_log_kind(Decision d) {
  return d == Decision::Commit ? LogKind::TransitCommit : LogKind::TransitAbort;
}

bool all_yes_from(const std::map<NodeId, Vote>& votes, const std::vector<NodeId>& ct) {
  for (NodeId n : ct) {
    auto it = votes.find(n);
    if (it == votes.end() || it->second != Vote::Yes) return false;
  }
  return true;
}

bool any_no(const std::map<NodeId, Vote>& votes) {
  return std::any_of(votes.begin(), votes.end(),
                     [](auto& kv) { return kv.second == Vote::No; });
}

}  // namespace

// ---------------------------------------------------------------- participant

static void broadcast_to_peers(const ParticipantState& s, Actions& out, Message proto_msg) {
  for (NodeId n : s.ct) {
    if (n == s.self) continue;
    Message m = proto_msg;
    m.to = n;
    out.push_back(ProtocolAction::send(std::move(m)));
  }
}

// Common tail: persist the decision and apply it locally.
static void finalize(ParticipantState& s, Actions& out, Decision d) {
  out.push_back(ProtocolAction::log(s.txn, decision_log_kind(d)));
  out.push_back(ProtocolAction::decide(d));
  s.decision = d;
  s.phase = ParticipantState::Done;
}

// Transmission-before-decide: CF and NF broadcast the decision before acting on it.
static void forward_then_finalize(ParticipantState& s, Actions& out, Decision d) {
  if ((s.proto == Protocol::CF || s.proto == Protocol::NF) && !s.forwarded_decision) {
    out.push_back(ProtocolAction::log(s.txn, transit_log_kind(d)));
    broadcast_to_peers(s, out, decision_msg(s.txn, s.self, -1, d));
    s.forwarded_decision = true;
  }
  finalize(s, out, d);
}

// Vote-collection outcome once a new vote (or the window timer) arrives.
static void evaluate_window(ParticipantState& s, Actions& out, bool at_expiry) {
  if (s.phase != ParticipantState::WindowOpen) return;
  bool saw_no = any_no(s.received_votes);
  bool all_yes = all_yes_from(s.received_votes, s.ct);
  if (saw_no || (at_expiry && !all_yes && s.proto == Protocol::CF)) {
    // A peer said No, or (CF only) the window closed with votes missing.
    if (s.proto == Protocol::CF) {
      out.push_back(ProtocolAction::log(s.txn, LogKind::TransitAbort));
      broadcast_to_peers(s, out, decision_msg(s.txn, s.self, -1, Decision::Abort));
      s.forwarded_decision = true;
    }
    out.push_back(ProtocolAction::send(
        result_msg(s.txn, s.self, s.cstar, Vote::Yes, Decision::Abort)));
    finalize(s, out, Decision::Abort);
    return;
  }
  if (all_yes) {
    if (s.proto == Protocol::FF) {
      out.push_back(ProtocolAction::send(
          result_msg(s.txn, s.self, s.cstar, Vote::Yes, Decision::Commit)));
      finalize(s, out, Decision::Commit);
    } else {  // CF: report undecided and wait for the coordinator's decision
      out.push_back(ProtocolAction::send(
          result_msg(s.txn, s.self, s.cstar, Vote::Yes, Decision::Undecide)));
      s.replied_undecide = true;
      s.phase = ParticipantState::AwaitDecision;
      out.push_back(ProtocolAction::timer(kCrashTimer, s.crash_timeout_ms));
    }
    return;
  }
  if (at_expiry) {  // FF: report undecided, wait for the coordinator
    out.push_back(ProtocolAction::send(
        result_msg(s.txn, s.self, s.cstar, Vote::Yes, Decision::Undecide)));
    s.replied_undecide = true;
    s.phase = ParticipantState::AwaitDecision;
    out.push_back(ProtocolAction::timer(kCrashTimer, s.crash_timeout_ms));
  }
}

static void handle_propose(ParticipantState& s, Actions& out, const ProtocolEvent& e) {
  if (s.phase != ParticipantState::Idle) return;  // duplicate Propose is idempotent
  const ProposePayload& p = *e.msg.propose;
  s.cstar = e.msg.from;
  s.txn = e.msg.txn;
  s.proto = p.protocol;
  s.ct = p.ct;
  s.body = p.body;
  s.propose_recv_ms = e.now_ms;
  out.push_back(ProtocolAction::log(s.txn, LogKind::ProposeLog, p));

  if (s.stashed_decision) {  // a decision overtook the Propose; adopt it
    s.phase = ParticipantState::AwaitDecision;
    forward_then_finalize(s, out, *s.stashed_decision);
    return;
  }

  s.vote = *e.local_vote;
  out.push_back(ProtocolAction::log(
      s.txn, s.vote == Vote::Yes ? LogKind::ReadyYes : LogKind::ReadyNo));

  switch (s.proto) {
    case Protocol::FF:
    case Protocol::CF: {
      broadcast_to_peers(s, out, vote_msg(s.txn, s.self, -1, *s.vote));
      if (s.vote == Vote::No) {
        if (s.proto == Protocol::CF) {
          out.push_back(ProtocolAction::log(s.txn, LogKind::TransitAbort));
          broadcast_to_peers(s, out, decision_msg(s.txn, s.self, -1, Decision::Abort));
          s.forwarded_decision = true;
        }
        out.push_back(ProtocolAction::send(
            result_msg(s.txn, s.self, s.cstar, Vote::No, Decision::Abort)));
        finalize(s, out, Decision::Abort);
        return;
      }
      s.received_votes[s.self] = Vote::Yes;
      double w = participant_window(s.self, p.t_sent_ms, e.now_ms, s.cstar,
                                    {s.ct.begin(), s.ct.end()}, s.delays);
      s.phase = ParticipantState::WindowOpen;
      evaluate_window(s, out, /*at_expiry=*/w <= 0);
      if (s.phase == ParticipantState::WindowOpen)
        out.push_back(ProtocolAction::timer(kWindowTimer, w));
      return;
    }
    case Protocol::NF:
    case Protocol::TwoPC: {
      out.push_back(ProtocolAction::send(vote_msg(s.txn, s.self, s.cstar, *s.vote)));
      if (s.proto == Protocol::TwoPC && s.vote == Vote::No) {
        finalize(s, out, Decision::Abort);  // presumed-nothing unilateral abort
        return;
      }
      s.phase = ParticipantState::AwaitDecision;
      out.push_back(ProtocolAction::timer(kCrashTimer, s.crash_timeout_ms));
      return;
    }
  }
}

std::pair<ParticipantState, Actions> participant_step(ParticipantState s,
                                                      const ProtocolEvent& e) {
  Actions out;
  switch (e.kind) {
    case ProtocolEvent::Start:
      break;  // participants are driven entirely by messages
    case ProtocolEvent::Deliver:
      switch (e.msg.kind) {
        case MsgKind::Propose:
          handle_propose(s, out, e);
          break;
        case MsgKind::VoteMsg:
          s.received_votes[e.msg.voter] = *e.msg.vote;
          evaluate_window(s, out, false);
          break;
        case MsgKind::DecisionMsg: {
          Decision d = *e.msg.decision;
          if (s.phase == ParticipantState::Done) {
            if (s.proto == Protocol::TwoPC)  // re-ack resent decisions
              out.push_back(ProtocolAction::send(
                  make_msg(MsgKind::Ack, s.txn, s.self, e.msg.from)));
            break;
          }
          if (s.phase == ParticipantState::Idle) {
            s.stashed_decision = d;
            break;
          }
          forward_then_finalize(s, out, d);
          if (s.proto == Protocol::TwoPC)
            out.push_back(ProtocolAction::send(
                make_msg(MsgKind::Ack, s.txn, s.self, e.msg.from)));
          break;
        }
        default:
          break;
      }
      break;
    case ProtocolEvent::Timer:
      if (e.timer_id == kWindowTimer && s.phase == ParticipantState::WindowOpen) {
        evaluate_window(s, out, true);
      } else if (e.timer_id == kCrashTimer &&
                 s.phase == ParticipantState::AwaitDecision) {
        out.push_back(ProtocolAction::termination());
      }
      break;
  }
  return {std::move(s), std::move(out)};
}

std::pair<ParticipantState, Actions> participant_adopt_decision(ParticipantState s,
                                                                Decision d) {
  Actions out;
  if (s.phase != ParticipantState::Done) forward_then_finalize(s, out, d);
  return {std::move(s), std::move(out)};
}

// --------------------------------------------------------------- coordinator

static void coord_broadcast(const CoordinatorState& s, Actions& out, Message proto_msg) {
  for (NodeId n : s.ct) {
    Message m = proto_msg;
    m.to = n;
    out.push_back(ProtocolAction::send(std::move(m)));
  }
}

// FF/CF decision: notify participants that have not themselves reached a
// decision, then persist, decide and answer the client.
static void coord_decide_ffcf(CoordinatorState& s, Actions& out, Decision d) {
  if (s.proto == Protocol::CF)
    out.push_back(ProtocolAction::log(s.txn, transit_log_kind(d)));
  for (NodeId n : s.ct) {
    auto it = s.results.entries.find(n);
    if (it == s.results.entries.end() || it->second.decision == Decision::Undecide)
      out.push_back(ProtocolAction::send(decision_msg(s.txn, s.self, n, d)));
  }
  out.push_back(ProtocolAction::log(s.txn, decision_log_kind(d)));
  out.push_back(ProtocolAction::decide(d));
  out.push_back(ProtocolAction::reply(d));
  s.decision = d;
  s.phase = CoordinatorState::Done;
}

static void coord_evaluate_ffcf(CoordinatorState& s, Actions& out, bool at_expiry) {
  bool has_abort = s.results.contains_decision(Decision::Abort);
  bool has_commit = s.results.contains_decision(Decision::Commit);
  if (has_abort && has_commit) {
    out.push_back(ProtocolAction::fault_action("contradictory decisions in result set"));
    return;
  }
  bool complete = s.results.complete();
  // Mid-window the coordinator acts only on a complete result set; at window
  // expiry (or during termination) any explicit decision suffices.
  if (at_expiry || s.phase == CoordinatorState::Termination) {
    if (has_abort) return coord_decide_ffcf(s, out, Decision::Abort);
    if (has_commit) return coord_decide_ffcf(s, out, Decision::Commit);
    if (complete) return coord_decide_ffcf(s, out, Decision::Commit);
    if (!at_expiry) return;
    if (s.proto == Protocol::CF) return coord_decide_ffcf(s, out, Decision::Abort);
    s.phase = CoordinatorState::Termination;
    out.push_back(ProtocolAction::termination());
    return;
  }
  if (complete) {
    if (has_abort) return coord_decide_ffcf(s, out, Decision::Abort);
    if (has_commit) return coord_decide_ffcf(s, out, Decision::Commit);
    coord_decide_ffcf(s, out, Decision::Commit);
  }
}

// NF transmits the decision before persisting it; 2PC logs first and then
// waits for acknowledgements before answering the client.
static void coord_decide_nf2pc(CoordinatorState& s, Actions& out, Decision d) {
  s.decision = d;
  if (s.proto == Protocol::NF) {
    out.push_back(ProtocolAction::log(s.txn, transit_log_kind(d)));
    coord_broadcast(s, out, decision_msg(s.txn, s.self, -1, d));
    out.push_back(ProtocolAction::log(s.txn, decision_log_kind(d)));
    out.push_back(ProtocolAction::decide(d));
    out.push_back(ProtocolAction::reply(d));
    s.phase = CoordinatorState::Done;
  } else {
    out.push_back(ProtocolAction::log(s.txn, decision_log_kind(d)));
    out.push_back(ProtocolAction::decide(d));
    coord_broadcast(s, out, decision_msg(s.txn, s.self, -1, d));
    s.phase = CoordinatorState::Deciding;
    out.push_back(ProtocolAction::timer(kResendTimer, s.crash_timeout_ms));
  }
}

static void handle_coord_start(CoordinatorState& s, Actions& out, const ProtocolEvent& e) {
  s.txn = e.txn;
  s.proto = e.proto;
  s.ct = {e.ct.begin(), e.ct.end()};
  s.body = e.body;
  s.results.txn = e.txn;
  s.results.expected = s.ct;
  s.propose_sent_ms = e.now_ms;
  if (s.ct.empty()) {  // nobody to consult: trivially committed
    out.push_back(ProtocolAction::log(s.txn, LogKind::CommitLog));
    out.push_back(ProtocolAction::decide(Decision::Commit));
    out.push_back(ProtocolAction::reply(Decision::Commit));
    s.decision = Decision::Commit;
    s.phase = CoordinatorState::Done;
    return;
  }
  ProposePayload p;
  p.body = e.body;
  p.t_sent_ms = e.now_ms;
  p.ct = e.ct;
  p.protocol = e.proto;
  out.push_back(ProtocolAction::log(s.txn, LogKind::ProposeLog, p));
  Message propose = make_msg(MsgKind::Propose, s.txn, s.self, -1);
  propose.propose = p;
  coord_broadcast(s, out, propose);
  s.phase = CoordinatorState::Collecting;
  if (s.proto == Protocol::FF || s.proto == Protocol::CF) {
    out.push_back(
        ProtocolAction::timer(kWindowTimer, coordinator_window(s.self, s.ct, s.delays)));
  } else {
    double w = 0;
    for (NodeId n : s.ct) w = std::max(w, 2 * delay_upper_bound(s.self, n, s.delays));
    out.push_back(ProtocolAction::timer(kVoteTimer, w));
  }
}

std::pair<CoordinatorState, Actions> coordinator_step(CoordinatorState s,
                                                      const ProtocolEvent& e) {
  Actions out;
  switch (e.kind) {
    case ProtocolEvent::Start:
      handle_coord_start(s, out, e);
      break;
    case ProtocolEvent::Deliver:
      switch (e.msg.kind) {
        case MsgKind::ResultReply: {
          if (s.phase != CoordinatorState::Collecting &&
              s.phase != CoordinatorState::Termination)
            break;
          const ResultTuple& r = *e.msg.result;
          if (!classify_result(r.vote, r.decision)) {
            out.push_back(ProtocolAction::fault_action("invalid result tuple"));
            break;
          }
          s.results.entries.emplace(r.node, r);
          coord_evaluate_ffcf(s, out, false);
          break;
        }
        case MsgKind::VoteMsg: {
          if (s.phase != CoordinatorState::Collecting) break;
          s.votes[e.msg.voter] = *e.msg.vote;
          if (s.votes.size() >= s.ct.size()) {
            bool yes = all_yes_from(s.votes, {s.ct.begin(), s.ct.end()});
            coord_decide_nf2pc(s, out, yes ? Decision::Commit : Decision::Abort);
          }
          break;
        }
        case MsgKind::Ack: {
          if (s.phase != CoordinatorState::Deciding) break;
          s.acks.insert(e.msg.from);
          bool all = std::all_of(s.ct.begin(), s.ct.end(),
                                 [&](NodeId n) { return s.acks.count(n) > 0; });
          if (all) {
            out.push_back(ProtocolAction::reply(*s.decision));
            s.phase = CoordinatorState::Done;
          }
          break;
        }
        default:
          break;
      }
      break;
    case ProtocolEvent::Timer:
      if (e.timer_id == kWindowTimer && s.phase == CoordinatorState::Collecting) {
        coord_evaluate_ffcf(s, out, true);
      } else if (e.timer_id == kVoteTimer && s.phase == CoordinatorState::Collecting) {
        coord_decide_nf2pc(s, out, Decision::Abort);
      } else if (e.timer_id == kResendTimer && s.phase == CoordinatorState::Deciding) {
        for (NodeId n : s.ct)
          if (!s.acks.count(n))
            out.push_back(ProtocolAction::send(decision_msg(s.txn, s.self, n, *s.decision)));
        out.push_back(ProtocolAction::timer(kResendTimer, s.crash_timeout_ms));
      }
      break;
  }
  return {std::move(s), std::move(out)};
}

std::pair<CoordinatorState, Actions> coordinator_adopt_decision(CoordinatorState s,
                                                                Decision d) {
  Actions out;
  if (s.phase != CoordinatorState::Done) coord_decide_ffcf(s, out, d);
  return {std::move(s), std::move(out)};
}

}  // namespace acc
