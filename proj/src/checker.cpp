#include "acc/checker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acc {

namespace {

struct TxnFacts {
  SimTime propose_send = -1;
  SimTime first_decision = -1;
  SimTime last_decision = -1;
  bool has_commit = false;
  bool has_abort = false;
  bool voted_no = false;
  bool replied = false;
  Decision reply_decision = Decision::Undecide;
  bool timer_in_span = false;
  std::vector<std::pair<SimTime, int>> timer_fires;
};

}  // namespace

SafetyVerdict check_safety(const GlobalTrace& trace, const Scenario& sc) {
  std::map<TxnId, TxnFacts> facts;
  for (const auto& r : trace.recs) {
    switch (r.type) {
      case TraceRec::Send:
        if (r.msg_kind == MsgKind::Propose && r.node == sc.coordinator()) {
          auto& f = facts[r.txn];
          if (f.propose_send < 0) f.propose_send = r.t;
        }
        break;
      case TraceRec::VoteRec:
        if (r.vote == Vote::No) facts[r.txn].voted_no = true;
        break;
      case TraceRec::LocalDecision: {
        auto& f = facts[r.txn];
        if (f.first_decision < 0) f.first_decision = r.t;
        f.last_decision = std::max(f.last_decision, r.t);
        if (r.decision == Decision::Commit) f.has_commit = true;
        if (r.decision == Decision::Abort) f.has_abort = true;
        break;
      }
      case TraceRec::ClientReply: {
        auto& f = facts[r.txn];
        f.replied = true;
        f.reply_decision = r.decision;
        break;
      }
      case TraceRec::TimerFired:
        facts[r.txn].timer_fires.push_back({r.t, r.timer_id});
        break;
      default:
        break;
    }
  }

  auto intervals = sc.failures.expand(ms_to_us(sc.horizon_ms));
  auto failure_overlaps = [&](SimTime a, SimTime b) {
    for (const auto& iv : intervals)
      if (iv.t0 < b && a < iv.t1 + ms_to_us(sc.effective_crash_timeout())) return true;
    return false;
  };

  SafetyVerdict v;
  auto note = [&](const std::string& s) {
    if (v.details.size() < 20) v.details.push_back(s);
  };

  for (auto& [txn, f] : facts) {
    if (f.propose_send < 0) continue;  // stray records only
    v.txns++;

    if (f.has_commit && f.has_abort) {
      v.agreement_violations++;
      note("txn " + std::to_string(txn) + ": nodes decided both commit and abort");
    }
    if (f.has_commit && f.voted_no) {
      v.validity_violations++;
      note("txn " + std::to_string(txn) + ": committed despite an explicit No vote");
    }

    bool aborted = f.has_abort || (f.replied && f.reply_decision == Decision::Abort);
    if (aborted && !f.has_commit) {
      SimTime span_end = f.last_decision >= 0 ? f.last_decision : f.propose_send;
      bool timer = false;
      for (auto& [t, id] : f.timer_fires)
        if (t >= f.propose_send && t <= span_end) timer = true;
      bool excused = f.voted_no || timer || failure_overlaps(f.propose_send, span_end);
      if (!excused) {
        v.unexcused_aborts++;
        note("txn " + std::to_string(txn) +
             ": aborted with no No vote, no timeout, no overlapping failure");
      }
    }

    if (!f.replied) {
      v.unterminated++;
      note("txn " + std::to_string(txn) + ": no client reply by end of trace");
    }
  }
  return v;
}

Json SafetyVerdict::to_json() const {
  return Json{{"txns", txns},
              {"agreement_violations", agreement_violations},
              {"validity_violations", validity_violations},
              {"unexcused_aborts", unexcused_aborts},
              {"unterminated", unterminated},
              {"safety_ok", safety_ok()},
              {"liveness_ok", liveness_ok()},
              {"ok", ok()},
              {"details", details}};
}

DelayCount count_message_delays(const GlobalTrace& trace, double d_ms, TxnId txn) {
  if (d_ms <= 0) throw std::runtime_error("delay counting needs a positive link delay");
  if (txn < 0) {
    for (const auto& r : trace.recs)
      if (r.type == TraceRec::Send && r.msg_kind == MsgKind::Propose) {
        txn = r.txn;
        break;
      }
  }
  if (txn < 0) throw std::runtime_error("no transaction found in trace");

  SimTime propose_send = -1;
  std::map<NodeId, SimTime> propose_recv;
  std::map<NodeId, SimTime> decision_at;
  SimTime reply_t = -1;
  NodeId coord = -1;
  for (const auto& r : trace.recs) {
    if (r.txn != txn) continue;
    switch (r.type) {
      case TraceRec::Send:
        if (r.msg_kind == MsgKind::Propose && propose_send < 0) {
          propose_send = r.t;
          coord = r.node;
        }
        break;
      case TraceRec::Deliver:
        if (r.msg_kind == MsgKind::Propose && !propose_recv.count(r.node))
          propose_recv[r.node] = r.t;
        break;
      case TraceRec::LocalDecision:
        if (!decision_at.count(r.node)) decision_at[r.node] = r.t;
        break;
      case TraceRec::ClientReply:
        if (reply_t < 0) reply_t = r.t;
        break;
      default:
        break;
    }
  }
  if (propose_send < 0) throw std::runtime_error("transaction has no propose record");

  SimTime d_us = ms_to_us(d_ms);
  DelayCount out;
  auto as_count = [&](SimTime span) {
    double c = static_cast<double>(span) / static_cast<double>(d_us);
    if (std::fabs(c - std::round(c)) > 1e-6) out.integral = false;
    return c;
  };
  if (reply_t >= 0) out.coordinator = as_count(reply_t - propose_send);
  for (auto& [n, t] : decision_at) {
    if (n == coord) continue;
    auto it = propose_recv.find(n);
    if (it == propose_recv.end()) continue;
    out.participant[n] = as_count(t - it->second);
  }
  return out;
}

}  // namespace acc
