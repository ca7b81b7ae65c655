#include "acc/sim.hpp"

#include <fstream>

namespace acc {

void SimWorld::send(const Message& m, GlobalTrace& trace) {
  LinkCfg cfg;
  auto it = links_.find({m.from, m.to});
  if (it != links_.end()) cfg = it->second;
  double delay = cfg.base_ms;
  if (cfg.jitter_ms > 0) delay += uniform01() * cfg.jitter_ms;
  auto ex = extra_ms_.find(m.from);
  if (ex != extra_ms_.end()) delay += ex->second;
  ex = extra_ms_.find(m.to);
  if (ex != extra_ms_.end()) delay += ex->second;

  TraceRec r;
  r.type = TraceRec::Send;
  r.t = now_;
  r.node = m.from;
  r.peer = m.to;
  r.txn = m.txn;
  r.msg_kind = m.kind;
  trace.add(r);

  SimEvent ev;
  ev.kind = SimEvent::Deliver;
  ev.node = m.to;
  ev.msg = m;
  push(now_ + ms_to_us(delay), 1, std::move(ev));
}

void SimWorld::set_timer(NodeId node, TxnId txn, int timer_id, uint64_t epoch,
                         double delay_ms) {
  SimEvent ev;
  ev.kind = SimEvent::Timer;
  ev.node = node;
  ev.txn = txn;
  ev.timer_id = timer_id;
  ev.epoch = epoch;
  push(now_ + ms_to_us(delay_ms), 2, std::move(ev));
}

void SimWorld::schedule_control(SimTime t, SimEvent ev) { push(t, 0, std::move(ev)); }

void SimWorld::schedule_client(SimTime t, int client) {
  SimEvent ev;
  ev.kind = SimEvent::ClientWake;
  ev.client = client;
  push(t, 1, std::move(ev));
}

void SimWorld::schedule_callback(SimTime t, uint64_t id, NodeId node) {
  SimEvent ev;
  ev.kind = SimEvent::Callback;
  ev.callback_id = id;
  ev.node = node;
  push(t, 1, std::move(ev));
}

bool SimWorld::pop(SimEvent& out, SimTime horizon) {
  if (q_.empty() || q_.top().time > horizon) {
    now_ = std::max(now_, horizon);
    return false;
  }
  now_ = q_.top().time;
  out = q_.top().ev;
  q_.pop();
  return true;
}

std::vector<FailureInterval> FailureSchedule::expand(SimTime horizon) const {
  std::vector<FailureInterval> out;
  for (const auto& e : entries) {
    SimTime tau = ms_to_us(e.tau_ms);
    if (tau <= 0) continue;
    SimTime start = ms_to_us(e.start_ms);
    // With several entries the cycle advances over all of them in sequence
    // (composite schedules); a single entry simply repeats.
    for (int c = 0;; ++c) {
      if (e.cycles > 0 && c >= e.cycles) break;
      SimTime period = 0;
      for (const auto& other : entries) period += 2 * ms_to_us(other.tau_ms);
      SimTime offset = 0;
      for (const auto& other : entries) {
        if (&other == &e) break;
        offset += 2 * ms_to_us(other.tau_ms);
      }
      SimTime t0 = start + c * period + offset;
      if (t0 >= horizon) break;
      out.push_back({e.kind, e.target, t0, t0 + tau});
    }
  }
  return out;
}

void SimWorld::apply_failure_schedule(const FailureSchedule& fs, SimTime horizon) {
  for (const auto& iv : fs.expand(horizon)) {
    SimEvent on;
    on.node = iv.target;
    SimEvent off = on;
    if (iv.kind == FailureEntry::CrashFail) {
      on.kind = SimEvent::Crash;
      off.kind = SimEvent::Recover;
    } else {
      on.kind = SimEvent::DelayOn;
      off.kind = SimEvent::DelayOff;
      // extra delay recorded on the matching entry
      for (const auto& e : fs.entries)
        if (e.kind == iv.kind && e.target == iv.target) on.extra_ms = e.extra_ms;
    }
    schedule_control(iv.t0, on);
    schedule_control(iv.t1, off);
  }
}

Json GlobalTrace::to_json_line(const TraceRec& r) const {
  Json j;
  switch (r.type) {
    case TraceRec::Send:
      j = {{"type", "send"}, {"t", r.t}, {"node", r.node}, {"peer", r.peer},
           {"txn", r.txn}, {"kind", to_string(r.msg_kind)}};
      break;
    case TraceRec::Deliver:
      j = {{"type", "deliver"}, {"t", r.t}, {"node", r.node}, {"peer", r.peer},
           {"txn", r.txn}, {"kind", to_string(r.msg_kind)}};
      break;
    case TraceRec::VoteRec:
      j = {{"type", "vote"}, {"t", r.t}, {"node", r.node}, {"txn", r.txn},
           {"vote", to_string(r.vote)}};
      break;
    case TraceRec::LocalDecision:
      j = {{"type", "decision"}, {"t", r.t}, {"node", r.node}, {"txn", r.txn},
           {"decision", to_string(r.decision)}};
      break;
    case TraceRec::ClientReply:
      j = {{"type", "client_reply"}, {"t", r.t}, {"txn", r.txn},
           {"decision", to_string(r.decision)}, {"latency_ms", r.latency_ms},
           {"attempt", r.attempt}, {"outcome", r.detail}};
      break;
    case TraceRec::Crash:
      j = {{"type", "crash"}, {"t", r.t}, {"node", r.node}};
      break;
    case TraceRec::Recover:
      j = {{"type", "recover"}, {"t", r.t}, {"node", r.node}};
      break;
    case TraceRec::LevelChange:
      j = {{"type", "level_change"}, {"t", r.t}, {"node", r.node}, {"txn", r.txn},
           {"old", r.level_old}, {"new", r.level_new}, {"rule", r.rule}};
      break;
    case TraceRec::TimerFired:
      j = {{"type", "timer"}, {"t", r.t}, {"node", r.node}, {"txn", r.txn},
           {"timer", r.timer_id}};
      break;
    case TraceRec::TerminationEntered:
      j = {{"type", "termination"}, {"t", r.t}, {"node", r.node}, {"txn", r.txn}};
      break;
    case TraceRec::Fault:
      j = {{"type", "fault"}, {"t", r.t}, {"node", r.node}, {"txn", r.txn},
           {"detail", r.detail}};
      break;
  }
  return j;
}

void GlobalTrace::write_jsonl(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  for (const auto& r : recs) out << to_json_line(r).dump() << "\n";
}

namespace {

MsgKind msg_kind_from_string(const std::string& s) {
  for (int k = 0; k <= static_cast<int>(MsgKind::Ack); ++k)
    if (s == to_string(static_cast<MsgKind>(k))) return static_cast<MsgKind>(k);
  throw std::runtime_error("unknown message kind: " + s);
}

Vote vote_from_string(const std::string& s) {
  if (s == to_string(Vote::Yes)) return Vote::Yes;
  if (s == to_string(Vote::No)) return Vote::No;
  throw std::runtime_error("unknown vote: " + s);
}

Decision decision_from_string(const std::string& s) {
  for (Decision d : {Decision::Commit, Decision::Abort, Decision::Undecide})
    if (s == to_string(d)) return d;
  throw std::runtime_error("unknown decision: " + s);
}

}  // namespace

GlobalTrace trace_from_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  GlobalTrace trace;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": " +
                               e.what());
    }
    TraceRec r;
    std::string type = j.at("type");
    r.t = j.at("t").get<SimTime>();
    if (j.contains("node")) r.node = j["node"].get<NodeId>();
    if (j.contains("peer")) r.peer = j["peer"].get<NodeId>();
    if (j.contains("txn")) r.txn = j["txn"].get<TxnId>();
    if (type == "send" || type == "deliver") {
      r.type = type == "send" ? TraceRec::Send : TraceRec::Deliver;
      r.msg_kind = msg_kind_from_string(j.at("kind"));
    } else if (type == "vote") {
      r.type = TraceRec::VoteRec;
      r.vote = vote_from_string(j.at("vote"));
    } else if (type == "decision") {
      r.type = TraceRec::LocalDecision;
      r.decision = decision_from_string(j.at("decision"));
    } else if (type == "client_reply") {
      r.type = TraceRec::ClientReply;
      r.decision = decision_from_string(j.at("decision"));
      r.latency_ms = j.at("latency_ms").get<double>();
      r.attempt = j.at("attempt").get<int>();
      r.detail = j.at("outcome");
    } else if (type == "crash") {
      r.type = TraceRec::Crash;
    } else if (type == "recover") {
      r.type = TraceRec::Recover;
    } else if (type == "level_change") {
      r.type = TraceRec::LevelChange;
      r.level_old = j.at("old");
      r.level_new = j.at("new");
      r.rule = j.at("rule");
    } else if (type == "timer") {
      r.type = TraceRec::TimerFired;
      r.timer_id = j.at("timer").get<int>();
    } else if (type == "termination") {
      r.type = TraceRec::TerminationEntered;
    } else if (type == "fault") {
      r.type = TraceRec::Fault;
      r.detail = j.at("detail");
    } else {
      throw std::runtime_error("trace line " + std::to_string(lineno) +
                               ": unknown record type " + type);
    }
    trace.add(std::move(r));
  }
  return trace;
}

}  // namespace acc
