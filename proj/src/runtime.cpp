#include "acc/runtime.hpp"

#include <algorithm>

namespace acc {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Message simple_msg(MsgKind k, TxnId txn, NodeId from, NodeId to) {
  Message m;
  m.kind = k;
  m.txn = txn;
  m.from = from;
  m.to = to;
  return m;
}

}  // namespace

Runtime::Runtime(Scenario sc, TunerDriver* driver)
    : sc_(std::move(sc)),
      driver_(driver),
      world_(sc_.seed, sc_.node_count()),
      wl_rng_(sc_.seed ^ 0x9e3779b97f4a7c15ULL),
      reward_(32) {
  sc_.validate();
  dm_ = sc_.delay_matrix();
  tc_ms_ = sc_.effective_crash_timeout();
  horizon_us_ = ms_to_us(sc_.horizon_ms);
  end_us_ = horizon_us_ + 2 * ms_to_us(tc_ms_);
  for (NodeId n = 0; n < sc_.node_count(); ++n) {
    nodes_[n].shard.node = n;
    if (n > 0) levels_[n] = LevelMachine{n, Level::FF, 0, sc_.alpha_cf, sc_.alpha_nf};
  }
  for (NodeId a = 0; a < sc_.node_count(); ++a)
    for (NodeId b = a + 1; b < sc_.node_count(); ++b)
      world_.set_link(a, b, LinkCfg{sc_.link_base_ms, sc_.link_jitter_ms});
  for (auto& [n, s] : sc_.clock_skew_ms) world_.set_skew(n, s);
  zipf_ = ZipfGen(sc_.workload.key_space, sc_.workload.skew);
  clients_.resize(static_cast<size_t>(sc_.workload.clients));
  if (sc_.protocol != "auto") static_proto_ = protocol_from_string(sc_.protocol);
}

void Runtime::run() {
  world_.apply_failure_schedule(sc_.failures, horizon_us_);
  for (int c = 0; c < static_cast<int>(clients_.size()); ++c) world_.schedule_client(0, c);
  SimEvent ev;
  while (world_.pop(ev, end_us_)) dispatch(ev);
  if (sc_.forge_decision) forge_violation();
}

void Runtime::dispatch(const SimEvent& ev) {
  switch (ev.kind) {
    case SimEvent::Crash:
      handle_crash(ev.node);
      break;
    case SimEvent::Recover:
      handle_recover(ev.node);
      break;
    case SimEvent::DelayOn:
      world_.set_extra_delay(ev.node, ev.extra_ms);
      break;
    case SimEvent::DelayOff:
      world_.set_extra_delay(ev.node, 0);
      break;
    case SimEvent::Deliver:
      handle_deliver(ev);
      break;
    case SimEvent::Timer:
      handle_timer(ev);
      break;
    case SimEvent::ClientWake:
      issue_txn(ev.client);
      break;
    case SimEvent::Callback: {
      auto it = callbacks_.find(ev.callback_id);
      if (it != callbacks_.end()) {
        auto fn = std::move(it->second);
        callbacks_.erase(it);
        fn();
      }
      break;
    }
  }
}

// ------------------------------------------------------------------- clients

void Runtime::issue_txn(int client) {
  if (world_.now() >= horizon_us_) return;
  if (sc_.txn_limit > 0 && issued_ >= sc_.txn_limit) return;
  if (!world_.alive(sc_.coordinator())) {
    world_.schedule_client(world_.now() + ms_to_us(sc_.link_base_ms), client);
    return;
  }
  ClientRt& cl = clients_[static_cast<size_t>(client)];
  if (cl.attempt == 0)
    cl.body = generate_txn(sc_.workload, sc_.shard_nodes(), zipf_, wl_rng_);

  TxnId id = next_txn_++;
  issued_++;
  std::vector<NodeId> ct;
  for (auto& [n, keys] : cl.body.writes) ct.push_back(n);

  Protocol proto;
  if (static_proto_) {
    proto = *static_proto_;
  } else {
    std::map<NodeId, Level> levels;
    for (NodeId n : ct) levels[n] = levels_.at(n).level;
    proto = select_protocol({ct.begin(), ct.end()}, levels);
  }

  TxnRt tr;
  tr.client = client;
  tr.attempt = cl.attempt;
  tr.issue_t = world_.now();
  tr.propose_t = world_.now();
  tr.body = cl.body;
  tr.proto = proto;
  tr.ct = ct;
  txns_[id] = std::move(tr);

  CoordinatorState cs;
  cs.self = sc_.coordinator();
  cs.delays = dm_;
  cs.crash_timeout_ms = tc_ms_;
  auto [it, inserted] = nodes_[sc_.coordinator()].cstates.emplace(id, std::move(cs));

  ProtocolEvent e;
  e.kind = ProtocolEvent::Start;
  e.now_ms = world_.local_clock_ms(sc_.coordinator());
  e.txn = id;
  e.ct = ct;
  e.proto = proto;
  e.body = cl.body;
  auto [ns, acts] = coordinator_step(it->second, e);
  it->second = std::move(ns);
  apply_actions(sc_.coordinator(), id, acts, &it->second.body);

  // Late/silent classification needs the full crash-timeout span, so the
  // detection verdict for incomplete result sets is deferred until then.
  if ((proto == Protocol::FF || proto == Protocol::CF) && !ct.empty()) {
    schedule_cb(world_.now() + ms_to_us(tc_ms_), sc_.coordinator(), [this, id] {
      finalize_detection(id);
      maybe_record_run(id);
    });
  }
}

// ------------------------------------------------------------------ delivery

void Runtime::handle_deliver(const SimEvent& ev) {
  NodeId n = ev.node;
  if (!world_.alive(n)) return;  // crashed receivers drop everything
  const Message& m = ev.msg;

  TraceRec rec;
  rec.type = TraceRec::Deliver;
  rec.t = world_.now();
  rec.node = n;
  rec.peer = m.from;
  rec.txn = m.txn;
  rec.msg_kind = m.kind;
  trace_.add(rec);

  if (m.kind == MsgKind::LogQuery) {
    Message reply = simple_msg(MsgKind::LogReply, m.txn, n, m.from);
    reply.log_reply = scan_log(n, m.txn).reply;
    world_.send(reply, trace_);
    return;
  }
  if (m.kind == MsgKind::LogReply) {
    auto& nr = nodes_[n];
    auto sit = nr.sessions.find(m.txn);
    if (sit == nr.sessions.end()) return;
    sit->second.replies[m.from] = *m.log_reply;
    evaluate_session(n, m.txn);
    return;
  }

  if (n == sc_.coordinator())
    handle_coord_deliver(m);
  else
    handle_part_deliver(n, m);
}

void Runtime::handle_coord_deliver(const Message& m) {
  auto tit = txns_.find(m.txn);
  if (tit != txns_.end()) {
    TxnRt& tr = tit->second;
    if (m.kind == MsgKind::ResultReply) {
      const ResultTuple& r = *m.result;
      if (!tr.recv_time.count(r.node)) tr.recv_time[r.node] = world_.now();
      tr.results.emplace(r.node, r);
      if (r.vote == Vote::No) tr.saw_no = true;
    } else if (m.kind == MsgKind::VoteMsg && m.vote && *m.vote == Vote::No) {
      tr.saw_no = true;
    }
  }

  auto& nr = nodes_[sc_.coordinator()];
  auto it = nr.cstates.find(m.txn);
  if (it == nr.cstates.end()) return;
  ProtocolEvent e;
  e.kind = ProtocolEvent::Deliver;
  e.now_ms = world_.local_clock_ms(sc_.coordinator());
  e.msg = m;
  auto [ns, acts] = coordinator_step(it->second, e);
  it->second = std::move(ns);
  apply_actions(sc_.coordinator(), m.txn, acts, &it->second.body);
}

void Runtime::handle_part_deliver(NodeId n, const Message& m) {
  auto& nr = nodes_[n];
  auto it = nr.pstates.find(m.txn);
  if (it == nr.pstates.end()) {
    if (m.kind == MsgKind::DecisionMsg) {
      // No volatile state for the txn: either this node never saw the Propose
      // (it was down) or it finished before crashing. Either way the sender
      // only needs an Ack to stop re-transmitting.
      world_.send(simple_msg(MsgKind::Ack, m.txn, n, m.from), trace_);
      return;
    }
    if (m.kind != MsgKind::Propose && m.kind != MsgKind::VoteMsg) return;
    ParticipantState ps;
    ps.self = n;
    ps.delays = dm_;
    ps.crash_timeout_ms = tc_ms_;
    it = nr.pstates.emplace(m.txn, std::move(ps)).first;
  }

  ParticipantState& ps = it->second;
  ProtocolEvent e;
  e.kind = ProtocolEvent::Deliver;
  e.now_ms = world_.local_clock_ms(n);
  e.msg = m;
  if (m.kind == MsgKind::Propose && ps.phase == ParticipantState::Idle &&
      !ps.stashed_decision)
    e.local_vote = compute_vote(n, m.txn, m.propose->body);
  auto [ns, acts] = participant_step(ps, e);
  ps = std::move(ns);
  apply_actions(n, m.txn, acts, &ps.body);
}

Vote Runtime::compute_vote(NodeId n, TxnId txn, const TxnBody& body) {
  Vote v = Vote::Yes;
  if (sc_.forced_no_nodes.count(n)) {
    v = Vote::No;
  } else if (sc_.workload.forced_no_rate > 0 &&
             static_cast<double>(splitmix64(sc_.seed ^ (static_cast<uint64_t>(txn) *
                                                        0x100000001b3ULL) ^
                                            static_cast<uint64_t>(n)) >>
                                 11) *
                     0x1.0p-53 <
                 sc_.workload.forced_no_rate) {
    v = Vote::No;
  } else {
    auto wit = body.writes.find(n);
    const std::vector<int64_t>& keys = wit->second;
    Shard& sh = nodes_[n].shard;
    if (sh.can_lock_all(txn, keys)) {
      sh.lock_all(txn, keys);
    } else {
      v = Vote::No;
    }
  }
  TraceRec rec;
  rec.type = TraceRec::VoteRec;
  rec.t = world_.now();
  rec.node = n;
  rec.txn = txn;
  rec.vote = v;
  trace_.add(rec);
  return v;
}

// -------------------------------------------------------------------- timers

void Runtime::handle_timer(const SimEvent& ev) {
  NodeId n = ev.node;
  if (!world_.alive(n) || ev.epoch != nodes_[n].epoch) return;
  auto& nr = nodes_[n];

  ProtocolEvent e;
  e.kind = ProtocolEvent::Timer;
  e.now_ms = world_.local_clock_ms(n);
  e.timer_id = ev.timer_id;

  auto fire_trace = [&] {
    TraceRec rec;
    rec.type = TraceRec::TimerFired;
    rec.t = world_.now();
    rec.node = n;
    rec.txn = ev.txn;
    rec.timer_id = ev.timer_id;
    trace_.add(rec);
  };

  if (n == sc_.coordinator()) {
    auto it = nr.cstates.find(ev.txn);
    if (it == nr.cstates.end()) return;
    CoordinatorState& cs = it->second;
    bool relevant =
        ((ev.timer_id == kWindowTimer || ev.timer_id == kVoteTimer) &&
         cs.phase == CoordinatorState::Collecting) ||
        (ev.timer_id == kResendTimer && cs.phase == CoordinatorState::Deciding);
    if (!relevant) return;
    fire_trace();
    auto [ns, acts] = coordinator_step(cs, e);
    it->second = std::move(ns);
    apply_actions(n, ev.txn, acts, &it->second.body);
  } else {
    auto it = nr.pstates.find(ev.txn);
    if (it == nr.pstates.end()) return;
    ParticipantState& ps = it->second;
    bool relevant =
        (ev.timer_id == kWindowTimer && ps.phase == ParticipantState::WindowOpen) ||
        (ev.timer_id == kCrashTimer && ps.phase == ParticipantState::AwaitDecision);
    if (!relevant) return;
    fire_trace();
    auto [ns, acts] = participant_step(ps, e);
    it->second = std::move(ns);
    apply_actions(n, ev.txn, acts, &it->second.body);
  }
}

// ------------------------------------------------------------------- actions

void Runtime::apply_actions(NodeId node, TxnId txn, const Actions& acts,
                            const TxnBody* body) {
  auto& nr = nodes_[node];
  for (const auto& a : acts) {
    switch (a.kind) {
      case ProtocolAction::Send:
        world_.send(a.msg, trace_);
        break;
      case ProtocolAction::SetTimer:
        world_.set_timer(node, txn, a.timer_id, nr.epoch, a.delay_ms);
        break;
      case ProtocolAction::AppendLog: {
        LogEntry e = a.entry;
        e.seq = nr.log_seq++;
        nr.log.push_back(std::move(e));
        break;
      }
      case ProtocolAction::DecideLocal: {
        TraceRec rec;
        rec.type = TraceRec::LocalDecision;
        rec.t = world_.now();
        rec.node = node;
        rec.txn = txn;
        rec.decision = a.decision;
        trace_.add(rec);
        if (node != sc_.coordinator() && body) {
          auto wit = body->writes.find(node);
          if (wit != body->writes.end()) {
            if (a.decision == Decision::Commit && !nr.shard.applied.count(txn))
              nr.shard.apply(txn, wit->second);
            nr.shard.release(txn, wit->second);
          }
        }
        break;
      }
      case ProtocolAction::ReplyClient:
        reply_client(txn, a.decision);
        break;
      case ProtocolAction::EnterTermination:
        handle_termination(node, txn);
        break;
      case ProtocolAction::Fault: {
        TraceRec rec;
        rec.type = TraceRec::Fault;
        rec.t = world_.now();
        rec.node = node;
        rec.txn = txn;
        rec.detail = a.fault;
        trace_.add(rec);
        break;
      }
    }
  }
}

void Runtime::handle_termination(NodeId node, TxnId txn) {
  TraceRec rec;
  rec.type = TraceRec::TerminationEntered;
  rec.t = world_.now();
  rec.node = node;
  rec.txn = txn;
  trace_.add(rec);

  if (node == sc_.coordinator()) {
    start_coord_session(txn);
    return;
  }
  auto& nr = nodes_[node];
  auto it = nr.pstates.find(txn);
  if (it == nr.pstates.end()) return;
  switch (it->second.proto) {
    case Protocol::CF:
      // Crash-only failure model: a silent coordinator cannot have committed
      // without this node receiving the forwarded decision in time.
      adopt_participant(node, txn, Decision::Abort);
      break;
    case Protocol::TwoPC:
      break;  // blocks until the decision is re-sent
    default:
      start_participant_session(node, txn);
      break;
  }
}

void Runtime::reply_client(TxnId txn, Decision d) {
  auto it = txns_.find(txn);
  if (it == txns_.end()) return;
  TxnRt& tr = it->second;
  if (tr.replied) return;
  tr.replied = true;
  tr.final_decision = d;
  if (d == Decision::Abort && !tr.saw_no) tr.failure_shaped = true;

  bool can_retry = d == Decision::Abort && tr.saw_no && tr.attempt + 1 < 10;
  std::string outcome =
      d == Decision::Commit ? "commit" : (can_retry ? "retry" : "abort");

  TraceRec rec;
  rec.type = TraceRec::ClientReply;
  rec.t = world_.now();
  rec.txn = txn;
  rec.decision = d;
  rec.latency_ms = us_to_ms(world_.now() - tr.issue_t);
  rec.attempt = tr.attempt;
  rec.detail = outcome;
  trace_.add(rec);

  if (tr.proto == Protocol::NF || tr.proto == Protocol::TwoPC || window_complete(tr))
    finalize_detection(txn);
  maybe_record_run(txn);

  auto samp = reward_.ingest(max_level(), d == Decision::Commit,
                             us_to_ms(world_.now()));
  if (samp && driver_) driver_->on_sample(*samp);

  ClientRt& cl = clients_[static_cast<size_t>(tr.client)];
  if (outcome == "retry") {
    cl.attempt = tr.attempt + 1;
    world_.schedule_client(world_.now() + ms_to_us(sc_.link_base_ms), tr.client);
  } else {
    cl.attempt = 0;
    world_.schedule_client(world_.now() + 100, tr.client);
  }
}

// ------------------------------------------------------------ crash/recovery

void Runtime::handle_crash(NodeId n) {
  if (!world_.alive(n)) return;
  world_.set_alive(n, false);
  auto& nr = nodes_[n];
  nr.epoch++;
  nr.pstates.clear();
  nr.cstates.clear();
  nr.sessions.clear();
  nr.shard.locks.clear();

  TraceRec rec;
  rec.type = TraceRec::Crash;
  rec.t = world_.now();
  rec.node = n;
  trace_.add(rec);
}

void Runtime::handle_recover(NodeId n) {
  if (world_.alive(n)) return;
  world_.set_alive(n, true);
  TraceRec rec;
  rec.type = TraceRec::Recover;
  rec.t = world_.now();
  rec.node = n;
  trace_.add(rec);
  recover_node(n);
}

Runtime::LogView Runtime::scan_log(NodeId n, TxnId txn) const {
  LogView v;
  for (const auto& e : nodes_.at(n).log) {
    if (e.txn != txn) continue;
    v.reply.known = true;
    switch (e.kind) {
      case LogKind::ProposeLog:
        if (e.body) v.propose = &*e.body;
        break;
      case LogKind::ReadyYes:
        v.reply.ready_yes = true;
        break;
      case LogKind::ReadyNo:
        v.reply.ready_no = true;
        break;
      case LogKind::TransitCommit:
      case LogKind::CommitLog:
        v.reply.decision = Decision::Commit;
        break;
      case LogKind::TransitAbort:
      case LogKind::AbortLog:
        v.reply.decision = Decision::Abort;
        break;
    }
  }
  return v;
}

void Runtime::recover_node(NodeId n) {
  auto& nr = nodes_[n];
  std::vector<TxnId> seen;
  std::set<TxnId> dedup;
  for (const auto& e : nr.log)
    if (dedup.insert(e.txn).second) seen.push_back(e.txn);

  for (TxnId txn : seen) {
    LogView v = scan_log(n, txn);
    if (n == sc_.coordinator()) {
      if (!v.propose) continue;
      if (v.reply.decision) {
        auto tit = txns_.find(txn);
        if (tit != txns_.end() && tit->second.replied) continue;
        CoordinatorState cs;
        cs.self = n;
        cs.txn = txn;
        cs.proto = v.propose->protocol;
        cs.ct = {v.propose->ct.begin(), v.propose->ct.end()};
        cs.delays = dm_;
        cs.crash_timeout_ms = tc_ms_;
        cs.phase = CoordinatorState::Termination;
        cs.results.txn = txn;
        cs.results.expected = cs.ct;
        cs.body = v.propose->body;
        nr.cstates[txn] = std::move(cs);
        adopt_coordinator(txn, *v.reply.decision);
        continue;
      }
      Protocol proto = v.propose->protocol;
      CoordinatorState cs;
      cs.self = n;
      cs.txn = txn;
      cs.proto = proto;
      cs.ct = {v.propose->ct.begin(), v.propose->ct.end()};
      cs.delays = dm_;
      cs.crash_timeout_ms = tc_ms_;
      cs.phase = CoordinatorState::Termination;
      cs.results.txn = txn;
      cs.results.expected = cs.ct;
      cs.body = v.propose->body;
      nr.cstates[txn] = std::move(cs);
      if (proto == Protocol::CF) {
        // No transmit record means the decision was never forwarded, so abort
        // is the only safe completion under the crash-only model.
        adopt_coordinator(txn, Decision::Abort);
      } else {
        start_coord_session(txn);
      }
      continue;
    }

    // Participant side.
    if (!v.propose) continue;
    if (v.reply.decision) {
      if (*v.reply.decision == Decision::Commit &&
          !nr.shard.applied.count(txn)) {
        auto wit = v.propose->body.writes.find(n);
        if (wit != v.propose->body.writes.end()) nr.shard.apply(txn, wit->second);
      }
      continue;
    }
    if (!v.reply.ready_yes) {
      // Voted No (decision would exist) or never voted: abort outright.
      LogEntry e;
      e.txn = txn;
      e.kind = LogKind::AbortLog;
      e.seq = nr.log_seq++;
      nr.log.push_back(std::move(e));
      TraceRec rec;
      rec.type = TraceRec::LocalDecision;
      rec.t = world_.now();
      rec.node = n;
      rec.txn = txn;
      rec.decision = Decision::Abort;
      trace_.add(rec);
      continue;
    }

    // Prepared but undecided: restore the waiting state, hold the locks again
    // and chase the decision.
    ParticipantState ps;
    ps.self = n;
    ps.cstar = sc_.coordinator();
    ps.txn = txn;
    ps.proto = v.propose->protocol;
    ps.ct = v.propose->ct;
    ps.delays = dm_;
    ps.crash_timeout_ms = tc_ms_;
    ps.phase = ParticipantState::AwaitDecision;
    ps.vote = Vote::Yes;
    ps.replied_undecide = true;
    ps.body = v.propose->body;
    auto wit = ps.body.writes.find(n);
    if (wit != ps.body.writes.end()) nr.shard.lock_all(txn, wit->second);
    nr.pstates[txn] = std::move(ps);

    if (world_.alive(sc_.coordinator())) {
      if (v.propose->protocol == Protocol::FF || v.propose->protocol == Protocol::CF) {
        Message m = simple_msg(MsgKind::ResultReply, txn, n, sc_.coordinator());
        m.result = ResultTuple{n, Vote::Yes, Decision::Undecide};
        world_.send(m, trace_);
      } else {
        Message m = simple_msg(MsgKind::VoteMsg, txn, n, sc_.coordinator());
        m.vote = Vote::Yes;
        m.voter = n;
        world_.send(m, trace_);
      }
    }
    start_participant_session(n, txn);
  }
}

// ------------------------------------------------------------------ sessions

void Runtime::start_participant_session(NodeId n, TxnId txn) {
  auto& nr = nodes_[n];
  if (nr.sessions.count(txn)) return;
  auto pit = nr.pstates.find(txn);
  if (pit == nr.pstates.end()) return;
  RecoverySession s;
  s.txn = txn;
  s.coord_role = false;
  for (NodeId p : pit->second.ct)
    if (p != n) s.targets.insert(p);
  s.targets.insert(pit->second.cstar);
  s.backoff_ms = std::max(1.0, 2 * sc_.link_base_ms);
  nr.sessions[txn] = std::move(s);
  send_session_queries(n, txn);
  schedule_session_retry(n, txn);
}

void Runtime::start_coord_session(TxnId txn) {
  NodeId n = sc_.coordinator();
  auto& nr = nodes_[n];
  if (nr.sessions.count(txn)) return;
  auto cit = nr.cstates.find(txn);
  if (cit == nr.cstates.end()) return;
  RecoverySession s;
  s.txn = txn;
  s.coord_role = true;
  s.targets = cit->second.ct;
  s.backoff_ms = std::max(1.0, 2 * sc_.link_base_ms);
  nr.sessions[txn] = std::move(s);
  send_session_queries(n, txn);
  schedule_session_retry(n, txn);
}

void Runtime::send_session_queries(NodeId n, TxnId txn) {
  auto& nr = nodes_[n];
  auto sit = nr.sessions.find(txn);
  if (sit == nr.sessions.end()) return;
  for (NodeId t : sit->second.targets)
    world_.send(simple_msg(MsgKind::LogQuery, txn, n, t), trace_);
  if (!sit->second.coord_role) {
    // Prod a live coordinator with a fresh undecided reply / vote.
    auto pit = nr.pstates.find(txn);
    if (pit != nr.pstates.end() && world_.alive(pit->second.cstar)) {
      const ParticipantState& ps = pit->second;
      if (ps.proto == Protocol::FF || ps.proto == Protocol::CF) {
        Message m = simple_msg(MsgKind::ResultReply, txn, n, ps.cstar);
        m.result = ResultTuple{n, Vote::Yes, Decision::Undecide};
        world_.send(m, trace_);
      } else if (ps.proto == Protocol::NF) {
        Message m = simple_msg(MsgKind::VoteMsg, txn, n, ps.cstar);
        m.vote = Vote::Yes;
        m.voter = n;
        world_.send(m, trace_);
      }
    }
  }
}

void Runtime::schedule_session_retry(NodeId n, TxnId txn) {
  auto& nr = nodes_[n];
  auto sit = nr.sessions.find(txn);
  if (sit == nr.sessions.end()) return;
  uint64_t epoch = nr.epoch;
  SimTime t = world_.now() + ms_to_us(sit->second.backoff_ms);
  schedule_cb(t, n, [this, n, txn, epoch] {
    if (!world_.alive(n) || nodes_[n].epoch != epoch) return;
    evaluate_session(n, txn);
    auto& nr2 = nodes_[n];
    auto it = nr2.sessions.find(txn);
    if (it == nr2.sessions.end()) return;
    it->second.backoff_ms = std::min(it->second.backoff_ms * 2, tc_ms_);
    send_session_queries(n, txn);
    schedule_session_retry(n, txn);
  });
}

void Runtime::evaluate_session(NodeId n, TxnId txn) {
  auto& nr = nodes_[n];
  auto sit = nr.sessions.find(txn);
  if (sit == nr.sessions.end()) return;
  RecoverySession& s = sit->second;

  if (s.coord_role) {
    auto cit = nr.cstates.find(txn);
    if (cit == nr.cstates.end() || cit->second.phase == CoordinatorState::Done) {
      nr.sessions.erase(sit);
      return;
    }
    for (auto& [peer, rep] : s.replies) {
      if (rep.decision) {
        nr.sessions.erase(txn);
        adopt_coordinator(txn, *rep.decision);
        return;
      }
    }
    for (auto& [peer, rep] : s.replies) {
      if (!rep.ready_yes) {
        // That participant never prepared, so nobody can have committed.
        nr.sessions.erase(txn);
        adopt_coordinator(txn, Decision::Abort);
        return;
      }
    }
    bool all_replied = true;
    for (NodeId t : s.targets)
      if (!s.replies.count(t)) all_replied = false;
    if (all_replied) {
      nr.sessions.erase(txn);
      adopt_coordinator(txn, Decision::Commit);
    }
    return;
  }

  auto pit = nr.pstates.find(txn);
  if (pit == nr.pstates.end() || pit->second.phase == ParticipantState::Done) {
    nr.sessions.erase(sit);
    return;
  }
  ParticipantState& ps = pit->second;
  for (auto& [peer, rep] : s.replies) {
    if (rep.decision) {
      nr.sessions.erase(txn);
      adopt_participant(n, txn, *rep.decision);
      return;
    }
  }
  // Coordinator-replacement commit: everyone prepared, the coordinator is
  // down, and this node is the lowest-numbered live participant.
  if ((ps.proto == Protocol::FF || ps.proto == Protocol::NF) &&
      !world_.alive(ps.cstar)) {
    bool all_yes = true, all_replied = true;
    NodeId lowest_alive = n;
    for (NodeId p : ps.ct) {
      if (p == n) continue;
      auto rit = s.replies.find(p);
      if (rit == s.replies.end())
        all_replied = false;
      else if (!rit->second.ready_yes)
        all_yes = false;
      if (world_.alive(p) && p < lowest_alive) lowest_alive = p;
    }
    if (all_replied && all_yes && lowest_alive == n) {
      if (ps.proto == Protocol::FF) {
        for (NodeId p : ps.ct) {
          if (p == n) continue;
          Message m = simple_msg(MsgKind::DecisionMsg, txn, n, p);
          m.decision = Decision::Commit;
          world_.send(m, trace_);
        }
      }
      nr.sessions.erase(txn);
      adopt_participant(n, txn, Decision::Commit);
    }
  }
}

void Runtime::adopt_participant(NodeId n, TxnId txn, Decision d) {
  auto& nr = nodes_[n];
  auto it = nr.pstates.find(txn);
  if (it == nr.pstates.end()) return;
  auto [ns, acts] = participant_adopt_decision(it->second, d);
  it->second = std::move(ns);
  apply_actions(n, txn, acts, &it->second.body);
}

void Runtime::adopt_coordinator(TxnId txn, Decision d) {
  auto& nr = nodes_[sc_.coordinator()];
  auto it = nr.cstates.find(txn);
  if (it == nr.cstates.end()) return;
  auto [ns, acts] = coordinator_adopt_decision(it->second, d);
  it->second = std::move(ns);
  apply_actions(sc_.coordinator(), txn, acts, &it->second.body);
}

// -------------------------------------------------------- detection / levels

bool Runtime::window_complete(const TxnRt& tr) const {
  if (tr.proto != Protocol::FF && tr.proto != Protocol::CF) return false;
  if (tr.ct.empty()) return false;
  std::set<NodeId> ct(tr.ct.begin(), tr.ct.end());
  SimTime t_w = tr.propose_t + ms_to_us(coordinator_window(sc_.coordinator(), ct, dm_));
  for (NodeId n : tr.ct) {
    auto it = tr.recv_time.find(n);
    if (it == tr.recv_time.end() || it->second > t_w) return false;
  }
  return true;
}

void Runtime::finalize_detection(TxnId txn) {
  auto it = txns_.find(txn);
  if (it == txns_.end()) return;
  TxnRt& tr = it->second;
  if (tr.detection_done) return;
  tr.detection_done = true;
  if (tr.ct.empty()) return;
  if (tr.proto != Protocol::FF && tr.proto != Protocol::CF) return;

  std::set<NodeId> ct(tr.ct.begin(), tr.ct.end());
  SimTime t_w = tr.propose_t + ms_to_us(coordinator_window(sc_.coordinator(), ct, dm_));
  SimTime t_c = tr.propose_t + ms_to_us(tc_ms_);
  ResultSet rt;
  rt.txn = txn;
  rt.expected = ct;
  std::map<NodeId, TimingClass> timing;
  for (NodeId n : ct) {
    auto rit = tr.recv_time.find(n);
    if (rit == tr.recv_time.end()) {
      timing[n] = TimingClass::Silent;
    } else if (rit->second <= t_w) {
      timing[n] = TimingClass::InWindow;
      rt.entries[n] = tr.results.at(n);
    } else {
      timing[n] = rit->second <= t_c ? TimingClass::Late : TimingClass::Silent;
    }
  }
  DetectionReport rep = detect_events(tr.proto, ct, rt, timing);
  for (auto& [n, ev] : rep.events) {
    tr.event_nodes.insert(n);
    apply_level_event(n, txn, ev, rep.rule);
  }
}

void Runtime::apply_level_event(NodeId n, TxnId txn, const LevelEvent& ev,
                               const std::string& rule) {
  LevelMachine& r = levels_[n];
  Level old = r.level;
  r.level = level_transition(old, ev);
  r.consecutive_ff_runs = 0;
  TraceRec rec;
  rec.type = TraceRec::LevelChange;
  rec.t = world_.now();
  rec.node = n;
  rec.txn = txn;
  rec.level_old = to_string(old);
  rec.level_new = to_string(r.level);
  rec.rule = rule;
  trace_.add(rec);
}

void Runtime::maybe_record_run(TxnId txn) {
  auto it = txns_.find(txn);
  if (it == txns_.end()) return;
  TxnRt& tr = it->second;
  if (tr.run_recorded || !tr.detection_done || !tr.replied) return;
  tr.run_recorded = true;
  for (NodeId n : tr.ct) {
    bool clean = !tr.event_nodes.count(n) && !tr.failure_shaped;
    apply_run(n, txn, clean);
  }
}

void Runtime::apply_run(NodeId n, TxnId txn, bool clean) {
  LevelMachine& r = levels_[n];
  if (!clean) {
    r.consecutive_ff_runs = 0;
    return;
  }
  if (r.level == Level::FF) return;

  auto downgrade = [&] {
    Level old = r.level;
    r.level = Level::FF;
    r.consecutive_ff_runs = 0;
    TraceRec rec;
    rec.type = TraceRec::LevelChange;
    rec.t = world_.now();
    rec.node = n;
    rec.txn = txn;
    rec.level_old = to_string(old);
    rec.level_new = to_string(Level::FF);
    rec.rule = "downgrade";
    trace_.add(rec);
  };

  if (driver_) {
    r.consecutive_ff_runs++;
    int s = r.consecutive_ff_runs;
    bool boundary = (s & (s - 1)) == 0;
    if (s >= kAlphaCap ||
        (boundary && driver_->decide(r.level, bucket_index(s)) == TuneAction::Downgrade))
      downgrade();
  } else {
    if (record_run(r, true)) downgrade();
  }
}

Level Runtime::max_level() const {
  Level m = Level::FF;
  for (auto& [n, r] : levels_)
    if (static_cast<int>(r.level) > static_cast<int>(m)) m = r.level;
  return m;
}

// --------------------------------------------------------------------- misc

uint64_t Runtime::schedule_cb(SimTime t, NodeId node, std::function<void()> fn) {
  uint64_t id = next_cb_++;
  callbacks_[id] = std::move(fn);
  world_.schedule_callback(t, id, node);
  return id;
}

int Runtime::residual_locks() const {
  int total = 0;
  for (auto& [n, nr] : nodes_) total += static_cast<int>(nr.shard.locks.size());
  return total;
}

Json Runtime::summary() const {
  Json levels = Json::object();
  for (auto& [n, r] : levels_) levels[std::to_string(n)] = to_string(r.level);
  int64_t level_changes = 0;
  for (auto& rec : trace_.recs)
    if (rec.type == TraceRec::LevelChange) level_changes++;
  return Json{{"issued", issued_},
              {"levels", levels},
              {"level_changes", level_changes},
              {"residual_locks", residual_locks()}};
}

void Runtime::forge_violation() {
  for (const auto& rec : trace_.recs) {
    if (rec.type != TraceRec::LocalDecision) continue;
    TraceRec forged = rec;
    forged.node = rec.node == 1 ? sc_.coordinator() : 1;
    forged.decision =
        rec.decision == Decision::Commit ? Decision::Abort : Decision::Commit;
    trace_.add(forged);
    return;
  }
}

}  // namespace acc
