#include "acc/core.hpp"

namespace acc {

const char* to_string(Vote v) { return v == Vote::Yes ? "yes" : "no"; }

const char* to_string(Decision d) {
  switch (d) {
    case Decision::Commit: return "commit";
    case Decision::Abort: return "abort";
    default: return "undecide";
  }
}

const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::FF: return "ff";
    case Protocol::CF: return "cf";
    case Protocol::NF: return "nf";
    default: return "2pc";
  }
}

std::optional<Protocol> protocol_from_string(const std::string& s) {
  if (s == "ff") return Protocol::FF;
  if (s == "cf") return Protocol::CF;
  if (s == "nf") return Protocol::NF;
  if (s == "2pc" || s == "twopc") return Protocol::TwoPC;
  return std::nullopt;
}

const char* to_string(MsgKind k) {
  switch (k) {
    case MsgKind::Propose: return "propose";
    case MsgKind::VoteMsg: return "vote";
    case MsgKind::DecisionMsg: return "decision";
    case MsgKind::ResultReply: return "result";
    case MsgKind::LogQuery: return "log_query";
    case MsgKind::LogReply: return "log_reply";
    default: return "ack";
  }
}

const char* to_string(LogKind k) {
  switch (k) {
    case LogKind::ProposeLog: return "propose";
    case LogKind::ReadyYes: return "ready_yes";
    case LogKind::ReadyNo: return "ready_no";
    case LogKind::TransitCommit: return "transit_commit";
    case LogKind::TransitAbort: return "transit_abort";
    case LogKind::CommitLog: return "commit";
    default: return "abort";
  }
}

static Vote vote_from_string(const std::string& s) {
  return s == "yes" ? Vote::Yes : Vote::No;
}

static Decision decision_from_string(const std::string& s) {
  if (s == "commit") return Decision::Commit;
  if (s == "abort") return Decision::Abort;
  return Decision::Undecide;
}

static MsgKind msg_kind_from_string(const std::string& s) {
  if (s == "propose") return MsgKind::Propose;
  if (s == "vote") return MsgKind::VoteMsg;
  if (s == "decision") return MsgKind::DecisionMsg;
  if (s == "result") return MsgKind::ResultReply;
  if (s == "log_query") return MsgKind::LogQuery;
  if (s == "log_reply") return MsgKind::LogReply;
  return MsgKind::Ack;
}

static LogKind log_kind_from_string(const std::string& s) {
  if (s == "propose") return LogKind::ProposeLog;
  if (s == "ready_yes") return LogKind::ReadyYes;
  if (s == "ready_no") return LogKind::ReadyNo;
  if (s == "transit_commit") return LogKind::TransitCommit;
  if (s == "transit_abort") return LogKind::TransitAbort;
  if (s == "commit") return LogKind::CommitLog;
  return LogKind::AbortLog;
}

static Json body_to_json(const TxnBody& b) {
  Json writes = Json::object();
  for (auto& [node, keys] : b.writes) writes[std::to_string(node)] = keys;
  return Json{{"writes", writes}};
}

static TxnBody body_from_json(const Json& j) {
  TxnBody b;
  for (auto& [node, keys] : j.at("writes").items())
    b.writes[std::stoi(node)] = keys.get<std::vector<int64_t>>();
  return b;
}

static Json propose_to_json(const ProposePayload& p) {
  return Json{{"body", body_to_json(p.body)},
              {"t_sent", p.t_sent_ms},
              {"ct", p.ct},
              {"protocol", to_string(p.protocol)},
              {"direct", p.direct}};
}

static ProposePayload propose_from_json(const Json& j) {
  ProposePayload p;
  p.body = body_from_json(j.at("body"));
  p.t_sent_ms = j.at("t_sent").get<double>();
  p.ct = j.at("ct").get<std::vector<NodeId>>();
  p.protocol = *protocol_from_string(j.at("protocol").get<std::string>());
  p.direct = j.at("direct").get<bool>();
  return p;
}

Json to_json(const Message& m) {
  Json payload = Json::object();
  switch (m.kind) {
    case MsgKind::Propose:
      payload = propose_to_json(*m.propose);
      break;
    case MsgKind::VoteMsg:
      payload = Json{{"vote", to_string(*m.vote)}, {"voter", m.voter}};
      break;
    case MsgKind::DecisionMsg:
      payload = Json{{"decision", to_string(*m.decision)}};
      break;
    case MsgKind::ResultReply:
      payload = Json{{"node", m.result->node},
                     {"vote", to_string(m.result->vote)},
                     {"decision", to_string(m.result->decision)}};
      break;
    case MsgKind::LogReply: {
      payload = Json{{"known", m.log_reply->known},
                     {"ready_yes", m.log_reply->ready_yes},
                     {"ready_no", m.log_reply->ready_no}};
      payload["decision"] =
          m.log_reply->decision ? Json(to_string(*m.log_reply->decision)) : Json(nullptr);
      break;
    }
    default:
      break;
  }
  return Json{{"kind", to_string(m.kind)},
              {"txn", m.txn},
              {"from", m.from},
              {"to", m.to},
              {"payload", payload}};
}

Message message_from_json(const Json& j) {
  Message m;
  m.kind = msg_kind_from_string(j.at("kind").get<std::string>());
  m.txn = j.at("txn").get<TxnId>();
  m.from = j.at("from").get<NodeId>();
  m.to = j.at("to").get<NodeId>();
  const Json& p = j.at("payload");
  switch (m.kind) {
    case MsgKind::Propose:
      m.propose = propose_from_json(p);
      break;
    case MsgKind::VoteMsg:
      m.vote = vote_from_string(p.at("vote").get<std::string>());
      m.voter = p.at("voter").get<NodeId>();
      break;
    case MsgKind::DecisionMsg:
      m.decision = decision_from_string(p.at("decision").get<std::string>());
      break;
    case MsgKind::ResultReply: {
      ResultTuple r;
      r.node = p.at("node").get<NodeId>();
      r.vote = vote_from_string(p.at("vote").get<std::string>());
      r.decision = decision_from_string(p.at("decision").get<std::string>());
      m.result = r;
      break;
    }
    case MsgKind::LogReply: {
      LogReplyPayload lr;
      lr.known = p.at("known").get<bool>();
      lr.ready_yes = p.at("ready_yes").get<bool>();
      lr.ready_no = p.at("ready_no").get<bool>();
      if (!p.at("decision").is_null())
        lr.decision = decision_from_string(p.at("decision").get<std::string>());
      m.log_reply = lr;
      break;
    }
    default:
      break;
  }
  return m;
}

Json to_json(const LogEntry& e) {
  Json payload = Json::object();
  if (e.body) payload = propose_to_json(*e.body);
  return Json{{"kind", to_string(e.kind)},
              {"txn", e.txn},
              {"from", nullptr},
              {"to", nullptr},
              {"payload", Json{{"seq", e.seq}, {"log", payload}}}};
}

LogEntry log_entry_from_json(const Json& j) {
  LogEntry e;
  e.kind = log_kind_from_string(j.at("kind").get<std::string>());
  e.txn = j.at("txn").get<TxnId>();
  const Json& p = j.at("payload");
  e.seq = p.at("seq").get<uint64_t>();
  if (e.kind == LogKind::ProposeLog && !p.at("log").empty())
    e.body = propose_from_json(p.at("log"));
  return e;
}

}  // namespace acc
