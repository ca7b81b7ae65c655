#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace acc {

using Json = nlohmann::ordered_json;  // preserves field order for canonical output

using NodeId = int32_t;  // node 0 is the coordinator by convention; shards are 1..n
using TxnId = int64_t;

// Virtual time. Integer microseconds internally; config and reports use milliseconds.
using SimTime = int64_t;
constexpr SimTime kMsToUs = 1000;
inline SimTime ms_to_us(double ms) { return static_cast<SimTime>(ms * 1000.0 + 0.5); }
inline double us_to_ms(SimTime us) { return static_cast<double>(us) / 1000.0; }

enum class Vote : uint8_t { Yes, No };
enum class Decision : uint8_t { Commit, Abort, Undecide };

enum class Protocol : uint8_t { FF, CF, NF, TwoPC };

// A participant's <vote, decision> reply analyzed by the level manager.
struct ResultTuple {
  NodeId node = -1;
  Vote vote = Vote::Yes;
  Decision decision = Decision::Undecide;
  bool operator==(const ResultTuple&) const = default;
};

// <No, Commit> and <No, Undecide> cannot arise from a correct node.
inline bool classify_result(Vote v, Decision d) {
  return !(v == Vote::No && (d == Decision::Commit || d == Decision::Undecide));
}

struct ResultSet {
  TxnId txn = -1;
  std::map<NodeId, ResultTuple> entries;
  std::set<NodeId> expected;

  bool complete() const {
    for (NodeId n : expected)
      if (!entries.count(n)) return false;
    return true;
  }
  bool contains_decision(Decision d) const {
    for (auto& [n, r] : entries)
      if (r.decision == d) return true;
    return false;
  }
  bool contains_vote(Vote v) const {
    for (auto& [n, r] : entries)
      if (r.vote == v) return true;
    return false;
  }
};

inline bool result_set_complete(const ResultSet& rs) { return rs.complete(); }

enum class MsgKind : uint8_t {
  Propose,
  VoteMsg,
  DecisionMsg,
  ResultReply,
  LogQuery,
  LogReply,
  Ack,
};

// Write set for one txn, keyed by owning node.
struct TxnBody {
  std::map<NodeId, std::vector<int64_t>> writes;  // keys per shard
  bool operator==(const TxnBody&) const = default;
};

struct ProposePayload {
  TxnBody body;
  double t_sent_ms = 0;  // coordinator clock at send
  std::vector<NodeId> ct;
  Protocol protocol = Protocol::FF;
  bool direct = false;  // single-shard fast path, no commit protocol
};

struct LogReplyPayload {
  bool known = false;  // node has a ProposeLog for the txn
  bool ready_yes = false;
  bool ready_no = false;
  std::optional<Decision> decision;
};

struct Message {
  MsgKind kind = MsgKind::Propose;
  TxnId txn = -1;
  NodeId from = -1;
  NodeId to = -1;
  // kind-specific payloads; only the relevant one is populated
  std::optional<ProposePayload> propose;
  std::optional<Vote> vote;
  NodeId voter = -1;  // VoteMsg: identity under reordering
  std::optional<Decision> decision;
  std::optional<ResultTuple> result;
  std::optional<LogReplyPayload> log_reply;
};

enum class LogKind : uint8_t {
  ProposeLog,
  ReadyYes,
  ReadyNo,
  TransitCommit,
  TransitAbort,
  CommitLog,
  AbortLog,
};

struct LogEntry {
  TxnId txn = -1;
  LogKind kind = LogKind::ProposeLog;
  uint64_t seq = 0;                     // append index within the node's log
  std::optional<ProposePayload> body;   // ProposeLog keeps the write set for replay
};

const char* to_string(Vote v);
const char* to_string(Decision d);
const char* to_string(Protocol p);
const char* to_string(MsgKind k);
const char* to_string(LogKind k);

std::optional<Protocol> protocol_from_string(const std::string& s);

// Canonical line records (field order kind, txn, from, to, payload).
Json to_json(const Message& m);
Json to_json(const LogEntry& e);
Message message_from_json(const Json& j);
LogEntry log_entry_from_json(const Json& j);

}  // namespace acc
