#include "acc/fsa.hpp"

#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

namespace acc {

const char* to_string(FsaLocal s) {
  switch (s) {
    case FsaLocal::Q: return "q";
    case FsaLocal::W: return "w";
    case FsaLocal::TA: return "ta";
    case FsaLocal::TC: return "tc";
    case FsaLocal::A: return "a";
    case FsaLocal::C: return "c";
    case FsaLocal::R: return "r";
    default: return "?";
  }
}

namespace {

// Flattened global state of the untimed automaton. Per participant we track
// the local state plus what it has read; the coordinator tracks received
// results; every channel slot holds at most one in-flight message because
// each sender emits each message kind at most once per target.
struct Space {
  Protocol proto;
  int n;
  int off_loc, off_yes, off_noseen, off_dec, off_replied, off_res;
  int off_decided, off_vote, off_fwd, off_resfl, off_cdfl, size;

  explicit Space(Protocol p, int nn) : proto(p), n(nn) {
    off_loc = 0;
    off_yes = n;
    off_noseen = 2 * n;
    off_dec = 3 * n;
    off_replied = 4 * n;
    off_res = 5 * n;
    off_decided = 6 * n;
    off_vote = 6 * n + 1;
    off_fwd = off_vote + n * n;
    off_resfl = off_fwd + n * n;
    off_cdfl = off_resfl + n;
    size = off_cdfl + n;
  }

  using St = std::vector<int8_t>;

  St initial() const { return St(static_cast<size_t>(size), 0); }

  FsaLocal loc(const St& s, int i) const {
    return static_cast<FsaLocal>(s[static_cast<size_t>(off_loc + i)]);
  }
  void set_loc(St& s, int i, FsaLocal l) const {
    s[static_cast<size_t>(off_loc + i)] = static_cast<int8_t>(l);
  }
  int peers_mask(int i) const { return ((1 << n) - 1) & ~(1 << i); }

  // Result codes at the coordinator / in flight.
  static constexpr int8_t kNone = 0, kNoAbort = 1, kYesAbort = 2, kYesCommit = 3,
                          kYesUndecide = 4;

  void send_result(St& s, int i, int8_t kind) const {
    s[static_cast<size_t>(off_resfl + i)] = kind;
  }
  void broadcast_vote(St& s, int i, bool yes) const {
    for (int j = 0; j < n; ++j)
      if (j != i) s[static_cast<size_t>(off_vote + i * n + j)] = yes ? 1 : 2;
  }
  void broadcast_fwd(St& s, int i, bool commit) const {
    for (int j = 0; j < n; ++j)
      if (j != i) s[static_cast<size_t>(off_fwd + i * n + j)] = commit ? 2 : 1;
  }

  void check_ta_tc(St& s, int i) const {
    int read = s[static_cast<size_t>(off_dec + i)];
    if ((read & peers_mask(i)) != peers_mask(i)) return;
    if (loc(s, i) == FsaLocal::TA) set_loc(s, i, FsaLocal::A);
    if (loc(s, i) == FsaLocal::TC) set_loc(s, i, FsaLocal::C);
  }

  void enter_abort_buffer(St& s, int i) const {  // CF: decided abort, forwarding
    set_loc(s, i, FsaLocal::TA);
    broadcast_fwd(s, i, false);
    check_ta_tc(s, i);
  }
  void enter_commit_buffer(St& s, int i) const {
    set_loc(s, i, FsaLocal::TC);
    broadcast_fwd(s, i, true);
    check_ta_tc(s, i);
  }

  // Re-evaluate a node in the vote-collection part of w.
  void eval_w(St& s, int i) const {
    if (loc(s, i) != FsaLocal::W) return;
    if (s[static_cast<size_t>(off_noseen + i)]) {
      if (s[static_cast<size_t>(off_replied + i)]) return;  // unreachable guard
      s[static_cast<size_t>(off_replied + i)] = 1;
      send_result(s, i, kYesAbort);
      if (proto == Protocol::CF) {
        enter_abort_buffer(s, i);
      } else {
        set_loc(s, i, FsaLocal::A);
      }
      return;
    }
    int read = s[static_cast<size_t>(off_yes + i)];
    if ((read & peers_mask(i)) == peers_mask(i) &&
        !s[static_cast<size_t>(off_replied + i)]) {
      s[static_cast<size_t>(off_replied + i)] = 1;
      if (proto == Protocol::FF) {
        send_result(s, i, kYesCommit);
        set_loc(s, i, FsaLocal::C);
      } else {
        send_result(s, i, kYesUndecide);  // stays in w awaiting the decision
      }
    }
  }

  void vote(St& s, int i, bool yes) const {
    broadcast_vote(s, i, yes);
    if (yes) {
      set_loc(s, i, FsaLocal::W);
      eval_w(s, i);
      return;
    }
    s[static_cast<size_t>(off_replied + i)] = 1;
    send_result(s, i, kNoAbort);
    if (proto == Protocol::CF)
      enter_abort_buffer(s, i);
    else
      set_loc(s, i, FsaLocal::A);
  }

  void deliver_vote(St& s, int from, int to) const {
    int8_t v = s[static_cast<size_t>(off_vote + from * n + to)];
    s[static_cast<size_t>(off_vote + from * n + to)] = 0;
    if (v == 1)
      s[static_cast<size_t>(off_yes + to)] =
          static_cast<int8_t>(s[static_cast<size_t>(off_yes + to)] | (1 << from));
    else
      s[static_cast<size_t>(off_noseen + to)] = 1;
    eval_w(s, to);
  }

  void deliver_fwd(St& s, int from, int to) const {
    int8_t d = s[static_cast<size_t>(off_fwd + from * n + to)];
    s[static_cast<size_t>(off_fwd + from * n + to)] = 0;
    s[static_cast<size_t>(off_dec + to)] =
        static_cast<int8_t>(s[static_cast<size_t>(off_dec + to)] | (1 << from));
    switch (loc(s, to)) {
      case FsaLocal::Q:
      case FsaLocal::W:
        if (d == 1)
          enter_abort_buffer(s, to);
        else
          enter_commit_buffer(s, to);
        break;
      case FsaLocal::TA:
      case FsaLocal::TC:
        check_ta_tc(s, to);
        break;
      default:
        break;
    }
  }

  void deliver_result(St& s, int from) const {
    int8_t v = s[static_cast<size_t>(off_resfl + from)];
    s[static_cast<size_t>(off_resfl + from)] = 0;
    s[static_cast<size_t>(off_res + from)] = v;
    if (s[static_cast<size_t>(off_decided)]) return;
    bool complete = true, abort = false;
    for (int i = 0; i < n; ++i) {
      int8_t r = s[static_cast<size_t>(off_res + i)];
      if (r == kNone) complete = false;
      if (r == kNoAbort || r == kYesAbort) abort = true;
    }
    if (!complete) return;
    s[static_cast<size_t>(off_decided)] = abort ? 2 : 1;
    for (int i = 0; i < n; ++i)
      if (s[static_cast<size_t>(off_res + i)] == kYesUndecide)
        s[static_cast<size_t>(off_cdfl + i)] = abort ? 2 : 1;
  }

  void deliver_coord_decision(St& s, int to) const {
    int8_t d = s[static_cast<size_t>(off_cdfl + to)];
    s[static_cast<size_t>(off_cdfl + to)] = 0;
    if (proto == Protocol::FF) {
      if (loc(s, to) == FsaLocal::R)
        set_loc(s, to, d == 1 ? FsaLocal::C : FsaLocal::A);
      return;
    }
    if (loc(s, to) == FsaLocal::W) {
      if (d == 1)
        enter_commit_buffer(s, to);
      else
        enter_abort_buffer(s, to);
    }
  }

  void timeout(St& s, int i) const {  // FF only: give up on the vote window
    s[static_cast<size_t>(off_replied + i)] = 1;
    send_result(s, i, kYesUndecide);
    set_loc(s, i, FsaLocal::R);
  }
};

}  // namespace

FsaResult explore_fsa(Protocol proto, int n) {
  if ((proto != Protocol::FF && proto != Protocol::CF) || n < 2)
    throw std::invalid_argument("reachability analysis supports ff/cf with n >= 2");
  Space sp(proto, n);
  FsaResult out;
  out.proto = proto;
  out.n = n;
  if (proto == Protocol::FF)
    out.tracked = {FsaLocal::Q, FsaLocal::W, FsaLocal::A, FsaLocal::C, FsaLocal::R};
  else
    out.tracked = {FsaLocal::Q, FsaLocal::W, FsaLocal::TA,
                   FsaLocal::TC, FsaLocal::A, FsaLocal::C};

  std::set<Space::St> visited;
  std::deque<Space::St> queue;
  auto push = [&](Space::St s) {
    if (visited.insert(s).second) queue.push_back(std::move(s));
  };
  push(sp.initial());

  while (!queue.empty()) {
    Space::St s = std::move(queue.front());
    queue.pop_front();
    out.explored++;

    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        out.matrix[static_cast<int>(sp.loc(s, i))][static_cast<int>(sp.loc(s, j))] =
            true;
      }

    // Nondeterministic vote choice.
    for (int i = 0; i < n; ++i) {
      if (sp.loc(s, i) != FsaLocal::Q) continue;
      Space::St t = s;
      sp.vote(t, i, true);
      push(std::move(t));
      t = s;
      sp.vote(t, i, false);
      push(std::move(t));
    }
    // Nondeterministic window expiry (only meaningful for the failure-free
    // variant, whose blocking behaviour it exposes).
    if (proto == Protocol::FF) {
      for (int i = 0; i < n; ++i) {
        if (sp.loc(s, i) != FsaLocal::W ||
            s[static_cast<size_t>(sp.off_replied + i)])
          continue;
        Space::St t = s;
        sp.timeout(t, i);
        push(std::move(t));
      }
    }
    // Message deliveries in any order.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (s[static_cast<size_t>(sp.off_vote + i * n + j)]) {
          Space::St t = s;
          sp.deliver_vote(t, i, j);
          push(std::move(t));
        }
        if (s[static_cast<size_t>(sp.off_fwd + i * n + j)]) {
          Space::St t = s;
          sp.deliver_fwd(t, i, j);
          push(std::move(t));
        }
      }
      if (s[static_cast<size_t>(sp.off_resfl + i)]) {
        Space::St t = s;
        sp.deliver_result(t, i);
        push(std::move(t));
      }
      if (s[static_cast<size_t>(sp.off_cdfl + i)]) {
        Space::St t = s;
        sp.deliver_coord_decision(t, i);
        push(std::move(t));
      }
    }
  }

  // Nonblocking: no local state may be concurrent with both final outcomes,
  // and nothing non-committable may be concurrent with the commit state.
  std::set<FsaLocal> committable;
  if (proto == Protocol::FF)
    committable = {FsaLocal::C};
  else
    committable = {FsaLocal::W, FsaLocal::TC, FsaLocal::C};
  bool ok = true;
  for (FsaLocal st : out.tracked) {
    if (out.concurrent(st, FsaLocal::C) && out.concurrent(st, FsaLocal::A)) ok = false;
    if (!committable.count(st) && out.concurrent(st, FsaLocal::C)) ok = false;
  }
  out.nonblocking = ok;
  return out;
}

std::string FsaResult::render() const {
  std::ostringstream os;
  os << "protocol " << acc::to_string(proto) << ", n=" << n
     << ", reachable states: " << explored << "\n";
  os << "    ";
  for (FsaLocal c : tracked) os << " " << acc::to_string(c)
                                << (std::string(acc::to_string(c)).size() == 1 ? " " : "");
  os << "\n";
  for (FsaLocal r : tracked) {
    std::string name = acc::to_string(r);
    os << " " << name << (name.size() == 1 ? " " : "") << " ";
    for (FsaLocal c : tracked) os << " " << (concurrent(r, c) ? "Y" : ".") << " ";
    os << "\n";
  }
  os << "nonblocking: " << (nonblocking ? "yes" : "no") << "\n";
  return os.str();
}

Json FsaResult::to_json() const {
  Json rows = Json::object();
  for (FsaLocal r : tracked) {
    Json row = Json::object();
    for (FsaLocal c : tracked) row[acc::to_string(c)] = concurrent(r, c);
    rows[acc::to_string(r)] = row;
  }
  return Json{{"protocol", acc::to_string(proto)},
              {"n", n},
              {"explored", explored},
              {"matrix", rows},
              {"nonblocking", nonblocking}};
}

}  // namespace acc
