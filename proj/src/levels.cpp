#include "acc/levels.hpp"

#include <stdexcept>

namespace acc {

DetectionReport detect_events(Protocol proto, const std::set<NodeId>& ct,
                              const ResultSet& rt,
                              const std::map<NodeId, TimingClass>& timing) {
  DetectionReport rep;
  auto cls = [&](NodeId n) {
    auto it = timing.find(n);
    return it == timing.end() ? TimingClass::Silent : it->second;
  };

  switch (proto) {
    case Protocol::FF: {
      bool missing = false;
      for (NodeId n : ct)
        if (!rt.entries.count(n)) missing = true;
      if (missing) {
        // Silent nodes look crashed; late repliers indicate network trouble.
        for (NodeId n : ct) {
          if (rt.entries.count(n) && cls(n) == TimingClass::InWindow) continue;
          if (cls(n) == TimingClass::Silent)
            rep.events.push_back({n, {LevelEvent::CF, 0}});
          else
            rep.events.push_back({n, {LevelEvent::NF, 0}});
        }
        rep.rule = "ff_missing_results";
      } else if (rt.contains_decision(Decision::Undecide)) {
        for (NodeId n : ct) rep.events.push_back({n, {LevelEvent::NF, 0}});
        rep.rule = "ff_undecided_result";
      }
      break;
    }
    case Protocol::CF: {
      bool missing = false;
      for (NodeId n : ct)
        if (!rt.entries.count(n)) missing = true;
      if (missing) {
        for (NodeId n : ct)
          if (cls(n) == TimingClass::Late)
            rep.events.push_back({n, {LevelEvent::NF, 0}});
        rep.rule = "cf_late_results";
      } else {
        bool yes_abort = false, any_no = false;
        for (auto& [n, r] : rt.entries) {
          if (r.vote == Vote::Yes && r.decision == Decision::Abort) yes_abort = true;
          if (r.vote == Vote::No) any_no = true;
        }
        if (yes_abort && !any_no) {
          for (NodeId n : ct) rep.events.push_back({n, {LevelEvent::NF, 0}});
          rep.rule = "cf_window_abort";
        }
      }
      break;
    }
    default:
      break;  // NF and 2PC: no detection
  }
  return rep;
}

std::optional<LevelEvent> record_run(LevelMachine& r, bool failure_free) {
  if (!failure_free) {
    r.consecutive_ff_runs = 0;
    return std::nullopt;
  }
  if (r.level == Level::FF) return std::nullopt;
  r.consecutive_ff_runs++;
  int alpha = r.level == Level::CF ? r.alpha_cf : r.alpha_nf;
  if (r.consecutive_ff_runs == alpha) {
    r.consecutive_ff_runs = 0;
    return LevelEvent{LevelEvent::FFDown, alpha};
  }
  return std::nullopt;
}

Protocol select_protocol(const std::set<NodeId>& ct,
                         const std::map<NodeId, Level>& levels) {
  if (ct.empty()) throw std::invalid_argument("select_protocol: empty participant set");
  Level max = Level::FF;
  for (NodeId n : ct) {
    Level l = levels.at(n);
    if (static_cast<int>(l) > static_cast<int>(max)) max = l;
  }
  switch (max) {
    case Level::FF: return Protocol::FF;
    case Level::CF: return Protocol::CF;
    default: return Protocol::NF;
  }
}

}  // namespace acc
