#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "acc/core.hpp"

namespace acc {

enum class Level : uint8_t { FF = 0, CF = 1, NF = 2 };  // ordered by stringency

inline const char* to_string(Level l) {
  switch (l) {
    case Level::FF: return "ff";
    case Level::CF: return "cf";
    default: return "nf";
  }
}

struct LevelEvent {
  enum Kind { CF, NF, FFDown } kind = CF;
  int alpha = 0;  // FFDown only
};

// Upgrades on detected failures, downgrade after alpha clean runs.
inline Level level_transition(Level l, const LevelEvent& e) {
  switch (e.kind) {
    case LevelEvent::CF:
      return l == Level::FF ? Level::CF : l;
    case LevelEvent::NF:
      return Level::NF;
    case LevelEvent::FFDown:
      return (l == Level::CF || l == Level::NF) ? Level::FF : l;
  }
  return l;
}

struct LevelMachine {
  NodeId node = -1;
  Level level = Level::FF;
  int consecutive_ff_runs = 0;
  int alpha_cf = 8;
  int alpha_nf = 8;
};

enum class TimingClass { InWindow, Late, Silent };

struct DetectionReport {
  std::vector<std::pair<NodeId, LevelEvent>> events;
  std::string rule;  // which detection branch fired
};

// Per-transaction failure detection from the validate-phase result set.
DetectionReport detect_events(Protocol proto, const std::set<NodeId>& ct,
                              const ResultSet& rt,
                              const std::map<NodeId, TimingClass>& timing);

// Counts clean runs; emits the downgrade event after exactly alpha of them.
std::optional<LevelEvent> record_run(LevelMachine& r, bool failure_free);

Protocol select_protocol(const std::set<NodeId>& ct,
                         const std::map<NodeId, Level>& levels);

}  // namespace acc
