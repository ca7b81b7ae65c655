#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "acc/core.hpp"
#include "acc/scenario.hpp"
#include "acc/sim.hpp"

namespace acc {

// Post-hoc trace oracle: agreement, vote validity, abort justification and
// termination over one run's global trace.
struct SafetyVerdict {
  int64_t txns = 0;
  int64_t agreement_violations = 0;
  int64_t validity_violations = 0;
  int64_t unexcused_aborts = 0;
  int64_t unterminated = 0;
  std::vector<std::string> details;  // capped human-readable findings

  bool safety_ok() const {
    return agreement_violations == 0 && validity_violations == 0 &&
           unexcused_aborts == 0;
  }
  bool liveness_ok() const { return unterminated == 0; }
  bool ok() const { return safety_ok() && liveness_ok(); }
  Json to_json() const;
};

SafetyVerdict check_safety(const GlobalTrace& trace, const Scenario& sc);

// Message-delay accounting for single-transaction runs under a uniform link
// delay d: how many network hops separate key protocol milestones.
struct DelayCount {
  double coordinator = -1;               // client reply relative to propose send
  std::map<NodeId, double> participant;  // local decision relative to propose receipt
  bool integral = true;                  // all counts are whole multiples of d
};

// Throws std::runtime_error if the trace holds no transaction or d <= 0.
DelayCount count_message_delays(const GlobalTrace& trace, double d_ms,
                                TxnId txn = -1);

}  // namespace acc
