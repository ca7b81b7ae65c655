#pragma once

#include <optional>
#include <set>
#include <string>

#include "acc/core.hpp"
#include "acc/delay.hpp"
#include "acc/sim.hpp"
#include "acc/store.hpp"

namespace acc {

struct ScenarioError {
  std::string message;
};

struct Scenario {
  std::string name = "scenario";
  uint64_t seed = 0;
  int participants = 3;  // node 0 is the coordinator
  double horizon_ms = 2000;

  double link_base_ms = 10;
  double link_jitter_ms = 0;
  double r = 1.0;

  std::string protocol = "auto";  // or ff|cf|nf|2pc
  int alpha_cf = 8;
  int alpha_nf = 8;
  bool tuned_alpha_cf = false;  // "tuned" in the file: resolved from a q-table
  bool tuned_alpha_nf = false;
  double crash_timeout_ms = 0;  // 0: derive 10 x max pairwise U

  Workload workload;
  FailureSchedule failures;
  std::map<NodeId, double> clock_skew_ms;
  std::set<NodeId> forced_no_nodes;  // test hook: these shards always vote No
  int txn_limit = 0;                 // 0 = unbounded
  bool forge_decision = false;       // test hook: plant an agreement violation

  int node_count() const { return participants + 1; }
  NodeId coordinator() const { return 0; }
  std::vector<NodeId> shard_nodes() const {
    std::vector<NodeId> v;
    for (NodeId n = 1; n <= participants; ++n) v.push_back(n);
    return v;
  }

  DelayMatrix delay_matrix() const {
    DelayMatrix m;
    m.r = r;
    double sigma = link_base_ms + link_jitter_ms;  // max observed one-way delay
    for (NodeId a = 0; a < node_count(); ++a)
      for (NodeId b = a + 1; b < node_count(); ++b) m.set(a, b, sigma);
    return m;
  }

  double effective_crash_timeout() const {
    if (crash_timeout_ms > 0) return crash_timeout_ms;
    return 10.0 * (link_base_ms + link_jitter_ms) * r;
  }

  // Throws ScenarioError on invalid configuration.
  void validate() const;

  static Scenario from_json(const Json& j);  // throws ScenarioError
  static Scenario from_file(const std::string& path);
  Json to_json() const;
};

}  // namespace acc
