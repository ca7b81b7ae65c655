#include "acc/scenario.hpp"

#include <fstream>

namespace acc {

void Scenario::validate() const {
  auto fail = [](const std::string& m) { throw ScenarioError{m}; };
  if (participants < 1) fail("participants must be >= 1");
  if (horizon_ms <= 0) fail("horizon_ms must be positive");
  if (r < 1.0) fail("network buffer parameter r must be >= 1 in scenarios");
  if (link_base_ms <= 0) fail("link base delay must be positive");
  if (workload.clients < 1) fail("at least one client required");
  if (workload.keys_per_txn < 1) fail("keys_per_txn must be >= 1");
  if (workload.key_space < workload.keys_per_txn * (participants + 1))
    fail("key_space too small for the txn size");
  if (workload.cross_shard_fraction < 0 || workload.cross_shard_fraction > 1)
    fail("cross_shard_fraction must lie in [0,1]");
  if (workload.skew < 0) fail("zipf skew must be >= 0");
  if (alpha_cf < 1 || alpha_cf > 256 || alpha_nf < 1 || alpha_nf > 256)
    fail("alpha values must lie in [1,256]");
  if (protocol != "auto" && !protocol_from_string(protocol))
    fail("unknown protocol: " + protocol);

  double tc = effective_crash_timeout();
  double max_extra = 0;
  std::set<NodeId> crash_targets;
  for (const auto& e : failures.entries) {
    if (e.target < 0 || e.target >= node_count()) fail("failure target out of range");
    if (e.tau_ms <= 0) fail("failure tau must be positive");
    if (e.kind == FailureEntry::DelayFail) max_extra = std::max(max_extra, e.extra_ms);
  }
  // Overlapping schedules on one target are rejected.
  {
    auto ivs = failures.expand(ms_to_us(horizon_ms));
    std::map<NodeId, std::vector<FailureInterval>> per;
    for (auto& iv : ivs) per[iv.target].push_back(iv);
    for (auto& [n, v] : per) {
      std::sort(v.begin(), v.end(),
                [](const FailureInterval& a, const FailureInterval& b) { return a.t0 < b.t0; });
      for (size_t i = 1; i < v.size(); ++i)
        if (v[i].t0 < v[i - 1].t1) fail("overlapping failure schedules on one target");
    }
  }
  // Delayed messages must still beat the crash timeout, or timeouts could
  // contradict in-flight decisions.
  double worst_hop = link_base_ms + link_jitter_ms + max_extra;
  if (2 * worst_hop >= tc)
    fail("crash timeout must exceed twice the worst-case link delay (incl. injected)");
  // A decision reached at the end of the vote window plus one worst-case hop
  // must arrive before any waiter's crash timeout can fire.
  double window = (participants >= 2 ? 3.0 : 2.0) * (link_base_ms + link_jitter_ms) * r;
  if (tc <= window + worst_hop - link_base_ms)
    fail("crash timeout too small for the vote window plus worst-case delivery");
  double max_skew = 0;
  for (auto& [n, s] : clock_skew_ms) max_skew = std::max(max_skew, std::abs(s));
  if (max_skew > 0 && failures.entries.empty() && max_skew > link_base_ms * (r - 1))
    fail("clock skew exceeds the window slack; would fake failure detections");
}

Scenario Scenario::from_json(const Json& j) {
  Scenario s;
  try {
    if (!j.contains("seed")) throw ScenarioError{"seed is mandatory"};
    s.seed = j.at("seed").get<uint64_t>();
    s.name = j.value("name", s.name);
    s.participants = j.value("participants", s.participants);
    s.horizon_ms = j.value("horizon_ms", s.horizon_ms);
    if (j.contains("link")) {
      const Json& l = j.at("link");
      s.link_base_ms = l.value("base_ms", s.link_base_ms);
      s.link_jitter_ms = l.value("jitter_ms", s.link_jitter_ms);
      s.r = l.value("r", s.r);
    }
    s.protocol = j.value("protocol", s.protocol);
    auto read_alpha = [&](const char* key, int& out, bool& tuned) {
      if (!j.contains(key)) return;
      const Json& a = j.at(key);
      if (a.is_string()) {
        if (a.get<std::string>() != "tuned")
          throw ScenarioError{std::string(key) + " must be an integer or \"tuned\""};
        tuned = true;
      } else {
        out = a.get<int>();
      }
    };
    read_alpha("alpha_cf", s.alpha_cf, s.tuned_alpha_cf);
    read_alpha("alpha_nf", s.alpha_nf, s.tuned_alpha_nf);
    s.crash_timeout_ms = j.value("crash_timeout_ms", s.crash_timeout_ms);
    s.txn_limit = j.value("txn_limit", s.txn_limit);
    s.forge_decision = j.value("forge_decision", s.forge_decision);
    if (j.contains("workload")) {
      const Json& w = j.at("workload");
      s.workload.clients = w.value("clients", s.workload.clients);
      s.workload.skew = w.value("skew", s.workload.skew);
      s.workload.keys_per_txn = w.value("keys_per_txn", s.workload.keys_per_txn);
      s.workload.cross_shard_fraction =
          w.value("cross_shard_fraction", s.workload.cross_shard_fraction);
      s.workload.key_space = w.value("key_space", s.workload.key_space);
    }
    if (j.contains("failures")) {
      for (const Json& f : j.at("failures")) {
        FailureEntry e;
        std::string kind = f.at("kind").get<std::string>();
        if (kind == "crash")
          e.kind = FailureEntry::CrashFail;
        else if (kind == "delay")
          e.kind = FailureEntry::DelayFail;
        else
          throw ScenarioError{"unknown failure kind: " + kind};
        e.target = f.at("target").get<NodeId>();
        e.tau_ms = f.at("tau_ms").get<double>();
        e.extra_ms = f.value("extra_ms", 0.0);
        e.start_ms = f.value("start_ms", 0.0);
        e.cycles = f.value("cycles", 0);
        s.failures.entries.push_back(e);
      }
    }
    if (j.contains("clock_skew_ms"))
      for (auto& [node, v] : j.at("clock_skew_ms").items())
        s.clock_skew_ms[std::stoi(node)] = v.get<double>();
    if (j.contains("forced_no_nodes"))
      for (const Json& n : j.at("forced_no_nodes")) s.forced_no_nodes.insert(n.get<NodeId>());
  } catch (const Json::exception& e) {
    throw ScenarioError{std::string("scenario parse error: ") + e.what()};
  }
  s.validate();
  return s;
}

Scenario Scenario::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError{"cannot open scenario file: " + path};
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ScenarioError{std::string("scenario JSON error in ") + path + ": " + e.what()};
  }
  return from_json(j);
}

Json Scenario::to_json() const {
  Json failures_json = Json::array();
  for (const auto& e : failures.entries) {
    failures_json.push_back(
        Json{{"kind", e.kind == FailureEntry::CrashFail ? "crash" : "delay"},
             {"target", e.target},
             {"tau_ms", e.tau_ms},
             {"extra_ms", e.extra_ms},
             {"start_ms", e.start_ms},
             {"cycles", e.cycles}});
  }
  return Json{
      {"name", name},
      {"seed", seed},
      {"participants", participants},
      {"horizon_ms", horizon_ms},
      {"link", Json{{"base_ms", link_base_ms}, {"jitter_ms", link_jitter_ms}, {"r", r}}},
      {"protocol", protocol},
      {"alpha_cf", alpha_cf},
      {"alpha_nf", alpha_nf},
      {"crash_timeout_ms", crash_timeout_ms},
      {"txn_limit", txn_limit},
      {"workload",
       Json{{"clients", workload.clients},
            {"skew", workload.skew},
            {"keys_per_txn", workload.keys_per_txn},
            {"cross_shard_fraction", workload.cross_shard_fraction},
            {"key_space", workload.key_space}}},
      {"failures", failures_json}};
}

}  // namespace acc
