#include "acc/artifacts.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace acc {

std::string metrics_csv(const Metrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%lld,%lld,%lld,%.6f,%.6f,%.6f\n",
                static_cast<long long>(m.issued),
                static_cast<long long>(m.committed),
                static_cast<long long>(m.aborted_final), m.tps, m.p99_ms,
                m.retries_mean);
  return std::string("issued,committed,aborted,tps,p99_ms,retries_mean\n") + buf;
}

Json verdict_json(const Runtime& rt, const SafetyVerdict& v) {
  Metrics m = rt.metrics();
  return Json{{"scenario", rt.scenario().name},
              {"seed", rt.scenario().seed},
              {"protocol", rt.scenario().protocol},
              {"safety", v.to_json()},
              {"metrics",
               Json{{"issued", m.issued},
                    {"committed", m.committed},
                    {"aborted", m.aborted_final},
                    {"tps", m.tps},
                    {"p99_ms", m.p99_ms},
                    {"retries_mean", m.retries_mean}}},
              {"summary", rt.summary()}};
}

SafetyVerdict write_run_artifacts(const Runtime& rt, const std::string& dir) {
  std::filesystem::create_directories(dir);
  rt.trace().write_jsonl(dir + "/trace.jsonl");

  std::ofstream mf(dir + "/metrics.csv", std::ios::binary);
  mf << metrics_csv(rt.metrics());
  mf.close();

  SafetyVerdict v = check_safety(rt.trace(), rt.scenario());
  std::ofstream vf(dir + "/verdict.json", std::ios::binary);
  vf << verdict_json(rt, v).dump(2) << "\n";
  return v;
}

}  // namespace acc
