#pragma once

#include <string>

#include "acc/checker.hpp"
#include "acc/runtime.hpp"

namespace acc {

// Canonical run outputs, shared by the CLI and the test suites so the
// byte-stability guarantee covers both.
std::string metrics_csv(const Metrics& m);
Json verdict_json(const Runtime& rt, const SafetyVerdict& v);

// Writes trace.jsonl, metrics.csv and verdict.json into dir (created if
// missing). Returns the safety verdict for exit-code selection.
SafetyVerdict write_run_artifacts(const Runtime& rt, const std::string& dir);

}  // namespace acc
