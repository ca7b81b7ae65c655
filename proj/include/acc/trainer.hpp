#pragma once

#include "acc/scenario.hpp"
#include "acc/tuner.hpp"

namespace acc {

struct TuneOutcome {
  QTable q;
  int alpha_cf = kAlphaCap;
  int alpha_nf = kAlphaCap;
  int episodes = 0;
  double seconds = 0;  // wall clock spent

  Json to_json() const;
};

// Trains the downgrade policy by replaying the scenario with fresh seeds until
// the wall-clock budget runs out. The scenario is forced to protocol "auto";
// each episode uses seed base.seed + 1000 * episode.
TuneOutcome train_tuner(const Scenario& base, const TunerConfig& cfg);

}  // namespace acc
