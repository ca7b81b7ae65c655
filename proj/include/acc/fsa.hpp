#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acc/core.hpp"

namespace acc {

// Exhaustive reachability analysis of the untimed protocol automata:
// which pairs of participant-local states can hold simultaneously, and
// whether the protocol is nonblocking.
enum class FsaLocal : uint8_t { Q = 0, W, TA, TC, A, C, R, Count };

const char* to_string(FsaLocal s);

struct FsaResult {
  Protocol proto = Protocol::FF;
  int n = 0;                                   // participant count
  std::vector<FsaLocal> tracked;               // states appearing for this protocol
  bool matrix[static_cast<int>(FsaLocal::Count)][static_cast<int>(FsaLocal::Count)] = {};
  uint64_t explored = 0;
  bool nonblocking = false;

  bool concurrent(FsaLocal a, FsaLocal b) const {
    return matrix[static_cast<int>(a)][static_cast<int>(b)];
  }
  std::string render() const;  // aligned text table
  Json to_json() const;
};

// proto must be FF or CF; n >= 2.
FsaResult explore_fsa(Protocol proto, int n);

}  // namespace acc
