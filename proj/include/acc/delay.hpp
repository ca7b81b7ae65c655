#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

#include "acc/core.hpp"

namespace acc {

// Maximum observed ping delays and the network buffer parameter r.
// U(x,y) = sigma(x,y) * r is the delay upper bound used for all timeout windows.
struct DelayMatrix {
  std::map<std::pair<NodeId, NodeId>, double> sigma;  // ms, symmetric, sigma(x,x)=0
  double r = 1.0;

  void set(NodeId a, NodeId b, double ms) {
    sigma[{a, b}] = ms;
    sigma[{b, a}] = ms;
  }
  double get_sigma(NodeId a, NodeId b) const {
    if (a == b) return 0.0;
    auto it = sigma.find({a, b});
    if (it == sigma.end()) throw std::out_of_range("unknown node pair in delay matrix");
    return it->second;
  }
};

inline double delay_upper_bound(NodeId x, NodeId y, const DelayMatrix& m) {
  if (x == y) return 0.0;
  return m.get_sigma(x, y) * m.r;
}

// Max over ordered pairs (i, j) in ct x ct, including i == j, of
// U(C*, i) + U(i, j) + U(j, C*).
inline double coordinator_window(NodeId cstar, const std::set<NodeId>& ct,
                                 const DelayMatrix& m) {
  if (ct.empty()) throw std::invalid_argument("coordinator_window: empty participant set");
  double best = 0.0;
  for (NodeId i : ct)
    for (NodeId j : ct)
      best = std::max(best, delay_upper_bound(cstar, i, m) + delay_upper_bound(i, j, m) +
                                delay_upper_bound(j, cstar, m));
  return best;
}

// Max over j in ct of t_sent + U(C*, j) + U(j, i) - t_recv, clamped at 0.
// Negative values are legal under clock skew and just force the undecided path.
inline double participant_window(NodeId i, double t_sent, double t_recv, NodeId cstar,
                                 const std::set<NodeId>& ct, const DelayMatrix& m) {
  double best = 0.0;
  for (NodeId j : ct)
    best = std::max(best, t_sent + delay_upper_bound(cstar, j, m) +
                              delay_upper_bound(j, i, m) - t_recv);
  return std::max(best, 0.0);
}

struct TimeoutBundle {
  double w_coordinator = 0;             // ms
  std::map<NodeId, double> w_participant;
  double crash_timeout = 0;             // must exceed every network window
  double network_timeout_basis = 0;     // max pairwise U
};

inline double max_pairwise_u(const std::set<NodeId>& nodes, const DelayMatrix& m) {
  double best = 0.0;
  for (NodeId a : nodes)
    for (NodeId b : nodes)
      best = std::max(best, delay_upper_bound(a, b, m));
  return best;
}

}  // namespace acc
