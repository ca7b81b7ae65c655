#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "acc/core.hpp"
#include "acc/sim.hpp"

namespace acc {

// Single-version lock table per shard: first writer wins, commit makes the
// version immutable.
struct Shard {
  NodeId node = -1;
  std::map<int64_t, std::pair<int64_t, TxnId>> data;  // key -> (value, writer)
  std::map<int64_t, TxnId> locks;
  std::set<TxnId> applied;

  bool can_lock_all(TxnId txn, const std::vector<int64_t>& keys) const {
    for (int64_t k : keys) {
      auto it = locks.find(k);
      if (it != locks.end() && it->second != txn) return false;
    }
    return true;
  }
  void lock_all(TxnId txn, const std::vector<int64_t>& keys) {
    for (int64_t k : keys) locks[k] = txn;
  }
  void release(TxnId txn, const std::vector<int64_t>& keys) {
    for (int64_t k : keys) {
      auto it = locks.find(k);
      if (it != locks.end() && it->second == txn) locks.erase(it);
    }
  }
  void apply(TxnId txn, const std::vector<int64_t>& keys) {
    for (int64_t k : keys) data[k] = {txn, txn};
    applied.insert(txn);
  }
};

struct Workload {
  int clients = 8;
  double skew = 0.5;
  int keys_per_txn = 4;
  double cross_shard_fraction = 1.0;
  int key_space = 1200;
  double forced_no_rate = 0.0;  // test hook: integrity-style No votes
};

// Zipfian sampler; skew 0 degenerates to uniform.
class ZipfGen {
 public:
  ZipfGen() = default;
  ZipfGen(int n, double s) {
    cdf_.resize(n);
    double acc = 0;
    for (int k = 1; k <= n; ++k) {
      acc += 1.0 / std::pow(static_cast<double>(k), s);
      cdf_[k - 1] = acc;
    }
    for (auto& v : cdf_) v /= acc;
  }
  int sample(std::mt19937_64& rng) const {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<int>(it - cdf_.begin());
  }
  double mass(int k) const {  // probability of the k-th most popular key (0-based)
    return k == 0 ? cdf_[0] : cdf_[k] - cdf_[k - 1];
  }

 private:
  std::vector<double> cdf_;
};

// Draws a txn body over the given shards. Keys map to shards round-robin.
TxnBody generate_txn(const Workload& w, const std::vector<NodeId>& shards,
                     const ZipfGen& zipf, std::mt19937_64& rng);

struct Metrics {
  int64_t issued = 0;
  int64_t committed = 0;
  int64_t aborted_final = 0;
  double tps = 0;
  double p99_ms = 0;
  std::map<int, int64_t> retries_hist;  // final attempt index -> count
  double retries_mean = 0;
  bool empty_window = false;
};

Metrics collect_metrics(const GlobalTrace& trace, SimTime window_begin, SimTime window_end);

}  // namespace acc
