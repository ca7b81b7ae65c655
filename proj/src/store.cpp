#include "acc/store.hpp"

namespace acc {

TxnBody generate_txn(const Workload& w, const std::vector<NodeId>& shards,
                     const ZipfGen& zipf, std::mt19937_64& rng) {
  int ns = static_cast<int>(shards.size());
  auto shard_of = [&](int64_t key) { return shards[key % ns]; };

  std::set<int64_t> keys;
  bool cross = static_cast<double>(rng() >> 11) * 0x1.0p-53 < w.cross_shard_fraction;
  if (ns == 1) cross = false;

  int64_t first = zipf.sample(rng);
  keys.insert(first);
  while (static_cast<int>(keys.size()) < w.keys_per_txn) {
    int64_t k = zipf.sample(rng);
    if (!cross) {
      // remap onto the first key's shard, preserving popularity rank
      k = (k / ns) * ns + (first % ns);
      if (k >= w.key_space) k -= ns;
    }
    keys.insert(k);
  }
  if (cross) {
    std::set<NodeId> touched;
    for (int64_t k : keys) touched.insert(shard_of(k));
    if (touched.size() < 2) {  // nudge one key onto the neighbouring shard
      int64_t k = *keys.rbegin();
      keys.erase(k);
      keys.insert((k + 1) % w.key_space);
    }
  }

  TxnBody body;
  for (int64_t k : keys) body.writes[shard_of(k)].push_back(k);
  for (auto& [n, ks] : body.writes) std::sort(ks.begin(), ks.end());
  return body;
}

Metrics collect_metrics(const GlobalTrace& trace, SimTime window_begin,
                        SimTime window_end) {
  Metrics m;
  std::vector<double> commit_lat;
  int64_t attempts_total = 0;
  for (const auto& r : trace.recs) {
    if (r.type != TraceRec::ClientReply) continue;
    if (r.t < window_begin || r.t >= window_end) continue;
    if (r.detail == "retry") continue;  // intermediate conflict abort
    m.issued++;
    attempts_total += r.attempt;
    m.retries_hist[r.attempt]++;
    if (r.decision == Decision::Commit) {
      m.committed++;
      commit_lat.push_back(r.latency_ms);
    } else {
      m.aborted_final++;
    }
  }
  double window_s = us_to_ms(window_end - window_begin) / 1000.0;
  if (window_s > 0) m.tps = static_cast<double>(m.committed) / window_s;
  if (!commit_lat.empty()) {
    std::sort(commit_lat.begin(), commit_lat.end());
    size_t rank = static_cast<size_t>(
        std::ceil(0.99 * static_cast<double>(commit_lat.size())));
    m.p99_ms = commit_lat[rank - 1];
  }
  // attempt indices are zero-based, so the sum is already the retry count
  if (m.issued > 0)
    m.retries_mean = static_cast<double>(attempts_total) /
                     static_cast<double>(m.issued);
  m.empty_window = m.issued == 0;
  return m;
}

}  // namespace acc
