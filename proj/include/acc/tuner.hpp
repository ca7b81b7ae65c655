#pragma once

#include <array>
#include <map>
#include <optional>

#include "acc/core.hpp"
#include "acc/levels.hpp"

namespace acc {

// Streak buckets are powers of two up to the downgrade cap.
constexpr int kAlphaCap = 256;
constexpr int kNumBuckets = 9;  // 1,2,4,...,256

inline int bucket_value(int idx) { return 1 << idx; }
inline int bucket_index(int streak) {
  int idx = 0;
  while (bucket_value(idx) < streak && idx < kNumBuckets - 1) ++idx;
  return idx;
}

enum class TuneAction : uint8_t { Wait = 0, Downgrade = 1 };

struct QState {
  Level level = Level::CF;  // CF or NF only
  int bucket = 0;           // index into the power-of-two buckets
  auto operator<=>(const QState&) const = default;
};

struct QTable {
  std::map<std::pair<int, int>, std::array<double, 2>> q;  // (level,bucket) -> [wait,down]

  double get(QState s, TuneAction a) const {
    auto it = q.find({static_cast<int>(s.level), s.bucket});
    if (it == q.end()) return 0.0;
    return it->second[static_cast<int>(a)];
  }
  void set(QState s, TuneAction a, double v) {
    q[{static_cast<int>(s.level), s.bucket}][static_cast<int>(a)] = v;
  }
  TuneAction greedy(QState s) const {
    return get(s, TuneAction::Downgrade) > get(s, TuneAction::Wait)
               ? TuneAction::Downgrade
               : TuneAction::Wait;
  }
  Json to_json() const;
  static QTable from_json(const Json& j);
};

struct TunerConfig {
  double eta = 0.1;       // learning rate
  double gamma = 0.9;     // discount
  double epsilon = 0.1;   // initial exploration, decays over episodes
  int batch_size = 32;    // txns per reward sample
  double budget_s = 5.0;  // wall-clock training budget
};

struct RewardSample {
  Level level = Level::CF;
  double mu = 0;  // committed txns per (virtual) second over the batch
};

// Buffers validated txns; emits a throughput sample per full batch and resets
// on level changes.
class RewardCollector {
 public:
  explicit RewardCollector(int batch_size) : batch_(batch_size) {}

  std::optional<RewardSample> ingest(Level level, bool committed, double clock_ms) {
    if (!started_ || level != level_) {
      reset(level, clock_ms);
      started_ = true;
    }
    count_++;
    if (committed) commits_++;
    if (count_ < batch_) return std::nullopt;
    RewardSample s;
    s.level = level_;
    double elapsed_s = (clock_ms - batch_start_ms_) / 1000.0;
    s.mu = elapsed_s > 0 ? commits_ / elapsed_s : 0.0;
    reset(level, clock_ms);
    return s;
  }

 private:
  void reset(Level level, double clock_ms) {
    level_ = level;
    count_ = 0;
    commits_ = 0;
    batch_start_ms_ = clock_ms;
  }
  int batch_;
  bool started_ = false;
  Level level_ = Level::FF;
  int count_ = 0;
  int commits_ = 0;
  double batch_start_ms_ = 0;
};

// Hook the runtime calls while a tuning session is active: decide() is asked
// at every power-of-two streak boundary whether to downgrade now, on_sample()
// receives one throughput measurement per completed batch.
class TunerDriver {
 public:
  virtual ~TunerDriver() = default;
  virtual TuneAction decide(Level level, int bucket) = 0;
  virtual void on_sample(const RewardSample& s) = 0;
};

inline void qlearn_update(QTable& q, QState s, TuneAction a, double reward,
                          std::optional<QState> s_next, double eta, double gamma) {
  double best_next = 0.0;
  if (s_next) {
    best_next = std::max(q.get(*s_next, TuneAction::Wait),
                         q.get(*s_next, TuneAction::Downgrade));
  }
  double cur = q.get(s, a);
  q.set(s, a, cur + eta * (reward + gamma * best_next - cur));
}

// Smallest streak bucket whose greedy action is Downgrade; cap if none.
inline int extract_alpha(const QTable& q, Level level) {
  for (int b = 0; b < kNumBuckets; ++b)
    if (q.greedy({level, b}) == TuneAction::Downgrade) return bucket_value(b);
  return kAlphaCap;
}

}  // namespace acc
