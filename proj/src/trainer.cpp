#include "acc/trainer.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "acc/runtime.hpp"

namespace acc {

namespace {

// One training episode's view of the runtime hooks: epsilon-greedy action
// selection with a one-step delayed value update (the reward for a decision is
// the mean throughput observed until the next decision point).
class Learner : public TunerDriver {
 public:
  Learner(QTable& q, const TunerConfig& cfg, double epsilon, std::mt19937_64& rng)
      : q_(q), cfg_(cfg), epsilon_(epsilon), rng_(rng) {}

  TuneAction decide(Level level, int bucket) override {
    QState s{level, bucket};
    settle(s);
    TuneAction a = q_.greedy(s);
    if (uniform01() < epsilon_)
      a = uniform01() < 0.5 ? TuneAction::Wait : TuneAction::Downgrade;
    pending_ = {s, a};
    return a;
  }

  void on_sample(const RewardSample& s) override {
    mu_sum_ += s.mu;
    mu_count_++;
    last_mu_ = s.mu;
  }

  void finish() { settle(std::nullopt); }

 private:
  void settle(std::optional<QState> s_next) {
    if (pending_) {
      double reward = mu_count_ > 0 ? mu_sum_ / mu_count_ : last_mu_;
      qlearn_update(q_, pending_->first, pending_->second, reward, s_next,
                    cfg_.eta, cfg_.gamma);
    }
    mu_sum_ = 0;
    mu_count_ = 0;
    pending_.reset();
  }

  double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  QTable& q_;
  const TunerConfig& cfg_;
  double epsilon_;
  std::mt19937_64& rng_;
  std::optional<std::pair<QState, TuneAction>> pending_;
  double mu_sum_ = 0;
  int mu_count_ = 0;
  double last_mu_ = 0;
};

}  // namespace

TuneOutcome train_tuner(const Scenario& base, const TunerConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  TuneOutcome out;
  std::mt19937_64 rng(base.seed ^ 0xa02bdbf7bb3c0a7ULL);
  for (int ep = 0;; ++ep) {
    if (ep > 0 && elapsed() >= cfg.budget_s) break;
    Scenario sc = base;
    sc.protocol = "auto";
    sc.seed = base.seed + 1000ULL * static_cast<uint64_t>(ep);
    double eps = cfg.epsilon * std::pow(0.95, ep);
    Learner learner(out.q, cfg, eps, rng);
    Runtime rt(sc, &learner);
    rt.run();
    learner.finish();
    out.episodes++;
  }
  out.alpha_cf = extract_alpha(out.q, Level::CF);
  out.alpha_nf = extract_alpha(out.q, Level::NF);
  out.seconds = elapsed();
  return out;
}

Json TuneOutcome::to_json() const {
  return Json{{"alpha_cf", alpha_cf},
              {"alpha_nf", alpha_nf},
              {"episodes", episodes},
              {"seconds", seconds},
              {"q", q.to_json()}};
}

}  // namespace acc
