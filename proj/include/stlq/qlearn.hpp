#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "stlq/errors.hpp"
#include "stlq/rng.hpp"

namespace stlq {

// Action-value table keyed by opaque state keys. Rows are created lazily
// and filled with the default value, so unseen pairs read as default.
class q_table {
 public:
  explicit q_table(int num_actions, double default_value = 0.0)
      : num_actions_(num_actions), default_value_(default_value) {}

  std::vector<double>& row(std::uint64_t key) {
    auto it = rows_.find(key);
    if (it == rows_.end())
      it = rows_
               .emplace(key, std::vector<double>(
                                 static_cast<std::size_t>(num_actions_),
                                 default_value_))
               .first;
    return it->second;
  }

  const std::vector<double>* find(std::uint64_t key) const {
    auto it = rows_.find(key);
    return it == rows_.end() ? nullptr : &it->second;
  }

  double value(std::uint64_t key, int action) const {
    const auto* r = find(key);
    return r ? (*r)[static_cast<std::size_t>(action)] : default_value_;
  }

  double max_value(std::uint64_t key) const {
    const auto* r = find(key);
    return r ? *std::max_element(r->begin(), r->end()) : default_value_;
  }

  // Ties break toward the lowest action index; unseen rows give action 0.
  int argmax(std::uint64_t key) const {
    const auto* r = find(key);
    if (!r) return 0;
    return static_cast<int>(std::max_element(r->begin(), r->end()) - r->begin());
  }

  int num_actions() const { return num_actions_; }
  double default_value() const { return default_value_; }
  std::size_t visited_rows() const { return rows_.size(); }
  std::size_t entry_count() const {
    return rows_.size() * static_cast<std::size_t>(num_actions_);
  }
  const std::unordered_map<std::uint64_t, std::vector<double>>& rows() const {
    return rows_;
  }

 private:
  int num_actions_;
  double default_value_;
  std::unordered_map<std::uint64_t, std::vector<double>> rows_;
};

// One application of the learning rule
//   Q(s,a) <- (1-alpha) Q(s,a) + alpha [r + gamma max_a' Q(s',a')].
// A disengaged next state marks episode end: the continuation term is 0.
inline void q_update(q_table& q, std::uint64_t state, int action, double reward,
                     std::optional<std::uint64_t> next_state, double alpha,
                     double gamma) {
  const double target =
      reward + (next_state ? gamma * q.max_value(*next_state) : 0.0);
  double& cell = q.row(state)[static_cast<std::size_t>(action)];
  cell = (1.0 - alpha) * cell + alpha * target;
}

// Deterministic state-to-action map; keys never seen during training fall
// back to `default_action` (reported by lookup's second component).
struct policy {
  std::unordered_map<std::uint64_t, int> actions;
  int default_action = 0;

  std::pair<int, bool> lookup(std::uint64_t key) const {
    auto it = actions.find(key);
    if (it == actions.end()) return {default_action, false};
    return {it->second, true};
  }

  int operator()(std::uint64_t key) const { return lookup(key).first; }
};

inline policy greedy_policy(const q_table& q, int default_action = 0) {
  policy p;
  p.default_action = default_action;
  p.actions.reserve(q.visited_rows());
  for (const auto& [key, row] : q.rows())
    p.actions.emplace(key, static_cast<int>(std::max_element(row.begin(),
                                                             row.end()) -
                                            row.begin()));
  return p;
}

struct learn_config {
  int episodes = 2000;
  double beta = 50.0;
  double gamma = 0.9999;
  double alpha_decay = 0.95;  // alpha_k = alpha_decay^k, k = episode (1-based)
  double alpha_floor = 0.05;  // keeps late episodes learning; a floor near
                              // zero freezes the table after ~log(floor)/log(decay) episodes
  double eps_start = 0.0;     // linear decay to eps_end over the first
  double eps_end = 0.0;       // eps_fraction of the episodes, then constant
  double eps_fraction = 0.8;
  int horizon = 0;            // T in steps; 0 = take it from the environment
  std::uint64_t seed = 1;
  // Initial value of unseen table entries. Disengaged = optimistic: just
  // above the best attainable return, so greedy action selection sweeps
  // unseen actions instead of starving on sparse positive rewards.
  std::optional<double> q_init;
  // alpha_k indexed by the pair's own update count instead of the episode.
  // First visits then overwrite the optimistic prior almost entirely.
  bool alpha_per_visit = false;
  // Draw each episode's start state uniformly instead of the configured
  // one. Evaluation always starts at the configured state.
  bool exploring_starts = false;
  // Positive: visit-count bonus c*sqrt(ln N(s) / n(s,a)) added to the
  // greedy comparison (untried actions first), applied before the epsilon
  // coin. Under-sampled actions keep getting re-checked, which plain
  // epsilon-greedy cannot guarantee inside a finite episode budget. Zero
  // switches exploration to the epsilon schedule alone.
  double ucb_c = 0.5;

  void validate() const {
    if (episodes < 0) throw config_error("episodes must be non-negative");
    if (beta <= 0.0) throw config_error("beta must be positive");
    if (gamma <= 0.0 || gamma >= 1.0)
      throw config_error("gamma must lie in (0,1)");
    if (alpha_decay <= 0.0 || alpha_decay > 1.0)
      throw config_error("alpha_decay must lie in (0,1]");
    if (alpha_floor <= 0.0 || alpha_floor > 1.0)
      throw config_error("alpha_floor must lie in (0,1]");
    if (eps_start < 0.0 || eps_start > 1.0 || eps_end < 0.0 || eps_end > 1.0)
      throw config_error("epsilon bounds must lie in [0,1]");
    if (eps_fraction <= 0.0 || eps_fraction > 1.0)
      throw config_error("eps_fraction must lie in (0,1]");
  }

  double alpha_at(int episode) const {
    return std::max(std::pow(alpha_decay, episode), alpha_floor);
  }

  double epsilon_at(int episode) const {
    const int span = std::max(1, static_cast<int>(std::ceil(
                                     eps_fraction * episodes)));
    if (episode >= span) return eps_end;
    if (span == 1) return eps_end;
    const double frac = static_cast<double>(episode - 1) / (span - 1);
    return eps_start + (eps_end - eps_start) * frac;
  }
};

struct training_trace {
  std::vector<double> episode_returns;  // objective summands per episode
};

struct train_result {
  q_table table;
  policy greedy;
  training_trace trace;
};

// Episodic tabular Q-learning over any stepper exposing reset / step /
// state_key / reward / num_actions / warmup_steps / horizon_steps.
//
// Each episode runs t = 0..T. The reward credited at step t is that of
// the state the action is taken from (state-based rewards make it
// action-independent, so greedy policies are unaffected by the crediting
// side). The final step drops the continuation term. The reported return
// is the sum of the objective summands, t = warmup..T.
template <class Env>
train_result train(Env& env, const learn_config& cfg,
                   int default_action = 0) {
  cfg.validate();
  const int T = cfg.horizon > 0 ? cfg.horizon : env.horizon_steps();
  if (T < env.warmup_steps())
    throw config_error("horizon shorter than the formula warmup");

  const double q0 = cfg.q_init.value_or(
      std::max(0.0, (T + 2) * env.reward_upper_bound()));
  q_table q(env.num_actions(), q0);
  training_trace trace;
  trace.episode_returns.reserve(static_cast<std::size_t>(cfg.episodes));
  rng_stream root(cfg.seed);
  const int warmup = env.warmup_steps();
  const int n_actions = env.num_actions();
  std::unordered_map<std::uint64_t, std::uint32_t> visits;

  auto pair_visits = [&](std::uint64_t key, int a) -> std::uint32_t& {
    return visits[key * static_cast<std::uint64_t>(n_actions) +
                  static_cast<std::uint64_t>(a)];
  };
  auto select_greedy = [&](std::uint64_t key) {
    if (cfg.ucb_c <= 0.0) return q.argmax(key);
    std::uint64_t total = 0;
    for (int a = 0; a < n_actions; ++a) total += pair_visits(key, a);
    int best = 0;
    double best_score = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      const std::uint32_t n = pair_visits(key, a);
      if (n == 0) return a;  // untried first, lowest index
      const double score =
          q.value(key, a) +
          cfg.ucb_c * std::sqrt(std::log(static_cast<double>(total)) / n);
      if (a == 0 || score > best_score) {
        best_score = score;
        best = a;
      }
    }
    return best;
  };

  for (int k = 1; k <= cfg.episodes; ++k) {
    const double episode_alpha = cfg.alpha_at(k);
    const double eps = cfg.epsilon_at(k);
    rng_stream episode = root.split(static_cast<std::uint64_t>(k));
    rng_stream explore = episode.split(1);
    if (cfg.exploring_starts)
      env.reset(episode.split(2),
                static_cast<int>(explore.next_below(
                    static_cast<std::uint64_t>(env.env_state_count()))));
    else
      env.reset(episode.split(2));

    double ret = 0.0;
    for (int t = 0; t <= T; ++t) {
      const std::uint64_t key = env.state_key();
      const double r = env.reward();
      if (t >= warmup) ret += r;
      int a;
      if (explore.next_unit() < eps)
        a = static_cast<int>(explore.next_below(
            static_cast<std::uint64_t>(n_actions)));
      else
        a = select_greedy(key);
      double alpha = episode_alpha;
      if (cfg.alpha_per_visit || cfg.ucb_c > 0.0) {
        const std::uint32_t n = ++pair_visits(key, a);
        if (cfg.alpha_per_visit) alpha = cfg.alpha_at(static_cast<int>(n));
      }
      if (t < T) {
        env.step(a);
        q_update(q, key, a, r, env.state_key(), alpha, cfg.gamma);
      } else {
        q_update(q, key, a, r, std::nullopt, alpha, cfg.gamma);
      }
    }
    trace.episode_returns.push_back(ret);
  }
  policy greedy = greedy_policy(q, default_action);
  return {std::move(q), std::move(greedy), std::move(trace)};
}

}  // namespace stlq
