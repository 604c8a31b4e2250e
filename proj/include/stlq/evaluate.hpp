#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stlq/errors.hpp"
#include "stlq/flags.hpp"
#include "stlq/mdp.hpp"
#include "stlq/qlearn.hpp"
#include "stlq/rng.hpp"
#include "stlq/semantics.hpp"

namespace stlq {

struct rollout_stats {
  int trials = 0;
  int successes = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t lookups = 0;
  std::uint64_t fallback_lookups = 0;  // policy misses, served default action

  double fallback_rate() const {
    return lookups == 0 ? 0.0
                        : static_cast<double>(fallback_lookups) /
                              static_cast<double>(lookups);
  }
};

// 95% binomial interval: normal approximation, with the exact one-sided
// Clopper-Pearson bound substituted when every trial agreed.
inline std::pair<double, double> binomial_ci95(int successes, int trials) {
  const double n = trials;
  const double p = successes / n;
  if (successes == 0) return {0.0, 1.0 - std::pow(0.025, 1.0 / n)};
  if (successes == trials) return {std::pow(0.025, 1.0 / n), 1.0};
  const double half = 1.959963985 * std::sqrt(p * (1.0 - p) / n);
  return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

// Monte-Carlo satisfaction probability of the frozen policy. The verdict
// of each rollout comes from the offline Boolean semantics on the raw
// trajectory; flags are never consulted. Optional sinks collect the
// trajectories and the per-step running-sat streams for cross-checks.
template <class Env>
rollout_stats estimate_satisfaction(const policy& pol, Env& env,
                                    const stl_formula& formula, int trials,
                                    rng_stream seed,
                                    std::vector<trajectory>* keep_trajectories = nullptr,
                                    std::vector<std::vector<int>>* keep_sat = nullptr) {
  if (trials < 1) throw config_error("need at least one evaluation trial");
  rollout_stats stats;
  stats.trials = trials;
  const int T = env.horizon_steps();
  for (int trial = 0; trial < trials; ++trial) {
    env.reset(seed.split(static_cast<std::uint64_t>(trial)));
    trajectory traj;
    traj.dt = env.dt();
    traj.samples.reserve(static_cast<std::size_t>(T) + 1);
    std::vector<int> sat_stream;
    auto record = [&] {
      auto sp = env.env_sample();
      traj.samples.emplace_back(sp.begin(), sp.end());
      if (keep_sat) sat_stream.push_back(env.sat_now());
    };
    record();
    for (int t = 0; t < T; ++t) {
      auto [action, found] = pol.lookup(env.state_key());
      ++stats.lookups;
      if (!found) ++stats.fallback_lookups;
      env.step(action);
      record();
    }
    stats.successes += eval_bool(formula, traj, 0);
    if (keep_trajectories) keep_trajectories->push_back(std::move(traj));
    if (keep_sat) keep_sat->push_back(std::move(sat_stream));
  }
  stats.p_hat = static_cast<double>(stats.successes) / trials;
  std::tie(stats.ci_low, stats.ci_high) =
      binomial_ci95(stats.successes, trials);
  return stats;
}

// --- explicit flag-augmented model (oracle-sized instances only) ---------

// Fully tabulated flag-augmented MDP. Intended for desk-scale oracles:
// value iteration, exhaustive policy scoring, exact chain probabilities.
struct explicit_fmdp {
  struct transition {
    std::uint32_t to;
    double p;
  };

  flag_schema schema;
  stl_formula formula;
  double beta = 50.0;
  int num_env_states = 0;
  int num_actions = 0;
  std::uint64_t num_states = 0;

  std::vector<double> reward;                         // [state]
  std::vector<int> sat01;                             // [state]
  std::vector<std::vector<std::vector<transition>>> trans;  // [action][state]

  std::uint64_t encode(int env_state, const flag_vector& flags) const {
    std::uint64_t id = static_cast<std::uint64_t>(env_state);
    for (std::size_t i = 0; i < schema.slots.size(); ++i)
      id = id * static_cast<std::uint64_t>(schema.slots[i].tau) +
           static_cast<std::uint64_t>(flags.k[i]);
    return id;
  }

  std::pair<int, flag_vector> decode(std::uint64_t id) const {
    flag_vector f = flag_vector::zeros(schema);
    for (std::size_t i = schema.slots.size(); i-- > 0;) {
      const auto tau = static_cast<std::uint64_t>(schema.slots[i].tau);
      f.k[i] = static_cast<int>(id % tau);
      id /= tau;
    }
    return {static_cast<int>(id), std::move(f)};
  }
};

inline explicit_fmdp build_explicit_fmdp(const mdp& m,
                                         const stl_formula& formula,
                                         double dt, double beta,
                                         std::uint64_t cap = 4096) {
  explicit_fmdp f;
  f.schema = flag_schema::bind(formula, dt);
  f.formula = formula;
  f.beta = beta;
  f.num_env_states = m.num_states();
  f.num_actions = m.num_actions();
  f.num_states = f.schema.augmented_state_count(
      static_cast<std::uint64_t>(m.num_states()));
  if (f.num_states > cap)
    throw resource_error("explicit flag-augmented model needs " +
                         std::to_string(f.num_states) +
                         " states, above the cap of " + std::to_string(cap));

  const auto n = static_cast<std::size_t>(f.num_states);
  f.reward.resize(n);
  f.sat01.resize(n);
  f.trans.assign(static_cast<std::size_t>(f.num_actions),
                 std::vector<std::vector<explicit_fmdp::transition>>(n));

  for (std::uint64_t id = 0; id < f.num_states; ++id) {
    auto [env, flags] = f.decode(id);
    const int s = sat(f.schema, flags, m.state(env), formula.inner);
    f.sat01[static_cast<std::size_t>(id)] = s;
    f.reward[static_cast<std::size_t>(id)] = flag_reward(formula.op, s, beta);
    // Flags advance on the state being left, so every successor of `id`
    // under a given action shares the same flag component.
    const flag_vector next_flags = update_flags(flags, m.state(env), f.schema);
    for (int a = 0; a < f.num_actions; ++a) {
      const auto& row = m.transition_row(env, a);
      auto& out = f.trans[static_cast<std::size_t>(a)][static_cast<std::size_t>(id)];
      out.reserve(row.mass.size());
      for (const auto& [succ, num] : row.mass)
        out.push_back({static_cast<std::uint32_t>(f.encode(succ, next_flags)),
                       static_cast<double>(num) / static_cast<double>(row.denom)});
    }
  }
  return f;
}

// --- finite-horizon value iteration --------------------------------------

struct vi_result {
  // values[t][s]: optimal expected sum_{u=t}^{T} gamma^(u-t) r(s_u).
  // actions[t][s]: maximizing action at time t (t = T has none; stored 0).
  std::vector<std::vector<double>> values;
  std::vector<std::vector<int>> actions;
};

inline vi_result value_iteration(const explicit_fmdp& f, double gamma,
                                 int horizon) {
  if (horizon < 0) throw config_error("horizon must be non-negative");
  const auto n = static_cast<std::size_t>(f.num_states);
  vi_result r;
  r.values.assign(static_cast<std::size_t>(horizon) + 1,
                  std::vector<double>(n, 0.0));
  r.actions.assign(static_cast<std::size_t>(horizon) + 1,
                   std::vector<int>(n, 0));
  r.values[static_cast<std::size_t>(horizon)] = f.reward;
  for (int t = horizon - 1; t >= 0; --t) {
    const auto& next = r.values[static_cast<std::size_t>(t) + 1];
    auto& cur = r.values[static_cast<std::size_t>(t)];
    auto& act = r.actions[static_cast<std::size_t>(t)];
    for (std::size_t s = 0; s < n; ++s) {
      double best = 0.0;
      int best_a = 0;
      for (int a = 0; a < f.num_actions; ++a) {
        double v = 0.0;
        for (const auto& tr : f.trans[static_cast<std::size_t>(a)][s])
          v += tr.p * next[tr.to];
        if (a == 0 || v > best) {
          best = v;
          best_a = a;
        }
      }
      cur[s] = f.reward[s] + gamma * best;
      act[s] = best_a;
    }
  }
  return r;
}

// --- exact scoring of stationary policies ---------------------------------

// Pr[rollout satisfies the formula] under a stationary policy, by forward
// propagation over (augmented state, running verdict) pairs from the given
// start, objective steps t = t_start..horizon. Exact up to rounding.
inline double exact_satisfaction_probability(const explicit_fmdp& f,
                                             std::span<const int> actions,
                                             std::uint64_t start,
                                             int t_start, int horizon) {
  const auto n = static_cast<std::size_t>(f.num_states);
  const bool ever = f.formula.op == temporal_op::eventually;
  // dist[bit][s]: probability of being at s with running verdict bit.
  std::vector<std::vector<double>> dist(2, std::vector<double>(n, 0.0));
  dist[static_cast<std::size_t>(f.sat01[static_cast<std::size_t>(start)])]
      [static_cast<std::size_t>(start)] = 1.0;
  for (int t = t_start; t < horizon; ++t) {
    std::vector<std::vector<double>> next(2, std::vector<double>(n, 0.0));
    for (int bit = 0; bit < 2; ++bit)
      for (std::size_t s = 0; s < n; ++s) {
        const double p = dist[static_cast<std::size_t>(bit)][s];
        if (p == 0.0) continue;
        const int a = actions[s];
        for (const auto& tr : f.trans[static_cast<std::size_t>(a)][s]) {
          const int sat_to = f.sat01[tr.to];
          const int nbit = ever ? (bit | sat_to) : (bit & sat_to);
          next[static_cast<std::size_t>(nbit)][tr.to] += p * tr.p;
        }
      }
    dist = std::move(next);
  }
  double pr = 0.0;
  for (double p : dist[1]) pr += p;
  return pr;
}

// Expected undiscounted objective sum_{t=t_start}^{horizon} r(s_t) under a
// stationary policy, again by exact forward propagation.
inline double exact_surrogate_return(const explicit_fmdp& f,
                                     std::span<const int> actions,
                                     std::uint64_t start, int t_start,
                                     int horizon) {
  const auto n = static_cast<std::size_t>(f.num_states);
  std::vector<double> dist(n, 0.0);
  dist[static_cast<std::size_t>(start)] = 1.0;
  double total = 0.0;
  for (int t = t_start; t <= horizon; ++t) {
    for (std::size_t s = 0; s < n; ++s)
      if (dist[s] != 0.0) total += dist[s] * f.reward[s];
    if (t == horizon) break;
    std::vector<double> next(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const double p = dist[s];
      if (p == 0.0) continue;
      for (const auto& tr : f.trans[static_cast<std::size_t>(actions[s])][s])
        next[tr.to] += p * tr.p;
    }
    dist = std::move(next);
  }
  return total;
}

// Enumerate every deterministic stationary policy (|A|^|states|, guarded)
// and keep the first one maximizing `score`. Feasible only for oracle
// instances; that is the point.
template <class Score>
std::pair<std::vector<int>, double> best_stationary_policy(
    const explicit_fmdp& f, Score&& score) {
  const auto n = static_cast<std::size_t>(f.num_states);
  double combos = std::pow(static_cast<double>(f.num_actions),
                           static_cast<double>(n));
  if (combos > 4.0e6)
    throw resource_error("stationary policy enumeration too large: " +
                         std::to_string(combos) + " policies");
  std::vector<int> assignment(n, 0);
  std::vector<int> best = assignment;
  double best_score = score(std::span<const int>(assignment));
  while (true) {
    // odometer increment
    std::size_t i = 0;
    while (i < n) {
      if (++assignment[i] < f.num_actions) break;
      assignment[i] = 0;
      ++i;
    }
    if (i == n) break;
    const double s = score(std::span<const int>(assignment));
    if (s > best_score) {
      best_score = s;
      best = assignment;
    }
  }
  return {best, best_score};
}

// --- approximation-gap bound ----------------------------------------------

struct bound_report {
  double beta = 0.0;
  int horizon = 0;  // T, in steps
  int tau = 0;
  double gap = 0.0;  // log(T - tau + 2) / beta
};

inline bound_report theorem_gap(double beta, int horizon, int tau) {
  if (beta <= 0.0) throw config_error("beta must be positive");
  if (horizon < tau - 1)
    throw config_error("horizon must be at least tau - 1");
  bound_report r;
  r.beta = beta;
  r.horizon = horizon;
  r.tau = tau;
  r.gap = std::log(static_cast<double>(horizon - tau + 2)) / beta;
  return r;
}

}  // namespace stlq
