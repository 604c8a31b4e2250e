#pragma once

#include <cstdint>
#include <vector>

#include "stlq/mdp.hpp"
#include "stlq/rng.hpp"
#include "stlq/semantics.hpp"

namespace stlq {

// Baseline state: the raw window of the last tau environment states.
using tau_state = std::vector<int>;

// Number of feasible length-tau windows (consecutive pairs connected by
// some action), by dynamic programming over walk counts. Cheap even when
// the answer is astronomically large.
inline std::uint64_t count_tau_states(const mdp& m, int tau) {
  if (tau < 1) throw config_error("tau must be at least 1");
  const int n = m.num_states();
  std::vector<std::vector<int>> succ(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) succ[static_cast<std::size_t>(s)] = m.successors(s);
  std::vector<std::uint64_t> ways(static_cast<std::size_t>(n), 1);
  for (int step = 1; step < tau; ++step) {
    std::vector<std::uint64_t> next(static_cast<std::size_t>(n), 0);
    for (int s = 0; s < n; ++s)
      for (int t : succ[static_cast<std::size_t>(s)])
        next[static_cast<std::size_t>(t)] += ways[static_cast<std::size_t>(s)];
    ways = std::move(next);
  }
  std::uint64_t total = 0;
  for (auto w : ways) total += w;
  return total;
}

// Materialize the feasible windows. The count is checked first so a
// hopeless tau fails fast with resource_error instead of exhausting
// memory.
inline std::vector<tau_state> enumerate_tau_states(const mdp& m, int tau,
                                                   std::uint64_t cap) {
  const std::uint64_t count = count_tau_states(m, tau);
  if (count > cap)
    throw resource_error("tau-MDP state enumeration needs " +
                         std::to_string(count) + " windows, above the cap of " +
                         std::to_string(cap) +
                         " (raise tau_state_cap to force it)");
  const int n = m.num_states();
  std::vector<std::vector<int>> succ(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) succ[static_cast<std::size_t>(s)] = m.successors(s);

  std::vector<tau_state> out;
  out.reserve(static_cast<std::size_t>(count));
  tau_state window(static_cast<std::size_t>(tau));
  auto extend = [&](auto&& self, int depth) -> void {
    if (depth == tau) {
      out.push_back(window);
      return;
    }
    for (int t : succ[static_cast<std::size_t>(window[static_cast<std::size_t>(depth) - 1])]) {
      window[static_cast<std::size_t>(depth)] = t;
      self(self, depth + 1);
    }
  };
  for (int s = 0; s < n; ++s) {
    window[0] = s;
    extend(extend, 1);
  }
  return out;
}

// Window verdict of the inner combination, evaluated at the window start,
// then the same two-valued reward branching as the flag formulation.
inline int tau_window_verdict(const mdp& m, const tau_state& window,
                              const stl_formula& formula, double dt) {
  trajectory traj;
  traj.dt = dt;
  traj.samples.reserve(window.size());
  for (int s : window) {
    auto sp = m.state(s);
    traj.samples.emplace_back(sp.begin(), sp.end());
  }
  return eval_bool(formula.inner, traj, 0);
}

inline double tau_reward(const mdp& m, const tau_state& window,
                         const stl_formula& formula, double dt, double beta) {
  return flag_reward(formula.op, tau_window_verdict(m, window, formula, dt),
                     beta);
}

// Episodic stepper over raw windows, mirroring fmdp_env's interface. The
// initial window is the start state repeated; each step shifts the window
// left and appends the sampled successor.
class tau_env {
 public:
  tau_env(const mdp& m, stl_formula formula, double dt, int start_state,
          double beta)
      : m_(&m),
        formula_(std::move(formula)),
        dt_(dt),
        tau_(window_steps(horizon(formula_.inner), dt) + 1),
        start_(start_state),
        beta_(beta),
        rng_(0) {
    if (start_state < 0 || start_state >= m.num_states())
      throw config_error("start state outside the environment");
    // State keys pack the window in base |states|; that must fit in 64 bits.
    double key_bits = tau_ * std::log2(static_cast<double>(m.num_states()));
    if (key_bits >= 64.0)
      throw resource_error("tau window keys would overflow 64 bits");
    scratch_.dt = dt;
    scratch_.samples.assign(static_cast<std::size_t>(tau_),
                            std::vector<double>(static_cast<std::size_t>(m.state_dim())));
    reset(rng_stream(0));
  }

  void reset(rng_stream stream) { reset(stream, start_); }

  void reset(rng_stream stream, int start_state) {
    if (start_state < 0 || start_state >= m_->num_states())
      throw config_error("start state outside the environment");
    rng_ = stream;
    window_.assign(static_cast<std::size_t>(tau_), start_state);
  }

  void step(int action) {
    const int next = m_->step(window_.back(), action, rng_);
    for (std::size_t i = 0; i + 1 < window_.size(); ++i)
      window_[i] = window_[i + 1];
    window_.back() = next;
  }

  int sat_now() const {
    for (std::size_t i = 0; i < window_.size(); ++i) {
      auto sp = m_->state(window_[i]);
      scratch_.samples[i].assign(sp.begin(), sp.end());
    }
    return eval_bool(formula_.inner, scratch_, 0);
  }

  double reward() const { return flag_reward(formula_.op, sat_now(), beta_); }
  double reward_upper_bound() const { return flag_reward(formula_.op, 1, beta_); }

  std::uint64_t state_key() const {
    std::uint64_t key = 0;
    for (int s : window_)
      key = key * static_cast<std::uint64_t>(m_->num_states()) +
            static_cast<std::uint64_t>(s);
    return key;
  }

  int num_actions() const { return m_->num_actions(); }
  int env_state_count() const { return m_->num_states(); }
  int warmup_steps() const { return tau_ - 1; }
  int horizon_steps() const {
    return window_steps(formula_.window_end, dt_) + warmup_steps();
  }

  std::span<const double> env_sample() const { return m_->state(window_.back()); }
  double dt() const { return dt_; }
  int env_state() const { return window_.back(); }
  const tau_state& window() const { return window_; }
  int tau() const { return tau_; }

 private:
  const mdp* m_;
  stl_formula formula_;
  double dt_;
  int tau_;
  int start_;
  double beta_;
  tau_state window_;
  rng_stream rng_;
  mutable trajectory scratch_;
};

}  // namespace stlq
