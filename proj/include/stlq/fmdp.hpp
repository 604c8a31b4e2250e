#pragma once

#include <cstdint>

#include "stlq/flags.hpp"
#include "stlq/mdp.hpp"
#include "stlq/rng.hpp"
#include "stlq/semantics.hpp"

namespace stlq {

// Episodic stepper over the flag-augmented state (environment state plus
// one flag per sub-formula). The learner sees only state keys, rewards and
// the action count; the underlying transition rows stay hidden.
//
// Episodes start at the configured cell with all-zero flags and act from
// t = 0; each step folds the departing environment state into the flags.
class fmdp_env {
 public:
  fmdp_env(const mdp& m, stl_formula formula, double dt, int start_state,
           double beta)
      : m_(&m),
        formula_(std::move(formula)),
        schema_(flag_schema::bind(formula_, dt)),
        start_(start_state),
        beta_(beta),
        cur_(start_state),
        flags_(flag_vector::zeros(schema_)),
        rng_(0) {
    if (start_state < 0 || start_state >= m.num_states())
      throw config_error("start state outside the environment");
  }

  void reset(rng_stream stream) { reset(stream, start_); }

  void reset(rng_stream stream, int start_state) {
    if (start_state < 0 || start_state >= m_->num_states())
      throw config_error("start state outside the environment");
    rng_ = stream;
    cur_ = start_state;
    flags_ = flag_vector::zeros(schema_);
  }

  void step(int action) {
    flags_ = update_flags(flags_, m_->state(cur_), schema_);
    cur_ = m_->step(cur_, action, rng_);
  }

  int sat_now() const {
    return sat(schema_, flags_, m_->state(cur_), formula_.inner);
  }

  double reward() const { return flag_reward(formula_.op, sat_now(), beta_); }
  double reward_upper_bound() const { return flag_reward(formula_.op, 1, beta_); }

  std::uint64_t state_key() const {
    std::uint64_t key = static_cast<std::uint64_t>(cur_);
    for (std::size_t i = 0; i < schema_.slots.size(); ++i)
      key = key * static_cast<std::uint64_t>(schema_.slots[i].tau) +
            static_cast<std::uint64_t>(flags_.k[i]);
    return key;
  }

  std::uint64_t key_count() const {
    return schema_.augmented_state_count(
        static_cast<std::uint64_t>(m_->num_states()));
  }

  int num_actions() const { return m_->num_actions(); }
  int env_state_count() const { return m_->num_states(); }
  int warmup_steps() const { return schema_.tau_max() - 1; }
  int horizon_steps() const {
    return window_steps(formula_.window_end, schema_.dt) + warmup_steps();
  }

  std::span<const double> env_sample() const { return m_->state(cur_); }
  double dt() const { return schema_.dt; }
  int env_state() const { return cur_; }
  const flag_vector& flags() const { return flags_; }
  const flag_schema& schema() const { return schema_; }
  const stl_formula& formula() const { return formula_; }
  double beta() const { return beta_; }

 private:
  const mdp* m_;
  stl_formula formula_;
  flag_schema schema_;
  int start_;
  double beta_;
  int cur_;
  flag_vector flags_;
  rng_stream rng_;
};

}  // namespace stlq
