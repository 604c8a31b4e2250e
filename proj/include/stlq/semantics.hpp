#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "stlq/errors.hpp"
#include "stlq/formula.hpp"

namespace stlq {

// Time-sampled signal: environment states at consecutive multiples of dt.
struct trajectory {
  std::vector<std::vector<double>> samples;
  double dt = 1.0;

  std::size_t size() const { return samples.size(); }
  std::span<const double> at(std::size_t t) const { return samples[t]; }
};

// Number of whole sampling steps covered by a window of `window_end` time
// units. A small slack absorbs representation error in window_end / dt.
inline int window_steps(double window_end, double dt) {
  if (dt <= 0.0) throw config_error("sampling period dt must be positive");
  int s = static_cast<int>(std::ceil(window_end / dt - 1e-9));
  return s < 0 ? 0 : s;
}

// Samples needed to resolve one sub-formula window (the flag resolution).
inline int sub_formula_tau(const sub_formula& f, double dt) {
  return window_steps(f.window_end, dt) + 1;
}

namespace detail {
inline void require_samples(const trajectory& traj, int t, int steps,
                            const char* what) {
  if (t < 0 || static_cast<std::size_t>(t) + static_cast<std::size_t>(steps) >=
                   traj.size())
    throw eval_error(std::string("insufficient samples to evaluate ") + what +
                     ": need index " + std::to_string(t + steps) +
                     " but trajectory has " + std::to_string(traj.size()) +
                     " samples");
}
}  // namespace detail

// --- Boolean semantics, {0,1}-valued ------------------------------------
//
// F is a max over the window, G a min; conjunction is min, disjunction max,
// negation flips. Evaluation never truncates: a window that runs past the
// trajectory end raises eval_error.

inline int eval_bool(const bool_expr& e, const trajectory& traj, int t) {
  detail::require_samples(traj, t, 0, "a predicate combination");
  return e.holds(traj.at(static_cast<std::size_t>(t))) ? 1 : 0;
}

inline int eval_bool(const sub_formula& f, const trajectory& traj, int t) {
  const int steps = window_steps(f.window_end, traj.dt);
  detail::require_samples(traj, t, steps, "a sub-formula window");
  const bool want = f.op == temporal_op::eventually;
  for (int u = t; u <= t + steps; ++u)
    if (f.body.holds(traj.at(static_cast<std::size_t>(u))) == want)
      return want ? 1 : 0;
  return want ? 0 : 1;
}

inline int eval_bool(const inner_formula& f, const trajectory& traj, int t) {
  if (f.kind == inner_formula::kind_t::leaf)
    return eval_bool(*f.sub, traj, t);
  // Short-circuiting below must not mask an out-of-range window.
  detail::require_samples(traj, t, window_steps(horizon(f), traj.dt),
                          "a sub-formula combination");
  const bool conj = f.kind == inner_formula::kind_t::conjunction;
  for (const auto& c : f.children) {
    const int v = eval_bool(c, traj, t);
    if (conj && v == 0) return 0;
    if (!conj && v == 1) return 1;
  }
  return conj ? 1 : 0;
}

inline int eval_bool(const stl_formula& f, const trajectory& traj, int t) {
  const int outer_steps = window_steps(f.window_end, traj.dt);
  const int inner_steps = window_steps(horizon(f.inner), traj.dt);
  detail::require_samples(traj, t, outer_steps + inner_steps, "the formula");
  const bool want = f.op == temporal_op::eventually;
  for (int u = t; u <= t + outer_steps; ++u)
    if ((eval_bool(f.inner, traj, u) == 1) == want) return want ? 1 : 0;
  return want ? 0 : 1;
}

}  // namespace stlq
