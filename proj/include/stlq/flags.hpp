#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stlq/errors.hpp"
#include "stlq/formula.hpp"
#include "stlq/semantics.hpp"

namespace stlq {

// Static per-sub-formula data needed to run flags: the temporal type, the
// instantaneous body, and the window resolution tau (number of samples the
// window spans). tau == 1 windows degenerate to the instantaneous body and
// carry no flag state.
struct flag_slot {
  temporal_op op = temporal_op::eventually;
  bool_expr body;
  int tau = 1;
};

struct flag_schema {
  std::vector<flag_slot> slots;
  double dt = 1.0;

  static flag_schema bind(const stl_formula& formula, double dt) {
    flag_schema schema;
    schema.dt = dt;
    int expected = 1;
    for (const auto& sf : subformulae(formula)) {
      if (sf.index != expected++)
        throw config_error(
            "sub-formula leaves must be numbered 1..n left to right "
            "(parse_stl does this; hand-built formulae must too)");
      schema.slots.push_back(flag_slot{sf.op, sf.body, sub_formula_tau(sf, dt)});
    }
    if (schema.slots.empty()) throw config_error("formula has no sub-formulae");
    return schema;
  }

  int size() const { return static_cast<int>(slots.size()); }

  int tau_max() const {
    int t = 1;
    for (const auto& s : slots) t = t > s.tau ? t : s.tau;
    return t;
  }

  // Distinct flag combinations: product of the per-flag value counts.
  std::uint64_t flag_combinations() const {
    std::uint64_t n = 1;
    for (const auto& s : slots) n *= static_cast<std::uint64_t>(s.tau);
    return n;
  }

  // |augmented state space| = |environment states| * flag_combinations.
  std::uint64_t augmented_state_count(std::uint64_t num_env_states) const {
    return num_env_states * flag_combinations();
  }
};

// One flag per sub-formula, stored as the integer numerator k in
// [0, tau-1]; the nominal value is k / (tau-1). Integer storage keeps the
// f == 0 and f == 1 tests in `sat` exact.
struct flag_vector {
  std::vector<int> k;

  static flag_vector zeros(const flag_schema& schema) {
    flag_vector f;
    f.k.assign(static_cast<std::size_t>(schema.size()), 0);
    return f;
  }

  double value(const flag_schema& schema, int i) const {
    const int tau = schema.slots[static_cast<std::size_t>(i)].tau;
    if (tau <= 1) return 1.0;  // degenerate window, flag unused
    return static_cast<double>(k[static_cast<std::size_t>(i)]) / (tau - 1);
  }

  friend bool operator==(const flag_vector&, const flag_vector&) = default;
};

// Fold one observed sample into the flags. For an eventually-type
// sub-formula the flag snaps to 1 on a hit and otherwise decays by
// 1/(tau-1), saturating at 0; for an always-type it grows by 1/(tau-1)
// on a hit, saturating at 1, and resets to 0 on a miss. The saturation
// bounds are what keeps each flag on its tau-point lattice.
//
// The flags paired with the state at time t are the fold over samples
// 0..t-1: a transition consumes the state being left, and `sat` supplies
// the current sample itself. That convention is the one under which
// sat(state at t) coincides with the Boolean verdict of the sub-formula
// over the window of the last tau samples ending at t.
inline flag_vector update_flags(const flag_vector& flags,
                                std::span<const double> sample,
                                const flag_schema& schema) {
  flag_vector out = flags;
  for (int i = 0; i < schema.size(); ++i) {
    const flag_slot& slot = schema.slots[static_cast<std::size_t>(i)];
    if (slot.tau <= 1) continue;
    int& k = out.k[static_cast<std::size_t>(i)];
    const bool hit = slot.body.holds(sample);
    if (slot.op == temporal_op::eventually)
      k = hit ? slot.tau - 1 : (k > 0 ? k - 1 : 0);
    else
      k = hit ? (k < slot.tau - 1 ? k + 1 : slot.tau - 1) : 0;
  }
  return out;
}

// Running verdict of one sub-formula at the current sample.
//   eventually: satisfied iff the flag is positive or the body holds now;
//   always:     satisfied iff the flag is saturated and the body holds now.
inline int sat_leaf(const flag_schema& schema, const flag_vector& flags,
                    std::span<const double> sample, int slot_index) {
  const flag_slot& slot = schema.slots[static_cast<std::size_t>(slot_index)];
  const bool now = slot.body.holds(sample);
  if (slot.tau <= 1) return now ? 1 : 0;
  const int k = flags.k[static_cast<std::size_t>(slot_index)];
  if (slot.op == temporal_op::eventually) return (k > 0 || now) ? 1 : 0;
  return (k == slot.tau - 1 && now) ? 1 : 0;
}

// Recursive satisfaction over the inner combination: min across
// conjunctions, max across disjunctions, leaves by the rule above.
inline int sat(const flag_schema& schema, const flag_vector& flags,
               std::span<const double> sample, const inner_formula& node) {
  if (node.kind == inner_formula::kind_t::leaf)
    return sat_leaf(schema, flags, sample, node.sub->index - 1);
  const bool conj = node.kind == inner_formula::kind_t::conjunction;
  for (const auto& c : node.children) {
    const int v = sat(schema, flags, sample, c);
    if (conj && v == 0) return 0;
    if (!conj && v == 1) return 1;
  }
  return conj ? 1 : 0;
}

// Reward of an augmented state, two-valued per outer operator. The
// eventually branch is scaled by the constant exp(-beta) so that returns
// stay within double range; a positive constant rescaling leaves every
// greedy policy unchanged.
//   eventually: exp(beta * (sat - 1))   in { exp(-beta), 1 }
//   always:    -exp(-beta * sat)        in { -1, -exp(-beta) }
inline double flag_reward(temporal_op outer, int sat01, double beta) {
  if (beta <= 0.0) throw config_error("beta must be positive");
  return outer == temporal_op::eventually ? std::exp(beta * (sat01 - 1))
                                          : -std::exp(-beta * sat01);
}

// Flags to pair with the last sample of a given length-tau_max prefix:
// the all-zero vector folded over every prefix sample but the last. `sat`
// evaluated at (prefix.back(), result) then matches the window verdicts
// of the sub-formulae over the prefix itself.
inline flag_vector init_flags(const trajectory& prefix,
                              const flag_schema& schema) {
  const auto tau = static_cast<std::size_t>(schema.tau_max());
  if (prefix.size() != tau)
    throw config_error("initial prefix must have exactly tau = " +
                       std::to_string(tau) + " samples, got " +
                       std::to_string(prefix.size()));
  flag_vector f = flag_vector::zeros(schema);
  for (std::size_t t = 0; t + 1 < prefix.size(); ++t)
    f = update_flags(f, prefix.at(t), schema);
  return f;
}

}  // namespace stlq
