#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stlq/errors.hpp"
#include "stlq/rng.hpp"

namespace stlq {

// Finite MDP with vector-valued states (partition centroids). Transition
// rows are kept as integer mass over a common per-row denominator so row
// sums are exact by construction and sampling is reproducible.
class mdp {
 public:
  struct row {
    std::uint64_t denom = 1;
    std::vector<std::pair<int, std::uint64_t>> mass;  // (successor, numerator)

    double probability_of(int successor) const {
      for (const auto& [s, n] : mass)
        if (s == successor) return static_cast<double>(n) / static_cast<double>(denom);
      return 0.0;
    }
  };

  mdp(int num_actions, int state_dim)
      : num_actions_(num_actions), state_dim_(state_dim) {
    if (num_actions <= 0) throw config_error("mdp needs at least one action");
  }

  int add_state(std::vector<double> coords) {
    if (static_cast<int>(coords.size()) != state_dim_)
      throw config_error("state dimension mismatch");
    states_.push_back(std::move(coords));
    rows_.resize(states_.size() * static_cast<std::size_t>(num_actions_));
    return static_cast<int>(states_.size()) - 1;
  }

  // Assign the full outgoing distribution of (state, action). Numerators
  // must sum to denom exactly; duplicate successors are merged.
  void set_row(int state, int action,
               std::vector<std::pair<int, std::uint64_t>> mass,
               std::uint64_t denom) {
    std::vector<std::pair<int, std::uint64_t>> merged;
    std::uint64_t total = 0;
    for (const auto& [succ, num] : mass) {
      if (succ < 0 || succ >= num_states())
        throw config_error("transition successor out of range");
      total += num;
      bool found = false;
      for (auto& [s, n] : merged)
        if (s == succ) {
          n += num;
          found = true;
          break;
        }
      if (!found && num > 0) merged.emplace_back(succ, num);
    }
    if (total != denom)
      throw config_error("transition row of state " + std::to_string(state) +
                         " does not sum to 1: " + std::to_string(total) + "/" +
                         std::to_string(denom));
    rows_[row_index(state, action)] = row{denom, std::move(merged)};
  }

  int num_states() const { return static_cast<int>(states_.size()); }
  int num_actions() const { return num_actions_; }
  int state_dim() const { return state_dim_; }

  std::span<const double> state(int s) const { return states_[static_cast<std::size_t>(s)]; }

  const row& transition_row(int state, int action) const {
    return rows_[row_index(state, action)];
  }

  // Draw a successor of (state, action); deterministic given the stream.
  int step(int state, int action, rng_stream& rng) const {
    const row& r = rows_[row_index(state, action)];
    std::uint64_t u = rng.next_below(r.denom);
    for (const auto& [succ, num] : r.mass) {
      if (u < num) return succ;
      u -= num;
    }
    throw error("corrupt transition row");  // unreachable for valid rows
  }

  // States reachable in one step from `state` under any action.
  std::vector<int> successors(int state) const {
    std::vector<int> out;
    for (int a = 0; a < num_actions_; ++a)
      for (const auto& [succ, num] : transition_row(state, a).mass)
        if (num > 0 && std::find(out.begin(), out.end(), succ) == out.end())
          out.push_back(succ);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::size_t row_index(int state, int action) const {
    if (state < 0 || state >= num_states())
      throw config_error("state index out of range");
    if (action < 0 || action >= num_actions_)
      throw config_error("action index out of range");
    return static_cast<std::size_t>(state) * num_actions_ + action;
  }

  int num_actions_;
  int state_dim_;
  std::vector<std::vector<double>> states_;
  std::vector<row> rows_;
};

}  // namespace stlq
