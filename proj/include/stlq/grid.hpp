#pragma once

#include <array>
#include <cmath>
#include <string>

#include "stlq/errors.hpp"
#include "stlq/mdp.hpp"

namespace stlq {

// The nine motion primitives. Order fixes action indices everywhere
// (argmax tie-breaking picks the lowest index; `stay` is the fallback).
enum grid_action : int {
  act_n = 0,
  act_nw,
  act_w,
  act_sw,
  act_s,
  act_se,
  act_e,
  act_ne,
  act_stay,
  grid_action_count
};

inline const char* grid_action_name(int a) {
  static constexpr std::array<const char*, 9> names{
      "N", "NW", "W", "SW", "S", "SE", "E", "NE", "stay"};
  return a >= 0 && a < 9 ? names[static_cast<std::size_t>(a)] : "?";
}

struct grid_spec {
  int width = 6;
  int height = 6;
  // Chosen primitive lands as intended with p_intended, on each of the two
  // 45-degree neighbour primitives with p_side; the remaining mass stays
  // put. Mass of moves that would leave the grid also folds onto the
  // current cell. `stay` itself is noise-free.
  double p_intended = 0.93;
  double p_side = 0.023;
};

namespace detail {

inline std::pair<int, int> action_delta(int a) {
  switch (a) {
    case act_n:  return {0, 1};
    case act_nw: return {-1, 1};
    case act_w:  return {-1, 0};
    case act_sw: return {-1, -1};
    case act_s:  return {0, -1};
    case act_se: return {1, -1};
    case act_e:  return {1, 0};
    case act_ne: return {1, 1};
    default:     return {0, 0};
  }
}

// Compass ring in clockwise order; the two noise outcomes of a primitive
// are its ring neighbours.
inline std::array<int, 2> side_actions(int a) {
  static constexpr std::array<int, 8> ring{act_n,  act_ne, act_e,  act_se,
                                           act_s,  act_sw, act_w,  act_nw};
  for (std::size_t i = 0; i < ring.size(); ++i)
    if (ring[i] == a)
      return {ring[(i + 1) % 8], ring[(i + 7) % 8]};
  throw config_error("side_actions called on a non-move action");
}

}  // namespace detail

// Grid cells at centroids (i + 0.5, j + 0.5); state index j * width + i.
inline int grid_cell_index(const grid_spec& g, int i, int j) {
  if (i < 0 || i >= g.width || j < 0 || j >= g.height)
    throw config_error("cell (" + std::to_string(i) + "," + std::to_string(j) +
                       ") outside the " + std::to_string(g.width) + "x" +
                       std::to_string(g.height) + " grid");
  return j * g.width + i;
}

inline mdp build_grid(const grid_spec& g) {
  if (g.width < 1 || g.height < 1)
    throw config_error("grid must be at least 1x1");
  constexpr std::uint64_t denom = 1'000'000;
  const auto n_int = static_cast<std::uint64_t>(std::llround(g.p_intended * denom));
  const auto n_side = static_cast<std::uint64_t>(std::llround(g.p_side * denom));
  if (n_int + 2 * n_side > denom)
    throw config_error("p_intended + 2*p_side exceeds 1");
  const std::uint64_t n_stay = denom - n_int - 2 * n_side;

  mdp m(grid_action_count, 2);
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i)
      m.add_state({i + 0.5, j + 0.5});

  auto target = [&](int i, int j, int a) {
    auto [di, dj] = detail::action_delta(a);
    int ti = i + di, tj = j + dj;
    if (ti < 0 || ti >= g.width || tj < 0 || tj >= g.height)
      return grid_cell_index(g, i, j);  // infeasible move folds to self
    return grid_cell_index(g, ti, tj);
  };

  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      const int self = grid_cell_index(g, i, j);
      for (int a = 0; a < grid_action_count; ++a) {
        std::vector<std::pair<int, std::uint64_t>> mass;
        if (a == act_stay) {
          mass.emplace_back(self, denom);
        } else {
          auto sides = detail::side_actions(a);
          mass.emplace_back(target(i, j, a), n_int);
          mass.emplace_back(target(i, j, sides[0]), n_side);
          mass.emplace_back(target(i, j, sides[1]), n_side);
          mass.emplace_back(self, n_stay);
        }
        m.set_row(self, a, std::move(mass), denom);
      }
    }
  }
  return m;
}

}  // namespace stlq
