#pragma once

#include <algorithm>
#include <charconv>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stlq/errors.hpp"

namespace stlq {

enum class cmp_op { less, greater };
enum class temporal_op { eventually, always };  // F / G

// Atomic predicate over one coordinate of the signal: s<k> OP threshold.
struct predicate {
  int signal = 0;
  cmp_op op = cmp_op::less;
  double threshold = 0.0;

  bool holds(std::span<const double> sample) const {
    if (signal < 0 || static_cast<std::size_t>(signal) >= sample.size())
      throw eval_error("predicate refers to signal s" + std::to_string(signal) +
                       " but the sample has dimension " +
                       std::to_string(sample.size()));
    const double v = sample[static_cast<std::size_t>(signal)];
    return op == cmp_op::less ? v < threshold : v > threshold;
  }

  friend bool operator==(const predicate&, const predicate&) = default;
};

// Boolean combination of predicates (the innermost grammar layer).
// Conjunctions and disjunctions are stored flattened (n-ary, left to right).
struct bool_expr {
  enum class kind_t { pred, negation, conjunction, disjunction };

  kind_t kind = kind_t::pred;
  predicate pred;
  std::vector<bool_expr> children;  // negation: 1, and/or: >= 2

  bool holds(std::span<const double> sample) const {
    switch (kind) {
      case kind_t::pred:
        return pred.holds(sample);
      case kind_t::negation:
        return !children.front().holds(sample);
      case kind_t::conjunction:
        return std::all_of(children.begin(), children.end(),
                           [&](const bool_expr& c) { return c.holds(sample); });
      case kind_t::disjunction:
        return std::any_of(children.begin(), children.end(),
                           [&](const bool_expr& c) { return c.holds(sample); });
    }
    return false;
  }

  friend bool operator==(const bool_expr&, const bool_expr&) = default;
};

inline bool_expr make_pred(int signal, cmp_op op, double threshold) {
  bool_expr e;
  e.kind = bool_expr::kind_t::pred;
  e.pred = predicate{signal, op, threshold};
  return e;
}

inline bool_expr make_not(bool_expr inner) {
  bool_expr e;
  e.kind = bool_expr::kind_t::negation;
  e.children.push_back(std::move(inner));
  return e;
}

inline bool_expr make_bool_combo(bool_expr::kind_t kind,
                                 std::vector<bool_expr> children) {
  bool_expr e;
  e.kind = kind;
  e.children = std::move(children);
  return e;
}

// One temporally bounded block F_[0,h](body) or G_[0,h](body); the unit
// tracked by a single flag. `index` is its 1-based left-to-right position.
struct sub_formula {
  temporal_op op = temporal_op::eventually;
  double window_end = 0.0;
  bool_expr body;
  int index = 0;

  friend bool operator==(const sub_formula&, const sub_formula&) = default;
};

// Conjunction/disjunction tree whose leaves are sub-formulae.
struct inner_formula {
  enum class kind_t { leaf, conjunction, disjunction };

  kind_t kind = kind_t::leaf;
  std::optional<sub_formula> sub;    // engaged iff kind == leaf
  std::vector<inner_formula> children;

  friend bool operator==(const inner_formula&, const inner_formula&) = default;
};

inline inner_formula make_leaf(sub_formula sub) {
  inner_formula f;
  f.kind = inner_formula::kind_t::leaf;
  f.sub = std::move(sub);
  return f;
}

inline inner_formula make_inner_combo(inner_formula::kind_t kind,
                                      std::vector<inner_formula> children) {
  inner_formula f;
  f.kind = kind;
  f.children = std::move(children);
  return f;
}

// Top-level specification: one outer F/G over [0, window_end] applied to
// the inner combination of sub-formulae.
struct stl_formula {
  temporal_op op = temporal_op::eventually;
  double window_end = 0.0;
  inner_formula inner;

  friend bool operator==(const stl_formula&, const stl_formula&) = default;
};

// --- horizon -----------------------------------------------------------
//
// hrz(predicate combo) = 0; hrz(F/G_[0,b] body) = b; and/or take the max;
// the top level adds its own window to the inner horizon. Time units.

inline double horizon(const bool_expr&) { return 0.0; }

inline double horizon(const sub_formula& f) { return f.window_end; }

inline double horizon(const inner_formula& f) {
  if (f.kind == inner_formula::kind_t::leaf) return horizon(*f.sub);
  double h = 0.0;
  for (const auto& c : f.children) h = std::max(h, horizon(c));
  return h;
}

inline double horizon(const stl_formula& f) {
  return f.window_end + horizon(f.inner);
}

// --- leaf collection ----------------------------------------------------

inline void collect_subformulae(const inner_formula& f,
                                std::vector<sub_formula>& out) {
  if (f.kind == inner_formula::kind_t::leaf) {
    out.push_back(*f.sub);
    return;
  }
  for (const auto& c : f.children) collect_subformulae(c, out);
}

// Leaves in left-to-right order; their `index` fields run 1..n.
inline std::vector<sub_formula> subformulae(const stl_formula& f) {
  std::vector<sub_formula> out;
  collect_subformulae(f.inner, out);
  return out;
}

// --- canonical printing --------------------------------------------------

inline std::string num_to_string(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string to_string(const predicate& p) {
  return "s" + std::to_string(p.signal) +
         (p.op == cmp_op::less ? " < " : " > ") + num_to_string(p.threshold);
}

inline std::string to_string(const bool_expr& e) {
  auto wrap = [](const bool_expr& c, bool_expr::kind_t parent) {
    // Parenthesize a disjunction under a conjunction, and any combination
    // under a negation; predicates never need parens.
    const bool needs =
        (parent == bool_expr::kind_t::conjunction &&
         c.kind == bool_expr::kind_t::disjunction) ||
        (parent == bool_expr::kind_t::negation &&
         c.kind != bool_expr::kind_t::pred &&
         c.kind != bool_expr::kind_t::negation);
    return needs ? "(" + to_string(c) + ")" : to_string(c);
  };
  switch (e.kind) {
    case bool_expr::kind_t::pred:
      return to_string(e.pred);
    case bool_expr::kind_t::negation:
      return "!" + wrap(e.children.front(), e.kind);
    case bool_expr::kind_t::conjunction:
    case bool_expr::kind_t::disjunction: {
      const char* sep = e.kind == bool_expr::kind_t::conjunction ? " & " : " | ";
      std::string out;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += sep;
        out += wrap(e.children[i], e.kind);
      }
      return out;
    }
  }
  return {};
}

inline std::string to_string(const sub_formula& f) {
  return std::string(f.op == temporal_op::eventually ? "F" : "G") + "[0," +
         num_to_string(f.window_end) + "](" + to_string(f.body) + ")";
}

inline std::string to_string(const inner_formula& f) {
  if (f.kind == inner_formula::kind_t::leaf) return to_string(*f.sub);
  const char* sep =
      f.kind == inner_formula::kind_t::conjunction ? " & " : " | ";
  std::string out;
  for (std::size_t i = 0; i < f.children.size(); ++i) {
    const auto& c = f.children[i];
    const bool needs = c.kind != inner_formula::kind_t::leaf;
    if (i) out += sep;
    out += needs ? "(" + to_string(c) + ")" : to_string(c);
  }
  return out;
}

inline std::string to_string(const stl_formula& f) {
  return std::string(f.op == temporal_op::eventually ? "F" : "G") + "[0," +
         num_to_string(f.window_end) + "](" + to_string(f.inner) + ")";
}

}  // namespace stlq
