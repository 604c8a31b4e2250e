#pragma once

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "stlq/errors.hpp"
#include "stlq/formula.hpp"

namespace stlq {
namespace detail {

// Hand-rolled scanner/parser for the three-layer fragment:
//
//   formula  := ("F"|"G") "[" num "," num "]" "(" inner ")"
//   inner    := iand ("|" iand)*          iand := iprim ("&" iprim)*
//   iprim    := "(" inner ")" | ("F"|"G") "[" num "," num "]" "(" bexpr ")"
//   bexpr    := band ("|" band)*          band := bunary ("&" bunary)*
//   bunary   := "!" bunary | "(" bexpr ")" | pred
//   pred     := ("s" digits | "x" | "y") ("<"|">") signed-num
//
// Window lower bounds must be 0; deeper temporal nesting, negated temporal
// operators and bare predicates at the inner level are fragment violations.
class formula_parser {
 public:
  explicit formula_parser(std::string_view text) : text_(text) {}

  stl_formula parse() {
    stl_formula f;
    f.op = parse_temporal_op();
    f.window_end = parse_window();
    expect('(');
    f.inner = parse_inner();
    expect(')');
    skip_ws();
    if (pos_ != text_.size())
      throw parse_error("trailing input after formula", pos_);
    int next_index = 1;
    assign_indices(f.inner, next_index);
    return f;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c))
      throw parse_error(std::string("expected '") + c + "'", pos_);
  }

  // A temporal operator letter followed by a window bracket?
  bool at_temporal() {
    skip_ws();
    if (pos_ >= text_.size()) return false;
    if (text_[pos_] != 'F' && text_[pos_] != 'G') return false;
    std::size_t p = pos_ + 1;
    while (p < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[p])))
      ++p;
    return p < text_.size() && text_[p] == '[';
  }

  temporal_op parse_temporal_op() {
    skip_ws();
    if (pos_ >= text_.size() || (text_[pos_] != 'F' && text_[pos_] != 'G'))
      throw parse_error("expected temporal operator F or G", pos_);
    return text_[pos_++] == 'F' ? temporal_op::eventually
                                : temporal_op::always;
  }

  double parse_number(bool allow_sign) {
    skip_ws();
    std::size_t start = pos_;
    if (allow_sign && pos_ < text_.size() &&
        (text_[pos_] == '-' || text_[pos_] == '+'))
      ++pos_;
    std::size_t digits_start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+'))
        ++pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
    }
    if (pos_ == digits_start) throw parse_error("expected a number", pos_);
    double value = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_)
      throw parse_error("malformed number", start);
    return value;
  }

  // "[a,b]" with a required to be 0.
  double parse_window() {
    expect('[');
    std::size_t lo_pos = pos_;
    double lo = parse_number(false);
    expect(',');
    double hi = parse_number(false);
    expect(']');
    if (lo != 0.0)
      throw fragment_error(
          "window lower bounds other than 0 are not supported (got [" +
          num_to_string(lo) + "," + num_to_string(hi) + "] at position " +
          std::to_string(lo_pos) + ")");
    if (hi < 0.0) throw parse_error("negative window bound", lo_pos);
    return hi;
  }

  inner_formula parse_inner() {
    std::vector<inner_formula> terms{parse_inner_and()};
    while (accept('|')) terms.push_back(parse_inner_and());
    return combine_inner(inner_formula::kind_t::disjunction, std::move(terms));
  }

  inner_formula parse_inner_and() {
    std::vector<inner_formula> terms{parse_inner_primary()};
    while (accept('&')) terms.push_back(parse_inner_primary());
    return combine_inner(inner_formula::kind_t::conjunction, std::move(terms));
  }

  inner_formula parse_inner_primary() {
    if (at_temporal()) {
      sub_formula sf;
      sf.op = parse_temporal_op();
      sf.window_end = parse_window();
      expect('(');
      sf.body = parse_bool();
      expect(')');
      return make_leaf(std::move(sf));
    }
    if (peek() == '!')
      throw fragment_error(
          "negation of a temporal sub-formula is outside the fragment "
          "(negation applies only to predicates)");
    if (accept('(')) {
      inner_formula f = parse_inner();
      expect(')');
      return f;
    }
    if (std::isalpha(static_cast<unsigned char>(peek())))
      throw fragment_error(
          "bare predicate at the sub-formula level is outside the fragment "
          "(wrap it as F[0,0](...) or G[0,0](...))");
    throw parse_error("expected a temporal sub-formula", pos_);
  }

  bool_expr parse_bool() {
    std::vector<bool_expr> terms{parse_bool_and()};
    while (accept('|')) terms.push_back(parse_bool_and());
    return combine_bool(bool_expr::kind_t::disjunction, std::move(terms));
  }

  bool_expr parse_bool_and() {
    std::vector<bool_expr> terms{parse_bool_unary()};
    while (accept('&')) terms.push_back(parse_bool_unary());
    return combine_bool(bool_expr::kind_t::conjunction, std::move(terms));
  }

  bool_expr parse_bool_unary() {
    if (accept('!')) return make_not(parse_bool_unary());
    if (at_temporal())
      throw fragment_error(
          "temporal operator nested inside a sub-formula body is outside "
          "the fragment (at most three layers: top, sub-formulae, "
          "predicates)");
    if (accept('(')) {
      bool_expr e = parse_bool();
      expect(')');
      return e;
    }
    return parse_predicate();
  }

  bool_expr parse_predicate() {
    skip_ws();
    std::size_t start = pos_;
    int signal = -1;
    if (accept('x')) {
      signal = 0;
    } else if (accept('y')) {
      signal = 1;
    } else if (accept('s')) {
      std::size_t d = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      if (pos_ == d) throw parse_error("expected signal index after 's'", pos_);
      signal = std::stoi(std::string(text_.substr(d, pos_ - d)));
    } else {
      throw parse_error("expected a predicate (s<k>, x or y)", start);
    }
    cmp_op op;
    if (accept('<')) {
      op = cmp_op::less;
    } else if (accept('>')) {
      op = cmp_op::greater;
    } else {
      throw parse_error("expected comparison '<' or '>'", pos_);
    }
    double threshold = parse_number(true);
    return make_pred(signal, op, threshold);
  }

  static inner_formula combine_inner(inner_formula::kind_t kind,
                                     std::vector<inner_formula> terms) {
    if (terms.size() == 1) return std::move(terms.front());
    std::vector<inner_formula> flat;
    for (auto& t : terms) {
      if (t.kind == kind)
        for (auto& c : t.children) flat.push_back(std::move(c));
      else
        flat.push_back(std::move(t));
    }
    return make_inner_combo(kind, std::move(flat));
  }

  static bool_expr combine_bool(bool_expr::kind_t kind,
                                std::vector<bool_expr> terms) {
    if (terms.size() == 1) return std::move(terms.front());
    std::vector<bool_expr> flat;
    for (auto& t : terms) {
      if (t.kind == kind)
        for (auto& c : t.children) flat.push_back(std::move(c));
      else
        flat.push_back(std::move(t));
    }
    return make_bool_combo(kind, std::move(flat));
  }

  static void assign_indices(inner_formula& f, int& next) {
    if (f.kind == inner_formula::kind_t::leaf) {
      f.sub->index = next++;
      return;
    }
    for (auto& c : f.children) assign_indices(c, next);
  }
};

}  // namespace detail

inline stl_formula parse_stl(std::string_view text) {
  return detail::formula_parser(text).parse();
}

}  // namespace stlq
