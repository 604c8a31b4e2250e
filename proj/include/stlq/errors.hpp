#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stlq {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed formula text (unexpected token, unbalanced parens, ...).
struct parse_error : error {
  parse_error(const std::string& what, std::size_t position)
      : error(what + " (at position " + std::to_string(position) + ")"),
        position(position) {}
  std::size_t position;
};

// Text that is syntactically well-formed but outside the supported
// three-layer fragment (nested temporal operators, negated temporal
// operators, nonzero window lower bounds, ...).
struct fragment_error : error {
  using error::error;
};

// A trajectory too short to resolve the formula it is evaluated against.
struct eval_error : error {
  using error::error;
};

// Bad experiment configuration or malformed input file.
struct config_error : error {
  using error::error;
};

// A requested enumeration or explicit model would exceed a configured cap.
struct resource_error : error {
  using error::error;
};

}  // namespace stlq
