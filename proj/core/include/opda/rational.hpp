#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace opda {

// Exact rational arithmetic for acceptance probabilities.  No floating
// point anywhere on probability paths.
using Rational = boost::multiprecision::cpp_rational;

inline std::string rational_str(const Rational& r) {
  return r.str();  // "p/q", or "p" when the denominator is 1
}

Rational parse_rational(const std::string& text);

}  // namespace opda
