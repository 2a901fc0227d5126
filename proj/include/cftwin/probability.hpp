#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <string_view>

namespace cftwin {

using Rational = boost::multiprecision::cpp_rational;

/// Accepts "p/q", plain decimals and scientific notation ("0.25", "1e-3").
/// Throws Error(Validation) on anything else.
Rational parse_rational(std::string_view text);

/// Exact rational for the shortest decimal that round-trips `x`, so 0.1
/// becomes 1/10 rather than the nearest binary fraction.
Rational rational_from_double(double x);

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string to_string(const Rational& r);

/// Shortest decimal that round-trips `x`; used for all text output.
std::string format_number(double x);

/// A probability carried in both representations: `exact` drives the exact
/// enumeration mode, `value` the double-precision mode.
struct Probability {
  Rational exact;
  double value = 0.0;

  Probability() = default;
  explicit Probability(Rational r) : exact(std::move(r)), value(to_double(exact)) {}
  static Probability from_double(double x) { return Probability(rational_from_double(x)); }
  static Probability one() { return Probability(Rational(1)); }
  static Probability zero() { return Probability(Rational(0)); }

  bool is_zero() const { return exact == 0; }
};

/// Number-type dispatch for the templated enumeration engine.
template <class P>
const P& pick(const Probability& p);

template <>
inline const Rational& pick<Rational>(const Probability& p) {
  return p.exact;
}

template <>
inline const double& pick<double>(const Probability& p) {
  return p.value;
}

}  // namespace cftwin
