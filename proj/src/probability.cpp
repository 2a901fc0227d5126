#include "cftwin/probability.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "cftwin/error.hpp"

namespace cftwin {

namespace {

boost::multiprecision::cpp_int pow10(long long k) {
  boost::multiprecision::cpp_int r = 1;
  for (long long i = 0; i < k; ++i) r *= 10;
  return r;
}

[[noreturn]] void bad(std::string_view text) {
  throw Error(ErrorKind::Validation, "not a probability literal: '" + std::string(text) + "'");
}

Rational parse_decimal(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
  boost::multiprecision::cpp_int digits = 0;
  long long scale = 0;
  bool any = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    digits = digits * 10 + (text[i++] - '0');
    any = true;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      digits = digits * 10 + (text[i++] - '0');
      ++scale;
      any = true;
    }
  }
  if (!any) bad(text);
  long long exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), exponent);
    if (ec != std::errc() || ptr == text.data() + i) bad(text);
    i = static_cast<std::size_t>(ptr - text.data());
  }
  if (i != text.size()) bad(text);
  exponent -= scale;
  if (std::llabs(exponent) > 400) bad(text);
  Rational r = exponent >= 0 ? Rational(digits * pow10(exponent))
                             : Rational(digits, pow10(-exponent));
  return negative ? Rational(-r) : r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_decimal(text.substr(0, slash));
    Rational den = parse_decimal(text.substr(slash + 1));
    if (den == 0) throw Error(ErrorKind::Validation, "zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  return parse_decimal(text);
}

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw Error(ErrorKind::Validation, "probability must be finite");
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw Error(ErrorKind::Validation, "cannot format probability");
  return parse_decimal(std::string_view(buf.data(), static_cast<std::size_t>(ptr - buf.data())));
}

std::string format_number(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace cftwin
