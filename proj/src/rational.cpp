#include "nilwalk/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace nilwalk {

double to_double(const Rat& r) { return r.convert_to<double>(); }

namespace {

// cpp_int treats a leading 0 as an octal prefix; strip it.
BigInt parse_bigint(std::string s) {
  bool neg = false;
  size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  while (i + 1 < s.size() && s[i] == '0') ++i;
  BigInt v(s.substr(i));
  return neg ? -v : v;
}

}  // namespace

Rat parse_rational(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    BigInt num = parse_bigint(s.substr(0, slash));
    BigInt den = parse_bigint(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator: " + s);
    return Rat(num, den);
  }
  // Decimal / scientific literal. Split into mantissa and exponent.
  std::string mant = s;
  long expo = 0;
  auto epos = s.find_first_of("eE");
  if (epos != std::string::npos) {
    mant = s.substr(0, epos);
    expo = std::stol(s.substr(epos + 1));
  }
  bool neg = false;
  size_t i = 0;
  if (i < mant.size() && (mant[i] == '+' || mant[i] == '-')) {
    neg = mant[i] == '-';
    ++i;
  }
  std::string digits;
  long frac_digits = 0;
  bool seen_dot = false, seen_digit = false;
  for (; i < mant.size(); ++i) {
    char c = mant[i];
    if (c == '.') {
      if (seen_dot) throw std::invalid_argument("bad rational literal: " + s);
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits += c;
      seen_digit = true;
      if (seen_dot) ++frac_digits;
    } else {
      throw std::invalid_argument("bad rational literal: " + s);
    }
  }
  if (!seen_digit) throw std::invalid_argument("bad rational literal: " + s);
  BigInt num = parse_bigint(digits.empty() ? "0" : digits);
  if (neg) num = -num;
  long net = expo - frac_digits;
  BigInt den = 1;
  if (net >= 0) {
    for (long k = 0; k < net; ++k) num *= 10;
  } else {
    for (long k = 0; k < -net; ++k) den *= 10;
  }
  return Rat(num, den);
}

std::string rational_to_string(const Rat& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace nilwalk
