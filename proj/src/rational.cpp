#include "hypolab/rational.hpp"

#include <cctype>
#include <cstdlib>

#include "hypolab/errors.hpp"

namespace hypolab {

std::string rational_to_string(const Rational& q) {
  std::string s = q.get_str();
  return s;
}

// Decimal strings are exact rationals: a.b * 10^e = (a*10^k + b) / 10^(k-e).
Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw ConfigError("empty numeric literal");

  auto slash = s.find('/');
  if (slash != std::string::npos) {
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (num.empty() || den.empty()) throw ConfigError("malformed fraction: " + text);
    try {
      mpz_class n(num), d(den);
      if (sgn(d) == 0) throw ConfigError("zero denominator: " + text);
      Rational q(n, d);
      q.canonicalize();
      return q;
    } catch (const std::invalid_argument&) {
      throw ConfigError("malformed fraction: " + text);
    }
  }

  std::size_t pos = 0;
  std::string sign;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    if (s[pos] == '-') sign = "-";
    ++pos;
  }
  std::string intpart, fracpart;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) intpart += s[pos++];
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) fracpart += s[pos++];
  }
  long exp10 = 0;
  if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
    ++pos;
    bool neg = false;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) neg = (s[pos++] == '-');
    if (pos >= s.size()) throw ConfigError("malformed exponent: " + text);
    std::string digits;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) digits += s[pos++];
    if (digits.empty() || digits.size() > 6) throw ConfigError("malformed exponent: " + text);
    exp10 = std::strtol(digits.c_str(), nullptr, 10);
    if (neg) exp10 = -exp10;
  }
  if (pos != s.size() || (intpart.empty() && fracpart.empty()))
    throw ConfigError("not a number: " + text);

  mpz_class mantissa(sign + (intpart.empty() ? "0" : intpart) + fracpart, 10);
  long shift = exp10 - static_cast<long>(fracpart.size());
  mpz_class pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
  Rational q;
  if (shift >= 0)
    q = Rational(mantissa * pow10);
  else
    q = Rational(mantissa, pow10);
  q.canonicalize();
  return q;
}

}  // namespace hypolab
