#pragma once
#include <gmpxx.h>

#include <string>

namespace hypolab {

// Exact scalar for the certificate-grade algebra. Conversion to double is
// explicit and one-way; nothing converts a double back into a Rational
// except the exact decimal parser below.
using Rational = mpq_class;

inline double to_double(const Rational& q) { return q.get_d(); }
inline double to_double(double x) { return x; }

inline bool is_zero(const Rational& q) { return sgn(q) == 0; }
inline bool is_zero(double x) { return x == 0.0; }

// Exact "p/q" (or plain integer) form.
std::string rational_to_string(const Rational& q);

// Parses integers, "p/q" fractions, and finite decimals ("-0.125", "3e-2")
// exactly. Throws ConfigError on anything else (including inf/nan).
Rational parse_rational(const std::string& text);

}  // namespace hypolab
