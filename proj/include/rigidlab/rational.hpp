#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace rigidlab {

using Rational = mpq_class;

// Accepts "3", "-7/2", "2.5", "-0.125", "1e-3". Throws InvalidArgument.
Rational parse_rational(std::string_view text);

// Canonical "p/q" (or "p" when q = 1).
std::string to_string(const Rational& r);

double to_double(const Rational& r);

}  // namespace rigidlab
