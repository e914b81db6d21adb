#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

namespace nilwalk {

// Exact rational scalar used for all algebraic decisions (ranks, spans,
// structure constants). Floats are reserved for simulation.
using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

using RatVec = std::vector<Rat>;
using RatMat = std::vector<RatVec>;

double to_double(const Rat& r);

// Accepts "p/q", integers, and decimal literals ("-0.25", "1e-3", "2.5e2").
// Decimal forms are converted exactly.
Rat parse_rational(const std::string& s);

// Canonical short form: "p" or "p/q".
std::string rational_to_string(const Rat& r);

}  // namespace nilwalk
