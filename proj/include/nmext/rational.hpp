#pragma once

// Exact rational arithmetic for distributions and distances.  Probabilities
// coming out of exhaustive counting stay exact; only final entropies and
// float-valued bounds leave the rationals.

#include <boost/multiprecision/cpp_int.hpp>

#include "nmext/bitstring.hpp"

namespace nmext {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return static_cast<double>(r); }

// 2^k for possibly negative k.
inline Rat rat_pow2(long k) {
    Int one = 1;
    if (k >= 0) return Rat(one << unsigned(k), 1);
    return Rat(1, one << unsigned(-k));
}

// -log2(r) for r in (0,1]; desk-scale values stay well inside double range.
inline double neg_log2(const Rat& r) {
    if (r <= 0) throw Error("neg_log2: argument must be positive");
    return -std::log2(to_double(r));
}

}  // namespace nmext
