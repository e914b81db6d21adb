#pragma once

#include "nilwalk/rational.hpp"

#include <optional>
#include <vector>

namespace nilwalk {

// Exact linear algebra over the rationals on row vectors. Subspaces are
// represented by their reduced row echelon basis, which makes equality and
// containment tests canonical.

struct Rref {
  RatMat rows;             // nonzero rows in reduced echelon form
  std::vector<int> pivots; // pivot column of each row, strictly increasing
};

Rref rref(RatMat rows);

int rank(const RatMat& rows);

// Canonical basis of the span (RREF rows).
RatMat span_basis(const RatMat& rows);

bool span_contains(const Rref& space, const RatVec& v);
bool subspace_leq(const RatMat& a, const RatMat& b);   // span(a) <= span(b)
bool spans_equal(const RatMat& a, const RatMat& b);

// Rows of rref(sup) whose pivot column is not a pivot column of rref(sub).
// For sub <= sup this is a complement of sub inside sup.
RatMat complement_rows(const RatMat& sup, const RatMat& sub);

// Solve M x = b for square exact M; empty if singular.
std::optional<RatVec> solve_square(const RatMat& m, const RatVec& b);
std::optional<RatMat> invert(const RatMat& m);

RatVec rat_zero(int n);
RatVec add(const RatVec& a, const RatVec& b);
RatVec sub(const RatVec& a, const RatVec& b);
RatVec scale(const Rat& c, const RatVec& a);
bool is_zero(const RatVec& a);

}  // namespace nilwalk
