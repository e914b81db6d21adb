#pragma once

#include "nilwalk/lie_algebra.hpp"

#include <memory>

namespace nilwalk {

using AlgebraPtr = std::shared_ptr<const LieAlgebra>;

enum class FiltrationKind { Central, Weight };

// Nested sequence of ideals g^(1) >= g^(2) >= ... stored as exact RREF bases,
// trimmed after the last nonzero term. For the central series g^[i+1] =
// [g, g^[i]]; for the weight filtration of a bias X̄,
// g^(i+1) = [g, g^(i)] + [X̄, g^(i-1)].
struct Filtration {
  AlgebraPtr alg;
  FiltrationKind kind = FiltrationKind::Central;
  RatVec bias;                    // the lift handed in (zero for central)
  std::vector<RatMat> subspaces;  // subspaces[i-1] = basis of g^(i), i >= 1

  int b_max() const { return static_cast<int>(subspaces.size()); }
  int dim_at(int i) const {
    return (i >= 1 && i <= b_max()) ? static_cast<int>(subspaces[i - 1].size()) : 0;
  }
};

Filtration central_series(AlgebraPtr alg);
Filtration weight_filtration(AlgebraPtr alg, const RatVec& xbar);

// d_X̄ = sum_i dim g^(i); equals log_r det D_r of the induced dilations.
int homogeneous_dimension(const Filtration& f);

// Weight decomposition g = ⊕_b m^(b) with g^(b) = m^(b) ⊕ g^(b+1).
// Complements are chosen deterministically: the RREF rows of g^(b) whose pivot
// column is not a pivot column of g^(b+1).
class WeightDecomposition {
 public:
  AlgebraPtr alg;
  Filtration filt;
  std::vector<int> weights;  // weight of each decomposition basis vector
  RatMat basis;              // basis[r][c]: ambient coords, column c = r-th? see below
  // Rows of `basis` are the decomposition basis vectors in ambient
  // coordinates, ordered by ascending weight. `to_m` maps ambient coordinates
  // to coordinates in this basis.
  RatMat to_m_exact;   // inverse change of basis, rows x cols = dim x dim
  Mat basis_d, to_m_d;
  RatVec drift;        // X = π^(1)(bias lift), ambient coordinates

  int dim() const { return alg->dim(); }
  int b_max() const { return filt.b_max(); }
  std::pair<int, int> layer_range(int b) const;  // [begin,end) rows of weight b

  Vec to_m(const Vec& ambient) const { return to_m_d * ambient; }
  Vec from_m(const Vec& m) const { return basis_d.transpose() * m; }
  RatVec to_m(const RatVec& ambient) const;
  RatVec from_m(const RatVec& m) const;

  // π^(b), ambient in / ambient out
  Vec project(int b, const Vec& x) const;
  RatVec project(int b, const RatVec& x) const;

  // D_r x = sum_b r^b x^(b); exact variant for rational r
  Vec dilate(double r, const Vec& x) const;
  RatVec dilate(const Rat& r, const RatVec& x) const;

  // Euclidean norm of the m-coordinate block of weight b.
  double layer_norm(int b, const Vec& ambient) const;
};

WeightDecomposition choose_weight_decomposition(const Filtration& f);

// a_X(y) = π^(i+2)([X, y]) for y in m^(i), extended linearly.
Vec a_x_operator(const WeightDecomposition& dec, const Vec& y);
RatVec a_x_operator(const WeightDecomposition& dec, const RatVec& y);

// The graded Lie algebra (g, [.,.]') in the decomposition basis, with
// conversion helpers. The graded product *' is its Campbell-Hausdorff product.
class GradedStructure {
 public:
  WeightDecomposition dec;
  AlgebraPtr graded;  // structure constants of [.,.]' in the m-basis

  Vec bracket(const Vec& x, const Vec& y) const;          // ambient in/out
  Vec product(const Vec& x, const Vec& y) const;
  RatVec bracket(const RatVec& x, const RatVec& y) const;
  RatVec product(const RatVec& x, const RatVec& y) const;
  Vec adjoint(const Vec& y, const Vec& x) const;
};

GradedStructure graded_structure(const WeightDecomposition& dec);

// Bias extension g̃ = g ⊕ ℝχ with [χ,x] = [X,x], χ of weight 2. When the bias
// vanishes the extension is trivial: g̃ = g and χ = 0.
struct BiasExtension {
  bool trivial = true;
  AlgebraPtr base;
  WeightDecomposition base_dec;
  AlgebraPtr ext;               // g̃ (== base when trivial)
  WeightDecomposition ext_dec;  // extended decomposition, χ in m̃^(2)
  GradedStructure ext_graded;   // (g̃, *')
  RatVec chi;                   // χ in g̃ coordinates
  RatVec drift;                 // X in g coordinates

  int ext_dim() const { return ext->dim(); }
  Vec embed(const Vec& x) const;           // g -> g̃
  RatVec embed(const RatVec& x) const;
  Vec project_to_base(const Vec& xt) const;  // p: x ⊕ tχ -> x + tX
  RatVec project_to_base(const RatVec& xt) const;
};

BiasExtension bias_extension(const WeightDecomposition& dec);

}  // namespace nilwalk
