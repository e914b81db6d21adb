#pragma once

#include "nilwalk/diffusion.hpp"

#include <array>

namespace nilwalk {

// Controls (u_i in m^(1), t_i >= 0) with sum t_i = 1.
struct ControlSequence {
  std::vector<std::pair<RatVec, Rat>> steps;  // (u_i ambient base coords, t_i)

  void validate(const WeightDecomposition& dec) const;
};

// prod_i^{*'} (u_i *' t_i (B + Y)) *' (-Y), a point of supp sigma_1.
Vec horizontal_endpoint(const GeneratorSpec& gen, const ControlSequence& controls);
RatVec horizontal_endpoint_exact(const GeneratorSpec& gen,
                                 const ControlSequence& controls);

// Piecewise-constant path on [breakpoints_0, breakpoints_m].
struct PiecewisePath {
  std::vector<Rat> breakpoints;  // strictly increasing, size m+1
  std::vector<RatVec> values;    // size m, ambient coordinates

  void validate() const;
};

// Multiplicative integral of the path for the graded product, evaluated
// through iterated simplex integrals of graded brackets (exact closed forms
// for piecewise-constant paths; steps up to 4).
RatVec strichartz_integral_exact(const GradedStructure& g, const PiecewisePath& path);

// Same integral through the piecewise product (len_1 c_1) *' ... *' (len_m c_m).
RatVec strichartz_piece_product(const GradedStructure& g, const PiecewisePath& path);

// Fine-mesh product oracle: the *'-product of mesh_n slices (len/mesh) c(t_k).
Vec strichartz_mesh_product(const GradedStructure& g, const PiecewisePath& path,
                            int mesh_n);

// Exact when the graded step allows it, fine-mesh fallback otherwise.
Vec strichartz_integral(const GradedStructure& g, const PiecewisePath& path);

enum class RegionSide { Inside, Boundary, Outside };

// Sign of 2 s4 - (s1 + s3) s3 in the (A, T, e3, e4) coordinates of the biased
// filiform limit support, with a tol-wide boundary band.
RegionSide filiform_member(const std::array<double, 4>& s, double tol = 1e-9);
RegionSide filiform_member_exact(const RatVec& s);

struct GaussianCaseReport {
  bool condition_i = false;    // [X, g^[a]/g^[a+1]] = g^[a+1]/g^[a+2] for all a
  bool condition_iii = false;  // m^(i) != 0 iff i odd, i <= 2s-1
  bool agree = false;
};

GaussianCaseReport gaussian_case_check(AlgebraPtr alg, const RatVec& xbar);

struct DcReport {
  bool holds = false;
  bool spanning = false;  // generators span the abelianization
  // failure certificate (exact): [v_i, ad(w)^k v_i] != 0
  int witness_generator = -1;
  int witness_k = -1;
  RatVec witness_w;
  RatVec bracket_value;
};

// Randomized polynomial identity test of [v_i, ad(w)^k v_i] = 0 over `trials`
// rational witnesses w with entries in {-3..3}; failures are exact.
DcReport dc_condition_check(AlgebraPtr alg, const std::vector<RatVec>& generators,
                            int trials = 50, uint64_t seed = 5);

}  // namespace nilwalk
