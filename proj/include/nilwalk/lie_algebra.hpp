#pragma once

#include "nilwalk/bch.hpp"
#include "nilwalk/linalg_exact.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace nilwalk {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Reusable buffers for allocation-free product evaluation in simulation loops.
struct BchScratch {
  std::vector<double> node_vals;
};

// Finite-dimensional nilpotent Lie algebra given by exact rational structure
// constants in a fixed basis. Immutable after construction; all operations are
// pure, so instances can be shared across threads. The group product is the
// truncated Campbell-Hausdorff series in exponential coordinates.
class LieAlgebra {
 public:
  // Sparse map (i,j) -> coefficients of [e_i,e_j], keys with i < j only.
  using BracketMap =
      std::map<std::pair<int, int>, std::vector<std::pair<int, Rat>>>;

  // Validates antisymmetry conventions, the Jacobi identity (exactly, in
  // rational arithmetic) and nilpotency; computes the step.
  LieAlgebra(int dim, std::vector<std::string> basis_names, BracketMap brackets);

  int dim() const { return dim_; }
  int step() const { return step_; }
  const std::vector<std::string>& basis_names() const { return basis_names_; }
  const BracketMap& brackets() const { return brackets_; }

  void bracket(const double* x, const double* y, double* out) const;
  Vec bracket(const Vec& x, const Vec& y) const;
  RatVec bracket(const RatVec& x, const RatVec& y) const;

  // x * y. Identity is 0, the inverse of x is -x.
  void product(const double* x, const double* y, double* out, BchScratch& s) const;
  Vec product(const Vec& x, const Vec& y) const;
  RatVec product(const RatVec& x, const RatVec& y) const;

  // Ad(y)x = y * x * (-y)
  Vec adjoint(const Vec& y, const Vec& x) const;
  RatVec adjoint(const RatVec& y, const RatVec& x) const;

  // Exact bases of the central descending series g = g^[1] >= g^[2] >= ...,
  // ending with the first zero term.
  const std::vector<RatMat>& lower_central_series() const { return lcs_; }

  BchScratch make_scratch() const;

  Vec zero() const { return Vec::Zero(dim_); }
  Vec basis_vector(int i) const;

 private:
  void check_dims(size_t n) const;

  int dim_;
  int step_;
  std::vector<std::string> basis_names_;
  BracketMap brackets_;

  struct FEntry {
    int i, j;
    int begin, end;
  };
  std::vector<FEntry> fentries_;
  std::vector<std::pair<int, double>> fterms_;
  std::vector<RatMat> lcs_;
};

}  // namespace nilwalk
