#pragma once

#include "nilwalk/filtration.hpp"
#include "nilwalk/rng.hpp"

#include <nlohmann/json_fwd.hpp>

#include <memory>
#include <optional>
#include <string>

namespace nilwalk {

// Raised when a CLT/LLT hypothesis fails (degenerate covariance etc).
struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MeasureKind { Atomic, Gaussian, Shifted, Product };

// A sampleable probability law on the algebra with queryable moments.
// Immutable after construction; samplers take caller-owned RNG state.
class IncrementMeasure {
 public:
  static IncrementMeasure atomic(int dim,
                                 std::vector<std::pair<RatVec, Rat>> atoms,
                                 int moment_order = 4);
  // Gaussian over the chosen coordinates (others deterministic at the mean).
  static IncrementMeasure gaussian(int dim, RatVec mean, std::vector<int> coords,
                                   Mat cov, int moment_order = 4);
  static IncrementMeasure shifted(IncrementMeasure base, RatVec shift);
  // Group convolution of factors: a sample is the * product of one sample per
  // factor, evaluated left to right.
  static IncrementMeasure product(std::vector<IncrementMeasure> factors);

  MeasureKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int moment_order() const { return moment_order_; }

  Vec sample(const LieAlgebra& alg, Rng& rng) const;

  // Allocation-free variant for simulation loops.
  struct SampleScratch {
    std::vector<double> a, b, z;
    BchScratch bch;
  };
  SampleScratch make_sample_scratch(const LieAlgebra& alg) const;
  void sample_into(const LieAlgebra& alg, Rng& rng, double* out,
                   SampleScratch& s) const;

  // Closed-form full mean when available (atomic, gaussian, shifted chains).
  std::optional<RatVec> exact_mean() const;
  std::optional<Vec> mean() const;

  // Closed-form covariance of the full coordinate vector when available.
  std::optional<Mat> coordinate_covariance() const;

  const std::vector<std::pair<RatVec, Rat>>& atoms() const { return atoms_; }
  const std::vector<int>& gauss_coords() const { return gauss_coords_; }
  const Mat& gauss_cov() const { return cov_; }
  const IncrementMeasure& base() const { return *base_; }
  const RatVec& shift() const { return shift_; }
  const std::vector<IncrementMeasure>& factors() const { return factors_; }

  // |closed-form characteristic function| of the abelianized law at xi (dual
  // coordinates of m^(1)); empty when no closed form exists.
  std::optional<double> abelian_cf_modulus(const WeightDecomposition& dec,
                                           const Vec& xi_m1) const;

 private:
  IncrementMeasure() = default;

  MeasureKind kind_ = MeasureKind::Atomic;
  int dim_ = 0;
  int moment_order_ = 4;
  // atomic
  std::vector<std::pair<RatVec, Rat>> atoms_;
  std::vector<Vec> atoms_d_;
  std::vector<double> cum_;
  // gaussian
  RatVec mean_exact_;
  Vec mean_d_;
  std::vector<int> gauss_coords_;
  Mat cov_;
  Mat noise_factor_;  // symmetric PSD square root of cov
  // compositions
  std::shared_ptr<const IncrementMeasure> base_;
  RatVec shift_;
  Vec shift_d_;
  std::vector<IncrementMeasure> factors_;
};

// Abelianized mean/covariance, commutator mean B and per-layer moments.
struct MomentReport {
  Vec abelian_mean;              // π^(1) of the mean, ambient coordinates
  RatVec abelian_mean_exact;     // set when closed form (empty otherwise)
  Mat abelian_cov;               // covariance of the m^(1) coordinate block
  Vec commutator_mean;           // B = E[x^(2)], ambient coordinates
  RatVec commutator_mean_exact;  // set when closed form
  std::vector<double> layer_moments;  // E ||x^(b)||^(m/b), b = 1..b_max
  bool closed_form = false;
  bool degenerate_covariance = false;
};

// Closed forms for atomic/gaussian(/shifted) kinds; Monte Carlo otherwise.
// Throws HypothesisError when the abelianized covariance is degenerate.
MomentReport abelian_stats(const IncrementMeasure& mu,
                           const WeightDecomposition& dec, int nsamples = 1000000,
                           uint64_t seed = 1, bool allow_degenerate = false);

struct TruncationCentering {
  Vec c;               // mean-restoring constant on the m^(1) layer (ambient)
  double tail_prob;    // P(||x^(1)|| > N^(1/2)) for the centered fluctuation
  double stderr_est;   // Monte Carlo standard error (0 for closed forms)
};

// c_N = -P(||f^(1)|| > sqrt(N))^(-1) E[f^(1) 1{||f^(1)|| <= sqrt(N)}] where f
// is the fluctuation x - X of the bias extension; c_N = 0 when no mass is cut.
TruncationCentering truncation_centering(const IncrementMeasure& mu,
                                         const WeightDecomposition& dec, double N,
                                         int nsamples = 1000000, uint64_t seed = 2);

// Layer-wise cutoff at scale N^(b/2): keep x^(b) if small, else 0 (b >= 2) or
// c_N (b = 1). Acts on a fluctuation vector (a sample of the bias extension).
Vec truncate_sample(const Vec& x, double N, const WeightDecomposition& dec,
                    const Vec& c_n);

struct AperiodicityReport {
  double max_modulus = 0;
  Vec argmax;
  bool lattice_suspect = false;  // max >= 1 - 1e-6
};

// Max modulus of the abelianized characteristic function on a dual grid
// excluding a ball around 0. Closed form when available, empirical otherwise.
AperiodicityReport aperiodicity_heuristic(const IncrementMeasure& mu,
                                          const WeightDecomposition& dec,
                                          const std::vector<Vec>& grid_m1,
                                          int nsamples = 200000, uint64_t seed = 3);

IncrementMeasure measure_from_json(const nlohmann::json& j, int dim);
nlohmann::json measure_to_json(const IncrementMeasure& mu);

}  // namespace nilwalk
