#pragma once

#include "nilwalk/walk.hpp"

#include <complex>

namespace nilwalk {

struct GeneratorSpec;  // diffusion.hpp

// Per-projection Kolmogorov-Smirnov distances plus energy distance, with
// pass/fail against sample-size-derived thresholds (95% asymptotic two-sample
// KS quantile; 200-permutation test for the energy distance).
struct ComparisonReport {
  std::vector<double> coord_ks;
  std::vector<double> direction_ks;
  double max_ks = 0;
  double ks_threshold = 0;
  double ecf_gap = 0;        // sup |ecf_a - ecf_b| over a random dual grid
  double ecf_threshold = 0;  // concentration bound 3 (1/sqrt n_a + 1/sqrt n_b)
  double energy = 0;
  double energy_threshold = 0;
  bool energy_pass = true;
  size_t n_a = 0, n_b = 0;
  bool pass = true;
};

// Empirical characteristic function (1/n) sum_k exp(-2 pi i <xi, x_k>).
std::vector<std::complex<double>> ecf(const Mat& batch, const std::vector<Vec>& xis);

double ks_two_sample(std::vector<double> a, std::vector<double> b);

// sup_x |F_hat(x) - cdf(x)| over the sample points.
double ks_one_sample(std::vector<double> a,
                     const std::function<double(double)>& cdf);

// Anderson-Darling normality statistic with estimated mean and variance,
// including the small-sample adjustment A*^2 = A^2 (1 + 0.75/n + 2.25/n^2).
// The 5% critical value for this case is 0.787.
double anderson_darling_normal(std::vector<double> x);
inline constexpr double kAndersonDarling5pc = 0.787;

ComparisonReport two_sample_distance(const Mat& a, const Mat& b,
                                     int n_directions = 20, uint64_t seed = 7,
                                     int energy_subsample = 1500,
                                     int permutations = 200);

// Smooth compactly supported test function: product of cos^2 windows around a
// center, optionally multiplied by one coordinate (odd component).
struct SmoothBump {
  Vec center;
  Vec halfwidth;
  int poly_coord = -1;

  double operator()(const Vec& x) const;
  double integral() const;  // valid when poly_coord < 0
  bool in_support(const Vec& x) const;
};

struct BePoint {
  long N;
  double walk_mean;
  double error;       // |E_walk f - reference|
  double mc_stderr;
};

struct BeCurve {
  std::vector<BePoint> points;
  double reference;
  double slope;  // log-log regression of error against N
};

// Convergence-rate curve |E_walk f - reference| over the given N values.
// `reference` is E_nu f computed by the caller (quadrature or diffusion MC).
BeCurve berry_esseen_curve(const WalkConfig& base_cfg, const SmoothBump& f,
                           const std::vector<long>& ns, double reference,
                           long trials_per_n);

enum class LltPrediction { LevyHeisenberg, DiffusionKde };

struct LltResult {
  double estimate = 0;       // N^(d/2) * mean of f over recentered endpoints
  double ci_low = 0, ci_high = 0;
  double prediction = 0;     // N^(d/2) * (D_sqrtN nu)(f)
  double expected_hits = 0;  // expected number of samples in supp f
  long support_hits = 0;
  long required_budget = 0;  // samples needed for >= 100 expected hits
  bool refused = false;
  double ratio = 0;          // estimate / prediction
};

// Hit-frequency LLT estimator. The walk endpoints are *not* rescaled
// (recentering only); d is the homogeneous dimension of cfg.dec. Optional
// deviations translate the test function to x -> f(g * x * h).
LltResult llt_ratio(const WalkConfig& cfg, const SmoothBump& f, long nsamples,
                    LltPrediction mode, const GeneratorSpec* gen = nullptr,
                    long kde_trials = 20000, const Vec* dev_g = nullptr,
                    const Vec* dev_h = nullptr, bool force_run = false);

enum class CloseVerdict { Close, NotClose, NotComparable };

struct AsympCloseReport {
  CloseVerdict verdict = CloseVerdict::NotComparable;
  bool filtrations_match = false;
  bool abelian_mean_match = false;
  bool abelian_cov_match = false;
  bool mean_mod_g3_match = false;
  std::string detail;
};

// Tutubalin's criterion: same abelianized mean and covariance, and the same
// mean modulo g^(3). Requires closed-form moments and nondegenerate
// covariance for both measures.
AsympCloseReport asymptotically_close(const IncrementMeasure& mu1,
                                      const IncrementMeasure& mu2,
                                      AlgebraPtr alg, double tol = 1e-9);

}  // namespace nilwalk
