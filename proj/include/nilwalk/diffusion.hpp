#pragma once

#include "nilwalk/stats.hpp"

namespace nilwalk {

// Data of the limiting generator (1/2) sum (Ad(tY)E_i)^2 + Ad(tY)B on
// (g, *'): a frame E_1..E_q whitening the abelianized covariance, the
// commutator mean B in m^(2), and Y in chi + m^(2). Everything is carried in
// the m-coordinates of the bias extension, where the graded product acts.
struct GeneratorSpec {
  BiasExtension ext;
  std::vector<Vec> frame_m;  // E_i, m-coords of g̃ (supported on the m^(1) block)
  Vec drift_b_m;             // B
  Vec y_m;                   // Y = chi (+ optional m^(2) part)
  RatVec drift_b_exact;      // exact B when the measure has closed-form moments
  RatVec y_exact;            // exact Y (chi by default)

  int sim_dim() const { return ext.ext->dim(); }
};

// E_i = columns of the symmetric PSD square root of Cov(mu_ab) in the m^(1)
// frame; B = E[x^(2)]; Y = chi. Throws HypothesisError on degenerate
// covariance.
GeneratorSpec generator_from_measure(const WeightDecomposition& dec,
                                     const MomentReport& moments);

struct DiffusionConfig {
  GeneratorSpec gen;
  double t = 1.0;
  double dt = 1e-3;
  long trials = 1;
  uint64_t seed = 0;
  int threads = 0;
};

// One endpoint W(t), in ambient coordinates of the base algebra. The
// time-homogeneous process Z of the homogenization lemma is simulated by
// left-invariant Euler steps Z <- Z *' (sqrt(dt) sum g_i E_i + dt (B + Y))
// and W(t) = Z(t) *' (-tY).
Vec simulate_diffusion_endpoint(const DiffusionConfig& cfg, Rng& rng);

SampleBatch diffusion_batch(const DiffusionConfig& cfg);
void diffusion_stream(const DiffusionConfig& cfg,
                      const std::function<void(long, const Vec&)>& sink);

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Density of the time-1 law of (planar Brownian motion, its Levy area) in the
// normalized centered Heisenberg setting:
// (1/2pi^2) Int cos(2 xi z) (xi/sinh xi) exp(-(x^2+y^2) xi / (2 tanh xi)) dxi.
double levy_density(double x, double y, double z);

// Marginal density of the third coordinate, and its CDF.
double levy_marginal_z(double z);
double levy_marginal_cdf(double z);

// Empirical-law distance between W(rt) and D_sqrt(r) W(t).
ComparisonReport scaling_check(const GeneratorSpec& gen, double t, double r,
                               long trials, double dt = 1e-3, uint64_t seed = 11,
                               int threads = 0);

// Empirical-law distance between sigma_s *' Ad(sY) sigma_t and sigma_{s+t}.
ComparisonReport semigroup_check(const GeneratorSpec& gen, double s, double t,
                                 long trials, double dt = 1e-3, uint64_t seed = 13,
                                 int threads = 0);

}  // namespace nilwalk
