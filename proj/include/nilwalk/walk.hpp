#pragma once

#include "nilwalk/measure.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nilwalk {

enum class Recentering { None, DriftNX, DriftNXPlusCustom };
enum class TruncationMode { Off, Uniform, Gradual };

// Rescaled i.i.d. right random walk D_{1/sqrt N}(X_1 * ... * X_N * (-N X)).
struct WalkConfig {
  AlgebraPtr alg;
  WeightDecomposition dec;
  IncrementMeasure measure = IncrementMeasure::atomic(1, {{{Rat(0)}, Rat(1)}});
  long N = 1;
  long trials = 1;
  Recentering recentering = Recentering::DriftNX;
  Vec custom_g_n;  // extra translation: recenter by -NX + g_N
  TruncationMode truncation = TruncationMode::Off;
  double gradual_gamma0 = 0.125;  // free parameter of the gradual schedule
  bool rescale = true;            // apply D_{1/sqrt N} to the endpoint
  uint64_t seed = 0;
  int threads = 0;  // 0 = hardware parallelism
};

struct SampleBatch {
  std::vector<std::string> names;
  Mat data;  // trials x dim, row per trial, ordered by trial index
  long N = 0;
  uint64_t seed = 0;
  std::string config_hash;
};

// Truncation levels and mean-restoring constants for a config. The gradual
// schedule uses N_i = floor(N^(1-gamma_i)), gamma_i = (32 s)^{-i} gamma_0 for
// i < s and gamma_s = 0; increment k gets the smallest level N_i >= k.
struct TruncationPlan {
  bool active = false;
  std::vector<long> levels;      // ascending, last = N
  std::vector<Vec> centerings;   // c_{N_i} per level
  Vec drift;                     // X, ambient

  long level_for_increment(long k) const;  // 1-based k
};

TruncationPlan make_truncation_plan(const WalkConfig& cfg);

Vec walk_endpoint(const WalkConfig& cfg, Rng& rng);
Vec walk_endpoint(const WalkConfig& cfg, Rng& rng, const TruncationPlan& plan,
                  IncrementMeasure::SampleScratch& scratch);

SampleBatch walk_batch(const WalkConfig& cfg);

// Streamed variant: calls sink(trial, endpoint) instead of storing the batch.
// Deterministic per trial; safe to run with cfg.threads > 1 (the sink must be
// thread-safe).
void walk_stream(const WalkConfig& cfg,
                 const std::function<void(long, const Vec&)>& sink);

// Donsker interpolation on a time grid (ascending, within [0, T]):
// W^(N)(t) = D_{1/sqrt N}(X_1*...*X_{[tN]} * (tN-[tN]) X_{[tN]+1} * (-tN X)).
Mat interpolated_path(const WalkConfig& cfg, const std::vector<double>& tgrid,
                      Rng& rng);

// Per-path sup over grid pairs of ||x(s)^{-1} * x(t)|| / |t-s|^alpha.
// Requires alpha in [0, 1/2).
double holder_statistic(const LieAlgebra& alg, const Mat& path,
                        const std::vector<double>& tgrid, double alpha);

}  // namespace nilwalk
