#include "nilwalk/walk.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

namespace nilwalk {

namespace {

Vec drift_vec(const WeightDecomposition& dec) {
  Vec x(dec.dim());
  for (int i = 0; i < dec.dim(); ++i) x[i] = to_double(dec.drift[i]);
  return x;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

long TruncationPlan::level_for_increment(long k) const {
  for (size_t i = 0; i < levels.size(); ++i)
    if (k <= levels[i]) return levels[i];
  return levels.back();
}

TruncationPlan make_truncation_plan(const WalkConfig& cfg) {
  TruncationPlan plan;
  plan.drift = drift_vec(cfg.dec);
  if (cfg.truncation == TruncationMode::Off) return plan;
  plan.active = true;
  if (cfg.truncation == TruncationMode::Uniform) {
    plan.levels = {cfg.N};
  } else {
    const int s = cfg.alg->step();
    double g0 = cfg.gradual_gamma0;
    for (int i = 1; i <= s; ++i) {
      double gamma_i = (i < s) ? g0 / std::pow(32.0 * s, i) : 0.0;
      long ni = static_cast<long>(std::floor(std::pow(cfg.N, 1.0 - gamma_i)));
      ni = std::max<long>(1, std::min<long>(ni, cfg.N));
      if (plan.levels.empty() || ni > plan.levels.back()) plan.levels.push_back(ni);
    }
    if (plan.levels.empty() || plan.levels.back() != cfg.N) plan.levels.push_back(cfg.N);
  }
  for (long level : plan.levels) {
    auto tc = truncation_centering(cfg.measure, cfg.dec, static_cast<double>(level));
    plan.centerings.push_back(tc.c);
  }
  return plan;
}

Vec walk_endpoint(const WalkConfig& cfg, Rng& rng, const TruncationPlan& plan,
                  IncrementMeasure::SampleScratch& scratch) {
  const LieAlgebra& alg = *cfg.alg;
  const int d = alg.dim();
  std::vector<double> acc(d, 0.0), x(d), prod(d);
  for (long k = 1; k <= cfg.N; ++k) {
    cfg.measure.sample_into(alg, rng, x.data(), scratch);
    if (plan.active) {
      long level = plan.level_for_increment(k);
      size_t li = std::find(plan.levels.begin(), plan.levels.end(), level) -
                  plan.levels.begin();
      Vec fluct(d);
      for (int i = 0; i < d; ++i) fluct[i] = x[i] - plan.drift[i];
      Vec trunc = truncate_sample(fluct, static_cast<double>(level), cfg.dec,
                                  plan.centerings[li]);
      for (int i = 0; i < d; ++i) x[i] = trunc[i] + plan.drift[i];
    }
    alg.product(acc.data(), x.data(), prod.data(), scratch.bch);
    std::swap(acc, prod);
  }
  Vec endpoint(d);
  std::copy(acc.begin(), acc.end(), endpoint.data());
  if (cfg.recentering != Recentering::None) {
    Vec shift = -static_cast<double>(cfg.N) * plan.drift;
    if (cfg.recentering == Recentering::DriftNXPlusCustom && cfg.custom_g_n.size() == d)
      shift += cfg.custom_g_n;
    endpoint = alg.product(endpoint, shift);
  }
  if (cfg.rescale)
    endpoint = cfg.dec.dilate(1.0 / std::sqrt(static_cast<double>(cfg.N)), endpoint);
  return endpoint;
}

Vec walk_endpoint(const WalkConfig& cfg, Rng& rng) {
  TruncationPlan plan = make_truncation_plan(cfg);
  auto scratch = cfg.measure.make_sample_scratch(*cfg.alg);
  return walk_endpoint(cfg, rng, plan, scratch);
}

void walk_stream(const WalkConfig& cfg,
                 const std::function<void(long, const Vec&)>& sink) {
  const TruncationPlan plan = make_truncation_plan(cfg);
  const int nthreads = resolve_threads(cfg.threads);
  std::vector<std::thread> workers;
  std::atomic<long> next{0};
  const long chunk = std::max<long>(1, cfg.trials / (nthreads * 16));
  for (int w = 0; w < nthreads; ++w) {
    workers.emplace_back([&]() {
      auto scratch = cfg.measure.make_sample_scratch(*cfg.alg);
      for (;;) {
        long begin = next.fetch_add(chunk);
        if (begin >= cfg.trials) break;
        long end = std::min(cfg.trials, begin + chunk);
        for (long t = begin; t < end; ++t) {
          Rng rng = Rng::stream(cfg.seed, static_cast<uint64_t>(t));
          Vec e = walk_endpoint(cfg, rng, plan, scratch);
          sink(t, e);
        }
      }
    });
  }
  for (auto& t : workers) t.join();
}

SampleBatch walk_batch(const WalkConfig& cfg) {
  SampleBatch batch;
  batch.names = cfg.alg->basis_names();
  batch.N = cfg.N;
  batch.seed = cfg.seed;
  batch.data = Mat(cfg.trials, cfg.alg->dim());
  walk_stream(cfg, [&](long t, const Vec& e) { batch.data.row(t) = e.transpose(); });
  return batch;
}

Mat interpolated_path(const WalkConfig& cfg, const std::vector<double>& tgrid,
                      Rng& rng) {
  const LieAlgebra& alg = *cfg.alg;
  const int d = alg.dim();
  const double n = static_cast<double>(cfg.N);
  for (size_t i = 1; i < tgrid.size(); ++i)
    if (tgrid[i] < tgrid[i - 1])
      throw std::invalid_argument("time grid must be ascending");
  Vec drift = drift_vec(cfg.dec);
  auto scratch = cfg.measure.make_sample_scratch(*cfg.alg);
  Mat out(tgrid.size(), d);

  Vec prefix = Vec::Zero(d);
  long k_cur = 0;
  Vec next_x(d);
  cfg.measure.sample_into(alg, rng, next_x.data(), scratch);
  const double inv_sqrt_n = 1.0 / std::sqrt(n);
  for (size_t gi = 0; gi < tgrid.size(); ++gi) {
    const double t = tgrid[gi];
    if (t < 0) throw std::invalid_argument("time grid must be nonnegative");
    long k = std::min<long>(static_cast<long>(std::floor(t * n)), cfg.N);
    while (k_cur < k) {
      prefix = alg.product(prefix, next_x);
      ++k_cur;
      cfg.measure.sample_into(alg, rng, next_x.data(), scratch);
    }
    double frac = t * n - static_cast<double>(k);
    Vec e = prefix;
    if (frac > 0) e = alg.product(e, frac * next_x);
    if (cfg.recentering != Recentering::None) e = alg.product(e, (-t * n) * drift);
    if (cfg.rescale) e = cfg.dec.dilate(inv_sqrt_n, e);
    out.row(gi) = e.transpose();
  }
  return out;
}

double holder_statistic(const LieAlgebra& alg, const Mat& path,
                        const std::vector<double>& tgrid, double alpha) {
  if (!(alpha >= 0.0 && alpha < 0.5))
    throw std::invalid_argument("holder exponent must lie in [0, 1/2)");
  if (static_cast<size_t>(path.rows()) != tgrid.size())
    throw std::invalid_argument("path rows must match time grid");
  double sup = 0;
  for (int i = 0; i < path.rows(); ++i)
    for (int j = i + 1; j < path.rows(); ++j) {
      double dt = tgrid[j] - tgrid[i];
      if (dt <= 0) continue;
      Vec inc = alg.product(-path.row(i).transpose(), path.row(j).transpose());
      double v = inc.norm() / std::pow(dt, alpha);
      sup = std::max(sup, v);
    }
  return sup;
}

}  // namespace nilwalk
