#include "nilwalk/stats.hpp"

#include "nilwalk/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

namespace nilwalk {

std::vector<std::complex<double>> ecf(const Mat& batch, const std::vector<Vec>& xis) {
  if (batch.rows() == 0) throw std::invalid_argument("empty batch");
  std::vector<std::complex<double>> out;
  out.reserve(xis.size());
  for (const auto& xi : xis) {
    std::complex<double> z = 0;
    for (long i = 0; i < batch.rows(); ++i) {
      double phase = -2.0 * M_PI * batch.row(i).dot(xi);
      z += std::complex<double>(std::cos(phase), std::sin(phase));
    }
    out.push_back(z / static_cast<double>(batch.rows()));
  }
  return out;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    double fa = static_cast<double>(i) / a.size();
    double fb = static_cast<double>(j) / b.size();
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

double ks_one_sample(std::vector<double> a,
                     const std::function<double(double)>& cdf) {
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    double f = cdf(a[i]);
    d = std::max(d, std::abs((i + 1) / n - f));
    d = std::max(d, std::abs(f - i / n));
  }
  return d;
}

double anderson_darling_normal(std::vector<double> x) {
  const size_t n = x.size();
  if (n < 8) throw std::invalid_argument("sample too small for the AD statistic");
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= (n - 1);
  double sd = std::sqrt(var);
  std::sort(x.begin(), x.end());
  auto phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  double a2 = -static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    double zi = (x[i] - mean) / sd;
    double zr = (x[n - 1 - i] - mean) / sd;
    double lo = std::max(phi(zi), 1e-300);
    double hi = std::max(1.0 - phi(zr), 1e-300);
    a2 -= (2.0 * (i + 1) - 1.0) / n * (std::log(lo) + std::log(hi));
  }
  return a2 * (1.0 + 0.75 / n + 2.25 / (static_cast<double>(n) * n));
}

namespace {

std::vector<double> column(const Mat& m, int c) {
  std::vector<double> v(m.rows());
  for (long i = 0; i < m.rows(); ++i) v[i] = m(i, c);
  return v;
}

std::vector<double> projection(const Mat& m, const Vec& dir) {
  std::vector<double> v(m.rows());
  for (long i = 0; i < m.rows(); ++i) v[i] = m.row(i).dot(dir);
  return v;
}

}  // namespace

ComparisonReport two_sample_distance(const Mat& a, const Mat& b, int n_directions,
                                     uint64_t seed, int energy_subsample,
                                     int permutations) {
  if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument("empty batch");
  if (a.cols() != b.cols()) throw std::invalid_argument("dimension mismatch");
  ComparisonReport rep;
  rep.n_a = a.rows();
  rep.n_b = b.rows();
  const int d = static_cast<int>(a.cols());

  for (int c = 0; c < d; ++c)
    rep.coord_ks.push_back(ks_two_sample(column(a, c), column(b, c)));
  Rng rng(seed);
  for (int k = 0; k < n_directions; ++k) {
    Vec dir(d);
    for (int i = 0; i < d; ++i) dir[i] = rng.next_normal();
    dir.normalize();
    rep.direction_ks.push_back(ks_two_sample(projection(a, dir), projection(b, dir)));
  }
  rep.max_ks = 0;
  for (double v : rep.coord_ks) rep.max_ks = std::max(rep.max_ks, v);
  for (double v : rep.direction_ks) rep.max_ks = std::max(rep.max_ks, v);
  const double n = static_cast<double>(rep.n_a), m = static_cast<double>(rep.n_b);
  rep.ks_threshold = 1.358 * std::sqrt((n + m) / (n * m));

  // empirical characteristic function gap on a random dual grid
  std::vector<Vec> xis;
  for (int k = 0; k < 32; ++k) {
    Vec xi(d);
    for (int i = 0; i < d; ++i) xi[i] = 0.3 * rng.next_normal();
    xis.push_back(xi);
  }
  auto ea = ecf(a, xis);
  auto eb = ecf(b, xis);
  for (size_t k = 0; k < xis.size(); ++k)
    rep.ecf_gap = std::max(rep.ecf_gap, std::abs(ea[k] - eb[k]));
  rep.ecf_threshold = 3.0 * (1.0 / std::sqrt(n) + 1.0 / std::sqrt(m));

  // energy distance on a deterministic subsample, permutation threshold
  const long ka = std::min<long>(a.rows(), energy_subsample);
  const long kb = std::min<long>(b.rows(), energy_subsample);
  const long k = ka + kb;
  std::vector<long> ia(a.rows()), ib(b.rows());
  std::iota(ia.begin(), ia.end(), 0);
  std::iota(ib.begin(), ib.end(), 0);
  for (long i = a.rows() - 1; i > 0; --i) std::swap(ia[i], ia[rng.next_u64() % (i + 1)]);
  for (long i = b.rows() - 1; i > 0; --i) std::swap(ib[i], ib[rng.next_u64() % (i + 1)]);
  Mat pooled(k, d);
  for (long i = 0; i < ka; ++i) pooled.row(i) = a.row(ia[i]);
  for (long i = 0; i < kb; ++i) pooled.row(ka + i) = b.row(ib[i]);
  std::vector<float> dist(static_cast<size_t>(k) * k, 0.0f);
  for (long i = 0; i < k; ++i)
    for (long j = i + 1; j < k; ++j) {
      float dij = static_cast<float>((pooled.row(i) - pooled.row(j)).norm());
      dist[i * k + j] = dij;
      dist[j * k + i] = dij;
    }
  auto energy_stat = [&](const std::vector<int>& label) {
    double ab = 0, aa = 0, bb = 0;
    long na = 0;
    for (long i = 0; i < k; ++i) na += label[i] == 0;
    long nb = k - na;
    for (long i = 0; i < k; ++i)
      for (long j = i + 1; j < k; ++j) {
        float dij = dist[i * k + j];
        if (label[i] != label[j]) ab += dij;
        else if (label[i] == 0) aa += dij;
        else bb += dij;
      }
    return 2.0 * ab / (static_cast<double>(na) * nb) -
           2.0 * aa / (static_cast<double>(na) * na) -
           2.0 * bb / (static_cast<double>(nb) * nb);
  };
  std::vector<int> label(k, 0);
  for (long i = ka; i < k; ++i) label[i] = 1;
  rep.energy = energy_stat(label);
  std::vector<double> perm_stats;
  perm_stats.reserve(permutations);
  for (int p = 0; p < permutations; ++p) {
    std::vector<int> lab = label;
    for (long i = k - 1; i > 0; --i) std::swap(lab[i], lab[rng.next_u64() % (i + 1)]);
    perm_stats.push_back(energy_stat(lab));
  }
  std::sort(perm_stats.begin(), perm_stats.end());
  size_t q95 = static_cast<size_t>(std::floor(0.95 * (perm_stats.size() - 1)));
  rep.energy_threshold = perm_stats[q95];
  rep.energy_pass = rep.energy <= rep.energy_threshold;
  rep.pass = rep.max_ks <= rep.ks_threshold && rep.energy_pass;
  return rep;
}

double SmoothBump::operator()(const Vec& x) const {
  double v = 1.0;
  for (int i = 0; i < center.size(); ++i) {
    double u = (x[i] - center[i]) / halfwidth[i];
    if (u <= -1.0 || u >= 1.0) return 0.0;
    double c = std::cos(0.5 * M_PI * u);
    v *= c * c;
  }
  if (poly_coord >= 0) v *= x[poly_coord] - center[poly_coord];
  return v;
}

double SmoothBump::integral() const {
  double v = 1.0;
  for (int i = 0; i < halfwidth.size(); ++i) v *= halfwidth[i];
  return v;
}

bool SmoothBump::in_support(const Vec& x) const {
  for (int i = 0; i < center.size(); ++i)
    if (std::abs(x[i] - center[i]) >= halfwidth[i]) return false;
  return true;
}

BeCurve berry_esseen_curve(const WalkConfig& base_cfg, const SmoothBump& f,
                           const std::vector<long>& ns, double reference,
                           long trials_per_n) {
  BeCurve curve;
  curve.reference = reference;
  for (long n : ns) {
    WalkConfig cfg = base_cfg;
    cfg.N = n;
    cfg.trials = trials_per_n;
    cfg.rescale = true;
    cfg.seed = base_cfg.seed + static_cast<uint64_t>(n) * 0x9e37ULL;
    std::vector<double> vals(trials_per_n);
    walk_stream(cfg, [&](long t, const Vec& e) { vals[t] = f(e); });
    double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / trials_per_n;
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= std::max<long>(1, trials_per_n - 1);
    BePoint pt;
    pt.N = n;
    pt.walk_mean = mean;
    pt.error = std::abs(mean - reference);
    pt.mc_stderr = std::sqrt(var / trials_per_n);
    curve.points.push_back(pt);
  }
  // log-log least squares slope
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (const auto& p : curve.points) {
    if (p.error <= 0) continue;
    double lx = std::log(static_cast<double>(p.N)), ly = std::log(p.error);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  curve.slope = cnt >= 2 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
  return curve;
}

namespace {

// Quadrature of f(x) u(1, D_{1/sqrt N} x) dx over the bump support, where u is
// either the Levy density (normalized centered Heisenberg) or a Gaussian-kernel
// estimate from a diffusion batch with Silverman bandwidths.
struct DensityOracle {
  LltPrediction mode;
  const WeightDecomposition* dec;
  Mat kde_samples;
  Vec bandwidth;

  double density(const Vec& x) const {
    if (mode == LltPrediction::LevyHeisenberg) return levy_density(x[0], x[1], x[2]);
    double acc = 0;
    const int d = static_cast<int>(kde_samples.cols());
    for (long i = 0; i < kde_samples.rows(); ++i) {
      double q = 0;
      for (int c = 0; c < d; ++c) {
        double u = (x[c] - kde_samples(i, c)) / bandwidth[c];
        q += u * u;
      }
      acc += std::exp(-0.5 * q);
    }
    double norm = std::pow(2.0 * M_PI, d / 2.0);
    for (int c = 0; c < d; ++c) norm *= bandwidth[c];
    return acc / (kde_samples.rows() * norm);
  }
};

}  // namespace

LltResult llt_ratio(const WalkConfig& cfg, const SmoothBump& f, long nsamples,
                    LltPrediction mode, const GeneratorSpec* gen, long kde_trials,
                    const Vec* dev_g, const Vec* dev_h, bool force_run) {
  LltResult res;
  const int d_hom = homogeneous_dimension(cfg.dec.filt);
  const int dim = cfg.alg->dim();
  const double n_pow = std::pow(static_cast<double>(cfg.N), 0.5 * d_hom);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(cfg.N));

  DensityOracle oracle;
  oracle.mode = mode;
  oracle.dec = &cfg.dec;
  if (mode == LltPrediction::LevyHeisenberg && dim != 3)
    throw std::invalid_argument(
        "the Levy-density prediction applies to the 3-dimensional Heisenberg setting");
  if (mode == LltPrediction::DiffusionKde) {
    if (!gen) throw std::invalid_argument("KDE prediction needs a generator");
    DiffusionConfig dc{*gen, 1.0, 1e-3, kde_trials, cfg.seed + 77, cfg.threads};
    oracle.kde_samples = diffusion_batch(dc).data;
    oracle.bandwidth = Vec(dim);
    for (int c = 0; c < dim; ++c) {
      double mean = oracle.kde_samples.col(c).mean();
      double var = (oracle.kde_samples.col(c).array() - mean).square().sum() /
                   (kde_trials - 1);
      oracle.bandwidth[c] =
          std::sqrt(var) * std::pow(4.0 / ((dim + 2.0) * kde_trials), 1.0 / (dim + 4.0));
    }
  }

  // prediction and expected-hit integrals over the bump box (tensor midpoint)
  const int cells = dim <= 3 ? 14 : 8;
  long total_cells = 1;
  for (int c = 0; c < dim; ++c) total_cells *= cells;
  double pred_int = 0, mass_int = 0, cell_vol = 1;
  for (int c = 0; c < dim; ++c) cell_vol *= 2.0 * f.halfwidth[c] / cells;
  Vec x(dim);
  for (long idx = 0; idx < total_cells; ++idx) {
    long rem = idx;
    for (int c = 0; c < dim; ++c) {
      int ic = rem % cells;
      rem /= cells;
      x[c] = f.center[c] + f.halfwidth[c] * (-1.0 + (2.0 * ic + 1.0) / cells);
    }
    double u = oracle.density(cfg.dec.dilate(inv_sqrt_n, x));
    pred_int += f(x) * u * cell_vol;
    mass_int += u * cell_vol;
  }
  res.prediction = pred_int;  // already N^{d/2} (D_sqrtN nu)(f) by the change of variables
  res.expected_hits = static_cast<double>(nsamples) * mass_int / n_pow;
  if (res.expected_hits < 100.0) {
    res.required_budget = static_cast<long>(
        std::ceil(100.0 * nsamples / std::max(res.expected_hits, 1e-12)));
    res.refused = !force_run;
    if (res.refused) return res;
  }

  WalkConfig wcfg = cfg;
  wcfg.trials = nsamples;
  wcfg.rescale = false;
  std::mutex mu;
  double sum = 0, sum2 = 0;
  long hits = 0;
  const bool deviated = dev_g || dev_h;
  BchScratch dev_scratch = cfg.alg->make_scratch();
  walk_stream(wcfg, [&](long, const Vec& e) {
    Vec y = e;
    if (deviated) {
      if (dev_g) y = cfg.alg->product(*dev_g, y);
      if (dev_h) y = cfg.alg->product(y, *dev_h);
    }
    double v = f(y);
    bool in = f.in_support(y);
    std::lock_guard<std::mutex> lock(mu);
    sum += v;
    sum2 += v * v;
    hits += in;
  });
  const double mean = sum / nsamples;
  const double var = std::max(0.0, sum2 / nsamples - mean * mean);
  const double se = std::sqrt(var / nsamples);
  res.estimate = n_pow * mean;
  res.ci_low = n_pow * (mean - 1.96 * se);
  res.ci_high = n_pow * (mean + 1.96 * se);
  res.support_hits = hits;
  res.ratio = res.prediction != 0 ? res.estimate / res.prediction : 0.0;
  return res;
}

AsympCloseReport asymptotically_close(const IncrementMeasure& mu1,
                                      const IncrementMeasure& mu2, AlgebraPtr alg,
                                      double tol) {
  AsympCloseReport rep;
  auto m1 = mu1.exact_mean(), m2 = mu2.exact_mean();
  auto c1 = mu1.coordinate_covariance(), c2 = mu2.coordinate_covariance();
  if (!m1 || !m2 || !c1 || !c2) {
    rep.detail = "closed-form moments unavailable; not comparable by this criterion";
    return rep;
  }
  Filtration f1 = weight_filtration(alg, *m1);
  Filtration f2 = weight_filtration(alg, *m2);
  rep.filtrations_match = f1.b_max() == f2.b_max();
  if (rep.filtrations_match)
    for (int i = 1; i <= f1.b_max(); ++i)
      if (!spans_equal(f1.subspaces[i - 1], f2.subspaces[i - 1])) {
        rep.filtrations_match = false;
        break;
      }
  if (!rep.filtrations_match) {
    rep.detail = "weight filtrations differ; not comparable by this criterion";
    return rep;
  }
  WeightDecomposition dec = choose_weight_decomposition(f1);
  MomentReport r1 = abelian_stats(mu1, dec);
  MomentReport r2 = abelian_stats(mu2, dec);

  rep.abelian_mean_match = true;
  RatVec am1 = r1.abelian_mean_exact, am2 = r2.abelian_mean_exact;
  for (size_t i = 0; i < am1.size(); ++i)
    if (am1[i] != am2[i]) rep.abelian_mean_match = false;
  rep.abelian_cov_match =
      (r1.abelian_cov - r2.abelian_cov).cwiseAbs().maxCoeff() <= tol;

  // means agree modulo g^(3)
  RatVec diff = sub(*m1, *m2);
  if (f1.b_max() >= 3) {
    Rref g3 = rref(f1.subspaces[2]);
    rep.mean_mod_g3_match = span_contains(g3, diff);
  } else {
    rep.mean_mod_g3_match = is_zero(diff);
  }

  bool close = rep.abelian_mean_match && rep.abelian_cov_match && rep.mean_mod_g3_match;
  rep.verdict = close ? CloseVerdict::Close : CloseVerdict::NotClose;
  return rep;
}

}  // namespace nilwalk
