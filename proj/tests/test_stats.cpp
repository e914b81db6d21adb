#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nilwalk/diffusion.hpp"
#include "nilwalk/presets.hpp"
#include "nilwalk/stats.hpp"

#include <numeric>

using namespace nilwalk;

namespace {

AlgebraPtr make(const LieAlgebra& a) { return std::make_shared<LieAlgebra>(a); }

RatVec rat_basis(int dim, int i) {
  RatVec v = rat_zero(dim);
  v[i] = 1;
  return v;
}

Mat gaussian_batch(int n, int d, uint64_t seed, double mean = 0, double sd = 1) {
  Rng rng(seed);
  Mat m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = mean + sd * rng.next_normal();
  return m;
}

}  // namespace

TEST_CASE("ecf basics") {
  Mat zeros = Mat::Zero(50, 2);
  std::vector<Vec> xis;
  Vec xi0 = Vec::Zero(2), xi1(2);
  xi1 << 0.3, -1.2;
  xis = {xi0, xi1};
  auto vals = ecf(zeros, xis);
  CHECK(std::abs(vals[0] - std::complex<double>(1, 0)) < 1e-15);
  CHECK(std::abs(vals[1] - std::complex<double>(1, 0)) < 1e-15);

  Mat g = gaussian_batch(20000, 2, 5);
  std::vector<Vec> grid;
  Rng rng(9);
  for (int k = 0; k < 100; ++k) {
    Vec xi(2);
    xi << rng.next_normal() * 0.3, rng.next_normal() * 0.3;
    grid.push_back(xi);
  }
  auto e = ecf(g, grid);
  double supgap = 0;
  for (size_t k = 0; k < grid.size(); ++k) {
    double want = std::exp(-2.0 * M_PI * M_PI * grid[k].squaredNorm());
    supgap = std::max(supgap, std::abs(e[k] - std::complex<double>(want, 0)));
    CHECK(std::abs(e[k]) <= 1.0 + 1e-12);
  }
  CHECK(supgap <= 3.0 / std::sqrt(20000.0));
}

TEST_CASE("two-sample distance: identical, same-law, and separated batches") {
  Mat a = gaussian_batch(5000, 3, 101);
  ComparisonReport same = two_sample_distance(a, a);
  CHECK(same.max_ks == 0.0);
  CHECK(same.energy <= same.energy_threshold);

  Mat b = gaussian_batch(5000, 3, 201);
  ComparisonReport rep = two_sample_distance(a, b);
  CHECK(rep.max_ks <= 1.95 * std::sqrt(2.0 / 5000.0));
  CHECK(rep.pass);
  // symmetry
  ComparisonReport rev = two_sample_distance(b, a, 20, 7);
  CHECK(rev.max_ks == doctest::Approx(rep.max_ks).epsilon(0.3));

  Mat c = gaussian_batch(20000, 1, 3, 0.0);
  Mat d = gaussian_batch(20000, 1, 4, 0.5);
  ComparisonReport sep = two_sample_distance(c, d);
  CHECK(sep.coord_ks[0] == doctest::Approx(0.1974).epsilon(0.1));
  CHECK(!sep.pass);
}

TEST_CASE("one-sample KS and Anderson-Darling behave as expected") {
  Rng rng(13);
  std::vector<double> g(20000), u(20000);
  for (auto& v : g) v = rng.next_normal();
  for (auto& v : u) v = rng.next_double();
  auto phi = [](double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); };
  CHECK(ks_one_sample(g, phi) < 1.36 / std::sqrt(20000.0) * 1.5);
  CHECK(ks_one_sample(u, phi) > 0.05);
  CHECK(anderson_darling_normal(g) < kAndersonDarling5pc);
  CHECK(anderson_darling_normal(u) > 10.0);
}

TEST_CASE("berry-esseen curve: constant functions have zero error") {
  WalkConfig cfg;
  cfg.alg = make(heisenberg());
  cfg.dec = choose_weight_decomposition(central_series(cfg.alg));
  cfg.measure = IncrementMeasure::gaussian(3, rat_zero(3), {0, 1}, Mat::Identity(2, 2));
  cfg.seed = 21;
  SmoothBump f;
  f.center = Vec::Zero(3);
  f.halfwidth = Vec::Constant(3, 1e9);  // effectively constant 1 on all samples
  BeCurve curve = berry_esseen_curve(cfg, f, {16, 64}, 1.0, 2000);
  for (const auto& p : curve.points) CHECK(p.error < 1e-6);
}

TEST_CASE("berry-esseen slope on an abelian third-moment measure") {
  WalkConfig cfg;
  cfg.alg = make(LieAlgebra(1, {}, {}));
  cfg.dec = choose_weight_decomposition(central_series(cfg.alg));
  // centered lattice measure with strong skew: -1 w.p. 3/4, +3 w.p. 1/4
  cfg.measure = IncrementMeasure::atomic(
      1, {{{Rat(-1)}, Rat(3, 4)}, {{Rat(3)}, Rat(1, 4)}}, 3);
  cfg.seed = 2025;
  SmoothBump f;
  f.center = Vec::Zero(1);
  f.center[0] = 1.0;  // off-center bump picks up the skew term
  f.halfwidth = Vec::Constant(1, 1.5);
  // reference: E f under N(0, 3) by quadrature (variance = 3/4 + 9/4 = 3)
  const double sd = std::sqrt(3.0);
  double ref = 0;
  const int nq = 20001;
  for (int i = 0; i < nq; ++i) {
    double x = -8.0 * sd + 16.0 * sd * i / (nq - 1);
    Vec xv(1);
    xv << x;
    ref += f(xv) * std::exp(-0.5 * x * x / (sd * sd)) /
           (sd * std::sqrt(2.0 * M_PI)) * (16.0 * sd / (nq - 1));
  }
  BeCurve curve = berry_esseen_curve(cfg, f, {64, 256, 1024}, ref, 400000);
  for (const auto& p : curve.points) CHECK(p.error > 3.0 * p.mc_stderr);
  CHECK(curve.slope > -0.65);
  CHECK(curve.slope < -0.35);
}

TEST_CASE("llt ratio is unbiased on the abelian gaussian") {
  WalkConfig cfg;
  cfg.alg = make(LieAlgebra(2, {}, {}));
  cfg.dec = choose_weight_decomposition(central_series(cfg.alg));
  cfg.measure = IncrementMeasure::gaussian(2, rat_zero(2), {0, 1}, Mat::Identity(2, 2));
  cfg.seed = 31;
  GeneratorSpec gen = generator_from_measure(cfg.dec, abelian_stats(cfg.measure, cfg.dec));
  SmoothBump f;
  f.center = Vec::Zero(2);
  f.halfwidth = Vec::Constant(2, 2.0);
  cfg.N = 16;
  LltResult res = llt_ratio(cfg, f, 300000, LltPrediction::DiffusionKde, &gen, 20000);
  REQUIRE(!res.refused);
  CHECK(res.expected_hits > 100);
  // the KDE prediction carries a few percent of Silverman smoothing bias, so
  // the comparison tolerance is looser than the Monte Carlo CI
  CHECK(std::abs(res.ratio - 1.0) < 0.1);
  CHECK(res.ci_low < res.estimate);
  CHECK(res.estimate < res.ci_high);
  CHECK(res.ci_high - res.ci_low < 0.2 * res.estimate);
}

TEST_CASE("llt refuses when the expected hit count is too small") {
  WalkConfig cfg;
  cfg.alg = make(LieAlgebra(2, {}, {}));
  cfg.dec = choose_weight_decomposition(central_series(cfg.alg));
  cfg.measure = IncrementMeasure::gaussian(2, rat_zero(2), {0, 1}, Mat::Identity(2, 2));
  cfg.seed = 37;
  cfg.N = 1024;
  SmoothBump f;
  f.center = Vec::Zero(2);
  f.halfwidth = Vec::Constant(2, 0.25);
  GeneratorSpec gen = generator_from_measure(cfg.dec, abelian_stats(cfg.measure, cfg.dec));
  LltResult res = llt_ratio(cfg, f, 2000, LltPrediction::DiffusionKde, &gen, 5000);
  CHECK(res.refused);
  CHECK(res.required_budget > 2000);
}

TEST_CASE("llt estimates are monotone for nested bumps under paired seeds") {
  WalkConfig cfg;
  cfg.alg = make(heisenberg());
  cfg.dec = choose_weight_decomposition(central_series(cfg.alg));
  cfg.measure = IncrementMeasure::gaussian(3, rat_zero(3), {0, 1}, Mat::Identity(2, 2));
  cfg.seed = 41;
  cfg.N = 16;
  SmoothBump small, big;
  small.center = big.center = Vec::Zero(3);
  small.halfwidth = Vec::Constant(3, 1.0);
  big.halfwidth = Vec::Constant(3, 2.0);
  LltResult rs = llt_ratio(cfg, small, 50000, LltPrediction::LevyHeisenberg, nullptr,
                           0, nullptr, nullptr, /*force_run=*/true);
  LltResult rb = llt_ratio(cfg, big, 50000, LltPrediction::LevyHeisenberg, nullptr,
                           0, nullptr, nullptr, /*force_run=*/true);
  CHECK(rs.estimate <= rb.estimate);
}

TEST_CASE("llt deviations translate the test function") {
  // on an abelian algebra g * x * h = g + x + h, so deviations act as a
  // translation of the bump center
  WalkConfig cfg;
  cfg.alg = make(LieAlgebra(2, {}, {}));
  cfg.dec = choose_weight_decomposition(central_series(cfg.alg));
  cfg.measure = IncrementMeasure::gaussian(2, rat_zero(2), {0, 1}, Mat::Identity(2, 2));
  cfg.seed = 47;
  cfg.N = 16;
  SmoothBump f;
  f.center = Vec::Zero(2);
  f.halfwidth = Vec::Constant(2, 2.0);
  Vec g(2), h(2);
  g << 0.7, -0.2;
  h << -0.3, 0.5;
  SmoothBump f_shifted = f;
  f_shifted.center = -(g + h);
  GeneratorSpec gen =
      generator_from_measure(cfg.dec, abelian_stats(cfg.measure, cfg.dec));
  LltResult dev = llt_ratio(cfg, f, 50000, LltPrediction::DiffusionKde, &gen, 2000,
                            &g, &h, /*force_run=*/true);
  LltResult undev = llt_ratio(cfg, f_shifted, 50000, LltPrediction::DiffusionKde,
                              &gen, 2000, nullptr, nullptr, /*force_run=*/true);
  CHECK(dev.estimate == doctest::Approx(undev.estimate).epsilon(1e-12));
}

TEST_CASE("asymptotically close: reflexive, g3 shifts, covariance changes") {
  auto l = make(filiform3());
  RatVec xbar = rat_basis(4, 1);
  IncrementMeasure mu =
      IncrementMeasure::gaussian(4, xbar, {0, 1}, Mat::Identity(2, 2));
  AsympCloseReport self = asymptotically_close(mu, mu, l);
  CHECK(self.verdict == CloseVerdict::Close);

  // shift by a g^(3) vector (e3 and e4 lie in g^(3) for Xbar = T)
  RatVec z = rat_zero(4);
  z[2] = Rat(5, 7);
  z[3] = Rat(-2);
  AsympCloseReport shifted =
      asymptotically_close(mu, IncrementMeasure::shifted(mu, z), l);
  CHECK(shifted.verdict == CloseVerdict::Close);

  // shift that moves the mean below g^(3): the drift class changes
  RatVec w = rat_zero(4);
  w[0] = Rat(1, 3);
  AsympCloseReport moved =
      asymptotically_close(mu, IncrementMeasure::shifted(mu, w), l);
  CHECK(moved.verdict != CloseVerdict::Close);

  // doubled covariance
  IncrementMeasure wide =
      IncrementMeasure::gaussian(4, xbar, {0, 1}, 2.0 * Mat::Identity(2, 2));
  AsympCloseReport cov = asymptotically_close(mu, wide, l);
  CHECK(cov.verdict == CloseVerdict::NotClose);
  CHECK(cov.filtrations_match);
  CHECK(!cov.abelian_cov_match);
}

TEST_CASE("asymptotically close: differing filtrations are not comparable") {
  auto l = make(filiform3());
  IncrementMeasure muT =
      IncrementMeasure::gaussian(4, rat_basis(4, 1), {0, 1}, Mat::Identity(2, 2));
  IncrementMeasure muA =
      IncrementMeasure::gaussian(4, rat_basis(4, 0), {0, 1}, Mat::Identity(2, 2));
  AsympCloseReport rep = asymptotically_close(muT, muA, l);
  CHECK(rep.verdict == CloseVerdict::NotComparable);
}

TEST_CASE("a mean shift inside g^(2) but outside g^(3) breaks closeness") {
  // heisenberg, biased: g^(2) = g^(3) = R e3, so test on unitriangular(4)
  auto u = make(unitriangular(4));
  RatVec xbar = rat_basis(6, 0);  // E12 direction
  IncrementMeasure mu =
      IncrementMeasure::gaussian(6, xbar, {0, 3, 5}, Mat::Identity(3, 3));
  Filtration f = weight_filtration(u, xbar);
  // find a vector in g^(2) not in g^(3)
  REQUIRE(f.dim_at(2) > f.dim_at(3));
  RatVec v = complement_rows(f.subspaces[1], f.subspaces[2])[0];
  AsympCloseReport rep =
      asymptotically_close(mu, IncrementMeasure::shifted(mu, v), u);
  CHECK(rep.verdict == CloseVerdict::NotClose);
  CHECK(rep.filtrations_match);
  CHECK(rep.abelian_mean_match);
  CHECK(!rep.mean_mod_g3_match);
}
