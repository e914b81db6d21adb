#include "nilwalk/diffusion.hpp"

#include <Eigen/Eigenvalues>

#include <atomic>
#include <cmath>
#include <thread>

namespace nilwalk {

GeneratorSpec generator_from_measure(const WeightDecomposition& dec,
                                     const MomentReport& moments) {
  if (moments.degenerate_covariance)
    throw HypothesisError("cannot build generator: degenerate abelianized covariance");
  GeneratorSpec gen;
  gen.ext = bias_extension(dec);
  const WeightDecomposition& ed = gen.ext.ext_dec;
  const int ed_dim = ed.dim();
  auto [l1b, l1e] = ed.layer_range(1);
  const int q = l1e - l1b;
  if (q != moments.abelian_cov.rows())
    throw std::invalid_argument("covariance size does not match m^(1)");

  // symmetric PSD square root of the abelianized covariance
  Eigen::SelfAdjointEigenSolver<Mat> es(moments.abelian_cov);
  if (es.eigenvalues().minCoeff() <= 0)
    throw HypothesisError("cannot build generator: degenerate abelianized covariance");
  Mat root = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
             es.eigenvectors().transpose();
  for (int i = 0; i < q; ++i) {
    Vec e = Vec::Zero(ed_dim);
    for (int r = 0; r < q; ++r) e[l1b + r] = root(r, i);
    gen.frame_m.push_back(e);
  }

  // B = E[x^(2)] carried into the extension's m-coordinates
  Vec b_ext = gen.ext.trivial ? moments.commutator_mean
                              : gen.ext.embed(moments.commutator_mean);
  gen.drift_b_m = ed.to_m(b_ext);

  if (!moments.commutator_mean_exact.empty()) {
    RatVec b_ext_exact = gen.ext.trivial ? moments.commutator_mean_exact
                                         : gen.ext.embed(moments.commutator_mean_exact);
    gen.drift_b_exact = ed.to_m(b_ext_exact);
  }

  // Y = chi
  gen.y_m = Vec::Zero(ed_dim);
  gen.y_exact = rat_zero(ed_dim);
  if (!gen.ext.trivial) {
    Vec chi_d(ed_dim);
    for (int i = 0; i < ed_dim; ++i) chi_d[i] = to_double(gen.ext.chi[i]);
    gen.y_m = ed.to_m(chi_d);
    gen.y_exact = ed.to_m(gen.ext.chi);
  }
  return gen;
}

Vec simulate_diffusion_endpoint(const DiffusionConfig& cfg, Rng& rng) {
  const GeneratorSpec& gen = cfg.gen;
  const LieAlgebra& graded = *gen.ext.ext_graded.graded;
  const int d = graded.dim();
  const long steps = std::max<long>(1, std::lround(cfg.t / cfg.dt));
  const double dt = cfg.t / static_cast<double>(steps);
  const double sdt = std::sqrt(dt);
  const int q = static_cast<int>(gen.frame_m.size());

  BchScratch scratch = graded.make_scratch();
  std::vector<double> z(d, 0.0), incr(d), out(d);
  for (long s = 0; s < steps; ++s) {
    for (int i = 0; i < d; ++i) incr[i] = dt * (gen.drift_b_m[i] + gen.y_m[i]);
    for (int i = 0; i < q; ++i) {
      double g = sdt * rng.next_normal();
      const Vec& e = gen.frame_m[i];
      for (int k = 0; k < d; ++k) incr[k] += g * e[k];
    }
    graded.product(z.data(), incr.data(), out.data(), scratch);
    std::swap(z, out);
  }
  // W(t) = Z(t) *' (-tY)
  for (int i = 0; i < d; ++i) incr[i] = -cfg.t * gen.y_m[i];
  graded.product(z.data(), incr.data(), out.data(), scratch);
  Vec w_m(d);
  std::copy(out.begin(), out.end(), w_m.data());
  Vec amb = gen.ext.ext_dec.from_m(w_m);
  return gen.ext.project_to_base(amb).head(gen.ext.base->dim());
}

void diffusion_stream(const DiffusionConfig& cfg,
                      const std::function<void(long, const Vec&)>& sink) {
  int nthreads = cfg.threads > 0 ? cfg.threads
                                 : std::max(1u, std::thread::hardware_concurrency());
  std::atomic<long> next{0};
  const long chunk = std::max<long>(1, cfg.trials / (nthreads * 16));
  std::vector<std::thread> workers;
  for (int w = 0; w < nthreads; ++w) {
    workers.emplace_back([&]() {
      for (;;) {
        long begin = next.fetch_add(chunk);
        if (begin >= cfg.trials) break;
        long end = std::min(cfg.trials, begin + chunk);
        for (long t = begin; t < end; ++t) {
          Rng rng = Rng::stream(cfg.seed, static_cast<uint64_t>(t));
          sink(t, simulate_diffusion_endpoint(cfg, rng));
        }
      }
    });
  }
  for (auto& t : workers) t.join();
}

SampleBatch diffusion_batch(const DiffusionConfig& cfg) {
  SampleBatch batch;
  batch.names = cfg.gen.ext.base->basis_names();
  batch.N = cfg.trials;
  batch.seed = cfg.seed;
  batch.data = Mat(cfg.trials, cfg.gen.ext.base->dim());
  diffusion_stream(cfg, [&](long t, const Vec& e) { batch.data.row(t) = e.transpose(); });
  return batch;
}

namespace {

// Composite Gauss-Legendre nodes on [0, cut] with unit panels.
struct LevyQuad {
  std::vector<double> nodes, weights;
  LevyQuad(double cut, int per_panel) {
    // 16-point Gauss-Legendre reference nodes on [-1, 1]
    static const double x16[8] = {0.0950125098376374, 0.2816035507792589,
                                  0.4580167776572274, 0.6178762444026438,
                                  0.7554044083550030, 0.8656312023878318,
                                  0.9445750230732326, 0.9894009349916499};
    static const double w16[8] = {0.1894506104550685, 0.1826034150449236,
                                  0.1691565193950025, 0.1495959888165767,
                                  0.1246289712555339, 0.0951585116824928,
                                  0.0622535239386479, 0.0271524594117541};
    int panels = static_cast<int>(std::ceil(cut));
    double width = cut / panels;
    for (int p = 0; p < panels; ++p) {
      double a = p * width, b = a + width;
      double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      int reps = per_panel / 16;
      (void)reps;
      for (int i = 0; i < 8; ++i) {
        nodes.push_back(mid - half * x16[i]);
        weights.push_back(half * w16[i]);
        nodes.push_back(mid + half * x16[i]);
        weights.push_back(half * w16[i]);
      }
    }
  }
};

double xi_over_sinh(double xi) {
  return std::abs(xi) < 1e-5 ? 1.0 - xi * xi / 6.0 : xi / std::sinh(xi);
}

double xi_over_tanh(double xi) {
  return std::abs(xi) < 1e-5 ? 1.0 + xi * xi / 3.0 : xi / std::tanh(xi);
}

double levy_integral(double r2, double z, double cut) {
  // 2 * Int_0^cut cos(2 xi z) (xi/sinh xi) exp(-r2 xi/(2 tanh xi)) dxi
  static const LevyQuad quad40(40.0, 16);
  static const LevyQuad quad60(60.0, 16);
  const LevyQuad& q = cut > 40.0 ? quad60 : quad40;
  double acc = 0;
  for (size_t i = 0; i < q.nodes.size(); ++i) {
    double xi = q.nodes[i];
    acc += q.weights[i] * std::cos(2.0 * xi * z) * xi_over_sinh(xi) *
           std::exp(-0.5 * r2 * xi_over_tanh(xi));
  }
  return 2.0 * acc;
}

}  // namespace

double levy_density(double x, double y, double z) {
  const double r2 = x * x + y * y;
  double v = levy_integral(r2, z, 40.0);
  double v2 = levy_integral(r2, z, 60.0);
  if (std::abs(v2 - v) > 1e-9 * (1.0 + std::abs(v2)))
    throw QuadratureError("Levy density quadrature did not converge");
  double out = v2 / (2.0 * M_PI * M_PI);
  return out > 0 ? out : 0.0;
}

double levy_marginal_z(double z) {
  // Integrating the planar Gaussian factor gives 2 pi tanh(xi)/xi, so the
  // marginal is (1/pi) Int cos(2 xi z) / cosh(xi) dxi.
  static const LevyQuad quad(40.0, 16);
  double acc = 0;
  for (size_t i = 0; i < quad.nodes.size(); ++i) {
    double xi = quad.nodes[i];
    acc += quad.weights[i] * std::cos(2.0 * xi * z) / std::cosh(xi);
  }
  return 2.0 * acc / M_PI;
}

double levy_marginal_cdf(double z) {
  // CDF by quadrature of the marginal from 0 to |z|; the marginal is even.
  double az = std::abs(z);
  static const LevyQuad base(40.0, 16);
  // map [0, az] panels
  int panels = std::max(1, static_cast<int>(std::ceil(az * 4)));
  static const double x8[4] = {0.1834346424956498, 0.5255324099163290,
                               0.7966664774136267, 0.9602898564975363};
  static const double w8[4] = {0.3626837833783620, 0.3137066458778873,
                               0.2223810344533745, 0.1012285362903763};
  double half_integral = 0;
  double width = az / panels;
  for (int p = 0; p < panels; ++p) {
    double a = p * width, mid = a + 0.5 * width, half = 0.5 * width;
    for (int i = 0; i < 4; ++i) {
      half_integral += half * w8[i] * levy_marginal_z(mid - half * x8[i]);
      half_integral += half * w8[i] * levy_marginal_z(mid + half * x8[i]);
    }
  }
  return z >= 0 ? 0.5 + half_integral : 0.5 - half_integral;
}

ComparisonReport scaling_check(const GeneratorSpec& gen, double t, double r,
                               long trials, double dt, uint64_t seed, int threads) {
  DiffusionConfig ca{gen, r * t, dt, trials, seed, threads};
  SampleBatch a = diffusion_batch(ca);
  DiffusionConfig cb{gen, t, dt, trials, seed + 1000003, threads};
  SampleBatch b = diffusion_batch(cb);
  const double sr = std::sqrt(r);
  for (long i = 0; i < b.data.rows(); ++i) {
    Vec v = b.data.row(i).transpose();
    b.data.row(i) = gen.ext.base_dec.dilate(sr, v).transpose();
  }
  return two_sample_distance(a.data, b.data);
}

ComparisonReport semigroup_check(const GeneratorSpec& gen, double s, double t,
                                 long trials, double dt, uint64_t seed, int threads) {
  DiffusionConfig cst{gen, s + t, dt, trials, seed, threads};
  SampleBatch direct = diffusion_batch(cst);

  const GradedStructure& gg = gen.ext.ext_graded;
  Mat composed(trials, gen.ext.base->dim());
  if (s > 0 && t > 0) {
    DiffusionConfig cs{gen, s, dt, trials, seed + 2000003, threads};
    DiffusionConfig ct{gen, t, dt, trials, seed + 3000017, threads};
    SampleBatch ws = diffusion_batch(cs);
    SampleBatch wt = diffusion_batch(ct);
    Vec sy_amb = gen.ext.ext_dec.from_m(s * gen.y_m);
    for (long i = 0; i < trials; ++i) {
      Vec a = gen.ext.embed(ws.data.row(i).transpose());
      Vec b = gen.ext.embed(wt.data.row(i).transpose());
      Vec adj = gg.product(gg.product(sy_amb, b), -sy_amb);
      Vec c = gg.product(a, adj);
      composed.row(i) = gen.ext.project_to_base(c).head(gen.ext.base->dim()).transpose();
    }
  } else if (t > 0) {  // s = 0: left factor is delta_0
    DiffusionConfig ct{gen, t, dt, trials, seed + 3000017, threads};
    composed = diffusion_batch(ct).data;
  } else {
    DiffusionConfig cs{gen, s, dt, trials, seed + 2000003, threads};
    composed = diffusion_batch(cs).data;
  }
  return two_sample_distance(direct.data, composed);
}

}  // namespace nilwalk
