#include "nilwalk/measure.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>

namespace nilwalk {

namespace {

Vec rat_to_vec(const RatVec& r) {
  Vec v(static_cast<int>(r.size()));
  for (size_t i = 0; i < r.size(); ++i) v[static_cast<int>(i)] = to_double(r[i]);
  return v;
}

Mat psd_sqrt(const Mat& cov, double* min_eig = nullptr) {
  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  Vec lam = es.eigenvalues();
  if (min_eig) *min_eig = lam.minCoeff();
  Vec s = lam.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

IncrementMeasure IncrementMeasure::atomic(int dim,
                                          std::vector<std::pair<RatVec, Rat>> atoms,
                                          int moment_order) {
  IncrementMeasure m;
  m.kind_ = MeasureKind::Atomic;
  m.dim_ = dim;
  m.moment_order_ = moment_order;
  m.atoms_ = std::move(atoms);
  Rat total = 0;
  double cum = 0;
  for (const auto& [x, p] : m.atoms_) {
    if (static_cast<int>(x.size()) != dim)
      throw std::invalid_argument("atom length does not match dim");
    if (p < 0) throw std::invalid_argument("atom probability must be nonnegative");
    total += p;
    cum += to_double(p);
    m.atoms_d_.push_back(rat_to_vec(x));
    m.cum_.push_back(cum);
  }
  Rat err = total - 1;
  if (err < 0) err = -err;
  if (err > Rat(1, 1000000000000LL))
    throw std::invalid_argument("atom probabilities must sum to 1");
  if (!m.cum_.empty()) m.cum_.back() = 1.0;
  return m;
}

IncrementMeasure IncrementMeasure::gaussian(int dim, RatVec mean,
                                            std::vector<int> coords, Mat cov,
                                            int moment_order) {
  IncrementMeasure m;
  m.kind_ = MeasureKind::Gaussian;
  m.dim_ = dim;
  m.moment_order_ = moment_order;
  if (static_cast<int>(mean.size()) != dim)
    throw std::invalid_argument("mean length does not match dim");
  m.mean_exact_ = std::move(mean);
  m.mean_d_ = rat_to_vec(m.mean_exact_);
  if (coords.empty())
    for (int i = 0; i < dim; ++i) coords.push_back(i);
  for (int c : coords)
    if (c < 0 || c >= dim) throw std::invalid_argument("gaussian coord out of range");
  m.gauss_coords_ = std::move(coords);
  const int k = static_cast<int>(m.gauss_coords_.size());
  if (cov.rows() != k || cov.cols() != k)
    throw std::invalid_argument("covariance size does not match coords");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + cov.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("covariance must be symmetric");
  double min_eig = 0;
  m.noise_factor_ = psd_sqrt(cov, &min_eig);
  if (min_eig < -1e-9 * (1.0 + cov.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("covariance must be positive semidefinite");
  m.cov_ = std::move(cov);
  return m;
}

IncrementMeasure IncrementMeasure::shifted(IncrementMeasure base, RatVec shift) {
  if (static_cast<int>(shift.size()) != base.dim())
    throw std::invalid_argument("shift length does not match dim");
  IncrementMeasure m;
  m.kind_ = MeasureKind::Shifted;
  m.dim_ = base.dim();
  m.moment_order_ = base.moment_order();
  m.shift_ = std::move(shift);
  m.shift_d_ = rat_to_vec(m.shift_);
  m.base_ = std::make_shared<IncrementMeasure>(std::move(base));
  return m;
}

IncrementMeasure IncrementMeasure::product(std::vector<IncrementMeasure> factors) {
  if (factors.empty()) throw std::invalid_argument("product needs factors");
  IncrementMeasure m;
  m.kind_ = MeasureKind::Product;
  m.dim_ = factors.front().dim();
  m.moment_order_ = factors.front().moment_order();
  for (auto& f : factors) {
    if (f.dim() != m.dim_) throw std::invalid_argument("factor dims differ");
    m.moment_order_ = std::min(m.moment_order_, f.moment_order());
    if (f.kind() == MeasureKind::Product) {  // flatten nested convolutions
      for (auto& g : f.factors_) m.factors_.push_back(std::move(g));
    } else {
      m.factors_.push_back(std::move(f));
    }
  }
  return m;
}

Vec IncrementMeasure::sample(const LieAlgebra& alg, Rng& rng) const {
  switch (kind_) {
    case MeasureKind::Atomic: {
      double u = rng.next_double();
      size_t i = std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin();
      if (i >= atoms_d_.size()) i = atoms_d_.size() - 1;
      return atoms_d_[i];
    }
    case MeasureKind::Gaussian: {
      Vec x = mean_d_;
      const int k = static_cast<int>(gauss_coords_.size());
      Vec z(k);
      for (int i = 0; i < k; ++i) z[i] = rng.next_normal();
      Vec noise = noise_factor_ * z;
      for (int i = 0; i < k; ++i) x[gauss_coords_[i]] += noise[i];
      return x;
    }
    case MeasureKind::Shifted: {
      Vec x = base_->sample(alg, rng);
      for (size_t i = 0; i < shift_.size(); ++i) x[static_cast<int>(i)] += to_double(shift_[i]);
      return x;
    }
    case MeasureKind::Product: {
      Vec x = factors_.front().sample(alg, rng);
      BchScratch s = alg.make_scratch();
      Vec out(alg.dim());
      for (size_t i = 1; i < factors_.size(); ++i) {
        Vec y = factors_[i].sample(alg, rng);
        alg.product(x.data(), y.data(), out.data(), s);
        x = out;
      }
      return x;
    }
  }
  throw std::logic_error("unreachable");
}

IncrementMeasure::SampleScratch IncrementMeasure::make_sample_scratch(
    const LieAlgebra& alg) const {
  SampleScratch s;
  s.a.assign(alg.dim(), 0.0);
  s.b.assign(alg.dim(), 0.0);
  s.z.assign(alg.dim(), 0.0);
  s.bch = alg.make_scratch();
  return s;
}

void IncrementMeasure::sample_into(const LieAlgebra& alg, Rng& rng, double* out,
                                   SampleScratch& s) const {
  switch (kind_) {
    case MeasureKind::Atomic: {
      double u = rng.next_double();
      size_t i = std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin();
      if (i >= atoms_d_.size()) i = atoms_d_.size() - 1;
      const Vec& a = atoms_d_[i];
      std::copy(a.data(), a.data() + dim_, out);
      return;
    }
    case MeasureKind::Gaussian: {
      std::copy(mean_d_.data(), mean_d_.data() + dim_, out);
      const int k = static_cast<int>(gauss_coords_.size());
      for (int i = 0; i < k; ++i) s.z[i] = rng.next_normal();
      for (int i = 0; i < k; ++i) {
        double acc = 0;
        for (int j = 0; j < k; ++j) acc += noise_factor_(i, j) * s.z[j];
        out[gauss_coords_[i]] += acc;
      }
      return;
    }
    case MeasureKind::Shifted: {
      base_->sample_into(alg, rng, out, s);
      for (int i = 0; i < dim_; ++i) out[i] += shift_d_[i];
      return;
    }
    case MeasureKind::Product: {
      for (const auto& f : factors_) {
        if (f.kind() == MeasureKind::Shifted) {  // may hide a nested product
          Vec v = sample(alg, rng);
          std::copy(v.data(), v.data() + dim_, out);
          return;
        }
      }
      factors_.front().sample_into(alg, rng, out, s);
      for (size_t i = 1; i < factors_.size(); ++i) {
        factors_[i].sample_into(alg, rng, s.a.data(), s);
        alg.product(out, s.a.data(), s.b.data(), s.bch);
        std::copy(s.b.begin(), s.b.end(), out);
      }
      return;
    }
  }
}

std::optional<RatVec> IncrementMeasure::exact_mean() const {
  switch (kind_) {
    case MeasureKind::Atomic: {
      RatVec m = rat_zero(dim_);
      for (const auto& [x, p] : atoms_)
        for (int i = 0; i < dim_; ++i) m[i] += p * x[i];
      return m;
    }
    case MeasureKind::Gaussian:
      return mean_exact_;
    case MeasureKind::Shifted: {
      auto b = base_->exact_mean();
      if (!b) return std::nullopt;
      return add(*b, shift_);
    }
    case MeasureKind::Product:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<Vec> IncrementMeasure::mean() const {
  auto m = exact_mean();
  if (!m) return std::nullopt;
  return rat_to_vec(*m);
}

std::optional<Mat> IncrementMeasure::coordinate_covariance() const {
  switch (kind_) {
    case MeasureKind::Atomic: {
      Vec mu = *mean();
      Mat c = Mat::Zero(dim_, dim_);
      for (size_t a = 0; a < atoms_.size(); ++a) {
        Vec d = atoms_d_[a] - mu;
        c += to_double(atoms_[a].second) * d * d.transpose();
      }
      return c;
    }
    case MeasureKind::Gaussian: {
      Mat c = Mat::Zero(dim_, dim_);
      const int k = static_cast<int>(gauss_coords_.size());
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) c(gauss_coords_[i], gauss_coords_[j]) = cov_(i, j);
      return c;
    }
    case MeasureKind::Shifted:
      return base_->coordinate_covariance();
    case MeasureKind::Product:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> IncrementMeasure::abelian_cf_modulus(
    const WeightDecomposition& dec, const Vec& xi_m1) const {
  auto [l1b, l1e] = dec.layer_range(1);
  const int q = l1e - l1b;
  switch (kind_) {
    case MeasureKind::Atomic: {
      std::complex<double> z = 0;
      for (size_t a = 0; a < atoms_.size(); ++a) {
        Vec m = dec.to_m(atoms_d_[a]);
        double phase = 0;
        for (int i = 0; i < q; ++i) phase += xi_m1[i] * m[l1b + i];
        z += to_double(atoms_[a].second) *
             std::exp(std::complex<double>(0, -2.0 * M_PI * phase));
      }
      return std::abs(z);
    }
    case MeasureKind::Gaussian: {
      // modulus of the CF of the m^(1) block: exp(-2 pi^2 xi^T S xi)
      Mat full = *coordinate_covariance();
      Mat p1 = dec.to_m_d.middleRows(l1b, q);
      Mat s = p1 * full * p1.transpose();
      double quad = xi_m1.dot(s * xi_m1);
      return std::exp(-2.0 * M_PI * M_PI * quad);
    }
    case MeasureKind::Shifted:
      return base_->abelian_cf_modulus(dec, xi_m1);
    case MeasureKind::Product: {
      double prod = 1;
      for (const auto& f : factors_) {
        auto m = f.abelian_cf_modulus(dec, xi_m1);
        if (!m) return std::nullopt;
        prod *= *m;
      }
      return prod;
    }
  }
  return std::nullopt;
}

MomentReport abelian_stats(const IncrementMeasure& mu, const WeightDecomposition& dec,
                           int nsamples, uint64_t seed, bool allow_degenerate) {
  MomentReport rep;
  auto [l1b, l1e] = dec.layer_range(1);
  const int q = l1e - l1b;
  const double mord = mu.moment_order();

  auto mean_exact = mu.exact_mean();
  auto cov_full = mu.coordinate_covariance();
  rep.closed_form = mean_exact.has_value() && cov_full.has_value();

  Vec mean_d;
  if (rep.closed_form) {
    rep.abelian_mean_exact = dec.project(1, *mean_exact);
    rep.commutator_mean_exact = dec.project(2, *mean_exact);
    mean_d = rat_to_vec(*mean_exact);
    Mat p1 = dec.to_m_d.middleRows(l1b, q);
    rep.abelian_cov = p1 * (*cov_full) * p1.transpose();
  } else {
    // Monte Carlo moments
    Vec sum = Vec::Zero(mu.dim());
    Mat sum2 = Mat::Zero(q, q);
    Rng rng(seed);
    std::vector<Vec> m1s;
    m1s.reserve(nsamples);
    for (int n = 0; n < nsamples; ++n) {
      Vec x = mu.sample(*dec.alg, rng);
      sum += x;
      Vec m = dec.to_m(x);
      m1s.push_back(m.segment(l1b, q));
    }
    mean_d = sum / nsamples;
    Vec m1_mean = Vec::Zero(q);
    for (const auto& v : m1s) m1_mean += v;
    m1_mean /= nsamples;
    for (const auto& v : m1s) {
      Vec d = v - m1_mean;
      sum2 += d * d.transpose();
    }
    rep.abelian_cov = sum2 / std::max(1, nsamples - 1);
  }
  rep.abelian_mean = dec.project(1, mean_d);
  rep.commutator_mean = dec.project(2, mean_d);

  // per-layer moments E ||x^(b)||^(m/b)
  rep.layer_moments.assign(dec.b_max() + 1, 0.0);
  if (mu.kind() == MeasureKind::Atomic) {
    for (size_t a = 0; a < mu.atoms().size(); ++a) {
      double p = to_double(mu.atoms()[a].second);
      Vec x = rat_to_vec(mu.atoms()[a].first);
      for (int b = 1; b <= dec.b_max(); ++b)
        rep.layer_moments[b] += p * std::pow(dec.layer_norm(b, x), mord / b);
    }
  } else {
    Rng rng(seed + 17);
    int n = std::min(nsamples, 200000);
    for (int i = 0; i < n; ++i) {
      Vec x = mu.sample(*dec.alg, rng);
      for (int b = 1; b <= dec.b_max(); ++b)
        rep.layer_moments[b] += std::pow(dec.layer_norm(b, x), mord / b) / n;
    }
  }

  Eigen::SelfAdjointEigenSolver<Mat> es(rep.abelian_cov);
  double lmin = es.eigenvalues().minCoeff();
  double lmax = std::max(1.0, es.eigenvalues().maxCoeff());
  rep.degenerate_covariance = lmin <= 1e-12 * lmax;
  if (rep.degenerate_covariance && !allow_degenerate)
    throw HypothesisError(
        "abelianized covariance is degenerate: support of the abelianized law "
        "lies in a proper affine subspace");
  return rep;
}

TruncationCentering truncation_centering(const IncrementMeasure& mu,
                                         const WeightDecomposition& dec, double N,
                                         int nsamples, uint64_t seed) {
  TruncationCentering out;
  auto [l1b, l1e] = dec.layer_range(1);
  const int q = l1e - l1b;
  out.c = Vec::Zero(dec.dim());
  out.tail_prob = 0;
  out.stderr_est = 0;

  auto mean_exact = mu.exact_mean();
  if (mu.kind() == MeasureKind::Atomic && mean_exact) {
    // exact: compare squared layer norms against N in rational arithmetic
    RatVec drift_m = dec.to_m(dec.project(1, *mean_exact));
    Rat thr;  // N as exact rational (N is integral in practice)
    thr = Rat(BigInt(static_cast<long long>(N)), 1);
    RatVec kept_sum = rat_zero(q);
    Rat tail = 0;
    for (const auto& [x, p] : mu.atoms()) {
      RatVec m = dec.to_m(x);
      Rat norm2 = 0;
      for (int i = 0; i < q; ++i) {
        Rat f = m[l1b + i] - drift_m[l1b + i];
        norm2 += f * f;
      }
      if (norm2 > thr) {
        tail += p;
      } else {
        for (int i = 0; i < q; ++i) kept_sum[i] += p * (m[l1b + i] - drift_m[l1b + i]);
      }
    }
    out.tail_prob = to_double(tail);
    if (tail > 0) {
      RatVec cm = rat_zero(dec.dim());
      for (int i = 0; i < q; ++i) cm[l1b + i] = -kept_sum[i] / tail;
      out.c = rat_to_vec(dec.from_m(cm));
    }
    return out;
  }

  // Monte Carlo with reported standard error
  auto mean_opt = mu.mean();
  Vec drift_m1 = Vec::Zero(q);
  if (mean_opt) {
    Vec m = dec.to_m(*mean_opt);
    drift_m1 = m.segment(l1b, q);
  } else {
    Rng rng0(seed + 99);
    Vec acc = Vec::Zero(q);
    for (int i = 0; i < nsamples; ++i)
      acc += dec.to_m(mu.sample(*dec.alg, rng0)).segment(l1b, q);
    drift_m1 = acc / nsamples;
  }
  Rng rng(seed);
  Vec kept = Vec::Zero(q), kept2 = Vec::Zero(q);
  long cut = 0;
  const double sqrtN = std::sqrt(N);
  for (int i = 0; i < nsamples; ++i) {
    Vec f = dec.to_m(mu.sample(*dec.alg, rng)).segment(l1b, q) - drift_m1;
    if (f.norm() > sqrtN) {
      ++cut;
    } else {
      kept += f;
      kept2 += f.cwiseProduct(f);
    }
  }
  out.tail_prob = static_cast<double>(cut) / nsamples;
  if (cut > 0) {
    Vec c1 = -kept / (out.tail_prob * nsamples);
    Vec cm = Vec::Zero(dec.dim());
    cm.segment(l1b, q) = c1;
    out.c = dec.from_m(cm);
    Vec var = kept2 / nsamples - (kept / nsamples).cwiseProduct(kept / nsamples);
    out.stderr_est = std::sqrt(var.cwiseMax(0.0).sum() / nsamples) / out.tail_prob;
  }
  return out;
}

Vec truncate_sample(const Vec& x, double N, const WeightDecomposition& dec,
                    const Vec& c_n) {
  Vec m = dec.to_m(x);
  Vec cm = dec.to_m(c_n);
  bool changed = false;
  for (int b = 1; b <= dec.b_max(); ++b) {
    auto [begin, end] = dec.layer_range(b);
    if (begin == end) continue;
    double norm2 = 0;
    for (int r = begin; r < end; ++r) norm2 += m[r] * m[r];
    if (norm2 > std::pow(N, b)) {
      changed = true;
      for (int r = begin; r < end; ++r) m[r] = (b == 1) ? cm[r] : 0.0;
    }
  }
  if (!changed) return x;
  return dec.from_m(m);
}

AperiodicityReport aperiodicity_heuristic(const IncrementMeasure& mu,
                                          const WeightDecomposition& dec,
                                          const std::vector<Vec>& grid_m1,
                                          int nsamples, uint64_t seed) {
  AperiodicityReport rep;
  auto [l1b, l1e] = dec.layer_range(1);
  const int q = l1e - l1b;
  std::vector<Vec> samples_m1;
  bool need_empirical = !mu.abelian_cf_modulus(dec, Vec::Zero(q)).has_value();
  if (need_empirical) {
    Rng rng(seed);
    samples_m1.reserve(nsamples);
    for (int i = 0; i < nsamples; ++i)
      samples_m1.push_back(dec.to_m(mu.sample(*dec.alg, rng)).segment(l1b, q));
  }
  for (const auto& xi : grid_m1) {
    double mod;
    if (!need_empirical) {
      mod = *mu.abelian_cf_modulus(dec, xi);
    } else {
      std::complex<double> z = 0;
      for (const auto& s : samples_m1)
        z += std::exp(std::complex<double>(0, -2.0 * M_PI * xi.dot(s)));
      mod = std::abs(z) / samples_m1.size();
    }
    if (mod > rep.max_modulus) {
      rep.max_modulus = mod;
      rep.argmax = xi;
    }
  }
  rep.lattice_suspect = rep.max_modulus >= 1.0 - 1e-6;
  return rep;
}

namespace {

RatVec json_to_ratvec(const nlohmann::json& arr) {
  RatVec v;
  for (const auto& x : arr)
    v.push_back(x.is_string() ? parse_rational(x.get<std::string>())
                              : parse_rational(x.dump()));
  return v;
}

nlohmann::json ratvec_to_json(const RatVec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& x : v) a.push_back(rational_to_string(x));
  return a;
}

}  // namespace

IncrementMeasure measure_from_json(const nlohmann::json& j, int dim) {
  std::string kind = j.at("kind").get<std::string>();
  int mord = j.value("moment_order", 4);
  if (kind == "atomic") {
    std::vector<std::pair<RatVec, Rat>> atoms;
    for (const auto& a : j.at("atoms")) {
      RatVec x = json_to_ratvec(a.at(0));
      Rat p = a.at(1).is_string() ? parse_rational(a.at(1).get<std::string>())
                                  : parse_rational(a.at(1).dump());
      atoms.push_back({std::move(x), p});
    }
    return IncrementMeasure::atomic(dim, std::move(atoms), mord);
  }
  if (kind == "gaussian") {
    RatVec mean = j.contains("mean") ? json_to_ratvec(j.at("mean")) : rat_zero(dim);
    std::vector<int> coords;
    if (j.contains("coords")) coords = j.at("coords").get<std::vector<int>>();
    int k = coords.empty() ? dim : static_cast<int>(coords.size());
    Mat cov = Mat::Identity(k, k);
    if (j.contains("cov")) {
      auto rows = j.at("cov");
      cov = Mat(k, k);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) cov(r, c) = rows.at(r).at(c).get<double>();
    }
    return IncrementMeasure::gaussian(dim, std::move(mean), std::move(coords),
                                      std::move(cov), mord);
  }
  if (kind == "shifted") {
    IncrementMeasure base = measure_from_json(j.at("base"), dim);
    return IncrementMeasure::shifted(std::move(base), json_to_ratvec(j.at("shift")));
  }
  if (kind == "product") {
    std::vector<IncrementMeasure> factors;
    for (const auto& f : j.at("factors")) factors.push_back(measure_from_json(f, dim));
    return IncrementMeasure::product(std::move(factors));
  }
  throw std::invalid_argument("unknown measure kind: " + kind);
}

nlohmann::json measure_to_json(const IncrementMeasure& mu) {
  nlohmann::json j;
  j["moment_order"] = mu.moment_order();
  switch (mu.kind()) {
    case MeasureKind::Atomic: {
      j["kind"] = "atomic";
      nlohmann::json atoms = nlohmann::json::array();
      for (const auto& [x, p] : mu.atoms())
        atoms.push_back({ratvec_to_json(x), rational_to_string(p)});
      j["atoms"] = atoms;
      break;
    }
    case MeasureKind::Gaussian: {
      j["kind"] = "gaussian";
      j["mean"] = ratvec_to_json(*mu.exact_mean());
      j["coords"] = mu.gauss_coords();
      nlohmann::json cov = nlohmann::json::array();
      for (int r = 0; r < mu.gauss_cov().rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < mu.gauss_cov().cols(); ++c) row.push_back(mu.gauss_cov()(r, c));
        cov.push_back(row);
      }
      j["cov"] = cov;
      break;
    }
    case MeasureKind::Shifted: {
      j["kind"] = "shifted";
      j["base"] = measure_to_json(mu.base());
      j["shift"] = ratvec_to_json(mu.shift());
      break;
    }
    case MeasureKind::Product: {
      j["kind"] = "product";
      nlohmann::json factors = nlohmann::json::array();
      for (const auto& f : mu.factors()) factors.push_back(measure_to_json(f));
      j["factors"] = factors;
      break;
    }
  }
  return j;
}

}  // namespace nilwalk
