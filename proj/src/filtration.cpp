#include "nilwalk/filtration.hpp"

#include <cmath>
#include <stdexcept>

namespace nilwalk {

namespace {

RatMat full_space(int dim) {
  RatMat rows;
  for (int i = 0; i < dim; ++i) {
    RatVec e = rat_zero(dim);
    e[i] = 1;
    rows.push_back(e);
  }
  return rows;
}

RatMat bracket_span(const LieAlgebra& alg, const RatMat& a, const RatMat& b) {
  RatMat out;
  for (const auto& u : a)
    for (const auto& v : b) {
      RatVec w = alg.bracket(u, v);
      if (!is_zero(w)) out.push_back(std::move(w));
    }
  return out;
}

}  // namespace

Filtration central_series(AlgebraPtr alg) {
  Filtration f;
  f.alg = alg;
  f.kind = FiltrationKind::Central;
  f.bias = rat_zero(alg->dim());
  for (const auto& g : alg->lower_central_series()) {
    if (g.empty()) break;
    f.subspaces.push_back(g);
  }
  return f;
}

Filtration weight_filtration(AlgebraPtr alg, const RatVec& xbar) {
  if (static_cast<int>(xbar.size()) != alg->dim())
    throw std::invalid_argument("bias length does not match algebra dim");
  Filtration f;
  f.alg = alg;
  f.kind = FiltrationKind::Weight;
  f.bias = xbar;

  const RatMat g0 = full_space(alg->dim());
  std::vector<RatMat> g = {g0, g0};  // g^(0), g^(1)
  RatMat xrow = {xbar};
  for (int i = 1;; ++i) {
    RatMat gen = bracket_span(*alg, g0, g[i]);
    for (auto& v : bracket_span(*alg, xrow, g[i - 1])) gen.push_back(std::move(v));
    RatMat next = span_basis(gen);
    if (next.empty()) break;
    g.push_back(std::move(next));
    if (i > 2 * alg->step())
      throw std::logic_error("weight filtration failed to terminate");
  }
  f.subspaces.assign(g.begin() + 1, g.end());
  return f;
}

int homogeneous_dimension(const Filtration& f) {
  int d = 0;
  for (const auto& g : f.subspaces) d += static_cast<int>(g.size());
  return d;
}

std::pair<int, int> WeightDecomposition::layer_range(int b) const {
  int begin = 0;
  while (begin < static_cast<int>(weights.size()) && weights[begin] < b) ++begin;
  int end = begin;
  while (end < static_cast<int>(weights.size()) && weights[end] == b) ++end;
  return {begin, end};
}

RatVec WeightDecomposition::to_m(const RatVec& ambient) const {
  RatVec m = rat_zero(dim());
  for (int r = 0; r < dim(); ++r)
    for (int c = 0; c < dim(); ++c)
      if (to_m_exact[r][c] != 0) m[r] += to_m_exact[r][c] * ambient[c];
  return m;
}

RatVec WeightDecomposition::from_m(const RatVec& m) const {
  RatVec x = rat_zero(dim());
  for (int r = 0; r < dim(); ++r) {
    if (m[r] == 0) continue;
    for (int c = 0; c < dim(); ++c)
      if (basis[r][c] != 0) x[c] += m[r] * basis[r][c];
  }
  return x;
}

Vec WeightDecomposition::project(int b, const Vec& x) const {
  Vec m = to_m(x);
  auto [begin, end] = layer_range(b);
  Vec sel = Vec::Zero(dim());
  for (int r = begin; r < end; ++r) sel[r] = m[r];
  return from_m(sel);
}

RatVec WeightDecomposition::project(int b, const RatVec& x) const {
  RatVec m = to_m(x);
  auto [begin, end] = layer_range(b);
  RatVec sel = rat_zero(dim());
  for (int r = begin; r < end; ++r) sel[r] = m[r];
  return from_m(sel);
}

Vec WeightDecomposition::dilate(double r, const Vec& x) const {
  if (!(r > 0.0)) throw std::invalid_argument("dilation requires r > 0");
  Vec m = to_m(x);
  for (int i = 0; i < dim(); ++i) m[i] *= std::pow(r, weights[i]);
  return from_m(m);
}

RatVec WeightDecomposition::dilate(const Rat& r, const RatVec& x) const {
  if (!(r > 0)) throw std::invalid_argument("dilation requires r > 0");
  RatVec m = to_m(x);
  for (int i = 0; i < dim(); ++i) {
    Rat p = 1;
    for (int k = 0; k < weights[i]; ++k) p *= r;
    m[i] *= p;
  }
  return from_m(m);
}

double WeightDecomposition::layer_norm(int b, const Vec& ambient) const {
  Vec m = to_m(ambient);
  auto [begin, end] = layer_range(b);
  double s = 0;
  for (int r = begin; r < end; ++r) s += m[r] * m[r];
  return std::sqrt(s);
}

WeightDecomposition choose_weight_decomposition(const Filtration& f) {
  WeightDecomposition dec;
  dec.alg = f.alg;
  dec.filt = f;
  const int dim = f.alg->dim();
  for (int b = 1; b <= f.b_max(); ++b) {
    const RatMat& sup = f.subspaces[b - 1];
    RatMat sub = (b < f.b_max()) ? f.subspaces[b] : RatMat{};
    for (auto& row : complement_rows(sup, sub)) {
      dec.basis.push_back(row);
      dec.weights.push_back(b);
    }
  }
  if (static_cast<int>(dec.basis.size()) != dim)
    throw std::logic_error("weight decomposition does not fill the algebra");

  RatMat bt(dim, RatVec(dim));
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) bt[c][r] = dec.basis[r][c];
  auto inv = invert(bt);
  if (!inv) throw std::logic_error("decomposition basis is singular");
  dec.to_m_exact = *inv;

  dec.basis_d = Mat(dim, dim);
  dec.to_m_d = Mat(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      dec.basis_d(r, c) = to_double(dec.basis[r][c]);
      dec.to_m_d(r, c) = to_double(dec.to_m_exact[r][c]);
    }

  dec.drift = dec.project(1, f.bias);
  return dec;
}

Vec a_x_operator(const WeightDecomposition& dec, const Vec& y) {
  Vec xd(dec.dim());
  for (int i = 0; i < dec.dim(); ++i) xd[i] = to_double(dec.drift[i]);
  Vec out = Vec::Zero(dec.dim());
  for (int b = 1; b <= dec.b_max(); ++b) {
    if (b + 2 > dec.b_max()) break;
    Vec yb = dec.project(b, y);
    out += dec.project(b + 2, dec.alg->bracket(xd, yb));
  }
  return out;
}

RatVec a_x_operator(const WeightDecomposition& dec, const RatVec& y) {
  RatVec out = rat_zero(dec.dim());
  for (int b = 1; b <= dec.b_max(); ++b) {
    if (b + 2 > dec.b_max()) break;
    RatVec yb = dec.project(b, y);
    out = add(out, dec.project(b + 2, dec.alg->bracket(dec.drift, yb)));
  }
  return out;
}

GradedStructure graded_structure(const WeightDecomposition& dec) {
  const int dim = dec.dim();
  LieAlgebra::BracketMap br;
  for (int a = 0; a < dim; ++a)
    for (int b = a + 1; b < dim; ++b) {
      int w = dec.weights[a] + dec.weights[b];
      if (w > dec.b_max()) continue;
      RatVec amb = dec.alg->bracket(dec.basis[a], dec.basis[b]);
      RatVec m = dec.to_m(amb);
      auto [begin, end] = dec.layer_range(w);
      std::vector<std::pair<int, Rat>> coeffs;
      for (int r = begin; r < end; ++r)
        if (m[r] != 0) coeffs.push_back({r, m[r]});
      if (!coeffs.empty()) br[{a, b}] = std::move(coeffs);
    }
  std::vector<std::string> names;
  for (int i = 0; i < dim; ++i)
    names.push_back("m" + std::to_string(dec.weights[i]) + "_" + std::to_string(i));
  GradedStructure g;
  g.dec = dec;
  g.graded = std::make_shared<LieAlgebra>(dim, std::move(names), std::move(br));
  return g;
}

Vec GradedStructure::bracket(const Vec& x, const Vec& y) const {
  return dec.from_m(graded->bracket(dec.to_m(x), dec.to_m(y)));
}

Vec GradedStructure::product(const Vec& x, const Vec& y) const {
  return dec.from_m(graded->product(dec.to_m(x), dec.to_m(y)));
}

RatVec GradedStructure::bracket(const RatVec& x, const RatVec& y) const {
  return dec.from_m(graded->bracket(dec.to_m(x), dec.to_m(y)));
}

RatVec GradedStructure::product(const RatVec& x, const RatVec& y) const {
  return dec.from_m(graded->product(dec.to_m(x), dec.to_m(y)));
}

Vec GradedStructure::adjoint(const Vec& y, const Vec& x) const {
  return dec.from_m(graded->adjoint(dec.to_m(y), dec.to_m(x)));
}

BiasExtension bias_extension(const WeightDecomposition& dec) {
  BiasExtension ext;
  ext.base = dec.alg;
  ext.base_dec = dec;
  ext.drift = dec.drift;

  if (is_zero(dec.drift)) {
    ext.trivial = true;
    ext.ext = dec.alg;
    ext.ext_dec = dec;
    ext.ext_graded = graded_structure(dec);
    ext.chi = rat_zero(dec.dim());
    return ext;
  }

  ext.trivial = false;
  const int d = dec.dim();
  LieAlgebra::BracketMap br = dec.alg->brackets();
  for (int i = 0; i < d; ++i) {
    RatVec e = rat_zero(d);
    e[i] = 1;
    RatVec v = dec.alg->bracket(dec.drift, e);  // [X, e_i] = -[e_i, chi]
    std::vector<std::pair<int, Rat>> coeffs;
    for (int k = 0; k < d; ++k)
      if (v[k] != 0) coeffs.push_back({k, -v[k]});
    if (!coeffs.empty()) br[{i, d}] = std::move(coeffs);
  }
  std::vector<std::string> names = dec.alg->basis_names();
  names.push_back("chi");
  ext.ext = std::make_shared<LieAlgebra>(d + 1, std::move(names), std::move(br));

  // extended filtration: g̃^(2) = g^(2) + ℝχ, other levels embed
  Filtration ef;
  ef.alg = ext.ext;
  ef.kind = FiltrationKind::Weight;
  ef.bias = rat_zero(d + 1);
  for (int i = 0; i < d; ++i) ef.bias[i] = dec.filt.bias[i];
  auto embed_rows = [&](const RatMat& rows) {
    RatMat out;
    for (const auto& r : rows) {
      RatVec v = rat_zero(d + 1);
      for (int i = 0; i < d; ++i) v[i] = r[i];
      out.push_back(std::move(v));
    }
    return out;
  };
  for (int b = 1; b <= std::max(dec.b_max(), 2); ++b) {
    RatMat rows;
    if (b <= dec.b_max()) rows = embed_rows(dec.filt.subspaces[b - 1]);
    if (b <= 2) {
      RatVec chi_row = rat_zero(d + 1);
      chi_row[d] = 1;
      rows.push_back(std::move(chi_row));
    }
    ef.subspaces.push_back(span_basis(rows));
  }
  ext.ext_dec = choose_weight_decomposition(ef);
  ext.ext_graded = graded_structure(ext.ext_dec);
  ext.chi = rat_zero(d + 1);
  ext.chi[d] = 1;
  return ext;
}

Vec BiasExtension::embed(const Vec& x) const {
  if (trivial) return x;
  Vec v = Vec::Zero(ext->dim());
  v.head(base->dim()) = x;
  return v;
}

RatVec BiasExtension::embed(const RatVec& x) const {
  if (trivial) return x;
  RatVec v = rat_zero(ext->dim());
  for (int i = 0; i < base->dim(); ++i) v[i] = x[i];
  return v;
}

Vec BiasExtension::project_to_base(const Vec& xt) const {
  if (trivial) return xt;
  const int d = base->dim();
  Vec out = xt.head(d);
  double t = xt[d];
  if (t != 0.0)
    for (int i = 0; i < d; ++i) out[i] += t * to_double(drift[i]);
  return out;
}

RatVec BiasExtension::project_to_base(const RatVec& xt) const {
  if (trivial) return xt;
  const int d = base->dim();
  RatVec out(xt.begin(), xt.begin() + d);
  if (xt[d] != 0)
    for (int i = 0; i < d; ++i) out[i] += xt[d] * drift[i];
  return out;
}

}  // namespace nilwalk
