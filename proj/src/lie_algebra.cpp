#include "nilwalk/lie_algebra.hpp"

#include <algorithm>
#include <stdexcept>

namespace nilwalk {

LieAlgebra::LieAlgebra(int dim, std::vector<std::string> basis_names,
                       BracketMap brackets)
    : dim_(dim), basis_names_(std::move(basis_names)), brackets_(std::move(brackets)) {
  if (dim_ <= 0) throw std::invalid_argument("dim must be positive");
  if (basis_names_.empty()) {
    for (int i = 0; i < dim_; ++i) basis_names_.push_back("e" + std::to_string(i + 1));
  }
  if (static_cast<int>(basis_names_.size()) != dim_)
    throw std::invalid_argument("basis name count does not match dim");

  for (auto it = brackets_.begin(); it != brackets_.end();) {
    auto [i, j] = it->first;
    if (i < 0 || j < 0 || i >= dim_ || j >= dim_)
      throw std::invalid_argument("bracket index out of range");
    if (i >= j)
      throw std::invalid_argument("bracket keys must satisfy i < j");
    for (auto& [k, c] : it->second)
      if (k < 0 || k >= dim_) throw std::invalid_argument("bracket target out of range");
    // drop zero coefficients, drop empty entries
    auto& v = it->second;
    v.erase(std::remove_if(v.begin(), v.end(),
                           [](const auto& p) { return p.second == 0; }),
            v.end());
    it = v.empty() ? brackets_.erase(it) : std::next(it);
  }

  // compiled float form
  for (const auto& [key, coeffs] : brackets_) {
    FEntry e;
    e.i = key.first;
    e.j = key.second;
    e.begin = static_cast<int>(fterms_.size());
    for (const auto& [k, c] : coeffs) fterms_.emplace_back(k, to_double(c));
    e.end = static_cast<int>(fterms_.size());
    fentries_.push_back(e);
  }

  // Jacobi identity, exactly, over all basis triples
  for (int a = 0; a < dim_; ++a)
    for (int b = a + 1; b < dim_; ++b)
      for (int c = b + 1; c < dim_; ++c) {
        RatVec ea = rat_zero(dim_), eb = rat_zero(dim_), ec = rat_zero(dim_);
        ea[a] = 1; eb[b] = 1; ec[c] = 1;
        RatVec s = add(add(bracket(bracket(ea, eb), ec),
                           bracket(bracket(eb, ec), ea)),
                       bracket(bracket(ec, ea), eb));
        if (!is_zero(s))
          throw std::invalid_argument("Jacobi identity fails on basis triple (" +
                                      std::to_string(a) + "," + std::to_string(b) +
                                      "," + std::to_string(c) + ")");
      }

  // lower central series and step
  RatMat g1;
  for (int i = 0; i < dim_; ++i) {
    RatVec e = rat_zero(dim_);
    e[i] = 1;
    g1.push_back(e);
  }
  lcs_.push_back(span_basis(g1));
  while (!lcs_.back().empty()) {
    RatMat next;
    for (int i = 0; i < dim_; ++i) {
      RatVec ei = rat_zero(dim_);
      ei[i] = 1;
      for (const auto& v : lcs_.back()) next.push_back(bracket(ei, v));
    }
    RatMat basis = span_basis(next);
    if (static_cast<int>(lcs_.size()) > dim_ + 1)
      throw std::invalid_argument("structure constants are not nilpotent");
    lcs_.push_back(std::move(basis));
  }
  step_ = static_cast<int>(lcs_.size()) - 1;
  if (step_ == 0) step_ = 1;  // zero algebra edge case, unused in practice
  if (step_ > BchTable::kMaxDegree)
    throw std::invalid_argument("algebra step " + std::to_string(step_) +
                                " exceeds precomputed Campbell-Hausdorff table (max " +
                                std::to_string(BchTable::kMaxDegree) + ")");
}

void LieAlgebra::check_dims(size_t n) const {
  if (static_cast<int>(n) != dim_)
    throw std::invalid_argument("vector length does not match algebra dim");
}

void LieAlgebra::bracket(const double* x, const double* y, double* out) const {
  std::fill(out, out + dim_, 0.0);
  for (const FEntry& e : fentries_) {
    double s = x[e.i] * y[e.j] - x[e.j] * y[e.i];
    if (s != 0.0)
      for (int t = e.begin; t < e.end; ++t) out[fterms_[t].first] += fterms_[t].second * s;
  }
}

Vec LieAlgebra::bracket(const Vec& x, const Vec& y) const {
  check_dims(x.size());
  check_dims(y.size());
  Vec out(dim_);
  bracket(x.data(), y.data(), out.data());
  return out;
}

RatVec LieAlgebra::bracket(const RatVec& x, const RatVec& y) const {
  check_dims(x.size());
  check_dims(y.size());
  RatVec out = rat_zero(dim_);
  for (const auto& [key, coeffs] : brackets_) {
    Rat s = x[key.first] * y[key.second] - x[key.second] * y[key.first];
    if (s != 0)
      for (const auto& [k, c] : coeffs) out[k] += c * s;
  }
  return out;
}

BchScratch LieAlgebra::make_scratch() const {
  BchScratch s;
  int nn = BchTable::instance().num_nodes(std::min(step_, BchTable::kMaxDegree));
  s.node_vals.assign(static_cast<size_t>(nn) * dim_, 0.0);
  return s;
}

void LieAlgebra::product(const double* x, const double* y, double* out,
                         BchScratch& s) const {
  const BchTable& table = BchTable::instance();
  const int L = std::min(step_, BchTable::kMaxDegree);
  const int nn = table.num_nodes(L);
  const auto& nodes = table.nodes();
  double* vals = s.node_vals.data();
  for (int idx = 0; idx < nn; ++idx) {
    const auto& nd = nodes[idx];
    double* dst = vals + static_cast<size_t>(idx) * dim_;
    const double* letter = nd.letter ? y : x;
    if (nd.child < 0)
      std::copy(letter, letter + dim_, dst);
    else
      bracket(letter, vals + static_cast<size_t>(nd.child) * dim_, dst);
  }
  std::fill(out, out + dim_, 0.0);
  for (const auto& term : table.terms()) {
    if (term.len > L) continue;
    const double* v = vals + static_cast<size_t>(term.node) * dim_;
    const double c = term.coeff_d;
    for (int k = 0; k < dim_; ++k) out[k] += c * v[k];
  }
}

Vec LieAlgebra::product(const Vec& x, const Vec& y) const {
  check_dims(x.size());
  check_dims(y.size());
  BchScratch s = make_scratch();
  Vec out(dim_);
  product(x.data(), y.data(), out.data(), s);
  return out;
}

RatVec LieAlgebra::product(const RatVec& x, const RatVec& y) const {
  check_dims(x.size());
  check_dims(y.size());
  const BchTable& table = BchTable::instance();
  const int L = std::min(step_, BchTable::kMaxDegree);
  const int nn = table.num_nodes(L);
  const auto& nodes = table.nodes();
  std::vector<RatVec> vals(nn);
  for (int idx = 0; idx < nn; ++idx) {
    const auto& nd = nodes[idx];
    const RatVec& letter = nd.letter ? y : x;
    vals[idx] = nd.child < 0 ? letter : bracket(letter, vals[nd.child]);
  }
  RatVec out = rat_zero(dim_);
  for (const auto& term : table.terms()) {
    if (term.len > L) continue;
    for (int k = 0; k < dim_; ++k) out[k] += term.coeff * vals[term.node][k];
  }
  return out;
}

Vec LieAlgebra::adjoint(const Vec& y, const Vec& x) const {
  return product(y, product(x, -y));
}

RatVec LieAlgebra::adjoint(const RatVec& y, const RatVec& x) const {
  RatVec ny(y.size());
  for (size_t i = 0; i < y.size(); ++i) ny[i] = -y[i];
  return product(y, product(x, ny));
}

Vec LieAlgebra::basis_vector(int i) const {
  if (i < 0 || i >= dim_) throw std::invalid_argument("basis index out of range");
  Vec v = Vec::Zero(dim_);
  v[i] = 1.0;
  return v;
}

}  // namespace nilwalk
