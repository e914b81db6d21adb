#include "nilwalk/linalg_exact.hpp"

#include <stdexcept>

namespace nilwalk {

Rref rref(RatMat rows) {
  Rref out;
  if (rows.empty()) return out;
  const size_t ncols = rows[0].size();
  size_t r = 0;
  for (size_t c = 0; c < ncols && r < rows.size(); ++c) {
    size_t sel = r;
    while (sel < rows.size() && rows[sel][c] == 0) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[r], rows[sel]);
    Rat inv = Rat(1) / rows[r][c];
    for (size_t j = c; j < ncols; ++j) rows[r][j] *= inv;
    for (size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c] == 0) continue;
      Rat f = rows[i][c];
      for (size_t j = c; j < ncols; ++j) rows[i][j] -= f * rows[r][j];
    }
    out.pivots.push_back(static_cast<int>(c));
    ++r;
  }
  out.rows.assign(rows.begin(), rows.begin() + r);
  return out;
}

int rank(const RatMat& rows) { return static_cast<int>(rref(rows).rows.size()); }

RatMat span_basis(const RatMat& rows) { return rref(rows).rows; }

bool span_contains(const Rref& space, const RatVec& v) {
  RatVec w = v;
  for (size_t i = 0; i < space.rows.size(); ++i) {
    int p = space.pivots[i];
    if (w[p] != 0) {
      Rat f = w[p];
      for (size_t j = 0; j < w.size(); ++j) w[j] -= f * space.rows[i][j];
    }
  }
  return is_zero(w);
}

bool subspace_leq(const RatMat& a, const RatMat& b) {
  Rref rb = rref(b);
  for (const auto& v : a)
    if (!span_contains(rb, v)) return false;
  return true;
}

bool spans_equal(const RatMat& a, const RatMat& b) {
  Rref ra = rref(a), rb = rref(b);
  if (ra.pivots != rb.pivots) return false;
  return ra.rows == rb.rows;
}

RatMat complement_rows(const RatMat& sup, const RatMat& sub) {
  Rref rs = rref(sup), rb = rref(sub);
  RatMat out;
  for (size_t i = 0; i < rs.rows.size(); ++i) {
    bool is_sub_pivot = false;
    for (int p : rb.pivots)
      if (p == rs.pivots[i]) { is_sub_pivot = true; break; }
    if (!is_sub_pivot) out.push_back(rs.rows[i]);
  }
  return out;
}

std::optional<RatVec> solve_square(const RatMat& m, const RatVec& b) {
  const size_t n = m.size();
  RatMat aug = m;
  for (size_t i = 0; i < n; ++i) aug[i].push_back(b[i]);
  Rref r = rref(std::move(aug));
  if (r.rows.size() != n) return std::nullopt;
  for (int p : r.pivots)
    if (p >= static_cast<int>(n)) return std::nullopt;
  RatVec x(n);
  for (size_t i = 0; i < n; ++i) x[r.pivots[i]] = r.rows[i][n];
  return x;
}

std::optional<RatMat> invert(const RatMat& m) {
  const size_t n = m.size();
  RatMat aug = m;
  for (size_t i = 0; i < n; ++i) {
    aug[i].resize(2 * n);
    aug[i][n + i] = 1;
  }
  Rref r = rref(std::move(aug));
  if (r.rows.size() != n) return std::nullopt;
  for (size_t i = 0; i < n; ++i)
    if (r.pivots[i] != static_cast<int>(i)) return std::nullopt;
  RatMat inv(n, RatVec(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) inv[i][j] = r.rows[i][n + j];
  return inv;
}

RatVec rat_zero(int n) { return RatVec(static_cast<size_t>(n)); }

RatVec add(const RatVec& a, const RatVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector size mismatch");
  RatVec c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

RatVec sub(const RatVec& a, const RatVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector size mismatch");
  RatVec c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

RatVec scale(const Rat& c, const RatVec& a) {
  RatVec out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
  return out;
}

bool is_zero(const RatVec& a) {
  for (const auto& x : a)
    if (x != 0) return false;
  return true;
}

}  // namespace nilwalk
