#include "nilwalk/support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nilwalk {

void ControlSequence::validate(const WeightDecomposition& dec) const {
  Rat total = 0;
  for (const auto& [u, t] : steps) {
    if (t < 0) throw std::invalid_argument("control times must be nonnegative");
    if (static_cast<int>(u.size()) != dec.dim())
      throw std::invalid_argument("control vector dimension mismatch");
    RatVec p1 = dec.project(1, u);
    if (!is_zero(sub(u, p1)))
      throw std::invalid_argument("controls must lie in m^(1)");
    total += t;
  }
  Rat err = total - 1;
  if (err < 0) err = -err;
  if (err > Rat(1, 1000000000000LL))
    throw std::invalid_argument("control times must sum to 1");
}

RatVec horizontal_endpoint_exact(const GeneratorSpec& gen,
                                 const ControlSequence& controls) {
  controls.validate(gen.ext.base_dec);
  if (gen.drift_b_exact.empty() && gen.drift_b_m.size() > 0 && gen.drift_b_m.norm() > 0)
    throw std::invalid_argument("exact endpoint requires closed-form commutator mean");
  const LieAlgebra& graded = *gen.ext.ext_graded.graded;
  const WeightDecomposition& ed = gen.ext.ext_dec;
  RatVec by = gen.y_exact;
  if (!gen.drift_b_exact.empty()) by = add(by, gen.drift_b_exact);
  RatVec acc = rat_zero(ed.dim());
  for (const auto& [u, t] : controls.steps) {
    RatVec u_m = ed.to_m(gen.ext.embed(u));
    RatVec factor = graded.product(u_m, scale(t, by));
    acc = graded.product(acc, factor);
  }
  RatVec neg_y(gen.y_exact.size());
  for (size_t i = 0; i < gen.y_exact.size(); ++i) neg_y[i] = -gen.y_exact[i];
  acc = graded.product(acc, neg_y);
  RatVec amb = ed.from_m(acc);
  RatVec base = gen.ext.project_to_base(amb);
  return RatVec(base.begin(), base.begin() + gen.ext.base->dim());
}

Vec horizontal_endpoint(const GeneratorSpec& gen, const ControlSequence& controls) {
  controls.validate(gen.ext.base_dec);
  const LieAlgebra& graded = *gen.ext.ext_graded.graded;
  const WeightDecomposition& ed = gen.ext.ext_dec;
  const int d = ed.dim();
  Vec by = gen.drift_b_m + gen.y_m;
  Vec acc = Vec::Zero(d);
  for (const auto& [u, t] : controls.steps) {
    Vec u_amb(gen.ext.base->dim());
    for (int i = 0; i < gen.ext.base->dim(); ++i) u_amb[i] = to_double(u[i]);
    Vec u_m = ed.to_m(gen.ext.embed(u_amb));
    Vec factor = graded.product(u_m, to_double(t) * by);
    acc = graded.product(acc, factor);
  }
  acc = graded.product(acc, -gen.y_m);
  Vec amb = ed.from_m(acc);
  return gen.ext.project_to_base(amb).head(gen.ext.base->dim());
}

void PiecewisePath::validate() const {
  if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size())
    throw std::invalid_argument("piecewise path needs m+1 breakpoints for m values");
  for (size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i - 1] < breakpoints[i]))
      throw std::invalid_argument("breakpoints must be strictly increasing");
}

namespace {

long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

int descents(const std::vector<int>& perm) {
  int e = 0;
  for (size_t i = 0; i + 1 < perm.size(); ++i) e += perm[i] > perm[i + 1];
  return e;
}

// left-normed [[...[a_1,a_2],a_3...],a_r]
RatVec left_bracket(const LieAlgebra& alg, const std::vector<const RatVec*>& args) {
  RatVec acc = *args[0];
  for (size_t i = 1; i < args.size(); ++i) acc = alg.bracket(acc, *args[i]);
  return acc;
}

}  // namespace

RatVec strichartz_integral_exact(const GradedStructure& g, const PiecewisePath& path) {
  path.validate();
  const LieAlgebra& graded = *g.graded;
  const int s = graded.step();
  if (s > 4)
    throw std::invalid_argument("exact multiplicative integral supports step <= 4");
  const int m = static_cast<int>(path.values.size());
  const int d = g.dec.dim();

  std::vector<RatVec> c_m;  // piece values, m-coordinates
  for (const auto& v : path.values) c_m.push_back(g.dec.to_m(v));
  std::vector<Rat> len;
  for (int j = 0; j < m; ++j)
    len.push_back(path.breakpoints[j + 1] - path.breakpoints[j]);

  RatVec acc = rat_zero(d);
  for (int r = 1; r <= s; ++r) {
    std::vector<int> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      int e = descents(perm);
      Rat coeff = Rat(((e % 2) ? -1 : 1), static_cast<long long>(r) * r * binom(r - 1, e));
      // nondecreasing piece assignments j_1 <= ... <= j_r
      std::vector<int> assign(r, 0);
      for (;;) {
        // simplex volume: prod_j len_j^{k_j} / k_j!
        Rat vol = 1;
        int run = 1;
        for (int i = 0; i < r; ++i) {
          vol *= len[assign[i]];
          if (i > 0 && assign[i] == assign[i - 1]) {
            ++run;
            vol /= run;
          } else {
            run = 1;
          }
        }
        std::vector<const RatVec*> args(r);
        for (int i = 0; i < r; ++i) args[i] = &c_m[assign[perm[i]]];
        RatVec br = left_bracket(graded, args);
        if (!is_zero(br)) acc = add(acc, scale(coeff * vol, br));
        // advance the nondecreasing odometer
        int pos = r - 1;
        while (pos >= 0 && assign[pos] == m - 1) --pos;
        if (pos < 0) break;
        int v = assign[pos] + 1;
        for (int i = pos; i < r; ++i) assign[i] = v;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return g.dec.from_m(acc);
}

RatVec strichartz_piece_product(const GradedStructure& g, const PiecewisePath& path) {
  path.validate();
  RatVec acc = rat_zero(g.dec.dim());
  for (size_t j = 0; j < path.values.size(); ++j) {
    Rat len = path.breakpoints[j + 1] - path.breakpoints[j];
    acc = g.product(acc, scale(len, path.values[j]));
  }
  return acc;
}

Vec strichartz_mesh_product(const GradedStructure& g, const PiecewisePath& path,
                            int mesh_n) {
  path.validate();
  const int d = g.dec.dim();
  const double a = to_double(path.breakpoints.front());
  const double b = to_double(path.breakpoints.back());
  const double h = (b - a) / mesh_n;
  std::vector<double> bp;
  for (const auto& t : path.breakpoints) bp.push_back(to_double(t));
  std::vector<Vec> vals;
  for (const auto& v : path.values) {
    Vec w(d);
    for (int i = 0; i < d; ++i) w[i] = to_double(v[i]);
    vals.push_back(g.dec.to_m(w));
  }
  const LieAlgebra& graded = *g.graded;
  BchScratch scratch = graded.make_scratch();
  std::vector<double> acc(d, 0.0), incr(d), out(d);
  for (int k = 0; k < mesh_n; ++k) {
    double mid = a + (k + 0.5) * h;
    size_t piece = std::upper_bound(bp.begin(), bp.end(), mid) - bp.begin();
    piece = std::min(vals.size() - 1, piece == 0 ? 0 : piece - 1);
    for (int i = 0; i < d; ++i) incr[i] = h * vals[piece][i];
    graded.product(acc.data(), incr.data(), out.data(), scratch);
    std::swap(acc, out);
  }
  Vec m(d);
  std::copy(acc.begin(), acc.end(), m.data());
  return g.dec.from_m(m);
}

Vec strichartz_integral(const GradedStructure& g, const PiecewisePath& path) {
  if (g.graded->step() <= 4) {
    RatVec e = strichartz_integral_exact(g, path);
    Vec out(g.dec.dim());
    for (int i = 0; i < g.dec.dim(); ++i) out[i] = to_double(e[i]);
    return out;
  }
  return strichartz_mesh_product(g, path, 8192);
}

RegionSide filiform_member(const std::array<double, 4>& s, double tol) {
  double gap = 2.0 * s[3] - (s[0] + s[2]) * s[2];
  if (gap > tol) return RegionSide::Inside;
  if (gap < -tol) return RegionSide::Outside;
  return RegionSide::Boundary;
}

RegionSide filiform_member_exact(const RatVec& s) {
  Rat gap = Rat(2) * s[3] - (s[0] + s[2]) * s[2];
  if (gap > 0) return RegionSide::Inside;
  if (gap < 0) return RegionSide::Outside;
  return RegionSide::Boundary;
}

GaussianCaseReport gaussian_case_check(AlgebraPtr alg, const RatVec& xbar) {
  GaussianCaseReport rep;
  const int s = alg->step();

  // (iii): weight layers m^(i) nonzero exactly at odd i <= 2s-1
  Filtration wf = weight_filtration(alg, xbar);
  rep.condition_iii = true;
  for (int i = 1; i <= 2 * s - 1; ++i) {
    bool nonzero = wf.dim_at(i) > wf.dim_at(i + 1);
    if (nonzero != (i % 2 == 1)) {
      rep.condition_iii = false;
      break;
    }
  }

  // (i): ad(X): g^[a]/g^[a+1] -> g^[a+1]/g^[a+2] surjective for a = 1..s
  const auto& lcs = alg->lower_central_series();
  auto level = [&](int a) -> RatMat {
    return (a >= 1 && a <= static_cast<int>(lcs.size())) ? lcs[a - 1] : RatMat{};
  };
  rep.condition_i = true;
  for (int a = 1; a <= s; ++a) {
    RatMat image;
    for (const auto& v : level(a)) {
      RatVec w = alg->bracket(xbar, v);
      if (!is_zero(w)) image.push_back(std::move(w));
    }
    for (const auto& v : level(a + 2)) image.push_back(v);
    if (!subspace_leq(level(a + 1), image)) {
      rep.condition_i = false;
      break;
    }
  }
  rep.agree = rep.condition_i == rep.condition_iii;
  return rep;
}

DcReport dc_condition_check(AlgebraPtr alg, const std::vector<RatVec>& generators,
                            int trials, uint64_t seed) {
  DcReport rep;
  const int d = alg->dim();
  const int s = alg->step();

  RatMat span = generators;
  const auto& lcs = alg->lower_central_series();
  if (lcs.size() > 1)
    for (const auto& v : lcs[1]) span.push_back(v);
  rep.spanning = rank(span) == d;
  if (!rep.spanning)
    throw std::invalid_argument("generators do not span the abelianization");

  Rng rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    RatVec w(d);
    for (int i = 0; i < d; ++i)
      w[i] = Rat(static_cast<long long>(rng.next_u64() % 7) - 3);
    for (size_t gi = 0; gi < generators.size(); ++gi) {
      RatVec a = generators[gi];
      for (int k = 0; k <= std::max(0, s - 2); ++k) {
        RatVec test = alg->bracket(generators[gi], a);
        if (!is_zero(test)) {
          rep.holds = false;
          rep.witness_generator = static_cast<int>(gi);
          rep.witness_k = k;
          rep.witness_w = w;
          rep.bracket_value = test;
          return rep;
        }
        a = alg->bracket(w, a);
      }
    }
  }
  rep.holds = true;
  return rep;
}

}  // namespace nilwalk
