#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nilwalk/presets.hpp"
#include "nilwalk/support.hpp"

using namespace nilwalk;

namespace {

AlgebraPtr make(const LieAlgebra& a) { return std::make_shared<LieAlgebra>(a); }

RatVec rat_basis(int dim, int i) {
  RatVec v = rat_zero(dim);
  v[i] = 1;
  return v;
}

GeneratorSpec filiform_biased_gen() {
  auto l = make(filiform3());
  RatVec xbar = rat_basis(4, 1);  // T
  WeightDecomposition dec = choose_weight_decomposition(weight_filtration(l, xbar));
  IncrementMeasure m = IncrementMeasure::gaussian(4, xbar, {0, 1}, Mat::Identity(2, 2));
  return generator_from_measure(dec, abelian_stats(m, dec));
}

GeneratorSpec heis_biased_gen() {
  auto h = make(heisenberg());
  RatVec xbar = rat_basis(3, 1);
  WeightDecomposition dec = choose_weight_decomposition(weight_filtration(h, xbar));
  IncrementMeasure m = IncrementMeasure::gaussian(3, xbar, {0, 1}, Mat::Identity(2, 2));
  return generator_from_measure(dec, abelian_stats(m, dec));
}

Rat rat_rand(Rng& rng, int span = 4, int den = 3) {
  return Rat(static_cast<long long>(rng.next_u64() % (2 * span + 1)) - span, den);
}

}  // namespace

TEST_CASE("origin is reachable with a single idle control") {
  GeneratorSpec gen = heis_biased_gen();
  ControlSequence cs;
  cs.steps.push_back({rat_zero(3), Rat(1)});
  RatVec e = horizontal_endpoint_exact(gen, cs);
  CHECK(is_zero(e));
  Vec ed = horizontal_endpoint(gen, cs);
  CHECK(ed.norm() < 1e-12);
}

TEST_CASE("exact filiform endpoints satisfy the support inequality") {
  GeneratorSpec gen = filiform_biased_gen();
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    int k = 1 + static_cast<int>(rng.next_u64() % 6);
    ControlSequence cs;
    std::vector<Rat> ts;
    Rat total = 0;
    for (int i = 0; i < k; ++i) {
      Rat t(1 + static_cast<long long>(rng.next_u64() % 5), 1);
      ts.push_back(t);
      total += t;
    }
    for (int i = 0; i < k; ++i) {
      RatVec u = rat_zero(4);
      u[0] = rat_rand(rng);  // alpha_i A
      u[1] = rat_rand(rng);  // beta_i T (central direction)
      cs.steps.push_back({u, ts[i] / total});
    }
    RatVec s = horizontal_endpoint_exact(gen, cs);
    CHECK(filiform_member_exact(s) != RegionSide::Outside);
  }
}

TEST_CASE("pure-A staircases achieve the boundary case") {
  // one constant control u = alpha A over the whole time interval lands on
  // the boundary parabola 2 s4 = (s1 + s3) s3
  GeneratorSpec gen = filiform_biased_gen();
  for (int a = -3; a <= 3; ++a) {
    ControlSequence cs;
    RatVec u = rat_zero(4);
    u[0] = Rat(a);
    cs.steps.push_back({u, Rat(1)});
    RatVec s = horizontal_endpoint_exact(gen, cs);
    CHECK(filiform_member_exact(s) == RegionSide::Boundary);
  }
}

TEST_CASE("heisenberg endpoints cover a neighborhood of the origin") {
  GeneratorSpec gen = heis_biased_gen();
  Rng rng(7);
  std::vector<Vec> endpoints;
  for (int trial = 0; trial < 500; ++trial) {
    int k = 2 + static_cast<int>(rng.next_u64() % 4);
    ControlSequence cs;
    Rat total = 0;
    std::vector<Rat> ts;
    for (int i = 0; i < k; ++i) {
      Rat t(1 + static_cast<long long>(rng.next_u64() % 4), 1);
      ts.push_back(t);
      total += t;
    }
    for (int i = 0; i < k; ++i) {
      RatVec u = rat_zero(3);
      u[0] = rat_rand(rng, 4, 4);
      u[1] = rat_rand(rng, 4, 4);
      cs.steps.push_back({u, ts[i] / total});
    }
    endpoints.push_back(horizontal_endpoint(gen, cs));
  }
  double worst = 0;
  for (double x : {-0.15, 0.0, 0.15})
    for (double y : {-0.15, 0.0, 0.15})
      for (double z : {-0.15, 0.0, 0.15}) {
        Vec g(3);
        g << x, y, z;
        double best = 1e100;
        for (const auto& e : endpoints) best = std::min(best, (e - g).norm());
        worst = std::max(worst, best);
      }
  CHECK(worst < 0.25);  // every grid point has a nearby reachable endpoint
}

TEST_CASE("constant paths integrate to themselves") {
  auto l = make(filiform3());
  GradedStructure g =
      graded_structure(choose_weight_decomposition(weight_filtration(l, rat_basis(4, 1))));
  Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    RatVec c(4);
    for (int i = 0; i < 4; ++i) c[i] = rat_rand(rng);
    PiecewisePath path;
    path.breakpoints = {Rat(0), Rat(1)};
    path.values = {c};
    CHECK(strichartz_integral_exact(g, path) == c);
    CHECK(strichartz_piece_product(g, path) == c);
  }
}

TEST_CASE("two-piece path on a step-2 algebra: the 1/8 bracket term") {
  auto h = make(heisenberg());
  GradedStructure g = graded_structure(choose_weight_decomposition(central_series(h)));
  RatVec c1 = rat_basis(3, 0), c2 = rat_basis(3, 1);
  PiecewisePath path;
  path.breakpoints = {Rat(0), Rat(1, 2), Rat(1)};
  path.values = {c1, c2};
  RatVec want = add(add(scale(Rat(1, 2), c1), scale(Rat(1, 2), c2)),
                    scale(Rat(1, 8), g.bracket(c1, c2)));
  CHECK(strichartz_integral_exact(g, path) == want);
  CHECK(strichartz_piece_product(g, path) == want);
}

TEST_CASE("simplex formula agrees exactly with the piece product") {
  // validates the Strichartz coefficient table (descent count + binomial)
  std::vector<GradedStructure> gs;
  {
    auto l = make(filiform3());
    gs.push_back(graded_structure(
        choose_weight_decomposition(weight_filtration(l, rat_basis(4, 1)))));
    auto f = make(build_free_nilpotent(2, 4));
    gs.push_back(graded_structure(choose_weight_decomposition(central_series(f))));
    auto u = make(unitriangular(4));
    gs.push_back(graded_structure(choose_weight_decomposition(central_series(u))));
  }
  Rng rng(11);
  for (auto& g : gs) {
    const int d = g.dec.dim();
    for (int trial = 0; trial < 8; ++trial) {
      int m = 2 + static_cast<int>(rng.next_u64() % 2);  // 2 or 3 pieces
      PiecewisePath path;
      path.breakpoints.push_back(Rat(0));
      for (int j = 0; j < m; ++j)
        path.breakpoints.push_back(path.breakpoints.back() +
                                   Rat(1 + static_cast<long long>(rng.next_u64() % 3), 2));
      for (int j = 0; j < m; ++j) {
        RatVec c(d);
        for (int i = 0; i < d; ++i) c[i] = rat_rand(rng, 2, 2);
        path.values.push_back(c);
      }
      CHECK(strichartz_integral_exact(g, path) == strichartz_piece_product(g, path));
    }
  }
}

TEST_CASE("fine-mesh products converge at first order") {
  // Per-instance mesh alignment with the interior breakpoint makes single
  // doubling ratios wobble, so the rate is read off a geometric mean across
  // instances and a 64 -> 512 span.
  auto l = make(filiform3());
  GradedStructure g =
      graded_structure(choose_weight_decomposition(weight_filtration(l, rat_basis(4, 1))));
  Rng rng(13);
  double log_ratio_sum = 0;
  int counted = 0;
  for (int trial = 0; trial < 12; ++trial) {
    PiecewisePath path;
    Rat mid(1 + static_cast<long long>(rng.next_u64() % 17), 19);
    path.breakpoints = {Rat(0), mid, Rat(1)};
    RatVec c1(4), c2(4);
    for (int i = 0; i < 4; ++i) {
      c1[i] = rat_rand(rng);
      c2[i] = rat_rand(rng);
    }
    path.values = {c1, c2};
    Vec exact = strichartz_integral(g, path);
    double e64 = (strichartz_mesh_product(g, path, 64) - exact).norm();
    double e512 = (strichartz_mesh_product(g, path, 512) - exact).norm();
    CHECK(e512 < 1e-2);
    if (e64 > 1e-14 && e512 > 1e-14) {
      log_ratio_sum += std::log(e512 / e64) / 3.0;  // per doubling
      ++counted;
    }
  }
  REQUIRE(counted >= 8);
  double per_doubling = std::exp(log_ratio_sum / counted);
  CHECK(per_doubling > 0.25);
  CHECK(per_doubling < 0.75);
}

TEST_CASE("filiform membership classification") {
  CHECK(filiform_member({0, 0, 0, 0}) == RegionSide::Boundary);
  CHECK(filiform_member({0, 0, 1, 0}) == RegionSide::Outside);
  CHECK(filiform_member({0, 0, 0, 1}) == RegionSide::Inside);
  CHECK(filiform_member_exact({Rat(0), Rat(0), Rat(1), Rat(0)}) == RegionSide::Outside);
  CHECK(filiform_member_exact({Rat(0), Rat(0), Rat(0), Rat(1)}) == RegionSide::Inside);
  CHECK(filiform_member_exact({Rat(0), Rat(0), Rat(0), Rat(0)}) == RegionSide::Boundary);
  // tolerance band
  CHECK(filiform_member({0, 0, 0, 1e-12}, 1e-9) == RegionSide::Boundary);
}

TEST_CASE("gaussian case characterization on the filiform") {
  auto l = make(filiform3());
  GaussianCaseReport a = gaussian_case_check(l, rat_basis(4, 0));  // Xbar = A
  CHECK(a.condition_i);
  CHECK(a.condition_iii);
  CHECK(a.agree);
  GaussianCaseReport t = gaussian_case_check(l, rat_basis(4, 1));  // Xbar = T
  CHECK(!t.condition_i);
  CHECK(!t.condition_iii);
  CHECK(t.agree);
}

TEST_CASE("abelian algebras are always gaussian") {
  auto a = make(LieAlgebra(3, {}, {}));
  Rng rng(17);
  for (int k = 0; k < 5; ++k) {
    RatVec xbar(3);
    for (int i = 0; i < 3; ++i) xbar[i] = rat_rand(rng);
    GaussianCaseReport rep = gaussian_case_check(a, xbar);
    CHECK(rep.condition_i);
    CHECK(rep.condition_iii);
  }
}

TEST_CASE("biased heisenberg is gaussian, centered nonabelian is not") {
  auto h = make(heisenberg());
  GaussianCaseReport biased = gaussian_case_check(h, rat_basis(3, 1));
  CHECK(biased.condition_i);
  CHECK(biased.condition_iii);
  GaussianCaseReport centered = gaussian_case_check(h, rat_zero(3));
  CHECK(!centered.condition_i);
  CHECK(!centered.condition_iii);
}

TEST_CASE("conditions agree across random biases (theorem equivalence)") {
  Rng rng(23);
  for (auto alg : {make(filiform3()), make(unitriangular(4))}) {
    for (int k = 0; k < 50; ++k) {
      RatVec xbar(alg->dim());
      for (int i = 0; i < alg->dim(); ++i) xbar[i] = rat_rand(rng);
      GaussianCaseReport rep = gaussian_case_check(alg, xbar);
      CHECK(rep.agree);
    }
  }
}

TEST_CASE("DC condition on unitriangular(4) with the superdiagonal family") {
  auto u = make(unitriangular(4));
  // v_i = E_{i,i+1}: basis order E12,E13,E14,E23,E24,E34 -> indices 0, 3, 5
  std::vector<RatVec> gens = {rat_basis(6, 0), rat_basis(6, 3), rat_basis(6, 5)};
  DcReport rep = dc_condition_check(u, gens);
  CHECK(rep.spanning);
  CHECK(rep.holds);
}

TEST_CASE("DC holds on any step-2 algebra") {
  auto h = make(heisenberg());
  std::vector<RatVec> gens = {rat_basis(3, 0), rat_basis(3, 1)};
  CHECK(dc_condition_check(h, gens).holds);
  // even a skewed spanning family
  std::vector<RatVec> skew = {add(rat_basis(3, 0), rat_basis(3, 1)),
                              sub(rat_basis(3, 0), scale(Rat(2), rat_basis(3, 1)))};
  CHECK(dc_condition_check(h, skew).holds);
}

TEST_CASE("DC fails on the filiform with an exact certificate") {
  auto l = make(filiform3());
  std::vector<RatVec> gens = {rat_basis(4, 0), rat_basis(4, 1)};
  DcReport rep = dc_condition_check(l, gens);
  CHECK(!rep.holds);
  CHECK(rep.witness_generator >= 0);
  // certificate is exact: re-evaluate [v, ad(w)^k v]
  RatVec a = gens[rep.witness_generator];
  for (int k = 0; k < rep.witness_k; ++k) a = l->bracket(rep.witness_w, a);
  CHECK(l->bracket(gens[rep.witness_generator], a) == rep.bracket_value);
  CHECK(!is_zero(rep.bracket_value));
}

TEST_CASE("non-spanning generator families are rejected") {
  auto h = make(heisenberg());
  std::vector<RatVec> gens = {rat_basis(3, 0)};
  CHECK_THROWS(dc_condition_check(h, gens));
}
