#include <doctest.h>

#include <cmath>

#include "nsds/geometry.hpp"
#include "support/oracles.hpp"

using namespace nsds;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("least_norm examples") {
  CHECK(least_norm(Polytope::interval(-1, 1))(0) == doctest::Approx(0.0));

  Vec ln = least_norm(Polytope::segment(v2(-1, 0), v2(0, -1)));
  CHECK(ln(0) == doctest::Approx(-0.5));
  CHECK(ln(1) == doctest::Approx(-0.5));

  Polytope tri = Polytope::hull({v2(1, 0), v2(0, 1), v2(1, 1)});
  Vec grid = oracle::grid_least_norm3(v2(1, 0), v2(0, 1), v2(1, 1), 1e-4);
  Vec got = least_norm(tri);
  CHECK((got - grid).norm() <= 2e-4);
  CHECK((got - v2(0.5, 0.5)).norm() <= 1e-12);
}

TEST_CASE("least_norm weights certify membership") {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = rng.integer(1, 4);
    Polytope p = rng.polytope(d, rng.integer(1, 8));
    const LeastNormResult r = least_norm_point(p);
    double total = 0.0;
    Vec x = Vec::Zero(d);
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(r.weights[i] >= -1e-9);
      CHECK(r.weights[i] <= 1 + 1e-9);
      total += r.weights[i];
      x += r.weights[i] * p.vertex(i);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((x - r.point).norm() <= 1e-9);
  }
}

TEST_CASE("least_norm of empty set raises") {
  CHECK_THROWS_AS(least_norm(Polytope::empty(2)), EmptySetError);
  CHECK_THROWS_AS(support(Polytope::empty(2), v2(1, 0)), EmptySetError);
}

TEST_CASE("contains examples") {
  CHECK(contains(Polytope::interval(-1, 1), v1(0), 1e-9));
  CHECK_FALSE(contains(Polytope::segment(v2(1, 0), v2(0, 1)), v2(0, 0), 1e-9));
  CHECK(contains(Polytope::segment(v2(1, 0), v2(0, 1)), v2(0.5, 0.5), 1e-9));
  CHECK_FALSE(contains(Polytope::empty(2), v2(0, 0)));
}

TEST_CASE("support examples") {
  CHECK(support(Polytope::interval(-1, 1), v1(1)) == 1.0);
  CHECK(support(Polytope::segment(v2(-1, 0), v2(0, -1)), v2(1, 1)) == -1.0);
  CHECK(support(Polytope::segment(v2(2, 0), v2(0, 3)), v2(1, 1)) == 3.0);
}

TEST_CASE("maximin examples") {
  Polytope seg = Polytope::interval(-1, 1);
  const double brute = [] {
    double best = -1e300;
    for (int i = 0; i <= 2000; ++i) {
      const double z = -1.0 + i * 1e-3;
      best = std::max(best, std::min(-z, z));
    }
    return best;
  }();
  CHECK(maximin_value(seg, seg) == doctest::Approx(brute).epsilon(1e-12));
  CHECK(std::abs(maximin_value(seg, seg)) <= 1e-12);

  CHECK(maximin_value(Polytope::point(v2(1, 0)), Polytope::segment(v2(-1, 0), v2(0, -1))) ==
        doctest::Approx(-1.0));
  CHECK(maximin_value(Polytope::segment(v2(1, 0), v2(0, 1)), Polytope::point(v2(2, 3))) ==
        doctest::Approx(3.0));
}

TEST_CASE("maximin errors") {
  CHECK_THROWS_AS(maximin_value(Polytope::interval(0, 1), Polytope::point(v2(0, 0))),
                  DimensionMismatchError);
  CHECK_THROWS_AS(maximin_value(Polytope::empty(1), Polytope::interval(0, 1)), EmptySetError);
}

TEST_CASE("affine_image examples") {
  Polytope sq = Polytope::hull({v2(1, 0), v2(0, 1)});
  Polytope same = affine_image(sq, Mat::Identity(2, 2), Vec::Zero(2));
  CHECK(same.vertices() == sq.vertices());

  Polytope dil = affine_image(Polytope::interval(-1, 1), Mat::Constant(1, 1, 2.0), Vec::Zero(1));
  CHECK(dil.vertex(0)(0) == -2.0);
  CHECK(dil.vertex(1)(0) == 2.0);

  Mat rot(2, 2);
  rot << 0, -1, 1, 0;
  Polytope r = affine_image(sq, rot, Vec::Zero(2));
  CHECK(hausdorff_distance(r, Polytope::segment(v2(0, 1), v2(-1, 0))) <= 1e-15);

  CHECK_THROWS_AS(affine_image(sq, Mat::Identity(3, 3), Vec::Zero(3)), DimensionMismatchError);
}

TEST_CASE("property: least_norm lies in the hull and beats every hull point") {
  oracle::Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = rng.integer(1, 4);
    Polytope p = rng.polytope(d, rng.integer(1, 8), -2.0, 2.0);
    const Vec ln = least_norm(p);
    REQUIRE(contains(p, ln, 1e-8));
    for (const auto& v : p.vertices()) CHECK(ln.norm() <= v.norm() + 1e-12);
    for (int k = 0; k < 100; ++k) {
      CHECK(ln.norm() <= oracle::random_hull_point(rng, p).norm() + 1e-12);
    }
  }
}

TEST_CASE("property: duplicating a vertex changes no query") {
  oracle::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = rng.integer(1, 4);
    Polytope p = rng.polytope(d, rng.integer(1, 6));
    std::vector<Vec> dup = p.vertices();
    dup.push_back(p.vertex(static_cast<std::size_t>(rng.integer(0, static_cast<int>(p.size()) - 1))));
    dup.push_back(oracle::random_hull_point(rng, p));
    Polytope q = Polytope::hull(dup);
    CHECK((least_norm(p) - least_norm(q)).norm() <= 1e-10);
    const Vec dir = rng.vec(d);
    CHECK(support(p, dir) == doctest::Approx(support(q, dir)).epsilon(1e-12));
    const Vec y = rng.vec(d);
    CHECK(contains(p, y, 0.05) == contains(q, y, 0.05));
    CHECK(distance(p, y) == doctest::Approx(distance(q, y)).epsilon(1e-8));
  }
}

TEST_CASE("property: maximin LP duality") {
  oracle::Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = rng.integer(1, 4);
    Polytope a = rng.polytope(d, rng.integer(1, 6));
    Polytope b = rng.polytope(d, rng.integer(1, 6));
    const double primal = maximin_value(a, b);
    // min over v in B of max over ζ in A, written as a maximin on negated data.
    const double dual = -maximin_value(scaled(b, -1.0), a);
    CHECK(primal <= dual + 1e-8);
    CHECK(primal == doctest::Approx(dual).epsilon(1e-8));
    double bound = 1e300;
    for (const auto& v : b.vertices()) bound = std::min(bound, support(a, v));
    CHECK(primal <= bound + 1e-9);
  }
}

TEST_CASE("property: support homogeneity and Minkowski additivity") {
  oracle::Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = rng.integer(1, 4);
    Polytope a = rng.polytope(d, rng.integer(1, 6));
    Polytope b = rng.polytope(d, rng.integer(1, 6));
    const Vec dir = rng.vec(d);
    const double s = rng.uniform(0.0, 5.0);
    CHECK(support(a, s * dir) == doctest::Approx(s * support(a, dir)).epsilon(1e-12));
    CHECK(support(minkowski_sum(a, b), dir) ==
          doctest::Approx(support(a, dir) + support(b, dir)).epsilon(1e-10));
  }
}

TEST_CASE("maximin agrees with grid search") {
  oracle::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = rng.integer(1, 2);
    Polytope a = rng.polytope(d, rng.integer(d + 1, 5));
    Polytope b = rng.polytope(d, rng.integer(1, 5));
    const double grid = oracle::grid_maximin(a, b);
    const double lp = maximin_value(a, b);
    CHECK(grid <= lp + 1e-10);
    CHECK(std::abs(lp - grid) <= 1e-4);
  }
}

TEST_CASE("reduced keeps the hull and drops interior points") {
  Polytope p = Polytope::hull({v2(0, 0), v2(1, 0), v2(0, 1), v2(1, 1), v2(0.5, 0.5), v2(1, 0)});
  Polytope r = p.reduced();
  CHECK(r.size() == 4);
  CHECK(hausdorff_distance(p, r) <= 1e-14);
}

TEST_CASE("hausdorff distance") {
  CHECK(hausdorff_distance(Polytope::interval(0, 1), Polytope::interval(0, 2)) == doctest::Approx(1.0));
  CHECK(hausdorff_distance(Polytope::point(v2(0, 0)), Polytope::segment(v2(-1, 1), v2(1, 1))) ==
        doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("solve_lp basics") {
  // maximize x + y subject to x + 2y ≤ 4, 3x + y ≤ 6.
  Mat a(2, 2);
  a << 1, 2, 3, 1;
  Vec b(2);
  b << 4, 6;
  Vec c(2);
  c << 1, 1;
  LpResult r = solve_lp(a, b, Mat(0, 2), Vec(0), c);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.value == doctest::Approx(2.8));

  // Infeasible: x ≤ -1 with x ≥ 0.
  LpResult inf = solve_lp(Mat::Ones(1, 1), Vec::Constant(1, -1.0), Mat(0, 1), Vec(0), Vec::Ones(1));
  CHECK(inf.status == LpStatus::Infeasible);

  // Unbounded: maximize x with no upper bound.
  LpResult unb = solve_lp(Mat(0, 1), Vec(0), Mat(0, 1), Vec(0), Vec::Ones(1));
  CHECK(unb.status == LpStatus::Unbounded);
}
