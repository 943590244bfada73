#pragma once

#include <vector>

#include "nsds/common.hpp"

namespace nsds {

/// Default tolerance for geometric membership queries.
inline constexpr double kMembershipTol = 1e-9;

/// Convex hull of finitely many points in R^d, stored by its generating
/// points. Generators need not be extreme; duplicates are legal. A
/// distinguished empty variant keeps its dimension.
class Polytope {
 public:
  Polytope() = default;

  static Polytope empty(int dim);
  static Polytope point(const Vec& p);
  static Polytope hull(std::vector<Vec> points);
  static Polytope segment(const Vec& a, const Vec& b);
  /// Interval [lo, hi] in R^1.
  static Polytope interval(double lo, double hi);

  int dim() const { return dim_; }
  bool is_empty() const { return vertices_.empty(); }
  std::size_t size() const { return vertices_.size(); }
  const std::vector<Vec>& vertices() const { return vertices_; }
  const Vec& vertex(std::size_t i) const { return vertices_[i]; }

  /// Same hull with near-duplicate generators removed.
  Polytope deduplicated(double tol = 1e-12) const;
  /// Same hull with duplicates and non-extreme generators removed.
  Polytope reduced(double tol = 1e-10) const;

 private:
  int dim_ = 0;
  std::vector<Vec> vertices_;
};

/// Least-norm point of the hull together with convex weights on the
/// generators that certify membership.
struct LeastNormResult {
  Vec point;
  std::vector<double> weights;
};

/// Minimum-norm point of the hull (Wolfe's algorithm).
LeastNormResult least_norm_point(const Polytope& p);
Vec least_norm(const Polytope& p);

/// Euclidean distance from y to the hull.
double distance(const Polytope& p, const Vec& y);

/// True iff y lies within Euclidean distance tol of the hull.
bool contains(const Polytope& p, const Vec& y, double tol = kMembershipTol);

/// max over the hull of dir·v.
double support(const Polytope& p, const Vec& dir);
/// min over the hull of dir·v.
double lower_support(const Polytope& p, const Vec& dir);

/// sup over ζ in A of min over v in B of ζ·v, by linear programming.
double maximin_value(const Polytope& a, const Polytope& b);

/// Image {M v + b}.
Polytope affine_image(const Polytope& p, const Mat& m, const Vec& b);
Polytope scaled(const Polytope& p, double s);
Polytope translated(const Polytope& p, const Vec& shift);
Polytope minkowski_sum(const Polytope& a, const Polytope& b);
/// Hull of the union.
Polytope hull_union(const Polytope& a, const Polytope& b);
/// A × B in R^(da+db).
Polytope cartesian_product(const Polytope& a, const Polytope& b);

/// Exact Hausdorff distance between two hulls. Both directed distances of
/// convex hulls are attained at generators, so this is a vertex sweep with
/// a least-norm distance per generator.
double hausdorff_distance(const Polytope& a, const Polytope& b);

/// Result of a linear program in standard inequality/equality form.
enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  Vec x;
};

/// maximize cᵀx subject to A_le x ≤ b_le, A_eq x = b_eq, x ≥ 0.
/// Dense two-phase simplex with Bland's rule. Either constraint block may
/// have zero rows.
LpResult solve_lp(const Mat& a_le, const Vec& b_le, const Mat& a_eq, const Vec& b_eq,
                  const Vec& c);

}  // namespace nsds
