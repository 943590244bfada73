#include <algorithm>
#include <cmath>
#include <limits>

#include "nsds/geometry.hpp"

namespace nsds {

Polytope Polytope::empty(int dim) {
  Polytope p;
  p.dim_ = dim;
  return p;
}

Polytope Polytope::point(const Vec& v) {
  Polytope p;
  p.dim_ = static_cast<int>(v.size());
  p.vertices_.push_back(v);
  return p;
}

Polytope Polytope::hull(std::vector<Vec> points) {
  if (points.empty()) throw EmptySetError("Polytope::hull needs at least one point; use Polytope::empty");
  Polytope p;
  p.dim_ = static_cast<int>(points.front().size());
  if (p.dim_ < 1) throw DimensionMismatchError("Polytope dimension must be at least 1");
  for (const auto& v : points) require_dim(v.size(), p.dim_, "Polytope::hull");
  p.vertices_ = std::move(points);
  return p;
}

Polytope Polytope::segment(const Vec& a, const Vec& b) { return hull({a, b}); }

Polytope Polytope::interval(double lo, double hi) {
  return hull({Vec::Constant(1, lo), Vec::Constant(1, hi)});
}

Polytope Polytope::deduplicated(double tol) const {
  Polytope out = empty(dim_);
  for (const auto& v : vertices_) {
    bool seen = false;
    for (const auto& w : out.vertices_) {
      if ((v - w).norm() <= tol * (1.0 + v.norm())) {
        seen = true;
        break;
      }
    }
    if (!seen) out.vertices_.push_back(v);
  }
  return out;
}

Polytope Polytope::reduced(double tol) const {
  Polytope out = deduplicated();
  if (out.size() <= 2) return out;
  for (std::size_t i = 0; i < out.vertices_.size() && out.vertices_.size() > 1;) {
    std::vector<Vec> others;
    others.reserve(out.vertices_.size() - 1);
    for (std::size_t j = 0; j < out.vertices_.size(); ++j) {
      if (j != i) others.push_back(out.vertices_[j]);
    }
    if (distance(hull(others), out.vertices_[i]) <= tol * (1.0 + out.vertices_[i].norm())) {
      out.vertices_.erase(out.vertices_.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  return out;
}

double support(const Polytope& p, const Vec& dir) {
  if (p.is_empty()) throw EmptySetError("support of the empty set");
  require_dim(dir.size(), p.dim(), "support");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : p.vertices()) best = std::max(best, dir.dot(v));
  return best;
}

double lower_support(const Polytope& p, const Vec& dir) { return -support(p, -dir); }

double maximin_value(const Polytope& a, const Polytope& b) {
  if (a.is_empty() || b.is_empty()) throw EmptySetError("maximin_value of an empty polytope");
  require_dim(b.dim(), a.dim(), "maximin_value");
  const auto ka = static_cast<Eigen::Index>(a.size());
  const auto kb = static_cast<Eigen::Index>(b.size());
  Mat payoff(ka, kb);
  for (Eigen::Index i = 0; i < ka; ++i) {
    for (Eigen::Index j = 0; j < kb; ++j) {
      payoff(i, j) = a.vertex(static_cast<std::size_t>(i)).dot(b.vertex(static_cast<std::size_t>(j)));
    }
  }
  if (ka == 1) return payoff.row(0).minCoeff();
  if (kb == 1) return payoff.col(0).maxCoeff();

  // Shift the payoff so the game value is positive and the value variable
  // can be kept nonnegative.
  const double shift = 1.0 - payoff.minCoeff();
  // Variables: α_1..α_ka, t. maximize t subject to t ≤ Σ α_i P_ij, Σ α = 1.
  Mat a_le = Mat::Zero(kb, ka + 1);
  a_le.leftCols(ka) = -(payoff.array() + shift).matrix().transpose();
  a_le.col(ka).setOnes();
  Vec b_le = Vec::Zero(kb);
  Mat a_eq = Mat::Zero(1, ka + 1);
  a_eq.leftCols(ka).setOnes();
  Vec b_eq = Vec::Ones(1);
  Vec c = Vec::Zero(ka + 1);
  c(ka) = 1.0;
  const LpResult lp = solve_lp(a_le, b_le, a_eq, b_eq, c);
  if (lp.status != LpStatus::Optimal) throw ModelError("maximin_value: linear program failed");
  // Polish: evaluate the game value exactly at the optimal mixed strategy.
  Vec alpha = lp.x.head(ka);
  alpha /= alpha.sum();
  return (alpha.transpose() * payoff).minCoeff();
}

Polytope affine_image(const Polytope& p, const Mat& m, const Vec& b) {
  if (m.cols() != p.dim() || m.rows() != b.size()) {
    throw DimensionMismatchError("affine_image: matrix is " + std::to_string(m.rows()) + "x" +
                                 std::to_string(m.cols()) + ", polytope dimension " +
                                 std::to_string(p.dim()) + ", offset " + std::to_string(b.size()));
  }
  if (p.is_empty()) return Polytope::empty(static_cast<int>(m.rows()));
  std::vector<Vec> out;
  out.reserve(p.size());
  for (const auto& v : p.vertices()) out.push_back(m * v + b);
  return Polytope::hull(std::move(out));
}

Polytope scaled(const Polytope& p, double s) {
  if (p.is_empty()) return p;
  std::vector<Vec> out;
  for (const auto& v : p.vertices()) out.push_back(s * v);
  return Polytope::hull(std::move(out));
}

Polytope translated(const Polytope& p, const Vec& shift) {
  require_dim(shift.size(), p.dim(), "translated");
  if (p.is_empty()) return p;
  std::vector<Vec> out;
  for (const auto& v : p.vertices()) out.push_back(v + shift);
  return Polytope::hull(std::move(out));
}

Polytope minkowski_sum(const Polytope& a, const Polytope& b) {
  require_dim(b.dim(), a.dim(), "minkowski_sum");
  if (a.is_empty() || b.is_empty()) return Polytope::empty(a.dim());
  std::vector<Vec> out;
  out.reserve(a.size() * b.size());
  for (const auto& u : a.vertices()) {
    for (const auto& v : b.vertices()) out.push_back(u + v);
  }
  Polytope sum = Polytope::hull(std::move(out));
  return sum.size() > 16 ? sum.reduced() : sum.deduplicated();
}

Polytope hull_union(const Polytope& a, const Polytope& b) {
  require_dim(b.dim(), a.dim(), "hull_union");
  if (a.is_empty()) return b;
  if (b.is_empty()) return a;
  std::vector<Vec> out = a.vertices();
  out.insert(out.end(), b.vertices().begin(), b.vertices().end());
  return Polytope::hull(std::move(out)).deduplicated();
}

Polytope cartesian_product(const Polytope& a, const Polytope& b) {
  if (a.is_empty() || b.is_empty()) return Polytope::empty(a.dim() + b.dim());
  std::vector<Vec> out;
  for (const auto& u : a.vertices()) {
    for (const auto& v : b.vertices()) {
      Vec w(a.dim() + b.dim());
      w << u, v;
      out.push_back(std::move(w));
    }
  }
  return Polytope::hull(std::move(out));
}

double hausdorff_distance(const Polytope& a, const Polytope& b) {
  require_dim(b.dim(), a.dim(), "hausdorff_distance");
  if (a.is_empty() && b.is_empty()) return 0.0;
  if (a.is_empty() || b.is_empty()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (const auto& v : a.vertices()) d = std::max(d, distance(b, v));
  for (const auto& v : b.vertices()) d = std::max(d, distance(a, v));
  return d;
}

}  // namespace nsds
