#include <algorithm>
#include <cmath>

#include "nsds/geometry.hpp"

namespace nsds {
namespace {

// Minimizer of ‖Σ μ_i p_i‖ over the affine hull of the points in `set`
// (Σ μ_i = 1), from the bordered Gram system.
Vec affine_minimizer(const std::vector<Vec>& pts, const std::vector<std::size_t>& set) {
  const auto k = static_cast<Eigen::Index>(set.size());
  Mat kkt = Mat::Zero(k + 1, k + 1);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double g = pts[set[static_cast<std::size_t>(i)]].dot(pts[set[static_cast<std::size_t>(j)]]);
      kkt(i, j) = g;
      kkt(j, i) = g;
    }
    kkt(i, k) = 1.0;
    kkt(k, i) = 1.0;
  }
  Vec rhs = Vec::Zero(k + 1);
  rhs(k) = 1.0;
  Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  return sol.head(k);
}

}  // namespace

LeastNormResult least_norm_point(const Polytope& p) {
  if (p.is_empty()) throw EmptySetError("least_norm of the empty set");
  const auto& pts = p.vertices();
  const std::size_t n = pts.size();

  double scale = 0.0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = pts[i].squaredNorm();
    scale = std::max(scale, s);
    if (s < pts[start].squaredNorm()) start = i;
  }
  const double eps = 1e-13 * std::max(scale, 1e-300);

  std::vector<std::size_t> set{start};
  std::vector<double> lambda{1.0};
  Vec x = pts[start];

  const int max_major = 100 + 10 * static_cast<int>(n);
  for (int major = 0; major < max_major; ++major) {
    std::size_t j = 0;
    double best = x.dot(pts[0]);
    for (std::size_t i = 1; i < n; ++i) {
      const double v = x.dot(pts[i]);
      if (v < best) {
        best = v;
        j = i;
      }
    }
    if (best >= x.squaredNorm() - eps) break;
    if (std::find(set.begin(), set.end(), j) != set.end()) break;
    set.push_back(j);
    lambda.push_back(0.0);

    for (int minor = 0; minor < 10 * static_cast<int>(n) + 10; ++minor) {
      Vec mu = affine_minimizer(pts, set);
      bool interior = true;
      for (Eigen::Index i = 0; i < mu.size(); ++i) {
        if (mu(i) <= 1e-14) interior = false;
      }
      if (interior) {
        for (std::size_t i = 0; i < set.size(); ++i) lambda[i] = mu(static_cast<Eigen::Index>(i));
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < set.size(); ++i) {
        const double m = mu(static_cast<Eigen::Index>(i));
        if (m <= 1e-14 && lambda[i] - m > 0) theta = std::min(theta, lambda[i] / (lambda[i] - m));
      }
      for (std::size_t i = 0; i < set.size(); ++i) {
        lambda[i] = (1.0 - theta) * lambda[i] + theta * mu(static_cast<Eigen::Index>(i));
      }
      std::vector<std::size_t> keep_set;
      std::vector<double> keep_lambda;
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (lambda[i] > 1e-14) {
          keep_set.push_back(set[i]);
          keep_lambda.push_back(lambda[i]);
        }
      }
      if (keep_set.empty()) {
        keep_set.push_back(set.back());
        keep_lambda.push_back(1.0);
      }
      set = std::move(keep_set);
      lambda = std::move(keep_lambda);
    }
    double total = 0.0;
    for (double l : lambda) total += l;
    x = Vec::Zero(p.dim());
    for (std::size_t i = 0; i < set.size(); ++i) {
      lambda[i] /= total;
      x += lambda[i] * pts[set[i]];
    }
  }

  LeastNormResult out;
  out.point = x;
  out.weights.assign(n, 0.0);
  for (std::size_t i = 0; i < set.size(); ++i) out.weights[set[i]] += lambda[i];
  return out;
}

Vec least_norm(const Polytope& p) { return least_norm_point(p).point; }

double distance(const Polytope& p, const Vec& y) {
  if (p.is_empty()) throw EmptySetError("distance to the empty set");
  require_dim(y.size(), p.dim(), "distance");
  return least_norm(translated(p, -y)).norm();
}

bool contains(const Polytope& p, const Vec& y, double tol) {
  require_dim(y.size(), p.dim(), "contains");
  if (p.is_empty()) return false;
  return distance(p, y) <= tol;
}

}  // namespace nsds
