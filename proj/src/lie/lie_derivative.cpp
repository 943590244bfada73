#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsds/lie.hpp"

namespace nsds {

LieInterval LieInterval::interval(double lo, double hi) {
  if (lo > hi) {
    if (lo - hi > 1e-9 * (1.0 + std::abs(lo))) {
      throw ModelError("LieInterval: lower end exceeds upper end");
    }
    lo = hi;
  }
  return {Kind::Interval, lo, hi};
}

double LieInterval::inf_value() const {
  switch (kind) {
    case Kind::Empty: return inf();
    case Kind::UnboundedBelow: return -inf();
    case Kind::Interval: return lo;
  }
  return inf();
}

bool LieInterval::contains(double a, double tol) const {
  if (is_empty()) return false;
  return a >= inf_value() - tol && a <= hi + tol;
}

std::string to_string(const LieInterval& l) {
  std::ostringstream s;
  s.precision(17);
  switch (l.kind) {
    case LieInterval::Kind::Empty: return "empty";
    case LieInterval::Kind::Interval: s << "[" << l.lo << ", " << l.hi << "]"; break;
    case LieInterval::Kind::UnboundedBelow: s << "(-inf, " << l.hi << "]"; break;
  }
  return s.str();
}

namespace {

/// Orthonormal basis of span{rows} by Gram-Schmidt with largest-residual
/// pivoting; residuals below `pivot_tol` are dropped.
Mat row_space_basis(std::vector<Vec> rows, double pivot_tol) {
  std::vector<Vec> basis;
  while (!rows.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].norm() > rows[best].norm()) best = i;
    }
    const double n = rows[best].norm();
    if (n <= pivot_tol) break;
    const Vec q = rows[best] / n;
    rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(best));
    for (auto& r : rows) r -= r.dot(q) * q;
    basis.push_back(q);
  }
  const Eigen::Index d = basis.empty() ? 0 : basis.front().size();
  Mat b(static_cast<Eigen::Index>(basis.size()), d);
  for (std::size_t i = 0; i < basis.size(); ++i) b.row(static_cast<Eigen::Index>(i)) = basis[i].transpose();
  return b;
}

}  // namespace

LieInterval set_lie_derivative(const Polytope& fset, const Polytope& grad) {
  if (fset.is_empty() || grad.is_empty()) throw EmptySetError("set_lie_derivative needs nonempty sets");
  require_dim(grad.dim(), fset.dim(), "set_lie_derivative");
  const Polytope f = fset.deduplicated();
  const Polytope z = grad.deduplicated();
  const int d = f.dim();
  const auto m = static_cast<Eigen::Index>(f.size());

  double scale = 1.0;
  for (const auto& v : z.vertices()) scale = std::max(scale, v.norm());
  std::vector<Vec> diffs;
  for (std::size_t i = 1; i < z.size(); ++i) diffs.push_back(z.vertex(i) - z.vertex(0));
  const Mat basis = row_space_basis(std::move(diffs), 1e-10 * scale);

  Mat fm(d, m);
  for (Eigen::Index j = 0; j < m; ++j) fm.col(j) = f.vertex(static_cast<std::size_t>(j));

  // μ ≥ 0 are convex weights on F's vertices; v = fm μ.
  const Eigen::Index r = basis.rows();
  Mat a_eq(r + 1, m);
  if (r > 0) a_eq.topRows(r) = basis * fm;
  a_eq.row(r).setOnes();
  Vec b_eq = Vec::Zero(r + 1);
  b_eq(r) = 1.0;
  const Vec c = fm.transpose() * z.vertex(0);
  const Mat none(0, m);
  const LpResult hi = solve_lp(none, Vec(0), a_eq, b_eq, c);
  if (hi.status == LpStatus::Infeasible) return LieInterval::empty();
  const LpResult lo = solve_lp(none, Vec(0), a_eq, b_eq, -c);
  if (hi.status != LpStatus::Optimal || lo.status != LpStatus::Optimal) {
    throw ModelError("set_lie_derivative: bounded LP reported unbounded");
  }
  return LieInterval::interval(-lo.value, hi.value);
}

LieBounds lower_upper_lie(const Polytope& fset, const Polytope& prox) {
  if (prox.is_empty()) return {};
  if (fset.is_empty()) throw EmptySetError("lower_upper_lie needs a nonempty inclusion set");
  require_dim(prox.dim(), fset.dim(), "lower_upper_lie");
  double lower_lo = std::numeric_limits<double>::infinity();
  double upper_hi = -std::numeric_limits<double>::infinity();
  for (const auto& zeta : prox.vertices()) {
    lower_lo = std::min(lower_lo, lower_support(fset, zeta));
    upper_hi = std::max(upper_hi, support(fset, zeta));
  }
  const double lower_hi = maximin_value(prox, fset);
  const double upper_lo = -maximin_value(prox, scaled(fset, -1.0));
  return {LieInterval::interval(lower_lo, lower_hi), LieInterval::interval(upper_lo, upper_hi)};
}

LieBounds lower_upper_lie(const Polytope& fset, const ProximalResult& prox) {
  const double inf = std::numeric_limits<double>::infinity();
  switch (prox.kind) {
    case ProximalResult::Kind::Set: return lower_upper_lie(fset, prox.set);
    case ProximalResult::Kind::Empty: return {};
    case ProximalResult::Kind::Unsupported:
      throw UnsupportedError("proximal subdifferential unavailable: " + prox.reason);
    case ProximalResult::Kind::AllSpace: {
      if (fset.is_empty()) throw EmptySetError("lower_upper_lie needs a nonempty inclusion set");
      bool zero_only = true;
      for (const auto& v : fset.vertices()) zero_only = zero_only && v.norm() <= 1e-15;
      if (zero_only) return {LieInterval::interval(0, 0), LieInterval::interval(0, 0)};
      // ζ ranges over all of R^d, so both sets are unbounded in at least one direction.
      if (contains(fset, Vec::Zero(fset.dim()))) {
        return {LieInterval::unbounded_below(0.0), LieInterval::interval(0.0, inf)};
      }
      return {LieInterval::unbounded_below(inf), LieInterval::unbounded_below(inf)};
    }
  }
  return {};
}

SetValuedMap filippov_map(const PiecewiseField& f) {
  return [f](const Vec& x) { return filippov_set(f, x); };
}

SetValuedMap control_map(const ControlField& c) {
  return [c](const Vec& x) { return control_inclusion(c, x); };
}

SetValuedMap neg_gradient_map(const NsFunction& f) {
  return [f](const Vec& x) { return scaled(generalized_gradient(f, x).polytope, -1.0); };
}

namespace {

double gradient_tol(const Vec& g) { return 1e-9 * (1.0 + g.norm()); }

std::vector<Vec> cross_polytope(const std::vector<Vec>& directions) {
  std::vector<Vec> out;
  for (const auto& u : directions) {
    out.push_back(u);
    out.push_back(-u);
  }
  return out;
}

}  // namespace

SetValuedMap normalized_gradient_map(const NsFunction& f) {
  return [f](const Vec& x) {
    const GradientResult g = generalized_gradient(f, x);
    const int d = f.dim();
    std::vector<Vec> pts;
    bool critical = false;
    for (const auto& z : g.polytope.vertices()) {
      if (z.norm() > gradient_tol(z)) {
        pts.push_back(-z / z.norm());
      } else {
        critical = true;
      }
    }
    if (critical) {
      std::vector<Vec> dirs;
      if (g.twice_smooth) {
        const Eigen::SelfAdjointEigenSolver<Mat> eig(hessian(f, x));
        const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
        for (int k = 0; k < d; ++k) {
          if (std::abs(eig.eigenvalues()(k)) > 1e-9 * std::max(1.0, top)) dirs.push_back(eig.eigenvectors().col(k));
        }
      }
      if (dirs.empty()) {
        for (int k = 0; k < d; ++k) dirs.push_back(Vec::Unit(d, k));
      }
      for (auto& p : cross_polytope(dirs)) pts.push_back(std::move(p));
    }
    return Polytope::hull(std::move(pts));
  };
}

SetValuedMap signed_gradient_map(const NsFunction& f) {
  return [f](const Vec& x) {
    const GradientResult g = generalized_gradient(f, x);
    const int d = f.dim();
    std::vector<Vec> pts;
    for (const auto& z : g.polytope.vertices()) {
      const double tol = gradient_tol(z);
      std::vector<Vec> partial{Vec(-z.unaryExpr([tol](double c) { return std::abs(c) <= tol ? 0.0 : (c > 0 ? 1.0 : -1.0); }))};
      for (int k = 0; k < d; ++k) {
        if (std::abs(z(k)) > tol) continue;
        std::vector<Vec> next;
        for (const auto& p : partial) {
          Vec a = p, b = p;
          a(k) = -1.0;
          b(k) = 1.0;
          next.push_back(a);
          next.push_back(b);
        }
        partial = std::move(next);
      }
      pts.insert(pts.end(), partial.begin(), partial.end());
    }
    return Polytope::hull(std::move(pts)).deduplicated();
  };
}

}  // namespace nsds
