#include <cmath>
#include <limits>

#include "nonsmooth/internal.hpp"

namespace nsds {
namespace {

NodeInfo smooth_info(double value, const Vec& grad, bool c2) {
  NodeInfo i;
  i.value = value;
  i.grad = Polytope::point(grad);
  i.c2 = c2;
  return i;
}

Polytope tidy(Polytope p) { return p.size() > 16 ? p.reduced() : p.deduplicated(); }

NodeInfo scaled_info(const NodeInfo& child, double s) {
  NodeInfo i = child;
  i.value = s * child.value;
  i.grad = scaled(child.grad, s);
  if (s < 0) std::swap(i.regular, i.neg_regular);
  if (s == 0) i.regular = i.neg_regular = true;
  return i;
}

NodeInfo nonsmooth(double value, Polytope grad) {
  NodeInfo i;
  i.value = value;
  i.grad = tidy(std::move(grad));
  i.exact = false;
  i.regular = false;
  i.neg_regular = false;
  i.c1 = false;
  i.c2 = false;
  return i;
}

NodeInfo analyze_sum(const NsNode& n, const Vec& x) {
  NodeInfo out;
  out.value = 0.0;
  out.grad = Polytope::point(Vec::Zero(n.dim));
  bool all_exact = true;
  for (const auto& c : n.children) {
    const NodeInfo ci = analyze_node(*c, x);
    out.value += ci.value;
    out.grad = minkowski_sum(out.grad, ci.grad);
    all_exact = all_exact && ci.exact;
    out.regular = out.regular && ci.regular;
    out.neg_regular = out.neg_regular && ci.neg_regular;
    out.c1 = out.c1 && ci.c1;
    out.c2 = out.c2 && ci.c2;
  }
  out.grad = tidy(out.grad);
  out.exact = out.c1 || (all_exact && (out.regular || out.neg_regular));
  return out;
}

NodeInfo analyze_product(const NsNode& n, const Vec& x) {
  const NodeInfo a = analyze_node(*n.children[0], x);
  const NodeInfo b = analyze_node(*n.children[1], x);
  const double v1 = a.value, v2 = b.value;
  if (a.c1 && b.c1) {
    return smooth_info(v1 * v2, v2 * a.grad.vertex(0) + v1 * b.grad.vertex(0), a.c2 && b.c2);
  }
  NodeInfo out = nonsmooth(v1 * v2, minkowski_sum(scaled(a.grad, v2), scaled(b.grad, v1)));
  if (!(a.exact && b.exact)) return out;
  if ((a.regular && b.regular && v1 >= 0 && v2 >= 0) || (a.neg_regular && b.neg_regular && v1 <= 0 && v2 <= 0)) {
    out.exact = out.regular = true;
  } else if ((a.neg_regular && b.regular && v1 <= 0 && v2 >= 0) ||
             (a.regular && b.neg_regular && v1 >= 0 && v2 <= 0)) {
    out.exact = out.neg_regular = true;
  }
  return out;
}

NodeInfo analyze_quotient(const NsNode& n, const Vec& x) {
  const NodeInfo a = analyze_node(*n.children[0], x);
  const NodeInfo b = analyze_node(*n.children[1], x);
  const double v1 = a.value, v2 = b.value;
  if (std::abs(v2) <= 1e-12) throw SingularityError("quotient denominator vanishes at the point");
  if (a.c1 && b.c1) {
    return smooth_info(v1 / v2, (v2 * a.grad.vertex(0) - v1 * b.grad.vertex(0)) / (v2 * v2), a.c2 && b.c2);
  }
  const double inv = 1.0 / (v2 * v2);
  NodeInfo out = nonsmooth(v1 / v2, minkowski_sum(scaled(a.grad, v2 * inv), scaled(b.grad, -v1 * inv)));
  if (!(a.exact && b.exact)) return out;
  if ((a.regular && b.neg_regular && v1 >= 0 && v2 > 0) || (a.neg_regular && b.regular && v1 <= 0 && v2 < 0)) {
    out.exact = out.regular = true;
  } else if ((a.neg_regular && b.neg_regular && v1 <= 0 && v2 > 0) ||
             (a.regular && b.regular && v1 >= 0 && v2 < 0)) {
    out.exact = out.neg_regular = true;
  }
  return out;
}

NodeInfo analyze_extremum(const NsNode& n, const Vec& x, bool is_max) {
  std::vector<double> values;
  values.reserve(n.children.size());
  double best = is_max ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  for (const auto& c : n.children) {
    values.push_back(eval_node(*c, x));
    best = is_max ? std::max(best, values.back()) : std::min(best, values.back());
  }
  const double band = tie_tol(best);
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (std::abs(values[k] - best) <= band) active.push_back(k);
  }
  if (active.size() == 1) {
    NodeInfo only = analyze_node(*n.children[active.front()], x);
    only.value = best;
    return only;
  }
  Polytope hull = Polytope::empty(n.dim);
  bool all_exact = true;
  bool all_sided = true;
  for (auto k : active) {
    const NodeInfo ci = analyze_node(*n.children[k], x);
    hull = hull_union(hull, ci.grad);
    all_exact = all_exact && ci.exact;
    all_sided = all_sided && (is_max ? ci.regular : ci.neg_regular);
  }
  NodeInfo out = nonsmooth(best, hull);
  if (all_exact && all_sided) {
    out.exact = true;
    (is_max ? out.regular : out.neg_regular) = true;
  }
  return out;
}

NodeInfo analyze_abs(const NsNode& n, const Vec& x) {
  const NodeInfo h = analyze_node(*n.children[0], x);
  if (2.0 * std::abs(h.value) > tie_tol(std::abs(h.value))) return scaled_info(h, h.value < 0 ? -1.0 : 1.0);
  NodeInfo out = nonsmooth(std::abs(h.value), hull_union(h.grad, scaled(h.grad, -1.0)));
  if (h.exact && h.regular && h.neg_regular) out.exact = out.regular = true;
  return out;
}

NodeInfo analyze_norm(const NsNode& n, const Vec& x) {
  const Vec z = n.a * x + n.b;
  const double r = z.norm();
  if (r > 1e-12) return smooth_info(r, n.a.transpose() * z / r, true);
  if (z.size() == 1) {
    const Vec a = n.a.row(0).transpose();
    NodeInfo out = nonsmooth(r, Polytope::segment(-a, a));
    out.exact = out.regular = true;
    return out;
  }
  throw UnsupportedError("generalized gradient of a Euclidean norm at its zero is a ball, not a polytope");
}

NodeInfo analyze_compose(const NsNode& n, const Vec& x) {
  const std::size_t m = n.children.size() - 1;
  std::vector<NodeInfo> inner;
  Vec y(static_cast<Eigen::Index>(m));
  bool inner_c1 = true, inner_c2 = true, inner_ok = true;
  for (std::size_t k = 0; k < m; ++k) {
    inner.push_back(analyze_node(*n.children[k + 1], x));
    y(static_cast<Eigen::Index>(k)) = inner.back().value;
    inner_c1 = inner_c1 && inner.back().c1;
    inner_c2 = inner_c2 && inner.back().c2;
    inner_ok = inner_ok && inner.back().exact && inner.back().regular;
  }
  const NodeInfo outer = analyze_node(*n.children[0], y);
  if (outer.c1 && inner_c1) {
    const Vec& dg = outer.grad.vertex(0);
    Vec g = Vec::Zero(n.dim);
    for (std::size_t k = 0; k < m; ++k) g += dg(static_cast<Eigen::Index>(k)) * inner[k].grad.vertex(0);
    return smooth_info(outer.value, g, outer.c2 && inner_c2);
  }
  Polytope hull = Polytope::empty(n.dim);
  bool nonnegative = true;
  for (const auto& alpha : outer.grad.vertices()) {
    Polytope part = Polytope::point(Vec::Zero(n.dim));
    for (std::size_t k = 0; k < m; ++k) {
      const double ak = alpha(static_cast<Eigen::Index>(k));
      nonnegative = nonnegative && ak >= -1e-15;
      part = minkowski_sum(part, scaled(inner[k].grad, ak));
    }
    hull = hull_union(hull, part);
  }
  NodeInfo out = nonsmooth(outer.value, hull);
  if (outer.exact && outer.regular && inner_ok && nonnegative) out.exact = out.regular = true;
  return out;
}

}  // namespace

NodeInfo analyze_node(const NsNode& n, const Vec& x) {
  switch (n.kind) {
    case NsKind::Atom: {
      if (n.singular && n.singular(x)) {
        throw NotLipschitzError("function '" + n.label + "' is not locally Lipschitz at the point");
      }
      return smooth_info(n.value(x), n.gradient(x), n.c2);
    }
    case NsKind::Dilation:
      return scaled_info(analyze_node(*n.children[0], x), n.scale);
    case NsKind::Sum:
      return analyze_sum(n, x);
    case NsKind::Product:
      return analyze_product(n, x);
    case NsKind::Quotient:
      return analyze_quotient(n, x);
    case NsKind::Max:
      return analyze_extremum(n, x, true);
    case NsKind::Min:
      return analyze_extremum(n, x, false);
    case NsKind::Abs:
      return analyze_abs(n, x);
    case NsKind::Norm:
      return analyze_norm(n, x);
    case NsKind::Compose:
      return analyze_compose(n, x);
    case NsKind::Annotated:
      return analyze_node(*n.children[0], x);
  }
  throw ModelError("unknown node kind");
}

GradientResult generalized_gradient(const NsFunction& f, const Vec& x) {
  require_dim(x.size(), f.dim(), "generalized_gradient");
  const NodeInfo i = analyze_node(f.node(), x);
  GradientResult r;
  r.polytope = i.grad;
  r.exact = i.exact;
  r.regular = i.regular && i.exact;
  r.neg_regular = i.neg_regular && i.exact;
  r.smooth = i.c1;
  r.twice_smooth = i.c2;
  r.value = i.value;
  return r;
}

namespace {

ProximalResult prox_node(const NsNode& n, const Vec& x) {
  if (n.kind == NsKind::Annotated) {
    if (n.proximal) {
      if (auto r = n.proximal(x)) return *r;
    }
    return prox_node(*n.children[0], x);
  }
  const NodeInfo info = analyze_node(n, x);
  if (info.c2) return ProximalResult::of(info.grad);
  if (n.convex) return ProximalResult::of(info.grad);
  if (n.kind == NsKind::Dilation && n.scale >= 0) {
    if (n.scale == 0) return ProximalResult::of(Polytope::point(Vec::Zero(n.dim)));
    ProximalResult r = prox_node(*n.children[0], x);
    if (r.kind == ProximalResult::Kind::Set) r.set = scaled(r.set, n.scale);
    return r;
  }
  if (n.kind == NsKind::Sum) {
    std::vector<std::size_t> rough;
    Vec smooth_part = Vec::Zero(n.dim);
    for (std::size_t k = 0; k < n.children.size(); ++k) {
      const NodeInfo ci = analyze_node(*n.children[k], x);
      if (ci.c2) smooth_part += ci.grad.vertex(0);
      else rough.push_back(k);
    }
    if (rough.size() == 1) {
      ProximalResult r = prox_node(*n.children[rough.front()], x);
      if (r.kind == ProximalResult::Kind::Set) r.set = translated(r.set, smooth_part);
      return r;
    }
  }
  // If -f is regular and ∂f is a nontrivial exact set, f has a concave kink
  // and no local quadratic minorant.
  if (info.exact && info.neg_regular && info.grad.deduplicated(1e-9).size() > 1) return ProximalResult::empty();
  return ProximalResult::unsupported("no closed-form proximal rule applies at the point");
}

Mat hessian_node(const NsNode& n, const Vec& x);

Mat fd_hessian(const std::function<Vec(const Vec&)>& grad, const Vec& x) {
  const auto d = x.size();
  Mat h(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double step = 1e-6 * (1.0 + std::abs(x(k)));
    Vec xp = x, xm = x;
    xp(k) += step;
    xm(k) -= step;
    h.col(k) = (grad(xp) - grad(xm)) / (2 * step);
  }
  return 0.5 * (h + h.transpose());
}

Vec node_gradient(const NsNode& n, const Vec& x) { return least_norm(analyze_node(n, x).grad); }

Mat hessian_node(const NsNode& n, const Vec& x) {
  switch (n.kind) {
    case NsKind::Atom:
      if (n.hessian) return n.hessian(x);
      return fd_hessian(n.gradient, x);
    case NsKind::Dilation:
      return n.scale * hessian_node(*n.children[0], x);
    case NsKind::Sum: {
      Mat h = Mat::Zero(n.dim, n.dim);
      for (const auto& c : n.children) h += hessian_node(*c, x);
      return h;
    }
    case NsKind::Product: {
      const NodeInfo a = analyze_node(*n.children[0], x);
      const NodeInfo b = analyze_node(*n.children[1], x);
      const Vec& ga = a.grad.vertex(0);
      const Vec& gb = b.grad.vertex(0);
      return b.value * hessian_node(*n.children[0], x) + a.value * hessian_node(*n.children[1], x) +
             ga * gb.transpose() + gb * ga.transpose();
    }
    case NsKind::Annotated:
      return hessian_node(*n.children[0], x);
    case NsKind::Norm: {
      const Vec z = n.a * x + n.b;
      const double r = z.norm();
      if (r <= 1e-12) throw UnsupportedError("norm is not twice differentiable at its zero");
      const Vec az = n.a.transpose() * z;
      return (n.a.transpose() * n.a) / r - az * az.transpose() / (r * r * r);
    }
    default:
      return fd_hessian([&n](const Vec& y) { return node_gradient(n, y); }, x);
  }
}

}  // namespace

ProximalResult proximal_subdifferential(const NsFunction& f, const Vec& x) {
  require_dim(x.size(), f.dim(), "proximal_subdifferential");
  return prox_node(f.node(), x);
}

Mat hessian(const NsFunction& f, const Vec& x) {
  require_dim(x.size(), f.dim(), "hessian");
  return hessian_node(f.node(), x);
}

DescentDirection descent_direction(const NsFunction& f, const Vec& x) {
  const GradientResult g = generalized_gradient(f, x);
  if (!g.exact || !g.regular) {
    throw UnsupportedError("descent_direction needs an exact generalized gradient of a regular function");
  }
  DescentDirection d;
  if (contains(g.polytope, Vec::Zero(f.dim()), 1e-12)) {
    d.direction = Vec::Zero(f.dim());
    d.critical = true;
    return d;
  }
  d.direction = -least_norm(g.polytope);
  return d;
}

DescentCheck descent_inequality_check(const NsFunction& f, const Vec& x, const std::vector<double>& steps) {
  const Vec ln = least_norm(generalized_gradient(f, x).polytope);
  const double fx = f(x);
  const double n2 = ln.squaredNorm();
  DescentCheck out;
  for (double t : steps) {
    if (f(x - t * ln) > fx - 0.5 * t * n2 + 1e-12 * (1.0 + std::abs(fx))) {
      out.holds = false;
      out.witness = t;
      return out;
    }
  }
  return out;
}

}  // namespace nsds
