#include <cmath>
#include <random>

#include "nsds/fields.hpp"

namespace nsds {
namespace {

double resolve_tol(double tol, const Vec& x) { return tol < 0 ? PiecewiseField::default_tol(x) : tol; }

// Whether the cell with signs `sigma` on the active surfaces touches x to
// first order: some direction d has σ_i ∇g_i·d > 0 for every active i.
bool locally_adjacent(const std::vector<Vec>& grads, const SignVector& sigma,
                      const std::vector<std::size_t>& active) {
  if (active.size() < 2) return true;
  const auto d = grads.front().size();
  const auto k = static_cast<Eigen::Index>(active.size());
  Mat a_le(k, 2 * d);
  for (Eigen::Index r = 0; r < k; ++r) {
    const double s = sigma[active[static_cast<std::size_t>(r)]];
    const Vec& g = grads[static_cast<std::size_t>(r)];
    a_le.row(r).head(d) = -s * g.transpose();
    a_le.row(r).tail(d) = s * g.transpose();
  }
  const LpResult lp = solve_lp(a_le, Vec::Constant(k, -1.0), Mat(0, 2 * d), Vec(0), Vec::Zero(2 * d));
  return lp.status != LpStatus::Infeasible;
}

}  // namespace

std::string to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::Continuity: return "Continuity";
    case SurfaceKind::Crossing: return "Crossing";
    case SurfaceKind::Sliding: return "Sliding";
    case SurfaceKind::Repulsive: return "Repulsive";
    case SurfaceKind::Tangent: return "Tangent";
  }
  return "Unknown";
}

Polytope filippov_set(const PiecewiseField& f, const Vec& x, double tol) {
  require_dim(x.size(), f.dim(), "filippov_set");
  tol = resolve_tol(tol, x);
  const SignVector sigma = f.signs(x);
  const auto active = f.active_surfaces(x, tol);
  if (active.empty()) {
    auto v = f.cell_value(sigma, x);
    if (!v) throw ModelError("point lies in no declared cell (sign vector " + sign_string(sigma) + ")");
    return Polytope::point(*v);
  }
  if (active.size() > 20) throw UnsupportedError("filippov_set: too many active surfaces");

  std::vector<Vec> grads;
  grads.reserve(active.size());
  for (auto i : active) grads.push_back(f.switch_gradient(i, x));

  std::vector<Vec> adjacent;
  std::vector<Vec> declared;
  const std::size_t combos = std::size_t{1} << active.size();
  SignVector s = sigma;
  for (std::size_t mask = 0; mask < combos; ++mask) {
    for (std::size_t k = 0; k < active.size(); ++k) s[active[k]] = (mask >> k) & 1U ? 1 : -1;
    auto v = f.cell_value(s, x);
    if (!v) continue;
    declared.push_back(*v);
    if (locally_adjacent(grads, s, active)) adjacent.push_back(*v);
  }
  if (declared.empty()) throw ModelError("no declared cell is adjacent to the point");
  return Polytope::hull(adjacent.empty() ? std::move(declared) : std::move(adjacent)).deduplicated();
}

SurfacePair adjacent_fields(const PiecewiseField& f, const Vec& x, std::size_t i) {
  SurfacePair p;
  p.normal = f.switch_gradient(i, x);
  if (p.normal.norm() <= 1e-12) {
    throw DegenerateSurfaceError("switching function " + std::to_string(i + 1) +
                                 " has vanishing gradient at the point");
  }
  p.cell_a = f.signs(x);
  p.cell_a[i] = -1;
  p.cell_b = p.cell_a;
  p.cell_b[i] = 1;
  p.field_a = f.require_cell(p.cell_a, x);
  p.field_b = f.require_cell(p.cell_b, x);
  p.alpha = p.normal.dot(p.field_a);
  p.beta = p.normal.dot(p.field_b);
  return p;
}

SurfaceClassification classify_surface(const PiecewiseField& f, const Vec& x, std::size_t i, double tol) {
  tol = resolve_tol(tol, x);
  SurfaceClassification c;
  c.active_surfaces = {i};
  const SurfacePair p = adjacent_fields(f, x, i);
  c.alpha = p.alpha;
  c.beta = p.beta;
  c.cell_a = p.cell_a;
  c.cell_b = p.cell_b;
  const double rate_tol = tol * std::max(1.0, p.normal.norm());
  if (std::abs(p.alpha) <= rate_tol || std::abs(p.beta) <= rate_tol) c.kind = SurfaceKind::Tangent;
  else if (p.alpha * p.beta > 0) c.kind = SurfaceKind::Crossing;
  else if (p.alpha > 0) c.kind = SurfaceKind::Sliding;
  else c.kind = SurfaceKind::Repulsive;
  c.witness = Polytope::hull({p.field_a, p.field_b}).deduplicated();
  return c;
}

SurfaceClassification classify_point(const PiecewiseField& f, const Vec& x, double tol) {
  require_dim(x.size(), f.dim(), "classify_point");
  tol = resolve_tol(tol, x);
  const auto active = f.active_surfaces(x, tol);
  if (active.empty()) {
    SurfaceClassification c;
    c.kind = SurfaceKind::Continuity;
    c.witness = filippov_set(f, x, tol);
    return c;
  }
  if (active.size() == 1) return classify_surface(f, x, active.front(), tol);
  for (auto i : active) {
    if (f.switch_gradient(i, x).norm() <= 1e-12) {
      throw DegenerateSurfaceError("switching function " + std::to_string(i + 1) +
                                   " has vanishing gradient at the point");
    }
  }
  SurfaceClassification c;
  c.kind = SurfaceKind::Tangent;
  c.active_surfaces = active;
  c.witness = filippov_set(f, x, tol);
  return c;
}

SlidingVector sliding_field(const PiecewiseField& f, const Vec& x, std::size_t i, double tol) {
  tol = resolve_tol(tol, x);
  const SurfacePair p = adjacent_fields(f, x, i);
  const double rate_tol = tol * std::max(1.0, p.normal.norm());
  SlidingVector out;
  if (std::abs(p.alpha - p.beta) <= rate_tol) {
    if (std::abs(p.alpha) > rate_tol) {
      throw NotSlidingError("both sides cross the surface at the same rate; no tangent combination");
    }
    out.lambda = 0.5;
    out.velocity = 0.5 * (p.field_a + p.field_b);
    return out;
  }
  const double lambda = p.beta / (p.beta - p.alpha);
  if (lambda < -1e-12 || lambda > 1.0 + 1e-12) {
    throw NotSlidingError("no convex combination of the adjacent fields is tangent to surface " +
                          std::to_string(i + 1));
  }
  out.lambda = std::min(1.0, std::max(0.0, lambda));
  out.velocity = out.lambda * p.field_a + (1.0 - out.lambda) * p.field_b;
  // Remove the rounding residue along the normal.
  out.velocity -= (p.normal.dot(out.velocity) / p.normal.squaredNorm()) * p.normal;
  return out;
}

Polytope control_inclusion(const ControlField& c, const Vec& x) {
  require_dim(x.size(), c.dim, "control_inclusion");
  if (!c.affine_in_control) {
    throw UnsupportedError("control_inclusion requires dynamics affine in the control");
  }
  if (c.control_set.is_empty()) throw EmptySetError("control set is empty");
  std::vector<Vec> out;
  for (const auto& u : c.control_set.vertices()) out.push_back(c.dynamics(x, u));
  return Polytope::hull(std::move(out)).deduplicated();
}

LipschitzVerdict one_sided_lipschitz_test(const PiecewiseField& f, const Vec& x, double eps,
                                          double lipschitz, int samples, std::uint64_t seed,
                                          double tol) {
  if (samples < 2) throw ModelError("one_sided_lipschitz_test needs at least two samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto draw = [&]() -> std::optional<Vec> {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      Vec y(f.dim());
      for (int k = 0; k < f.dim(); ++k) y(k) = unit(rng);
      if (y.norm() > 1.0) continue;
      y = x + eps * y;
      if (f.active_surfaces(y, PiecewiseField::default_tol(y)).empty()) return y;
    }
    return std::nullopt;
  };
  LipschitzVerdict verdict;
  for (int s = 0; s < samples; ++s) {
    auto y = draw();
    auto yp = draw();
    if (!y || !yp) continue;
    const Vec diff = *y - *yp;
    const double lhs = (f.require_cell(f.signs(*y), *y) - f.require_cell(f.signs(*yp), *yp)).dot(diff);
    const double rhs = lipschitz * diff.squaredNorm();
    if (lhs > rhs + tol) {
      verdict.violated = true;
      verdict.y = *y;
      verdict.y_prime = *yp;
      verdict.lhs = lhs;
      verdict.rhs = rhs;
      return verdict;
    }
  }
  return verdict;
}

std::vector<TransversalityVerdict> transversality_test(const PiecewiseField& f,
                                                       const std::vector<Vec>& points, double tol) {
  std::vector<TransversalityVerdict> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    const double t = resolve_tol(tol, x);
    const auto active = f.active_surfaces(x, t);
    TransversalityVerdict v;
    if (active.size() != 1) {
      v.kind = active.empty() ? SurfaceKind::Continuity : SurfaceKind::Tangent;
      v.holds = false;
      out.push_back(v);
      continue;
    }
    const auto c = classify_surface(f, x, active.front(), t);
    v.kind = c.kind;
    v.alpha = c.alpha;
    v.beta = c.beta;
    v.holds = c.alpha > t || c.beta < -t;
    out.push_back(v);
  }
  return out;
}

PiecewiseField matrix_product(const std::function<Mat(const Vec&)>& z, const PiecewiseField& f) {
  const int out_dim = static_cast<int>(z(Vec::Zero(f.dim())).rows());
  return PiecewiseField(
      f.dim(), f.switches(),
      [z, f](const SignVector& s, const Vec& x) -> std::optional<Vec> {
        auto v = f.cell_value(s, x);
        if (!v) return std::nullopt;
        return Vec(z(x) * *v);
      },
      f.name() + "*Z", out_dim);
}

namespace {

PiecewiseField combine(const PiecewiseField& a, const PiecewiseField& b, bool stack) {
  require_dim(b.dim(), a.dim(), "field combination");
  if (!stack) require_dim(b.out_dim(), a.out_dim(), "field_sum");
  std::vector<SmoothScalar> switches = a.switches();
  switches.insert(switches.end(), b.switches().begin(), b.switches().end());
  const std::size_t ma = a.surface_count();
  return PiecewiseField(
      a.dim(), std::move(switches),
      [a, b, ma, stack](const SignVector& s, const Vec& x) -> std::optional<Vec> {
        SignVector sa(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(ma));
        SignVector sb(s.begin() + static_cast<std::ptrdiff_t>(ma), s.end());
        auto va = a.cell_value(sa, x);
        auto vb = b.cell_value(sb, x);
        if (!va || !vb) return std::nullopt;
        if (!stack) return Vec(*va + *vb);
        Vec out(va->size() + vb->size());
        out << *va, *vb;
        return out;
      },
      a.name() + (stack ? "|" : "+") + b.name(), stack ? a.out_dim() + b.out_dim() : a.out_dim());
}

}  // namespace

PiecewiseField field_sum(const PiecewiseField& a, const PiecewiseField& b) { return combine(a, b, false); }
PiecewiseField field_stack(const PiecewiseField& a, const PiecewiseField& b) { return combine(a, b, true); }

}  // namespace nsds
