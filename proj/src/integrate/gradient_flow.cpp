#include <algorithm>
#include <cmath>
#include <memory>

#include "integrate/rk4.hpp"
#include "nsds/integrate.hpp"

namespace nsds {
namespace {

/// Mirror of an expression tree that numbers the kinks of f: one switching
/// function per abs node and one per pair of max/min operands. Given the signs
/// of all switching functions, the tree evaluates the smooth selection of f
/// active in that cell.
class Selection {
 public:
  explicit Selection(const NsFunction& f) {
    root_ = build(f.ptr(), [](const NsFunction& g) { return g; });
  }

  const std::vector<NsFunction>& switches() const { return switches_; }

  struct Value {
    double value = 0.0;
    Vec grad;
  };

  /// Selection value and gradient, or nullopt for sign patterns that no
  /// ordering of the max/min operands realizes.
  std::optional<Value> eval(const Vec& x, const SignVector& s) const { return eval(root_, x, s); }

 private:
  using Lift = std::function<NsFunction(const NsFunction&)>;

  struct Node {
    const NsNode* node = nullptr;
    std::vector<Node> kids;
    std::size_t first = 0;
  };

  static std::size_t pair_index(std::size_t m, std::size_t i, std::size_t j) {
    return i * m - i * (i + 1) / 2 + (j - i - 1);
  }

  Node build(const std::shared_ptr<const NsNode>& p, const Lift& lift) {
    Node n;
    n.node = p.get();
    switch (p->kind) {
      case NsKind::Abs:
        n.first = switches_.size();
        switches_.push_back(lift(NsFunction(p->children[0])));
        n.kids.push_back(build(p->children[0], lift));
        return n;
      case NsKind::Max:
      case NsKind::Min: {
        n.first = switches_.size();
        const auto& c = p->children;
        for (std::size_t i = 0; i < c.size(); ++i) {
          for (std::size_t j = i + 1; j < c.size(); ++j) switches_.push_back(lift(NsFunction(c[i]) - NsFunction(c[j])));
        }
        for (const auto& child : c) n.kids.push_back(build(child, lift));
        return n;
      }
      case NsKind::Compose: {
        std::vector<NsFunction> inner;
        for (std::size_t k = 1; k < p->children.size(); ++k) inner.emplace_back(p->children[k]);
        const Lift outer_lift = [lift, inner](const NsFunction& g) { return lift(NsFunction::compose(g, inner)); };
        n.kids.push_back(build(p->children[0], outer_lift));
        for (std::size_t k = 1; k < p->children.size(); ++k) n.kids.push_back(build(p->children[k], lift));
        return n;
      }
      default:
        for (const auto& child : p->children) n.kids.push_back(build(child, lift));
        return n;
    }
  }

  std::optional<Value> eval(const Node& n, const Vec& x, const SignVector& s) const {
    const NsNode& node = *n.node;
    std::vector<Value> kids;
    const bool compose = node.kind == NsKind::Compose;
    for (std::size_t k = compose ? 1 : 0; k < n.kids.size(); ++k) {
      auto v = eval(n.kids[k], x, s);
      if (!v) return std::nullopt;
      kids.push_back(std::move(*v));
    }
    switch (node.kind) {
      case NsKind::Atom: return Value{node.value(x), node.gradient(x)};
      case NsKind::Dilation: return Value{node.scale * kids[0].value, node.scale * kids[0].grad};
      case NsKind::Annotated: return kids[0];
      case NsKind::Sum: {
        Value out{0.0, Vec::Zero(x.size())};
        for (const auto& k : kids) {
          out.value += k.value;
          out.grad += k.grad;
        }
        return out;
      }
      case NsKind::Product:
        return Value{kids[0].value * kids[1].value, kids[0].value * kids[1].grad + kids[1].value * kids[0].grad};
      case NsKind::Quotient: {
        const double b = kids[1].value;
        if (b == 0.0) throw SingularityError("selection quotient with zero denominator");
        return Value{kids[0].value / b, (kids[0].grad * b - kids[0].value * kids[1].grad) / (b * b)};
      }
      case NsKind::Abs: {
        const double sign = s[n.first];
        return Value{sign * kids[0].value, sign * kids[0].grad};
      }
      case NsKind::Max:
      case NsKind::Min: {
        const std::size_t m = kids.size();
        // Max: the operand that beats every other; min: the one beaten by all.
        const int want = node.kind == NsKind::Max ? 1 : -1;
        for (std::size_t i = 0; i < m; ++i) {
          bool wins = true;
          for (std::size_t j = 0; j < m && wins; ++j) {
            if (j == i) continue;
            const int sij = i < j ? s[n.first + pair_index(m, i, j)] : -s[n.first + pair_index(m, j, i)];
            wins = sij == want;
          }
          if (wins) return kids[i];
        }
        return std::nullopt;
      }
      case NsKind::Norm: {
        const Vec v = node.a * x + node.b;
        const double r = v.norm();
        if (r == 0.0) throw UnsupportedError("norm selection at a zero argument");
        return Value{r, node.a.transpose() * v / r};
      }
      case NsKind::Compose: {
        Vec y(static_cast<Eigen::Index>(kids.size()));
        for (std::size_t k = 0; k < kids.size(); ++k) y(static_cast<Eigen::Index>(k)) = kids[k].value;
        const auto outer = eval(n.kids[0], y, s);
        if (!outer) return std::nullopt;
        Vec g = Vec::Zero(x.size());
        for (std::size_t k = 0; k < kids.size(); ++k) g += outer->grad(static_cast<Eigen::Index>(k)) * kids[k].grad;
        return Value{outer->value, g};
      }
    }
    return std::nullopt;
  }

  Node root_;
  std::vector<NsFunction> switches_;
};

Vec gradient_element(const NsFunction& f, const Vec& x) { return least_norm(generalized_gradient(f, x).polytope); }

SmoothScalar switch_scalar(const NsFunction& g) {
  return {[g](const Vec& x) { return g(x); }, [g](const Vec& x) { return gradient_element(g, x); }};
}

Trajectory normalized_flow(const NsFunction& f, const Vec& x0, double t_end, const IntegratorConfig& cfg) {
  cfg.validate();
  require_dim(x0.size(), f.dim(), "gradient_flow");
  const auto field = [&](const Vec& y) -> Vec {
    const Vec g = gradient_element(f, y);
    const double n = g.norm();
    return n > 0 ? Vec(-g / n) : Vec::Zero(y.size());
  };
  const auto critical = [&](const Vec& y) {
    return gradient_element(f, y).norm() <= 1e-10 * (1.0 + std::abs(f(y)));
  };
  Trajectory tr;
  double t = 0.0;
  Vec x = x0;
  tr.push(t, x, Mode::regular({}));
  bool stopped = false;
  int tiny = 0;
  long steps = 0;
  const auto finish = [&](const std::string& why) {
    stopped = true;
    tr.modes.back() = Mode::stopped();
    tr.add_event(EventKind::Converged, why);
  };
  if (critical(x)) finish("critical point");
  while (t_end - t > 1e-12 * std::max(1.0, t_end)) {
    if (++steps > cfg.max_steps) {
      tr.add_event(EventKind::StepLimit, "max_steps " + std::to_string(cfg.max_steps));
      break;
    }
    double h = std::min(cfg.dt_max, t_end - t);
    if (t_end - (t + h) <= 1e-12 * std::max(1.0, t_end)) h = t_end - t;
    if (stopped) {
      t = t + h >= t_end ? t_end : t + h;
      tr.push(t, x, Mode::stopped());
      continue;
    }
    const Vec g0 = gradient_element(f, x);
    // The flow stops on the critical set; a reversed gradient at any stage
    // point or at the end means the step passed it.
    const auto ahead = [&](const Vec& z) { return gradient_element(f, z).dot(g0) > 0; };
    const auto reversed = [&](double hh) {
      const Vec k1 = field(x);
      const Vec z2 = x + 0.5 * hh * k1;
      if (!ahead(z2)) return true;
      const Vec k2 = field(z2);
      const Vec z3 = x + 0.5 * hh * k2;
      if (!ahead(z3)) return true;
      const Vec z4 = x + hh * field(z3);
      if (!ahead(z4)) return true;
      return !ahead(rk4_step(field, x, hh));
    };
    Vec y = rk4_step(field, x, h);
    if (reversed(h)) {
      double lo = 0.0;
      double hi = h;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, t); ++it) {
        const double mid = 0.5 * (lo + hi);
        (reversed(mid) ? hi : lo) = mid;
      }
      // Of the bracket ends, keep the one closer to criticality.
      const Vec y_lo = rk4_step(field, x, lo);
      const Vec y_hi = rk4_step(field, x, hi);
      const bool use_hi = gradient_element(f, y_hi).norm() < gradient_element(f, y_lo).norm();
      h = use_hi ? hi : lo;
      y = use_hi ? y_hi : y_lo;
      tiny = h < 1e-13 ? tiny + 1 : 0;
    }
    if (h > 0 && t + h > t) {
      t += h;
      x = y;
      tr.push(t, x, Mode::regular({}));
    } else {
      x = y;
      tr.states.back() = y;
    }
    if (critical(x)) finish("critical point");
    else if (tiny > 50) finish("no progress toward the critical set");
  }
  return tr;
}

}  // namespace

PiecewiseField descent_field(const NsFunction& f) {
  auto sel = std::make_shared<Selection>(f);
  std::vector<SmoothScalar> switches;
  for (const auto& g : sel->switches()) switches.push_back(switch_scalar(g));
  return PiecewiseField(
      f.dim(), std::move(switches),
      [sel](const SignVector& s, const Vec& x) -> std::optional<Vec> {
        auto v = sel->eval(x, s);
        if (!v) return std::nullopt;
        return Vec(-v->grad);
      },
      "descent(" + f.label() + ")");
}

PiecewiseField signed_descent_field(const NsFunction& f) {
  const int d = f.dim();
  std::vector<SmoothScalar> switches;
  for (int k = 0; k < d; ++k) {
    switches.push_back({[f, k](const Vec& x) { return gradient_element(f, x)(k); },
                        [f, k](const Vec& x) { return Vec(hessian(f, x).row(k).transpose()); }});
  }
  return PiecewiseField(
      d, std::move(switches),
      [d](const SignVector& s, const Vec&) -> std::optional<Vec> {
        Vec v(d);
        for (int k = 0; k < d; ++k) v(k) = -s[static_cast<std::size_t>(k)];
        return v;
      },
      "signed_descent(" + f.label() + ")");
}

Trajectory gradient_flow(const NsFunction& f, FlowVariant variant, const Vec& x0, double t_end,
                         const IntegratorConfig& cfg) {
  switch (variant) {
    case FlowVariant::Natural: return integrate_filippov(descent_field(f), x0, t_end, cfg);
    case FlowVariant::Signed: return integrate_filippov(signed_descent_field(f), x0, t_end, cfg);
    case FlowVariant::Normalized: return normalized_flow(f, x0, t_end, cfg);
  }
  return {};
}

ConsensusResult consensus_flow(const Graph& g, ConsensusVariant variant, const Vec& p0, double t_end,
                               const IntegratorConfig& cfg, double spread_tol) {
  require_dim(p0.size(), g.n, "consensus_flow");
  const NsFunction phi = disagreement_function(g);
  const FlowVariant fv = variant == ConsensusVariant::Sign   ? FlowVariant::Signed
                         : variant == ConsensusVariant::Norm ? FlowVariant::Normalized
                                                             : FlowVariant::Natural;
  ConsensusResult r;
  r.trajectory = gradient_flow(phi, fv, p0, t_end, cfg);
  const auto spread = [](const Vec& p) { return p.maxCoeff() - p.minCoeff(); };
  for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
    if (spread(r.trajectory.states[k]) <= spread_tol) {
      r.consensus_time = r.trajectory.times[k];
      break;
    }
  }
  r.final_spread = spread(r.trajectory.final_state());
  if (r.final_spread <= spread_tol) r.consensus_value = r.trajectory.final_state().mean();
  return r;
}

}  // namespace nsds
