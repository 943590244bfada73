#include "nsds/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace nsds {
namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec v1(double a) { return Vec::Constant(1, a); }

PiecewiseField brick_field(double theta, double nu, double g) {
  const double down = g * (std::sin(theta) + nu * std::cos(theta));
  const double up = g * (std::sin(theta) - nu * std::cos(theta));
  return PiecewiseField(1, {affine_scalar(v1(1.0), 0.0)},
                        std::map<SignVector, VectorField>{{{-1}, [down](const Vec&) { return v1(down); }},
                                                          {{1}, [up](const Vec&) { return v1(up); }}},
                        "brick");
}

PiecewiseField oscillator_field(double k) {
  if (k == 0.0) {
    return PiecewiseField(2, {affine_scalar(v2(1, 0), 0.0)},
                          std::map<SignVector, VectorField>{{{-1}, [](const Vec& x) { return v2(x(1), 1.0); }},
                                                            {{1}, [](const Vec& x) { return v2(x(1), -1.0); }}},
                          "oscillator");
  }
  return PiecewiseField(
      2, {affine_scalar(v2(1, 0), 0.0), affine_scalar(v2(0, 1), 0.0)},
      [k](const SignVector& s, const Vec& x) -> std::optional<Vec> { return v2(x(1), -s[0] - k * s[1]); },
      "oscillator_dissipative");
}

/// Unit speed away from the nearest edge of [-a, a]²; the switching lines
/// are the diagonals, so the field does not depend on a.
PiecewiseField move_away_field() {
  return PiecewiseField(2, {affine_scalar(v2(-1, 1), 0.0), affine_scalar(v2(1, 1), 0.0)},
                        std::map<SignVector, VectorField>{{{-1, 1}, [](const Vec&) { return v2(-1, 0); }},
                                                          {{-1, -1}, [](const Vec&) { return v2(0, 1); }},
                                                          {{1, -1}, [](const Vec&) { return v2(1, 0); }},
                                                          {{1, 1}, [](const Vec&) { return v2(0, -1); }}},
                        "move_away_1");
}

ControlField cart_control(double sigma) {
  ControlField c;
  c.dim = 2;
  c.control_dim = 1;
  c.dynamics = [](const Vec& x, const Vec& u) { return Vec(v2(x(0) * x(0) - x(1) * x(1), 2 * x(0) * x(1)) * u(0)); };
  c.control_set = Polytope::interval(-sigma, sigma);
  c.affine_in_control = true;
  c.name = "cart";
  return c;
}

ControlField nonholonomic_control(double bound) {
  ControlField c;
  c.dim = 3;
  c.control_dim = 2;
  c.dynamics = [](const Vec& x, const Vec& u) {
    Vec v(3);
    v << u(0), u(1), x(0) * u(1) - x(1) * u(0);
    return v;
  };
  c.control_set = Polytope::hull({v2(-bound, -bound), v2(bound, -bound), v2(bound, bound), v2(-bound, bound)});
  c.affine_in_control = true;
  c.name = "nonholonomic_integrator";
  return c;
}

int count_constant(const Constants& c, const std::string& key, int lo) {
  const double v = c.at(key);
  if (v != std::floor(v) || v < lo) throw ModelError("constant " + key + " must be an integer ≥ " + std::to_string(lo));
  return static_cast<int>(v);
}

double positive_constant(const Constants& c, const std::string& key) {
  const double v = c.at(key);
  if (!(v > 0)) throw ModelError("constant " + key + " must be positive");
  return v;
}

}  // namespace

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Piecewise: return "piecewise";
    case ScenarioKind::Control: return "control";
    case ScenarioKind::Flow: return "flow";
    case ScenarioKind::Agents: return "agents";
  }
  return "piecewise";
}

const std::vector<Scenario>& scenario_catalog() {
  static const std::vector<Scenario> catalog = {
      {"brick", ScenarioKind::Piecewise, "brick sliding on an inclined plane with Coulomb friction, state v",
       {{"theta_deg", 30.0}, {"nu", 1.0}, {"g", 9.8}}, "abs", "Filippov example: friction on an incline"},
      {"oscillator", ScenarioKind::Piecewise, "x1' = x2, x2' = -sign(x1)", {}, "energy_oscillator",
       "nonsmooth harmonic oscillator"},
      {"oscillator_dissipative", ScenarioKind::Piecewise, "x1' = x2, x2' = -sign(x1) - k sign(x2)", {{"k", 0.75}},
       "energy_oscillator", "nonsmooth harmonic oscillator with dissipation"},
      {"move_away_1", ScenarioKind::Piecewise, "one agent moving away from the nearest edge of [-a,a]^2",
       {{"half_width", 1.0}}, "neg_smq", "move diametrically away from the nearest polygon edge"},
      {"move_away_n", ScenarioKind::Agents, "n agents moving away from their nearest neighbor or edge in [-a,a]^2",
       {{"n", 3.0}, {"half_width", 1.0}}, "neg_hsp", "multi-agent move-away law"},
      {"consensus", ScenarioKind::Flow, "signed gradient flow of the disagreement on a path graph", {{"n", 3.0}},
       "disagreement", "finite-time consensus"},
      {"cart", ScenarioKind::Control, "cart on a circle, |u| <= sigma, sample-and-hold u = -sigma sign(x1)",
       {{"sigma", 1.0}, {"diam", 1e-3}}, "cart_lyapunov", "cart on a circle"},
      {"nonholonomic_integrator", ScenarioKind::Control,
       "x1' = u1, x2' = u2, x3' = x1 u2 - x2 u1 under the constant input (u1, u2)",
       {{"bound", 1.0}, {"u1", 1.0}, {"u2", 0.0}, {"diam", 1e-2}}, "half_squared_norm",
       "nonholonomic integrator, not continuously stabilizable"},
      {"smq_flow", ScenarioKind::Flow, "natural gradient flow of -sm_Q on [-a,a]^2", {{"half_width", 1.0}},
       "neg_smq", "nonsmooth gradient flow to the incenter"},
      {"sphere_packing", ScenarioKind::Agents, "n agents maximizing H_SP in the unit square", {{"n", 5.0}}, "neg_hsp",
       "sphere packing by the move-away law"},
  };
  return catalog;
}

const Scenario& find_scenario(const std::string& name) {
  for (const auto& s : scenario_catalog()) {
    if (s.name == name) return s;
  }
  std::string known;
  for (const auto& s : scenario_catalog()) known += (known.empty() ? "" : ", ") + s.name;
  throw ModelError("unknown scenario '" + name + "' (known: " + known + ")");
}

Constants parse_constants(const std::vector<std::string>& items) {
  Constants out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ModelError("constant '" + item + "' is not of the form k=v");
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v)) {
      throw ModelError("constant '" + item + "' has no finite numeric value");
    }
    out[key] = v;
  }
  return out;
}

BuiltScenario build_scenario(const std::string& name, const Constants& overrides) {
  const Scenario& s = find_scenario(name);
  Constants c = s.defaults;
  for (const auto& [k, v] : overrides) {
    if (!c.count(k)) throw ModelError("scenario " + name + " has no constant '" + k + "'");
    c[k] = v;
  }
  BuiltScenario b;
  b.name = s.name;
  b.kind = s.kind;
  b.constants = c;

  if (name == "brick") {
    const double nu = c.at("nu");
    if (nu < 0) throw ModelError("friction coefficient nu must be nonnegative");
    b.field = brick_field(c.at("theta_deg") * std::numbers::pi / 180.0, nu, positive_constant(c, "g"));
    b.lyapunov = abs_function();
  } else if (name == "oscillator") {
    b.field = oscillator_field(0.0);
    b.lyapunov = energy_oscillator_function();
  } else if (name == "oscillator_dissipative") {
    b.field = oscillator_field(positive_constant(c, "k"));
    b.lyapunov = energy_oscillator_function();
  } else if (name == "move_away_1") {
    const double a = positive_constant(c, "half_width");
    b.field = move_away_field();
    b.lyapunov = neg_smq_function(Polygon::square(-a, a));
  } else if (name == "move_away_n" || name == "sphere_packing") {
    const int n = count_constant(c, "n", 1);
    const Polygon q = name == "sphere_packing"
                          ? Polygon::square(0, 1)
                          : Polygon::square(-positive_constant(c, "half_width"), positive_constant(c, "half_width"));
    b.agents = AgentSpec{q, n};
    b.lyapunov = NsFunction::dilation(-1.0, hsp_function(q, n));
  } else if (name == "consensus") {
    const Graph g = Graph::path(count_constant(c, "n", 2));
    b.flow = FlowSpec{disagreement_function(g), FlowVariant::Signed};
    b.lyapunov = disagreement_function(g);
  } else if (name == "cart") {
    const double sigma = positive_constant(c, "sigma");
    positive_constant(c, "diam");
    b.control = cart_control(sigma);
    b.feedback = [sigma](double, const Vec& x) { return v1(x(0) > 0 ? -sigma : sigma); };
    b.lyapunov = cart_lyapunov_function();
  } else if (name == "nonholonomic_integrator") {
    const double bound = positive_constant(c, "bound");
    positive_constant(c, "diam");
    const Vec u = v2(c.at("u1"), c.at("u2"));
    if (u.lpNorm<Eigen::Infinity>() > bound) throw ModelError("input (u1, u2) lies outside the control box");
    b.control = nonholonomic_control(bound);
    b.feedback = [u](double, const Vec&) { return u; };
    b.lyapunov = half_squared_norm(3);
  } else if (name == "smq_flow") {
    const double a = positive_constant(c, "half_width");
    b.flow = FlowSpec{neg_smq_function(Polygon::square(-a, a)), FlowVariant::Natural};
    b.lyapunov = b.flow->f;
  }

  if (b.field) b.dim = b.field->dim();
  if (b.control) b.dim = b.control->dim;
  if (b.flow) b.dim = b.flow->f.dim();
  if (b.agents) b.dim = 2 * b.agents->agents;
  b.equilibrium = Vec::Zero(b.dim);
  if (b.agents) {
    // No single equilibrium; the center of the polygon's box stands in.
    const Eigen::Vector2d mid = 0.5 * (b.agents->polygon.lower_corner() + b.agents->polygon.upper_corner());
    for (int i = 0; i < b.agents->agents; ++i) b.equilibrium.segment<2>(2 * i) = mid;
  }
  return b;
}

SetValuedMap BuiltScenario::inclusion() const {
  switch (kind) {
    case ScenarioKind::Piecewise: return filippov_map(*field);
    case ScenarioKind::Control: return control_map(*control);
    case ScenarioKind::Flow:
      switch (flow->variant) {
        case FlowVariant::Natural: return neg_gradient_map(flow->f);
        case FlowVariant::Normalized: return normalized_gradient_map(flow->f);
        case FlowVariant::Signed: return signed_gradient_map(flow->f);
      }
      break;
    case ScenarioKind::Agents: break;
  }
  throw UnsupportedError("scenario " + name + " has no set-valued map for Lie-derivative sweeps");
}

Trajectory BuiltScenario::simulate(const Vec& x0, double t_end, const IntegratorConfig& cfg) const {
  require_dim(x0.size(), dim, "scenario initial state");
  switch (kind) {
    case ScenarioKind::Piecewise: return integrate_filippov(*field, x0, t_end, cfg);
    case ScenarioKind::Flow: return gradient_flow(flow->f, flow->variant, x0, t_end, cfg);
    case ScenarioKind::Agents: return move_away_flow(agents->polygon, x0, t_end, cfg);
    case ScenarioKind::Control: {
      if (!feedback) throw ModelError("scenario " + name + " has no feedback");
      IntegratorConfig inner = cfg;
      inner.dt_max = std::min(cfg.dt_max, constants.at("diam"));
      return sample_and_hold(*control, *feedback, PartitionSchedule::with_diameter(0.0, t_end, constants.at("diam")),
                             x0, inner);
    }
  }
  return {};
}

Vec seeded_agent_positions(const Polygon& q, int n, std::uint64_t seed, double margin) {
  if (n < 1) throw ModelError("need at least one agent");
  std::mt19937_64 rng(seed);
  const Eigen::Vector2d lo = q.lower_corner();
  const Eigen::Vector2d hi = q.upper_corner();
  std::uniform_real_distribution<double> ux(lo.x(), hi.x());
  std::uniform_real_distribution<double> uy(lo.y(), hi.y());
  Vec p(2 * n);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (int i = 0; i < n; ++i) {
      Eigen::Vector2d x;
      do {
        x = {ux(rng), uy(rng)};
      } while (!q.contains(x));
      p.segment<2>(2 * i) = x;
    }
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      const Eigen::Vector2d pi = p.segment<2>(2 * i);
      std::vector<double> terms;
      for (std::size_t e = 0; e < q.size(); ++e) terms.push_back(q.segment_distance(e, pi));
      for (int j = 0; j < n; ++j) {
        if (j != i) terms.push_back(0.5 * (pi - Eigen::Vector2d(p.segment<2>(2 * j))).norm());
      }
      std::sort(terms.begin(), terms.end());
      ok = terms.front() >= margin && (terms.size() < 2 || terms[1] - terms[0] >= margin);
    }
    if (ok) return p;
  }
  throw ModelError("could not place " + std::to_string(n) + " agents off the switching set");
}

}  // namespace nsds
