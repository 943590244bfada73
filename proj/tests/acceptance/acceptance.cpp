// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "nsds/cli.hpp"
#include "nsds/io.hpp"
#include "nsds/scenarios.hpp"
#include "support/oracles.hpp"

using namespace nsds;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

/// Collects failed checks with a short reason each.
struct Checker {
  std::vector<std::string> failures;
  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Json cli_json(std::vector<std::string> args, Checker& c) {
  args.insert(args.begin(), "nsds");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  c.require(code == 0, "exit code " + std::to_string(code) + " for " + args[1] + ": " + err.str());
  if (code != 0) return Json::object();
  return Json::parse(out.str());
}

double box_hausdorff_1e(const Polytope& p, const Polytope& q) { return hausdorff_distance(p, q); }

// 1
void filippov_closed_forms(Checker& c) {
  const auto polytope_at = [&](std::vector<std::string> extra, const std::string& scenario, const std::string& point) {
    std::vector<std::string> args = {"filippov-set", "--scenario", scenario, "--point", point};
    args.insert(args.end(), extra.begin(), extra.end());
    const Json j = cli_json(args, c);
    return j.is_object() && j.contains("vertices") ? polytope_from_json(j) : Polytope::empty(1);
  };
  // ẋ = −sign(x) is the brick with θ = 0, ν = 1, g = 1.
  const std::vector<std::string> sign = {"--const", "theta_deg=0", "--const", "nu=1", "--const", "g=1"};
  const double d0 = box_hausdorff_1e(polytope_at(sign, "brick", "0"), Polytope::interval(-1, 1));
  const double dp = box_hausdorff_1e(polytope_at(sign, "brick", "0.5"), Polytope::interval(-1, -1));
  const double dn = box_hausdorff_1e(polytope_at(sign, "brick", "-0.5"), Polytope::interval(1, 1));
  c.require(d0 <= 1e-9 && dp <= 1e-9 && dn <= 1e-9, "sign field sets off by " + fmt(std::max({d0, dp, dn})));

  const Polytope square = Polytope::hull({vec({1, 0}), vec({0, 1}), vec({-1, 0}), vec({0, -1})});
  const double ds = hausdorff_distance(polytope_at({}, "move_away_1", "0,0"), square);
  c.require(ds <= 1e-9, "move-away set at the origin off by " + fmt(ds));
  const double dd = hausdorff_distance(polytope_at({}, "move_away_1", "0.5,0.5"), Polytope::segment(vec({-1, 0}), vec({0, -1})));
  c.require(dd <= 1e-9, "move-away set on the diagonal off by " + fmt(dd));

  const double th = std::numbers::pi / 6;
  const Polytope brick = Polytope::interval(9.8 * (std::sin(th) - std::cos(th)), 9.8 * (std::sin(th) + std::cos(th)));
  const double db = hausdorff_distance(polytope_at({}, "brick", "0"), brick);
  c.require(db <= 1e-9, "brick set at v = 0 off by " + fmt(db));
}

// 2
void sliding_reproduction(Checker& c) {
  const BuiltScenario s = build_scenario("move_away_1");
  for (double a : {0.3, 0.7, -0.5}) {
    const Trajectory tr = s.simulate(vec({a, a}), 2.0);
    const double stop = 2.0 * std::abs(a);
    double err = 0.0;
    double after = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const double t = tr.times[k];
      if (t <= stop) {
        const double w = a - 0.5 * (a > 0 ? 1.0 : -1.0) * t;
        err = std::max(err, (tr.states[k] - vec({w, w})).lpNorm<Eigen::Infinity>());
      } else {
        after = std::max(after, tr.states[k].norm());
      }
    }
    c.require(err <= 1e-4, "a = " + fmt(a) + ": sup error " + fmt(err));
    c.require(after <= 1e-6, "a = " + fmt(a) + ": ‖x‖ after the stop " + fmt(after));
  }
}

// 3
void brick_stopping(Checker& c) {
  const Trajectory tr = build_scenario("brick").simulate(vec({1.0}), 1.0);
  std::optional<double> stop;
  for (std::size_t k = 0; k < tr.size() && !stop; ++k) {
    if (std::abs(tr.states[k](0)) <= 1e-8) stop = tr.times[k];
  }
  c.require(stop && std::abs(*stop - 0.27879) <= 1e-3, "stop time " + (stop ? fmt(*stop) : std::string("none")));
  double later = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    if (stop && tr.times[k] >= *stop) later = std::max(later, std::abs(tr.states[k](0)));
  }
  c.require(later <= 1e-8, "|v| after the stop " + fmt(later));

  const Trajectory slip = build_scenario("brick", {{"nu", 0.3}}).simulate(vec({1.0}), 2.0);
  bool monotone = true;
  double lowest = 1.0;
  for (std::size_t k = 1; k < slip.size(); ++k) {
    monotone = monotone && slip.states[k](0) > slip.states[k - 1](0);
    lowest = std::min(lowest, slip.states[k](0));
  }
  c.require(monotone && lowest > 0, "nu = 0.3 run is not strictly growing");
  c.require(!slip.has_event(EventKind::Converged), "nu = 0.3 run stopped");
}

// 4
void oscillator(Checker& c) {
  const auto energy = [](const Vec& x) { return std::abs(x(0)) + 0.5 * x(1) * x(1); };
  const Trajectory tr = build_scenario("oscillator").simulate(vec({1.0, 0.0}), 20.0);
  double drift = 0.0;
  for (const auto& x : tr.states) drift = std::max(drift, std::abs(energy(x) - 1.0));
  c.require(drift <= 1e-4, "energy drift " + fmt(drift));

  const Json r = cli_json({"lyapunov", "--scenario", "oscillator", "--function", "energy_oscillator", "--theorem",
                           "thm1", "--grid", "-1:1:101,-1:1:101"},
                          c);
  c.require(r.value("verdict", "") == "Certified" && r.value("checked_points", 0) == 10201,
            "thm1 verdict " + r.value("verdict", std::string("missing")));

  const Trajectory diss = build_scenario("oscillator_dissipative", {{"k", 0.75}}).simulate(vec({1.0, 0.0}), 40.0);
  const double end = diss.state_at(40.0).norm();
  c.require(end <= 1e-2, "dissipative ‖x(40)‖ = " + fmt(end));
}

// 5
void gradient_oracle(Checker& c) {
  oracle::Rng rng(5005);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = rng.integer(1, 3);
    const int m = rng.integer(1, 5);
    std::vector<Vec> a;
    std::vector<double> b;
    std::vector<NsFunction> pieces;
    for (int k = 0; k < m; ++k) {
      a.push_back(rng.vec(d, -2, 2));
      b.push_back(rng.uniform(-1, 1));
      pieces.push_back(NsFunction::affine(a.back(), b.back()));
    }
    const NsFunction f = m == 1 ? pieces.front() : NsFunction::max(pieces);
    for (int p = 0; p < 10; ++p) {
      // Pull a random point onto the set where a random subset of pieces tie.
      Vec x = rng.vec(d);
      const int s = rng.integer(1, std::min(m, d + 1));
      std::vector<int> idx(m);
      for (int k = 0; k < m; ++k) idx[k] = k;
      std::shuffle(idx.begin(), idx.end(), rng.engine);
      if (s > 1) {
        Mat rows(s - 1, d);
        Vec rhs(s - 1);
        for (int r = 1; r < s; ++r) {
          rows.row(r - 1) = (a[idx[r]] - a[idx[0]]).transpose();
          rhs(r - 1) = b[idx[0]] - b[idx[r]];
        }
        const Mat gram = rows * rows.transpose();
        x += rows.transpose() * gram.ldlt().solve(rhs - rows * x);
      }
      // Active-hull oracle.
      double top = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < m; ++k) top = std::max(top, a[k].dot(x) + b[k]);
      std::vector<Vec> active;
      for (int k = 0; k < m; ++k) {
        if (a[k].dot(x) + b[k] >= top - 1e-9) active.push_back(a[k]);
      }
      const double h = hausdorff_distance(generalized_gradient(f, x).polytope, Polytope::hull(active));
      worst = std::max(worst, h);
    }
  }
  c.require(worst <= 1e-8, "max-of-affine Hausdorff " + fmt(worst));

  // Smooth trees: singleton gradient against central differences.
  std::function<NsFunction(int, int)> tree = [&](int d, int depth) -> NsFunction {
    const int op = depth == 0 ? rng.integer(0, 1) : rng.integer(0, 5);
    switch (op) {
      case 0: return NsFunction::affine(rng.vec(d), rng.uniform(-1, 1));
      case 1: {
        const Mat r = Mat::NullaryExpr(d, d, [&] { return rng.uniform(-1, 1); });
        return NsFunction::quadratic(r.transpose() * r, rng.vec(d), rng.uniform(-1, 1));
      }
      case 2: return tree(d, depth - 1) + tree(d, depth - 1);
      case 3: return tree(d, depth - 1) * tree(d, depth - 1);
      case 4: return rng.uniform(-2, 2) * tree(d, depth - 1);
      default: {
        const Mat r = Mat::NullaryExpr(d, d, [&] { return rng.uniform(-1, 1); });
        const NsFunction den = NsFunction::quadratic(r.transpose() * r, Vec::Zero(d), 1.0);
        return tree(d, depth - 1) / den;
      }
    }
  };
  double fd_worst = 0.0;
  bool singletons = true;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = rng.integer(1, 3);
    const NsFunction f = tree(d, 3);
    for (int p = 0; p < 5; ++p) {
      const Vec x = rng.vec(d);
      const GradientResult g = generalized_gradient(f, x);
      singletons = singletons && g.polytope.size() == 1;
      Vec fd(d);
      for (int i = 0; i < d; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
        Vec xp = x;
        Vec xm = x;
        xp(i) += h;
        xm(i) -= h;
        fd(i) = (f(xp) - f(xm)) / (2 * h);
      }
      const Vec grad = least_norm(g.polytope);
      fd_worst = std::max(fd_worst, (grad - fd).norm() / std::max(1.0, fd.norm()));
    }
  }
  c.require(singletons, "a smooth tree gave a non-singleton gradient");
  c.require(fd_worst <= 1e-5, "smooth-tree finite-difference mismatch " + fmt(fd_worst));
}

// 6
void set_identity(Checker& c) {
  const NsFunction f = abs_sum_function(2);
  const PiecewiseField field = descent_field(f);
  const SetValuedMap neg = neg_gradient_map(f);
  oracle::Rng rng(606);
  std::vector<Vec> points = {vec({0, 0}),  vec({0, 0.5}),   vec({0, -0.7}), vec({0.3, 0}),
                             vec({-1, 0}), vec({1e-3, 0}),  vec({0, 1e-7}), vec({0.2, -0.4})};
  while (points.size() < 20) points.push_back(rng.vec(2));
  double worst = 0.0;
  for (const auto& x : points) {
    // −∂f is the box with [−1,1] on vanishing coordinates and −sign otherwise.
    std::vector<Vec> corners;
    for (int sx : {-1, 1}) {
      for (int sy : {-1, 1}) {
        corners.push_back(vec({x(0) == 0 ? double(sx) : (x(0) > 0 ? -1.0 : 1.0),
                               x(1) == 0 ? double(sy) : (x(1) > 0 ? -1.0 : 1.0)}));
      }
    }
    const Polytope want = Polytope::hull(corners).deduplicated();
    worst = std::max(worst, hausdorff_distance(filippov_set(field, x, 0.0), want));
    worst = std::max(worst, hausdorff_distance(neg(x), want));
  }
  c.require(worst <= 1e-6, "F[−LN ∂f] vs −∂f Hausdorff " + fmt(worst));
}

// 7
void consensus(Checker& c) {
  const Graph g = Graph::parse("1-2,2-3");
  const Vec p0 = vec({0, 1, 5});
  for (const auto& [variant, value] : {std::pair{ConsensusVariant::Sign, 2.5}, std::pair{ConsensusVariant::Norm, 2.0}}) {
    const auto t0 = std::chrono::steady_clock::now();
    const ConsensusResult r = consensus_flow(g, variant, p0, 10.0, {}, 1e-3);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string name = to_string(variant);
    c.require(r.consensus_time && *r.consensus_time <= 10.0, name + ": spread never reached 1e-3");
    c.require(r.consensus_value && std::abs(*r.consensus_value - value) <= 1e-3,
              name + ": value " + (r.consensus_value ? fmt(*r.consensus_value) : std::string("none")));
    c.require(secs < 5.0, name + ": took " + fmt(secs) + " s");
  }
}

// 8
void smq_flow(Checker& c) {
  const BuiltScenario s = build_scenario("smq_flow");
  const auto sm = [](const Vec& x) { return std::min(1 - std::abs(x(0)), 1 - std::abs(x(1))); };
  oracle::Rng rng(808);
  for (int run = 0; run < 10; ++run) {
    const Vec x0 = rng.vec(2, -0.95, 0.95);
    const Trajectory tr = s.simulate(x0, 3.0);
    std::optional<double> reached;
    double worst_drop = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      if (!reached && tr.states[k].norm() <= 1e-3) reached = tr.times[k];
      if (k > 0) worst_drop = std::max(worst_drop, sm(tr.states[k - 1]) - sm(tr.states[k]));
    }
    c.require(reached.has_value() && tr.final_state().norm() <= 1e-3, "start " + fmt(x0(0)) + "," + fmt(x0(1)) + " did not converge");
    c.require(worst_drop <= 1e-6, "sm_Q decreased by " + fmt(worst_drop));
  }
}

// 9
void sphere_packing(Checker& c) {
  const BuiltScenario s = build_scenario("sphere_packing");
  const int n = s.agents->agents;
  const auto h_sp = [n](const Vec& p) {
    double h = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double x = p(2 * i);
      const double y = p(2 * i + 1);
      h = std::min({h, x, 1 - x, y, 1 - y});
      for (int j = i + 1; j < n; ++j) h = std::min(h, 0.5 * (p.segment<2>(2 * i) - p.segment<2>(2 * j)).norm());
    }
    return h;
  };
  const Vec p0 = seeded_agent_positions(s.agents->polygon, n, 1);
  const Trajectory tr = s.simulate(p0, 5.0);
  double drop = 0.0;
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < tr.size(); ++k) {
    drop = std::max(drop, h_sp(tr.states[k - 1]) - h_sp(tr.states[k]));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double now = (tr.states[k].segment<2>(2 * i) - tr.states[k].segment<2>(2 * j)).norm();
        const double start = (p0.segment<2>(2 * i) - p0.segment<2>(2 * j)).norm();
        closest = std::min(closest, now - start);
      }
    }
  }
  c.require(drop <= 1e-6, "H_SP decreased by " + fmt(drop));
  c.require(tr.has_event(EventKind::Converged), "stall window never triggered");
  c.require(closest >= -1e-6, "a pair distance fell below its start by " + fmt(-closest));
}

// 10
void cart(Checker& c) {
  const Json r = cli_json({"lyapunov", "--scenario", "cart", "--theorem", "prop13w", "--grid",
                           "-1:1:101,-1:1:101;exclude=1:0:1e-6"},
                          c);
  c.require(r.value("verdict", "") == "Certified", "prop13w verdict " + r.value("verdict", std::string("missing")));

  const BuiltScenario s = build_scenario("cart");
  const SetValuedMap F = s.inclusion();
  oracle::Rng rng(1010);
  double worst = 0.0;
  for (int p = 0; p < 20; ++p) {
    Vec x = rng.vec(2);
    if (std::abs(x(0)) < 1e-3) x(0) = 0.5;
    const double rr = x.norm();
    const double closed = -rr * rr * rr / (rr + std::abs(x(0)));
    const LieBounds b = lower_upper_lie(F(x), proximal_subdifferential(s.lyapunov, x));
    worst = std::max(worst, std::abs(b.lower.sup() - closed));
  }
  c.require(worst <= 1e-8, "lower Lie values off by " + fmt(worst));

  const PartitionSchedule pi = PartitionSchedule::with_diameter(0.0, 30.0, 1e-3);
  IntegratorConfig cfg;
  cfg.dt_max = pi.diameter;
  const Trajectory tr = sample_and_hold(*s.control, *s.feedback, pi, vec({0.6, 0.3}), cfg);
  const auto f = [](const Vec& x) {
    const double rr = x.norm();
    return rr == 0 ? 0.0 : rr * rr / (rr + std::abs(x(0)));
  };
  double rise = 0.0;
  bool reached = false;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    reached = reached || tr.states[k].norm() <= 0.05;
    if (k > 0) rise = std::max(rise, f(tr.states[k]) - f(tr.states[k - 1]));
  }
  c.require(pi.diameter <= 1e-3, "partition diameter " + fmt(pi.diameter));
  c.require(reached, "sample-and-hold run never reached ‖x‖ ≤ 0.05");
  c.require(rise <= 1e-6, "f increased by " + fmt(rise));
}

// 11
void sample_hold_arithmetic(Checker& c) {
  ControlField lin;
  lin.dim = 1;
  lin.control_dim = 1;
  lin.dynamics = [](const Vec&, const Vec& u) { return u; };
  lin.control_set = Polytope::interval(-10, 10);
  const Trajectory tr =
      sample_and_hold(lin, [](double, const Vec& x) { return x; }, PartitionSchedule::uniform(0, 1, 4), vec({1.0}));
  const double err = std::abs(tr.final_state()(0) - 2.44140625);
  c.require(tr.final_time() == 1.0 && err <= 1e-9, "x(1) off by " + fmt(err));
}

// 12
void maximin_vs_grid(Checker& c) {
  oracle::Rng rng(1212);
  double worst = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const int d = rng.integer(1, 3);
    const Polytope a = rng.polytope(d, rng.integer(1, 6));
    const Polytope b = rng.polytope(d, rng.integer(1, 6));
    worst = std::max(worst, std::abs(maximin_value(a, b) - oracle::grid_maximin(a, b, 200)));
  }
  c.require(worst <= 1e-4, "LP vs grid gap " + fmt(worst));
}

}  // namespace

int main() {
  const std::vector<std::tuple<int, std::string, double, std::function<void(Checker&)>>> criteria = {
      {1, "Filippov sets match the closed forms", 1.0, filippov_closed_forms},
      {2, "diagonal sliding of the move-away law", 5.0, sliding_reproduction},
      {3, "brick stopping time and slip", 0.0, brick_stopping},
      {4, "oscillator conservation and stability", 0.0, oscillator},
      {5, "generalized-gradient oracle", 10.0, gradient_oracle},
      {6, "descent-field set identity", 0.0, set_identity},
      {7, "finite-time consensus", 0.0, consensus},
      {8, "-sm_Q gradient flow reaches the incenter", 0.0, smq_flow},
      {9, "sphere packing invariants", 0.0, sphere_packing},
      {10, "cart Lie values and sample-and-hold", 60.0, cart},
      {11, "sample-and-hold arithmetic", 0.0, sample_hold_arithmetic},
      {12, "maximin LP vs grid search", 0.0, maximin_vs_grid},
  };
  int failed = 0;
  for (const auto& [id, name, budget, fn] : criteria) {
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget > 0 && secs >= budget) c.failures.push_back("runtime " + fmt(secs) + " s over " + fmt(budget) + " s");
    std::printf("criterion %2d: %s  %s (%.2f s)\n", id, c.failures.empty() ? "PASS" : "FAIL", name.c_str(), secs);
    for (const auto& f : c.failures) std::printf("    %s\n", f.c_str());
    failed += c.failures.empty() ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
