#include <algorithm>
#include <cmath>

#include "integrate/rk4.hpp"
#include "nsds/integrate.hpp"

namespace nsds {
namespace {

std::string surface_list(const std::vector<std::size_t>& s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + std::to_string(s[k] + 1);
  return out;
}

class Engine {
 public:
  Engine(const PiecewiseField& f, const IntegratorConfig& cfg, bool filippov, double t_end)
      : f_(f), cfg_(cfg), filippov_(filippov), t_end_(t_end) {}

  Trajectory run(const Vec& x0, const std::optional<SignVector>& initial_cell) {
    cfg_.validate();
    require_dim(x0.size(), f_.dim(), "integrate");
    if (!(t_end_ > 0)) throw ModelError("t_end must be positive");
    x_ = x0;
    tr_.push(0.0, x_, Mode::regular(f_.signs(x_)));
    if (initial_cell) {
      if (initial_cell->size() != f_.surface_count()) throw DimensionMismatchError("initial cell has wrong length");
      mode_ = Mode::regular(*initial_cell);
      tr_.modes.back() = mode_;
    } else {
      decide();
    }
    int stuck = 0;
    while (!done_ && t_end_ - t_ > 1e-12 * std::max(1.0, t_end_)) {
      if (++steps_ > cfg_.max_steps) {
        tr_.add_event(EventKind::StepLimit, "max_steps " + std::to_string(cfg_.max_steps));
        break;
      }
      const double t_before = t_;
      switch (mode_.kind) {
        case Mode::Kind::Regular: regular_step(); break;
        case Mode::Kind::Sliding: ln_motion_ ? ln_step() : sliding_step(); break;
        case Mode::Kind::Stopped: accept(t_ + step_size(cfg_.dt_max), x_); break;
      }
      // Repeated events without progress: fall back to least-norm motion.
      stuck = t_ - t_before < 1e-13 ? stuck + 1 : 0;
      if (stuck > 100) {
        stuck = 0;
        if (!filippov_) {
          block("no progress at repeated events");
        } else {
          ln_motion_ = true;
          mode_ = Mode::sliding(f_.active_surfaces(x_, cfg_.surface_tol));
          ln_step();
        }
      }
    }
    return std::move(tr_);
  }

 private:
  double step_size(double h) const { return std::min(h, t_end_ - t_); }

  double g(std::size_t i, const Vec& y) const { return f_.switch_value(i, y); }

  void set_mode(Mode m) {
    mode_ = std::move(m);
    tr_.modes.back() = mode_;
  }

  void block(const std::string& why) {
    tr_.add_event(EventKind::Blocked, why);
    done_ = true;
  }

  /// Stores a sample. Points that do not advance time in floating point only
  /// replace the state of the last sample.
  void accept(double t_new, const Vec& x_new) {
    if (t_end_ - t_new <= 1e-12 * std::max(1.0, t_end_)) t_new = t_end_;
    if (!(t_new > tr_.times.back())) {
      x_ = x_new;
      tr_.states.back() = x_new;
      return;
    }
    const double dt = t_new - t_;
    const bool still = (x_new - x_).norm() <= cfg_.conv_tol * dt;
    t_ = t_new;
    x_ = x_new;
    tr_.push(t_, x_, mode_);
    if (mode_.kind == Mode::Kind::Stopped) return;
    stall_ = still ? stall_ + 1 : 0;
    if (stall_ >= cfg_.stall_window && !converged_) {
      converged_ = true;
      tr_.add_event(EventKind::Converged, "stall window");
      set_mode(Mode::stopped());
    }
  }

  /// Surface j counts as crossed from a start value g0 when the signed value
  /// passes below the band in the wrong direction; the band is the surface
  /// tolerance for surfaces the start point lies on.
  bool crossed(const SignVector& sigma, const std::vector<double>& g0, const Vec& y, std::size_t skip,
               std::vector<std::size_t>* which = nullptr) const {
    bool any = false;
    for (std::size_t j = 0; j < f_.surface_count(); ++j) {
      if (j == skip) continue;
      const double s0 = sigma[j] * g0[j];
      const double s = sigma[j] * g(j, y);
      const double band = std::abs(g0[j]) <= cfg_.surface_tol ? cfg_.surface_tol : 0.0;
      if (s < -band && s < s0) {
        any = true;
        if (which) which->push_back(j);
      }
    }
    return any;
  }

  std::vector<double> switch_values(const Vec& y) const {
    std::vector<double> v(f_.surface_count());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = g(j, y);
    return v;
  }

  /// Earliest h in (0, h_max] with bad(h); bad(h_max) must hold.
  template <class Bad>
  double bisect(double h_max, Bad&& bad) const {
    double lo = 0.0;
    double hi = h_max;
    const double floor = 1e-15 * std::max(1.0, std::abs(t_));
    for (int it = 0; it < 200 && hi - lo > floor; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (bad(mid)) hi = mid;
      else lo = mid;
      if (done_refining(hi)) break;
    }
    return hi;
  }

  // Set by the step routines so bisect can stop once the crossed switching
  // values are within event_refine_tol.
  std::function<bool(double)> refined_;
  bool done_refining(double h) const { return refined_ && refined_(h); }

  void regular_step() {
    const SignVector sigma = mode_.cell;
    const auto field = [&](const Vec& y) { return f_.require_cell(sigma, y); };
    const double h = step_size(cfg_.dt_max);
    const auto g0 = switch_values(x_);
    const auto none = f_.surface_count();
    Vec x1 = rk4_step(field, x_, h);
    if (!crossed(sigma, g0, x1, none)) {
      accept(t_ + h, x1);
      // A step that lands on a surface it did not start on is a hit too.
      bool landed = false;
      for (auto j : f_.active_surfaces(x_, cfg_.surface_tol)) landed = landed || std::abs(g0[j]) > cfg_.surface_tol;
      if (landed && mode_.kind == Mode::Kind::Regular) {
        tr_.add_event(EventKind::SurfaceHit, surface_list(f_.active_surfaces(x_, cfg_.surface_tol)));
        decide();
      }
      return;
    }
    refined_ = [&](double hh) {
      std::vector<std::size_t> which;
      const Vec y = rk4_step(field, x_, hh);
      crossed(sigma, g0, y, none, &which);
      for (auto j : which) {
        if (std::abs(g(j, y)) > cfg_.event_refine_tol + (std::abs(g0[j]) <= cfg_.surface_tol ? cfg_.surface_tol : 0.0)) {
          return false;
        }
      }
      return true;
    };
    const double hit = bisect(h, [&](double hh) { return crossed(sigma, g0, rk4_step(field, x_, hh), none); });
    refined_ = nullptr;
    const Vec y = rk4_step(field, x_, hit);
    // Surfaces detected beyond their band sit just outside surface_tol.
    std::vector<std::size_t> which;
    crossed(sigma, g0, y, none, &which);
    double tol = cfg_.surface_tol;
    for (auto j : which) tol = std::max(tol, std::abs(g(j, y)) * (1.0 + 1e-9));
    accept(t_ + hit, y);
    tr_.add_event(EventKind::SurfaceHit, surface_list(f_.active_surfaces(x_, tol)));
    decide(tol);
  }

  void project(std::size_t i, Vec& y) const {
    for (int k = 0; k < 10; ++k) {
      const double v = g(i, y);
      if (std::abs(v) <= 0.01 * cfg_.surface_tol) break;
      const Vec n = f_.switch_gradient(i, y);
      y -= v * n / n.squaredNorm();
    }
  }

  struct SlideCells {
    SignVector a;
    SignVector b;
  };

  static SlideCells slide_cells(const SignVector& sigma, std::size_t i) {
    SlideCells c{sigma, sigma};
    c.a[i] = -1;
    c.b[i] = 1;
    return c;
  }

  /// Tangent combination of the two cells adjacent across surface i, with the
  /// cells held fixed so that RK4 stages past other surfaces use the same
  /// continuous extensions.
  SlidingVector slide(const SlideCells& c, std::size_t i, const Vec& y) const {
    const Vec xa = f_.require_cell(c.a, y);
    const Vec xb = f_.require_cell(c.b, y);
    const Vec n = f_.switch_gradient(i, y);
    const double alpha = n.dot(xa);
    const double beta = n.dot(xb);
    const double rate_tol = cfg_.surface_tol * std::max(1.0, n.norm());
    SlidingVector out;
    if (std::abs(alpha - beta) <= rate_tol) {
      if (std::abs(alpha) > rate_tol) throw NotSlidingError("both sides cross the surface at the same rate");
      out.velocity = 0.5 * (xa + xb);
      return out;
    }
    out.lambda = beta / (beta - alpha);
    if (out.lambda < -1e-12 || out.lambda > 1.0 + 1e-12) throw NotSlidingError("no tangent combination");
    out.velocity = out.lambda * xa + (1.0 - out.lambda) * xb;
    return out;
  }

  void sliding_step() {
    const std::size_t i = mode_.surfaces.front();
    const SignVector sigma = f_.signs(x_);
    const auto g0 = switch_values(x_);
    const double margin = cfg_.sliding_exit_margin;
    const SlideCells cells = slide_cells(sigma, i);
    const auto field = [&](const Vec& y) { return slide(cells, i, y).velocity; };
    struct Probe {
      bool ok = false;
      Vec y;
      double lambda = 0.5;
    };
    const auto probe = [&](double hh) {
      Probe p;
      try {
        p.y = rk4_step(field, x_, hh);
        project(i, p.y);
        p.lambda = slide(cells, i, p.y).lambda;
        p.ok = true;
      } catch (const NotSlidingError&) {
        p.ok = false;
      }
      return p;
    };
    const auto bad = [&](const Probe& p) {
      return !p.ok || p.lambda < margin || p.lambda > 1.0 - margin || crossed(sigma, g0, p.y, i);
    };
    const double h = step_size(cfg_.dt_max);
    const Probe full = probe(h);
    if (!bad(full)) {
      accept(t_ + h, full.y);
      return;
    }
    double hit = bisect(h, [&](double hh) { return bad(probe(hh)); });
    Probe p = probe(hit);
    if (!p.ok) {
      // Fall back to the last good point below the bisection bracket.
      hit *= 1.0 - 1e-12;
      p = probe(hit);
      if (!p.ok) {
        p.y = x_;
        p.lambda = slide(cells, i, x_).lambda;
        hit = 0.0;
      }
    }
    accept(t_ + hit, p.y);
    if (crossed(sigma, g0, p.y, i)) {
      tr_.add_event(EventKind::SurfaceHit, surface_list(f_.active_surfaces(x_, cfg_.surface_tol)));
      decide();
      return;
    }
    tr_.add_event(EventKind::SlideExit, "surface " + std::to_string(i + 1));
    ln_motion_ = false;
    set_mode(Mode::regular(p.lambda <= 0.5 ? cells.b : cells.a));
  }

  void ln_step() {
    const Polytope fset = filippov_set(f_, x_, cfg_.surface_tol);
    const Vec v = least_norm(fset);
    if (v.norm() <= zero_tol(fset)) {
      stop("least-norm element vanishes");
      return;
    }
    const double h = step_size(cfg_.dt_max / 10.0);
    const SignVector sigma = f_.signs(x_);
    const auto g0 = switch_values(x_);
    const auto none = f_.surface_count();
    if (!crossed(sigma, g0, x_ + h * v, none)) {
      accept(t_ + h, x_ + h * v);
      if (mode_.kind != Mode::Kind::Stopped) decide();
      return;
    }
    // Stop the straight step on the first surface it passes.
    const double hit = bisect(h, [&](double hh) { return crossed(sigma, g0, x_ + hh * v, none); });
    const Vec y = x_ + hit * v;
    std::vector<std::size_t> which;
    crossed(sigma, g0, y, none, &which);
    double tol = cfg_.surface_tol;
    for (auto j : which) tol = std::max(tol, std::abs(g(j, y)) * (1.0 + 1e-9));
    accept(t_ + hit, y);
    if (mode_.kind != Mode::Kind::Stopped) decide(tol);
  }

  static double zero_tol(const Polytope& p) {
    double s = 1.0;
    for (const auto& v : p.vertices()) s = std::max(s, v.norm());
    return 1e-9 * s;
  }

  void stop(const std::string& why) {
    ln_motion_ = false;
    set_mode(Mode::stopped());
    tr_.add_event(EventKind::Converged, why);
  }

  /// Chooses the mode at a point that may lie on switching surfaces.
  void decide(double tol = -1.0) {
    if (tol < 0) tol = cfg_.surface_tol;
    const auto active = f_.active_surfaces(x_, tol);
    ln_motion_ = false;
    if (active.empty()) {
      set_mode(Mode::regular(f_.signs(x_)));
      return;
    }
    if (active.size() == 1) {
      decide_single(active.front(), tol);
      return;
    }
    if (filippov_) {
      if (stop_if_equilibrium(tol)) return;
      ln_motion_ = true;
      set_mode(Mode::sliding(active));
      return;
    }
    decide_corner(active);
  }

  void decide_single(std::size_t i, double tol) {
    const SurfaceClassification c = classify_surface(f_, x_, i, tol);
    const double rate_tol = cfg_.surface_tol * std::max(1.0, f_.switch_gradient(i, x_).norm());
    switch (c.kind) {
      case SurfaceKind::Continuity:
      case SurfaceKind::Crossing: set_mode(Mode::regular(c.alpha > 0 ? c.cell_b : c.cell_a)); return;
      case SurfaceKind::Repulsive:
        // Deterministic branch: the lexicographically lowest sign vector.
      {
        const SignVector branch = std::min(c.cell_a, c.cell_b);
        tr_.add_event(EventKind::Branch, "surface " + std::to_string(i + 1) + " cell " + sign_string(branch));
        set_mode(Mode::regular(branch));
        return;
      }
      case SurfaceKind::Sliding:
        if (filippov_) enter_sliding(i, tol);
        else block("sliding configuration on surface " + std::to_string(i + 1));
        return;
      case SurfaceKind::Tangent:
        if (c.beta > rate_tol) {
          set_mode(Mode::regular(c.cell_b));
        } else if (c.alpha < -rate_tol) {
          set_mode(Mode::regular(c.cell_a));
        } else if (filippov_) {
          enter_sliding(i, tol);
        } else if (std::abs(c.beta) <= rate_tol) {
          set_mode(Mode::regular(c.cell_b));
        } else {
          set_mode(Mode::regular(c.cell_a));
        }
        return;
    }
  }

  bool stop_if_equilibrium(double tol) {
    const Polytope fset = filippov_set(f_, x_, tol);
    if (least_norm(fset).norm() > zero_tol(fset)) return false;
    stop("equilibrium of the inclusion");
    return true;
  }

  void enter_sliding(std::size_t i, double tol) {
    if (stop_if_equilibrium(tol)) return;
    try {
      sliding_field(f_, x_, i, cfg_.surface_tol);
    } catch (const NotSlidingError&) {
      ln_motion_ = true;
      set_mode(Mode::sliding({i}));
      return;
    }
    project(i, x_);
    tr_.states.back() = x_;
    tr_.add_event(EventKind::SlideEnter, "surface " + std::to_string(i + 1));
    set_mode(Mode::sliding({i}));
  }

  /// Carathéodory continuation from an intersection of surfaces: the lowest
  /// cell whose field points strictly into it.
  void decide_corner(const std::vector<std::size_t>& active) {
    SignVector s = f_.signs(x_);
    std::optional<SignVector> best;
    for (std::size_t mask = 0; mask < (std::size_t{1} << active.size()); ++mask) {
      for (std::size_t k = 0; k < active.size(); ++k) s[active[k]] = (mask >> k) & 1U ? 1 : -1;
      const auto v = f_.cell_value(s, x_);
      if (!v) continue;
      bool inward = true;
      for (auto j : active) {
        const Vec n = f_.switch_gradient(j, x_);
        inward = inward && s[j] * n.dot(*v) > cfg_.surface_tol * std::max(1.0, n.norm());
      }
      if (inward && (!best || s < *best)) best = s;
    }
    if (!best) {
      block("no cell field leaves the intersection of surfaces " + surface_list(active));
      return;
    }
    set_mode(Mode::regular(*best));
  }

  const PiecewiseField& f_;
  IntegratorConfig cfg_;
  bool filippov_;
  double t_end_;
  double t_ = 0.0;
  Vec x_;
  Mode mode_;
  Trajectory tr_;
  bool ln_motion_ = false;
  bool done_ = false;
  bool converged_ = false;
  int stall_ = 0;
  long steps_ = 0;
};

}  // namespace

Trajectory integrate_filippov(const PiecewiseField& f, const Vec& x0, double t_end, const IntegratorConfig& cfg) {
  return Engine(f, cfg, true, t_end).run(x0, std::nullopt);
}

Trajectory integrate_caratheodory(const PiecewiseField& f, const Vec& x0, double t_end, const IntegratorConfig& cfg,
                                  const std::optional<SignVector>& initial_cell) {
  return Engine(f, cfg, false, t_end).run(x0, initial_cell);
}

}  // namespace nsds
