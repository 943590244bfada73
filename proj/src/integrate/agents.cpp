#include <algorithm>
#include <cmath>

#include "nsds/integrate.hpp"

namespace nsds {
namespace {

struct Term {
  double value;
  Vec away;
};

/// Distance terms of agent i with unit directions that increase them.
std::vector<Term> agent_terms(const Polygon& q, const Vec& p, int i) {
  const int n = static_cast<int>(p.size() / 2);
  const Eigen::Vector2d pi = p.segment<2>(2 * i);
  std::vector<Term> terms;
  for (std::size_t e = 0; e < q.size(); ++e) {
    const Eigen::Vector2d a = q.vertex(e);
    const Eigen::Vector2d b = q.vertex((e + 1) % q.size());
    const double s = std::clamp((pi - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
    const Eigen::Vector2d r = pi - (a + s * (b - a));
    const double d = r.norm();
    const Eigen::Vector2d dir = d > 0 && q.contains(pi) ? Eigen::Vector2d(r / d) : q.inward_normal(e);
    terms.push_back({q.contains(pi) ? d : -d, Vec(dir)});
  }
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const Eigen::Vector2d r = pi - p.segment<2>(2 * j);
    const double d = r.norm();
    if (d == 0.0) throw ModelError("move_away_flow: agents " + std::to_string(i + 1) + " and " +
                                   std::to_string(j + 1) + " coincide");
    terms.push_back({0.5 * d, Vec(r / d)});
  }
  return terms;
}

}  // namespace

Trajectory move_away_flow(const Polygon& q, const Vec& p0, double t_end, const IntegratorConfig& cfg, double band) {
  cfg.validate();
  if (p0.size() < 2 || p0.size() % 2 != 0) throw DimensionMismatchError("move_away_flow needs planar agent positions");
  if (band < 0) band = 4.0 * cfg.dt_max;
  const int n = static_cast<int>(p0.size() / 2);
  Trajectory tr;
  Vec p = p0;
  double t = 0.0;
  tr.push(t, p, Mode::regular({}));
  int stall = 0;
  bool stopped = false;
  long steps = 0;
  while (t_end - t > 1e-12 * std::max(1.0, t_end)) {
    if (++steps > cfg.max_steps) {
      tr.add_event(EventKind::StepLimit, "max_steps " + std::to_string(cfg.max_steps));
      break;
    }
    double h = std::min(cfg.dt_max, t_end - t);
    if (t_end - (t + h) <= 1e-12 * std::max(1.0, t_end)) h = t_end - t;
    Vec v = Vec::Zero(p.size());
    if (!stopped) {
      for (int i = 0; i < n; ++i) {
        const auto terms = agent_terms(q, p, i);
        double m = terms.front().value;
        for (const auto& term : terms) m = std::min(m, term.value);
        std::vector<Vec> dirs;
        for (const auto& term : terms) {
          if (term.value <= m + band) dirs.push_back(term.away);
        }
        const Vec w = least_norm(Polytope::hull(std::move(dirs)));
        if (w.norm() > 1e-12) v.segment<2>(2 * i) = w;
      }
    }
    const Vec next = p + h * v;
    stall = (next - p).norm() <= cfg.conv_tol * h ? stall + 1 : 0;
    p = next;
    t = t + h >= t_end ? t_end : t + h;
    tr.push(t, p, stopped ? Mode::stopped() : Mode::regular({}));
    if (!stopped && stall >= cfg.stall_window) {
      stopped = true;
      tr.modes.back() = Mode::stopped();
      tr.add_event(EventKind::Converged, "stall window");
    }
  }
  return tr;
}

}  // namespace nsds
