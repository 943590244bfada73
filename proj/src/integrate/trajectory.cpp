#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nsds/integrate.hpp"

namespace nsds {

std::string to_string(const Mode& m) {
  switch (m.kind) {
    case Mode::Kind::Regular: return "R:" + sign_string(m.cell);
    case Mode::Kind::Stopped: return "STOP";
    case Mode::Kind::Sliding: {
      std::string s = "S:";
      for (std::size_t k = 0; k < m.surfaces.size(); ++k) {
        if (k > 0) s += ',';
        s += std::to_string(m.surfaces[k] + 1);
      }
      return s;
    }
  }
  return "STOP";
}

Mode parse_mode(const std::string& s) {
  if (s == "STOP") return Mode::stopped();
  if (s.rfind("R:", 0) == 0) return Mode::regular(parse_sign_string(s.substr(2)));
  if (s.rfind("S:", 0) == 0) {
    std::vector<std::size_t> surfaces;
    std::stringstream in(s.substr(2));
    std::string item;
    while (std::getline(in, item, ',')) {
      std::size_t used = 0;
      long k = 0;
      try {
        k = std::stol(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size() || k < 1) throw ModelError("bad sliding mode '" + s + "'");
      surfaces.push_back(static_cast<std::size_t>(k - 1));
    }
    return Mode::sliding(std::move(surfaces));
  }
  throw ModelError("unknown mode '" + s + "'");
}

namespace {
const char* const kEventNames[] = {"SurfaceHit", "SlideEnter", "SlideExit", "Converged",
                                   "StepLimit",  "Branch",     "Blocked"};
}

std::string to_string(EventKind k) { return kEventNames[static_cast<int>(k)]; }

EventKind parse_event_kind(const std::string& s) {
  for (int k = 0; k < 7; ++k) {
    if (s == kEventNames[k]) return static_cast<EventKind>(k);
  }
  throw ModelError("unknown event '" + s + "'");
}

void Trajectory::push(double t, const Vec& x, const Mode& m) {
  times.push_back(t);
  states.push_back(x);
  modes.push_back(m);
}

void Trajectory::add_event(EventKind kind, std::string detail) {
  events.push_back({times.empty() ? 0.0 : times.back(), kind, times.empty() ? 0 : times.size() - 1,
                    std::move(detail)});
}

bool Trajectory::has_event(EventKind kind) const { return first_event_time(kind).has_value(); }

std::optional<double> Trajectory::first_event_time(EventKind kind) const {
  for (const auto& e : events) {
    if (e.kind == kind) return e.time;
  }
  return std::nullopt;
}

Vec Trajectory::state_at(double t) const {
  if (empty()) throw ModelError("state_at on an empty trajectory");
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto k = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
  return (1.0 - w) * states[k - 1] + w * states[k];
}

void Trajectory::check() const {
  if (states.size() != times.size() || modes.size() != times.size()) {
    throw ModelError("trajectory columns have different lengths");
  }
  for (std::size_t k = 0; k < size(); ++k) {
    if (states[k].size() != states.front().size()) throw ModelError("trajectory state dimension varies");
    if (k > 0 && !(times[k] > times[k - 1])) throw ModelError("trajectory times are not strictly increasing");
  }
}

PartitionSchedule::PartitionSchedule(std::vector<double> points) : breakpoints(std::move(points)) {
  if (breakpoints.size() < 2) throw ModelError("partition needs at least two breakpoints");
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    const double gap = breakpoints[k] - breakpoints[k - 1];
    if (!(gap > 0)) throw ModelError("partition breakpoints must increase strictly");
    diameter = std::max(diameter, gap);
  }
}

PartitionSchedule PartitionSchedule::uniform(double t0, double t1, int intervals) {
  if (intervals < 1 || !(t1 > t0)) throw ModelError("uniform partition needs t1 > t0 and intervals ≥ 1");
  std::vector<double> pts(static_cast<std::size_t>(intervals) + 1);
  for (int k = 0; k <= intervals; ++k) pts[static_cast<std::size_t>(k)] = t0 + (t1 - t0) * k / intervals;
  pts.back() = t1;
  return PartitionSchedule(std::move(pts));
}

PartitionSchedule PartitionSchedule::with_diameter(double t0, double t1, double diam) {
  if (!(diam > 0)) throw ModelError("partition diameter must be positive");
  int n = static_cast<int>(std::ceil((t1 - t0) / diam - 1e-9));
  PartitionSchedule p = uniform(t0, t1, n);
  while (p.diameter > diam) p = uniform(t0, t1, ++n);
  return p;
}

void IntegratorConfig::validate() const {
  if (!(dt_max > 0) || !(surface_tol > 0) || !(event_refine_tol > 0) || !(sliding_exit_margin > 0) ||
      !(conv_tol > 0)) {
    throw ModelError("integrator tolerances must be positive");
  }
  if (sliding_exit_margin >= 0.5) throw ModelError("sliding_exit_margin must be below 1/2");
  if (max_steps < 1 || stall_window < 1) throw ModelError("max_steps and stall_window must be positive");
  if (rk_order != 4) throw ModelError("only rk_order = 4 is implemented");
}

std::string to_string(FlowVariant v) {
  switch (v) {
    case FlowVariant::Natural: return "natural";
    case FlowVariant::Normalized: return "normalized";
    case FlowVariant::Signed: return "signed";
  }
  return "natural";
}

FlowVariant parse_flow_variant(const std::string& s) {
  if (s == "natural") return FlowVariant::Natural;
  if (s == "normalized") return FlowVariant::Normalized;
  if (s == "signed") return FlowVariant::Signed;
  throw ModelError("unknown flow variant '" + s + "'");
}

std::string to_string(ConsensusVariant v) {
  switch (v) {
    case ConsensusVariant::Smooth: return "smooth";
    case ConsensusVariant::Norm: return "norm";
    case ConsensusVariant::Sign: return "sign";
  }
  return "smooth";
}

ConsensusVariant parse_consensus_variant(const std::string& s) {
  if (s == "smooth") return ConsensusVariant::Smooth;
  if (s == "norm") return ConsensusVariant::Norm;
  if (s == "sign") return ConsensusVariant::Sign;
  throw ModelError("unknown consensus variant '" + s + "'");
}

std::vector<Vec> limit_set_estimate(const Trajectory& tr, double tail_fraction, double conv_tol) {
  if (!(tail_fraction > 0) || tail_fraction > 1) throw ModelError("tail_fraction must lie in (0, 1]");
  const auto n = tr.size();
  const auto tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n))));
  if (tail < 10) throw ModelError("limit_set_estimate needs at least 10 samples in the tail");
  const std::size_t first = n - tail;
  const double radius = 10.0 * conv_tol;

  // Single linkage via union-find over pairs found by a sweep on the first coordinate.
  std::vector<std::size_t> order(tail);
  std::iota(order.begin(), order.end(), first);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tr.states[a](0) < tr.states[b](0) || (tr.states[a](0) == tr.states[b](0) && a < b);
  });
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const Vec& a = tr.states[order[i]];
      const Vec& b = tr.states[order[j]];
      if (b(0) - a(0) > radius) break;
      if ((a - b).norm() <= radius) parent[find(order[i])] = find(order[j]);
    }
  }
  // The latest sample of each cluster represents it; clusters in order of first appearance.
  std::vector<std::size_t> roots;
  std::vector<std::size_t> latest(n, n);
  for (std::size_t k = first; k < n; ++k) {
    const auto r = find(k);
    if (latest[r] == n) roots.push_back(r);
    latest[r] = k;
  }
  std::vector<Vec> out;
  out.reserve(roots.size());
  for (auto r : roots) out.push_back(tr.states[latest[r]]);
  return out;
}

std::vector<Trajectory> run_batch(const std::vector<std::function<Trajectory()>>& jobs, unsigned threads) {
  std::vector<Trajectory> out(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t k) { out[k] = jobs[k](); }, threads);
  return out;
}

}  // namespace nsds
