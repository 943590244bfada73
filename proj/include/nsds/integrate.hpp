#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nsds/fields.hpp"
#include "nsds/nonsmooth.hpp"

namespace nsds {

/// Per-sample integration mode.
struct Mode {
  enum class Kind { Regular, Sliding, Stopped };
  Kind kind = Kind::Regular;
  /// Regular: the cell being integrated.
  SignVector cell;
  /// Sliding: the surfaces (0-based) the state is held on.
  std::vector<std::size_t> surfaces;

  static Mode regular(SignVector cell) { return {Kind::Regular, std::move(cell), {}}; }
  static Mode sliding(std::vector<std::size_t> surfaces) { return {Kind::Sliding, {}, std::move(surfaces)}; }
  static Mode stopped() { return {Kind::Stopped, {}, {}}; }
  bool operator==(const Mode&) const = default;
};

/// `R:<signs>`, `S:<1-based surfaces>` or `STOP`.
std::string to_string(const Mode& m);
Mode parse_mode(const std::string& s);

enum class EventKind { SurfaceHit, SlideEnter, SlideExit, Converged, StepLimit, Branch, Blocked };
std::string to_string(EventKind k);
EventKind parse_event_kind(const std::string& s);

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::SurfaceHit;
  /// Index of the stored sample the event is attached to.
  std::size_t sample = 0;
  std::string detail;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Mode> modes;
  std::vector<Event> events;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
  const Vec& final_state() const { return states.back(); }
  double final_time() const { return times.back(); }

  void push(double t, const Vec& x, const Mode& m);
  void add_event(EventKind kind, std::string detail = {});
  bool has_event(EventKind kind) const;
  std::optional<double> first_event_time(EventKind kind) const;
  /// Linear interpolation between stored samples, clamped to the time range.
  Vec state_at(double t) const;
  /// Throws ModelError if times are not strictly increasing or dimensions vary.
  void check() const;
};

/// Sampling partition s_0 < ... < s_N with its diameter.
struct PartitionSchedule {
  std::vector<double> breakpoints;
  double diameter = 0.0;

  explicit PartitionSchedule(std::vector<double> points);
  static PartitionSchedule uniform(double t0, double t1, int intervals);
  /// Uniform partition of [t0, t1] with diameter at most `diam`.
  static PartitionSchedule with_diameter(double t0, double t1, double diam);
  std::size_t intervals() const { return breakpoints.size() - 1; }
};

struct IntegratorConfig {
  double dt_max = 1e-3;
  /// |g_i| within this band counts as being on surface i.
  double surface_tol = 1e-9;
  /// Event bisection stops once the crossed |g_i| is below this.
  double event_refine_tol = 1e-12;
  double sliding_exit_margin = 1e-6;
  long max_steps = 20'000'000;
  int rk_order = 4;
  /// Stall threshold: ‖Δx‖ ≤ conv_tol·Δt.
  double conv_tol = 1e-9;
  int stall_window = 20;

  /// Throws ModelError on nonpositive tolerances or an order other than 4.
  void validate() const;
};

/// Event-driven Filippov integration with sliding along surfaces and
/// least-norm motion on surface intersections.
Trajectory integrate_filippov(const PiecewiseField& f, const Vec& x0, double t_end,
                              const IntegratorConfig& cfg = {});

/// Integration of the cell fields, crossing surfaces where both sides agree.
/// Sliding configurations have no continuation and end with a Blocked event.
/// `initial_cell` selects the branch when x0 lies on a surface.
Trajectory integrate_caratheodory(const PiecewiseField& f, const Vec& x0, double t_end,
                                  const IntegratorConfig& cfg = {},
                                  const std::optional<SignVector>& initial_cell = {});

enum class FlowVariant { Natural, Normalized, Signed };
std::string to_string(FlowVariant v);
FlowVariant parse_flow_variant(const std::string& s);

/// The a.e. field −∇f as a piecewise field whose switching functions are the
/// kinks of f (abs arguments and pairwise max/min differences). Its Filippov
/// set is −∂f.
PiecewiseField descent_field(const NsFunction& f);
/// −sign(∇f) componentwise, switching on the partial derivatives of f.
PiecewiseField signed_descent_field(const NsFunction& f);

/// Nonsmooth gradient descent of f. Natural and signed variants go through
/// integrate_filippov; the normalized variant −∇f/‖∇f‖ stops on the critical
/// set.
Trajectory gradient_flow(const NsFunction& f, FlowVariant variant, const Vec& x0, double t_end,
                         const IntegratorConfig& cfg = {});

enum class ConsensusVariant { Smooth, Norm, Sign };
std::string to_string(ConsensusVariant v);
ConsensusVariant parse_consensus_variant(const std::string& s);

struct ConsensusResult {
  Trajectory trajectory;
  /// Mean of the final state when the spread is within tolerance.
  std::optional<double> consensus_value;
  /// First sample time with spread within tolerance.
  std::optional<double> consensus_time;
  double final_spread = 0.0;
};

/// Gradient flows of the disagreement function Φ_G.
ConsensusResult consensus_flow(const Graph& g, ConsensusVariant variant, const Vec& p0, double t_end,
                               const IntegratorConfig& cfg = {}, double spread_tol = 1e-6);

using Feedback = std::function<Vec(double, const Vec&)>;

/// π-solution: on each partition interval the control is frozen at its value
/// at the left breakpoint and the smooth ODE is integrated by RK4.
Trajectory sample_and_hold(const ControlField& c, const Feedback& u, const PartitionSchedule& pi, const Vec& x0,
                           const IntegratorConfig& cfg = {});

/// Numerical limit set: single-linkage clusters (radius 10·conv_tol) of the
/// trailing fraction of the states, one representative per cluster.
std::vector<Vec> limit_set_estimate(const Trajectory& tr, double tail_fraction, double conv_tol = 1e-9);

/// Move-away-from-nearest-neighbor flow of n planar agents in a polygon,
/// state (x1, y1, ..., xn, yn). Each agent follows the least-norm element of
/// the hull of unit away-directions of the terms within `band` of its
/// nearest distance; band < 0 selects 4·dt_max.
Trajectory move_away_flow(const Polygon& q, const Vec& p0, double t_end, const IntegratorConfig& cfg = {},
                          double band = -1.0);

/// Runs independent jobs concurrently; results keep job order.
std::vector<Trajectory> run_batch(const std::vector<std::function<Trajectory()>>& jobs, unsigned threads = 0);

}  // namespace nsds
