#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsds/fields.hpp"
#include "nsds/integrate.hpp"
#include "nsds/lie.hpp"
#include "nsds/nonsmooth.hpp"

namespace nsds {

using Constants = std::map<std::string, double>;

enum class ScenarioKind { Piecewise, Control, Flow, Agents };
std::string to_string(ScenarioKind k);

/// Gradient-type flow of an NsFunction.
struct FlowSpec {
  NsFunction f;
  FlowVariant variant = FlowVariant::Natural;
};

/// Planar agents in a polygon running the move-away law.
struct AgentSpec {
  Polygon polygon = Polygon::square(0, 1);
  int agents = 1;
};

/// A scenario instantiated with concrete constants. Exactly one of the
/// model members is set, matching `kind`.
struct BuiltScenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::Piecewise;
  int dim = 0;
  Constants constants;
  std::optional<PiecewiseField> field;
  std::optional<ControlField> control;
  std::optional<FlowSpec> flow;
  std::optional<AgentSpec> agents;
  /// Stabilizing feedback for control scenarios that have one.
  std::optional<Feedback> feedback;
  NsFunction lyapunov;
  Vec equilibrium;

  /// F(x) for Lie-derivative sweeps; Unsupported for agent scenarios.
  SetValuedMap inclusion() const;
  /// Runs the scenario from x0. Control scenarios use sample-and-hold on a
  /// uniform partition of diameter at most the `diam` constant.
  Trajectory simulate(const Vec& x0, double t_end, const IntegratorConfig& cfg = {}) const;
};

struct Scenario {
  std::string name;
  ScenarioKind kind;
  std::string summary;
  Constants defaults;
  std::string lyapunov_name;
  std::string citation;
};

/// The packaged scenarios in catalog order.
const std::vector<Scenario>& scenario_catalog();
const Scenario& find_scenario(const std::string& name);

/// Builds a scenario; overrides must name known constants.
BuiltScenario build_scenario(const std::string& name, const Constants& overrides = {});

/// Parses "k=v" pairs.
Constants parse_constants(const std::vector<std::string>& items);

/// Seeded uniform start for n agents in q: every agent keeps `margin` from
/// the boundary and from the others, and each agent's nearest term wins by
/// at least `margin`, so the start lies off the switching set.
Vec seeded_agent_positions(const Polygon& q, int n, std::uint64_t seed, double margin = 1e-3);

}  // namespace nsds
