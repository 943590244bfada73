#include "nsds/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "nsds/io.hpp"
#include "nsds/scenarios.hpp"

namespace nsds {
namespace {

/// Bad command-line input that CLI11 itself cannot detect.
class ArgumentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class Fn>
auto as_argument(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw ArgumentError(e.what());
  }
}

IntegratorConfig config_with(double dt_max) {
  IntegratorConfig cfg;
  if (dt_max > 0) cfg.dt_max = dt_max;
  return cfg;
}

void write_trajectory_file(const Trajectory& tr, const std::string& path, const std::string& format, Json meta = {}) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write '" + path + "'");
  if (format == "json") {
    Json j = trajectory_to_json(tr);
    if (meta.is_object()) j.update(meta);
    out << j.dump(2) << '\n';
  } else {
    write_trajectory_csv(tr, out);
  }
}

Json trajectory_summary(const Trajectory& tr) {
  Json events = Json::array();
  for (const auto& e : tr.events) events.push_back({{"time", e.time}, {"kind", to_string(e.kind)}, {"detail", e.detail}});
  return {{"samples", tr.size()},
          {"final_time", tr.final_time()},
          {"final_state", vec_to_json(tr.final_state())},
          {"final_mode", to_string(tr.modes.back())},
          {"events", std::move(events)}};
}

Json with_schema(Json j) {
  j["schema"] = kSchemaVersion;
  return j;
}

struct Options {
  std::string scenario;
  std::vector<std::string> constants;
  std::string x0;
  std::string point;
  double t_end = 0.0;
  double dt_max = 0.0;
  std::string out_path;
  std::string format = "csv";
  std::string function;
  bool proximal = false;
  std::string polygon;
  std::string graph;
  std::string theorem;
  std::string grid;
  double tol = 1e-9;
  double margin = 1e-6;
  unsigned threads = 0;
  std::string variant;
  std::string p0;
  double spread_tol = 1e-6;
  int n = 0;
  std::uint64_t seed = 0;
  double diam = 0.0;
  std::string in_path;
  std::string kind;
  int grid_points = 61;
};

int run_simulate(const Options& o, std::ostream& out) {
  const BuiltScenario s = as_argument([&] { return build_scenario(o.scenario, parse_constants(o.constants)); });
  Vec x0;
  if (!o.x0.empty()) {
    x0 = as_argument([&] { return parse_vector(o.x0); });
  } else if (s.agents) {
    x0 = seeded_agent_positions(s.agents->polygon, s.agents->agents, o.seed);
  } else {
    throw ArgumentError("--x0 is required for scenario " + s.name);
  }
  const Trajectory tr = s.simulate(x0, o.t_end, config_with(o.dt_max));
  Json consts = Json::object();
  for (const auto& [k, v] : s.constants) consts[k] = v;
  write_trajectory_file(tr, o.out_path, o.format, {{"scenario", s.name}, {"constants", consts}});
  Json j = trajectory_summary(tr);
  j["scenario"] = s.name;
  j["out"] = o.out_path;
  out << with_schema(std::move(j)).dump(2) << '\n';
  return 0;
}

int run_filippov_set(const Options& o, std::ostream& out) {
  const BuiltScenario s = as_argument([&] { return build_scenario(o.scenario, parse_constants(o.constants)); });
  const Vec x = as_argument([&] { return parse_vector(o.point); });
  require_dim(x.size(), s.dim, "filippov-set point");
  out << polytope_to_json(s.inclusion()(x).reduced()).dump(2) << '\n';
  return 0;
}

std::optional<Polygon> polygon_option(const Options& o) {
  if (o.polygon.empty()) return std::nullopt;
  return read_polygon_file(o.polygon);
}

std::optional<Graph> graph_option(const Options& o) {
  if (o.graph.empty()) return std::nullopt;
  return as_argument([&] { return Graph::parse(o.graph); });
}

int run_gradient(const Options& o, std::ostream& out) {
  const Vec x = as_argument([&] { return parse_vector(o.point); });
  const NsFunction f = as_argument([&] {
    return catalog_function(o.function, static_cast<int>(x.size()), polygon_option(o), graph_option(o));
  });
  require_dim(x.size(), f.dim(), "gradient point");
  if (o.proximal) {
    out << proximal_to_json(proximal_subdifferential(f, x)).dump(2) << '\n';
    return 0;
  }
  const GradientResult g = generalized_gradient(f, x);
  Json j = polytope_to_json(g.polytope.reduced());
  j["exact"] = g.exact;
  j["regular"] = g.regular;
  j["smooth"] = g.smooth;
  out << j.dump(2) << '\n';
  return 0;
}

int run_lyapunov(const Options& o, std::ostream& out) {
  const BuiltScenario s = as_argument([&] { return build_scenario(o.scenario, parse_constants(o.constants)); });
  const Theorem thm = as_argument([&] { return parse_theorem(o.theorem); });
  const GridSpec grid = as_argument([&] { return GridSpec::parse(o.grid); });
  const std::string name = o.function.empty() ? find_scenario(o.scenario).lyapunov_name : o.function;
  const NsFunction f = name == find_scenario(o.scenario).lyapunov_name
                           ? s.lyapunov
                           : as_argument([&] { return catalog_function(name, s.dim, polygon_option(o), graph_option(o)); });
  require_dim(grid.dim(), s.dim, "lyapunov grid");
  CertifyOptions opt;
  opt.tol = o.tol;
  opt.margin = o.margin;
  opt.threads = o.threads;
  const StabilityReport r = lyapunov_certify(thm, f, s.inclusion(), s.equilibrium, grid, opt);
  Json j = report_to_json(r);
  j["scenario"] = s.name;
  j["function"] = name;
  out << j.dump(2) << '\n';
  return 0;
}

int run_consensus(const Options& o, std::ostream& out) {
  const Graph g = as_argument([&] { return Graph::parse(o.graph); });
  const ConsensusVariant v = as_argument([&] { return parse_consensus_variant(o.variant); });
  const Vec p0 = as_argument([&] { return parse_vector(o.p0); });
  const ConsensusResult r = consensus_flow(g, v, p0, o.t_end, config_with(o.dt_max), o.spread_tol);
  if (!o.out_path.empty()) write_trajectory_file(r.trajectory, o.out_path, o.format);
  Json j{{"variant", to_string(v)},
         {"consensus_value", r.consensus_value ? Json(*r.consensus_value) : Json(nullptr)},
         {"consensus_time", r.consensus_time ? Json(*r.consensus_time) : Json(nullptr)},
         {"final_spread", r.final_spread},
         {"initial_average", p0.mean()},
         {"initial_midrange", 0.5 * (p0.maxCoeff() + p0.minCoeff())},
         {"final_state", vec_to_json(r.trajectory.final_state())},
         {"final_time", r.trajectory.final_time()}};
  out << with_schema(std::move(j)).dump(2) << '\n';
  return 0;
}

int run_pack(const Options& o, std::ostream& out) {
  if (o.n < 1) throw ArgumentError("--n must be positive");
  const Polygon q = read_polygon_file(o.polygon);
  const Vec p0 = seeded_agent_positions(q, o.n, o.seed);
  const Trajectory tr = move_away_flow(q, p0, o.t_end, config_with(o.dt_max));
  Json j{{"n", o.n},
         {"seed", o.seed},
         {"initial_state", vec_to_json(p0)},
         {"initial_hsp", hsp(q, p0)},
         {"final_hsp", hsp(q, tr.final_state())},
         {"final_state", vec_to_json(tr.final_state())},
         {"final_time", tr.final_time()},
         {"converged", tr.has_event(EventKind::Converged)}};
  if (const auto t = tr.first_event_time(EventKind::Converged)) j["converged_time"] = *t;
  if (o.out_path.empty()) {
    j["trajectory"] = trajectory_to_json(tr);
  } else {
    write_trajectory_file(tr, o.out_path, o.format);
    j["out"] = o.out_path;
  }
  out << with_schema(std::move(j)).dump(2) << '\n';
  return 0;
}

int run_sample_hold(const Options& o, std::ostream& out) {
  const BuiltScenario s = as_argument([&] { return build_scenario(o.scenario, parse_constants(o.constants)); });
  if (s.kind != ScenarioKind::Control) throw ArgumentError("sample-hold needs a control scenario");
  const Vec x0 = as_argument([&] { return parse_vector(o.x0); });
  const PartitionSchedule pi = PartitionSchedule::with_diameter(0.0, o.t_end, o.diam);
  IntegratorConfig cfg = config_with(o.dt_max);
  cfg.dt_max = std::min(cfg.dt_max, pi.diameter);
  const Trajectory tr = sample_and_hold(*s.control, *s.feedback, pi, x0, cfg);
  if (!o.out_path.empty()) write_trajectory_file(tr, o.out_path, o.format);
  // Lyapunov values at the partition points.
  double max_increase = -std::numeric_limits<double>::infinity();
  double prev = s.lyapunov(x0);
  double min_norm = x0.norm();
  std::size_t next = 1;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    min_norm = std::min(min_norm, tr.states[k].norm());
    if (next < pi.breakpoints.size() && tr.times[k] == pi.breakpoints[next]) {
      const double now = s.lyapunov(tr.states[k]);
      max_increase = std::max(max_increase, now - prev);
      prev = now;
      ++next;
    }
  }
  Json j{{"scenario", s.name},
         {"intervals", pi.breakpoints.size() - 1},
         {"partition_diameter", pi.diameter},
         {"final_state", vec_to_json(tr.final_state())},
         {"final_lyapunov", s.lyapunov(tr.final_state())},
         {"max_lyapunov_increase", max_increase},
         {"min_norm", min_norm}};
  out << with_schema(std::move(j)).dump(2) << '\n';
  return 0;
}

int run_plot(const Options& o, std::ostream& out) {
  const PlotKind kind = as_argument([&] { return parse_plot_kind(o.kind); });
  std::ifstream in(o.in_path);
  if (!in) throw ArgumentError("cannot read '" + o.in_path + "'");
  const Trajectory tr = read_trajectory(in);
  std::optional<NsFunction> f;
  if (!o.function.empty()) {
    f = as_argument([&] { return catalog_function(o.function, tr.dim(), polygon_option(o), graph_option(o)); });
  }
  const auto files = emit_plot_data(tr, kind, o.out_path, f, o.grid_points);
  out << with_schema({{"files", files}}).dump(2) << '\n';
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and analysis of nonsmooth dynamical systems", "nsds"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "Integrate a packaged scenario and write its trajectory");
  sim->add_option("--scenario", o.scenario, "Scenario name")->required();
  sim->add_option("--const", o.constants, "Override a constant, k=v (repeatable)");
  sim->add_option("--x0", o.x0, "Initial state, comma separated");
  sim->add_option("--seed", o.seed, "Seed for agent scenarios without --x0");
  sim->add_option("--t-end", o.t_end, "Final time")->required()->check(CLI::PositiveNumber);
  sim->add_option("--dt-max", o.dt_max, "Maximum step")->check(CLI::PositiveNumber);
  sim->add_option("--out", o.out_path, "Output file")->required();
  sim->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* fil = app.add_subcommand("filippov-set", "Print the Filippov set of a scenario at a point");
  fil->add_option("--scenario", o.scenario, "Scenario name")->required();
  fil->add_option("--const", o.constants, "Override a constant, k=v (repeatable)");
  fil->add_option("--point", o.point, "Point, comma separated")->required();

  auto* grad = app.add_subcommand("gradient", "Print the generalized gradient of a catalog function");
  grad->add_option("--function", o.function, "Catalog function name")->required();
  grad->add_option("--point", o.point, "Point, comma separated")->required();
  grad->add_flag("--proximal", o.proximal, "Proximal subdifferential instead");
  grad->add_option("--polygon", o.polygon, "Polygon file for smq, neg_smq and hsp");
  grad->add_option("--graph", o.graph, "Edge list for disagreement, e.g. 1-2,2-3");

  auto* lya = app.add_subcommand("lyapunov", "Check a stability theorem on a sample grid");
  lya->add_option("--scenario", o.scenario, "Scenario name")->required();
  lya->add_option("--const", o.constants, "Override a constant, k=v (repeatable)");
  lya->add_option("--function", o.function, "Catalog function (default: the scenario's)");
  lya->add_option("--theorem", o.theorem, "thm1|thm1p|thm2|thm3|thm3p|thm4|prop13w|prop13s")->required();
  lya->add_option("--grid", o.grid, "lo:hi:n,...[;exclude=axis:center:halfwidth]")->required();
  lya->add_option("--tol", o.tol, "Slack on sign conditions");
  lya->add_option("--margin", o.margin, "Margin for strict conditions");
  lya->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  lya->add_option("--polygon", o.polygon, "Polygon file for smq, neg_smq and hsp");
  lya->add_option("--graph", o.graph, "Edge list for disagreement");

  auto* con = app.add_subcommand("consensus", "Run a consensus flow on a graph");
  con->add_option("--graph", o.graph, "Edge list, e.g. 1-2,2-3")->required();
  con->add_option("--variant", o.variant, "sign|norm|smooth")->required();
  con->add_option("--p0", o.p0, "Initial states, comma separated")->required();
  con->add_option("--t-end", o.t_end, "Final time")->check(CLI::PositiveNumber);
  con->add_option("--dt-max", o.dt_max, "Maximum step")->check(CLI::PositiveNumber);
  con->add_option("--spread-tol", o.spread_tol, "Spread counted as agreement")->check(CLI::PositiveNumber);
  con->add_option("--out", o.out_path, "Trajectory output file");
  con->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* pack = app.add_subcommand("pack", "Sphere packing by the move-away law from a seeded start");
  pack->add_option("--n", o.n, "Number of agents")->required();
  pack->add_option("--polygon", o.polygon, "Polygon file, one 'x y' vertex per line, counterclockwise")->required();
  pack->add_option("--seed", o.seed, "Seed for the initial configuration")->required();
  pack->add_option("--t-end", o.t_end, "Final time")->check(CLI::PositiveNumber);
  pack->add_option("--dt-max", o.dt_max, "Euler step")->check(CLI::PositiveNumber);
  pack->add_option("--out", o.out_path, "Trajectory output file (default: embedded in the report)");
  pack->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* sh = app.add_subcommand("sample-hold", "Sample-and-hold run of a control scenario's feedback");
  sh->add_option("--scenario", o.scenario, "Control scenario name")->required();
  sh->add_option("--const", o.constants, "Override a constant, k=v (repeatable)");
  sh->add_option("--x0", o.x0, "Initial state, comma separated")->required();
  sh->add_option("--diam", o.diam, "Partition diameter")->required()->check(CLI::PositiveNumber);
  sh->add_option("--t-end", o.t_end, "Final time")->required()->check(CLI::PositiveNumber);
  sh->add_option("--dt-max", o.dt_max, "Maximum RK4 substep")->check(CLI::PositiveNumber);
  sh->add_option("--out", o.out_path, "Trajectory output file");
  sh->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* plot = app.add_subcommand("plot", "Write gnuplot tables from a trajectory file");
  plot->add_option("--in", o.in_path, "Trajectory file (csv or json)")->required();
  plot->add_option("--kind", o.kind, "phase|time|level_overlay")->required();
  plot->add_option("--out", o.out_path, "Output table")->required();
  plot->add_option("--function", o.function, "Catalog function for level_overlay");
  plot->add_option("--grid", o.grid_points, "Grid points per axis for level_overlay")->check(CLI::Range(3, 2001));
  plot->add_option("--polygon", o.polygon, "Polygon file for smq, neg_smq and hsp");
  plot->add_option("--graph", o.graph, "Edge list for disagreement");

  const auto usage = [&](std::ostream& os) {
    const auto subs = app.get_subcommands();
    os << (subs.empty() ? app.help() : subs.front()->help());
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    usage(out);
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    usage(err);
    return 2;
  }

  if (o.t_end == 0.0) {
    if (*con) o.t_end = 10.0;
    if (*pack) o.t_end = 5.0;
  }

  try {
    if (*sim) return run_simulate(o, out);
    if (*fil) return run_filippov_set(o, out);
    if (*grad) return run_gradient(o, out);
    if (*lya) return run_lyapunov(o, out);
    if (*con) return run_consensus(o, out);
    if (*pack) return run_pack(o, out);
    if (*sh) return run_sample_hold(o, out);
    if (*plot) return run_plot(o, out);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    usage(err);
    return 2;
  } catch (const Error& e) {
    err << e.name() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "Error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace nsds
