#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsds/integrate.hpp"
#include "nsds/lie.hpp"
#include "nsds/nonsmooth.hpp"

namespace nsds {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Shortest-exact decimal text of a double (printf %.17g).
std::string format_double(double v);

/// Comma-separated numbers, e.g. "0.5,-1".
Vec parse_vector(const std::string& csv);

/// Header `t,x1,...,xd,mode,event`; one row per sample, events attached to
/// the sample they were recorded at and joined by '|'.
void write_trajectory_csv(const Trajectory& tr, std::ostream& out);
Trajectory read_trajectory_csv(std::istream& in);

Json trajectory_to_json(const Trajectory& tr);
Trajectory trajectory_from_json(const Json& j);

/// Reads either format, chosen by content.
Trajectory read_trajectory(std::istream& in);

Json polytope_to_json(const Polytope& p);
Polytope polytope_from_json(const Json& j);
Json proximal_to_json(const ProximalResult& r);
Json report_to_json(const StabilityReport& r);
Json vec_to_json(const Vec& v);

/// One `x y` vertex per line; blank lines and '#' comments are skipped.
Polygon read_polygon(std::istream& in);
Polygon read_polygon_file(const std::string& path);

enum class PlotKind { Phase, Time, LevelOverlay };
PlotKind parse_plot_kind(const std::string& s);

/// Writes gnuplot-ready whitespace tables. Phase and time plots go to
/// `path`; level_overlay writes the phase table to `path` and a grid sample
/// of f to `path` + ".level". Returns the files written.
std::vector<std::string> emit_plot_data(const Trajectory& tr, PlotKind kind, const std::string& path,
                                        const std::optional<NsFunction>& f = {}, int grid = 61);

}  // namespace nsds
