#include "nsds/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nsds {
namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  if (quoted) throw ModelError("unterminated quote in CSV row");
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ModelError(what + ": '" + s + "' is not a number");
  return v;
}

/// Event details are free text; the characters that delimit cells and
/// events are replaced so every row stays parseable.
std::string clean_detail(std::string s) {
  for (char& c : s) {
    if (c == '|') c = '/';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::string event_cell(const Event& e) {
  const std::string detail = clean_detail(e.detail);
  return detail.empty() ? to_string(e.kind) : to_string(e.kind) + ":" + detail;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write '" + path + "'");
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Vec parse_vector(const std::string& csv) {
  std::vector<double> xs;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ModelError("empty entry in vector '" + csv + "'");
    xs.push_back(parse_double(item.substr(b, e - b + 1), "vector"));
  }
  if (xs.empty() || (!csv.empty() && csv.back() == ',')) throw ModelError("vector '" + csv + "' is empty or malformed");
  return Eigen::Map<Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

void write_trajectory_csv(const Trajectory& tr, std::ostream& out) {
  tr.check();
  const int d = tr.empty() ? 0 : tr.dim();
  out << "t";
  for (int i = 1; i <= d; ++i) out << ",x" << i;
  out << ",mode,event\n";
  std::vector<std::string> events(tr.size());
  for (const auto& e : tr.events) {
    if (e.sample >= tr.size()) throw ModelError("event refers to a missing sample");
    auto& cell = events[e.sample];
    cell += (cell.empty() ? "" : "|") + event_cell(e);
  }
  for (std::size_t k = 0; k < tr.size(); ++k) {
    out << format_double(tr.times[k]);
    for (int i = 0; i < d; ++i) out << ',' << format_double(tr.states[k](i));
    out << ',' << csv_field(to_string(tr.modes[k])) << ',' << csv_field(events[k]) << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ModelError("trajectory CSV is empty");
  const auto header = split_csv_row(line);
  if (header.size() < 3 || header.front() != "t" || header[header.size() - 2] != "mode" || header.back() != "event") {
    throw ModelError("trajectory CSV header must be t,x1..xd,mode,event");
  }
  const std::size_t d = header.size() - 3;
  for (std::size_t i = 0; i < d; ++i) {
    if (header[i + 1] != "x" + std::to_string(i + 1)) throw ModelError("unexpected column '" + header[i + 1] + "'");
  }
  Trajectory tr;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_row(line);
    if (cells.size() != header.size()) throw ModelError("row " + std::to_string(tr.size() + 1) + " has the wrong width");
    Vec x(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) x(static_cast<Eigen::Index>(i)) = parse_double(cells[i + 1], "state");
    tr.push(parse_double(cells[0], "time"), x, parse_mode(cells[d + 1]));
    std::stringstream ev(cells.back());
    std::string item;
    while (std::getline(ev, item, '|')) {
      const auto colon = item.find(':');
      tr.add_event(parse_event_kind(item.substr(0, colon)), colon == std::string::npos ? "" : item.substr(colon + 1));
    }
  }
  tr.check();
  return tr;
}

Json vec_to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

namespace {
Vec vec_from_json(const Json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}
}  // namespace

Json trajectory_to_json(const Trajectory& tr) {
  tr.check();
  Json j;
  j["schema"] = kSchemaVersion;
  j["dim"] = tr.empty() ? 0 : tr.dim();
  Json samples = Json::array();
  for (std::size_t k = 0; k < tr.size(); ++k) {
    samples.push_back({{"t", tr.times[k]}, {"x", vec_to_json(tr.states[k])}, {"mode", to_string(tr.modes[k])}});
  }
  j["samples"] = std::move(samples);
  Json events = Json::array();
  for (const auto& e : tr.events) {
    events.push_back({{"time", e.time}, {"kind", to_string(e.kind)}, {"sample", e.sample}, {"detail", e.detail}});
  }
  j["events"] = std::move(events);
  return j;
}

Trajectory trajectory_from_json(const Json& j) {
  try {
    if (j.at("schema").get<int>() != kSchemaVersion) throw ModelError("unsupported trajectory schema");
    Trajectory tr;
    for (const auto& s : j.at("samples")) {
      tr.push(s.at("t").get<double>(), vec_from_json(s.at("x")), parse_mode(s.at("mode").get<std::string>()));
    }
    for (const auto& e : j.at("events")) {
      const auto sample = e.at("sample").get<std::size_t>();
      if (sample >= tr.size()) throw ModelError("event refers to a missing sample");
      tr.events.push_back({e.at("time").get<double>(), parse_event_kind(e.at("kind").get<std::string>()), sample,
                           e.value("detail", "")});
    }
    tr.check();
    return tr;
  } catch (const Json::exception& ex) {
    throw ModelError(std::string("malformed trajectory JSON: ") + ex.what());
  }
}

Trajectory read_trajectory(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::exception& ex) {
      throw ModelError(std::string("malformed trajectory JSON: ") + ex.what());
    }
    return trajectory_from_json(j);
  }
  std::istringstream s(text);
  return read_trajectory_csv(s);
}

Json polytope_to_json(const Polytope& p) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = p.is_empty() ? "EmptySet" : "Polytope";
  j["dim"] = p.dim();
  Json vs = Json::array();
  for (const auto& v : p.vertices()) vs.push_back(vec_to_json(v));
  j["vertices"] = std::move(vs);
  return j;
}

Polytope polytope_from_json(const Json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    std::vector<Vec> pts;
    for (const auto& v : j.at("vertices")) {
      pts.push_back(vec_from_json(v));
      require_dim(pts.back().size(), dim, "polytope JSON vertex");
    }
    return pts.empty() ? Polytope::empty(dim) : Polytope::hull(std::move(pts));
  } catch (const Json::exception& ex) {
    throw ModelError(std::string("malformed polytope JSON: ") + ex.what());
  }
}

Json proximal_to_json(const ProximalResult& r) {
  switch (r.kind) {
    case ProximalResult::Kind::Set: return polytope_to_json(r.set);
    case ProximalResult::Kind::Empty: return {{"schema", kSchemaVersion}, {"kind", "EmptySet"}};
    case ProximalResult::Kind::AllSpace: return {{"schema", kSchemaVersion}, {"kind", "AllSpace"}};
    case ProximalResult::Kind::Unsupported: throw UnsupportedError("proximal subdifferential: " + r.reason);
  }
  return {};
}

Json report_to_json(const StabilityReport& r) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["verdict"] = to_string(r.verdict);
  j["theorem"] = to_string(r.theorem);
  j["checked_points"] = r.checked_points;
  j["witness"] = r.witness ? vec_to_json(*r.witness) : Json(nullptr);
  j["failed_clause"] = r.failed_clause;
  j["grid"] = r.grid;
  j["tol"] = r.tol;
  j["margin"] = r.margin;
  Json clauses = Json::array();
  for (const auto& c : r.clauses) {
    clauses.push_back({{"name", c.name},
                       {"verdict", to_string(c.verdict)},
                       {"witness", c.witness ? vec_to_json(*c.witness) : Json(nullptr)},
                       {"value", std::isfinite(c.value) ? Json(c.value) : Json(format_double(c.value))},
                       {"detail", c.detail}});
  }
  j["clauses"] = std::move(clauses);
  return j;
}

Polygon read_polygon(std::istream& in) {
  std::vector<Eigen::Vector2d> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream s(line);
    double x = 0.0;
    double y = 0.0;
    if (!(s >> x)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ModelError("polygon line " + std::to_string(lineno) + " is not 'x y'");
    }
    std::string rest;
    if (!(s >> y) || (s >> rest)) throw ModelError("polygon line " + std::to_string(lineno) + " is not 'x y'");
    pts.emplace_back(x, y);
  }
  return Polygon(std::move(pts));
}

Polygon read_polygon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot read polygon file '" + path + "'");
  return read_polygon(in);
}

PlotKind parse_plot_kind(const std::string& s) {
  if (s == "phase") return PlotKind::Phase;
  if (s == "time") return PlotKind::Time;
  if (s == "level_overlay") return PlotKind::LevelOverlay;
  throw ModelError("unknown plot kind '" + s + "'");
}

std::vector<std::string> emit_plot_data(const Trajectory& tr, PlotKind kind, const std::string& path,
                                        const std::optional<NsFunction>& f, int grid) {
  if (tr.empty()) throw ModelError("cannot plot an empty trajectory");
  const int d = tr.dim();
  if (kind != PlotKind::Time) require_dim(d, 2, "phase plot");
  if (kind == PlotKind::LevelOverlay) {
    if (!f) throw ModelError("level_overlay needs a function");
    require_dim(f->dim(), 2, "level_overlay function");
    if (grid < 3) throw ModelError("level_overlay grid needs at least 3 points per axis");
  }
  std::vector<std::string> written;
  {
    auto out = open_out(path);
    if (kind == PlotKind::Time) {
      out << "# t";
      for (int i = 1; i <= d; ++i) out << " x" << i;
      out << '\n';
      for (std::size_t k = 0; k < tr.size(); ++k) {
        out << format_double(tr.times[k]);
        for (int i = 0; i < d; ++i) out << ' ' << format_double(tr.states[k](i));
        out << '\n';
      }
    } else {
      out << "# x1 x2 t\n";
      for (std::size_t k = 0; k < tr.size(); ++k) {
        out << format_double(tr.states[k](0)) << ' ' << format_double(tr.states[k](1)) << ' '
            << format_double(tr.times[k]) << '\n';
      }
    }
    written.push_back(path);
  }
  if (kind == PlotKind::LevelOverlay) {
    // Square grid centered at the origin that covers the orbit; an odd count
    // puts a node exactly at 0.
    double r = 0.0;
    for (const auto& x : tr.states) r = std::max(r, x.lpNorm<Eigen::Infinity>());
    r = r > 0 ? 1.1 * r : 1.0;
    const int n = grid % 2 == 1 ? grid : grid + 1;
    const std::string level = path + ".level";
    auto out = open_out(level);
    out << "# x1 x2 f\n";
    for (int i = 0; i < n; ++i) {
      const double x1 = r * (2.0 * i - (n - 1)) / (n - 1);
      for (int j = 0; j < n; ++j) {
        const double x2 = r * (2.0 * j - (n - 1)) / (n - 1);
        Vec x(2);
        x << x1, x2;
        out << format_double(x1) << ' ' << format_double(x2) << ' ' << format_double((*f)(x)) << '\n';
      }
      out << '\n';
    }
    written.push_back(level);
  }
  return written;
}

}  // namespace nsds
