#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "nsds/nonsmooth.hpp"

namespace nsds {

Polygon::Polygon(std::vector<Eigen::Vector2d> vertices) : v_(std::move(vertices)) {
  if (v_.size() < 3) throw ModelError("polygon needs at least three vertices");
  double area = 0.0;
  for (std::size_t i = 0; i < v_.size(); ++i) {
    const Eigen::Vector2d e = v_[(i + 1) % v_.size()] - v_[i];
    if (e.norm() <= 1e-12) throw ModelError("polygon has a zero-length edge at vertex " + std::to_string(i + 1));
    const Eigen::Vector2d f = v_[(i + 2) % v_.size()] - v_[(i + 1) % v_.size()];
    const double turn = e.x() * f.y() - e.y() * f.x();
    if (turn < -1e-12 * e.norm() * f.norm()) {
      throw ModelError("polygon is not convex and counterclockwise at vertex " + std::to_string(i + 2));
    }
    area += v_[i].x() * v_[(i + 1) % v_.size()].y() - v_[(i + 1) % v_.size()].x() * v_[i].y();
  }
  if (area <= 0) throw ModelError("polygon vertices must be counterclockwise with positive area");
}

Polygon Polygon::square(double lo, double hi) {
  return Polygon({{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}});
}

Eigen::Vector2d Polygon::inward_normal(std::size_t i) const {
  const Eigen::Vector2d e = (v_[(i + 1) % v_.size()] - v_[i]).normalized();
  return {-e.y(), e.x()};
}

double Polygon::line_distance(std::size_t i, const Eigen::Vector2d& p) const {
  return inward_normal(i).dot(p - v_[i]);
}

double Polygon::segment_distance(std::size_t i, const Eigen::Vector2d& p) const {
  const Eigen::Vector2d a = v_[i];
  const Eigen::Vector2d e = v_[(i + 1) % v_.size()] - a;
  const double t = std::clamp((p - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * e)).norm();
}

bool Polygon::contains(const Eigen::Vector2d& p, double tol) const {
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (line_distance(i, p) < -tol) return false;
  }
  return true;
}

Eigen::Vector2d Polygon::lower_corner() const {
  Eigen::Vector2d lo = v_.front();
  for (const auto& v : v_) lo = lo.cwiseMin(v);
  return lo;
}

Eigen::Vector2d Polygon::upper_corner() const {
  Eigen::Vector2d hi = v_.front();
  for (const auto& v : v_) hi = hi.cwiseMax(v);
  return hi;
}

namespace {

Eigen::Vector2d as2(const Vec& p) {
  require_dim(p.size(), 2, "polygon point");
  return {p(0), p(1)};
}

}  // namespace

double smq(const Polygon& q, const Vec& p) {
  const Eigen::Vector2d x = as2(p);
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i) d = std::min(d, q.segment_distance(i, x));
  return q.contains(x) ? d : -d;
}

Polytope smq_gradient(const Polygon& q, const Vec& p) {
  const Eigen::Vector2d x = as2(p);
  std::vector<double> d(q.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i) {
    d[i] = q.segment_distance(i, x);
    best = std::min(best, d[i]);
  }
  std::vector<Vec> normals;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (d[i] - best <= tie_tol(best)) normals.push_back(Vec(q.inward_normal(i)));
  }
  return Polytope::hull(std::move(normals));
}

Graph Graph::path(int n) {
  Graph g;
  g.n = n;
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  return g;
}

Graph Graph::complete(int n) {
  Graph g;
  g.n = n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
  }
  return g;
}

Graph Graph::parse(const std::string& edge_list, int n) {
  Graph g;
  std::set<std::pair<int, int>> seen;
  std::stringstream ss(edge_list);
  std::string item;
  int largest = 0;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }), item.end());
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string::npos) throw ModelError("edge '" + item + "' is not of the form i-j");
    int i = 0, j = 0;
    try {
      std::size_t used_i = 0, used_j = 0;
      i = std::stoi(item.substr(0, dash), &used_i);
      j = std::stoi(item.substr(dash + 1), &used_j);
      if (used_i != dash || used_j != item.size() - dash - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ModelError("edge '" + item + "' is not of the form i-j");
    }
    if (i < 1 || j < 1) throw ModelError("edge '" + item + "': vertices are 1-indexed");
    if (i == j) throw ModelError("edge '" + item + "' is a self-loop");
    const std::pair<int, int> key{std::min(i, j) - 1, std::max(i, j) - 1};
    if (!seen.insert(key).second) throw ModelError("duplicate edge '" + item + "'");
    g.edges.emplace_back(key.first, key.second);
    largest = std::max({largest, i, j});
  }
  if (g.edges.empty()) throw ModelError("edge list is empty");
  if (n > 0 && largest > n) throw ModelError("edge list refers to vertex " + std::to_string(largest) +
                                             " but the graph has " + std::to_string(n) + " vertices");
  g.n = std::max(n, largest);
  return g;
}

Mat Graph::laplacian() const {
  Mat l = Mat::Zero(n, n);
  for (const auto& [i, j] : edges) {
    l(i, i) += 1;
    l(j, j) += 1;
    l(i, j) -= 1;
    l(j, i) -= 1;
  }
  return l;
}

bool Graph::connected() const {
  if (n <= 1) return true;
  std::vector<int> parent(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
  auto find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)];
    return v;
  };
  int components = n;
  for (const auto& [i, j] : edges) {
    const int a = find(i), b = find(j);
    if (a != b) {
      parent[static_cast<std::size_t>(a)] = b;
      --components;
    }
  }
  return components == 1;
}

double disagreement(const Graph& g, const Vec& p) {
  require_dim(p.size(), g.n, "disagreement");
  double s = 0.0;
  for (const auto& [i, j] : g.edges) s += (p(j) - p(i)) * (p(j) - p(i));
  return 0.5 * s;
}

double hsp(const Polygon& q, const Vec& points) {
  if (points.size() < 2 || points.size() % 2 != 0) throw ModelError("hsp needs at least one planar point");
  const auto n = points.size() / 2;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d pi = points.segment<2>(2 * i);
    for (Eigen::Index j = i + 1; j < n; ++j) best = std::min(best, 0.5 * (pi - points.segment<2>(2 * j)).norm());
    for (std::size_t e = 0; e < q.size(); ++e) best = std::min(best, q.segment_distance(e, pi));
  }
  return best;
}

NsFunction abs_function() { return NsFunction::abs(NsFunction::coordinate(1, 0)).labeled("abs"); }

NsFunction neg_abs_function() { return (-abs_function()).labeled("neg_abs"); }

NsFunction sqrt_abs_function() {
  NsFunction::AtomOptions o;
  o.singular = [](const Vec& x) { return std::abs(x(0)) <= 1e-14; };
  o.label = "sqrt_abs";
  NsFunction f = NsFunction::atom(
      1, [](const Vec& x) { return std::sqrt(std::abs(x(0))); },
      [](const Vec& x) {
        const double s = x(0) < 0 ? -1.0 : 1.0;
        return Vec::Constant(1, s / (2.0 * std::sqrt(std::abs(x(0)))));
      },
      std::move(o));
  return f.annotated(
      [](const Vec& x) -> std::optional<ProximalResult> {
        if (std::abs(x(0)) <= 1e-14) return ProximalResult::all_space();
        return std::nullopt;
      },
      "sqrt_abs");
}

NsFunction abs_sum_function(int dim) {
  NsFunction f = NsFunction::abs(NsFunction::coordinate(dim, 0));
  for (int k = 1; k < dim; ++k) f = f + NsFunction::abs(NsFunction::coordinate(dim, k));
  return f.labeled("abs_sum");
}

NsFunction half_squared_norm(int dim) {
  return NsFunction::quadratic(Mat::Identity(dim, dim), Vec::Zero(dim), 0.0).labeled("half_sq_norm");
}

NsFunction energy_oscillator_function() {
  Mat q = Mat::Zero(2, 2);
  q(1, 1) = 1.0;
  return (NsFunction::abs(NsFunction::coordinate(2, 0)) + NsFunction::quadratic(q, Vec::Zero(2), 0.0))
      .labeled("energy_oscillator");
}

namespace {

std::vector<NsFunction> edge_distances(const Polygon& q, int dim, int offset) {
  std::vector<NsFunction> out;
  for (std::size_t e = 0; e < q.size(); ++e) {
    const Eigen::Vector2d n = q.inward_normal(e);
    Vec a = Vec::Zero(dim);
    a(offset) = n.x();
    a(offset + 1) = n.y();
    out.push_back(NsFunction::affine(a, -n.dot(q.vertex(e))));
  }
  return out;
}

}  // namespace

NsFunction smq_function(const Polygon& q) { return NsFunction::min(edge_distances(q, 2, 0)).labeled("smq"); }

NsFunction neg_smq_function(const Polygon& q) { return (-smq_function(q)).labeled("neg_smq"); }

NsFunction hsp_function(const Polygon& q, int n) {
  if (n < 1) throw ModelError("hsp needs at least one point");
  const int dim = 2 * n;
  std::vector<NsFunction> terms;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Mat a = Mat::Zero(2, dim);
      a.block(0, 2 * i, 2, 2) = Mat::Identity(2, 2);
      a.block(0, 2 * j, 2, 2) = -Mat::Identity(2, 2);
      terms.push_back(0.5 * NsFunction::norm(a, Vec::Zero(2)));
    }
    auto edges = edge_distances(q, dim, 2 * i);
    terms.insert(terms.end(), edges.begin(), edges.end());
  }
  return NsFunction::min(std::move(terms)).labeled("hsp");
}

NsFunction disagreement_function(const Graph& g) {
  return NsFunction::quadratic(g.laplacian(), Vec::Zero(g.n), 0.0).labeled("disagreement");
}

NsFunction cart_lyapunov_function() {
  const NsFunction r2 = NsFunction::quadratic(2.0 * Mat::Identity(2, 2), Vec::Zero(2), 0.0);
  const NsFunction den = NsFunction::norm(Mat::Identity(2, 2), Vec::Zero(2)) +
                         NsFunction::abs(NsFunction::coordinate(2, 0));
  return (r2 / den).annotated(
      [](const Vec& x) -> std::optional<ProximalResult> {
        if (x.norm() <= 1e-12) {
          return ProximalResult::unsupported("proximal subdifferential at the origin contains a disk");
        }
        if (std::abs(x(0)) <= 1e-12 * (1.0 + x.norm())) return ProximalResult::empty();
        return std::nullopt;
      },
      "cart_lyapunov", [](const Vec&) { return 0.0; });
}

std::vector<std::string> catalog_function_names() {
  return {"abs", "neg_abs", "sqrt_abs", "abs_sum", "half_sq_norm", "energy_oscillator",
          "smq", "neg_smq", "hsp", "disagreement", "cart_lyapunov"};
}

NsFunction catalog_function(const std::string& name, int dim, const std::optional<Polygon>& polygon,
                            const std::optional<Graph>& graph) {
  auto fixed = [&](int want) {
    if (dim > 0 && dim != want) {
      throw DimensionMismatchError("function '" + name + "' has dimension " + std::to_string(want) +
                                   ", got " + std::to_string(dim));
    }
  };
  auto generic = [&]() {
    if (dim < 1) throw DimensionMismatchError("function '" + name + "' needs a positive dimension");
    return dim;
  };
  const Polygon q = polygon ? *polygon : Polygon::square(-1.0, 1.0);
  if (name == "abs") return fixed(1), abs_function();
  if (name == "neg_abs") return fixed(1), neg_abs_function();
  if (name == "sqrt_abs") return fixed(1), sqrt_abs_function();
  if (name == "abs_sum") return abs_sum_function(generic());
  if (name == "half_sq_norm") return half_squared_norm(generic());
  if (name == "energy_oscillator") return fixed(2), energy_oscillator_function();
  if (name == "smq") return fixed(2), smq_function(q);
  if (name == "neg_smq") return fixed(2), neg_smq_function(q);
  if (name == "hsp") {
    const int d = generic();
    if (d % 2 != 0) throw DimensionMismatchError("hsp needs an even dimension (planar points)");
    return hsp_function(q, d / 2);
  }
  if (name == "disagreement") {
    const Graph g = graph ? *graph : Graph::path(generic());
    if (dim > 0) fixed(g.n);
    return disagreement_function(g);
  }
  if (name == "cart_lyapunov") return fixed(2), cart_lyapunov_function();
  throw ModelError("unknown function '" + name + "'");
}

}  // namespace nsds
