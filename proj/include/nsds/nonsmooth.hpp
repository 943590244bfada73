#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nsds/common.hpp"
#include "nsds/geometry.hpp"

namespace nsds {

/// Value of a proximal subdifferential query.
struct ProximalResult {
  enum class Kind { Set, Empty, AllSpace, Unsupported };
  Kind kind = Kind::Unsupported;
  Polytope set;
  std::string reason;

  static ProximalResult of(Polytope p) { return {Kind::Set, std::move(p), {}}; }
  static ProximalResult empty() { return {Kind::Empty, {}, {}}; }
  static ProximalResult all_space() { return {Kind::AllSpace, {}, {}}; }
  static ProximalResult unsupported(std::string why) { return {Kind::Unsupported, {}, std::move(why)}; }
};

std::string to_string(ProximalResult::Kind kind);

/// Closed-form proximal value supplied by a catalog entry; nullopt defers
/// to the generic rules.
using ProximalOverride = std::function<std::optional<ProximalResult>(const Vec&)>;

enum class NsKind { Atom, Dilation, Sum, Product, Quotient, Max, Min, Abs, Norm, Compose, Annotated };

/// Immutable expression-tree node. Only the fields relevant to `kind` are set.
struct NsNode {
  NsKind kind = NsKind::Atom;
  int dim = 0;
  bool convex = false;
  bool concave = false;
  bool affine = false;
  std::string label;

  // Atom
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
  /// Points where the atom is not differentiable (and not Lipschitz).
  std::function<bool(const Vec&)> singular;
  bool c2 = true;

  // Dilation
  double scale = 1.0;

  // Norm: ‖A x + b‖
  Mat a;
  Vec b;

  /// Operands. Compose: children[0] is the outer function of dimension
  /// children.size() - 1, the rest are the inner functions.
  std::vector<std::shared_ptr<const NsNode>> children;

  // Annotated
  ProximalOverride proximal;
  /// Continuous extension used where the child evaluates to a non-finite value.
  std::function<double(const Vec&)> limit_value;
};

/// Scalar function built from smooth atoms with +, scalar·, ×, /, max, min,
/// abs, Euclidean norm and composition.
class NsFunction {
 public:
  struct AtomOptions {
    std::function<Mat(const Vec&)> hessian;
    std::function<bool(const Vec&)> singular;
    bool convex = false;
    bool concave = false;
    bool c2 = true;
    bool affine = false;
    std::string label;
  };

  NsFunction() = default;
  explicit NsFunction(std::shared_ptr<const NsNode> node) : node_(std::move(node)) {}

  static NsFunction atom(int dim, std::function<double(const Vec&)> value,
                         std::function<Vec(const Vec&)> gradient, AtomOptions options);
  static NsFunction atom(int dim, std::function<double(const Vec&)> value, std::function<Vec(const Vec&)> gradient);
  static NsFunction affine(const Vec& a, double b);
  static NsFunction constant(int dim, double c);
  static NsFunction coordinate(int dim, int k);
  /// ½ xᵀQx + bᵀx + c with symmetric Q.
  static NsFunction quadratic(const Mat& q, const Vec& b, double c);
  /// ‖A x + b‖.
  static NsFunction norm(const Mat& a, const Vec& b);
  static NsFunction max(std::vector<NsFunction> fs);
  static NsFunction min(std::vector<NsFunction> fs);
  static NsFunction abs(const NsFunction& f);
  static NsFunction dilation(double s, const NsFunction& f);
  static NsFunction compose(const NsFunction& outer, std::vector<NsFunction> inner);

  /// Same function with a closed-form proximal subdifferential attached and,
  /// optionally, the value at removable singularities of the tree.
  NsFunction annotated(ProximalOverride proximal, std::string label,
                       std::function<double(const Vec&)> limit_value = {}) const;
  NsFunction labeled(std::string label) const;

  int dim() const { return node_ ? node_->dim : 0; }
  bool convex() const { return node_ && node_->convex; }
  const std::string& label() const { return node_->label; }
  double operator()(const Vec& x) const;
  const NsNode& node() const { return *node_; }
  const std::shared_ptr<const NsNode>& ptr() const { return node_; }

 private:
  std::shared_ptr<const NsNode> node_;
};

NsFunction operator+(const NsFunction& a, const NsFunction& b);
NsFunction operator-(const NsFunction& a, const NsFunction& b);
NsFunction operator-(const NsFunction& a);
NsFunction operator*(double s, const NsFunction& a);
NsFunction operator*(const NsFunction& a, const NsFunction& b);
NsFunction operator/(const NsFunction& a, const NsFunction& b);

/// Tie band used for max/min active sets.
inline double tie_tol(double fmax) { return 1e-9 * (1.0 + std::abs(fmax)); }

/// Generalized gradient with the exactness and regularity of the rules used.
struct GradientResult {
  Polytope polytope;
  bool exact = true;
  /// f is regular at x (sufficient conditions only).
  bool regular = false;
  /// -f is regular at x.
  bool neg_regular = false;
  /// f is continuously differentiable near x.
  bool smooth = false;
  /// f is twice continuously differentiable near x.
  bool twice_smooth = false;
  double value = 0.0;
};

GradientResult generalized_gradient(const NsFunction& f, const Vec& x);

ProximalResult proximal_subdifferential(const NsFunction& f, const Vec& x);

/// Hessian of a function that is C² at x; analytic where atoms provide it,
/// central differences of the gradient otherwise.
Mat hessian(const NsFunction& f, const Vec& x);

struct DescentDirection {
  Vec direction;
  bool critical = false;
};

/// −LN(∂f(x)); zero and critical when 0 ∈ ∂f(x).
DescentDirection descent_direction(const NsFunction& f, const Vec& x);

struct DescentCheck {
  bool holds = true;
  std::optional<double> witness;
};

/// Checks f(x − t LN) ≤ f(x) − (t/2)‖LN‖² for each t.
DescentCheck descent_inequality_check(const NsFunction& f, const Vec& x, const std::vector<double>& steps);

/// Convex polygon with counterclockwise vertices.
class Polygon {
 public:
  explicit Polygon(std::vector<Eigen::Vector2d> vertices);
  static Polygon square(double lo, double hi);

  std::size_t size() const { return v_.size(); }
  const std::vector<Eigen::Vector2d>& vertices() const { return v_; }
  const Eigen::Vector2d& vertex(std::size_t i) const { return v_[i]; }
  /// Edge i runs from vertex i to vertex i+1.
  Eigen::Vector2d inward_normal(std::size_t i) const;
  /// Signed distance to the line of edge i, positive inside.
  double line_distance(std::size_t i, const Eigen::Vector2d& p) const;
  /// Euclidean distance to the segment of edge i.
  double segment_distance(std::size_t i, const Eigen::Vector2d& p) const;
  bool contains(const Eigen::Vector2d& p, double tol = 0.0) const;
  Eigen::Vector2d lower_corner() const;
  Eigen::Vector2d upper_corner() const;

 private:
  std::vector<Eigen::Vector2d> v_;
};

/// sm_Q(p): distance to the boundary, negated outside Q.
double smq(const Polygon& q, const Vec& p);
/// Hull of inward normals of the edges attaining sm_Q within tie_tol.
Polytope smq_gradient(const Polygon& q, const Vec& p);

/// Undirected simple graph on vertices 0..n-1.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  static Graph path(int n);
  static Graph complete(int n);
  /// Parses "1-2,2-3" (1-indexed). n defaults to the largest index.
  static Graph parse(const std::string& edge_list, int n = 0);
  Mat laplacian() const;
  bool connected() const;
};

/// Φ_G(p) = ½ Σ_(i,j)∈E (p_j − p_i)².
double disagreement(const Graph& g, const Vec& p);

/// H_SP(p) for n planar points stacked as (x1, y1, x2, y2, ...).
double hsp(const Polygon& q, const Vec& points);

// Catalog.
NsFunction abs_function();
NsFunction neg_abs_function();
NsFunction sqrt_abs_function();
NsFunction abs_sum_function(int dim);
NsFunction half_squared_norm(int dim);
/// |x1| + x2²/2.
NsFunction energy_oscillator_function();
/// Minimum of the signed edge-line distances; equals sm_Q on Q.
NsFunction smq_function(const Polygon& q);
NsFunction neg_smq_function(const Polygon& q);
NsFunction hsp_function(const Polygon& q, int n);
NsFunction disagreement_function(const Graph& g);
/// (x1² + x2²)/(√(x1² + x2²) + |x1|).
NsFunction cart_lyapunov_function();

/// Catalog lookup by name for CLI and config use. `dim` sizes the
/// dimension-generic entries; smq/neg_smq/hsp use `polygon` (default
/// [-1,1]²) and disagreement uses `graph` (default path on `dim` vertices).
NsFunction catalog_function(const std::string& name, int dim, const std::optional<Polygon>& polygon = {},
                            const std::optional<Graph>& graph = {});
std::vector<std::string> catalog_function_names();

}  // namespace nsds
