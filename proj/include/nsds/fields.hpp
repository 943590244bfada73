#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsds/common.hpp"
#include "nsds/geometry.hpp"

namespace nsds {

/// Smooth scalar function with analytic gradient.
struct SmoothScalar {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

/// Affine switching function a·x + b.
SmoothScalar affine_scalar(const Vec& a, double b);

using VectorField = std::function<Vec(const Vec&)>;

/// Entries are +1 or -1, one per switching function.
using SignVector = std::vector<std::int8_t>;

/// Encodes a sign vector as a string of '+' and '-'.
std::string sign_string(const SignVector& sigma);
SignVector parse_sign_string(const std::string& s);

/// Piecewise-continuous vector field: switching functions g_1..g_m and one
/// smooth field per nonempty sign cell {σ_i g_i > 0}. Cell fields are
/// evaluated by formula on the cell closure, which gives the continuous
/// extension to adjacent surfaces.
class PiecewiseField {
 public:
  /// Returns the cell field at x, or nullopt when the cell is not declared.
  using CellLookup = std::function<std::optional<Vec>(const SignVector&, const Vec&)>;

  PiecewiseField() = default;
  PiecewiseField(int dim, std::vector<SmoothScalar> switches, CellLookup cells,
                 std::string name = "", int out_dim = -1);
  PiecewiseField(int dim, std::vector<SmoothScalar> switches,
                 std::map<SignVector, VectorField> cells, std::string name = "");

  /// A continuous field, i.e. no switching functions.
  static PiecewiseField smooth(int dim, VectorField field, std::string name = "");

  int dim() const { return dim_; }
  int out_dim() const { return out_dim_; }
  std::size_t surface_count() const { return switches_.size(); }
  const std::string& name() const { return name_; }

  double switch_value(std::size_t i, const Vec& x) const { return switches_[i].value(x); }
  Vec switch_gradient(std::size_t i, const Vec& x) const { return switches_[i].gradient(x); }
  const std::vector<SmoothScalar>& switches() const { return switches_; }

  /// Cell field value at x (continuous extension); nullopt if undeclared.
  std::optional<Vec> cell_value(const SignVector& sigma, const Vec& x) const;
  /// Cell field value or ModelError.
  Vec require_cell(const SignVector& sigma, const Vec& x) const;

  /// Signs of the switching functions at x; zero maps to +1.
  SignVector signs(const Vec& x) const;
  /// Surfaces with |g_i(x)| ≤ tol.
  std::vector<std::size_t> active_surfaces(const Vec& x, double tol) const;

  /// Default active-surface tolerance 1e-8 (1 + ‖x‖).
  static double default_tol(const Vec& x) { return 1e-8 * (1.0 + x.norm()); }

  /// Checks by sampling the box that every point off all surfaces lies in
  /// a declared cell with a finite value, and that cell formulas stay finite
  /// at points pulled onto each surface. Throws ModelError on failure.
  void validate(const Vec& lo, const Vec& hi, int samples = 2000, std::uint64_t seed = 1) const;

 private:
  int dim_ = 0;
  int out_dim_ = 0;
  std::vector<SmoothScalar> switches_;
  CellLookup cells_;
  std::string name_;
};

/// Filippov set-valued map at x: hull of the continuous extensions of all
/// cells adjacent to x. tol < 0 selects PiecewiseField::default_tol(x).
Polytope filippov_set(const PiecewiseField& f, const Vec& x, double tol = -1.0);

enum class SurfaceKind { Continuity, Crossing, Sliding, Repulsive, Tangent };
std::string to_string(SurfaceKind kind);

struct SurfaceClassification {
  SurfaceKind kind = SurfaceKind::Continuity;
  std::vector<std::size_t> active_surfaces;
  Polytope witness;
  /// Single active surface only: ∇g·X_a and ∇g·X_b, where a is the cell on
  /// the g < 0 side and b on the g > 0 side.
  double alpha = 0.0;
  double beta = 0.0;
  SignVector cell_a;
  SignVector cell_b;
};

SurfaceClassification classify_point(const PiecewiseField& f, const Vec& x, double tol = -1.0);

/// The two cells adjacent across surface i at x and their normal rates.
struct SurfacePair {
  SignVector cell_a;  // σ_i = -1
  SignVector cell_b;  // σ_i = +1
  Vec field_a;
  Vec field_b;
  Vec normal;  // ∇g_i(x)
  double alpha = 0.0;
  double beta = 0.0;
};

/// Throws DegenerateSurface when ‖∇g_i(x)‖ is below tolerance and
/// ModelError when either side is undeclared.
SurfacePair adjacent_fields(const PiecewiseField& f, const Vec& x, std::size_t i);

/// Classification with respect to one given surface, using cells a and b
/// that agree with x's signs off that surface.
SurfaceClassification classify_surface(const PiecewiseField& f, const Vec& x, std::size_t i,
                                       double tol = -1.0);

struct SlidingVector {
  Vec velocity;
  /// Weight on X_a (the g < 0 side).
  double lambda = 0.5;
};

/// Filippov sliding vector λX_a + (1−λ)X_b tangent to surface i.
SlidingVector sliding_field(const PiecewiseField& f, const Vec& x, std::size_t i, double tol = -1.0);

/// Control system ẋ = X(x, u), u ∈ U.
struct ControlField {
  int dim = 0;
  int control_dim = 0;
  std::function<Vec(const Vec&, const Vec&)> dynamics;
  Polytope control_set;
  bool affine_in_control = true;
  std::string name;
};

/// G[X](x) = hull{X(x, u_j) : u_j vertex of U}.
Polytope control_inclusion(const ControlField& c, const Vec& x);

struct LipschitzVerdict {
  bool violated = false;
  Vec y;
  Vec y_prime;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Monte-Carlo falsifier of [X(y)−X(y')]ᵀ(y−y') ≤ L‖y−y'‖² on B(x, eps).
LipschitzVerdict one_sided_lipschitz_test(const PiecewiseField& f, const Vec& x, double eps,
                                          double lipschitz, int samples, std::uint64_t seed = 1,
                                          double tol = 1e-12);

struct TransversalityVerdict {
  bool holds = false;
  SurfaceKind kind = SurfaceKind::Continuity;
  double alpha = 0.0;
  double beta = 0.0;
};

/// Per point: whether one side's field points strictly into the other cell.
std::vector<TransversalityVerdict> transversality_test(const PiecewiseField& f,
                                                       const std::vector<Vec>& points,
                                                       double tol = -1.0);

/// Field x ↦ Z(x) X(x) with Z continuous (d_out × m matrix field).
PiecewiseField matrix_product(const std::function<Mat(const Vec&)>& z, const PiecewiseField& f);
/// Sum X1 + X2 on the product of the two cell structures.
PiecewiseField field_sum(const PiecewiseField& a, const PiecewiseField& b);
/// Stacked field (X1, X2).
PiecewiseField field_stack(const PiecewiseField& a, const PiecewiseField& b);

}  // namespace nsds
