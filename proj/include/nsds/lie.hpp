#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nsds/fields.hpp"
#include "nsds/geometry.hpp"
#include "nsds/nonsmooth.hpp"

namespace nsds {

/// Closed interval of Lie-derivative values, possibly empty. Comparisons use
/// max ∅ = sup ∅ = −∞.
struct LieInterval {
  enum class Kind { Empty, Interval, UnboundedBelow };
  Kind kind = Kind::Empty;
  double lo = 0.0;
  double hi = 0.0;

  static LieInterval empty() { return {}; }
  static LieInterval interval(double lo, double hi);
  static LieInterval unbounded_below(double hi) { return {Kind::UnboundedBelow, -inf(), hi}; }

  bool is_empty() const { return kind == Kind::Empty; }
  /// Largest element; −∞ when empty.
  double sup() const { return is_empty() ? -inf() : hi; }
  /// Smallest element; +∞ when empty.
  double inf_value() const;
  bool contains(double a, double tol = 0.0) const;

 private:
  static double inf() { return std::numeric_limits<double>::infinity(); }
};

std::string to_string(const LieInterval& l);

/// {a : ∃v ∈ fset with ζᵀv = a for all ζ ∈ grad}.
LieInterval set_lie_derivative(const Polytope& fset, const Polytope& grad);

struct LieBounds {
  LieInterval lower;
  LieInterval upper;
};

/// Interval hulls of {min_{v∈F} ζᵀv : ζ ∈ prox} and {max_{v∈F} ζᵀv : ζ ∈ prox}.
LieBounds lower_upper_lie(const Polytope& fset, const Polytope& prox);
/// Same with the special proximal values: Empty gives two empty sets, AllSpace
/// is resolved only when 0 ∈ F, Unsupported throws UnsupportedError.
LieBounds lower_upper_lie(const Polytope& fset, const ProximalResult& prox);

/// Point-to-polytope map F(x).
using SetValuedMap = std::function<Polytope(const Vec&)>;

SetValuedMap filippov_map(const PiecewiseField& f);
SetValuedMap control_map(const ControlField& c);
/// x ↦ −∂f(x), the Filippov set of −LN(∂f).
SetValuedMap neg_gradient_map(const NsFunction& f);
/// Filippov set of −∇f/‖∇f‖. At critical points of a C² f an inscribed
/// cross-polytope of the unit ball on the Hessian range stands in.
SetValuedMap normalized_gradient_map(const NsFunction& f);
/// Filippov set of −sign(∇f) (componentwise): [−1,1] on vanishing components.
SetValuedMap signed_gradient_map(const NsFunction& f);

/// Exclusion band |x_axis − center| ≤ half_width.
struct Band {
  int axis = 0;
  double center = 0.0;
  double half_width = 0.0;
};

/// Tensor grid over a box with optional exclusion bands.
struct GridSpec {
  Vec lo;
  Vec hi;
  std::vector<int> counts;
  std::vector<Band> bands;

  static GridSpec box(const Vec& lo, const Vec& hi, int per_axis);
  /// "lo:hi:n,lo:hi:n[;exclude=axis:center:halfwidth]...", axes 1-indexed.
  static GridSpec parse(const std::string& spec);
  std::string to_string() const;
  int dim() const { return static_cast<int>(lo.size()); }
  /// Grid points outside every band, in lexicographic order.
  std::vector<Vec> points() const;
};

enum class Verdict { Certified, Falsified, Inconclusive };
std::string to_string(Verdict v);

enum class Theorem { Thm1, Thm1Strict, Thm2, Thm3, Thm3Strict, Thm4, Prop13Weak, Prop13Strong };
std::string to_string(Theorem t);
/// Parses thm1|thm1p|thm2|thm3|thm3p|thm4|prop13w|prop13s.
Theorem parse_theorem(const std::string& name);

struct ClauseResult {
  std::string name;
  Verdict verdict = Verdict::Certified;
  std::optional<Vec> witness;
  /// Offending value at the witness (Lie sup, f value, ...).
  double value = 0.0;
  std::string detail;
};

/// Grid-level outcome; Certified means every sample passed, not a proof.
struct StabilityReport {
  Verdict verdict = Verdict::Certified;
  Theorem theorem = Theorem::Thm1;
  std::size_t checked_points = 0;
  std::optional<Vec> witness;
  std::string failed_clause;
  std::vector<ClauseResult> clauses;
  std::string grid;
  double tol = 0.0;
  double margin = 0.0;
};

struct CertifyOptions {
  /// Slack on ≤ 0 comparisons of Lie values.
  double tol = 1e-9;
  /// Strict inequalities require values < −margin.
  double margin = 1e-6;
  /// Samples this close to x_e are treated as the equilibrium.
  double equilibrium_radius = 1e-12;
  unsigned threads = 0;
};

enum class Monotonicity { Weak, Strong };

/// sup L̲ ≤ tol (weak) or sup L̄ ≤ tol (strong) at every sample. When f is
/// regular with an exact generalized gradient at every sample, the strong
/// check uses max L̃ ≤ tol instead, which needs no continuity of F.
StabilityReport monotonicity_verdict(Monotonicity kind, const NsFunction& f, const SetValuedMap& F,
                                     const std::vector<Vec>& samples, const CertifyOptions& opt = {});
StabilityReport monotonicity_verdict(Monotonicity kind, const NsFunction& f, const SetValuedMap& F,
                                     const GridSpec& grid, const CertifyOptions& opt = {});

/// Checks the hypotheses of the chosen theorem on the samples: equilibrium,
/// regularity (generalized-gradient theorems), positivity of f − f(x_e) and
/// the Lie-derivative sign condition. Thm2/Thm4 check the monotonicity
/// hypothesis of the invariance principles.
StabilityReport lyapunov_certify(Theorem theorem, const NsFunction& f, const SetValuedMap& F, const Vec& x_e,
                                 const std::vector<Vec>& samples, const CertifyOptions& opt = {});
StabilityReport lyapunov_certify(Theorem theorem, const NsFunction& f, const SetValuedMap& F, const Vec& x_e,
                                 const GridSpec& grid, const CertifyOptions& opt = {});

enum class InvarianceKind { Generalized, Upper };

/// Samples where 0 ∈ L̃_F f (Generalized) or 0 ∈ L̄_F f (Upper), within tol.
/// With closure_radius > 0, samples within that distance of a hit are kept
/// too, as a sampled stand-in for the closure.
std::vector<Vec> invariance_candidate_set(const NsFunction& f, const SetValuedMap& F,
                                          const std::vector<Vec>& samples, double tol = 1e-9,
                                          InvarianceKind kind = InvarianceKind::Generalized,
                                          double closure_radius = 0.0, unsigned threads = 0);

}  // namespace nsds
