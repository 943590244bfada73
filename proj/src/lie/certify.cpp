#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nsds/lie.hpp"

namespace nsds {

GridSpec GridSpec::box(const Vec& lo, const Vec& hi, int per_axis) {
  require_dim(hi.size(), lo.size(), "GridSpec::box");
  GridSpec g;
  g.lo = lo;
  g.hi = hi;
  g.counts.assign(static_cast<std::size_t>(lo.size()), per_axis);
  return g;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double parse_number(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ModelError("grid spec: bad number '" + s + "' in '" + context + "'");
  }
}

}  // namespace

GridSpec GridSpec::parse(const std::string& spec) {
  const auto parts = split(spec, ';');
  if (parts.empty() || parts.front().empty()) throw ModelError("grid spec is empty");
  GridSpec g;
  const auto axes = split(parts.front(), ',');
  g.lo.resize(static_cast<Eigen::Index>(axes.size()));
  g.hi.resize(static_cast<Eigen::Index>(axes.size()));
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto f = split(axes[i], ':');
    if (f.size() != 3) throw ModelError("grid axis '" + axes[i] + "' is not lo:hi:n");
    g.lo(static_cast<Eigen::Index>(i)) = parse_number(f[0], axes[i]);
    g.hi(static_cast<Eigen::Index>(i)) = parse_number(f[1], axes[i]);
    const double n = parse_number(f[2], axes[i]);
    if (n < 1 || n != std::floor(n)) throw ModelError("grid axis '" + axes[i] + "' needs a positive integer count");
    if (g.hi(static_cast<Eigen::Index>(i)) < g.lo(static_cast<Eigen::Index>(i))) {
      throw ModelError("grid axis '" + axes[i] + "' has hi < lo");
    }
    g.counts.push_back(static_cast<int>(n));
  }
  for (std::size_t p = 1; p < parts.size(); ++p) {
    const std::string prefix = "exclude=";
    if (parts[p].rfind(prefix, 0) != 0) throw ModelError("grid option '" + parts[p] + "' is not exclude=axis:center:halfwidth");
    const auto f = split(parts[p].substr(prefix.size()), ':');
    if (f.size() != 3) throw ModelError("grid option '" + parts[p] + "' is not exclude=axis:center:halfwidth");
    Band b;
    const double axis = parse_number(f[0], parts[p]);
    if (axis < 1 || axis > g.dim() || axis != std::floor(axis)) throw ModelError("grid exclusion axis out of range in '" + parts[p] + "'");
    b.axis = static_cast<int>(axis) - 1;
    b.center = parse_number(f[1], parts[p]);
    b.half_width = parse_number(f[2], parts[p]);
    g.bands.push_back(b);
  }
  return g;
}

std::string GridSpec::to_string() const {
  std::ostringstream s;
  s.precision(17);
  for (int i = 0; i < dim(); ++i) {
    if (i) s << ",";
    s << lo(i) << ":" << hi(i) << ":" << counts[static_cast<std::size_t>(i)];
  }
  for (const auto& b : bands) s << ";exclude=" << b.axis + 1 << ":" << b.center << ":" << b.half_width;
  return s.str();
}

std::vector<Vec> GridSpec::points() const {
  const int d = dim();
  if (static_cast<int>(counts.size()) != d) throw DimensionMismatchError("GridSpec: counts and bounds differ in length");
  std::size_t total = 1;
  for (int c : counts) total *= static_cast<std::size_t>(c);
  std::vector<Vec> out;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (std::size_t n = 0; n < total; ++n) {
    Vec x(d);
    for (int k = 0; k < d; ++k) {
      const int c = counts[static_cast<std::size_t>(k)];
      x(k) = c == 1 ? 0.5 * (lo(k) + hi(k)) : lo(k) + (hi(k) - lo(k)) * idx[static_cast<std::size_t>(k)] / (c - 1);
    }
    bool excluded = false;
    for (const auto& b : bands) excluded = excluded || std::abs(x(b.axis) - b.center) <= b.half_width;
    if (!excluded) out.push_back(x);
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[static_cast<std::size_t>(k)] < counts[static_cast<std::size_t>(k)]) break;
      idx[static_cast<std::size_t>(k)] = 0;
    }
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "Certified";
    case Verdict::Falsified: return "Falsified";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

std::string to_string(Theorem t) {
  switch (t) {
    case Theorem::Thm1: return "thm1";
    case Theorem::Thm1Strict: return "thm1p";
    case Theorem::Thm2: return "thm2";
    case Theorem::Thm3: return "thm3";
    case Theorem::Thm3Strict: return "thm3p";
    case Theorem::Thm4: return "thm4";
    case Theorem::Prop13Weak: return "prop13w";
    case Theorem::Prop13Strong: return "prop13s";
  }
  return "unknown";
}

Theorem parse_theorem(const std::string& name) {
  for (Theorem t : {Theorem::Thm1, Theorem::Thm1Strict, Theorem::Thm2, Theorem::Thm3, Theorem::Thm3Strict,
                    Theorem::Thm4, Theorem::Prop13Weak, Theorem::Prop13Strong}) {
    if (to_string(t) == name) return t;
  }
  throw ModelError("unknown theorem '" + name + "'");
}

namespace {

enum class LieKind { Generalized, Lower, Upper };

/// Per-sample outcome of one clause.
struct Sample {
  enum class State { Pass, Fail, Unknown } state = State::Pass;
  double value = 0.0;
  std::string detail;
};

using SampleCheck = std::function<Sample(const Vec&)>;

/// Runs `check` on every sample concurrently and reports the lowest-index
/// failure, else the lowest-index unknown.
ClauseResult run_clause(const std::string& name, const std::vector<Vec>& samples, const SampleCheck& check,
                        unsigned threads) {
  std::vector<Sample> results(samples.size());
  parallel_for(
      samples.size(),
      [&](std::size_t i) {
        try {
          results[i] = check(samples[i]);
        } catch (const Error& e) {
          results[i] = {Sample::State::Unknown, 0.0, e.name() + ": " + e.what()};
        }
      },
      threads);
  ClauseResult c;
  c.name = name;
  for (Sample::State wanted : {Sample::State::Fail, Sample::State::Unknown}) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (results[i].state != wanted) continue;
      c.verdict = wanted == Sample::State::Fail ? Verdict::Falsified : Verdict::Inconclusive;
      c.witness = samples[i];
      c.value = results[i].value;
      c.detail = results[i].detail;
      return c;
    }
  }
  return c;
}

/// Sup of the requested Lie set at x (−∞ when empty).
double lie_sup(LieKind kind, const NsFunction& f, const SetValuedMap& F, const Vec& x, std::string* why) {
  if (kind == LieKind::Generalized) {
    const GradientResult g = generalized_gradient(f, x);
    if (!g.exact) {
      *why = "generalized gradient is only an outer bound";
      return std::numeric_limits<double>::quiet_NaN();
    }
    return set_lie_derivative(F(x), g.polytope).sup();
  }
  const ProximalResult p = proximal_subdifferential(f, x);
  if (p.kind == ProximalResult::Kind::Unsupported) {
    *why = "proximal subdifferential unsupported: " + p.reason;
    return std::numeric_limits<double>::quiet_NaN();
  }
  const LieBounds b = lower_upper_lie(F(x), p);
  return kind == LieKind::Lower ? b.lower.sup() : b.upper.sup();
}

SampleCheck lie_check(LieKind kind, const NsFunction& f, const SetValuedMap& F, double bound,
                      const std::function<bool(const Vec&)>& relaxed, double relaxed_bound) {
  return [=](const Vec& x) {
    std::string why;
    const double s = lie_sup(kind, f, F, x, &why);
    if (std::isnan(s)) return Sample{Sample::State::Unknown, 0.0, why};
    const double limit = relaxed && relaxed(x) ? relaxed_bound : bound;
    if (s <= limit) return Sample{Sample::State::Pass, s, {}};
    std::ostringstream d;
    d.precision(17);
    d << "Lie sup " << s << " exceeds " << limit;
    return Sample{Sample::State::Fail, s, d.str()};
  };
}

bool regular_everywhere(const NsFunction& f, const std::vector<Vec>& samples, unsigned threads) {
  std::vector<char> ok(samples.size(), 0);
  parallel_for(
      samples.size(),
      [&](std::size_t i) {
        try {
          const GradientResult g = generalized_gradient(f, samples[i]);
          ok[i] = g.exact && g.regular;
        } catch (const Error&) {
          ok[i] = 0;
        }
      },
      threads);
  return std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
}

void finish(StabilityReport& r) {
  r.verdict = Verdict::Certified;
  for (Verdict wanted : {Verdict::Falsified, Verdict::Inconclusive}) {
    for (const auto& c : r.clauses) {
      if (c.verdict != wanted) continue;
      r.verdict = wanted;
      r.failed_clause = c.name;
      r.witness = c.witness;
      return;
    }
  }
}

}  // namespace

StabilityReport monotonicity_verdict(Monotonicity kind, const NsFunction& f, const SetValuedMap& F,
                                     const std::vector<Vec>& samples, const CertifyOptions& opt) {
  StabilityReport r;
  r.theorem = kind == Monotonicity::Weak ? Theorem::Prop13Weak : Theorem::Prop13Strong;
  r.checked_points = samples.size();
  r.tol = opt.tol;
  r.margin = opt.margin;
  LieKind lk = kind == Monotonicity::Weak ? LieKind::Lower : LieKind::Upper;
  // For regular f the generalized Lie derivative bounds d/dt f(x(t)) along
  // every solution without continuity hypotheses on F.
  if (kind == Monotonicity::Strong && regular_everywhere(f, samples, opt.threads)) lk = LieKind::Generalized;
  const char* name = lk == LieKind::Lower   ? "sup_lower_lie_nonpositive"
                     : lk == LieKind::Upper ? "sup_upper_lie_nonpositive"
                                            : "max_lie_nonpositive";
  r.clauses.push_back(run_clause(name, samples, lie_check(lk, f, F, opt.tol, {}, 0.0), opt.threads));
  finish(r);
  log(LogLevel::Info, "monotonicity " + to_string(r.theorem) + ": " + to_string(r.verdict) + " on " +
                          std::to_string(samples.size()) + " samples");
  return r;
}

StabilityReport monotonicity_verdict(Monotonicity kind, const NsFunction& f, const SetValuedMap& F,
                                     const GridSpec& grid, const CertifyOptions& opt) {
  StabilityReport r = monotonicity_verdict(kind, f, F, grid.points(), opt);
  r.grid = grid.to_string();
  return r;
}

StabilityReport lyapunov_certify(Theorem theorem, const NsFunction& f, const SetValuedMap& F, const Vec& x_e,
                                 const std::vector<Vec>& samples, const CertifyOptions& opt) {
  if (theorem == Theorem::Prop13Weak || theorem == Theorem::Prop13Strong) {
    return monotonicity_verdict(theorem == Theorem::Prop13Weak ? Monotonicity::Weak : Monotonicity::Strong, f, F,
                                samples, opt);
  }
  require_dim(x_e.size(), f.dim(), "lyapunov_certify equilibrium");
  StabilityReport r;
  r.theorem = theorem;
  r.checked_points = samples.size();
  r.tol = opt.tol;
  r.margin = opt.margin;

  const bool generalized = theorem == Theorem::Thm1 || theorem == Theorem::Thm1Strict || theorem == Theorem::Thm2;
  const bool strict = theorem == Theorem::Thm1Strict || theorem == Theorem::Thm3Strict;
  const bool positivity = theorem != Theorem::Thm2 && theorem != Theorem::Thm4;
  auto at_equilibrium = [x_e, radius = opt.equilibrium_radius](const Vec& x) { return (x - x_e).norm() <= radius; };

  {
    ClauseResult c;
    c.name = "equilibrium";
    try {
      const Polytope fe = F(x_e);
      c.value = distance(fe, Vec::Zero(x_e.size()));
      if (c.value > 1e-9) {
        c.verdict = Verdict::Falsified;
        c.witness = x_e;
        c.detail = "0 is not in F(x_e)";
      }
    } catch (const Error& e) {
      c.verdict = Verdict::Inconclusive;
      c.witness = x_e;
      c.detail = e.name() + ": " + e.what();
    }
    r.clauses.push_back(c);
  }

  if (generalized) {
    r.clauses.push_back(run_clause(
        "regularity", samples,
        [f](const Vec& x) {
          const GradientResult g = generalized_gradient(f, x);
          if (g.exact && g.regular) return Sample{};
          return Sample{Sample::State::Unknown, 0.0, "regularity not established by the gradient rules"};
        },
        opt.threads));
  }

  if (positivity) {
    const double fe = f(x_e);
    r.clauses.push_back(run_clause(
        "positivity", samples,
        [f, fe, at_equilibrium](const Vec& x) {
          if (at_equilibrium(x)) return Sample{};
          const double v = f(x) - fe;
          if (v > 0) return Sample{Sample::State::Pass, v, {}};
          return Sample{Sample::State::Fail, v, "f(x) - f(x_e) is not positive"};
        },
        opt.threads));
  }

  const LieKind lk = generalized ? LieKind::Generalized : LieKind::Upper;
  std::string name = generalized ? "max_lie" : "sup_upper_lie";
  name += strict ? "_negative" : "_nonpositive";
  const double bound = strict ? -opt.margin : opt.tol;
  r.clauses.push_back(run_clause(name, samples,
                                 lie_check(lk, f, F, bound, strict ? std::function<bool(const Vec&)>(at_equilibrium)
                                                                   : std::function<bool(const Vec&)>(),
                                           opt.tol),
                                 opt.threads));
  finish(r);
  log(LogLevel::Info, "lyapunov " + to_string(theorem) + ": " + to_string(r.verdict) + " on " +
                          std::to_string(samples.size()) + " samples");
  return r;
}

StabilityReport lyapunov_certify(Theorem theorem, const NsFunction& f, const SetValuedMap& F, const Vec& x_e,
                                 const GridSpec& grid, const CertifyOptions& opt) {
  StabilityReport r = lyapunov_certify(theorem, f, F, x_e, grid.points(), opt);
  r.grid = grid.to_string();
  return r;
}

std::vector<Vec> invariance_candidate_set(const NsFunction& f, const SetValuedMap& F,
                                          const std::vector<Vec>& samples, double tol, InvarianceKind kind,
                                          double closure_radius, unsigned threads) {
  std::vector<char> keep(samples.size(), 0);
  parallel_for(
      samples.size(),
      [&](std::size_t i) {
        const Vec& x = samples[i];
        if (kind == InvarianceKind::Generalized) {
          keep[i] = set_lie_derivative(F(x), generalized_gradient(f, x).polytope).contains(0.0, tol);
        } else {
          keep[i] = lower_upper_lie(F(x), proximal_subdifferential(f, x)).upper.contains(0.0, tol);
        }
      },
      threads);
  std::vector<Vec> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    bool near = keep[i] != 0;
    for (std::size_t j = 0; !near && closure_radius > 0 && j < samples.size(); ++j) {
      near = keep[j] && (samples[i] - samples[j]).norm() <= closure_radius;
    }
    if (near) out.push_back(samples[i]);
  }
  return out;
}

}  // namespace nsds
