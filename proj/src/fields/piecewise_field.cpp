#include <cmath>
#include <random>

#include "nsds/fields.hpp"

namespace nsds {

SmoothScalar affine_scalar(const Vec& a, double b) {
  return {[a, b](const Vec& x) { return a.dot(x) + b; }, [a](const Vec&) { return a; }};
}

std::string sign_string(const SignVector& sigma) {
  std::string s;
  s.reserve(sigma.size());
  for (auto v : sigma) s.push_back(v > 0 ? '+' : '-');
  return s;
}

SignVector parse_sign_string(const std::string& s) {
  SignVector sigma;
  for (char c : s) {
    if (c == '+') sigma.push_back(1);
    else if (c == '-') sigma.push_back(-1);
    else throw ModelError("invalid sign character '" + std::string(1, c) + "' in \"" + s + "\"");
  }
  return sigma;
}

PiecewiseField::PiecewiseField(int dim, std::vector<SmoothScalar> switches, CellLookup cells,
                               std::string name, int out_dim)
    : dim_(dim),
      out_dim_(out_dim < 0 ? dim : out_dim),
      switches_(std::move(switches)),
      cells_(std::move(cells)),
      name_(std::move(name)) {
  if (dim_ < 1) throw ModelError("PiecewiseField dimension must be positive");
  if (!cells_) throw ModelError("PiecewiseField needs a cell lookup");
}

PiecewiseField::PiecewiseField(int dim, std::vector<SmoothScalar> switches,
                               std::map<SignVector, VectorField> cells, std::string name)
    : PiecewiseField(
          dim, std::move(switches),
          [table = std::move(cells)](const SignVector& s, const Vec& x) -> std::optional<Vec> {
            auto it = table.find(s);
            if (it == table.end()) return std::nullopt;
            return it->second(x);
          },
          std::move(name)) {}

PiecewiseField PiecewiseField::smooth(int dim, VectorField field, std::string name) {
  return PiecewiseField(
      dim, {}, [field = std::move(field)](const SignVector&, const Vec& x) -> std::optional<Vec> {
        return field(x);
      },
      std::move(name));
}

std::optional<Vec> PiecewiseField::cell_value(const SignVector& sigma, const Vec& x) const {
  return cells_(sigma, x);
}

Vec PiecewiseField::require_cell(const SignVector& sigma, const Vec& x) const {
  auto v = cells_(sigma, x);
  if (!v) throw ModelError("no cell field declared for sign vector " + sign_string(sigma));
  return *v;
}

SignVector PiecewiseField::signs(const Vec& x) const {
  require_dim(x.size(), dim_, "PiecewiseField::signs");
  SignVector s(switches_.size());
  for (std::size_t i = 0; i < switches_.size(); ++i) s[i] = switches_[i].value(x) < 0 ? -1 : 1;
  return s;
}

std::vector<std::size_t> PiecewiseField::active_surfaces(const Vec& x, double tol) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < switches_.size(); ++i) {
    if (std::abs(switches_[i].value(x)) <= tol) out.push_back(i);
  }
  return out;
}

void PiecewiseField::validate(const Vec& lo, const Vec& hi, int samples, std::uint64_t seed) const {
  require_dim(lo.size(), dim_, "validate");
  require_dim(hi.size(), dim_, "validate");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < samples; ++s) {
    Vec x(dim_);
    for (int k = 0; k < dim_; ++k) x(k) = lo(k) + unit(rng) * (hi(k) - lo(k));
    if (!active_surfaces(x, default_tol(x)).empty()) continue;
    const SignVector sigma = signs(x);
    auto v = cell_value(sigma, x);
    if (!v) throw ModelError(name_ + ": point in no declared cell (sign vector " + sign_string(sigma) + ")");
    if (!v->allFinite()) throw ModelError(name_ + ": non-finite field value in cell " + sign_string(sigma));

    // Pull the sample onto each surface and evaluate the adjacent formulas.
    for (std::size_t i = 0; i < switches_.size(); ++i) {
      Vec y = x;
      for (int it = 0; it < 30; ++it) {
        const double g = switches_[i].value(y);
        const Vec grad = switches_[i].gradient(y);
        const double gg = grad.squaredNorm();
        if (gg < 1e-300 || std::abs(g) <= 1e-13) break;
        y -= (g / gg) * grad;
      }
      if (std::abs(switches_[i].value(y)) > default_tol(y)) continue;
      SignVector near = sigma;
      for (std::int8_t side : {std::int8_t{-1}, std::int8_t{1}}) {
        near[i] = side;
        auto w = cell_value(near, y);
        if (w && !w->allFinite()) {
          throw ModelError(name_ + ": cell " + sign_string(near) + " is not finite on surface " +
                           std::to_string(i + 1));
        }
      }
    }
  }
}

}  // namespace nsds
