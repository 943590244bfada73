#pragma once

#include "nsds/common.hpp"

namespace nsds {

/// One classical Runge-Kutta step of size h for ẋ = v(x).
template <class Field>
Vec rk4_step(const Field& v, const Vec& x, double h) {
  const Vec k1 = v(x);
  const Vec k2 = v(Vec(x + 0.5 * h * k1));
  const Vec k3 = v(Vec(x + 0.5 * h * k2));
  const Vec k4 = v(Vec(x + h * k3));
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace nsds
