#include <cmath>

#include "integrate/rk4.hpp"
#include "nsds/integrate.hpp"

namespace nsds {

Trajectory sample_and_hold(const ControlField& c, const Feedback& u, const PartitionSchedule& pi, const Vec& x0,
                           const IntegratorConfig& cfg) {
  cfg.validate();
  require_dim(x0.size(), c.dim, "sample_and_hold");
  Trajectory tr;
  Vec x = x0;
  tr.push(pi.breakpoints.front(), x, Mode::regular({}));
  for (std::size_t k = 0; k < pi.intervals(); ++k) {
    const double a = pi.breakpoints[k];
    const double b = pi.breakpoints[k + 1];
    const Vec held = u(a, x);
    require_dim(held.size(), c.control_dim, "sample_and_hold feedback");
    const auto field = [&](const Vec& y) { return c.dynamics(y, held); };
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / cfg.dt_max - 1e-9)));
    const double h = (b - a) / n;
    for (int s = 1; s <= n; ++s) {
      x = rk4_step(field, x, h);
      tr.push(s == n ? b : a + s * h, x, Mode::regular({}));
    }
  }
  return tr;
}

}  // namespace nsds
