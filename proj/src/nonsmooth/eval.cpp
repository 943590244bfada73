#include <cmath>
#include <limits>

#include "nonsmooth/internal.hpp"

namespace nsds {

double eval_node(const NsNode& n, const Vec& x) {
  switch (n.kind) {
    case NsKind::Atom:
      return n.value(x);
    case NsKind::Dilation:
      return n.scale * eval_node(*n.children[0], x);
    case NsKind::Sum: {
      double s = 0.0;
      for (const auto& c : n.children) s += eval_node(*c, x);
      return s;
    }
    case NsKind::Product:
      return eval_node(*n.children[0], x) * eval_node(*n.children[1], x);
    case NsKind::Quotient:
      return eval_node(*n.children[0], x) / eval_node(*n.children[1], x);
    case NsKind::Max: {
      double m = -std::numeric_limits<double>::infinity();
      for (const auto& c : n.children) m = std::max(m, eval_node(*c, x));
      return m;
    }
    case NsKind::Min: {
      double m = std::numeric_limits<double>::infinity();
      for (const auto& c : n.children) m = std::min(m, eval_node(*c, x));
      return m;
    }
    case NsKind::Abs:
      return std::abs(eval_node(*n.children[0], x));
    case NsKind::Norm:
      return (n.a * x + n.b).norm();
    case NsKind::Compose: {
      Vec y(static_cast<Eigen::Index>(n.children.size() - 1));
      for (std::size_t k = 1; k < n.children.size(); ++k) y(static_cast<Eigen::Index>(k - 1)) = eval_node(*n.children[k], x);
      return eval_node(*n.children[0], y);
    }
    case NsKind::Annotated: {
      const double v = eval_node(*n.children[0], x);
      if (!std::isfinite(v) && n.limit_value) return n.limit_value(x);
      return v;
    }
  }
  return 0.0;
}


}  // namespace nsds
