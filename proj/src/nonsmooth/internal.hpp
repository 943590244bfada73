#pragma once

#include "nsds/nonsmooth.hpp"

namespace nsds {

double eval_node(const NsNode& n, const Vec& x);

/// Pointwise first-order information of a node.
struct NodeInfo {
  double value = 0.0;
  Polytope grad;
  bool exact = true;
  bool regular = true;
  bool neg_regular = true;
  bool c1 = true;
  bool c2 = true;
};

NodeInfo analyze_node(const NsNode& n, const Vec& x);

}  // namespace nsds
