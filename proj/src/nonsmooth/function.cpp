#include <cmath>
#include <limits>

#include "nsds/nonsmooth.hpp"
#include "nonsmooth/internal.hpp"

namespace nsds {
namespace {

using NodePtr = std::shared_ptr<const NsNode>;

NodePtr make(NsNode node) { return std::make_shared<const NsNode>(std::move(node)); }

void require_same_dim(const std::vector<NsFunction>& fs, const char* what) {
  if (fs.empty()) throw ModelError(std::string(what) + " needs at least one operand");
  for (const auto& f : fs) {
    if (!f.ptr()) throw ModelError(std::string(what) + ": null operand");
    require_dim(f.dim(), fs.front().dim(), what);
  }
}

}  // namespace

std::string to_string(ProximalResult::Kind kind) {
  switch (kind) {
    case ProximalResult::Kind::Set: return "polytope";
    case ProximalResult::Kind::Empty: return "empty";
    case ProximalResult::Kind::AllSpace: return "all_space";
    case ProximalResult::Kind::Unsupported: return "unsupported";
  }
  return "unknown";
}

NsFunction NsFunction::atom(int dim, std::function<double(const Vec&)> value,
                            std::function<Vec(const Vec&)> gradient, AtomOptions options) {
  if (dim < 1) throw ModelError("atom dimension must be positive");
  NsNode n;
  n.kind = NsKind::Atom;
  n.dim = dim;
  n.value = std::move(value);
  n.gradient = std::move(gradient);
  n.hessian = std::move(options.hessian);
  n.singular = std::move(options.singular);
  n.c2 = options.c2;
  n.affine = options.affine;
  n.convex = options.convex || options.affine;
  n.concave = options.concave || options.affine;
  n.label = options.label.empty() ? "atom" : options.label;
  return NsFunction(make(std::move(n)));
}

NsFunction NsFunction::atom(int dim, std::function<double(const Vec&)> value,
                            std::function<Vec(const Vec&)> gradient) {
  return atom(dim, std::move(value), std::move(gradient), AtomOptions());
}

NsFunction NsFunction::affine(const Vec& a, double b) {
  AtomOptions o;
  o.affine = true;
  o.label = "affine";
  const auto d = a.size();
  o.hessian = [d](const Vec&) { return Mat::Zero(d, d); };
  return atom(static_cast<int>(d), [a, b](const Vec& x) { return a.dot(x) + b; },
              [a](const Vec&) { return a; }, std::move(o));
}

NsFunction NsFunction::constant(int dim, double c) { return affine(Vec::Zero(dim), c).labeled("constant"); }

NsFunction NsFunction::coordinate(int dim, int k) {
  Vec a = Vec::Zero(dim);
  a(k) = 1.0;
  return affine(a, 0.0).labeled("x" + std::to_string(k + 1));
}

NsFunction NsFunction::quadratic(const Mat& q, const Vec& b, double c) {
  if (q.rows() != q.cols() || q.rows() != b.size()) throw DimensionMismatchError("quadratic: shape mismatch");
  const Mat sym = 0.5 * (q + q.transpose());
  AtomOptions o;
  o.hessian = [sym](const Vec&) { return sym; };
  const Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  o.convex = eig.eigenvalues().minCoeff() >= -1e-12;
  o.concave = eig.eigenvalues().maxCoeff() <= 1e-12;
  o.affine = sym.cwiseAbs().maxCoeff() == 0.0;
  o.label = "quadratic";
  return atom(static_cast<int>(b.size()), [sym, b, c](const Vec& x) { return 0.5 * x.dot(sym * x) + b.dot(x) + c; },
              [sym, b](const Vec& x) { return Vec(sym * x + b); }, std::move(o));
}

NsFunction NsFunction::norm(const Mat& a, const Vec& b) {
  if (a.rows() != b.size()) throw DimensionMismatchError("norm: shape mismatch");
  NsNode n;
  n.kind = NsKind::Norm;
  n.dim = static_cast<int>(a.cols());
  n.a = a;
  n.b = b;
  n.convex = true;
  n.label = "norm";
  return NsFunction(make(std::move(n)));
}

NsFunction NsFunction::max(std::vector<NsFunction> fs) {
  require_same_dim(fs, "max");
  if (fs.size() == 1) return fs.front();
  NsNode n;
  n.kind = NsKind::Max;
  n.dim = fs.front().dim();
  n.convex = true;
  for (const auto& f : fs) {
    n.convex = n.convex && f.convex();
    n.children.push_back(f.ptr());
  }
  n.label = "max";
  return NsFunction(make(std::move(n)));
}

NsFunction NsFunction::min(std::vector<NsFunction> fs) {
  require_same_dim(fs, "min");
  if (fs.size() == 1) return fs.front();
  NsNode n;
  n.kind = NsKind::Min;
  n.dim = fs.front().dim();
  n.concave = true;
  for (const auto& f : fs) {
    n.concave = n.concave && f.node().concave;
    n.children.push_back(f.ptr());
  }
  n.label = "min";
  return NsFunction(make(std::move(n)));
}

NsFunction NsFunction::abs(const NsFunction& f) {
  NsNode n;
  n.kind = NsKind::Abs;
  n.dim = f.dim();
  n.convex = f.node().affine;
  n.children.push_back(f.ptr());
  n.label = "abs";
  return NsFunction(make(std::move(n)));
}

NsFunction NsFunction::dilation(double s, const NsFunction& f) {
  NsNode n;
  n.kind = NsKind::Dilation;
  n.dim = f.dim();
  n.scale = s;
  n.affine = f.node().affine;
  n.convex = n.affine || (s >= 0 && f.convex()) || (s <= 0 && f.node().concave);
  n.concave = n.affine || (s >= 0 && f.node().concave) || (s <= 0 && f.convex());
  n.children.push_back(f.ptr());
  n.label = "dilation";
  return NsFunction(make(std::move(n)));
}

NsFunction NsFunction::compose(const NsFunction& outer, std::vector<NsFunction> inner) {
  require_same_dim(inner, "compose");
  require_dim(outer.dim(), static_cast<Eigen::Index>(inner.size()), "compose outer");
  NsNode n;
  n.kind = NsKind::Compose;
  n.dim = inner.front().dim();
  n.children.push_back(outer.ptr());
  for (const auto& f : inner) n.children.push_back(f.ptr());
  n.label = "compose";
  return NsFunction(make(std::move(n)));
}

NsFunction NsFunction::annotated(ProximalOverride proximal, std::string label,
                                 std::function<double(const Vec&)> limit_value) const {
  NsNode n;
  n.kind = NsKind::Annotated;
  n.dim = dim();
  n.convex = convex();
  n.concave = node().concave;
  n.affine = node().affine;
  n.children.push_back(node_);
  n.proximal = std::move(proximal);
  n.limit_value = std::move(limit_value);
  n.label = std::move(label);
  return NsFunction(make(std::move(n)));
}

NsFunction NsFunction::labeled(std::string label) const {
  NsNode n = *node_;
  n.label = std::move(label);
  return NsFunction(make(std::move(n)));
}

double NsFunction::operator()(const Vec& x) const {
  require_dim(x.size(), dim(), "NsFunction evaluation");
  return eval_node(*node_, x);
}

NsFunction operator+(const NsFunction& a, const NsFunction& b) {
  require_dim(b.dim(), a.dim(), "sum");
  NsNode n;
  n.kind = NsKind::Sum;
  n.dim = a.dim();
  n.convex = a.convex() && b.convex();
  n.concave = a.node().concave && b.node().concave;
  n.affine = a.node().affine && b.node().affine;
  for (const auto& f : {a, b}) {
    if (f.node().kind == NsKind::Sum) {
      n.children.insert(n.children.end(), f.node().children.begin(), f.node().children.end());
    } else {
      n.children.push_back(f.ptr());
    }
  }
  n.label = "sum";
  return NsFunction(std::make_shared<const NsNode>(std::move(n)));
}

NsFunction operator-(const NsFunction& a) { return NsFunction::dilation(-1.0, a); }
NsFunction operator-(const NsFunction& a, const NsFunction& b) { return a + (-b); }
NsFunction operator*(double s, const NsFunction& a) { return NsFunction::dilation(s, a); }

NsFunction operator*(const NsFunction& a, const NsFunction& b) {
  require_dim(b.dim(), a.dim(), "product");
  NsNode n;
  n.kind = NsKind::Product;
  n.dim = a.dim();
  n.children = {a.ptr(), b.ptr()};
  n.label = "product";
  return NsFunction(std::make_shared<const NsNode>(std::move(n)));
}

NsFunction operator/(const NsFunction& a, const NsFunction& b) {
  require_dim(b.dim(), a.dim(), "quotient");
  NsNode n;
  n.kind = NsKind::Quotient;
  n.dim = a.dim();
  n.children = {a.ptr(), b.ptr()};
  n.label = "quotient";
  return NsFunction(std::make_shared<const NsNode>(std::move(n)));
}

}  // namespace nsds
