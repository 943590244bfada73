#include <algorithm>
#include <cmath>
#include <limits>

#include "nsds/geometry.hpp"

namespace nsds {
namespace {

constexpr double kPivotEps = 1e-11;

struct Tableau {
  Mat t;                      // m rows, cols + 1 (last column is the right-hand side)
  std::vector<int> basis;     // basic column per row
  std::vector<bool> allowed;  // columns that may enter the basis

  int rows() const { return static_cast<int>(t.rows()); }
  int cols() const { return static_cast<int>(t.cols()) - 1; }
  double rhs(int i) const { return t(i, cols()); }

  void pivot(int r, int c) {
    t.row(r) /= t(r, c);
    for (int i = 0; i < rows(); ++i) {
      if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
    }
    basis[static_cast<std::size_t>(r)] = c;
  }

  void drop_row(int r) {
    Mat next(rows() - 1, t.cols());
    int k = 0;
    for (int i = 0; i < rows(); ++i) {
      if (i != r) next.row(k++) = t.row(i);
    }
    t = std::move(next);
    basis.erase(basis.begin() + r);
  }
};

enum class PhaseOutcome { Optimal, Unbounded };

// Maximizes costᵀx over the tableau with Bland's anti-cycling rule.
PhaseOutcome run_simplex(Tableau& tab, const Vec& cost) {
  const int n = tab.cols();
  const int m = tab.rows();
  const int max_iter = 50 * (n + m) + 1000;
  for (int iter = 0; iter < max_iter; ++iter) {
    int enter = -1;
    for (int j = 0; j < n && enter < 0; ++j) {
      if (!tab.allowed[static_cast<std::size_t>(j)]) continue;
      double reduced = cost(j);
      for (int i = 0; i < m; ++i) reduced -= cost(tab.basis[static_cast<std::size_t>(i)]) * tab.t(i, j);
      if (reduced > kPivotEps) enter = j;
    }
    if (enter < 0) return PhaseOutcome::Optimal;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double a = tab.t(i, enter);
      if (a > kPivotEps) best = std::min(best, tab.rhs(i) / a);
    }
    if (!std::isfinite(best)) return PhaseOutcome::Unbounded;
    int leave = -1;
    const double band = 1e-12 * (1.0 + std::abs(best));
    for (int i = 0; i < m; ++i) {
      const double a = tab.t(i, enter);
      if (a <= kPivotEps || tab.rhs(i) / a > best + band) continue;
      if (leave < 0 ||
          tab.basis[static_cast<std::size_t>(i)] < tab.basis[static_cast<std::size_t>(leave)]) {
        leave = i;
      }
    }
    tab.pivot(leave, enter);
  }
  return PhaseOutcome::Optimal;
}

}  // namespace

LpResult solve_lp(const Mat& a_le, const Vec& b_le, const Mat& a_eq, const Vec& b_eq,
                  const Vec& c) {
  const int n = static_cast<int>(c.size());
  const int m_le = static_cast<int>(a_le.rows());
  const int m_eq = static_cast<int>(a_eq.rows());
  if ((m_le > 0 && a_le.cols() != n) || (m_eq > 0 && a_eq.cols() != n) ||
      b_le.size() != m_le || b_eq.size() != m_eq) {
    throw DimensionMismatchError("solve_lp: inconsistent constraint shapes");
  }
  const int m = m_le + m_eq;

  // Column layout: originals, one slack/surplus per inequality, artificials.
  int n_art = m_eq;
  for (int i = 0; i < m_le; ++i) {
    if (b_le(i) < 0) ++n_art;
  }
  const int slack0 = n;
  const int art0 = n + m_le;
  const int total = art0 + n_art;

  Tableau tab;
  tab.t = Mat::Zero(m, total + 1);
  tab.basis.assign(static_cast<std::size_t>(m), -1);
  tab.allowed.assign(static_cast<std::size_t>(total), true);

  int next_art = art0;
  double bmax = 0.0;
  for (int i = 0; i < m_le; ++i) {
    const double sign = b_le(i) < 0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = sign * a_le.row(i);
    tab.t(i, slack0 + i) = sign;
    tab.t(i, total) = sign * b_le(i);
    bmax = std::max(bmax, std::abs(b_le(i)));
    if (sign > 0) {
      tab.basis[static_cast<std::size_t>(i)] = slack0 + i;
    } else {
      tab.t(i, next_art) = 1.0;
      tab.basis[static_cast<std::size_t>(i)] = next_art++;
    }
  }
  for (int k = 0; k < m_eq; ++k) {
    const int i = m_le + k;
    const double sign = b_eq(k) < 0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = sign * a_eq.row(k);
    tab.t(i, total) = sign * b_eq(k);
    bmax = std::max(bmax, std::abs(b_eq(k)));
    tab.t(i, next_art) = 1.0;
    tab.basis[static_cast<std::size_t>(i)] = next_art++;
  }

  LpResult result;
  if (n_art > 0) {
    Vec phase1 = Vec::Zero(total);
    phase1.tail(n_art).setConstant(-1.0);
    run_simplex(tab, phase1);
    double infeasibility = 0.0;
    for (int i = 0; i < tab.rows(); ++i) {
      if (tab.basis[static_cast<std::size_t>(i)] >= art0) infeasibility += tab.rhs(i);
    }
    if (infeasibility > 1e-9 * (1.0 + bmax)) {
      result.status = LpStatus::Infeasible;
      return result;
    }
    // Drive remaining artificials out of the basis; rows with no usable
    // pivot are redundant.
    for (int i = tab.rows() - 1; i >= 0; --i) {
      if (tab.basis[static_cast<std::size_t>(i)] < art0) continue;
      int col = -1;
      double best = 1e-9;
      for (int j = 0; j < art0; ++j) {
        if (std::abs(tab.t(i, j)) > best) {
          best = std::abs(tab.t(i, j));
          col = j;
        }
      }
      if (col >= 0) {
        tab.pivot(i, col);
      } else {
        tab.drop_row(i);
      }
    }
    for (int j = art0; j < total; ++j) tab.allowed[static_cast<std::size_t>(j)] = false;
  }

  Vec phase2 = Vec::Zero(total);
  phase2.head(n) = c;
  if (run_simplex(tab, phase2) == PhaseOutcome::Unbounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }
  result.status = LpStatus::Optimal;
  result.x = Vec::Zero(n);
  for (int i = 0; i < tab.rows(); ++i) {
    const int b = tab.basis[static_cast<std::size_t>(i)];
    if (b < n) result.x(b) = std::max(0.0, tab.rhs(i));
  }
  result.value = c.dot(result.x);
  return result;
}

}  // namespace nsds
