#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adequacy/linear_program.hpp"

namespace adequacy {

// Residuals recomputed by direct sparse products; shares nothing with the solver.
struct SolutionCheck {
  double max_eq_residual = 0;      // max |A x - b|
  double max_eq_scaled = 0;        // max |A x - b| / max(1, |b|)
  double max_ineq_violation = 0;   // max (D x - e)+
  double max_ineq_scaled = 0;      // same, over max(1, |e|)
  double max_bound_violation = 0;
  double objective = 0;
  std::size_t worst_eq_row = 0;
  std::size_t worst_ineq_row = 0;

  bool feasible(double tol) const {
    return max_eq_scaled <= tol && max_ineq_scaled <= tol && max_bound_violation <= tol;
  }
};

inline SolutionCheck check_solution(const LinearProgram& lp, std::span<const double> x) {
  if (x.size() != lp.num_vars())
    throw std::invalid_argument("check_solution: solution has " + std::to_string(x.size()) +
                                " entries, program has " + std::to_string(lp.num_vars()));
  SolutionCheck out;
  const auto ax = lp.eq.multiply(x);
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const double r = std::abs(ax[i] - lp.eq_rhs[i]);
    if (r > out.max_eq_residual) {
      out.max_eq_residual = r;
      out.worst_eq_row = i;
    }
    out.max_eq_scaled = std::max(out.max_eq_scaled, r / std::max(1.0, std::abs(lp.eq_rhs[i])));
  }
  const auto dx = lp.ineq.multiply(x);
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const double v = std::max(0.0, dx[i] - lp.ineq_rhs[i]);
    if (v > out.max_ineq_violation) {
      out.max_ineq_violation = v;
      out.worst_ineq_row = i;
    }
    out.max_ineq_scaled = std::max(out.max_ineq_scaled, v / std::max(1.0, std::abs(lp.ineq_rhs[i])));
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    out.max_bound_violation = std::max(out.max_bound_violation, lp.lower[j] - x[j]);
    out.max_bound_violation = std::max(out.max_bound_violation, x[j] - lp.upper[j]);
  }
  out.objective = lp.objective(x);
  return out;
}

struct DualityCheck {
  double primal = 0;
  double dual = 0;
  double gap = 0;                   // primal - dual; >= 0 by weak duality
  double max_sign_violation = 0;    // max z_i for D rows (must be <= 0)
  double max_reduced_violation = 0; // reduced cost pushing toward an infinite bound

  double relative_gap() const { return std::abs(gap) / std::max(1.0, std::abs(primal)); }
};

// Dual of min c^T x, Ax=b, Dx<=e, l<=x<=u with multipliers (y, z <= 0):
//   b^T y + e^T z + sum_j min(d_j l_j, d_j u_j),  d = c - A^T y - D^T z.
inline DualityCheck duality_gap(const LinearProgram& lp, std::span<const double> x,
                                std::span<const double> eq_duals, std::span<const double> ineq_duals) {
  if (x.size() != lp.num_vars() || eq_duals.size() != lp.num_eq() || ineq_duals.size() != lp.num_ineq())
    throw std::invalid_argument("duality_gap: dimension mismatch");
  DualityCheck out;
  out.primal = lp.objective(x);
  auto aty = lp.eq.multiply_transposed(eq_duals, lp.num_vars());
  auto dtz = lp.ineq.multiply_transposed(ineq_duals, lp.num_vars());
  double dual = 0;
  for (std::size_t i = 0; i < lp.num_eq(); ++i) dual += lp.eq_rhs[i] * eq_duals[i];
  for (std::size_t i = 0; i < lp.num_ineq(); ++i) {
    dual += lp.ineq_rhs[i] * ineq_duals[i];
    out.max_sign_violation = std::max(out.max_sign_violation, ineq_duals[i]);
  }
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    const double d = lp.cost[j] - aty[j] - dtz[j];
    if (d >= 0) {
      if (lp.lower[j] == -kInf) out.max_reduced_violation = std::max(out.max_reduced_violation, d);
      else dual += d * lp.lower[j];
    } else {
      if (lp.upper[j] == kInf) out.max_reduced_violation = std::max(out.max_reduced_violation, -d);
      else dual += d * lp.upper[j];
    }
  }
  out.dual = dual;
  out.gap = out.primal - dual;
  return out;
}

}  // namespace adequacy
