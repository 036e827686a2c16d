#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adequacy/basis_factor.hpp"
#include "adequacy/linear_program.hpp"

namespace adequacy {

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit };

constexpr std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::iteration_limit: return "iteration_limit";
  }
  return "?";
}

enum class PivotRule {
  devex,    // largest reduced cost relative to its devex weight, Bland after a stall
  dantzig,  // largest reduced cost, Bland after a stall
  bland,    // lowest eligible index throughout
};

struct SolveOptions {
  double feas_tol = 1e-7;
  double opt_tol = 1e-7;
  std::int64_t max_iters = 0;  // 0: 200 * (rows + cols)
  PivotRule rule = PivotRule::devex;
  int stall_window = 50;
  int refactor_interval = 30;
};

struct Solution {
  SolveStatus status = SolveStatus::infeasible;
  std::vector<double> x;
  double objective = 0;
  CostSplit costs;
  // Lagrange multipliers for A x = b and D x <= e; reduced cost c - A^T y - D^T z.
  // At an optimum z <= 0.
  std::vector<double> eq_duals;
  std::vector<double> ineq_duals;
  std::int64_t iterations = 0;
  std::int64_t bland_iterations = 0;
  std::string message;
};

namespace detail {

class BoundedSimplex {
 public:
  BoundedSimplex(const LinearProgram& lp, const SolveOptions& opt) : lp_(lp), opt_(opt) {}

  Solution run() {
    Solution sol;
    if (!presolve(sol)) return finish_without_basis(sol, SolveStatus::infeasible);
    setup();
    max_iters_ = opt_.max_iters > 0 ? opt_.max_iters
                                     : 200 * static_cast<std::int64_t>(m_ + lp_.num_vars());
    refactor();

    // Phase 1: drive artificials to zero.
    double start_infeas = 0;
    for (int j = first_art_; j < total_; ++j) start_infeas += x_[j];
    if (n_art_ > 0 && start_infeas > 0) {
      cost_.assign(total_, 0.0);
      for (int j = first_art_; j < total_; ++j) cost_[j] = 1.0;
      auto st = iterate();
      if (st == SolveStatus::iteration_limit) return finish(sol, st);
      refactor();
      double infeas = 0;
      for (int j = first_art_; j < total_; ++j) infeas += std::max(0.0, x_[j]);
      if (infeas > opt_.feas_tol * std::max(1.0, rhs_scale_)) {
        sol.message = "phase 1 ended with residual infeasibility " + csv::format(infeas);
        return finish(sol, SolveStatus::infeasible);
      }
    }
    if (n_art_ > 0) {
      for (int j = first_art_; j < total_; ++j) {
        ub_[j] = 0.0;
        if (state_[j] != State::basic) {
          x_[j] = 0.0;
          state_[j] = State::lower;
        }
      }
    }

    // Phase 2, on costs normalized to unit max magnitude.
    cost_.assign(total_, 0.0);
    cost_scale_ = 0;
    for (double c : lp_.cost) cost_scale_ = std::max(cost_scale_, std::abs(c));
    if (!(cost_scale_ > 0)) cost_scale_ = 1.0;
    for (std::size_t j = 0; j < lp_.num_vars(); ++j) cost_[j] = lp_.cost[j] / cost_scale_;
    auto st = iterate();
    refactor();
    if (st == SolveStatus::optimal) extract_duals(sol);
    return finish(sol, st);
  }

 private:
  enum class State : unsigned char { basic, lower, upper, free_zero };

  struct Row {
    bool equality;
    std::size_t source;  // row index in A or D
  };

  bool presolve(Solution& sol) {
    fold_ = fold_singleton_rows(lp_);
    const double tol = opt_.feas_tol;
    for (std::size_t j = 0; j < lp_.num_vars(); ++j) {
      if (fold_.lower[j] > fold_.upper[j] + tol * std::max(1.0, std::abs(fold_.upper[j]))) {
        sol.message = "bounds of " + lp_.column_names[j] + " conflict";
        return false;
      }
      if (fold_.lower[j] > fold_.upper[j]) fold_.upper[j] = fold_.lower[j];
      if (fold_.lower[j] == -kInf && fold_.upper[j] == kInf) continue;
    }
    for (std::size_t i = 0; i < lp_.num_eq(); ++i) {
      if (fold_.eq_folded[i]) continue;
      if (lp_.eq.row(i).empty()) {
        if (std::abs(lp_.eq_rhs[i]) > tol) {
          sol.message = "empty equality row " + lp_.eq_names[i] + " has non-zero right-hand side";
          return false;
        }
        continue;
      }
      rows_.push_back({true, i});
    }
    for (std::size_t i = 0; i < lp_.num_ineq(); ++i) {
      if (fold_.ineq_folded[i]) continue;
      if (lp_.ineq.row(i).empty()) {
        if (lp_.ineq_rhs[i] < -tol) {
          sol.message = "empty inequality row " + lp_.ineq_names[i] + " is violated";
          return false;
        }
        continue;
      }
      rows_.push_back({false, i});
    }
    return true;
  }

  void setup() {
    m_ = static_cast<int>(rows_.size());
    const int n = static_cast<int>(lp_.num_vars());
    n_struct_ = n;

    // Column-compressed copy of the kept rows.
    std::vector<int> count(static_cast<std::size_t>(n) + 1, 0);
    for (const auto& r : rows_)
      for (const auto& e : (r.equality ? lp_.eq : lp_.ineq).row(r.source)) ++count[static_cast<std::size_t>(e.col) + 1];
    col_start_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (int j = 0; j < n; ++j) col_start_[j + 1] = col_start_[j] + count[j + 1];
    row_idx_.resize(static_cast<std::size_t>(col_start_[n]));
    val_.resize(static_cast<std::size_t>(col_start_[n]));
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    rhs_.resize(static_cast<std::size_t>(m_));
    rhs_scale_ = 0;
    for (int i = 0; i < m_; ++i) {
      const auto& r = rows_[i];
      rhs_[i] = r.equality ? lp_.eq_rhs[r.source] : lp_.ineq_rhs[r.source];
      rhs_scale_ = std::max(rhs_scale_, std::abs(rhs_[i]));
      for (const auto& e : (r.equality ? lp_.eq : lp_.ineq).row(r.source)) {
        const int k = fill[e.col]++;
        row_idx_[k] = i;
        val_[k] = e.value;
      }
    }

    lb_.assign(fold_.lower.begin(), fold_.lower.end());
    ub_.assign(fold_.upper.begin(), fold_.upper.end());
    x_.assign(static_cast<std::size_t>(n), 0.0);
    state_.assign(static_cast<std::size_t>(n), State::lower);
    for (int j = 0; j < n; ++j) {
      if (lb_[j] > -kInf) {
        x_[j] = lb_[j];
        state_[j] = State::lower;
      } else if (ub_[j] < kInf) {
        x_[j] = ub_[j];
        state_[j] = State::upper;
      } else {
        x_[j] = 0.0;
        state_[j] = State::free_zero;
      }
    }

    std::vector<double> residual(rhs_);
    for (int j = 0; j < n; ++j)
      if (x_[j] != 0.0)
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) residual[row_idx_[k]] -= val_[k] * x_[j];

    head_.assign(static_cast<std::size_t>(m_), -1);
    crash_singletons(residual);

    // Logical columns: one slack per inequality row, then artificials where
    // neither a singleton nor the slack can start basic and feasible.
    logical_row_.clear();
    logical_sign_.clear();
    int next = n;
    for (int i = 0; i < m_; ++i) {
      if (rows_[i].equality) continue;
      logical_row_.push_back(i);
      logical_sign_.push_back(1.0);
      lb_.push_back(0.0);
      ub_.push_back(kInf);
      if (residual[i] >= 0) {
        x_.push_back(residual[i]);
        state_.push_back(State::basic);
        head_[i] = next;
      } else {
        x_.push_back(0.0);
        state_.push_back(State::lower);
      }
      ++next;
    }
    first_art_ = next;
    for (int i = 0; i < m_; ++i) {
      if (head_[i] >= 0) continue;
      const double sign = residual[i] >= 0 ? 1.0 : -1.0;
      logical_row_.push_back(i);
      logical_sign_.push_back(sign);
      lb_.push_back(0.0);
      ub_.push_back(kInf);
      x_.push_back(std::abs(residual[i]));
      state_.push_back(State::basic);
      head_[i] = next++;
    }
    total_ = next;
    n_art_ = total_ - first_art_;
    cost_.assign(static_cast<std::size_t>(total_), 0.0);
  }

  // An equality row whose residual can be absorbed by structural columns that
  // appear in no other row takes the last of them as its basic variable. The
  // earlier ones move to a bound on the way, so the start stays primal feasible.
  void crash_singletons(std::vector<double>& residual) {
    std::vector<std::vector<int>> singles(static_cast<std::size_t>(m_));
    for (int j = 0; j < n_struct_; ++j) {
      if (col_start_[j + 1] - col_start_[j] != 1 || lb_[j] == ub_[j]) continue;
      const int i = row_idx_[col_start_[j]];
      if (rows_[i].equality && val_[col_start_[j]] != 0.0) singles[i].push_back(j);
    }
    for (int i = 0; i < m_; ++i) {
      for (int j : singles[i]) {
        const double a = val_[col_start_[j]];
        const double target = x_[j] + residual[i] / a;
        const double moved = std::clamp(target, lb_[j], ub_[j]);
        residual[i] -= a * (moved - x_[j]);
        x_[j] = moved;
        if (moved == target) {
          residual[i] = 0.0;
          state_[j] = State::basic;
          head_[i] = j;
          break;
        }
        state_[j] = moved == ub_[j] ? State::upper : State::lower;
      }
    }
  }

  // Column j scattered into a dense vector of length m.
  void load_column(int j, std::vector<double>& v) const {
    v.assign(static_cast<std::size_t>(m_), 0.0);
    if (j < n_struct_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) v[row_idx_[k]] = val_[k];
    } else {
      const auto l = static_cast<std::size_t>(j - n_struct_);
      v[logical_row_[l]] = logical_sign_[l];
    }
  }

  double column_dot(int j, const std::vector<double>& y) const {
    if (j < n_struct_) {
      double acc = 0;
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) acc += val_[k] * y[row_idx_[k]];
      return acc;
    }
    const auto l = static_cast<std::size_t>(j - n_struct_);
    return logical_sign_[l] * y[logical_row_[l]];
  }

  void refactor() {
    if (m_ == 0) return;
    std::vector<int> start{0}, idx;
    std::vector<double> val;
    idx.reserve(static_cast<std::size_t>(m_) * 3);
    val.reserve(static_cast<std::size_t>(m_) * 3);
    for (int p = 0; p < m_; ++p) {
      const int j = head_[p];
      if (j < n_struct_) {
        idx.insert(idx.end(), row_idx_.begin() + col_start_[j], row_idx_.begin() + col_start_[j + 1]);
        val.insert(val.end(), val_.begin() + col_start_[j], val_.begin() + col_start_[j + 1]);
      } else {
        const auto l = static_cast<std::size_t>(j - n_struct_);
        idx.push_back(logical_row_[l]);
        val.push_back(logical_sign_[l]);
      }
      start.push_back(static_cast<int>(idx.size()));
    }
    if (!factor_.factor(m_, start, idx, val)) throw std::runtime_error("simplex: basis factorization failed");

    // Recompute basic values from the nonbasic ones.
    std::vector<double> r(rhs_);
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == State::basic || x_[j] == 0.0) continue;
      if (j < n_struct_) {
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) r[row_idx_[k]] -= val_[k] * x_[j];
      } else {
        const auto l = static_cast<std::size_t>(j - n_struct_);
        r[logical_row_[l]] -= logical_sign_[l] * x_[j];
      }
    }
    factor_.ftran(r);
    for (int p = 0; p < m_; ++p) x_[head_[p]] = r[p];
  }

  double phase_objective() const {
    double acc = 0;
    for (int j = 0; j < total_; ++j) acc += cost_[j] * x_[j];
    return acc;
  }

  void compute_duals(std::vector<double>& y) const {
    y.resize(static_cast<std::size_t>(m_));
    for (int p = 0; p < m_; ++p) y[p] = cost_[head_[p]];
    factor_.btran(y);
  }

  // Reduced costs of all nonbasic columns from fresh duals.
  void reprice(std::vector<double>& y, std::vector<double>& d) const {
    compute_duals(y);
    for (int j = 0; j < total_; ++j) d[j] = state_[j] == State::basic ? 0.0 : cost_[j] - column_dot(j, y);
  }

  SolveStatus iterate() {
    if (m_ == 0) return price_only();
    const auto m = static_cast<std::size_t>(m_);
    std::vector<double> y(m), alpha(m), rho(m), d(static_cast<std::size_t>(total_));
    std::vector<double> weight(static_cast<std::size_t>(total_), 1.0);
    const double dtol = opt_.opt_tol;
    const double ftol = opt_.feas_tol;
    const double piv_tol = 1e-9;
    const bool devex = opt_.rule == PivotRule::devex;
    bool bland = opt_.rule == PivotRule::bland;
    int stalled = 0;
    double obj = phase_objective();
    reprice(y, d);
    bool fresh = true;

    for (;;) {
      if (iterations_ >= max_iters_) return SolveStatus::iteration_limit;
      if (static_cast<int>(factor_.eta_count()) >= opt_.refactor_interval) {
        refactor();
        reprice(y, d);
        fresh = true;
      }

      // Pricing on the updated reduced costs; lowest index wins ties.
      int q = -1;
      int dir = 0;
      double best = 0;
      for (int j = 0; j < total_; ++j) {
        const State st = state_[j];
        if (st == State::basic) continue;
        if (st != State::free_zero && lb_[j] == ub_[j]) continue;
        const double dj = d[j];
        int want = 0;
        if (dj < -dtol && (st == State::lower || st == State::free_zero)) want = +1;
        else if (dj > dtol && (st == State::upper || st == State::free_zero)) want = -1;
        if (!want) continue;
        if (bland) {
          q = j;
          dir = want;
          break;
        }
        const double score = devex ? dj * dj / weight[j] : std::abs(dj);
        if (score > best) {
          best = score;
          q = j;
          dir = want;
        }
      }
      if (q < 0) {
        // Confirm optimality against reduced costs free of update drift.
        if (fresh) return SolveStatus::optimal;
        reprice(y, d);
        fresh = true;
        continue;
      }

      load_column(q, alpha);
      factor_.ftran(alpha);

      // Ratio test over basic variables; Harris two-pass unless in Bland mode.
      int leave = -1;
      double step = kInf;
      if (bland) {
        for (int i = 0; i < m_; ++i) {
          const double a = dir * alpha[i];
          if (std::abs(a) <= piv_tol) continue;
          const int b = head_[i];
          double ratio;
          if (a > 0) {
            if (lb_[b] == -kInf) continue;
            ratio = (x_[b] - lb_[b]) / a;
          } else {
            if (ub_[b] == kInf) continue;
            ratio = (ub_[b] - x_[b]) / -a;
          }
          ratio = std::max(ratio, 0.0);
          if (ratio < step - 1e-12 || (leave >= 0 && std::abs(ratio - step) <= 1e-12 && b < head_[leave])) {
            step = ratio;
            leave = i;
          }
        }
      } else {
        double tmax = kInf;
        for (int i = 0; i < m_; ++i) {
          const double a = dir * alpha[i];
          if (std::abs(a) <= piv_tol) continue;
          const int b = head_[i];
          if (a > 0 && lb_[b] > -kInf) tmax = std::min(tmax, (x_[b] - lb_[b] + ftol) / a);
          else if (a < 0 && ub_[b] < kInf) tmax = std::min(tmax, (ub_[b] - x_[b] + ftol) / -a);
        }
        double pivot_mag = 0;
        for (int i = 0; i < m_; ++i) {
          const double a = dir * alpha[i];
          if (std::abs(a) <= piv_tol) continue;
          const int b = head_[i];
          double ratio;
          if (a > 0 && lb_[b] > -kInf) ratio = (x_[b] - lb_[b]) / a;
          else if (a < 0 && ub_[b] < kInf) ratio = (ub_[b] - x_[b]) / -a;
          else continue;
          if (ratio <= tmax && std::abs(a) > pivot_mag) {
            pivot_mag = std::abs(a);
            leave = i;
            step = std::max(ratio, 0.0);
          }
        }
      }

      const double flip = (lb_[q] > -kInf && ub_[q] < kInf) ? ub_[q] - lb_[q] : kInf;
      const bool bound_flip = flip <= step;
      if (bound_flip) step = flip;
      if (step == kInf) return SolveStatus::unbounded;
      const double dq = d[q];

      // Update primal values.
      if (step > 0) {
        x_[q] += dir * step;
        for (int i = 0; i < m_; ++i)
          if (alpha[i] != 0.0) x_[head_[i]] -= dir * step * alpha[i];
      }
      if (bound_flip) {
        state_[q] = dir > 0 ? State::upper : State::lower;
        x_[q] = dir > 0 ? ub_[q] : lb_[q];
      } else {
        const int b = head_[leave];
        const double arq = alpha[leave];

        // Row leave of B^{-1} N updates the reduced costs and devex weights.
        std::fill(rho.begin(), rho.end(), 0.0);
        rho[leave] = 1.0;
        factor_.btran(rho);
        const double theta = dq / arq;
        const double wq = weight[q];
        for (int j = 0; j < total_; ++j) {
          if (state_[j] == State::basic || j == q) continue;
          const double arj = column_dot(j, rho);
          if (arj == 0.0) continue;
          d[j] -= theta * arj;
          if (devex) weight[j] = std::max(weight[j], (arj / arq) * (arj / arq) * wq);
        }
        d[q] = 0.0;
        d[b] = -theta;
        weight[b] = std::max(wq / (arq * arq), 1.0);
        if (weight[b] > 1e6) std::fill(weight.begin(), weight.end(), 1.0);

        const bool to_lower = dir * arq > 0;
        x_[b] = to_lower ? lb_[b] : ub_[b];
        state_[b] = to_lower ? State::lower : State::upper;
        state_[q] = State::basic;
        head_[leave] = q;
        factor_.push_eta(alpha, leave);
        fresh = false;
      }
      ++iterations_;
      if (bland) ++bland_iterations_;

      // Stall detection switches to Bland's rule; a strict improvement switches back.
      const double improvement = -dq * dir * step;
      obj -= improvement;
      if (opt_.rule != PivotRule::bland) {
        if (improvement < opt_.opt_tol * std::max(1.0, std::abs(obj))) {
          if (++stalled >= opt_.stall_window) bland = true;
        } else {
          stalled = 0;
          bland = false;
        }
      }
    }
  }

  // No rows left: each variable independently sits at its cheapest bound.
  SolveStatus price_only() {
    for (int j = 0; j < total_; ++j) {
      const double c = cost_[j];
      if (c < -opt_.opt_tol) {
        if (ub_[j] == kInf) return SolveStatus::unbounded;
        x_[j] = ub_[j];
        state_[j] = State::upper;
      } else if (c > opt_.opt_tol) {
        if (lb_[j] == -kInf) return SolveStatus::unbounded;
        x_[j] = lb_[j];
        state_[j] = State::lower;
      }
    }
    return SolveStatus::optimal;
  }

  void extract_duals(Solution& sol) {
    sol.eq_duals.assign(lp_.num_eq(), 0.0);
    sol.ineq_duals.assign(lp_.num_ineq(), 0.0);
    std::vector<double> y;
    if (m_ > 0) compute_duals(y);
    for (int i = 0; i < m_; ++i) {
      const double v = y[i] * cost_scale_;
      if (rows_[i].equality) sol.eq_duals[rows_[i].source] = v;
      else sol.ineq_duals[rows_[i].source] = v;
    }
    // Folded rows take over the reduced cost of the bound they became.
    for (int j = 0; j < n_struct_; ++j) {
      double d = lp_.cost[j] - (m_ > 0 ? column_dot(j, y) * cost_scale_ : 0.0);
      const double scale_tol = opt_.feas_tol * std::max(1.0, std::abs(x_[j]));
      if (fold_.fixed_row[j] >= 0) {
        const auto r = static_cast<std::size_t>(fold_.fixed_row[j]);
        sol.eq_duals[r] = d / lp_.eq.row(r)[0].value;
        continue;
      }
      if (d < 0 && fold_.upper_row[j] >= 0 && std::abs(x_[j] - ub_[j]) <= scale_tol) {
        const auto r = static_cast<std::size_t>(fold_.upper_row[j]);
        sol.ineq_duals[r] = d / lp_.ineq.row(r)[0].value;
      } else if (d > 0 && fold_.lower_row[j] >= 0 && std::abs(x_[j] - lb_[j]) <= scale_tol) {
        const auto r = static_cast<std::size_t>(fold_.lower_row[j]);
        sol.ineq_duals[r] = d / lp_.ineq.row(r)[0].value;
      }
    }
  }

  Solution& finish(Solution& sol, SolveStatus st) {
    sol.status = st;
    sol.iterations = iterations_;
    sol.bland_iterations = bland_iterations_;
    sol.x.assign(x_.begin(), x_.begin() + n_struct_);
    for (int j = 0; j < n_struct_; ++j) {
      // Snap round-off just outside a bound onto it.
      const double tol = opt_.feas_tol * std::max(1.0, std::abs(sol.x[j]));
      if (sol.x[j] < lb_[j] && sol.x[j] > lb_[j] - tol) sol.x[j] = lb_[j];
      if (sol.x[j] > ub_[j] && sol.x[j] < ub_[j] + tol) sol.x[j] = ub_[j];
    }
    sol.costs = cost_split(lp_, sol.x);
    sol.objective = sol.costs.total();
    return sol;
  }

  Solution& finish_without_basis(Solution& sol, SolveStatus st) {
    sol.status = st;
    sol.x.assign(lp_.num_vars(), 0.0);
    sol.costs = cost_split(lp_, sol.x);
    sol.objective = sol.costs.total();
    return sol;
  }

  const LinearProgram& lp_;
  SolveOptions opt_;
  FoldedBounds fold_;
  std::vector<Row> rows_;
  int m_ = 0;
  int n_struct_ = 0;
  int first_art_ = 0;
  int n_art_ = 0;
  int total_ = 0;
  std::vector<int> col_start_;
  std::vector<int> row_idx_;
  std::vector<double> val_;
  std::vector<int> logical_row_;
  std::vector<double> logical_sign_;
  std::vector<double> rhs_;
  double rhs_scale_ = 0;
  std::vector<double> lb_, ub_, x_, cost_;
  std::vector<State> state_;
  std::vector<int> head_;
  double cost_scale_ = 1.0;
  BasisFactor factor_;
  std::int64_t iterations_ = 0;
  std::int64_t bland_iterations_ = 0;
  std::int64_t max_iters_ = 0;
};

}  // namespace detail

// Bounded-variable revised simplex with artificial phase 1.
inline Solution solve(const LinearProgram& lp, const SolveOptions& opt = {}) {
  if (!(opt.feas_tol > 0) || !(opt.opt_tol > 0)) throw std::invalid_argument("solve: tolerances must be positive");
  detail::BoundedSimplex simplex(lp, opt);
  return simplex.run();
}

}  // namespace adequacy
