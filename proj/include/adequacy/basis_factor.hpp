#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace adequacy::detail {

// Sparse LU of a square basis matrix by right-looking Markowitz elimination
// with threshold pivoting, plus a product-form eta file for later column
// swaps. Columns are basis positions and rows are constraint rows: ftran maps
// a row-space vector to position space, btran the reverse.
class BasisFactor {
 public:
  // Basis given column-compressed: column p holds idx/val[start[p], start[p+1]).
  // Returns false when elimination meets a structurally or numerically
  // singular remainder.
  bool factor(int m, std::span<const int> start, std::span<const int> idx, std::span<const double> val) {
    m_ = m;
    etas_.clear();
    prow_.assign(static_cast<std::size_t>(m), -1);
    pcol_.assign(static_cast<std::size_t>(m), -1);
    diag_.assign(static_cast<std::size_t>(m), 0.0);
    l_start_.assign(1, 0);
    l_idx_.clear();
    l_val_.clear();
    u_start_.assign(1, 0);
    u_idx_.clear();
    u_val_.clear();

    // Active submatrix: values by column, patterns by row. Buffers keep their
    // capacity across refactorizations.
    auto& cols = cols_;
    auto& rows = rows_;
    auto& ucols = ucols_;
    for (auto* v : {&cols, &ucols}) {
      if (v->size() < static_cast<std::size_t>(m)) v->resize(static_cast<std::size_t>(m));
      for (int p = 0; p < m; ++p) (*v)[p].clear();
    }
    if (rows.size() < static_cast<std::size_t>(m)) rows.resize(static_cast<std::size_t>(m));
    for (int p = 0; p < m; ++p) rows[p].clear();
    for (int p = 0; p < m; ++p)
      for (int k = start[p]; k < start[p + 1]; ++k) {
        if (val[k] == 0.0) continue;
        cols[p].push_back({idx[k], val[k]});
        rows[idx[k]].push_back(p);
      }
    std::vector<int> ccount(static_cast<std::size_t>(m)), rcount(static_cast<std::size_t>(m));
    for (int p = 0; p < m; ++p) {
      ccount[p] = static_cast<int>(cols[p].size());
      rcount[p] = static_cast<int>(rows[p].size());
    }
    std::vector<char> col_done(static_cast<std::size_t>(m), 0), row_done(static_cast<std::size_t>(m), 0);
    std::vector<int> cstack, rstack;
    for (int p = 0; p < m; ++p) {
      if (ccount[p] == 1) cstack.push_back(p);
      if (rcount[p] == 1) rstack.push_back(p);
    }

    // Count buckets are kept only once the triangular part is exhausted.
    bool nucleus = false;
    Buckets cset, rset;
    cset.reset(m);
    rset.reset(m);
    auto set_ccount = [&](int c, int n) {
      if (nucleus) {
        cset.erase(c);
        cset.insert(c, n);
      } else if (n == 1) {
        cstack.push_back(c);
      }
      ccount[c] = n;
    };
    auto set_rcount = [&](int r, int n) {
      if (nucleus) {
        rset.erase(r);
        rset.insert(r, n);
      } else if (n == 1) {
        rstack.push_back(r);
      }
      rcount[r] = n;
    };
    auto find = [](std::vector<Entry>& col, int row) -> Entry* {
      for (auto& e : col)
        if (e.row == row) return &e;
      return nullptr;
    };
    auto col_max = [&](int c) {
      double best = 0;
      for (const auto& e : cols[c]) best = std::max(best, std::abs(e.value));
      return best;
    };

    std::vector<std::pair<int, double>> pivot_row;
    auto eliminate = [&](int k, int pr, int pc) {
      // Move the pivot row out of the active columns and into U.
      const double piv = find(cols[pc], pr)->value;
      pivot_row.clear();
      for (int c : rows[pr]) {
        if (col_done[c] || c == pc) continue;
        auto& col = cols[c];
        auto it = std::find_if(col.begin(), col.end(), [pr](const Entry& e) { return e.row == pr; });
        if (it == col.end()) continue;
        pivot_row.emplace_back(c, it->value);
        ucols[c].push_back({pr, it->value});
        *it = col.back();
        col.pop_back();
        set_ccount(c, ccount[c] - 1);
      }
      if (nucleus) {
        cset.erase(pc);
        rset.erase(pr);
      }
      col_done[pc] = 1;
      row_done[pr] = 1;

      // Eliminate the pivot column from the remaining rows.
      for (const auto& [i, a] : cols[pc]) {
        if (i == pr) continue;
        const double l = a / piv;
        l_idx_.push_back(i);
        l_val_.push_back(l);
        int ri = rcount[i] - 1;
        for (const auto& [c, u] : pivot_row) {
          if (Entry* e = find(cols[c], i)) {
            e->value -= l * u;
          } else {
            cols[c].push_back({i, -l * u});
            rows[i].push_back(c);
            ++ri;
            set_ccount(c, ccount[c] + 1);
          }
        }
        set_rcount(i, ri);
      }
      l_start_.push_back(static_cast<int>(l_idx_.size()));
      prow_[k] = pr;
      pcol_[k] = pc;
      diag_[k] = piv;
      cols[pc].clear();
      rows[pr].clear();
    };

    int k = 0;
    // Triangular part: column singletons, then row singletons with a stable pivot.
    for (;;) {
      if (!cstack.empty()) {
        const int c = cstack.back();
        cstack.pop_back();
        if (col_done[c] || ccount[c] != 1 || std::abs(cols[c][0].value) <= kTiny) continue;
        eliminate(k++, cols[c][0].row, c);
        continue;
      }
      if (!rstack.empty()) {
        const int r = rstack.back();
        rstack.pop_back();
        if (row_done[r] || rcount[r] != 1) continue;
        int c = -1;
        for (int cc : rows[r])
          if (!col_done[cc] && find(cols[cc], r)) c = cc;
        if (c < 0) continue;
        const double a = find(cols[c], r)->value;
        if (std::abs(a) <= kTiny || std::abs(a) < kThreshold * col_max(c)) continue;
        eliminate(k++, r, c);
        continue;
      }
      break;
    }

    nucleus = true;
    for (int p = 0; p < m; ++p) {
      if (!col_done[p]) cset.insert(p, ccount[p]);
      if (!row_done[p]) rset.insert(p, rcount[p]);
    }
    for (; k < m; ++k) {
      int pr = -1, pc = -1;
      if (cset.lowest() == 0) return false;
      // Markowitz search over the sparsest few columns and rows.
      double best_merit = std::numeric_limits<double>::infinity();
      double best_mag = 0;
      auto consider = [&](int r, int c, double a, double cmax) {
        if (std::abs(a) <= kTiny || std::abs(a) < kThreshold * cmax) return;
        const double merit = static_cast<double>(rcount[r] - 1) * static_cast<double>(ccount[c] - 1);
        if (merit < best_merit || (merit == best_merit && std::abs(a) > best_mag)) {
          best_merit = merit;
          best_mag = std::abs(a);
          pr = r;
          pc = c;
        }
      };
      cset.visit(kSearch, [&](int c) {
        const double cmax = col_max(c);
        for (const auto& e : cols[c]) consider(e.row, c, e.value, cmax);
      });
      rset.visit(kSearch, [&](int r) {
        for (int c : rows[r]) {
          if (col_done[c]) continue;
          if (const Entry* e = find(cols[c], r)) consider(r, c, e->value, col_max(c));
        }
      });
      if (pr < 0) return false;
      eliminate(k, pr, pc);
    }

    for (int k = 0; k < m; ++k) {
      for (const auto& e : ucols[pcol_[k]]) {
        u_idx_.push_back(e.row);
        u_val_.push_back(e.value);
      }
      u_start_.push_back(static_cast<int>(u_idx_.size()));
    }
    return true;
  }

  // v: row space in, position space out; v = B^{-1} v.
  void ftran(std::vector<double>& v) const {
    for (int k = 0; k < m_; ++k) {
      const double t = v[prow_[k]];
      if (t == 0.0) continue;
      for (int q = l_start_[k]; q < l_start_[k + 1]; ++q) v[l_idx_[q]] -= l_val_[q] * t;
    }
    work_.assign(static_cast<std::size_t>(m_), 0.0);
    for (int k = m_ - 1; k >= 0; --k) {
      double t = v[prow_[k]];
      if (t == 0.0) continue;
      t /= diag_[k];
      work_[pcol_[k]] = t;
      for (int q = u_start_[k]; q < u_start_[k + 1]; ++q) v[u_idx_[q]] -= u_val_[q] * t;
    }
    v.swap(work_);
    for (const auto& e : etas_) {
      const double vr = v[e.row] / e.pivot;
      v[e.row] = vr;
      if (vr == 0.0) continue;
      for (std::size_t q = 0; q < e.index.size(); ++q) v[e.index[q]] -= e.value[q] * vr;
    }
  }

  // w: position space in, row space out; w = B^{-T} w.
  void btran(std::vector<double>& w) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = w[it->row];
      for (std::size_t q = 0; q < it->index.size(); ++q) acc -= it->value[q] * w[it->index[q]];
      w[it->row] = acc / it->pivot;
    }
    work_.assign(static_cast<std::size_t>(m_), 0.0);
    for (int k = 0; k < m_; ++k) {
      double acc = w[pcol_[k]];
      for (int q = u_start_[k]; q < u_start_[k + 1]; ++q) acc -= u_val_[q] * work_[u_idx_[q]];
      work_[prow_[k]] = acc / diag_[k];
    }
    for (int k = m_ - 1; k >= 0; --k) {
      double acc = work_[prow_[k]];
      for (int q = l_start_[k]; q < l_start_[k + 1]; ++q) acc -= l_val_[q] * work_[l_idx_[q]];
      work_[prow_[k]] = acc;
    }
    w.swap(work_);
  }

  // alpha = B^{-1} a_q for the entering column; row is the leaving position.
  void push_eta(std::span<const double> alpha, int row) {
    Eta e;
    e.row = row;
    e.pivot = alpha[row];
    for (int i = 0; i < static_cast<int>(alpha.size()); ++i)
      if (i != row && alpha[i] != 0.0) {
        e.index.push_back(i);
        e.value.push_back(alpha[i]);
      }
    etas_.push_back(std::move(e));
  }

  std::size_t eta_count() const { return etas_.size(); }

 private:
  static constexpr double kTiny = 1e-11;
  static constexpr double kThreshold = 0.1;
  static constexpr int kSearch = 4;

  struct Entry {
    int row;
    double value;
  };
  // Items keyed by a small count, each in a doubly linked list per count.
  struct Buckets {
    std::vector<int> head, next, prev, key;
    int low = 0;

    void reset(int n) {
      head.assign(static_cast<std::size_t>(n) + 2, -1);
      next.assign(static_cast<std::size_t>(n), -1);
      prev.assign(static_cast<std::size_t>(n), -1);
      key.assign(static_cast<std::size_t>(n), -1);
      low = 0;
    }
    void insert(int i, int k) {
      if (static_cast<std::size_t>(k) >= head.size()) head.resize(static_cast<std::size_t>(k) + 1, -1);
      key[i] = k;
      prev[i] = -1;
      next[i] = head[k];
      if (head[k] >= 0) prev[head[k]] = i;
      head[k] = i;
      low = std::min(low, k);
    }
    void erase(int i) {
      if (key[i] < 0) return;
      if (prev[i] >= 0) next[prev[i]] = next[i];
      else head[key[i]] = next[i];
      if (next[i] >= 0) prev[next[i]] = prev[i];
      key[i] = -1;
    }
    int lowest() {
      while (low < static_cast<int>(head.size()) && head[low] < 0) ++low;
      return low;
    }
    // Calls f on up to limit items in increasing key order.
    template <class F>
    void visit(int limit, F&& f) {
      for (int k = lowest(); k < static_cast<int>(head.size()) && limit > 0; ++k)
        for (int i = head[k]; i >= 0 && limit > 0; i = next[i], --limit) f(i);
    }
  };
  struct Eta {
    int row = 0;
    double pivot = 1;
    std::vector<int> index;
    std::vector<double> value;
  };

  int m_ = 0;
  std::vector<int> prow_, pcol_;
  std::vector<double> diag_;
  std::vector<int> l_start_, l_idx_;
  std::vector<double> l_val_;
  std::vector<int> u_start_, u_idx_;
  std::vector<double> u_val_;
  std::vector<Eta> etas_;
  std::vector<std::vector<Entry>> cols_, ucols_;
  std::vector<std::vector<int>> rows_;
  mutable std::vector<double> work_;
};

}  // namespace adequacy::detail
