#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "adequacy/csv.hpp"
#include "adequacy/types.hpp"

namespace adequacy {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Row-compressed sparse matrix. Rows are appended one at a time.
class SparseRows {
 public:
  struct Entry {
    int col;
    double value;
  };

  SparseRows() : start_{0} {}

  std::size_t rows() const { return start_.size() - 1; }
  std::size_t nonzeros() const { return entries_.size(); }

  // Merges duplicate columns and drops exact zeros.
  void add_row(std::vector<Entry> row) {
    std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
    for (std::size_t i = 0; i < row.size();) {
      Entry e = row[i++];
      while (i < row.size() && row[i].col == e.col) e.value += row[i++].value;
      if (e.value != 0.0) entries_.push_back(e);
    }
    start_.push_back(entries_.size());
  }

  std::span<const Entry> row(std::size_t r) const {
    return {entries_.data() + start_[r], start_[r + 1] - start_[r]};
  }

  // y = M x
  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(rows(), 0.0);
    for (std::size_t r = 0; r < rows(); ++r) {
      double acc = 0;
      for (const auto& e : row(r)) acc += e.value * x[static_cast<std::size_t>(e.col)];
      y[r] = acc;
    }
    return y;
  }

  // y = M^T v, sized to ncols
  std::vector<double> multiply_transposed(std::span<const double> v, std::size_t ncols) const {
    std::vector<double> y(ncols, 0.0);
    for (std::size_t r = 0; r < rows(); ++r)
      for (const auto& e : row(r)) y[static_cast<std::size_t>(e.col)] += e.value * v[r];
    return y;
  }

  bool operator==(const SparseRows& o) const {
    if (start_ != o.start_ || entries_.size() != o.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].col != o.entries_[i].col || entries_[i].value != o.entries_[i].value) return false;
    return true;
  }

 private:
  std::vector<std::size_t> start_;
  std::vector<Entry> entries_;
};

enum class VarKind {
  capacity,         // MW (power)
  energy_capacity,  // MWh (storage energy)
  link_capacity,    // MW
  dispatch,         // MWh per hour (output side for converters)
  charge,
  discharge,
  soc,
  flow,
  shed,
};

enum class RowKind {
  balance,
  storage_dynamics,
  fixed_capacity,
  availability,
  charge_limit,
  discharge_limit,
  soc_limit,
  flow_limit,
  shed_bound,
  capacity_cap,
  link_cap,
  energy_budget,
  shed_cap,  // added by stabilization
};

// Semantic descriptor shared by variables and constraints. Unused fields are -1.
struct Descriptor {
  int region = -1;
  int tech = -1;
  int link = -1;
  int hour = -1;
  int direction = 0;  // for flows: 0 forward (from->to), 1 backward
  Carrier carrier = Carrier::electricity;
  Sector sector = Sector::households;

  bool operator==(const Descriptor&) const = default;
};

struct Variable {
  VarKind kind;
  Descriptor at;
  bool operator==(const Variable&) const = default;
};

struct Constraint {
  RowKind kind;
  Descriptor at;
  bool operator==(const Constraint&) const = default;
};

// min c^T x  s.t.  A x = b,  D x <= e,  lower <= x <= upper
struct LinearProgram {
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  SparseRows eq;
  std::vector<double> eq_rhs;
  SparseRows ineq;
  std::vector<double> ineq_rhs;

  std::vector<Variable> variables;
  std::vector<std::string> column_names;
  std::vector<Constraint> eq_rows;
  std::vector<std::string> eq_names;
  std::vector<Constraint> ineq_rows;
  std::vector<std::string> ineq_names;

  std::size_t num_vars() const { return cost.size(); }
  std::size_t num_eq() const { return eq.rows(); }
  std::size_t num_ineq() const { return ineq.rows(); }

  bool operator==(const LinearProgram&) const = default;

  int add_variable(Variable v, std::string name, double c, double lo = 0.0, double hi = kInf) {
    if (cost.size() >= static_cast<std::size_t>(std::numeric_limits<int>::max() - 1))
      throw std::overflow_error("linear program exceeds the index space");
    variables.push_back(v);
    column_names.push_back(std::move(name));
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    return static_cast<int>(cost.size() - 1);
  }

  void add_equality(Constraint c, std::string name, std::vector<SparseRows::Entry> row, double rhs) {
    eq.add_row(std::move(row));
    eq_rhs.push_back(rhs);
    eq_rows.push_back(c);
    eq_names.push_back(std::move(name));
  }

  void add_inequality(Constraint c, std::string name, std::vector<SparseRows::Entry> row, double rhs) {
    ineq.add_row(std::move(row));
    ineq_rhs.push_back(rhs);
    ineq_rows.push_back(c);
    ineq_names.push_back(std::move(name));
  }

  double objective(std::span<const double> x) const {
    double acc = 0;
    for (std::size_t j = 0; j < cost.size(); ++j) acc += cost[j] * x[j];
    return acc;
  }
};

struct CostSplit {
  double system = 0;         // EUR
  double loss_of_load = 0;   // EUR
  double total() const { return system + loss_of_load; }
};

// C_LOL collects the VoLL-priced shed terms; C_System is everything else.
inline CostSplit cost_split(const LinearProgram& lp, std::span<const double> x) {
  if (x.size() != lp.num_vars())
    throw std::invalid_argument("cost_split: solution has " + std::to_string(x.size()) +
                                " entries, program has " + std::to_string(lp.num_vars()));
  CostSplit out;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double term = lp.cost[j] * x[j];
    if (lp.variables[j].kind == VarKind::shed) out.loss_of_load += term;
    else out.system += term;
  }
  return out;
}

namespace detail {

// Effective bounds after folding single-entry inequality and equality rows.
struct FoldedBounds {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<int> lower_row;  // index of the ineq row that set the bound, -1 = own bound
  std::vector<int> upper_row;
  std::vector<int> fixed_row;  // eq row that fixed the variable, -1 = none
  std::vector<bool> ineq_folded;
  std::vector<bool> eq_folded;
};

inline FoldedBounds fold_singleton_rows(const LinearProgram& lp) {
  FoldedBounds f;
  f.lower = lp.lower;
  f.upper = lp.upper;
  f.lower_row.assign(lp.num_vars(), -1);
  f.upper_row.assign(lp.num_vars(), -1);
  f.fixed_row.assign(lp.num_vars(), -1);
  f.ineq_folded.assign(lp.num_ineq(), false);
  f.eq_folded.assign(lp.num_eq(), false);
  for (std::size_t i = 0; i < lp.num_ineq(); ++i) {
    auto row = lp.ineq.row(i);
    if (row.size() != 1) continue;
    const auto j = static_cast<std::size_t>(row[0].col);
    const double bound = lp.ineq_rhs[i] / row[0].value;
    if (row[0].value > 0) {
      if (bound < f.upper[j]) {
        f.upper[j] = bound;
        f.upper_row[j] = static_cast<int>(i);
      }
    } else if (bound > f.lower[j]) {
      f.lower[j] = bound;
      f.lower_row[j] = static_cast<int>(i);
    }
    f.ineq_folded[i] = true;
  }
  for (std::size_t i = 0; i < lp.num_eq(); ++i) {
    auto row = lp.eq.row(i);
    if (row.size() != 1) continue;
    const auto j = static_cast<std::size_t>(row[0].col);
    const double v = lp.eq_rhs[i] / row[0].value;
    f.lower[j] = std::max(f.lower[j], v);
    f.upper[j] = std::min(f.upper[j], v);
    if (f.fixed_row[j] < 0) f.fixed_row[j] = static_cast<int>(i);
    f.eq_folded[i] = true;
  }
  return f;
}

inline std::string mps_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline void mps_line(std::ostream& out, std::string_view f1, std::string_view f2, std::string_view f3,
                     std::string_view f4, std::string_view f5 = {}, std::string_view f6 = {}) {
  // Fixed-format field columns (2, 5, 15, 25, 40, 50); longer names push the
  // following fields right, separated by at least one blank.
  std::string line(1, ' ');
  auto put = [&](std::size_t col, std::string_view text) {
    if (text.empty()) return;
    if (line.size() < col - 1) line.append(col - 1 - line.size(), ' ');
    else if (line.back() != ' ') line.push_back(' ');
    line.append(text);
  };
  put(2, f1);
  put(5, f2);
  put(15, f3);
  put(25, f4);
  put(40, f5);
  put(50, f6);
  out << line << '\n';
}

}  // namespace detail

// Writes fixed-layout MPS. Single-entry rows are emitted as column bounds.
inline std::string to_mps(const LinearProgram& lp, std::string_view name = "ADEQUACY") {
  const auto fold = detail::fold_singleton_rows(lp);
  std::ostringstream out;
  out << "NAME          " << name << '\n';
  out << "ROWS\n";
  detail::mps_line(out, "N", "COST", {}, {});
  for (std::size_t i = 0; i < lp.num_eq(); ++i)
    if (!fold.eq_folded[i]) detail::mps_line(out, "E", lp.eq_names[i], {}, {});
  for (std::size_t i = 0; i < lp.num_ineq(); ++i)
    if (!fold.ineq_folded[i]) detail::mps_line(out, "L", lp.ineq_names[i], {}, {});

  // Column-wise view of the kept rows.
  std::vector<std::vector<std::pair<const std::string*, double>>> cols(lp.num_vars());
  for (std::size_t i = 0; i < lp.num_eq(); ++i)
    if (!fold.eq_folded[i])
      for (const auto& e : lp.eq.row(i)) cols[static_cast<std::size_t>(e.col)].push_back({&lp.eq_names[i], e.value});
  for (std::size_t i = 0; i < lp.num_ineq(); ++i)
    if (!fold.ineq_folded[i])
      for (const auto& e : lp.ineq.row(i)) cols[static_cast<std::size_t>(e.col)].push_back({&lp.ineq_names[i], e.value});

  out << "COLUMNS\n";
  static const std::string kCost = "COST";
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    std::vector<std::pair<const std::string*, double>> entries;
    if (lp.cost[j] != 0.0 || cols[j].empty()) entries.push_back({&kCost, lp.cost[j]});
    entries.insert(entries.end(), cols[j].begin(), cols[j].end());
    for (std::size_t k = 0; k < entries.size(); k += 2) {
      if (k + 1 < entries.size())
        detail::mps_line(out, {}, lp.column_names[j], *entries[k].first, detail::mps_number(entries[k].second),
                         *entries[k + 1].first, detail::mps_number(entries[k + 1].second));
      else
        detail::mps_line(out, {}, lp.column_names[j], *entries[k].first, detail::mps_number(entries[k].second));
    }
  }

  out << "RHS\n";
  for (std::size_t i = 0; i < lp.num_eq(); ++i)
    if (!fold.eq_folded[i] && lp.eq_rhs[i] != 0.0)
      detail::mps_line(out, {}, "RHS", lp.eq_names[i], detail::mps_number(lp.eq_rhs[i]));
  for (std::size_t i = 0; i < lp.num_ineq(); ++i)
    if (!fold.ineq_folded[i] && lp.ineq_rhs[i] != 0.0)
      detail::mps_line(out, {}, "RHS", lp.ineq_names[i], detail::mps_number(lp.ineq_rhs[i]));

  out << "BOUNDS\n";
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    const double lo = fold.lower[j];
    const double hi = fold.upper[j];
    const auto& n = lp.column_names[j];
    if (lo == hi) {
      detail::mps_line(out, "FX", "BND", n, detail::mps_number(lo));
      continue;
    }
    if (lo != 0.0) detail::mps_line(out, "LO", "BND", n, detail::mps_number(lo));
    if (hi != kInf) detail::mps_line(out, "UP", "BND", n, detail::mps_number(hi));
  }
  out << "ENDATA\n";
  return out.str();
}

inline void export_mps(const LinearProgram& lp, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << to_mps(lp);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// name,value pairs keyed by MPS column name.
inline std::string format_solution_csv(const LinearProgram& lp, std::span<const double> x) {
  csv::Writer w({"name", "value"});
  for (std::size_t j = 0; j < lp.num_vars(); ++j) w.row({lp.column_names[j], csv::format(x[j])});
  return w.str();
}

inline std::vector<double> import_solution_csv(const LinearProgram& lp, const std::filesystem::path& path) {
  const std::string file = path.filename().string();
  auto table = csv::read(path, file);
  auto name_col = table.column("name");
  auto value_col = table.column("value");
  if (!name_col) throw InputError(file, 1, "name", "missing column");
  if (!value_col) throw InputError(file, 1, "value", "missing column");
  for (const auto& h : table.header)
    if (h != "name" && h != "value") throw InputError(file, 1, h, "unknown column");

  std::unordered_map<std::string, std::size_t> index;
  index.reserve(lp.num_vars());
  for (std::size_t j = 0; j < lp.num_vars(); ++j) index.emplace(lp.column_names[j], j);

  std::vector<double> x(lp.num_vars(), 0.0);
  std::vector<bool> seen(lp.num_vars(), false);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& name = table.rows[r][*name_col];
    auto it = index.find(name);
    if (it == index.end()) throw InputError(file, table.lines[r], "name", "unknown column name '" + name + "'");
    auto v = csv::parse_double(table.rows[r][*value_col]);
    if (!v) throw InputError(file, table.lines[r], "value", "malformed number '" + table.rows[r][*value_col] + "'");
    if (seen[it->second]) throw InputError(file, table.lines[r], "name", "duplicate entry '" + name + "'");
    seen[it->second] = true;
    x[it->second] = *v;
  }
  for (std::size_t j = 0; j < lp.num_vars(); ++j)
    if (!seen[j]) throw InputError(file, 0, "name", "missing value for '" + lp.column_names[j] + "'");
  return x;
}

}  // namespace adequacy
