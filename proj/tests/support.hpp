#pragma once

// Test-only oracles and fixture builders. Nothing here calls into the solver.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "adequacy/linear_program.hpp"
#include "adequacy/scenario.hpp"

namespace adequacy::testing {

// Dense LP: min c x, A x = b, D x <= e, 0 <= x.
struct DenseLp {
  std::vector<double> c;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::vector<std::vector<double>> D;
  std::vector<double> e;

  LinearProgram to_sparse() const {
    LinearProgram lp;
    for (std::size_t j = 0; j < c.size(); ++j)
      lp.add_variable({VarKind::dispatch, {.hour = static_cast<int>(j)}}, "x" + std::to_string(j), c[j]);
    auto rowvec = [](const std::vector<double>& r) {
      std::vector<SparseRows::Entry> out;
      for (std::size_t j = 0; j < r.size(); ++j)
        if (r[j] != 0) out.push_back({static_cast<int>(j), r[j]});
      return out;
    };
    for (std::size_t i = 0; i < A.size(); ++i)
      lp.add_equality({RowKind::balance, {}}, "E" + std::to_string(i), rowvec(A[i]), b[i]);
    for (std::size_t i = 0; i < D.size(); ++i)
      lp.add_inequality({RowKind::availability, {}}, "R" + std::to_string(i), rowvec(D[i]), e[i]);
    return lp;
  }
};

// Gaussian elimination with partial pivoting; nullopt when singular.
inline std::optional<std::vector<double>> dense_solve(std::vector<std::vector<double>> M, std::vector<double> r) {
  const std::size_t n = r.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(M[i][k]) > std::abs(M[p][k])) p = i;
    if (std::abs(M[p][k]) < 1e-11) return std::nullopt;
    std::swap(M[p], M[k]);
    std::swap(r[p], r[k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = M[i][k] / M[k][k];
      for (std::size_t j = k; j < n; ++j) M[i][j] -= f * M[k][j];
      r[i] -= f * r[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double acc = r[k];
    for (std::size_t j = k + 1; j < n; ++j) acc -= M[k][j] * x[j];
    x[k] = acc / M[k][k];
  }
  return x;
}

// Minimum over all basic feasible points. Returns nullopt if none is feasible.
inline std::optional<double> vertex_enumeration(const DenseLp& lp, double tol = 1e-9) {
  const std::size_t n = lp.c.size();
  // Candidate active constraints: inequality rows, then x_j >= 0.
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < lp.D.size(); ++i) {
    rows.push_back(lp.D[i]);
    rhs.push_back(lp.e[i]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> r(n, 0.0);
    r[j] = 1.0;
    rows.push_back(r);
    rhs.push_back(0.0);
  }
  const std::size_t k = n - lp.A.size();
  std::optional<double> best;
  std::vector<int> pick(rows.size(), 0);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(std::min(k, rows.size())), 1);
  std::sort(pick.begin(), pick.end(), std::greater<>());
  do {
    std::vector<std::vector<double>> M = lp.A;
    std::vector<double> r = lp.b;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (pick[i]) {
        M.push_back(rows[i]);
        r.push_back(rhs[i]);
      }
    auto x = dense_solve(M, r);
    if (!x) continue;
    bool ok = true;
    for (double v : *x) ok = ok && v >= -tol;
    for (std::size_t i = 0; ok && i < lp.D.size(); ++i) {
      double acc = 0;
      for (std::size_t j = 0; j < n; ++j) acc += lp.D[i][j] * (*x)[j];
      ok = acc <= lp.e[i] + tol * std::max(1.0, std::abs(lp.e[i]));
    }
    if (!ok) continue;
    double obj = 0;
    for (std::size_t j = 0; j < n; ++j) obj += lp.c[j] * (*x)[j];
    if (!best || obj < *best) best = obj;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

// Feasible by construction (D x0 <= e) and bounded (sum x <= B row).
inline DenseLp random_feasible_lp(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.0, 2.0);
  DenseLp lp;
  lp.c.resize(n);
  for (auto& v : lp.c) v = std::round(coef(rng) * 100.0) / 100.0;
  std::vector<double> x0(n);
  for (auto& v : x0) v = pos(rng);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    std::vector<double> row(n);
    for (auto& v : row) v = std::round(coef(rng) * 100.0) / 100.0;
    double acc = 0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x0[j];
    lp.D.push_back(row);
    lp.e.push_back(std::round((acc + pos(rng)) * 100.0) / 100.0 + 0.01);
  }
  lp.D.push_back(std::vector<double>(n, 1.0));
  lp.e.push_back(std::ceil(std::accumulate(x0.begin(), x0.end(), 0.0)) + 1.0);
  return lp;
}

// ---- Scenario builders -----------------------------------------------------

inline Technology generator(std::string id, double capex, double opex = 0.0) {
  Technology t;
  t.id = std::move(id);
  t.kind = TechKind::generator;
  t.carrier_out = Carrier::electricity;
  t.capex_annual = capex;
  t.opex_var = opex;
  return t;
}

inline Technology converter(std::string id, Carrier in, Carrier out, double eff, double capex) {
  Technology t;
  t.id = std::move(id);
  t.kind = TechKind::converter;
  t.carrier_in = in;
  t.carrier_out = out;
  t.efficiency = eff;
  t.capex_annual = capex;
  return t;
}

inline Technology storage(std::string id, Carrier c, double power_capex, double energy_capex,
                          double charge_eff = 1.0, double discharge_eff = 1.0) {
  Technology t;
  t.id = std::move(id);
  t.kind = TechKind::storage;
  t.carrier_out = c;
  t.capex_annual = power_capex;
  t.energy_capex_annual = energy_capex;
  t.charge_efficiency = charge_eff;
  t.discharge_efficiency = discharge_eff;
  return t;
}

inline Scenario make_scenario(int horizon, int hours_per_year = 8760) {
  Scenario s;
  s.config.horizon_hours = horizon;
  s.config.hours_per_year = hours_per_year;
  return s;
}

inline void add_region(Scenario& s, std::string id, double voll) {
  Region r;
  r.id = id;
  r.name = id;
  r.country_voll = voll;
  s.regions.push_back(r);
}

inline void add_demand(Scenario& s, std::string region, Sector sector, std::vector<double> demand,
                       Carrier carrier = Carrier::electricity) {
  s.demands.push_back({std::move(region), carrier, sector, std::move(demand)});
}

inline void add_profile(Scenario& s, std::string region, std::string tech, std::vector<double> cf) {
  s.profiles.push_back({std::move(region), std::move(tech), std::move(cf)});
}

// Sorts series and derives sector VoLLs, as load_scenario would.
inline Scenario finalize(Scenario s) {
  canonicalize(s);
  derive_sector_volls(s);
  return s;
}

// Peaker system: one dispatchable generator (cf 1, capex cone, no opex) and a
// demand duration curve of `levels` distinct values repeated over the horizon.
inline Scenario peaker_scenario(double cone, double voll, int horizon = 8760) {
  Scenario s = make_scenario(horizon, horizon);
  add_region(s, "R1", voll);
  s.technologies.push_back(generator("peaker", cone));
  std::vector<double> demand(static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) {
    // Distinct levels with a deterministic shuffle over the horizon.
    const int rank = static_cast<int>((static_cast<long long>(h) * 3677) % horizon);
    demand[static_cast<std::size_t>(h)] = 500.0 + 500.0 * rank / horizon;
  }
  add_demand(s, "R1", Sector::industry, demand);
  add_profile(s, "R1", "peaker", std::vector<double>(static_cast<std::size_t>(horizon), 1.0));
  return finalize(std::move(s));
}

// Wind lull bridged by hydrogen over one annualized 48 h horizon. The turbine
// costs 3 hours of VoLL per MW, so the top lull hours are shed at the optimum.
inline Scenario lull_scenario() {
  const int H = 48;
  Scenario s = make_scenario(H, H);
  add_region(s, "R1", 10.0);
  s.technologies.push_back(generator("wind", 1.0));
  s.technologies.push_back(converter("electrolyzer", Carrier::electricity, Carrier::hydrogen, 0.7, 1.0));
  s.technologies.push_back(converter("h2-turbine", Carrier::hydrogen, Carrier::electricity, 0.6, 30.0));
  s.technologies.push_back(storage("h2-store", Carrier::hydrogen, 0.1, 0.001));
  std::vector<double> cf(H), demand(H);
  for (int h = 0; h < H; ++h) {
    cf[static_cast<std::size_t>(h)] = h < 24 ? 1.0 : 0.0;
    demand[static_cast<std::size_t>(h)] = h < 24 ? 40.0 : 30.0 + static_cast<double>((h * 7) % 24);
  }
  add_profile(s, "R1", "wind", cf);
  add_demand(s, "R1", Sector::households, demand);
  return finalize(std::move(s));
}

// Brute-force peaker oracle: total cost as a function of capacity K is
// piecewise linear with breakpoints at demand levels; evaluate each.
struct PeakerOptimum {
  double capacity = 0;
  double cost = 0;
  int shed_hours = 0;
};

inline PeakerOptimum peaker_oracle(const std::vector<double>& demand, double cone_eur_per_kw, double voll_eur_per_kwh,
                                   double year_share) {
  std::vector<double> levels(demand);
  levels.push_back(0.0);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  PeakerOptimum best{0, std::numeric_limits<double>::infinity(), 0};
  for (double k : levels) {
    double shed = 0;
    int hours = 0;
    for (double d : demand)
      if (d > k) {
        shed += d - k;
        ++hours;
      }
    const double cost = cone_eur_per_kw * 1000.0 * year_share * k + voll_eur_per_kwh * 1000.0 * shed;
    if (cost < best.cost - 1e-9 * std::abs(cost)) best = {k, cost, hours};
  }
  return best;
}

inline std::filesystem::path fixture_dir(const std::string& name) {
  return std::filesystem::path(ADEQUACY_FIXTURE_DIR) / name;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("adequacy_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace adequacy::testing
