#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "adequacy/analytics.hpp"
#include "adequacy/lp_builder.hpp"
#include "adequacy/simplex.hpp"

namespace adequacy {

// A solve that an experiment depends on ended without an optimum.
class SolveFailure : public std::runtime_error {
 public:
  SolveFailure(SolveStatus status, const std::string& what) : std::runtime_error(what), status_(status) {}
  SolveStatus status() const noexcept { return status_; }

 private:
  SolveStatus status_;
};

inline SolveOptions solve_options(const Scenario& s) {
  SolveOptions opt;
  opt.feas_tol = s.config.solver.feas_tol;
  opt.opt_tol = s.config.solver.opt_tol;
  if (s.config.solver.max_iters) opt.max_iters = *s.config.solver.max_iters;
  return opt;
}

struct CapacityDelta {
  std::string region;
  std::string technology;
  double baseline_mw = 0;
  double stabilized_mw = 0;
  std::optional<double> delta_percent;  // empty when the baseline is zero

  double delta_mw() const { return stabilized_mw - baseline_mw; }
};

struct StabilizationReport {
  double threshold_h_per_year = 0;
  double baseline_cost = 0;
  double stabilized_cost = 0;
  double cost_delta_percent = 0;
  std::vector<CapacityDelta> deltas;
  std::vector<std::pair<std::string, double>> residual_lole;  // per region, h/a
  std::vector<std::optional<double>> shed_cap_mwh;            // final cap per region
  int rounds = 0;
  bool feasible = true;
  std::vector<std::string> binding_caps;  // cap rows tight or violated when infeasible
};

struct StabilizationResult {
  Solution baseline;
  Solution stabilized;
  StabilizationReport report;
};

namespace detail {

inline std::vector<double> region_horizon_demand(const Scenario& s) {
  std::vector<double> out(s.regions.size(), 0.0);
  for (const auto& d : s.demands) {
    const auto r = *s.region_index(d.region);
    for (double v : d.demand) out[r] += v;
  }
  return out;
}

inline CapacityDelta capacity_delta(std::string region, std::string tech, double base, double stab) {
  CapacityDelta d{std::move(region), std::move(tech), base, stab, std::nullopt};
  if (base > 0) d.delta_percent = 100.0 * (stab - base) / base;
  else if (stab == base) d.delta_percent = 0.0;
  return d;
}

}  // namespace detail

// Re-optimizes with a per-region cap on shed energy of threshold hours of
// average demand per year. A region whose LOLE still exceeds the threshold
// gets its cap halved and the program is solved again; after max_rounds the
// cap drops to zero, which always meets the threshold.
inline StabilizationResult stabilize(const Scenario& s, double threshold_h_per_year, int max_rounds = 20) {
  if (!(threshold_h_per_year >= 0)) throw std::invalid_argument("stabilize: threshold must be non-negative");
  const auto opt = solve_options(s);
  const double event_fraction = s.config.event_threshold_fraction;
  StabilizationResult out;
  const auto base_lp = build(s);
  out.baseline = solve(base_lp, opt);
  if (out.baseline.status != SolveStatus::optimal)
    throw SolveFailure(out.baseline.status, "baseline solve ended " + std::string(to_string(out.baseline.status)));

  auto& rep = out.report;
  rep.threshold_h_per_year = threshold_h_per_year;
  rep.baseline_cost = out.baseline.objective;
  const std::size_t R = s.regions.size();
  rep.shed_cap_mwh.assign(R, std::nullopt);

  auto residual = [&](const LinearProgram& lp, const Solution& sol) {
    const auto d = extract_dispatch(s, lp, sol.x);
    std::vector<double> lole(R);
    for (std::size_t r = 0; r < R; ++r) lole[r] = lole_hours(d, s.regions[r].id, event_fraction);
    return lole;
  };

  LinearProgram lp = base_lp;
  Solution sol = out.baseline;
  if (std::isfinite(threshold_h_per_year) && s.config.allow_load_shedding) {
    const auto demand = detail::region_horizon_demand(s);
    std::vector<double> base_cap(R);
    for (std::size_t r = 0; r < R; ++r) {
      base_cap[r] = threshold_h_per_year * demand[r] / s.config.hours_per_year;
      rep.shed_cap_mwh[r] = base_cap[r];
    }
    std::vector<int> halvings(R, 0);
    for (;;) {
      BuildOptions bo;
      bo.shed_cap_mwh = rep.shed_cap_mwh;
      lp = build(s, bo);
      sol = solve(lp, opt);
      ++rep.rounds;
      if (sol.status == SolveStatus::infeasible) {
        rep.feasible = false;
        const auto dx = lp.ineq.multiply(sol.x);
        for (std::size_t i = 0; i < lp.num_ineq(); ++i)
          if (lp.ineq_rows[i].kind == RowKind::shed_cap &&
              dx[i] >= lp.ineq_rhs[i] - opt.feas_tol * std::max(1.0, std::abs(lp.ineq_rhs[i])))
            rep.binding_caps.push_back(lp.ineq_names[i]);
        if (rep.binding_caps.empty())
          for (std::size_t i = 0; i < lp.num_ineq(); ++i)
            if (lp.ineq_rows[i].kind == RowKind::shed_cap) rep.binding_caps.push_back(lp.ineq_names[i]);
        break;
      }
      if (sol.status != SolveStatus::optimal) break;
      const auto lole = residual(lp, sol);
      bool done = true;
      for (std::size_t r = 0; r < R; ++r) {
        if (lole[r] <= threshold_h_per_year + 1e-9 || *rep.shed_cap_mwh[r] == 0.0) continue;
        done = false;
        ++halvings[r];
        rep.shed_cap_mwh[r] = halvings[r] >= max_rounds ? 0.0 : base_cap[r] * std::ldexp(1.0, -halvings[r]);
      }
      if (done) break;
    }
  } else {
    rep.rounds = 0;
  }

  out.stabilized = sol;
  rep.stabilized_cost = sol.objective;
  rep.cost_delta_percent =
      rep.baseline_cost != 0 ? 100.0 * (rep.stabilized_cost - rep.baseline_cost) / std::abs(rep.baseline_cost) : 0.0;
  if (sol.status == SolveStatus::optimal) {
    const auto m = layout(s);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t t = 0; t < s.technologies.size(); ++t) {
        const int c = m.tech[r][t].capacity;
        if (c < 0) continue;
        const auto j = static_cast<std::size_t>(c);
        rep.deltas.push_back(
            detail::capacity_delta(s.regions[r].id, s.technologies[t].id, out.baseline.x[j], sol.x[j]));
      }
    const auto lole = residual(lp, sol);
    for (std::size_t r = 0; r < R; ++r) rep.residual_lole.emplace_back(s.regions[r].id, lole[r]);
  }
  return out;
}

enum class RegionClass { I, II, III, IV, V };

inline std::string_view to_string(RegionClass c) {
  switch (c) {
    case RegionClass::I: return "I";
    case RegionClass::II: return "II";
    case RegionClass::III: return "III";
    case RegionClass::IV: return "IV";
    case RegionClass::V: return "V";
  }
  return "?";
}

// Class bounds in EUR/kWh: 0.025, 0.5, 3, 5.5.
inline RegionClass classify_voll(double voll) {
  if (voll < 0.025) return RegionClass::I;
  if (voll < 0.5) return RegionClass::II;
  if (voll < 3.0) return RegionClass::III;
  if (voll < 5.5) return RegionClass::IV;
  return RegionClass::V;
}

inline constexpr std::array<double, 7> kDefaultSweepFactors{0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 10.0};

struct SweepRegion {
  std::string region;
  double voll = 0;  // country VoLL after scaling, EUR/kWh
  double loss_share_percent = 0;
  double installed_mw = 0;  // sum of power capacity of all technologies
  RegionClass region_class = RegionClass::I;
};

struct SweepRecord {
  double factor = 1;
  SolveStatus status = SolveStatus::optimal;
  double objective = 0;
  std::vector<SweepRegion> regions;
};

struct SweepResult {
  std::vector<SweepRecord> records;  // ascending factor
  bool complete = true;
  SolveStatus failure_status = SolveStatus::optimal;
  std::string failure;
};

inline SweepRecord sweep_point(const Scenario& s, double factor) {
  BuildOptions bo;
  bo.voll_factor = factor;
  const auto lp = build(s, bo);
  const auto sol = solve(lp, solve_options(s));
  SweepRecord rec;
  rec.factor = factor;
  rec.status = sol.status;
  rec.objective = sol.objective;
  if (sol.status != SolveStatus::optimal) return rec;
  const auto d = extract_dispatch(s, lp, sol.x, factor);
  for (std::size_t r = 0; r < s.regions.size(); ++r) {
    SweepRegion sr;
    sr.region = s.regions[r].id;
    sr.voll = s.regions[r].country_voll * factor;
    sr.loss_share_percent = loss_share(d, sr.region);
    for (const auto& u : d.units)
      if (u.region == r) sr.installed_mw += u.capacity;
    sr.region_class = classify_voll(sr.voll);
    rec.regions.push_back(sr);
  }
  return rec;
}

// Each factor is built and solved from scratch; workers > 1 solves factors
// concurrently. Records stop at the first failing factor.
inline SweepResult voll_sweep(const Scenario& s, std::span<const double> factors, unsigned workers = 1) {
  std::vector<double> sorted(factors.begin(), factors.end());
  for (double f : sorted)
    if (!(f > 0) || !std::isfinite(f)) throw std::invalid_argument("voll_sweep: factors must be positive and finite");
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<SweepRecord> solved(sorted.size());
  std::vector<std::string> errors(sorted.size());
  auto run_one = [&](std::size_t i) {
    try {
      solved[i] = sweep_point(s, sorted[i]);
    } catch (const std::exception& e) {
      solved[i].factor = sorted[i];
      solved[i].status = SolveStatus::infeasible;
      errors[i] = e.what();
    }
  };
  workers = std::max(1u, workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < sorted.size(); ++i) run_one(i);
  } else {
    for (std::size_t first = 0; first < sorted.size(); first += workers) {
      std::vector<std::future<void>> batch;
      for (std::size_t i = first; i < std::min(sorted.size(), first + workers); ++i)
        batch.push_back(std::async(std::launch::async, run_one, i));
      for (auto& f : batch) f.get();
    }
  }

  SweepResult out;
  for (std::size_t i = 0; i < solved.size(); ++i) {
    if (solved[i].status != SolveStatus::optimal || !errors[i].empty()) {
      out.complete = false;
      out.failure_status = solved[i].status;
      out.failure = "factor " + csv::format(sorted[i]) + ": " +
                    (errors[i].empty() ? std::string(to_string(solved[i].status)) : errors[i]);
      break;
    }
    out.records.push_back(std::move(solved[i]));
  }
  return out;
}

}  // namespace adequacy
