#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "adequacy/linear_program.hpp"
#include "adequacy/lp_builder.hpp"
#include "adequacy/scenario.hpp"

namespace adequacy {

// Hourly solved quantities of one horizon, detached from the column layout.
struct DispatchResult {
  struct ShedSeries {
    std::size_t region = 0;
    Carrier carrier = Carrier::electricity;
    Sector sector = Sector::households;
    double voll = 0;  // EUR/kWh as priced in the program
    std::vector<double> demand;
    std::vector<double> shed;
  };
  struct Unit {
    std::size_t region = 0;
    std::size_t tech = 0;
    std::string id;
    TechKind kind = TechKind::generator;
    std::optional<Carrier> carrier_in;
    Carrier carrier_out = Carrier::electricity;
    double capacity = 0;         // MW
    double energy_capacity = 0;  // MWh, storage only
    std::vector<double> dispatch;  // output side; storage: discharge
    std::vector<double> charge;
    std::vector<double> soc;       // state at the start of each hour
  };
  struct Flow {
    std::size_t link = 0;
    std::size_t from = 0;
    std::size_t to = 0;
    Carrier carrier = Carrier::electricity;
    double loss_fraction = 0;
    double capacity = 0;
    std::vector<double> forward;   // sent from -> to
    std::vector<double> backward;  // sent to -> from
  };

  std::size_t horizon = 0;
  double annualization = 1.0;
  std::vector<std::string> regions;
  std::vector<ShedSeries> shed;
  std::vector<Unit> units;
  std::vector<Flow> flows;

  std::size_t region_index(std::string_view id) const {
    for (std::size_t i = 0; i < regions.size(); ++i)
      if (regions[i] == id) return i;
    throw std::invalid_argument("unknown region '" + std::string(id) + "'");
  }
};

inline DispatchResult extract_dispatch(const Scenario& s, const LinearProgram& lp, std::span<const double> x,
                                       double voll_factor = 1.0) {
  if (x.size() != lp.num_vars()) throw std::invalid_argument("extract_dispatch: solution size mismatch");
  const auto m = layout(s);
  const std::size_t H = m.horizon;
  auto slice = [&](int first) {
    if (first < 0) return std::vector<double>(H, 0.0);
    return std::vector<double>(x.begin() + first, x.begin() + first + static_cast<long>(H));
  };
  DispatchResult d;
  d.horizon = H;
  d.annualization = s.config.annualization();
  for (const auto& r : s.regions) d.regions.push_back(r.id);
  for (std::size_t k = 0; k < s.demands.size(); ++k) {
    const auto& dem = s.demands[k];
    const auto r = *s.region_index(dem.region);
    d.shed.push_back({r, dem.carrier, dem.sector, s.regions[r].sector_voll[index_of(dem.sector)] * voll_factor,
                      dem.demand, slice(m.shed[k])});
  }
  for (std::size_t r = 0; r < s.regions.size(); ++r)
    for (std::size_t t = 0; t < s.technologies.size(); ++t) {
      const auto& b = m.tech[r][t];
      if (b.capacity < 0) continue;
      const auto& tech = s.technologies[t];
      DispatchResult::Unit u;
      u.region = r;
      u.tech = t;
      u.id = tech.id;
      u.kind = tech.kind;
      u.carrier_in = tech.carrier_in;
      u.carrier_out = tech.carrier_out;
      u.capacity = x[static_cast<std::size_t>(b.capacity)];
      if (tech.kind == TechKind::storage) {
        u.energy_capacity = x[static_cast<std::size_t>(b.energy_capacity)];
        u.dispatch = slice(b.discharge);
        u.charge = slice(b.charge);
        u.soc = slice(b.soc);
      } else {
        u.dispatch = slice(b.dispatch);
      }
      d.units.push_back(std::move(u));
    }
  for (std::size_t l = 0; l < s.links.size(); ++l) {
    const auto& link = s.links[l];
    DispatchResult::Flow f;
    f.link = l;
    f.from = *s.region_index(link.from);
    f.to = *s.region_index(link.to);
    f.carrier = link.carrier;
    f.loss_fraction = link.loss_fraction;
    f.capacity = x[static_cast<std::size_t>(m.link_capacity[l])];
    f.forward = slice(m.flow[l]);
    f.backward = slice(m.flow[l] + static_cast<int>(H));
    d.flows.push_back(std::move(f));
  }
  return d;
}

namespace detail {

struct RegionSeries {
  std::vector<double> demand;
  std::vector<double> shed;
};

// Hourly totals over all carriers and sectors of one region.
inline RegionSeries region_totals(const DispatchResult& d, std::size_t r) {
  RegionSeries out{std::vector<double>(d.horizon, 0.0), std::vector<double>(d.horizon, 0.0)};
  for (const auto& s : d.shed) {
    if (s.region != r) continue;
    for (std::size_t h = 0; h < d.horizon; ++h) {
      out.demand[h] += s.demand[h];
      out.shed[h] += s.shed[h];
    }
  }
  return out;
}

inline bool above_threshold(double shed, double demand, double fraction) {
  return shed > 0.0 && shed > fraction * demand;
}

inline void check_threshold(double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw std::invalid_argument("event threshold fraction must lie in [0, 1)");
}

}  // namespace detail

// Percent of the region's demand that is shed over the horizon.
inline double loss_share(const DispatchResult& d, std::string_view region) {
  const auto t = detail::region_totals(d, d.region_index(region));
  double shed = 0, demand = 0;
  for (std::size_t h = 0; h < d.horizon; ++h) {
    shed += t.shed[h];
    demand += t.demand[h];
  }
  return demand > 0 ? 100.0 * shed / demand : 0.0;
}

// Annualized count of hours with shed above threshold_fraction of demand.
inline double lole_hours(const DispatchResult& d, std::string_view region, double threshold_fraction = 0.001) {
  detail::check_threshold(threshold_fraction);
  const auto t = detail::region_totals(d, d.region_index(region));
  std::size_t hours = 0;
  for (std::size_t h = 0; h < d.horizon; ++h)
    if (detail::above_threshold(t.shed[h], t.demand[h], threshold_fraction)) ++hours;
  return static_cast<double>(hours) * d.annualization;
}

struct OutageEvent {
  std::string region;
  std::size_t start = 0;
  std::size_t duration = 0;
  double energy_mwh = 0;
  double max_depth = 0;

  bool operator==(const OutageEvent&) const = default;

  bool covers(std::size_t hour, std::size_t horizon) const {
    return (hour + horizon - start) % horizon < duration;
  }
};

// Maximal runs of above-threshold hours on a cyclic horizon, ordered by start.
inline std::vector<OutageEvent> detect_events(const DispatchResult& d, std::string_view region,
                                              double threshold_fraction = 0.001) {
  detail::check_threshold(threshold_fraction);
  const std::size_t H = d.horizon;
  const auto t = detail::region_totals(d, d.region_index(region));
  std::vector<bool> on(H);
  for (std::size_t h = 0; h < H; ++h) on[h] = detail::above_threshold(t.shed[h], t.demand[h], threshold_fraction);

  std::vector<OutageEvent> events;
  auto close = [&](std::size_t start, std::size_t len) {
    OutageEvent e{std::string(region), start, len, 0.0, 0.0};
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t h = (start + k) % H;
      e.energy_mwh += t.shed[h];
      if (t.demand[h] > 0) e.max_depth = std::max(e.max_depth, std::min(1.0, t.shed[h] / t.demand[h]));
    }
    events.push_back(e);
  };
  if (H == 0) return events;
  if (std::all_of(on.begin(), on.end(), [](bool b) { return b; })) {
    close(0, H);
    return events;
  }
  // A run touching hour 0 that continues from H-1 belongs to the trailing run.
  std::size_t h = 0;
  std::size_t head_len = 0;
  if (on[0] && on[H - 1])
    while (on[head_len]) ++head_len;
  h = head_len;
  while (h < H) {
    if (!on[h]) {
      ++h;
      continue;
    }
    std::size_t len = 0;
    while (h + len < H && on[h + len]) ++len;
    const bool wraps = h + len == H && head_len > 0;
    close(h, wraps ? len + head_len : len);
    h += len;
  }
  return events;
}

// Counts for durations under 5 h, 5 to 10 h inclusive, and above 10 h.
inline std::array<double, 3> duration_histogram(std::span<const OutageEvent> events) {
  std::array<double, 3> bins{0, 0, 0};
  for (const auto& e : events) {
    if (e.duration < 5) bins[0] += 1;
    else if (e.duration <= 10) bins[1] += 1;
    else bins[2] += 1;
  }
  return bins;
}

inline constexpr std::array<double, 11> kDepthLevels{0.02, 0.05, 0.10, 0.15, 0.20, 0.25,
                                                     0.30, 0.35, 0.40, 0.45, 0.50};

struct ExceedancePoint {
  double level = 0;
  double hours_per_year = 0;
  bool operator==(const ExceedancePoint&) const = default;
};

inline std::vector<ExceedancePoint> depth_exceedance(const DispatchResult& d, std::string_view region) {
  const auto t = detail::region_totals(d, d.region_index(region));
  std::vector<ExceedancePoint> curve;
  for (double level : kDepthLevels) {
    std::size_t hours = 0;
    for (std::size_t h = 0; h < d.horizon; ++h)
      if (t.demand[h] > 0 && t.shed[h] >= (level - 1e-12) * t.demand[h]) ++hours;
    curve.push_back({level, static_cast<double>(hours) * d.annualization});
  }
  return curve;
}

// Electricity demand minus local generator output.
inline double residual_load(const DispatchResult& d, std::string_view region, std::size_t hour) {
  const auto r = d.region_index(region);
  if (hour >= d.horizon) throw std::out_of_range("hour " + std::to_string(hour) + " outside the horizon");
  double demand = 0;
  for (const auto& s : d.shed)
    if (s.region == r && s.carrier == Carrier::electricity) demand += s.demand[hour];
  double generation = 0;
  for (const auto& u : d.units)
    if (u.region == r && u.kind == TechKind::generator && u.carrier_out == Carrier::electricity)
      generation += u.dispatch[hour];
  return demand - generation;
}

// Energy sent out minus energy received (after losses) on links of a carrier.
inline double net_export(const DispatchResult& d, std::size_t region, std::size_t hour,
                         Carrier carrier = Carrier::electricity) {
  double out = 0;
  for (const auto& f : d.flows) {
    if (f.carrier != carrier) continue;
    const double keep = 1.0 - f.loss_fraction;
    if (f.from == region) out += f.forward[hour] - keep * f.backward[hour];
    else if (f.to == region) out += f.backward[hour] - keep * f.forward[hour];
  }
  return out;
}

struct LullExportRow {
  std::string region;
  double voll = 0;
  std::size_t start = 0;
  std::size_t duration = 0;
  double residual_mwh = 0;
  double shed_mwh = 0;
  double net_export_mwh = 0;
  bool operator==(const LullExportRow&) const = default;
};

// One row per (region, event window). volls is indexed like d.regions.
inline std::vector<LullExportRow> lull_export_table(const DispatchResult& d, std::span<const double> volls,
                                                    double threshold_fraction = 0.001) {
  if (volls.size() != d.regions.size()) throw std::invalid_argument("lull_export_table: one VoLL per region");
  std::vector<LullExportRow> rows;
  for (std::size_t r = 0; r < d.regions.size(); ++r)
    for (const auto& e : detect_events(d, d.regions[r], threshold_fraction)) {
      LullExportRow row{d.regions[r], volls[r], e.start, e.duration, 0, e.energy_mwh, 0};
      for (std::size_t k = 0; k < e.duration; ++k) {
        const std::size_t h = (e.start + k) % d.horizon;
        row.residual_mwh += residual_load(d, d.regions[r], h);
        row.net_export_mwh += net_export(d, r, h);
      }
      rows.push_back(row);
    }
  return rows;
}

enum class LimitFamily { converter_capacity, storage_power, storage_energy, link_capacity };

inline std::string_view to_string(LimitFamily f) {
  switch (f) {
    case LimitFamily::converter_capacity: return "converter_capacity";
    case LimitFamily::storage_power: return "storage_power";
    case LimitFamily::storage_energy: return "storage_energy";
    case LimitFamily::link_capacity: return "link_capacity";
  }
  return "unknown";
}

struct TightLimit {
  std::size_t hour = 0;
  LimitFamily family = LimitFamily::converter_capacity;
  std::string asset;  // technology id or link tag
  bool operator==(const TightLimit&) const = default;
};

struct EnergySource {
  std::string technology;
  TechKind kind = TechKind::storage;
  double energy_mwh = 0;
  double share = 0;
};

struct EventDiagnosis {
  OutageEvent event;
  std::vector<TightLimit> tight;
  std::vector<EnergySource> supply;  // storage discharge and converter output over the event

  bool flagged(LimitFamily f) const {
    return std::any_of(tight.begin(), tight.end(), [f](const TightLimit& t) { return t.family == f; });
  }
  bool flagged_every_hour(LimitFamily f, std::size_t horizon) const {
    for (std::size_t k = 0; k < event.duration; ++k) {
      const std::size_t h = (event.start + k) % horizon;
      if (std::none_of(tight.begin(), tight.end(), [&](const TightLimit& t) { return t.family == f && t.hour == h; }))
        return false;
    }
    return true;
  }
};

// For each event hour, the built assets whose operating limit has slack
// within feas_tol: converter output at capacity, storage discharge at power
// capacity, storage emptied by the end of the hour, or an inbound link at
// capacity.
inline std::vector<EventDiagnosis> binding_limit_diagnosis(const Scenario& s, const LinearProgram& lp,
                                                           std::span<const double> x, double feas_tol = 1e-7,
                                                           double threshold_fraction = 0.001) {
  const auto d = extract_dispatch(s, lp, x);
  const std::size_t H = d.horizon;
  const auto dx = lp.ineq.multiply(x);
  auto slack = [&](std::size_t row) { return lp.ineq_rhs[row] - dx[row]; };

  // Inequality rows of the relevant families indexed by hour.
  std::vector<std::vector<std::size_t>> by_hour(H);
  for (std::size_t i = 0; i < lp.num_ineq(); ++i) {
    const auto& c = lp.ineq_rows[i];
    if (c.kind != RowKind::availability && c.kind != RowKind::discharge_limit && c.kind != RowKind::flow_limit)
      continue;
    if (c.at.hour >= 0) by_hour[static_cast<std::size_t>(c.at.hour)].push_back(i);
  }
  const auto m = layout(s);

  std::vector<EventDiagnosis> out;
  for (std::size_t r = 0; r < s.regions.size(); ++r)
    for (const auto& e : detect_events(d, s.regions[r].id, threshold_fraction)) {
      EventDiagnosis diag{e, {}, {}};
      for (std::size_t k = 0; k < e.duration; ++k) {
        const std::size_t h = (e.start + k) % H;
        for (std::size_t i : by_hour[h]) {
          const auto& c = lp.ineq_rows[i];
          const double tol = feas_tol * std::max(1.0, std::abs(lp.ineq_rhs[i]));
          if (slack(i) > tol) continue;
          if (c.kind == RowKind::flow_limit) {
            const auto& link = s.links[static_cast<std::size_t>(c.at.link)];
            const bool inbound = (c.at.direction == 0 && link.to == s.regions[r].id) ||
                                 (c.at.direction == 1 && link.from == s.regions[r].id);
            const double cap = x[static_cast<std::size_t>(m.link_capacity[static_cast<std::size_t>(c.at.link)])];
            if (inbound && cap > feas_tol)
              diag.tight.push_back({h, LimitFamily::link_capacity, detail::link_tag(static_cast<std::size_t>(c.at.link))});
            continue;
          }
          if (static_cast<std::size_t>(c.at.region) != r) continue;
          const auto t = static_cast<std::size_t>(c.at.tech);
          const auto& tech = s.technologies[t];
          const double cap = x[static_cast<std::size_t>(m.tech[r][t].capacity)];
          if (cap <= feas_tol) continue;
          if (c.kind == RowKind::availability && tech.kind == TechKind::converter)
            diag.tight.push_back({h, LimitFamily::converter_capacity, tech.id});
          else if (c.kind == RowKind::discharge_limit)
            diag.tight.push_back({h, LimitFamily::storage_power, tech.id});
        }
        for (const auto& u : d.units) {
          if (u.region != r || u.kind != TechKind::storage || u.energy_capacity <= feas_tol) continue;
          const double after = u.soc[(h + 1) % H];
          if (after <= feas_tol * std::max(1.0, u.energy_capacity) && u.dispatch[h] > feas_tol)
            diag.tight.push_back({h, LimitFamily::storage_energy, u.id});
        }
      }
      double total = 0;
      for (const auto& u : d.units) {
        if (u.region != r || u.kind == TechKind::generator) continue;
        double energy = 0;
        for (std::size_t k = 0; k < e.duration; ++k) energy += u.dispatch[(e.start + k) % H];
        diag.supply.push_back({u.id, u.kind, energy, 0.0});
        total += energy;
      }
      for (auto& src : diag.supply) src.share = total > 0 ? src.energy_mwh / total : 0.0;
      out.push_back(std::move(diag));
    }
  return out;
}

struct MeritOrderViolation {
  std::string region;
  Carrier carrier = Carrier::electricity;
  std::size_t hour = 0;
  Sector shedding = Sector::households;
  Sector cheaper = Sector::households;
};

// A sector that sheds more than rel_tol of its demand requires every sector
// with strictly lower VoLL in the same region and carrier to be fully shed.
inline std::vector<MeritOrderViolation> merit_order_violations(const DispatchResult& d, double rel_tol = 1e-6) {
  std::vector<MeritOrderViolation> out;
  for (std::size_t a = 0; a < d.shed.size(); ++a) {
    const auto& hi = d.shed[a];
    for (std::size_t b = 0; b < d.shed.size(); ++b) {
      const auto& lo = d.shed[b];
      if (lo.region != hi.region || lo.carrier != hi.carrier || !(lo.voll < hi.voll)) continue;
      for (std::size_t h = 0; h < d.horizon; ++h) {
        if (hi.shed[h] <= rel_tol * std::max(hi.demand[h], 1.0)) continue;
        if (lo.demand[h] - lo.shed[h] > rel_tol * std::max(lo.demand[h], 1.0))
          out.push_back({d.regions[hi.region], hi.carrier, h, hi.sector, lo.sector});
      }
    }
  }
  return out;
}

struct RegionMetrics {
  std::string region;
  double loss_share_percent = 0;
  double lole_hours = 0;
  double event_count = 0;
  std::vector<OutageEvent> events;  // all years, in year order
  std::array<double, 3> duration_histogram{0, 0, 0};
  std::vector<ExceedancePoint> exceedance;
  SectorMap<double> sector_shed_mwh{};  // annualized
};

struct AdequacyReport {
  std::size_t years = 0;
  double threshold_fraction = 0.001;
  std::vector<RegionMetrics> regions;
  double max_unserved_fraction = 0;   // system-wide, worst hour
  double hours_above_5pct_loss = 0;   // system-wide, annualized
};

// Per-region statistics averaged over weather years with identical regions.
inline AdequacyReport make_report(std::span<const DispatchResult> years, double threshold_fraction = 0.001) {
  if (years.empty()) throw std::invalid_argument("make_report: no dispatch results");
  detail::check_threshold(threshold_fraction);
  AdequacyReport rep;
  rep.years = years.size();
  rep.threshold_fraction = threshold_fraction;
  const auto& ids = years.front().regions;
  for (const auto& y : years)
    if (y.regions != ids) throw std::invalid_argument("make_report: years disagree on the region set");
  const double n = static_cast<double>(years.size());

  for (const auto& id : ids) {
    RegionMetrics m;
    m.region = id;
    m.exceedance.resize(kDepthLevels.size());
    for (std::size_t i = 0; i < kDepthLevels.size(); ++i) m.exceedance[i].level = kDepthLevels[i];
    for (const auto& y : years) {
      m.loss_share_percent += loss_share(y, id) / n;
      m.lole_hours += lole_hours(y, id, threshold_fraction) / n;
      auto ev = detect_events(y, id, threshold_fraction);
      m.event_count += static_cast<double>(ev.size()) / n;
      const auto hist = duration_histogram(ev);
      for (std::size_t b = 0; b < 3; ++b) m.duration_histogram[b] += hist[b] / n;
      const auto curve = depth_exceedance(y, id);
      for (std::size_t i = 0; i < curve.size(); ++i) m.exceedance[i].hours_per_year += curve[i].hours_per_year / n;
      const auto r = y.region_index(id);
      for (const auto& s : y.shed) {
        if (s.region != r) continue;
        double e = 0;
        for (double v : s.shed) e += v;
        m.sector_shed_mwh[index_of(s.sector)] += e * y.annualization / n;
      }
      m.events.insert(m.events.end(), ev.begin(), ev.end());
    }
    rep.regions.push_back(std::move(m));
  }

  for (const auto& y : years) {
    std::vector<double> demand(y.horizon, 0.0), shed(y.horizon, 0.0);
    for (const auto& s : y.shed)
      for (std::size_t h = 0; h < y.horizon; ++h) {
        demand[h] += s.demand[h];
        shed[h] += s.shed[h];
      }
    double worst = 0;
    std::size_t above = 0;
    for (std::size_t h = 0; h < y.horizon; ++h) {
      if (demand[h] <= 0) continue;
      const double f = shed[h] / demand[h];
      worst = std::max(worst, f);
      if (f > 0.05) ++above;
    }
    rep.max_unserved_fraction = std::max(rep.max_unserved_fraction, worst);
    rep.hours_above_5pct_loss += static_cast<double>(above) * y.annualization / n;
  }
  return rep;
}

}  // namespace adequacy
