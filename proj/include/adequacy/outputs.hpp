#pragma once

// Serializers for every file the command line writes. All return text so
// callers control where and when bytes hit the disk.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "adequacy/analytics.hpp"
#include "adequacy/csv.hpp"
#include "adequacy/experiments.hpp"
#include "adequacy/simplex.hpp"

namespace adequacy::outputs {

using nlohmann::json;

// 12 significant digits; non-finite values become null.
inline json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return csv::round12(v);
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string solution_json(const Solution& sol) {
  json j;
  j["status"] = std::string(to_string(sol.status));
  j["objective"] = number(sol.objective);
  j["c_system"] = number(sol.costs.system);
  j["c_lol"] = number(sol.costs.loss_of_load);
  j["iterations"] = sol.iterations;
  if (!sol.message.empty()) j["message"] = sol.message;
  return dump(j);
}

inline std::string capacities_csv(const Scenario& s, const DispatchResult& d) {
  csv::Writer w({"region", "technology", "kind", "capacity_mw", "energy_capacity_mwh"});
  for (const auto& u : d.units)
    w.row({s.regions[u.region].id, u.id, std::string(to_string(u.kind)), csv::format(u.capacity),
           csv::format(u.energy_capacity)});
  return w.str();
}

inline std::string link_capacities_csv(const Scenario& s, const DispatchResult& d) {
  csv::Writer w({"link", "from", "to", "carrier", "capacity_mw"});
  for (const auto& f : d.flows)
    w.row({detail::link_tag(f.link), s.regions[f.from].id, s.regions[f.to].id, std::string(to_string(f.carrier)),
           csv::format(f.capacity)});
  return w.str();
}

inline std::string dispatch_csv(const DispatchResult& d) {
  csv::Writer w({"region", "technology", "hour", "output_mw", "charge_mw", "soc_mwh"});
  for (const auto& u : d.units)
    for (std::size_t h = 0; h < d.horizon; ++h)
      w.row({d.regions[u.region], u.id, std::to_string(h), csv::format(u.dispatch[h]),
             csv::format(u.charge.empty() ? 0.0 : u.charge[h]), csv::format(u.soc.empty() ? 0.0 : u.soc[h])});
  return w.str();
}

inline std::string shed_csv(const DispatchResult& d) {
  csv::Writer w({"region", "carrier", "sector", "hour", "demand_mwh", "shed_mwh"});
  for (const auto& s : d.shed)
    for (std::size_t h = 0; h < d.horizon; ++h)
      w.row({d.regions[s.region], std::string(to_string(s.carrier)), std::string(to_string(s.sector)),
             std::to_string(h), csv::format(s.demand[h]), csv::format(s.shed[h])});
  return w.str();
}

inline std::string flows_csv(const DispatchResult& d) {
  csv::Writer w({"link", "hour", "forward_mw", "backward_mw"});
  for (const auto& f : d.flows)
    for (std::size_t h = 0; h < d.horizon; ++h)
      w.row({detail::link_tag(f.link), std::to_string(h), csv::format(f.forward[h]), csv::format(f.backward[h])});
  return w.str();
}

inline json event_json(const OutageEvent& e) {
  return {{"start", e.start},
          {"duration_h", e.duration},
          {"energy_mwh", number(e.energy_mwh)},
          {"max_depth", number(e.max_depth)}};
}

inline std::string report_json(const AdequacyReport& rep) {
  json j;
  j["years"] = rep.years;
  j["event_threshold_fraction"] = number(rep.threshold_fraction);
  j["system"] = {{"max_unserved_fraction", number(rep.max_unserved_fraction)},
                 {"hours_above_5pct_loss", number(rep.hours_above_5pct_loss)}};
  json regions = json::array();
  for (const auto& m : rep.regions) {
    json r;
    r["region"] = m.region;
    r["loss_share_percent"] = number(m.loss_share_percent);
    r["lole_hours"] = number(m.lole_hours);
    r["event_count"] = number(m.event_count);
    r["duration_histogram"] = {{"under_5h", number(m.duration_histogram[0])},
                               {"5_to_10h", number(m.duration_histogram[1])},
                               {"over_10h", number(m.duration_histogram[2])}};
    json curve = json::array();
    for (const auto& p : m.exceedance) curve.push_back({{"level", number(p.level)}, {"hours_per_year", number(p.hours_per_year)}});
    r["depth_exceedance"] = curve;
    json sectors = json::object();
    for (Sector s : kSectors) sectors[std::string(to_string(s))] = number(m.sector_shed_mwh[index_of(s)]);
    r["sector_shed_mwh_per_year"] = sectors;
    json events = json::array();
    for (const auto& e : m.events) events.push_back(event_json(e));
    r["events"] = events;
    regions.push_back(r);
  }
  j["regions"] = regions;
  return dump(j);
}

inline std::string events_csv(const AdequacyReport& rep) {
  csv::Writer w({"region", "start", "duration_h", "energy_mwh", "max_depth"});
  for (const auto& m : rep.regions)
    for (const auto& e : m.events)
      w.row({e.region, std::to_string(e.start), std::to_string(e.duration), csv::format(e.energy_mwh),
             csv::format(e.max_depth)});
  return w.str();
}

inline std::string exceedance_csv(const AdequacyReport& rep) {
  csv::Writer w({"region", "level", "hours_per_year"});
  for (const auto& m : rep.regions)
    for (const auto& p : m.exceedance) w.row({m.region, csv::format(p.level), csv::format(p.hours_per_year)});
  return w.str();
}

inline std::string fig6_csv(std::span<const LullExportRow> rows) {
  csv::Writer w({"region", "voll", "residual_mwh", "shed_mwh", "net_export_mwh"});
  for (const auto& r : rows)
    w.row({r.region, csv::format(r.voll), csv::format(r.residual_mwh), csv::format(r.shed_mwh),
           csv::format(r.net_export_mwh)});
  return w.str();
}

inline std::string diagnosis_csv(std::span<const EventDiagnosis> diags) {
  csv::Writer w({"region", "event_start", "hour", "limit", "asset"});
  for (const auto& d : diags)
    for (const auto& t : d.tight)
      w.row({d.event.region, std::to_string(d.event.start), std::to_string(t.hour), std::string(to_string(t.family)),
             t.asset});
  return w.str();
}

inline std::string supply_split_csv(std::span<const EventDiagnosis> diags) {
  csv::Writer w({"region", "event_start", "technology", "kind", "energy_mwh", "share"});
  for (const auto& d : diags)
    for (const auto& s : d.supply)
      w.row({d.event.region, std::to_string(d.event.start), s.technology, std::string(to_string(s.kind)),
             csv::format(s.energy_mwh), csv::format(s.share)});
  return w.str();
}

inline std::string stabilization_json(const StabilizationReport& rep) {
  json j;
  j["threshold_h_per_year"] = number(rep.threshold_h_per_year);
  j["feasible"] = rep.feasible;
  j["baseline_cost"] = number(rep.baseline_cost);
  j["stabilized_cost"] = number(rep.stabilized_cost);
  j["cost_delta_percent"] = number(rep.cost_delta_percent);
  j["rounds"] = rep.rounds;
  json deltas = json::array();
  for (const auto& d : rep.deltas)
    deltas.push_back({{"region", d.region},
                      {"technology", d.technology},
                      {"baseline_mw", number(d.baseline_mw)},
                      {"stabilized_mw", number(d.stabilized_mw)},
                      {"delta_percent", d.delta_percent ? number(*d.delta_percent) : json(nullptr)}});
  j["deltas"] = deltas;
  json lole = json::object();
  for (const auto& [r, v] : rep.residual_lole) lole[r] = number(v);
  j["residual_lole"] = lole;
  if (!rep.feasible) j["binding_caps"] = rep.binding_caps;
  return dump(j);
}

inline std::string sweep_csv(const SweepResult& res) {
  csv::Writer w({"factor", "region", "voll_eur_per_kwh", "loss_share_percent", "class"});
  for (const auto& rec : res.records)
    for (const auto& r : rec.regions)
      w.row({csv::format(rec.factor), r.region, csv::format(r.voll), csv::format(r.loss_share_percent),
             std::string(to_string(r.region_class))});
  return w.str();
}

}  // namespace adequacy::outputs
