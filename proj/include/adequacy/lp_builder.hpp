#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adequacy/linear_program.hpp"
#include "adequacy/scenario.hpp"

namespace adequacy {

struct BuildOptions {
  // Multiplies every sector VoLL (sensitivity sweeps).
  double voll_factor = 1.0;
  // Per-region cap on total shed energy over the horizon, MWh. Empty = none.
  std::vector<std::optional<double>> shed_cap_mwh;
  // Capacity columns pinned to a value, keyed by column name (CAP_/ECAP_/LCAP_).
  std::map<std::string, double> fixed_capacities;
};

namespace detail {

inline std::string join(std::initializer_list<std::string_view> parts) {
  std::string out;
  for (auto p : parts) {
    if (!out.empty()) out.push_back('_');
    out.append(p);
  }
  return out;
}

inline std::string link_tag(std::size_t l) { return "L" + std::to_string(l); }
inline std::string_view direction_tag(int d) { return d == 0 ? "f" : "b"; }

}  // namespace detail

// Column blocks of one (region, technology) pair; -1 where not applicable.
struct TechBlock {
  int capacity = -1;
  int energy_capacity = -1;
  int dispatch = -1;  // first hour
  int charge = -1;
  int discharge = -1;
  int soc = -1;
  const std::vector<double>* factors = nullptr;
};

// Locates column blocks of a built program without scanning the catalog.
struct ModelLayout {
  std::size_t horizon = 0;
  std::vector<std::vector<TechBlock>> tech;  // [region][technology]
  std::vector<int> link_capacity;            // [link]
  std::vector<int> flow;                     // [link], first of 2*H columns (fwd hours, then bwd)
  std::vector<int> shed;                     // [demand series], first hour; -1 if shedding is off

  int dispatch(std::size_t r, std::size_t t, std::size_t h) const {
    const int b = tech[r][t].dispatch;
    return b < 0 ? -1 : b + static_cast<int>(h);
  }
};

inline ModelLayout layout(const Scenario& s) {
  ModelLayout m;
  m.horizon = static_cast<std::size_t>(s.config.horizon_hours);
  const int H = s.config.horizon_hours;
  const std::size_t R = s.regions.size();
  const std::size_t T = s.technologies.size();
  m.tech.assign(R, std::vector<TechBlock>(T));
  int next = 0;
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t t = 0; t < T; ++t) {
      const auto& tech = s.technologies[t];
      auto& b = m.tech[r][t];
      if (tech.kind == TechKind::generator) {
        const Profile* p = s.profile(s.regions[r].id, tech.id);
        if (!p) continue;
        b.factors = &p->factors;
      }
      b.capacity = next++;
      if (tech.kind == TechKind::storage) b.energy_capacity = next++;
    }
  m.link_capacity.resize(s.links.size());
  for (auto& c : m.link_capacity) c = next++;
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t t = 0; t < T; ++t)
      if (m.tech[r][t].capacity >= 0 && s.technologies[t].kind != TechKind::storage) {
        m.tech[r][t].dispatch = next;
        next += H;
      }
  for (auto field : {&TechBlock::charge, &TechBlock::discharge, &TechBlock::soc})
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t t = 0; t < T; ++t)
        if (s.technologies[t].kind == TechKind::storage) {
          m.tech[r][t].*field = next;
          next += H;
        }
  m.flow.resize(s.links.size());
  for (auto& f : m.flow) {
    f = next;
    next += 2 * H;
  }
  m.shed.assign(s.demands.size(), -1);
  if (s.config.allow_load_shedding)
    for (auto& c : m.shed) {
      c = next;
      next += H;
    }
  return m;
}

// Translates a validated scenario into the cost-minimizing dispatch and
// expansion program. Shedding is priced at sector VoLL (EUR/kWh * 1000).
inline LinearProgram build(const Scenario& s, const BuildOptions& opt = {}) {
  {
    auto violations = validate(s);
    for (const auto& v : violations)
      if (v.severity == Severity::error)
        throw InputError("scenario invalid: " + v.location() + ": " + v.message);
  }
  if (!opt.shed_cap_mwh.empty() && opt.shed_cap_mwh.size() != s.regions.size())
    throw std::invalid_argument("build: shed caps must be given per region");

  using detail::join;
  using E = SparseRows::Entry;
  const auto m = layout(s);
  const int H = s.config.horizon_hours;
  const auto Hs = static_cast<std::size_t>(H);
  const double year_share = 1.0 / s.config.annualization();
  const std::size_t R = s.regions.size();
  const std::size_t T = s.technologies.size();

  LinearProgram lp;
  auto hour_tag = [](std::size_t h) { return std::to_string(h); };

  // Columns, in layout order.
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t t = 0; t < T; ++t) {
      const auto& b = m.tech[r][t];
      if (b.capacity < 0) continue;
      const auto& tech = s.technologies[t];
      Descriptor d{.region = static_cast<int>(r), .tech = static_cast<int>(t)};
      lp.add_variable({VarKind::capacity, d}, join({"CAP", s.regions[r].id, tech.id}),
                      tech.capex_annual * voll::kKwhPerMwh * year_share);
      if (b.energy_capacity >= 0)
        lp.add_variable({VarKind::energy_capacity, d}, join({"ECAP", s.regions[r].id, tech.id}),
                        tech.energy_capex_annual * voll::kKwhPerMwh * year_share);
    }
  for (std::size_t l = 0; l < s.links.size(); ++l)
    lp.add_variable({VarKind::link_capacity, {.link = static_cast<int>(l), .carrier = s.links[l].carrier}},
                    join({"LCAP", detail::link_tag(l)}), s.links[l].capex_annual * year_share);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t t = 0; t < T; ++t) {
      if (m.tech[r][t].dispatch < 0) continue;
      const auto& tech = s.technologies[t];
      for (std::size_t h = 0; h < Hs; ++h)
        lp.add_variable({VarKind::dispatch, {.region = static_cast<int>(r), .tech = static_cast<int>(t),
                                             .hour = static_cast<int>(h), .carrier = tech.carrier_out}},
                        join({"DSP", s.regions[r].id, tech.id, hour_tag(h)}), tech.opex_var);
    }
  const std::array<std::pair<VarKind, std::string_view>, 3> storage_families{
      {{VarKind::charge, "CHG"}, {VarKind::discharge, "DCH"}, {VarKind::soc, "SOC"}}};
  for (const auto& [kind, tag] : storage_families)
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t t = 0; t < T; ++t) {
        const auto& tech = s.technologies[t];
        if (tech.kind != TechKind::storage) continue;
        const double c = kind == VarKind::discharge ? tech.opex_var : 0.0;
        for (std::size_t h = 0; h < Hs; ++h)
          lp.add_variable({kind, {.region = static_cast<int>(r), .tech = static_cast<int>(t),
                                  .hour = static_cast<int>(h), .carrier = tech.carrier_out}},
                          join({tag, s.regions[r].id, tech.id, hour_tag(h)}), c);
      }
  for (std::size_t l = 0; l < s.links.size(); ++l)
    for (int d = 0; d < 2; ++d)
      for (std::size_t h = 0; h < Hs; ++h)
        lp.add_variable({VarKind::flow, {.link = static_cast<int>(l), .hour = static_cast<int>(h),
                                         .direction = d, .carrier = s.links[l].carrier}},
                        join({"FLW", detail::link_tag(l), detail::direction_tag(d), hour_tag(h)}), 0.0);
  for (std::size_t k = 0; k < s.demands.size(); ++k) {
    if (m.shed[k] < 0) continue;
    const auto& dem = s.demands[k];
    const auto r = *s.region_index(dem.region);
    const double price = s.regions[r].sector_voll[index_of(dem.sector)] * voll::kKwhPerMwh * opt.voll_factor;
    for (std::size_t h = 0; h < Hs; ++h)
      lp.add_variable({VarKind::shed, {.region = static_cast<int>(r), .hour = static_cast<int>(h),
                                       .carrier = dem.carrier, .sector = dem.sector}},
                      join({"SHD", dem.region, short_name(dem.carrier), to_string(dem.sector), hour_tag(h)}),
                      price);
  }

  // Nodal balance per region, carrier and hour.
  for (std::size_t r = 0; r < R; ++r)
    for (Carrier k : kCarriers) {
      std::vector<double> demand(Hs, 0.0);
      std::vector<std::size_t> series;
      for (std::size_t i = 0; i < s.demands.size(); ++i)
        if (s.demands[i].region == s.regions[r].id && s.demands[i].carrier == k) {
          series.push_back(i);
          for (std::size_t h = 0; h < Hs; ++h) demand[h] += s.demands[i].demand[h];
        }
      for (std::size_t h = 0; h < Hs; ++h) {
        std::vector<E> row;
        for (std::size_t t = 0; t < T; ++t) {
          const auto& tech = s.technologies[t];
          const auto& b = m.tech[r][t];
          if (b.dispatch >= 0) {
            const int col = b.dispatch + static_cast<int>(h);
            if (tech.carrier_out == k) row.push_back({col, 1.0});
            if (tech.kind == TechKind::converter && tech.carrier_in == k)
              row.push_back({col, -1.0 / tech.efficiency});
          }
          if (tech.kind == TechKind::storage && tech.carrier_out == k) {
            row.push_back({b.discharge + static_cast<int>(h), 1.0});
            row.push_back({b.charge + static_cast<int>(h), -1.0});
          }
        }
        for (std::size_t l = 0; l < s.links.size(); ++l) {
          const auto& link = s.links[l];
          if (link.carrier != k) continue;
          const int fwd = m.flow[l] + static_cast<int>(h);
          const int bwd = m.flow[l] + H + static_cast<int>(h);
          const double keep = 1.0 - link.loss_fraction;
          if (link.from == s.regions[r].id) {
            row.push_back({fwd, -1.0});
            row.push_back({bwd, keep});
          } else if (link.to == s.regions[r].id) {
            row.push_back({fwd, keep});
            row.push_back({bwd, -1.0});
          }
        }
        for (std::size_t i : series)
          if (m.shed[i] >= 0) row.push_back({m.shed[i] + static_cast<int>(h), 1.0});
        if (row.empty() && demand[h] == 0.0) continue;
        lp.add_equality({RowKind::balance, {.region = static_cast<int>(r), .hour = static_cast<int>(h), .carrier = k}},
                        join({"BAL", s.regions[r].id, short_name(k), hour_tag(h)}), std::move(row), demand[h]);
      }
    }

  // Cyclic storage dynamics: SoC(h+1) = SoC(h) + eta_c*charge(h) - discharge(h)/eta_d.
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t t = 0; t < T; ++t) {
      const auto& tech = s.technologies[t];
      if (tech.kind != TechKind::storage) continue;
      const auto& b = m.tech[r][t];
      for (std::size_t h = 0; h < Hs; ++h) {
        const int hi = static_cast<int>(h);
        const int next = static_cast<int>((h + 1) % Hs);
        lp.add_equality({RowKind::storage_dynamics, {.region = static_cast<int>(r), .tech = static_cast<int>(t), .hour = hi}},
                        join({"DYN", s.regions[r].id, tech.id, hour_tag(h)}),
                        {{b.soc + next, 1.0},
                         {b.soc + hi, -1.0},
                         {b.charge + hi, -tech.charge_efficiency},
                         {b.discharge + hi, 1.0 / tech.discharge_efficiency}},
                        0.0);
      }
    }

  for (const auto& [name, value] : opt.fixed_capacities) {
    auto it = std::find(lp.column_names.begin(), lp.column_names.end(), name);
    if (it == lp.column_names.end()) throw InputError("fixed capacity refers to unknown column '" + name + "'");
    const auto j = static_cast<std::size_t>(it - lp.column_names.begin());
    const auto kind = lp.variables[j].kind;
    if (kind != VarKind::capacity && kind != VarKind::energy_capacity && kind != VarKind::link_capacity)
      throw InputError("fixed capacity '" + name + "' is not a capacity column");
    if (!(value >= 0)) throw InputError("fixed capacity '" + name + "' must be non-negative");
    lp.add_equality({RowKind::fixed_capacity, lp.variables[j].at}, "FIX_" + name,
                    {{static_cast<int>(j), 1.0}}, value);
  }

  // Availability and operating limits.
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t t = 0; t < T; ++t) {
      const auto& b = m.tech[r][t];
      if (b.dispatch < 0) continue;
      const auto& tech = s.technologies[t];
      for (std::size_t h = 0; h < Hs; ++h) {
        const double cf = b.factors ? (*b.factors)[h] : 1.0;
        lp.add_inequality({RowKind::availability, {.region = static_cast<int>(r), .tech = static_cast<int>(t), .hour = static_cast<int>(h)}},
                          join({"AVL", s.regions[r].id, tech.id, hour_tag(h)}),
                          {{b.dispatch + static_cast<int>(h), 1.0}, {b.capacity, -cf}}, 0.0);
      }
    }
  const std::array<std::tuple<RowKind, std::string_view, int TechBlock::*, int TechBlock::*>, 3> limits{
      {{RowKind::charge_limit, "CHL", &TechBlock::charge, &TechBlock::capacity},
       {RowKind::discharge_limit, "DCL", &TechBlock::discharge, &TechBlock::capacity},
       {RowKind::soc_limit, "SCL", &TechBlock::soc, &TechBlock::energy_capacity}}};
  for (const auto& [kind, tag, op, cap] : limits)
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t t = 0; t < T; ++t) {
        const auto& tech = s.technologies[t];
        if (tech.kind != TechKind::storage) continue;
        const auto& b = m.tech[r][t];
        for (std::size_t h = 0; h < Hs; ++h)
          lp.add_inequality({kind, {.region = static_cast<int>(r), .tech = static_cast<int>(t), .hour = static_cast<int>(h)}},
                            join({tag, s.regions[r].id, tech.id, hour_tag(h)}),
                            {{b.*op + static_cast<int>(h), 1.0}, {b.*cap, -1.0}}, 0.0);
      }
  for (std::size_t l = 0; l < s.links.size(); ++l)
    for (int d = 0; d < 2; ++d)
      for (std::size_t h = 0; h < Hs; ++h)
        lp.add_inequality({RowKind::flow_limit, {.link = static_cast<int>(l), .hour = static_cast<int>(h), .direction = d,
                                                 .carrier = s.links[l].carrier}},
                          join({"FLC", detail::link_tag(l), detail::direction_tag(d), hour_tag(h)}),
                          {{m.flow[l] + d * H + static_cast<int>(h), 1.0}, {m.link_capacity[l], -1.0}}, 0.0);

  for (std::size_t k = 0; k < s.demands.size(); ++k) {
    if (m.shed[k] < 0) continue;
    const auto& dem = s.demands[k];
    const int r = static_cast<int>(*s.region_index(dem.region));
    for (std::size_t h = 0; h < Hs; ++h)
      lp.add_inequality({RowKind::shed_bound, {.region = r, .hour = static_cast<int>(h), .carrier = dem.carrier, .sector = dem.sector}},
                        join({"SHB", dem.region, short_name(dem.carrier), to_string(dem.sector), hour_tag(h)}),
                        {{m.shed[k] + static_cast<int>(h), 1.0}}, dem.demand[h]);
  }

  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t t = 0; t < T; ++t) {
      const auto& b = m.tech[r][t];
      const auto& tech = s.technologies[t];
      if (b.capacity < 0 || !tech.capacity_max) continue;
      lp.add_inequality({RowKind::capacity_cap, {.region = static_cast<int>(r), .tech = static_cast<int>(t)}},
                        join({"CMX", s.regions[r].id, tech.id}), {{b.capacity, 1.0}}, *tech.capacity_max);
    }
  for (std::size_t l = 0; l < s.links.size(); ++l)
    if (s.links[l].capacity_max)
      lp.add_inequality({RowKind::link_cap, {.link = static_cast<int>(l), .carrier = s.links[l].carrier}},
                        join({"LMX", detail::link_tag(l)}), {{m.link_capacity[l], 1.0}}, *s.links[l].capacity_max);

  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t t = 0; t < T; ++t) {
      const auto& b = m.tech[r][t];
      const auto& tech = s.technologies[t];
      if (b.dispatch < 0 || !tech.max_full_load_hours) continue;
      std::vector<E> row;
      for (std::size_t h = 0; h < Hs; ++h) row.push_back({b.dispatch + static_cast<int>(h), 1.0});
      row.push_back({b.capacity, -*tech.max_full_load_hours * year_share});
      lp.add_inequality({RowKind::energy_budget, {.region = static_cast<int>(r), .tech = static_cast<int>(t)}},
                        join({"BUD", s.regions[r].id, tech.id}), std::move(row), 0.0);
    }

  for (std::size_t r = 0; r < opt.shed_cap_mwh.size(); ++r) {
    if (!opt.shed_cap_mwh[r]) continue;
    std::vector<E> row;
    for (std::size_t k = 0; k < s.demands.size(); ++k)
      if (m.shed[k] >= 0 && s.demands[k].region == s.regions[r].id)
        for (std::size_t h = 0; h < Hs; ++h) row.push_back({m.shed[k] + static_cast<int>(h), 1.0});
    if (row.empty()) continue;
    lp.add_inequality({RowKind::shed_cap, {.region = static_cast<int>(r)}}, join({"STB", s.regions[r].id}),
                      std::move(row), *opt.shed_cap_mwh[r]);
  }
  return lp;
}

}  // namespace adequacy
