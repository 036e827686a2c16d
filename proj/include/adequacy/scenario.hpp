#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "adequacy/csv.hpp"
#include "adequacy/types.hpp"
#include "adequacy/voll.hpp"

namespace adequacy {

struct Region {
  std::string id;
  std::string name;
  double country_voll = 0;          // EUR/kWh
  SectorMap<double> sector_voll{};  // EUR/kWh, derived from demand shares at load

  bool operator==(const Region&) const = default;
};

struct Technology {
  std::string id;
  TechKind kind = TechKind::generator;
  std::optional<Carrier> carrier_in;
  Carrier carrier_out = Carrier::electricity;
  double efficiency = 1.0;
  double capex_annual = 0;  // EUR/(kW*a) of power capacity
  double opex_var = 0;      // EUR/MWh of output
  std::optional<double> capacity_max;  // MW
  double energy_capex_annual = 0;      // EUR/(kWh*a), storage only
  double charge_efficiency = 1.0;
  double discharge_efficiency = 1.0;
  // Annual energy budget as full-load hours (dispatchable renewables).
  std::optional<double> max_full_load_hours;

  bool operator==(const Technology&) const = default;
};

struct Link {
  std::string from;
  std::string to;
  Carrier carrier = Carrier::electricity;
  double capex_annual = 0;  // EUR/(MW*a)
  double loss_fraction = 0;
  std::optional<double> capacity_max;  // MW

  bool operator==(const Link&) const = default;
};

struct Profile {
  std::string region;
  std::string technology;
  std::vector<double> factors;

  bool operator==(const Profile&) const = default;
};

struct DemandSeries {
  std::string region;
  Carrier carrier = Carrier::electricity;
  Sector sector = Sector::households;
  std::vector<double> demand;  // MWh per hour

  bool operator==(const DemandSeries&) const = default;
};

struct SolverSettings {
  double feas_tol = 1e-7;
  double opt_tol = 1e-7;
  std::optional<std::int64_t> max_iters;

  bool operator==(const SolverSettings&) const = default;
};

struct RunConfig {
  int horizon_hours = 0;
  int hours_per_year = 8760;
  SolverSettings solver;
  double event_threshold_fraction = 0.001;
  bool allow_load_shedding = true;
  voll::SectorVollBasis sector_voll_basis = voll::kDefaultSectorBasis;
  std::optional<double> cone;  // EUR/(kW*a), reporting only

  bool operator==(const RunConfig&) const = default;

  // hours_per_year / horizon_hours: turns horizon totals into per-year figures.
  double annualization() const {
    return static_cast<double>(hours_per_year) / static_cast<double>(horizon_hours);
  }
};

struct Scenario {
  std::vector<Region> regions;
  std::vector<Technology> technologies;
  std::vector<Link> links;
  std::vector<Profile> profiles;
  std::vector<DemandSeries> demands;
  RunConfig config;

  bool operator==(const Scenario&) const = default;

  std::optional<std::size_t> region_index(std::string_view id) const {
    for (std::size_t i = 0; i < regions.size(); ++i)
      if (regions[i].id == id) return i;
    return std::nullopt;
  }
  std::optional<std::size_t> technology_index(std::string_view id) const {
    for (std::size_t i = 0; i < technologies.size(); ++i)
      if (technologies[i].id == id) return i;
    return std::nullopt;
  }
  const Profile* profile(std::string_view region, std::string_view tech) const {
    for (const auto& p : profiles)
      if (p.region == region && p.technology == tech) return &p;
    return nullptr;
  }
};

enum class Severity { error, warning };

struct Violation {
  Severity severity = Severity::error;
  std::string file;
  std::size_t row = 0;  // 1-based data row in canonical file order, 0 = whole file
  std::string message;

  std::string location() const { return row ? file + ":" + std::to_string(row) : file; }
};

namespace detail {

inline bool valid_id(std::string_view id) {
  if (id.empty()) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

inline int file_rank(std::string_view file) {
  static constexpr std::array<std::string_view, 6> kOrder{
      "config.json", "regions.csv", "technologies.csv", "links.csv", "profiles.csv",
      "sector_demand.csv"};
  for (std::size_t i = 0; i < kOrder.size(); ++i)
    if (kOrder[i] == file) return static_cast<int>(i);
  return static_cast<int>(kOrder.size());
}

// Demand-energy weights per sector over all carriers; uniform when a region has no demand.
inline SectorMap<double> sector_weights(const Scenario& s, std::string_view region) {
  SectorMap<double> w{};
  double total = 0;
  for (const auto& d : s.demands) {
    if (d.region != region) continue;
    double e = 0;
    for (double v : d.demand) e += v;
    w[index_of(d.sector)] += e;
    total += e;
  }
  if (!(total > 0)) {
    w.fill(1.0 / static_cast<double>(kSectorCount));
    return w;
  }
  for (double& v : w) v /= total;
  return w;
}

class TableReader {
 public:
  TableReader(csv::Table table, std::vector<std::string> required,
              std::vector<std::string> optional = {})
      : t_(std::move(table)) {
    std::vector<std::string> known = required;
    known.insert(known.end(), optional.begin(), optional.end());
    for (const auto& h : t_.header)
      if (std::find(known.begin(), known.end(), h) == known.end())
        throw InputError(t_.file, 1, h, "unknown column");
    for (const auto& r : required)
      if (!t_.column(r)) throw InputError(t_.file, 1, r, "missing column");
  }

  std::size_t size() const { return t_.rows.size(); }
  std::size_t line(std::size_t r) const { return t_.lines[r]; }
  const std::string& file() const { return t_.file; }

  const std::string& text(std::size_t r, std::string_view col) const {
    static const std::string kEmpty;
    auto c = t_.column(col);
    return c ? t_.rows[r][*c] : kEmpty;
  }
  std::optional<double> optional_number(std::size_t r, std::string_view col) const {
    const std::string& cell = text(r, col);
    if (cell.empty()) return std::nullopt;
    auto v = csv::parse_double(cell);
    if (!v) fail(r, col, "malformed number '" + cell + "'");
    return v;
  }
  double number(std::size_t r, std::string_view col, std::optional<double> fallback = {}) const {
    auto v = optional_number(r, col);
    if (v) return *v;
    if (fallback) return *fallback;
    fail(r, col, "value required");
  }
  long long integer(std::size_t r, std::string_view col) const {
    auto v = csv::parse_int(text(r, col));
    if (!v) fail(r, col, "malformed integer '" + text(r, col) + "'");
    return *v;
  }
  [[noreturn]] void fail(std::size_t r, std::string_view col, const std::string& what) const {
    throw InputError(t_.file, t_.lines[r], std::string(col), what);
  }

 private:
  csv::Table t_;
};

// Collects hourly values keyed by series and checks that hours are dense.
template <typename Key>
class SeriesAssembler {
 public:
  explicit SeriesAssembler(int horizon) : horizon_(horizon) {}

  void add(const TableReader& t, std::size_t r, const Key& key, long long hour, double value) {
    if (hour < 0 || hour >= horizon_)
      t.fail(r, "hour", "hour " + std::to_string(hour) + " outside horizon 0.." +
                            std::to_string(horizon_ - 1));
    auto [it, inserted] = series_.try_emplace(key, Entry{});
    if (inserted) {
      it->second.values.assign(static_cast<std::size_t>(horizon_), 0.0);
      it->second.seen.assign(static_cast<std::size_t>(horizon_), false);
      it->second.first_row = r;
    }
    auto h = static_cast<std::size_t>(hour);
    if (it->second.seen[h]) t.fail(r, "hour", "duplicate hour " + std::to_string(hour));
    it->second.seen[h] = true;
    it->second.values[h] = value;
  }

  template <typename Describe>
  std::map<Key, std::vector<double>> finish(const TableReader& t, Describe describe) && {
    std::map<Key, std::vector<double>> out;
    for (auto& [key, e] : series_) {
      for (std::size_t h = 0; h < e.seen.size(); ++h)
        if (!e.seen[h])
          t.fail(e.first_row, "hour", describe(key) + " is missing hour " + std::to_string(h));
      out.emplace(key, std::move(e.values));
    }
    return out;
  }

 private:
  struct Entry {
    std::vector<double> values;
    std::vector<bool> seen;
    std::size_t first_row = 0;
  };
  int horizon_;
  std::map<Key, Entry> series_;
};

inline RunConfig parse_config(const std::filesystem::path& path) {
  const std::string name = "config.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(name, 0, "", "cannot open file '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(name, 0, "", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError(name, 0, "", "top level must be an object");
  static const std::set<std::string> kKeys{
      "horizon_hours", "hours_per_year", "solver", "event_threshold_fraction",
      "allow_load_shedding", "sector_voll_basis", "cone_eur_per_kw_year"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!kKeys.count(it.key())) throw InputError(name, 0, it.key(), "unknown key");

  auto number = [&](const nlohmann::json& obj, const std::string& key) -> double {
    const auto& v = obj.at(key);
    if (!v.is_number()) throw InputError(name, 0, key, "expected a number");
    return v.get<double>();
  };
  auto integer = [&](const nlohmann::json& obj, const std::string& key) -> std::int64_t {
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw InputError(name, 0, key, "expected an integer");
    return v.get<std::int64_t>();
  };

  RunConfig cfg;
  if (!j.contains("horizon_hours")) throw InputError(name, 0, "horizon_hours", "value required");
  cfg.horizon_hours = static_cast<int>(integer(j, "horizon_hours"));
  if (j.contains("hours_per_year")) cfg.hours_per_year = static_cast<int>(integer(j, "hours_per_year"));
  if (j.contains("event_threshold_fraction"))
    cfg.event_threshold_fraction = number(j, "event_threshold_fraction");
  if (j.contains("allow_load_shedding")) {
    if (!j["allow_load_shedding"].is_boolean())
      throw InputError(name, 0, "allow_load_shedding", "expected a boolean");
    cfg.allow_load_shedding = j["allow_load_shedding"].get<bool>();
  }
  if (j.contains("cone_eur_per_kw_year")) cfg.cone = number(j, "cone_eur_per_kw_year");
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    if (!s.is_object()) throw InputError(name, 0, "solver", "expected an object");
    for (auto it = s.begin(); it != s.end(); ++it)
      if (it.key() != "feas_tol" && it.key() != "opt_tol" && it.key() != "max_iters")
        throw InputError(name, 0, "solver." + it.key(), "unknown key");
    if (s.contains("feas_tol")) cfg.solver.feas_tol = number(s, "feas_tol");
    if (s.contains("opt_tol")) cfg.solver.opt_tol = number(s, "opt_tol");
    if (s.contains("max_iters")) cfg.solver.max_iters = integer(s, "max_iters");
  }
  if (j.contains("sector_voll_basis")) {
    const auto& b = j["sector_voll_basis"];
    if (!b.is_object()) throw InputError(name, 0, "sector_voll_basis", "expected an object");
    for (auto it = b.begin(); it != b.end(); ++it) {
      auto sec = parse_sector(it.key());
      if (!sec) throw InputError(name, 0, "sector_voll_basis." + it.key(), "unknown sector");
      cfg.sector_voll_basis[index_of(*sec)] = number(b, it.key());
    }
  }
  if (cfg.horizon_hours < 1) throw InputError(name, 0, "horizon_hours", "must be at least 1");
  return cfg;
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["horizon_hours"] = cfg.horizon_hours;
  j["hours_per_year"] = cfg.hours_per_year;
  j["solver"]["feas_tol"] = cfg.solver.feas_tol;
  j["solver"]["opt_tol"] = cfg.solver.opt_tol;
  if (cfg.solver.max_iters) j["solver"]["max_iters"] = *cfg.solver.max_iters;
  j["event_threshold_fraction"] = cfg.event_threshold_fraction;
  j["allow_load_shedding"] = cfg.allow_load_shedding;
  for (Sector s : kSectors)
    j["sector_voll_basis"][std::string(to_string(s))] = cfg.sector_voll_basis[index_of(s)];
  if (cfg.cone) j["cone_eur_per_kw_year"] = *cfg.cone;
  return j;
}

inline std::string optional_cell(const std::optional<double>& v) {
  return v ? csv::format(*v) : std::string();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace detail

// Sector VoLLs follow from the country VoLL and the region's demand mix.
inline void derive_sector_volls(Scenario& s) {
  for (auto& r : s.regions) {
    if (!(r.country_voll > 0)) {
      r.sector_voll.fill(r.country_voll);
      continue;
    }
    r.sector_voll =
        voll::sectoral_volls(r.country_voll, detail::sector_weights(s, r.id), s.config.sector_voll_basis);
  }
}

// Orders series by (region, technology) and (region, carrier, sector) as declared.
inline void canonicalize(Scenario& s) {
  auto rix = [&](const std::string& id) { return s.region_index(id).value_or(s.regions.size()); };
  auto tix = [&](const std::string& id) { return s.technology_index(id).value_or(s.technologies.size()); };
  std::stable_sort(s.profiles.begin(), s.profiles.end(), [&](const Profile& a, const Profile& b) {
    return std::pair(rix(a.region), tix(a.technology)) < std::pair(rix(b.region), tix(b.technology));
  });
  std::stable_sort(s.demands.begin(), s.demands.end(), [&](const DemandSeries& a, const DemandSeries& b) {
    return std::tuple(rix(a.region), a.carrier, a.sector) < std::tuple(rix(b.region), b.carrier, b.sector);
  });
}

inline Scenario load_scenario(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InputError(dir.string(), 0, "", "scenario directory not found");
  auto require = [&](const char* name) {
    fs::path p = dir / name;
    if (!fs::exists(p)) throw InputError(name, 0, "", "missing file");
    return p;
  };

  Scenario s;
  s.config = detail::parse_config(require("config.json"));
  const int horizon = s.config.horizon_hours;

  {
    detail::TableReader t(csv::read(require("regions.csv"), "regions.csv"),
                          {"id", "name", "country_voll_eur_per_kwh"});
    std::set<std::string> seen;
    for (std::size_t r = 0; r < t.size(); ++r) {
      Region reg;
      reg.id = t.text(r, "id");
      if (!detail::valid_id(reg.id)) t.fail(r, "id", "invalid id '" + reg.id + "' (allowed: A-Z a-z 0-9 - .)");
      if (!seen.insert(reg.id).second) t.fail(r, "id", "duplicate region '" + reg.id + "'");
      reg.name = t.text(r, "name");
      reg.country_voll = t.number(r, "country_voll_eur_per_kwh");
      s.regions.push_back(std::move(reg));
    }
  }

  {
    detail::TableReader t(csv::read(require("technologies.csv"), "technologies.csv"),
                          {"id", "kind", "carrier_in", "carrier_out", "efficiency",
                           "capex_annual_eur_per_kw", "opex_var_eur_per_mwh", "capacity_max_mw",
                           "energy_capex_annual_eur_per_kwh", "charge_eff", "discharge_eff"},
                          {"max_full_load_hours"});
    std::set<std::string> seen;
    for (std::size_t r = 0; r < t.size(); ++r) {
      Technology tech;
      tech.id = t.text(r, "id");
      if (!detail::valid_id(tech.id)) t.fail(r, "id", "invalid id '" + tech.id + "' (allowed: A-Z a-z 0-9 - .)");
      if (!seen.insert(tech.id).second) t.fail(r, "id", "duplicate technology '" + tech.id + "'");
      auto kind = parse_tech_kind(t.text(r, "kind"));
      if (!kind) t.fail(r, "kind", "unknown kind '" + t.text(r, "kind") + "'");
      tech.kind = *kind;
      if (!t.text(r, "carrier_in").empty()) {
        tech.carrier_in = parse_carrier(t.text(r, "carrier_in"));
        if (!tech.carrier_in) t.fail(r, "carrier_in", "unknown carrier '" + t.text(r, "carrier_in") + "'");
      }
      auto out = parse_carrier(t.text(r, "carrier_out"));
      if (!out) t.fail(r, "carrier_out", "unknown carrier '" + t.text(r, "carrier_out") + "'");
      tech.carrier_out = *out;
      tech.efficiency = t.number(r, "efficiency", 1.0);
      tech.capex_annual = t.number(r, "capex_annual_eur_per_kw", 0.0);
      tech.opex_var = t.number(r, "opex_var_eur_per_mwh", 0.0);
      tech.capacity_max = t.optional_number(r, "capacity_max_mw");
      tech.energy_capex_annual = t.number(r, "energy_capex_annual_eur_per_kwh", 0.0);
      tech.charge_efficiency = t.number(r, "charge_eff", 1.0);
      tech.discharge_efficiency = t.number(r, "discharge_eff", 1.0);
      tech.max_full_load_hours = t.optional_number(r, "max_full_load_hours");
      s.technologies.push_back(std::move(tech));
    }
  }

  {
    detail::TableReader t(csv::read(require("profiles.csv"), "profiles.csv"),
                          {"region", "technology", "hour", "capacity_factor"});
    detail::SeriesAssembler<std::pair<std::string, std::string>> series(horizon);
    for (std::size_t r = 0; r < t.size(); ++r) {
      const auto& region = t.text(r, "region");
      const auto& tech = t.text(r, "technology");
      if (!s.region_index(region)) t.fail(r, "region", "unknown region '" + region + "'");
      if (!s.technology_index(tech)) t.fail(r, "technology", "unknown technology '" + tech + "'");
      series.add(t, r, {region, tech}, t.integer(r, "hour"), t.number(r, "capacity_factor"));
    }
    auto done = std::move(series).finish(t, [](const auto& k) { return "profile " + k.first + "/" + k.second; });
    for (auto& [key, values] : done) s.profiles.push_back({key.first, key.second, std::move(values)});
  }

  {
    detail::TableReader t(csv::read(require("sector_demand.csv"), "sector_demand.csv"),
                          {"region", "carrier", "sector", "hour", "demand_mwh"});
    using Key = std::tuple<std::string, Carrier, Sector>;
    detail::SeriesAssembler<Key> series(horizon);
    for (std::size_t r = 0; r < t.size(); ++r) {
      const auto& region = t.text(r, "region");
      if (!s.region_index(region)) t.fail(r, "region", "unknown region '" + region + "'");
      auto carrier = parse_carrier(t.text(r, "carrier"));
      if (!carrier) t.fail(r, "carrier", "unknown carrier '" + t.text(r, "carrier") + "'");
      auto sector = parse_sector(t.text(r, "sector"));
      if (!sector) t.fail(r, "sector", "unknown sector '" + t.text(r, "sector") + "'");
      series.add(t, r, Key{region, *carrier, *sector}, t.integer(r, "hour"), t.number(r, "demand_mwh"));
    }
    auto done = std::move(series).finish(t, [](const Key& k) {
      return "demand " + std::get<0>(k) + "/" + std::string(to_string(std::get<1>(k))) + "/" +
             std::string(to_string(std::get<2>(k)));
    });
    for (auto& [key, values] : done)
      s.demands.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::move(values)});
  }

  if (fs::exists(dir / "links.csv")) {
    detail::TableReader t(csv::read(dir / "links.csv", "links.csv"),
                          {"from", "to", "carrier", "capex_annual_eur_per_mw", "loss_fraction",
                           "capacity_max_mw"});
    for (std::size_t r = 0; r < t.size(); ++r) {
      Link l;
      l.from = t.text(r, "from");
      l.to = t.text(r, "to");
      if (!s.region_index(l.from)) t.fail(r, "from", "unknown region '" + l.from + "'");
      if (!s.region_index(l.to)) t.fail(r, "to", "unknown region '" + l.to + "'");
      auto carrier = parse_carrier(t.text(r, "carrier"));
      if (!carrier) t.fail(r, "carrier", "unknown carrier '" + t.text(r, "carrier") + "'");
      l.carrier = *carrier;
      l.capex_annual = t.number(r, "capex_annual_eur_per_mw", 0.0);
      l.loss_fraction = t.number(r, "loss_fraction", 0.0);
      l.capacity_max = t.optional_number(r, "capacity_max_mw");
      s.links.push_back(std::move(l));
    }
  }

  canonicalize(s);
  derive_sector_volls(s);
  return s;
}

inline void save_scenario(const Scenario& s, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  using csv::format;

  detail::write_file(dir / "config.json", detail::config_to_json(s.config).dump(2) + "\n");

  csv::Writer regions({"id", "name", "country_voll_eur_per_kwh"});
  for (const auto& r : s.regions) regions.row({r.id, r.name, format(r.country_voll)});
  detail::write_file(dir / "regions.csv", regions.str());

  csv::Writer techs({"id", "kind", "carrier_in", "carrier_out", "efficiency", "capex_annual_eur_per_kw",
                     "opex_var_eur_per_mwh", "capacity_max_mw", "energy_capex_annual_eur_per_kwh",
                     "charge_eff", "discharge_eff", "max_full_load_hours"});
  for (const auto& t : s.technologies)
    techs.row({t.id, std::string(to_string(t.kind)),
               t.carrier_in ? std::string(to_string(*t.carrier_in)) : std::string(),
               std::string(to_string(t.carrier_out)), format(t.efficiency), format(t.capex_annual),
               format(t.opex_var), detail::optional_cell(t.capacity_max), format(t.energy_capex_annual),
               format(t.charge_efficiency), format(t.discharge_efficiency),
               detail::optional_cell(t.max_full_load_hours)});
  detail::write_file(dir / "technologies.csv", techs.str());

  csv::Writer profiles({"region", "technology", "hour", "capacity_factor"});
  for (const auto& p : s.profiles)
    for (std::size_t h = 0; h < p.factors.size(); ++h)
      profiles.row({p.region, p.technology, std::to_string(h), format(p.factors[h])});
  detail::write_file(dir / "profiles.csv", profiles.str());

  csv::Writer demand({"region", "carrier", "sector", "hour", "demand_mwh"});
  for (const auto& d : s.demands)
    for (std::size_t h = 0; h < d.demand.size(); ++h)
      demand.row({d.region, std::string(to_string(d.carrier)), std::string(to_string(d.sector)),
                  std::to_string(h), format(d.demand[h])});
  detail::write_file(dir / "sector_demand.csv", demand.str());

  csv::Writer links({"from", "to", "carrier", "capex_annual_eur_per_mw", "loss_fraction", "capacity_max_mw"});
  for (const auto& l : s.links)
    links.row({l.from, l.to, std::string(to_string(l.carrier)), format(l.capex_annual),
               format(l.loss_fraction), detail::optional_cell(l.capacity_max)});
  detail::write_file(dir / "links.csv", links.str());
}

inline std::vector<Violation> validate(const Scenario& s) {
  std::vector<Violation> out;
  auto error = [&](std::string file, std::size_t row, std::string msg) {
    out.push_back({Severity::error, std::move(file), row, std::move(msg)});
  };
  auto warning = [&](std::string file, std::size_t row, std::string msg) {
    out.push_back({Severity::warning, std::move(file), row, std::move(msg)});
  };
  auto in_unit = [](double v) { return v > 0 && v <= 1 && std::isfinite(v); };
  auto nonneg = [](double v) { return v >= 0 && std::isfinite(v); };

  const auto& cfg = s.config;
  if (cfg.horizon_hours < 1) error("config.json", 0, "horizon_hours must be at least 1");
  if (cfg.hours_per_year < 1) error("config.json", 0, "hours_per_year must be at least 1");
  if (!(cfg.solver.feas_tol > 0)) error("config.json", 0, "solver.feas_tol must be positive");
  if (!(cfg.solver.opt_tol > 0)) error("config.json", 0, "solver.opt_tol must be positive");
  if (cfg.solver.max_iters && *cfg.solver.max_iters < 1)
    error("config.json", 0, "solver.max_iters must be positive");
  if (!(cfg.event_threshold_fraction >= 0 && cfg.event_threshold_fraction < 1))
    error("config.json", 0, "event_threshold_fraction must lie in [0, 1)");
  for (Sector sec : kSectors)
    if (!(cfg.sector_voll_basis[index_of(sec)] > 0))
      error("config.json", 0, "sector_voll_basis." + std::string(to_string(sec)) + " must be positive");
  if (cfg.cone && *cfg.cone < 0) error("config.json", 0, "cone_eur_per_kw_year must be non-negative");
  const auto horizon = static_cast<std::size_t>(std::max(cfg.horizon_hours, 0));

  std::set<std::string> region_ids;
  for (std::size_t i = 0; i < s.regions.size(); ++i) {
    const auto& r = s.regions[i];
    if (!detail::valid_id(r.id)) error("regions.csv", i + 1, "invalid region id '" + r.id + "'");
    if (!region_ids.insert(r.id).second) error("regions.csv", i + 1, "duplicate region id '" + r.id + "'");
    if (!(r.country_voll > 0) || !std::isfinite(r.country_voll)) {
      error("regions.csv", i + 1, "region " + r.id + ": country VoLL must be positive");
      continue;
    }
    bool sectors_ok = true;
    for (Sector sec : kSectors)
      if (!(r.sector_voll[index_of(sec)] > 0)) {
        error("regions.csv", i + 1,
              "region " + r.id + ": sector VoLL for " + std::string(to_string(sec)) + " must be positive");
        sectors_ok = false;
      }
    if (sectors_ok) {
      auto w = detail::sector_weights(s, r.id);
      double mean = 0;
      for (std::size_t k = 0; k < kSectorCount; ++k) mean += w[k] * r.sector_voll[k];
      if (std::abs(mean - r.country_voll) > 1e-9 * r.country_voll)
        error("regions.csv", i + 1, "region " + r.id + ": demand-weighted sector VoLL differs from country VoLL");
    }
  }

  std::set<std::string> tech_ids;
  for (std::size_t i = 0; i < s.technologies.size(); ++i) {
    const auto& t = s.technologies[i];
    const std::string who = "technology " + t.id + ": ";
    const std::size_t row = i + 1;
    if (!detail::valid_id(t.id)) error("technologies.csv", row, "invalid technology id '" + t.id + "'");
    if (!tech_ids.insert(t.id).second) error("technologies.csv", row, "duplicate technology id '" + t.id + "'");
    if (!in_unit(t.efficiency)) error("technologies.csv", row, who + "efficiency must lie in (0, 1]");
    if (!in_unit(t.charge_efficiency)) error("technologies.csv", row, who + "charge efficiency must lie in (0, 1]");
    if (!in_unit(t.discharge_efficiency))
      error("technologies.csv", row, who + "discharge efficiency must lie in (0, 1]");
    if (!nonneg(t.capex_annual) || !nonneg(t.opex_var) || !nonneg(t.energy_capex_annual))
      error("technologies.csv", row, who + "costs must be non-negative");
    if (t.capacity_max && !nonneg(*t.capacity_max))
      error("technologies.csv", row, who + "capacity_max must be non-negative");
    switch (t.kind) {
      case TechKind::generator:
        if (t.carrier_in) error("technologies.csv", row, who + "a generator has no input carrier");
        break;
      case TechKind::converter:
        if (!t.carrier_in) error("technologies.csv", row, who + "a converter needs an input carrier");
        else if (*t.carrier_in == t.carrier_out)
          error("technologies.csv", row, who + "converter input and output carriers must differ");
        break;
      case TechKind::storage:
        if (t.carrier_in && *t.carrier_in != t.carrier_out)
          error("technologies.csv", row, who + "storage must take in the carrier it stores");
        break;
    }
    if (t.max_full_load_hours) {
      if (t.kind != TechKind::generator)
        error("technologies.csv", row, who + "max_full_load_hours applies to generators only");
      else if (!(*t.max_full_load_hours >= 0) || *t.max_full_load_hours > cfg.hours_per_year)
        error("technologies.csv", row, who + "max_full_load_hours must lie in [0, hours_per_year]");
    }
  }

  for (std::size_t i = 0; i < s.links.size(); ++i) {
    const auto& l = s.links[i];
    const std::size_t row = i + 1;
    const std::string who = "link " + l.from + "-" + l.to + ": ";
    if (!region_ids.count(l.from) || !region_ids.count(l.to))
      error("links.csv", row, who + "unknown region");
    if (l.from == l.to) error("links.csv", row, who + "endpoints must differ");
    if (!(l.loss_fraction >= 0 && l.loss_fraction < 1)) error("links.csv", row, who + "loss_fraction must lie in [0, 1)");
    if (!nonneg(l.capex_annual)) error("links.csv", row, who + "costs must be non-negative");
    if (l.capacity_max && !nonneg(*l.capacity_max)) error("links.csv", row, who + "capacity_max must be non-negative");
  }

  std::size_t row_base = 0;
  std::set<std::pair<std::string, std::string>> profile_keys;
  for (const auto& p : s.profiles) {
    const std::string who = "profile " + p.region + "/" + p.technology;
    if (!region_ids.count(p.region)) error("profiles.csv", row_base + 1, who + ": unknown region");
    auto ti = s.technology_index(p.technology);
    if (!ti) error("profiles.csv", row_base + 1, who + ": unknown technology");
    else if (s.technologies[*ti].kind != TechKind::generator)
      error("profiles.csv", row_base + 1, who + ": profiles apply to generators only");
    if (!profile_keys.insert({p.region, p.technology}).second)
      error("profiles.csv", row_base + 1, who + ": duplicate profile");
    if (p.factors.size() != horizon)
      error("profiles.csv", row_base + 1, who + ": length differs from horizon_hours");
    for (std::size_t h = 0; h < p.factors.size(); ++h) {
      const double v = p.factors[h];
      if (!(v >= 0 && v <= 1))
        error("profiles.csv", row_base + h + 1,
              "region " + p.region + ", technology " + p.technology + ", hour " + std::to_string(h) +
                  ": capacity factor " + csv::format(v) + " outside [0, 1]");
    }
    row_base += p.factors.size();
  }

  row_base = 0;
  for (const auto& d : s.demands) {
    const std::string who = "demand " + d.region + "/" + std::string(to_string(d.carrier)) + "/" +
                            std::string(to_string(d.sector));
    if (!region_ids.count(d.region)) error("sector_demand.csv", row_base + 1, who + ": unknown region");
    if (d.demand.size() != horizon)
      error("sector_demand.csv", row_base + 1, who + ": length differs from horizon_hours");
    for (std::size_t h = 0; h < d.demand.size(); ++h)
      if (!nonneg(d.demand[h]))
        error("sector_demand.csv", row_base + h + 1,
              who + ", hour " + std::to_string(h) + ": demand must be non-negative");
    row_base += d.demand.size();
  }

  // Connectivity: a region with demand for a carrier needs a way to obtain it.
  row_base = 0;
  std::set<std::pair<std::string, Carrier>> reported;
  for (const auto& d : s.demands) {
    const std::size_t row = row_base + 1;
    row_base += d.demand.size();
    double total = 0;
    for (double v : d.demand) total += v;
    if (!(total > 0) || !reported.insert({d.region, d.carrier}).second) continue;
    bool supplied = false;
    for (const auto& t : s.technologies) {
      if (t.carrier_out != d.carrier) continue;
      if (t.kind == TechKind::converter) supplied = true;
      if (t.kind == TechKind::generator && s.profile(d.region, t.id)) supplied = true;
    }
    for (const auto& l : s.links)
      if (l.carrier == d.carrier && (l.from == d.region || l.to == d.region)) supplied = true;
    if (!supplied)
      warning("sector_demand.csv", row,
              "region " + d.region + " has " + std::string(to_string(d.carrier)) +
                  " demand but no local supply option or link");
  }

  std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    return std::pair(detail::file_rank(a.file), a.row) < std::pair(detail::file_rank(b.file), b.row);
  });
  return out;
}

inline bool has_errors(const std::vector<Violation>& v) {
  return std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.severity == Severity::error; });
}

}  // namespace adequacy
