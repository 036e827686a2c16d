#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adequacy/csv.hpp"
#include "adequacy/types.hpp"

namespace adequacy::voll {

// Per-country economic inputs. Monetary values in EUR/a, demand in MWh/a.
struct VollRecord {
  std::string country;
  std::optional<double> voll_2020;  // EUR/kWh
  std::optional<double> gva;        // EUR/a
  double gdp_2020 = 0;
  double gdp_2050 = 0;
  double e_el_2020 = 0;
  double e_el_2050 = 0;
};

struct AdequacyConfig {
  double cone = 0;  // EUR/(kW*a)
  double voll = 0;  // EUR/kWh
};

using SectorVollBasis = SectorMap<double>;

// Average sectoral VoLL in EUR/kWh, in Sector enum order.
inline constexpr SectorVollBasis kDefaultSectorBasis{22.1, 4.1, 19.9, 4.3, 11.0};

inline constexpr double kKwhPerMwh = 1000.0;

inline double voll_from_gva(double gva, double e_el_mwh) {
  if (!(gva > 0) || !(e_el_mwh > 0))
    throw std::domain_error("voll_from_gva: gva and electricity demand must be positive");
  return gva / (e_el_mwh * kKwhPerMwh);
}

inline double project_voll(const VollRecord& r) {
  double base = 0;
  if (r.voll_2020) {
    base = *r.voll_2020;
  } else if (r.gva) {
    base = voll_from_gva(*r.gva, r.e_el_2020);
  } else {
    throw std::domain_error("project_voll: " + r.country + " has neither a 2020 VoLL nor a GVA");
  }
  if (!(base > 0) || !(r.gdp_2020 > 0) || !(r.gdp_2050 > 0) || !(r.e_el_2020 > 0) ||
      !(r.e_el_2050 > 0))
    throw std::domain_error("project_voll: " + r.country + " has non-positive inputs");
  return base * (r.gdp_2050 / r.gdp_2020) / (r.e_el_2050 / r.e_el_2020);
}

// Scales the basis by a single factor so that the demand-weighted mean equals
// country_voll. Ratios between sectors are preserved.
inline SectorMap<double> sectoral_volls(double country_voll, const SectorMap<double>& weights,
                                        const SectorVollBasis& basis = kDefaultSectorBasis) {
  if (!(country_voll > 0)) throw std::domain_error("sectoral_volls: country VoLL must be positive");
  double sum = 0;
  double mean = 0;
  for (std::size_t i = 0; i < kSectorCount; ++i) {
    if (weights[i] < 0 || !std::isfinite(weights[i]))
      throw std::domain_error("sectoral_volls: weights must be non-negative");
    if (!(basis[i] > 0)) throw std::domain_error("sectoral_volls: basis values must be positive");
    sum += weights[i];
    mean += weights[i] * basis[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::domain_error("sectoral_volls: weights must sum to 1");
  if (!(mean > 0)) throw std::domain_error("sectoral_volls: zero weighted basis mean");
  const double k = country_voll / mean;
  SectorMap<double> out{};
  for (std::size_t i = 0; i < kSectorCount; ++i) out[i] = k * basis[i];
  return out;
}

// EUR/(kW*a) divided by EUR/kWh gives hours per year.
inline double lole_opt(const AdequacyConfig& cfg) {
  if (!(cfg.voll > 0)) throw std::domain_error("lole_opt: VoLL must be positive");
  if (cfg.cone < 0) throw std::domain_error("lole_opt: CONE must be non-negative");
  return cfg.cone / cfg.voll;
}

inline std::vector<VollRecord> load_voll_inputs(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  auto table = csv::read(path, name);
  static const std::vector<std::string> kColumns{
      "country",        "voll_2020_eur_per_kwh", "gva_eur",        "gdp_2020_eur",
      "gdp_2050_eur",   "e_el_2020_mwh",         "e_el_2050_mwh"};
  for (const auto& h : table.header)
    if (std::find(kColumns.begin(), kColumns.end(), h) == kColumns.end())
      throw InputError(name, 1, h, "unknown column");
  std::vector<std::size_t> col(kColumns.size());
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    auto c = table.column(kColumns[i]);
    if (!c) throw InputError(name, 1, kColumns[i], "missing column");
    col[i] = *c;
  }

  std::vector<VollRecord> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.lines[r];
    auto optional_number = [&](std::size_t i) -> std::optional<double> {
      const std::string& cell = row[col[i]];
      if (cell.empty()) return std::nullopt;
      auto v = csv::parse_double(cell);
      if (!v) throw InputError(name, line, kColumns[i], "malformed number '" + cell + "'");
      if (!(*v > 0)) throw InputError(name, line, kColumns[i], "value must be positive");
      return v;
    };
    auto number = [&](std::size_t i) {
      auto v = optional_number(i);
      if (!v) throw InputError(name, line, kColumns[i], "value required");
      return *v;
    };
    VollRecord rec;
    rec.country = row[col[0]];
    if (rec.country.empty()) throw InputError(name, line, "country", "empty id");
    rec.voll_2020 = optional_number(1);
    rec.gva = optional_number(2);
    rec.gdp_2020 = number(3);
    rec.gdp_2050 = number(4);
    rec.e_el_2020 = number(5);
    rec.e_el_2050 = number(6);
    if (!rec.voll_2020 && !rec.gva)
      throw InputError(name, line, "voll_2020_eur_per_kwh", "neither VoLL nor GVA given");
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::string format_voll_2050(const std::vector<VollRecord>& records) {
  csv::Writer w({"country", "voll_2050_eur_per_kwh"});
  for (const auto& r : records) w.row({r.country, csv::format(project_voll(r))});
  return w.str();
}

}  // namespace adequacy::voll
