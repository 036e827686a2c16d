#include <gtest/gtest.h>

#include "adequacy/analytics.hpp"
#include "adequacy/simplex.hpp"
#include "support.hpp"

using namespace adequacy;
namespace at = adequacy::testing;

namespace {

// One region, one electricity series; annualization = hours_per_year / horizon.
DispatchResult single(std::vector<double> demand, std::vector<double> shed, double hours_per_year = 0) {
  DispatchResult d;
  d.horizon = demand.size();
  d.annualization = hours_per_year > 0 ? hours_per_year / static_cast<double>(d.horizon) : 1.0;
  d.regions = {"R1"};
  d.shed.push_back({0, Carrier::electricity, Sector::households, 5.0, std::move(demand), std::move(shed)});
  return d;
}

DispatchResult with_generation(double demand, double generation) {
  DispatchResult d = single({demand}, {0.0});
  DispatchResult::Unit u;
  u.id = "pv";
  u.dispatch = {generation};
  d.units.push_back(u);
  return d;
}

struct Solved {
  Scenario s;
  LinearProgram lp;
  Solution sol;
  DispatchResult d;
};

Solved solve_fixture(const std::string& name) {
  Solved out;
  out.s = load_scenario(at::fixture_dir(name));
  out.lp = build(out.s);
  out.sol = solve(out.lp);
  EXPECT_EQ(out.sol.status, SolveStatus::optimal) << name;
  out.d = extract_dispatch(out.s, out.lp, out.sol.x);
  return out;
}

double region_shed(const DispatchResult& d, std::size_t r) {
  double acc = 0;
  for (const auto& s : d.shed)
    if (s.region == r)
      for (double v : s.shed) acc += v;
  return acc;
}

DispatchResult shifted(const DispatchResult& d, std::size_t k) {
  auto rot = [&](std::vector<double> v) {
    if (!v.empty()) std::rotate(v.begin(), v.begin() + static_cast<long>(k % v.size()), v.end());
    return v;
  };
  DispatchResult out = d;
  for (auto& s : out.shed) {
    s.demand = rot(s.demand);
    s.shed = rot(s.shed);
  }
  for (auto& u : out.units) {
    u.dispatch = rot(u.dispatch);
    u.charge = rot(u.charge);
    u.soc = rot(u.soc);
  }
  for (auto& f : out.flows) {
    f.forward = rot(f.forward);
    f.backward = rot(f.backward);
  }
  return out;
}

}  // namespace

TEST(LossShare, ZeroAndFull) {
  EXPECT_EQ(loss_share(single({3, 4, 5}, {0, 0, 0}), "R1"), 0.0);
  EXPECT_DOUBLE_EQ(loss_share(single({3, 4, 5}, {3, 4, 5}), "R1"), 100.0);
  EXPECT_EQ(loss_share(single({0, 0}, {0, 0}), "R1"), 0.0);
  EXPECT_THROW(loss_share(single({1}, {0}), "XX"), std::invalid_argument);
}

TEST(LossShare, AnnualOutageConversions) {
  std::vector<double> demand(8760, 100.0);
  std::vector<double> shed(8760, 0.0);
  shed[100] = 100.0;
  shed[101] = 100.0;
  shed[102] = 77.0;
  EXPECT_NEAR(loss_share(single(demand, shed), "R1"), 0.0316, 0.0005);
  std::fill(shed.begin(), shed.end(), 0.0);
  for (int h = 0; h < 8; ++h) shed[static_cast<std::size_t>(1000 + 97 * h)] = 100.0;
  EXPECT_NEAR(loss_share(single(demand, shed), "R1"), 0.0913, 0.0005);
}

TEST(LossShare, SumsAllSectorsAndCarriers) {
  DispatchResult d = single({10, 10}, {5, 0});
  d.shed.push_back({0, Carrier::hydrogen, Sector::industry, 4.0, {20, 20}, {0, 20}});
  EXPECT_DOUBLE_EQ(loss_share(d, "R1"), 100.0 * 25.0 / 60.0);
}

TEST(LoleHours, Examples) {
  EXPECT_EQ(lole_hours(single(std::vector<double>(24, 1.0), std::vector<double>(24, 0.0)), "R1"), 0.0);
  std::vector<double> demand(8760, 1.0), shed(8760, 0.0);
  for (int h = 0; h < 8; ++h) shed[static_cast<std::size_t>(h * 1000)] = 0.5;
  EXPECT_DOUBLE_EQ(lole_hours(single(demand, shed, 8760), "R1"), 8.0);
  std::vector<double> half_demand(4380, 1.0), half_shed(4380, 0.0);
  for (int h = 0; h < 4; ++h) half_shed[static_cast<std::size_t>(h * 1000)] = 1.0;
  EXPECT_DOUBLE_EQ(lole_hours(single(half_demand, half_shed, 8760), "R1"), 8.0);
}

TEST(LoleHours, ThresholdIsStrict) {
  const auto d = single({1000, 1000, 1000}, {1.0, 1.5, 0.5});
  EXPECT_EQ(lole_hours(d, "R1", 0.001), 1.0);
  EXPECT_EQ(lole_hours(d, "R1", 0.0), 3.0);
  EXPECT_THROW(lole_hours(d, "R1", 1.0), std::invalid_argument);
  EXPECT_THROW(lole_hours(d, "R1", -0.1), std::invalid_argument);
}

TEST(DetectEvents, HandTrace) {
  const auto ev = detect_events(single({1, 1, 1, 1, 1}, {0, 1, 1, 0, 1}), "R1");
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].start, 1u);
  EXPECT_EQ(ev[0].duration, 2u);
  EXPECT_EQ(ev[1].start, 4u);
  EXPECT_EQ(ev[1].duration, 1u);
  EXPECT_EQ(ev[0].energy_mwh, 2.0);
  EXPECT_EQ(ev[0].max_depth, 1.0);
}

TEST(DetectEvents, NoShed) {
  EXPECT_TRUE(detect_events(single({1, 1, 1}, {0, 0, 0}), "R1").empty());
}

TEST(DetectEvents, WrapAroundMerges) {
  const auto ev = detect_events(single({2, 2, 2, 2, 2, 2}, {1, 0, 0, 0, 0, 0.5}), "R1");
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].start, 5u);
  EXPECT_EQ(ev[0].duration, 2u);
  EXPECT_DOUBLE_EQ(ev[0].energy_mwh, 1.5);
  EXPECT_DOUBLE_EQ(ev[0].max_depth, 0.5);
  EXPECT_TRUE(ev[0].covers(0, 6));
  EXPECT_FALSE(ev[0].covers(1, 6));
}

TEST(DetectEvents, WholeHorizon) {
  const auto ev = detect_events(single({2, 2, 2}, {1, 1, 2}), "R1");
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].start, 0u);
  EXPECT_EQ(ev[0].duration, 3u);
}

TEST(DetectEvents, EnergyMatchesAboveThresholdShed) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> demand(97), shed(97);
    for (std::size_t h = 0; h < demand.size(); ++h) {
      demand[h] = 10.0 + 90.0 * u(rng);
      const double r = u(rng);
      shed[h] = r < 0.6 ? 0.0 : r < 0.7 ? 1e-4 * demand[h] : demand[h] * u(rng);
    }
    const auto d = single(demand, shed);
    double expected = 0;
    for (std::size_t h = 0; h < demand.size(); ++h)
      if (shed[h] > 0.001 * demand[h]) expected += shed[h];
    double total = 0;
    std::size_t covered = 0;
    const auto ev = detect_events(d, "R1", 0.001);
    for (const auto& e : ev) {
      total += e.energy_mwh;
      covered += e.duration;
      EXPECT_GE(e.duration, 1u);
      EXPECT_GT(e.max_depth, 0.0);
      EXPECT_LE(e.max_depth, 1.0);
    }
    for (std::size_t k = 1; k < ev.size(); ++k) EXPECT_GT(ev[k].start, ev[k - 1].start);
    EXPECT_NEAR(total, expected, 1e-9 * std::max(1.0, expected));
    EXPECT_EQ(static_cast<double>(covered), lole_hours(d, "R1", 0.001));
    const auto hist = duration_histogram(ev);
    EXPECT_EQ(hist[0] + hist[1] + hist[2], static_cast<double>(ev.size()));
  }
}

TEST(DurationHistogram, Bins) {
  std::vector<OutageEvent> ev;
  for (std::size_t dur : {1u, 4u, 5u, 7u, 10u, 11u, 40u}) ev.push_back({"R1", 0, dur, 1.0, 1.0});
  const auto bins = duration_histogram(ev);
  EXPECT_EQ(bins[0], 2.0);
  EXPECT_EQ(bins[1], 3.0);
  EXPECT_EQ(bins[2], 2.0);
}

TEST(DepthExceedance, ZeroShed) {
  for (const auto& p : depth_exceedance(single({5, 5}, {0, 0}), "R1")) EXPECT_EQ(p.hours_per_year, 0.0);
}

TEST(DepthExceedance, SingleHourAtFortyEightPercent) {
  const auto curve = depth_exceedance(single({100, 100, 100}, {0, 48, 0}, 3), "R1");
  ASSERT_EQ(curve.size(), 11u);
  for (const auto& p : curve) {
    if (p.level <= 0.45 + 1e-12) EXPECT_EQ(p.hours_per_year, 1.0) << p.level;
    else EXPECT_EQ(p.hours_per_year, 0.0) << p.level;
  }
  EXPECT_DOUBLE_EQ(curve.back().level, 0.50);
  EXPECT_DOUBLE_EQ(curve.front().level, 0.02);
}

TEST(DepthExceedance, FullShedEveryLevel) {
  const auto curve = depth_exceedance(single(std::vector<double>(24, 3.0), std::vector<double>(24, 3.0), 8760), "R1");
  for (const auto& p : curve) EXPECT_DOUBLE_EQ(p.hours_per_year, 8760.0);
}

TEST(DepthExceedance, NonIncreasing) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> demand(200, 10.0), shed(200);
  for (auto& v : shed) v = u(rng) < 0.5 ? 0.0 : 10.0 * u(rng);
  const auto curve = depth_exceedance(single(demand, shed), "R1");
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_LE(curve[i].hours_per_year, curve[i - 1].hours_per_year);
}

TEST(ResidualLoad, Examples) {
  EXPECT_DOUBLE_EQ(residual_load(with_generation(10, 4), "R1", 0), 6.0);
  EXPECT_DOUBLE_EQ(residual_load(with_generation(10, 135), "R1", 0), -125.0);
  EXPECT_DOUBLE_EQ(residual_load(with_generation(10, 0), "R1", 0), 10.0);
  EXPECT_THROW(residual_load(with_generation(10, 0), "R1", 1), std::out_of_range);
  EXPECT_THROW(residual_load(with_generation(10, 0), "XX", 0), std::invalid_argument);
}

TEST(ResidualLoad, IgnoresConvertersAndHydrogen) {
  DispatchResult d = with_generation(10, 4);
  DispatchResult::Unit turbine;
  turbine.id = "turbine";
  turbine.kind = TechKind::converter;
  turbine.carrier_in = Carrier::hydrogen;
  turbine.dispatch = {3.0};
  d.units.push_back(turbine);
  d.shed.push_back({0, Carrier::hydrogen, Sector::industry, 5.0, {50.0}, {0.0}});
  EXPECT_DOUBLE_EQ(residual_load(d, "R1", 0), 6.0);
}

TEST(LullExport, NoEventsGivesEmptyTable) {
  const std::vector<double> volls{5.0};
  EXPECT_TRUE(lull_export_table(single({1, 1}, {0, 0}), volls).empty());
}

TEST(LullExport, SymmetricUnderRegionSwap) {
  DispatchResult d;
  d.horizon = 4;
  d.regions = {"A", "B"};
  d.shed.push_back({0, Carrier::electricity, Sector::households, 6.0, {10, 10, 10, 10}, {0, 3, 3, 0}});
  d.shed.push_back({1, Carrier::electricity, Sector::households, 6.0, {10, 10, 10, 10}, {0, 3, 3, 0}});
  DispatchResult::Flow f;
  f.from = 0;
  f.to = 1;
  f.forward = {1, 1, 1, 1};
  f.backward = {1, 1, 1, 1};
  d.flows.push_back(f);
  const std::vector<double> volls{6.0, 6.0};
  const auto rows = lull_export_table(d, volls);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].region, "A");
  EXPECT_EQ(rows[1].region, "B");
  auto a = rows[0], b = rows[1];
  b.region = a.region;
  EXPECT_EQ(a, b);
}

TEST(LullExport, ExporterShedsWhileExporting) {
  const auto r = solve_fixture("export2");
  const auto a = r.d.region_index("A");
  const auto b = r.d.region_index("B");
  EXPECT_LE(region_shed(r.d, a), 1e-6);
  EXPECT_GT(region_shed(r.d, b), 1.0);
  std::vector<double> volls;
  for (const auto& reg : r.s.regions) volls.push_back(reg.country_voll);
  const auto rows = lull_export_table(r.d, volls);
  ASSERT_FALSE(rows.empty());
  bool exporting = false;
  for (const auto& row : rows) {
    EXPECT_EQ(row.region, "B");
    if (row.shed_mwh > 0 && row.net_export_mwh > 0) exporting = true;
  }
  EXPECT_TRUE(exporting);
  bool hourly = false;
  for (const auto& e : detect_events(r.d, "B"))
    for (std::size_t k = 0; k < e.duration; ++k) hourly |= net_export(r.d, b, (e.start + k) % r.d.horizon) > 0;
  EXPECT_TRUE(hourly);
}

TEST(BindingLimits, NoEventsNoDiagnosis) {
  const auto r = solve_fixture("min1");
  EXPECT_TRUE(binding_limit_diagnosis(r.s, r.lp, r.sol.x).empty());
}

TEST(BindingLimits, UndersizedConverterIsTightEveryEventHour) {
  const auto r = solve_fixture("converter_limit");
  const auto diags = binding_limit_diagnosis(r.s, r.lp, r.sol.x);
  ASSERT_FALSE(diags.empty());
  for (const auto& dg : diags) {
    EXPECT_TRUE(dg.flagged_every_hour(LimitFamily::converter_capacity, r.d.horizon));
    double share = 0;
    for (const auto& src : dg.supply) share += src.share;
    EXPECT_NEAR(share, 1.0, 1e-9);
  }
}

TEST(BindingLimits, TightLinkWithUselessStorage) {
  const auto r = solve_fixture("link_limit");
  const auto diags = binding_limit_diagnosis(r.s, r.lp, r.sol.x);
  ASSERT_FALSE(diags.empty());
  for (const auto& dg : diags) {
    EXPECT_EQ(dg.event.region, "A");
    EXPECT_TRUE(dg.flagged_every_hour(LimitFamily::link_capacity, r.d.horizon));
    EXPECT_FALSE(dg.flagged(LimitFamily::storage_power));
    EXPECT_FALSE(dg.flagged(LimitFamily::storage_energy));
  }
}

TEST(MeritOrder, SolvedFixturesRespectVollOrder) {
  for (const char* name : {"merit", "collapse", "export2", "converter_limit", "link_limit"}) {
    const auto r = solve_fixture(name);
    EXPECT_TRUE(merit_order_violations(r.d).empty()) << name;
  }
  const auto r = solve_fixture("merit");
  std::size_t partial = 0;
  for (const auto& s : r.d.shed)
    for (std::size_t h = 0; h < r.d.horizon; ++h)
      partial += s.shed[h] > 1e-6 && s.shed[h] < s.demand[h] - 1e-6;
  EXPECT_GT(region_shed(r.d, 0), 0.0);
  EXPECT_GT(partial, 0u);
}

TEST(MeritOrder, DetectsViolation) {
  DispatchResult d = single({10, 10}, {5, 0});
  d.shed.push_back({0, Carrier::electricity, Sector::services, 2.0, {10, 10}, {0, 0}});
  const auto v = merit_order_violations(d);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].hour, 0u);
  EXPECT_EQ(v[0].shedding, Sector::households);
  EXPECT_EQ(v[0].cheaper, Sector::services);
}

TEST(CircularShift, MetricsInvariant) {
  const auto r = solve_fixture("merit");
  for (std::size_t k : {1u, 7u, 23u}) {
    const auto s = shifted(r.d, k);
    EXPECT_NEAR(loss_share(s, "R1"), loss_share(r.d, "R1"), 1e-12);
    EXPECT_EQ(lole_hours(s, "R1"), lole_hours(r.d, "R1"));
    EXPECT_EQ(depth_exceedance(s, "R1"), depth_exceedance(r.d, "R1"));
    EXPECT_EQ(detect_events(s, "R1").size(), detect_events(r.d, "R1").size());
  }
}

TEST(Report, AveragesOverYears) {
  const auto y1 = single({10, 10, 10, 10}, {0, 10, 0, 0}, 8);
  const auto y2 = single({10, 10, 10, 10}, {0, 0, 0, 0}, 8);
  const std::vector<DispatchResult> years{y1, y2};
  const auto rep = make_report(years);
  ASSERT_EQ(rep.regions.size(), 1u);
  const auto& m = rep.regions[0];
  EXPECT_DOUBLE_EQ(m.loss_share_percent, 12.5);
  EXPECT_DOUBLE_EQ(m.lole_hours, 1.0);
  EXPECT_DOUBLE_EQ(m.event_count, 0.5);
  EXPECT_EQ(m.events.size(), 1u);
  EXPECT_DOUBLE_EQ(m.duration_histogram[0], 0.5);
  EXPECT_DOUBLE_EQ(m.sector_shed_mwh[index_of(Sector::households)], 10.0);
  EXPECT_DOUBLE_EQ(rep.max_unserved_fraction, 1.0);
  EXPECT_DOUBLE_EQ(rep.hours_above_5pct_loss, 1.0);
}

TEST(Report, ZeroShed) {
  const std::vector<DispatchResult> years{single({1, 2, 3}, {0, 0, 0})};
  const auto rep = make_report(years);
  EXPECT_EQ(rep.regions[0].loss_share_percent, 0.0);
  EXPECT_TRUE(rep.regions[0].events.empty());
  EXPECT_THROW(make_report(std::span<const DispatchResult>{}), std::invalid_argument);
}
