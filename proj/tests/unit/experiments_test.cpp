#include <gtest/gtest.h>

#include "adequacy/experiments.hpp"
#include "support.hpp"

using namespace adequacy;
namespace at = adequacy::testing;

namespace {

double capacity_of(const StabilizationReport& rep, const std::string& tech) {
  double acc = 0;
  for (const auto& d : rep.deltas)
    if (d.technology == tech) acc += d.stabilized_mw;
  return acc;
}

double shed_hours(const Scenario& s, const Solution& sol) {
  const auto lp = build(s);
  const auto d = extract_dispatch(s, lp, sol.x);
  return lole_hours(d, s.regions[0].id, s.config.event_threshold_fraction);
}

}  // namespace

TEST(Stabilize, ZeroShedBaselineIsIdentity) {
  const auto s = load_scenario(at::fixture_dir("min1"));
  const auto res = stabilize(s, 1.0);
  ASSERT_EQ(res.stabilized.status, SolveStatus::optimal);
  EXPECT_NEAR(res.report.cost_delta_percent, 0.0, 1e-9);
  for (const auto& d : res.report.deltas) {
    EXPECT_NEAR(d.stabilized_mw, d.baseline_mw, 1e-6 * std::max(1.0, d.baseline_mw));
    if (d.delta_percent) EXPECT_NEAR(*d.delta_percent, 0.0, 1e-6);
  }
  for (const auto& [region, lole] : res.report.residual_lole) EXPECT_EQ(lole, 0.0) << region;
}

TEST(Stabilize, InfiniteThresholdReturnsBaseline) {
  const auto s = load_scenario(at::fixture_dir("export2"));
  const auto res = stabilize(s, std::numeric_limits<double>::infinity());
  EXPECT_EQ(res.report.rounds, 0);
  EXPECT_EQ(res.stabilized.x, res.baseline.x);
  EXPECT_EQ(res.report.cost_delta_percent, 0.0);
}

TEST(Stabilize, RejectsNegativeThreshold) {
  const auto s = load_scenario(at::fixture_dir("min1"));
  EXPECT_THROW(stabilize(s, -1.0), std::invalid_argument);
}

TEST(Stabilize, PeakerGainsCapacityAndMeetsThreshold) {
  // 876 h horizon annualized as a full year: CONE/VoLL = 10 h/a.
  const auto s = at::peaker_scenario(87.6, 8.76, 876);
  const auto res = stabilize(s, 1.0);
  ASSERT_EQ(res.stabilized.status, SolveStatus::optimal);
  ASSERT_TRUE(res.report.feasible);
  const auto base = at::peaker_oracle(s.demands[0].demand, 87.6, 8.76, 1.0);
  EXPECT_NEAR(shed_hours(s, res.baseline), base.shed_hours, 1.0);
  EXPECT_GT(capacity_of(res.report, "peaker"), base.capacity);
  EXPECT_LE(res.report.residual_lole[0].second, 1.0);
  EXPECT_LE(shed_hours(s, res.stabilized), 1.0);
  EXPECT_GT(res.report.cost_delta_percent, 0.0);
  // The shed cap of one average hour of demand.
  double total = 0;
  for (double v : s.demands[0].demand) total += v;
  EXPECT_LE(*res.report.shed_cap_mwh[0], total / 876.0 + 1e-9);
}

TEST(Stabilize, NestedThresholds) {
  const auto s = at::lull_scenario();
  ASSERT_GT(shed_hours(s, solve(build(s))), 2.0);
  const auto loose = stabilize(s, 2.0);
  const auto tight = stabilize(s, 1.0);
  const auto zero = stabilize(s, 0.0);
  ASSERT_EQ(loose.stabilized.status, SolveStatus::optimal);
  ASSERT_EQ(tight.stabilized.status, SolveStatus::optimal);
  ASSERT_EQ(zero.stabilized.status, SolveStatus::optimal);
  const double base = loose.report.baseline_cost;
  const double tol = 1e-9 * std::abs(base);
  EXPECT_GE(loose.report.stabilized_cost, base - tol);
  EXPECT_GE(tight.report.stabilized_cost, loose.report.stabilized_cost - tol);
  EXPECT_GE(zero.report.stabilized_cost, tight.report.stabilized_cost - tol);
  for (const auto& [r, lole] : zero.report.residual_lole) EXPECT_EQ(lole, 0.0);
  for (const auto& [r, lole] : tight.report.residual_lole) EXPECT_LE(lole, 1.0);
}

TEST(Stabilize, ConverterLimitedSystemKeepsBackup) {
  const auto s = at::lull_scenario();
  const auto lp = build(s);
  const auto base = solve(lp);
  ASSERT_EQ(base.status, SolveStatus::optimal);
  const auto diags = binding_limit_diagnosis(s, lp, base.x);
  ASSERT_FALSE(diags.empty());
  for (const auto& dg : diags) ASSERT_TRUE(dg.flagged_every_hour(LimitFamily::converter_capacity, 48));
  const auto res = stabilize(s, 0.0);
  ASSERT_EQ(res.stabilized.status, SolveStatus::optimal);
  double before = 0, after = 0;
  for (const auto& d : res.report.deltas)
    if (d.technology == "h2-turbine" || d.technology == "h2-store") {
      before += d.baseline_mw;
      after += d.stabilized_mw;
    }
  EXPECT_GT(after, before);
}

TEST(Stabilize, CappedConverterMakesStabilizationInfeasible) {
  // The turbine cap forces 20 MW of shed through the whole lull.
  const auto s = load_scenario(at::fixture_dir("converter_limit"));
  const auto res = stabilize(s, 1.0);
  EXPECT_EQ(res.stabilized.status, SolveStatus::infeasible);
  EXPECT_FALSE(res.report.feasible);
  EXPECT_EQ(res.report.binding_caps, (std::vector<std::string>{"STB_R1"}));
}

TEST(Stabilize, ShedDisabledLeavesBaseline) {
  auto s = load_scenario(at::fixture_dir("min1"));
  s.config.allow_load_shedding = false;
  const auto res = stabilize(s, 1.0);
  EXPECT_EQ(res.report.rounds, 0);
  EXPECT_EQ(res.stabilized.objective, res.baseline.objective);
}

TEST(Classify, Thresholds) {
  EXPECT_EQ(classify_voll(0.0249), RegionClass::I);
  EXPECT_EQ(classify_voll(0.025), RegionClass::II);
  EXPECT_EQ(classify_voll(0.4999), RegionClass::II);
  EXPECT_EQ(classify_voll(0.5), RegionClass::III);
  EXPECT_EQ(classify_voll(2.999), RegionClass::III);
  EXPECT_EQ(classify_voll(3.0), RegionClass::IV);
  EXPECT_EQ(classify_voll(5.4999), RegionClass::IV);
  EXPECT_EQ(classify_voll(5.5), RegionClass::V);
  EXPECT_EQ(to_string(RegionClass::III), "III");
}

TEST(Sweep, DefaultFactors) {
  EXPECT_EQ(std::vector<double>(kDefaultSweepFactors.begin(), kDefaultSweepFactors.end()),
            (std::vector<double>{0.001, 0.01, 0.1, 0.5, 1, 2, 10}));
}

TEST(Sweep, CollapseAndNegligibleOutages) {
  const auto s = load_scenario(at::fixture_dir("collapse"));
  const std::vector<double> factors{10.0, 0.001};
  const auto res = voll_sweep(s, factors);
  ASSERT_TRUE(res.complete);
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_EQ(res.records[0].factor, 0.001);
  for (const auto& r : res.records[0].regions) {
    EXPECT_NEAR(r.loss_share_percent, 100.0, 1e-6) << r.region;
    EXPECT_NEAR(r.installed_mw, 0.0, 1e-6) << r.region;
    EXPECT_EQ(r.region_class, RegionClass::I);
  }
  for (const auto& r : res.records[1].regions) {
    EXPECT_LT(r.loss_share_percent, 0.01) << r.region;
    EXPECT_EQ(r.region_class, RegionClass::V);
  }
}

TEST(Sweep, FactorOneMatchesBaseline) {
  const auto s = load_scenario(at::fixture_dir("export2"));
  const std::vector<double> factors{1.0};
  const auto res = voll_sweep(s, factors);
  ASSERT_TRUE(res.complete);
  const auto base = solve(build(s), solve_options(s));
  EXPECT_NEAR(res.records[0].objective, base.objective, 1e-9 * std::abs(base.objective));
}

TEST(Sweep, LossShareNonIncreasingInFactor) {
  const auto s = load_scenario(at::fixture_dir("collapse"));
  const auto res = voll_sweep(s, kDefaultSweepFactors, 2);
  ASSERT_TRUE(res.complete);
  ASSERT_EQ(res.records.size(), kDefaultSweepFactors.size());
  for (std::size_t k = 1; k < res.records.size(); ++k) {
    EXPECT_GT(res.records[k].factor, res.records[k - 1].factor);
    for (std::size_t r = 0; r < res.records[k].regions.size(); ++r)
      EXPECT_LE(res.records[k].regions[r].loss_share_percent,
                res.records[k - 1].regions[r].loss_share_percent + 1e-6);
  }
}

TEST(Sweep, ParallelMatchesSerial) {
  const auto s = load_scenario(at::fixture_dir("export2"));
  const std::vector<double> factors{0.5, 1.0, 2.0};
  const auto a = voll_sweep(s, factors, 1);
  const auto b = voll_sweep(s, factors, 3);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) EXPECT_EQ(a.records[k].objective, b.records[k].objective);
}

TEST(Sweep, InvalidFactorsAndFailures) {
  const auto s = load_scenario(at::fixture_dir("min1"));
  const std::vector<double> bad{0.0};
  EXPECT_THROW(voll_sweep(s, bad), std::invalid_argument);
  const auto inf = load_scenario(at::fixture_dir("infeasible"));
  const std::vector<double> one{1.0};
  const auto res = voll_sweep(inf, one);
  EXPECT_FALSE(res.complete);
  EXPECT_EQ(res.failure_status, SolveStatus::infeasible);
  EXPECT_TRUE(res.records.empty());
}
