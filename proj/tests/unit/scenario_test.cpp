#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "adequacy/scenario.hpp"
#include "support.hpp"

using namespace adequacy;
using adequacy::testing::fixture_dir;
using adequacy::testing::temp_dir;

namespace {

std::filesystem::path copy_fixture(const std::string& name, const std::string& tag) {
  const auto dir = temp_dir(tag);
  std::filesystem::copy(fixture_dir(name), dir, std::filesystem::copy_options::recursive |
                                                    std::filesystem::copy_options::overwrite_existing);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  out << text;
}

void replace_once(const std::filesystem::path& p, const std::string& from, const std::string& to) {
  std::string text = slurp(p);
  const auto at = text.find(from);
  ASSERT_NE(at, std::string::npos) << from;
  text.replace(at, from.size(), to);
  spit(p, text);
}

std::string load_error(const std::filesystem::path& dir) {
  try {
    load_scenario(dir);
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(LoadScenario, MinimalFixture) {
  const auto s = load_scenario(fixture_dir("min1"));
  ASSERT_EQ(s.regions.size(), 1u);
  EXPECT_EQ(s.config.horizon_hours, 24);
  EXPECT_EQ(s.config.hours_per_year, 8760);
  EXPECT_TRUE(s.links.empty());
  ASSERT_EQ(s.demands.size(), 1u);
  EXPECT_EQ(s.demands[0].demand.size(), 24u);
}

TEST(LoadScenario, SeriesLengthsMatchHorizon) {
  for (const char* name : {"min1", "export2", "collapse", "merit", "converter_limit", "link_limit", "perf5"}) {
    const auto s = load_scenario(fixture_dir(name));
    const auto h = static_cast<std::size_t>(s.config.horizon_hours);
    for (const auto& p : s.profiles) EXPECT_EQ(p.factors.size(), h) << name;
    for (const auto& d : s.demands) EXPECT_EQ(d.demand.size(), h) << name;
    EXPECT_TRUE(validate(s).empty()) << name;
  }
}

TEST(LoadScenario, MissingLinksMeansNoLinks) {
  const auto dir = copy_fixture("export2", "no_links");
  std::filesystem::remove(dir / "links.csv");
  EXPECT_TRUE(load_scenario(dir).links.empty());
}

TEST(LoadScenario, UnknownRegionInProfile) {
  const auto dir = copy_fixture("min1", "bad_region");
  replace_once(dir / "profiles.csv", "R1,gen,7,", "XX,gen,7,");
  const auto what = load_error(dir);
  EXPECT_NE(what.find("profiles.csv"), std::string::npos) << what;
  EXPECT_NE(what.find(":9"), std::string::npos) << what;
  EXPECT_NE(what.find("XX"), std::string::npos) << what;
  EXPECT_NE(what.find("region"), std::string::npos) << what;
}

TEST(LoadScenario, MalformedNumberNamesColumn) {
  const auto dir = copy_fixture("min1", "bad_number");
  replace_once(dir / "sector_demand.csv", "R1,electricity,households,3,100", "R1,electricity,households,3,1o0");
  const auto what = load_error(dir);
  EXPECT_NE(what.find("sector_demand.csv:5"), std::string::npos) << what;
  EXPECT_NE(what.find("demand_mwh"), std::string::npos) << what;
}

TEST(LoadScenario, UnknownColumn) {
  const auto dir = copy_fixture("min1", "bad_column");
  replace_once(dir / "regions.csv", "country_voll_eur_per_kwh", "voll");
  const auto what = load_error(dir);
  EXPECT_NE(what.find("regions.csv:1"), std::string::npos) << what;
  EXPECT_NE(what.find("voll"), std::string::npos) << what;
}

TEST(LoadScenario, MissingFile) {
  const auto dir = copy_fixture("min1", "missing_file");
  std::filesystem::remove(dir / "technologies.csv");
  const auto what = load_error(dir);
  EXPECT_NE(what.find("technologies.csv"), std::string::npos) << what;
}

TEST(LoadScenario, MissingHour) {
  const auto dir = copy_fixture("min1", "missing_hour");
  replace_once(dir / "profiles.csv", "R1,gen,5,1\n", "");
  const auto what = load_error(dir);
  EXPECT_NE(what.find("profiles.csv"), std::string::npos) << what;
  EXPECT_NE(what.find("hour 5"), std::string::npos) << what;
}

TEST(LoadScenario, LocaleIndependentDecimals) {
  const auto dir = copy_fixture("min1", "comma_decimal");
  replace_once(dir / "regions.csv", "7.3", "7,3");
  EXPECT_NE(load_error(dir).find("regions.csv:2"), std::string::npos);
}

TEST(Validate, ValidFixtureHasNoViolations) {
  EXPECT_TRUE(validate(load_scenario(fixture_dir("min1"))).empty());
}

TEST(Validate, ConverterEfficiencyAboveOne) {
  auto s = load_scenario(fixture_dir("converter_limit"));
  auto ti = *s.technology_index("electrolyzer");
  s.technologies[ti].efficiency = 1.2;
  const auto v = validate(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].severity, Severity::error);
  EXPECT_EQ(v[0].file, "technologies.csv");
  EXPECT_NE(v[0].message.find("electrolyzer"), std::string::npos) << v[0].message;
}

TEST(Validate, CapacityFactorAboveOne) {
  auto s = load_scenario(fixture_dir("min1"));
  s.profiles[0].factors[7] = 1.0001;
  const auto v = validate(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].file, "profiles.csv");
  EXPECT_EQ(v[0].row, 8u);
  EXPECT_NE(v[0].message.find("R1"), std::string::npos);
  EXPECT_NE(v[0].message.find("gen"), std::string::npos);
  EXPECT_NE(v[0].message.find("hour 7"), std::string::npos);
}

TEST(Validate, OrderedByFileThenRow) {
  auto s = load_scenario(fixture_dir("merit"));
  s.profiles[0].factors[3] = -0.5;
  s.technologies[0].capex_annual = -1;
  s.profiles[0].factors[1] = 2.0;
  s.config.event_threshold_fraction = 1.5;
  const auto v = validate(s);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v[0].file, "config.json");
  EXPECT_EQ(v[1].file, "technologies.csv");
  EXPECT_EQ(v[2].file, "profiles.csv");
  EXPECT_EQ(v[2].row, 2u);
  EXPECT_EQ(v[3].row, 4u);
}

TEST(Validate, StructuralInvariants) {
  auto s = load_scenario(fixture_dir("export2"));
  s.links[0].to = s.links[0].from;
  s.links[0].loss_fraction = 1.0;
  s.technologies[0].carrier_in = Carrier::hydrogen;
  const auto v = validate(s);
  EXPECT_TRUE(has_errors(v));
  EXPECT_GE(v.size(), 3u);
}

TEST(Validate, UnsuppliedDemandIsOnlyAWarning) {
  auto s = load_scenario(fixture_dir("min1"));
  s.profiles.clear();
  const auto v = validate(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].severity, Severity::warning);
  EXPECT_FALSE(has_errors(v));
}

TEST(Validate, SectorVollsPreserveCountryMean) {
  const auto s = load_scenario(fixture_dir("collapse"));
  for (const auto& r : s.regions) {
    const auto w = detail::sector_weights(s, r.id);
    double mean = 0;
    for (std::size_t k = 0; k < kSectorCount; ++k) mean += w[k] * r.sector_voll[k];
    EXPECT_NEAR(mean, r.country_voll, 1e-9 * r.country_voll) << r.id;
  }
}

TEST(SaveScenario, RoundTripIsIdentity) {
  for (const char* name : {"min1", "export2", "converter_limit", "link_limit", "merit", "peaker"}) {
    const auto s = load_scenario(fixture_dir(name));
    const auto dir = temp_dir(std::string("roundtrip_") + name);
    save_scenario(s, dir);
    EXPECT_EQ(load_scenario(dir), s) << name;
  }
}

TEST(SaveScenario, RowOrderDoesNotMatter) {
  const auto dir = copy_fixture("min1", "shuffled");
  std::istringstream in(slurp(dir / "profiles.csv"));
  std::string header, line;
  std::getline(in, header);
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  std::reverse(rows.begin(), rows.end());
  std::string text = header + "\n";
  for (const auto& r : rows) text += r + "\n";
  spit(dir / "profiles.csv", text);
  EXPECT_EQ(load_scenario(dir), load_scenario(fixture_dir("min1")));
}
