#include <gtest/gtest.h>

#include "support.hpp"

using namespace fcm;

namespace {

TypologyRegistry fixture_registry() {
  TypologyRegistry r;
  r.climate_zones = {"temperate", "arctic"};
  r.population_classes = {{"small", 0, 10000}, {"medium", 10000, 50000}, {"large", 50000, std::nullopt}};
  r.specializations = {"agriculture", "mining"};
  for (const auto& k : r.climate_zones)
    for (const auto& p : r.population_classes)
      for (const auto& a : r.specializations) r.supported.insert({k, p.label, a});
  return r;
}

}  // namespace

TEST(ResolveType, MediumAgriculturalTown) {
  const auto t = resolve_type(fixture_registry(), "temperate", 25000, "agriculture");
  EXPECT_EQ(t, (MunicipalityType{"temperate", "medium", "agriculture"}));
}

TEST(ResolveType, LowerBoundIsInclusive) {
  EXPECT_EQ(resolve_type(fixture_registry(), "temperate", 10000, "agriculture").population_class, "medium");
  EXPECT_EQ(resolve_type(fixture_registry(), "temperate", 9999, "agriculture").population_class, "small");
  EXPECT_EQ(resolve_type(fixture_registry(), "temperate", 0, "agriculture").population_class, "small");
}

TEST(ResolveType, Errors) {
  auto reg = fixture_registry();
  try {
    resolve_type(reg, "temperate", 25000, "tourism");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unknown specialization"), std::string::npos);
  }
  EXPECT_THROW(resolve_type(reg, "tropical", 25000, "mining"), Error);
  reg.supported.erase({"arctic", "large", "mining"});
  try {
    resolve_type(reg, "arctic", 60000, "mining");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unsupported);
  }
  reg.population_classes.pop_back();  // corrupt: no class above 50 000
  EXPECT_THROW(resolve_type(reg, "temperate", 60000, "mining"), Error);
}

TEST(ValidateRegistry, DetectsGapsAndBadTriples) {
  auto reg = fixture_registry();
  EXPECT_TRUE(validate_registry(reg).empty());
  reg.population_classes[1].upper = 40000;
  EXPECT_FALSE(validate_registry(reg).empty());
  reg = fixture_registry();
  reg.supported.insert({"tropical", "small", "mining"});
  EXPECT_FALSE(validate_registry(reg).empty());
}

TEST(IndicatorsForType, UnionOfGeneralAndSpecial) {
  IndicatorTemplate tpl;
  tpl.general = {"demographics", "quality_of_life"};
  tpl.special["agriculture"] = {"agricultural_output"};
  const auto ids = indicators_for_type(tpl, {"temperate", "medium", "agriculture"});
  EXPECT_EQ(ids, (std::set<std::string>{"agricultural_output", "demographics", "quality_of_life"}));
}

TEST(IndicatorsForType, NoSpecialEntryGivesGeneral) {
  IndicatorTemplate tpl;
  tpl.general = {"demographics"};
  EXPECT_EQ(indicators_for_type(tpl, {"temperate", "medium", "mining"}), tpl.general);
}

TEST(IndicatorsForType, OverlapHasNoDuplicatesAndOverridesWin) {
  IndicatorTemplate tpl;
  tpl.general = {"demographics", "income"};
  tpl.special["mining"] = {"income", "extraction"};
  MunicipalityType t{"arctic", "small", "mining"};
  EXPECT_EQ(indicators_for_type(tpl, t), (std::set<std::string>{"demographics", "extraction", "income"}));
  tpl.overrides[t] = {"delivery"};
  EXPECT_EQ(indicators_for_type(tpl, t), (std::set<std::string>{"delivery", "demographics", "income"}));
}

TEST(SemanticQuery, StrategyDeterminants) {
  const auto net = strategy_determinant_network();
  EXPECT_EQ(semantic_query(net, "SED-strategy", "depends-on"),
            (std::set<std::string>{"current-SED-level", "municipality-type", "rural-settlement-count"}));
  EXPECT_EQ(semantic_query(net, "municipality-type", "depends-on"),
            (std::set<std::string>{"climate-zone", "population-class", "specialization"}));
  EXPECT_TRUE(semantic_query(net, "nowhere", "depends-on").empty());
}

TEST(SemanticQuery, UnrelatedEdgeDoesNotChangeResults) {
  auto net = strategy_determinant_network();
  const auto before = semantic_query(net, "SED-strategy", "depends-on");
  net.add_node("forestry");
  net.add_edge({"forestry", "is-a", "specialization"});
  EXPECT_EQ(semantic_query(net, "SED-strategy", "depends-on"), before);
}

TEST(SemanticNetwork, RejectsDuplicatesAndDanglingTriples) {
  auto net = strategy_determinant_network();
  EXPECT_THROW(net.add_edge({"SED-strategy", "depends-on", "municipality-type"}), Error);
  EXPECT_THROW(net.add_edge({"SED-strategy", "depends-on", "missing"}), Error);
  EXPECT_THROW(net.add_edge({"SED-strategy", "causes", "production"}), Error);
}

TEST(Knowledge, ShippedRegistryMatchesBuiltInNetwork) {
  const auto kb = io::load_knowledge(io::read_file(fcm::testing::data_path("registry.json")));
  EXPECT_EQ(kb.network, strategy_determinant_network());
  EXPECT_TRUE(validate_registry(kb.registry).empty());
  const auto t = resolve_type(kb.registry, "arctic", 3000, "mining");
  EXPECT_TRUE(indicators_for_type(kb.indicators, t).contains("northern_delivery"));
}
