#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "sheaf_goodwin/io/scenario.hpp"
#include "sheaf_goodwin/sections/report.hpp"
#include "support.hpp"

using namespace sheaf_goodwin;
using testsupport::index_below;
using testsupport::uniform;

namespace {

std::string scenario_path(const std::string& name) { return std::string(SCENARIO_DIR) + "/" + name; }

Scenario load(const std::string& name) { return read_scenario(Config::load(scenario_path(name))); }

std::set<std::string> determined_set(const ExtensionResult& r) {
  std::set<std::string> s;
  for (const auto& d : r.determined) s.insert(d.variable);
  return s;
}

double residual_of(const EquationSystem& sys, const Equation& e, const Assignment& a) {
  std::vector<StalkValue> args;
  for (const auto& v : e.vars) args.push_back(a.at(v));
  (void)sys;
  return std::abs(e.residual(args));
}

// Random states, derivatives filled in through the solved forms; redrawn
// until every value lies in its domain.
Assignment random_consistent(const EquationSystem& sys, Rng& rng) {
  const auto targets = sys.explicit_targets();
  std::set<std::string> derived;
  for (const auto& [eq, t] : targets) derived.insert(t);
  for (;;) {
    Assignment a;
    for (const auto& v : sys.variables()) {
      if (derived.count(v.name)) continue;
      const bool price = v.name.size() > 2 && v.name.compare(v.name.size() - 2, 2, ".p") == 0;
      a.set_scalar(v.name, price ? uniform(rng, 0.6, 1.8) : uniform(rng, 0.3, 0.95));
    }
    for (bool progress = true; progress;) {
      progress = false;
      for (const auto& e : sys.equations()) {
        const std::string& t = targets.at(e.id);
        if (a.contains(t)) continue;
        std::vector<StalkValue> in;
        bool ready = true;
        for (const auto& v : e.inputs_for(t)) {
          if (!a.contains(v)) {
            ready = false;
            break;
          }
          in.push_back(a.at(v));
        }
        if (!ready) continue;
        a.set(t, (*e.solved_for(t))(in));
        progress = true;
      }
    }
    bool ok = a.size() == sys.variables().size();
    for (const auto& v : sys.variables()) ok = ok && v.domain.contains(a.at(v.name));
    if (ok) return a;
  }
}

Assignment random_subset(const Assignment& full, Rng& rng, std::size_t k) {
  std::vector<std::string> keys;
  for (const auto& [n, v] : full) keys.push_back(n);
  std::shuffle(keys.begin(), keys.end(), rng);
  Assignment out;
  for (std::size_t i = 0; i < std::min(k, keys.size()); ++i) out.set(keys[i], full.at(keys[i]));
  return out;
}

} // namespace

TEST(DegreesOfFreedom, TwoCountrySubDiagrams) {
  const auto sys = two_country_system({});
  const auto c1 = sub_diagram(sys, subsystem_equations(ModelKind::two_country, "country1"));
  const auto c2 = sub_diagram(sys, subsystem_equations(ModelKind::two_country, "country2"));
  const auto pr = sub_diagram(sys, subsystem_equations(ModelKind::two_country, "price"));
  EXPECT_EQ(degrees_of_freedom(c1), 3);
  EXPECT_EQ(degrees_of_freedom(c2), 3);
  EXPECT_EQ(degrees_of_freedom(pr), 6);
  EXPECT_EQ(c1.variables.size(), 5u);
  EXPECT_EQ(pr.variables.size(), 8u);
  EXPECT_EQ(pr.poset.size(), 10u);
  std::vector<std::string> w;
  EXPECT_EQ(degrees_of_freedom(sub_diagram(goodwin_system({}), {"eq.v", "eq.u"}), &w), 2);
  EXPECT_TRUE(w.empty());
  EXPECT_THROW(subsystem_equations(ModelKind::two_country, "country3"), ConfigError);
  EXPECT_THROW(subsystem_equations(ModelKind::goodwin, "price"), UnsupportedError);
}

TEST(Chase, StagedScenariosGrowTheDeterminedSet) {
  const auto s1 = load("stage1_country_one.ini");
  const auto r1 = extend_local_section(s1.system(), s1.asserted, s1.mode);
  EXPECT_EQ(determined_set(r1), (std::set<std::string>{"country1.v_dot", "country1.p"}));
  EXPECT_TRUE(r1.still_free.empty());
  EXPECT_EQ(r1.dof_consumed, 3);

  const auto s2 = load("stage2_price_system.ini");
  const auto r2 = extend_local_section(s2.system(), s2.asserted, s2.mode);
  const auto d2 = determined_set(r2);
  for (const auto& v : {"country1.v_dot", "country1.p", "country2.u", "country2.v"}) EXPECT_TRUE(d2.count(v)) << v;

  const auto s3 = load("stage3_country_two.ini");
  const auto sys = s3.system();
  const auto r3 = extend_local_section(sys, s3.asserted, ExtensionMode::structural);
  EXPECT_TRUE(r3.still_free.empty());
  EXPECT_EQ(r3.asserted.size() + r3.determined.size(), sys.variables().size());
  EXPECT_EQ(sys.variables().size(), 12u);
  for (const auto& v : sys.variables()) EXPECT_TRUE(r3.is_determined(v.name) || r3.asserted.contains(v.name)) << v.name;
}

TEST(Chase, NumericReportsTheProductAmbiguity) {
  const auto s = load("stage3_numeric.ini");
  const auto sys = s.system();
  const auto r = extend_local_section(sys, s.asserted, s.mode);
  ASSERT_FALSE(r.ambiguities.empty());
  const auto& amb = r.ambiguities.front();
  ASSERT_GE(amb.witnesses.size(), 2u);
  const auto& w0 = amb.witnesses[0];
  const auto& w1 = amb.witnesses[1];
  EXPECT_NE(w0, w1);
  for (double res : amb.witness_residuals) EXPECT_LT(res, 1e-9);
  // Witnesses are independently checked: every equation whose variables they cover.
  for (const auto& w : amb.witnesses) {
    Assignment all = r.values();
    for (const auto& [n, v] : w) all.set(n, v);
    for (const auto& e : sys.equations()) {
      bool covered = true;
      for (const auto& v : e.vars) covered = covered && all.contains(v);
      if (covered) {
        EXPECT_LT(residual_of(sys, e, all), 1e-9) << e.id;
      }
    }
  }
  const double prod0 = w0.at("country2.u")[0] * w0.at("country2.v")[0];
  const double prod1 = w1.at("country2.u")[0] * w1.at("country2.v")[0];
  EXPECT_NEAR(prod0, prod1, 1e-9);
  EXPECT_GT(std::abs(w0.at("country2.u")[0] - w1.at("country2.u")[0]), 1e-3);
  // Structural mode on the same assertions names the same variables.
  const auto rs = extend_local_section(sys, s.asserted, ExtensionMode::structural);
  EXPECT_EQ(determined_set(rs), determined_set(r));
}

TEST(Chase, EmptyAndOverconstrainedAssertions) {
  const auto e = load("empty_assert.ini");
  const auto re = extend_local_section(e.system(), e.asserted, e.mode);
  EXPECT_TRUE(re.determined.empty());
  EXPECT_EQ(re.still_free.size(), 12u);
  EXPECT_EQ(re.dof_consumed, 0);

  const auto o = load("overconstrained.ini");
  const auto ro = extend_local_section(o.system(), o.asserted, o.mode);
  EXPECT_TRUE(ro.determined.empty());
  EXPECT_FALSE(ro.conflicts.empty());
  for (const auto& c : ro.conflicts) EXPECT_GT(std::abs(c.residual), 1e-9);

  Assignment wrong_shape;
  wrong_shape.set("country1.v", {0.5, 0.5});
  EXPECT_THROW(extend_local_section(o.system(), wrong_shape, ExtensionMode::structural), DomainError);
  Assignment unknown;
  unknown.set_scalar("country3.v", 0.5);
  EXPECT_THROW(extend_local_section(o.system(), unknown, ExtensionMode::structural), StructuralError);
}

TEST(Chase, MonotoneInTheAssertion) {
  Rng rng(31);
  for (auto form : {PriceEquationForm::as_printed, PriceEquationForm::excess_demand}) {
    const auto sys = two_country_system({}, form);
    for (int trial = 0; trial < 60; ++trial) {
      const Assignment full = random_consistent(sys, rng);
      const std::size_t k = index_below(rng, 8);
      const Assignment small = random_subset(full, rng, k);
      Assignment big = small;
      for (const auto& [n, v] : random_subset(full, rng, 1 + index_below(rng, 4))) big.set(n, v);
      const auto rs = extend_local_section(sys, small, ExtensionMode::structural);
      const auto rb = extend_local_section(sys, big, ExtensionMode::structural);
      std::set<std::string> known_s = determined_set(rs), known_b = determined_set(rb);
      for (const auto& [n, v] : small) known_s.insert(n);
      for (const auto& [n, v] : big) known_b.insert(n);
      ASSERT_TRUE(std::includes(known_b.begin(), known_b.end(), known_s.begin(), known_s.end())) << trial;
    }
  }
}

TEST(Chase, IndependentOfEquationOrder) {
  Rng rng(32);
  const auto sys = two_country_system({});
  std::vector<std::string> ids;
  for (const auto& e : sys.equations()) ids.push_back(e.id);
  for (int trial = 0; trial < 40; ++trial) {
    const Assignment a = random_subset(random_consistent(sys, rng), rng, 3 + index_below(rng, 6));
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto shuffled = restrict_system(sys, ids);
    const auto r1 = extend_local_section(sys, a, ExtensionMode::structural);
    const auto r2 = extend_local_section(shuffled, a, ExtensionMode::structural);
    ASSERT_EQ(determined_set(r1), determined_set(r2));
    auto f1 = r1.still_free, f2 = r2.still_free;
    std::sort(f1.begin(), f1.end());
    std::sort(f2.begin(), f2.end());
    ASSERT_EQ(f1, f2);
  }
}

TEST(Chase, NumericValuesAreSound) {
  Rng rng(33);
  for (auto form : {PriceEquationForm::as_printed, PriceEquationForm::excess_demand}) {
    const auto sys = two_country_system({}, form);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
      const Assignment full = random_consistent(sys, rng);
      const Assignment a = random_subset(full, rng, 4 + index_below(rng, 5));
      const auto r = extend_local_section(sys, a, ExtensionMode::numeric);
      ASSERT_TRUE(r.conflicts.empty()) << trial;
      const Assignment vals = r.values();
      for (const auto& e : sys.equations()) {
        bool covered = true;
        for (const auto& v : e.vars) covered = covered && vals.contains(v);
        if (!covered) continue;
        ASSERT_LT(residual_of(sys, e, vals), 1e-9) << e.id << " trial " << trial;
        ++checked;
      }
    }
    EXPECT_GT(checked, 20);
  }
}

TEST(Chase, NumericRecoversUniqueValues) {
  // Goodwin lines are monotone in each variable on its box, so the chase
  // must land on the values the assignment was built from.
  Rng rng(34);
  const auto sys = goodwin_system({});
  for (int trial = 0; trial < 100; ++trial) {
    const Assignment full = random_consistent(sys, rng);
    const Assignment a = random_subset(full, rng, 2);
    const auto r = extend_local_section(sys, a, ExtensionMode::numeric);
    ASSERT_TRUE(r.ambiguities.empty());
    for (const auto& d : r.determined) {
      ASSERT_TRUE(d.value.has_value());
      ASSERT_NEAR(*d.value, full.at(d.variable)[0], 1e-9) << d.variable;
    }
    const auto rs = extend_local_section(sys, a, ExtensionMode::structural);
    ASSERT_EQ(determined_set(rs), determined_set(r));
  }
}

TEST(Report, TableAndJson) {
  const auto s = load("stage1_country_one.ini");
  const auto r = extend_local_section(s.system(), s.asserted, ExtensionMode::numeric);
  const auto rep = section_report(r);
  EXPECT_NE(rep.table.find("asserted"), std::string::npos);
  EXPECT_NE(rep.table.find("country1.v_dot"), std::string::npos);
  EXPECT_EQ(rep.json["mode"], "numeric");
  EXPECT_EQ(rep.json["determined"].size(), 2u);
  EXPECT_TRUE(rep.json["conflicts"].empty());
  EXPECT_EQ(section_report(r).json.dump(), rep.json.dump());
}
