#include <gtest/gtest.h>

#include "dorplan/json_io.hpp"

using namespace dorplan;
using io::json;

namespace {

std::string fixture(const std::string& name) { return std::string(DORPLAN_FIXTURES_DIR) + "/" + name; }

PlanningInstance ecovillage() { return io::instance_from_json(io::read_json_file(fixture("ecovillage.json"))); }

std::vector<std::string> details_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.details();
  }
  return {};
}

bool mentions(const std::vector<std::string>& lines, const std::string& needle) {
  for (const auto& l : lines)
    if (l.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(JsonIo, MoneyParsing) {
  EXPECT_EQ(io::parse_money(json(1234), "x"), 1234);
  EXPECT_EQ(io::parse_money(json("212175"), "x"), 21217500);
  EXPECT_EQ(io::parse_money(json("12.5"), "x"), 1250);
  EXPECT_EQ(io::parse_money(json("12.05"), "x"), 1205);
  EXPECT_EQ(io::parse_money(json("-3.10"), "x"), -310);
  EXPECT_THROW(io::parse_money(json("212,175"), "x"), InputError);
  EXPECT_THROW(io::parse_money(json("212 175"), "x"), InputError);
  EXPECT_THROW(io::parse_money(json("1.234"), "x"), InputError);
  EXPECT_THROW(io::parse_money(json("12."), "x"), InputError);
  EXPECT_THROW(io::parse_money(json(""), "x"), InputError);
  EXPECT_THROW(io::parse_money(json(12.5), "x"), InputError);
  for (Cents c : {0LL, 5LL, 1250LL, 1205LL, 21217500LL, -310LL})
    EXPECT_EQ(io::parse_money(io::money_to_json(c), "x"), c);
}

TEST(JsonIo, EcovillageFixture) {
  const auto inst = ecovillage();
  EXPECT_EQ(inst.facilities.size(), 10u);
  EXPECT_EQ(inst.periods, 4u);
  EXPECT_EQ(inst.criteria.size(), 4u);
  ASSERT_EQ(inst.budgets.size(), 2u);
  EXPECT_EQ(inst.budgets[*inst.budget_index("B1")].per_period, std::vector<Cents>(4, 10000000));
  EXPECT_EQ(inst.budgets[*inst.budget_index("B2")].per_period, std::vector<Cents>(4, 5000000));
  EXPECT_NEAR(inst.discount[3], 1.0 / 1.331, 1e-15);
  const auto res = *inst.facility_index("RES-WWO");
  EXPECT_EQ(inst.facilities[res].locations[0].cost, 21217500);
  EXPECT_EQ(inst.facilities[res].locations[0].buildings, (std::vector<std::string>{"B", "A"}));
  const auto rec = *inst.facility_index("ROM-REC");
  EXPECT_EQ(inst.facilities[rec].locations[1].buildings, (std::vector<std::string>{"Pavillon"}));
  EXPECT_EQ(inst.exclusions.size(), 4u);
  ASSERT_EQ(inst.synergies.size(), 1u);
  EXPECT_DOUBLE_EQ(inst.synergies[0].boost, 0.2);
}

TEST(JsonIo, InstanceRoundTrip) {
  for (const char* f : {"ecovillage.json", "toy.json"}) {
    const auto a = io::instance_from_json(io::read_json_file(fixture(f)));
    const auto ja = io::instance_to_json(a);
    const auto b = io::instance_from_json(ja);
    EXPECT_EQ(ja, io::instance_to_json(b)) << f;
  }
}

TEST(JsonIo, InstanceDiagnostics) {
  auto doc = io::read_json_file(fixture("toy.json"));
  doc.erase("criteria");
  EXPECT_TRUE(mentions(details_of([&] { io::instance_from_json(doc); }), "criteria"));

  doc = io::read_json_file(fixture("toy.json"));
  doc["facilities"][0]["locations"][0]["cost"] = "2,000";
  EXPECT_TRUE(mentions(details_of([&] { io::instance_from_json(doc); }), "thousands"));

  doc = io::read_json_file(fixture("toy.json"));
  doc["exclusions"][0]["b"]["facility"] = "NOPE";
  EXPECT_TRUE(mentions(details_of([&] { io::instance_from_json(doc); }), "NOPE"));

  EXPECT_THROW(io::parse_json("{\"periods\": "), InputError);
  EXPECT_THROW(io::read_json_file(fixture("missing.json")), InputError);
}

TEST(JsonIo, PlanRoundTripAndCells) {
  const auto inst = ecovillage();
  const auto pj = io::read_json_file(fixture("ecovillage_plans.json"));
  const auto cols = pj["columns"].get<std::vector<std::string>>();
  const auto cells = pj["iterations"][0]["plans"]["x1"].get<std::vector<std::string>>();
  const auto plan = io::plan_from_cells(inst, cols, cells, "x1");
  EXPECT_EQ(plan.assignments.size(), 9u);
  const auto back = io::plan_from_json(inst, io::plan_to_json(inst, plan));
  EXPECT_EQ(back.canonical(), plan.canonical());
  EXPECT_EQ(back.provenance, "x1");
  for (std::size_t f = 0; f < cols.size(); ++f)
    EXPECT_EQ(io::plan_cell(inst, plan, *inst.facility_index(cols[f])), cells[f] == "x" ? io::kUnselected : cells[f]);
  const auto csv = io::plan_table_csv(inst, {{"x1", plan}});
  EXPECT_EQ(csv,
            "plan,RES-WWO,KIT-WWO,REF-WWO,ROM-GUE,KIT-GUE,DIN-GUE,TAI-LAB,WOO-LAB,ROM-REC,ROM-TEC\n"
            "x1,\xC3\x97,l1t1,l1t1,l2t3,l1t0,l1t0,l1t0,l2t0,l2t1,l2t1\n");
  EXPECT_THROW(io::plan_from_cells(inst, cols, std::vector<std::string>(cols.size(), "l9t1")), InputError);
  EXPECT_THROW(io::plan_from_cells(inst, cols, std::vector<std::string>(cols.size(), "l1tx")), InputError);
  EXPECT_THROW(io::plan_from_cells(inst, cols, {"x"}), InputError);
  EXPECT_THROW(io::plan_from_json(inst, json{{"assignments", {{{"facility", "RES-WWO"}, {"location", "l1"}}}}}),
               InputError);
}

TEST(JsonIo, RankingsAndScores) {
  const auto r = io::ranking_from_json(io::read_json_file(fixture("didactic_ranking.json")));
  EXPECT_EQ(io::ranking_from_json(io::ranking_to_json(r)).classes, r.classes);
  const auto t = score(r);
  const auto back = io::scores_from_json(io::scores_to_json(t));
  EXPECT_EQ(back, t);
  EXPECT_THROW(io::ranking_from_json(io::read_json_file(fixture("empty_ranking.json"))), InputError);
  EXPECT_THROW(io::ranking_from_json(json{{"classes", {{"a"}, {"a"}}}}), InputError);
  EXPECT_THROW(io::ranking_from_json(json{{"classes", {{"a"}, {"b"}}}, {"blanks", {1, 2}}}), InputError);
}

TEST(JsonIo, ObjectivesAndCapacities) {
  Capacity2Additive c(3);
  c.set_singleton(0, 0.4);
  c.set_singleton(1, 0.3);
  c.set_singleton(2, 0.5);
  c.set_pair(0, 1, -0.2);
  const auto o = ObjectiveSpec::choquet("c", c, Normalization{{0, 0, 0}, {10, 20, 30}});
  const auto b = io::objective_from_json(io::objective_to_json(o));
  EXPECT_EQ(io::objective_to_json(b), io::objective_to_json(o));
  const ContributionVector g{{5, 5, 5}, {}};
  EXPECT_DOUBLE_EQ(b.evaluate(g), o.evaluate(g));
  EXPECT_THROW(io::objective_from_json(json{{"kind", "median"}}), InputError);
  EXPECT_THROW(io::objective_from_json(json{{"kind", "choquet"}}), InputError);
}

TEST(JsonIo, GridExpansion) {
  const auto inst = ecovillage();
  const auto grid = io::read_json_file(fixture("ecovillage_grid.json"));
  const auto cells = io::grid_from_json(inst, grid, {});
  ASSERT_EQ(cells.size(), 20u);
  EXPECT_EQ(cells.front().name, "B1-w1-syn");
  EXPECT_EQ(cells.back().name, "B2-w5-nosyn");
  for (const auto& sc : cells) EXPECT_NO_THROW(sc.objective.validate(inst.criteria.size(), 1));
  const auto j = io::scenario_to_json(inst, cells[3]);
  const auto again = io::scenario_from_json(inst, j, {});
  EXPECT_EQ(io::scenario_to_json(inst, again), j);

  EXPECT_THROW(io::grid_from_json(inst, json{{"product", {{"budgets", {"B9"}}, {"objectives", {"w1"}}}}}, {}),
               InputError);
  EXPECT_THROW(io::grid_from_json(inst, json{{"product", {{"budgets", {1}}, {"objectives", {"w1"}}}}}, {}),
               InputError);
  EXPECT_THROW(io::grid_from_json(inst, json::object(), {}), InputError);
}

TEST(JsonIo, ConstraintsRoundTrip) {
  const auto inst = ecovillage();
  const json cons = {{"required", {"TAI-LAB"}},
                     {"at_least_one_of", json::array({json::array({"KIT-WWO", "KIT-GUE"}), json::array({"RES-WWO", "ROM-GUE"})})},
                     {"forbidden_pairs", {{{"a", {{"facility", "WOO-LAB"}, {"location", "l1"}}},
                                           {"b", {{"facility", "ROM-REC"}, {"location", "l1"}}}}}},
                     {"precedences", {{{"earlier", "TAI-LAB"}, {"later", "WOO-LAB"}}}},
                     {"min_two_per_building", "if-used"}};
  io::detail::Diag d;
  const auto x = io::constraints_from_json(inst, cons, d);
  EXPECT_TRUE(d.lines.empty());
  EXPECT_EQ(io::constraints_to_json(inst, x), cons);
  io::detail::Diag bad;
  io::constraints_from_json(
      inst, json{{"min_two_per_building", "most"}, {"required", {"ZZZ"}}, {"at_least_one_of", {{"a", 1}}}}, bad);
  EXPECT_EQ(bad.lines.size(), 3u);
}

TEST(JsonIo, FitRequestAndResult) {
  auto doc = io::read_json_file(fixture("didactic.json"));
  doc["family"] = "choquet";
  const auto req = io::fit_request_from_json(doc);
  EXPECT_EQ(req.items.size(), 6u);
  EXPECT_EQ(req.scores[0], 51.0);
  const auto again = io::fit_request_from_json(io::fit_request_to_json(req));
  EXPECT_EQ(again.scores, req.scores);
  const auto res = fit(req);
  const auto rj = io::fit_result_to_json(res);
  const auto back = io::fit_result_from_json(rj);
  EXPECT_EQ(io::fit_result_to_json(back), rj);
  const ContributionVector g{{70, 60, 70}, {}};
  EXPECT_DOUBLE_EQ(back.evaluate(g), res.evaluate(g));

  doc["family"] = "spline";
  EXPECT_THROW(io::fit_request_from_json(doc), InputError);
  doc["family"] = "ws";
  doc.erase("ranking");
  EXPECT_THROW(io::fit_request_from_json(doc), InputError);
}
