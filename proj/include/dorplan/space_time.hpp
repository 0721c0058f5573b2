#pragma once

// Space-time 0-1 model: which facility opens, where and when, under
// cumulative budgets, exclusions, precedences and scenario-level rules, with
// a weighted-sum or 2-additive Choquet objective over discounted criterion
// contributions.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dorplan/fit.hpp"
#include "dorplan/lp.hpp"
#include "dorplan/model.hpp"

namespace dorplan {

struct ObjectiveSpec {
  enum class Kind { WeightedSum, Choquet };

  std::string name;
  Kind kind = Kind::WeightedSum;
  std::vector<double> weights;  // weighted sum, one per criterion
  Capacity2Additive capacity;   // choquet, bonus entries align with contribution flags
  std::optional<Normalization> normalization;

  static ObjectiveSpec weighted(std::string name, std::vector<double> w) {
    ObjectiveSpec o;
    o.name = std::move(name);
    o.weights = std::move(w);
    return o;
  }
  static ObjectiveSpec choquet(std::string name, Capacity2Additive cap, std::optional<Normalization> n = {}) {
    ObjectiveSpec o;
    o.name = std::move(name);
    o.kind = Kind::Choquet;
    o.capacity = std::move(cap);
    o.normalization = std::move(n);
    return o;
  }

  /// Objective driven by a fitted value function. Piecewise marginals are not
  /// accepted: the optimizer only linearizes sums and pairwise minima.
  static ObjectiveSpec from_fit(std::string name, const RegressionResult& r) {
    switch (r.family) {
      case ValueFamily::Choquet: return choquet(std::move(name), r.capacity, r.normalization);
      case ValueFamily::WeightedSum: {
        const std::size_t m = r.criteria;
        if (r.weights.size() == m && !r.normalization) return weighted(std::move(name), r.weights);
        // flag weights become bonus terms of an additive capacity
        Capacity2Additive cap(m, r.weights.size() - m);
        for (std::size_t j = 0; j < m; ++j) cap.set_singleton(j, r.weights[j]);
        for (std::size_t b = m; b < r.weights.size(); ++b) cap.bonus()[b - m] = r.weights[b];
        return choquet(std::move(name), std::move(cap), r.normalization);
      }
      case ValueFamily::Piecewise: break;
    }
    throw InputError("unsupported objective", {"piecewise value functions cannot drive the space-time optimizer"});
  }

  std::size_t bonus_count() const { return kind == Kind::Choquet ? capacity.bonus().size() : 0; }

  void validate(std::size_t criteria, std::size_t flags) const {
    std::vector<std::string> d;
    if (kind == Kind::WeightedSum) {
      if (weights.size() != criteria) d.push_back("objective " + name + ": expected " + std::to_string(criteria) + " weights");
      double s = 0.0;
      for (double w : weights) {
        if (!(w >= 0.0)) d.push_back("objective " + name + ": weights must be >= 0");
        s += w;
      }
      if (std::abs(s - 1.0) > 1e-9) d.push_back("objective " + name + ": weights must sum to 1");
    } else {
      if (capacity.criteria() != criteria)
        d.push_back("objective " + name + ": capacity expects " + std::to_string(capacity.criteria()) + " criteria");
      if (!capacity.bonus().empty() && capacity.bonus().size() != flags)
        d.push_back("objective " + name + ": bonus weights need " + std::to_string(flags) + " flags");
      try {
        capacity.validate(1e-9);
      } catch (const InputError& e) {
        for (const auto& x : e.details()) d.push_back("objective " + name + ": " + x);
      }
    }
    if (normalization && (normalization->lower.size() != criteria || normalization->upper.size() != criteria))
      d.push_back("objective " + name + ": normalization bounds need " + std::to_string(criteria) + " entries");
    if (!d.empty()) throw InputError("invalid objective", std::move(d));
  }

  double evaluate(const ContributionVector& raw) const {
    const ContributionVector g = normalization ? normalization->apply(raw) : raw;
    if (kind == Kind::WeightedSum) return weighted_sum(g, weights);
    if (capacity.bonus().empty()) {
      ContributionVector h{g.criteria, {}};
      return choquet_value(h, capacity);
    }
    return choquet_value(g, capacity);
  }
};

enum class MinTwoRule { None, IfUsed, All };

/// Rules layered on top of the instance for one scenario.
struct ExtraConstraints {
  std::vector<std::size_t> required;                  // facility must open somewhere
  std::vector<std::vector<std::size_t>> at_least_one_of;  // groups of facilities
  std::vector<Exclusion> forbidden;                   // co-location bans, same as exclusions
  std::vector<Precedence> precedences;
  MinTwoRule min_two_per_building = MinTwoRule::None;
};

struct Scenario {
  std::string name;
  std::size_t budget = 0;  // index into instance.budgets
  ObjectiveSpec objective;
  bool synergy = true;     // synergy contributions counted in g
  ExtraConstraints extra;
};

struct Violation {
  std::string family;
  std::vector<std::string> entities;
  double slack = 0.0;  // negative: amount by which the row is violated
};

/// Candidate (facility, location) pairs per building; a location spanning
/// several buildings belongs to each of them.
inline std::map<std::string, std::vector<Anchor>> building_members(const PlanningInstance& inst) {
  std::map<std::string, std::vector<Anchor>> out;
  for (std::size_t i = 0; i < inst.facilities.size(); ++i)
    for (std::size_t l = 0; l < inst.facilities[i].locations.size(); ++l)
      for (const auto& b : inst.facilities[i].locations[l].buildings) {
        auto& v = out[b];
        if (std::find(v.begin(), v.end(), Anchor{i, l}) == v.end()) v.push_back({i, l});
      }
  return out;
}

namespace detail {

inline void validate_scenario(const PlanningInstance& inst, const Scenario& sc) {
  std::vector<std::string> d;
  if (sc.budget >= inst.budgets.size()) d.push_back("scenario " + sc.name + ": unknown budget schedule");
  const auto nf = inst.facilities.size();
  for (auto f : sc.extra.required)
    if (f >= nf) d.push_back("scenario " + sc.name + ": required facility out of range");
  for (const auto& g : sc.extra.at_least_one_of) {
    if (g.empty()) d.push_back("scenario " + sc.name + ": empty at-least-one group");
    for (auto f : g)
      if (f >= nf) d.push_back("scenario " + sc.name + ": at-least-one facility out of range");
  }
  for (const auto& e : sc.extra.forbidden)
    if (!inst.has_anchor(e.first) || !inst.has_anchor(e.second))
      d.push_back("scenario " + sc.name + ": forbidden pair references unknown facility/location");
  for (const auto& p : sc.extra.precedences)
    if (p.earlier >= nf || p.later >= nf || p.earlier == p.later)
      d.push_back("scenario " + sc.name + ": invalid precedence");
  if (!d.empty()) throw InputError("invalid scenario", std::move(d));
  sc.objective.validate(inst.criteria_count(), inst.synergies.empty() ? 0 : 1);
}

inline std::vector<Precedence> all_precedences(const PlanningInstance& inst, const Scenario& sc) {
  auto p = inst.precedences;
  p.insert(p.end(), sc.extra.precedences.begin(), sc.extra.precedences.end());
  return p;
}

inline std::vector<Exclusion> all_exclusions(const PlanningInstance& inst, const Scenario& sc) {
  auto e = inst.exclusions;
  e.insert(e.end(), sc.extra.forbidden.begin(), sc.extra.forbidden.end());
  return e;
}

}  // namespace detail

/// The compiled program plus the column maps needed to decode it.
struct Assembly {
  lp::LinearProgram lp;
  std::vector<std::vector<std::vector<std::size_t>>> x;  // [i][l][t]
  std::vector<std::vector<std::size_t>> gamma;           // [r][t], empty when unused
  std::optional<std::size_t> syn;
  struct MinTerm {
    std::size_t j, k;
    std::size_t var;
    std::optional<std::size_t> selector;  // big-M binary for negative pair weights
    double big_m = 0.0;
  };
  std::vector<MinTerm> min_terms;
  std::vector<double> lower, upper;  // bounds on the (normalized) g_j expressions
};

/// Compiles `inst` and `sc` into a 0-1 program (maximization).
inline Assembly assemble(const PlanningInstance& inst, const Scenario& sc) {
  inst.validate();
  detail::validate_scenario(inst, sc);
  Assembly A;
  auto& lp = A.lp;
  lp.set_sense(lp::Sense::Maximize);
  const std::size_t nf = inst.facilities.size(), T = inst.periods, m = inst.criteria_count();
  const auto& obj = sc.objective;

  A.x.resize(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    const auto& f = inst.facilities[i];
    A.x[i].resize(f.locations.size());
    for (std::size_t l = 0; l < f.locations.size(); ++l)
      for (std::size_t t = 0; t < T; ++t)
        A.x[i][l].push_back(lp.add_binary("x_" + f.id + "_" + f.locations[l].id + "_" + std::to_string(t)));
  }

  // tail[t] = sum_{s > t, s >= 1} v(s): weight of an activation at t
  std::vector<double> tail(T, 0.0);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t s = std::max<std::size_t>(t + 1, 1); s < T; ++s) tail[t] += inst.discount[s];
  double horizon = 0.0;
  for (std::size_t s = 1; s < T; ++s) horizon += inst.discount[s];

  double bonus_weight = 0.0;
  for (double b : obj.capacity.bonus()) bonus_weight += obj.kind == ObjectiveSpec::Kind::Choquet ? b : 0.0;
  const bool need_gamma = !inst.synergies.empty() && (sc.synergy || bonus_weight > 0.0);
  if (need_gamma) {
    A.gamma.resize(inst.synergies.size());
    for (std::size_t r = 0; r < inst.synergies.size(); ++r) {
      const auto& s = inst.synergies[r];
      for (std::size_t t = 0; t < T; ++t) {
        const auto g = lp.add_variable("gamma_" + std::to_string(r + 1) + "_" + std::to_string(t), 0.0, 1.0);
        A.gamma[r].push_back(g);
        std::vector<lp::Term> a_le, b_le, both{{g, -1.0}};
        for (std::size_t tau = 0; tau <= t; ++tau) {
          const auto xa = A.x[s.first.facility][s.first.location][tau];
          const auto xb = A.x[s.second.facility][s.second.location][tau];
          a_le.push_back({xa, 1.0});
          b_le.push_back({xb, 1.0});
          both.push_back({xa, 1.0});
          both.push_back({xb, 1.0});
        }
        a_le.push_back({g, -1.0});
        b_le.push_back({g, -1.0});
        const std::string tag = std::to_string(r + 1) + "_" + std::to_string(t);
        lp.add_constraint(both, lp::Relation::LessEqual, 1.0, "syn_and_" + tag);
        lp.add_constraint(a_le, lp::Relation::GreaterEqual, 0.0, "syn_a_" + tag);
        lp.add_constraint(b_le, lp::Relation::GreaterEqual, 0.0, "syn_b_" + tag);
      }
    }
  }

  // ---- constraint families
  const auto& budget = inst.budgets[sc.budget].per_period;
  Cents available = 0;
  for (std::size_t t = 0; t < T; ++t) {
    available += budget[t];
    std::vector<lp::Term> row;
    for (std::size_t i = 0; i < nf; ++i)
      for (std::size_t l = 0; l < A.x[i].size(); ++l) {
        const double c = cents_to_money(inst.facilities[i].locations[l].cost);
        if (c == 0.0) continue;
        for (std::size_t tau = 0; tau <= t; ++tau) row.push_back({A.x[i][l][tau], c});
      }
    lp.add_constraint(row, lp::Relation::LessEqual, cents_to_money(available), "budget_" + std::to_string(t));
  }
  auto placements = [&](std::size_t i) {
    std::vector<lp::Term> row;
    for (const auto& per_l : A.x[i])
      for (auto v : per_l) row.push_back({v, 1.0});
    return row;
  };
  for (std::size_t i = 0; i < nf; ++i)
    lp.add_constraint(placements(i), lp::Relation::LessEqual, 1.0, "activate_" + inst.facilities[i].id);
  for (const auto& e : detail::all_exclusions(inst, sc)) {
    std::vector<lp::Term> row;
    for (auto v : A.x[e.first.facility][e.first.location]) row.push_back({v, 1.0});
    for (auto v : A.x[e.second.facility][e.second.location]) row.push_back({v, 1.0});
    lp.add_constraint(row, lp::Relation::LessEqual, 1.0,
                      "exclude_" + inst.anchor_name(e.first) + "_" + inst.anchor_name(e.second));
  }
  for (const auto& p : detail::all_precedences(inst, sc)) {
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<lp::Term> row;
      for (const auto& per_l : A.x[p.later]) row.push_back({per_l[t], 1.0});
      for (const auto& per_l : A.x[p.earlier])
        for (std::size_t tau = 0; tau < t; ++tau) row.push_back({per_l[tau], -1.0});
      lp.add_constraint(row, lp::Relation::LessEqual, 0.0,
                        "precede_" + inst.facilities[p.earlier].id + "_" + inst.facilities[p.later].id + "_" +
                            std::to_string(t));
    }
  }
  for (auto f : sc.extra.required)
    lp.add_constraint(placements(f), lp::Relation::Equal, 1.0, "require_" + inst.facilities[f].id);
  for (std::size_t g = 0; g < sc.extra.at_least_one_of.size(); ++g) {
    std::vector<lp::Term> row;
    for (auto f : sc.extra.at_least_one_of[g]) {
      auto p = placements(f);
      row.insert(row.end(), p.begin(), p.end());
    }
    lp.add_constraint(row, lp::Relation::GreaterEqual, 1.0, "at_least_one_" + std::to_string(g + 1));
  }
  if (sc.extra.min_two_per_building != MinTwoRule::None) {
    for (const auto& [b, members] : building_members(inst)) {
      auto placed = [&](const Anchor& a, double coef, std::vector<lp::Term>& row) {
        for (auto v : A.x[a.facility][a.location]) row.push_back({v, coef});
      };
      if (sc.extra.min_two_per_building == MinTwoRule::All) {
        std::vector<lp::Term> row;
        for (const auto& a : members) placed(a, 1.0, row);
        lp.add_constraint(row, lp::Relation::GreaterEqual, 2.0, "two_in_" + b);
        continue;
      }
      // a placement in b needs a different facility placed in b as well
      for (const auto& a : members) {
        std::vector<lp::Term> row;
        placed(a, 1.0, row);
        for (const auto& o : members)
          if (o.facility != a.facility) placed(o, -1.0, row);
        lp.add_constraint(row, lp::Relation::LessEqual, 0.0, "two_in_" + b + "_" + inst.anchor_name(a));
      }
    }
  }

  // ---- criterion expressions g~_j = (sum coef * var + shift) / scale
  struct Expr {
    std::vector<lp::Term> terms;
    double constant = 0.0;
  };
  std::vector<Expr> g(m);
  A.lower.assign(m, 0.0);
  A.upper.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double lo = obj.normalization ? obj.normalization->lower[j] : 0.0;
    const double sc_j = obj.normalization ? obj.normalization->scale(j) : 1.0;
    double ub = 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
      double best = 0.0;
      for (std::size_t l = 0; l < A.x[i].size(); ++l) {
        const double y = inst.facilities[i].locations[l].evaluations[j];
        best = std::max(best, y * horizon);
        for (std::size_t t = 0; t < T; ++t)
          if (y * tail[t] != 0.0) g[j].terms.push_back({A.x[i][l][t], y * tail[t] / sc_j});
      }
      ub += best;
    }
    if (sc.synergy)
      for (std::size_t r = 0; r < inst.synergies.size(); ++r) {
        const auto& s = inst.synergies[r];
        const double bonus = s.boost * (inst.evaluation(s.first, j) + inst.evaluation(s.second, j));
        ub += bonus * horizon;
        for (std::size_t t = 1; t < T; ++t)
          if (bonus * inst.discount[t] != 0.0) g[j].terms.push_back({A.gamma[r][t], bonus * inst.discount[t] / sc_j});
      }
    g[j].constant = -lo / sc_j;
    A.lower[j] = -lo / sc_j;
    A.upper[j] = (ub - lo) / sc_j;
  }

  // ---- objective
  double constant = 0.0;
  auto add_expr = [&](const Expr& e, double w) {
    for (const auto& t : e.terms) lp.add_objective(t.var, w * t.coef);
    constant += w * e.constant;
  };
  if (obj.kind == ObjectiveSpec::Kind::WeightedSum) {
    for (std::size_t j = 0; j < m; ++j) add_expr(g[j], obj.weights[j]);
  } else {
    const auto& cap = obj.capacity;
    for (std::size_t j = 0; j < m; ++j)
      if (cap.singleton(j) != 0.0) add_expr(g[j], cap.singleton(j));
    for (std::size_t p = 0; p < cap.pair_count(); ++p) {
      const double w = cap.pairs()[p];
      if (w == 0.0) continue;
      auto [j, k] = Capacity2Additive::pair_of(m, p);
      const std::string tag = inst.criteria[j].id + "_" + inst.criteria[k].id;
      Assembly::MinTerm mt{j, k, lp.add_variable("min_" + tag, std::min(A.lower[j], A.lower[k]), lp::kInf), {}, 0.0};
      // m - g~ <= 0 for both criteria
      for (std::size_t c : {j, k}) {
        std::vector<lp::Term> row{{mt.var, 1.0}};
        for (const auto& t : g[c].terms) row.push_back({t.var, -t.coef});
        lp.add_constraint(row, lp::Relation::LessEqual, g[c].constant, "min_le_" + inst.criteria[c].id + "_" + tag);
      }
      if (w < 0.0) {
        // selector b = 0 pins m to g~_j, b = 1 pins m to g~_k
        mt.selector = lp.add_binary("sel_" + tag);
        mt.big_m = std::max(A.upper[j] - A.lower[k], A.upper[k] - A.lower[j]);
        std::vector<lp::Term> rj{{mt.var, 1.0}, {*mt.selector, mt.big_m}};
        for (const auto& t : g[j].terms) rj.push_back({t.var, -t.coef});
        lp.add_constraint(rj, lp::Relation::GreaterEqual, g[j].constant, "min_ge_" + inst.criteria[j].id + "_" + tag);
        std::vector<lp::Term> rk{{mt.var, 1.0}, {*mt.selector, -mt.big_m}};
        for (const auto& t : g[k].terms) rk.push_back({t.var, -t.coef});
        lp.add_constraint(rk, lp::Relation::GreaterEqual, g[k].constant - mt.big_m,
                          "min_ge_" + inst.criteria[k].id + "_" + tag);
      }
      lp.set_objective(mt.var, w);
      A.min_terms.push_back(mt);
    }
    if (bonus_weight > 0.0) {
      A.syn = lp.add_variable("syn", 0.0, 1.0);
      std::vector<lp::Term> row{{*A.syn, 1.0}};
      for (const auto& gr : A.gamma) row.push_back({gr.back(), -1.0});
      lp.add_constraint(row, lp::Relation::LessEqual, 0.0, "syn_realized");
      lp.set_objective(*A.syn, bonus_weight);
    }
  }
  lp.set_objective_constant(constant);
  return A;
}

/// All violated rows of the model for `plan` under `sc`; empty iff feasible.
inline std::vector<Violation> check_feasible(const PlanningInstance& inst, const Scenario& sc, const Plan& plan) {
  std::vector<Violation> out;
  const std::size_t nf = inst.facilities.size();
  for (const auto& a : plan.assignments)
    if (a.facility >= nf || a.location >= inst.facilities[a.facility].locations.size() || a.period >= inst.periods)
      out.push_back({"structure",
                     {"facility " + std::to_string(a.facility) + ", location " + std::to_string(a.location) +
                      ", period " + std::to_string(a.period)},
                     -1.0});
  if (!out.empty()) return out;
  auto name = [&](const Assignment& a) {
    return inst.anchor_name({a.facility, a.location}) + "@t" + std::to_string(a.period);
  };

  std::vector<std::vector<const Assignment*>> by_facility(nf);
  for (const auto& a : plan.assignments) by_facility[a.facility].push_back(&a);
  for (std::size_t i = 0; i < nf; ++i)
    if (by_facility[i].size() > 1) {
      std::vector<std::string> ents;
      for (auto* a : by_facility[i]) ents.push_back(name(*a));
      out.push_back({"activation", ents, 1.0 - static_cast<double>(by_facility[i].size())});
    }

  if (sc.budget < inst.budgets.size()) {
    const auto& budget = inst.budgets[sc.budget].per_period;
    Cents spent = 0, available = 0;
    for (std::size_t t = 0; t < inst.periods; ++t) {
      available += budget[t];
      for (const auto& a : plan.assignments)
        if (a.period == t) spent += inst.facilities[a.facility].locations[a.location].cost;
      if (spent > available)
        out.push_back({"budget", {inst.budgets[sc.budget].name + "@t" + std::to_string(t)},
                       cents_to_money(available - spent)});
    }
  } else {
    out.push_back({"budget", {"unknown budget schedule"}, -1.0});
  }

  auto placed = [&](const Anchor& x) {
    const auto* a = plan.find(x.facility);
    return a && a->location == x.location;
  };
  for (const auto& e : detail::all_exclusions(inst, sc))
    if (placed(e.first) && placed(e.second))
      out.push_back({"exclusion", {inst.anchor_name(e.first), inst.anchor_name(e.second)}, -1.0});

  for (const auto& p : detail::all_precedences(inst, sc)) {
    if (p.earlier >= nf || p.later >= nf) continue;
    const auto* late = plan.find(p.later);
    if (!late) continue;
    const auto* early = plan.find(p.earlier);
    if (!early || early->period >= late->period)
      out.push_back({"precedence", {inst.facilities[p.earlier].id, inst.facilities[p.later].id}, -1.0});
  }
  for (auto f : sc.extra.required)
    if (f < nf && !plan.find(f)) out.push_back({"required", {inst.facilities[f].id}, -1.0});
  for (const auto& g : sc.extra.at_least_one_of) {
    if (std::any_of(g.begin(), g.end(), [&](std::size_t f) { return f < nf && plan.find(f); })) continue;
    std::vector<std::string> ents;
    for (auto f : g)
      if (f < nf) ents.push_back(inst.facilities[f].id);
    out.push_back({"at-least-one", ents, -1.0});
  }
  if (sc.extra.min_two_per_building != MinTwoRule::None) {
    for (const auto& [b, members] : building_members(inst)) {
      std::set<std::size_t> present;
      for (const auto& a : members)
        if (placed(a)) present.insert(a.facility);
      const bool bad = sc.extra.min_two_per_building == MinTwoRule::All ? present.size() < 2 : present.size() == 1;
      if (bad) {
        std::vector<std::string> ents{b};
        for (auto f : present) ents.push_back(inst.facilities[f].id);
        out.push_back({"min-two-per-building", ents, static_cast<double>(present.size()) - 2.0});
      }
    }
  }
  return out;
}

/// Per-period weighted contribution increments (index t = 0..p, entry 0 is
/// always 0); the entries sum to sum_j w_j g_j.
inline std::vector<double> period_breakdown(const PlanningInstance& inst, const Plan& plan,
                                            const std::vector<double>& weights = {}, bool synergies_enabled = true) {
  const auto rows = contribution_by_period(inst, plan, synergies_enabled);
  std::vector<double> out(rows.size(), 0.0);
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t j = 0; j < rows[t].size(); ++j) out[t] += (weights.empty() ? 1.0 : weights.at(j)) * rows[t][j];
  return out;
}

struct OptimizeResult {
  lp::Status status = lp::Status::Infeasible;
  Plan plan;
  double objective = 0.0;       // model-core evaluation of the decoded plan
  double milp_objective = 0.0;  // value reported by the solver
  ContributionVector contributions;
  lp::SolveReport report;
};

inline double evaluate_plan(const PlanningInstance& inst, const Scenario& sc, const Plan& plan) {
  return sc.objective.evaluate(contribution(inst, plan, sc.synergy));
}

inline Plan decode(const Assembly& A, const std::vector<double>& x) {
  Plan plan;
  for (std::size_t i = 0; i < A.x.size(); ++i)
    for (std::size_t l = 0; l < A.x[i].size(); ++l)
      for (std::size_t t = 0; t < A.x[i][l].size(); ++t)
        if (x[A.x[i][l][t]] > 0.5) plan.assignments.push_back({i, l, t});
  return plan;
}

inline OptimizeResult optimize(const PlanningInstance& inst, const Scenario& sc, const lp::SolverOptions& opt = {}) {
  const auto A = assemble(inst, sc);
  OptimizeResult res;
  res.report = lp::solve_milp(A.lp, opt);
  res.status = res.report.status;
  if (res.status != lp::Status::Optimal) return res;
  res.plan = decode(A, res.report.values);
  res.plan.provenance = sc.name;
  const auto v = check_feasible(inst, sc, res.plan);
  if (!v.empty()) throw std::logic_error("decoded plan violates " + v.front().family + " constraints");
  res.contributions = contribution(inst, res.plan, sc.synergy);
  res.objective = sc.objective.evaluate(res.contributions);
  res.milp_objective = res.report.objective;
  return res;
}

}  // namespace dorplan
