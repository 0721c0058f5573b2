#pragma once

// Independent reference computations used by the unit and acceptance suites.
// None of these go through the simplex.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dorplan::oracle {

/// min over k >= 0 of sum_i |u_i - k * nu_i|. Convex and piecewise linear in
/// k, so the minimum sits at k = 0 or at some breakpoint u_i / nu_i.
inline double best_scaling_error(const std::vector<double>& u, const std::vector<double>& nu, double* k_out = nullptr) {
  std::vector<double> cand{0.0};
  for (std::size_t i = 0; i < u.size(); ++i)
    if (nu[i] > 0 && u[i] >= 0) cand.push_back(u[i] / nu[i]);
  double best = std::numeric_limits<double>::infinity();
  for (double k : cand) {
    double e = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) e += std::abs(u[i] - k * nu[i]);
    if (e < best) {
      best = e;
      if (k_out) *k_out = k;
    }
  }
  return best;
}

/// Coarse-to-fine grid search for the multiplicative weighted-sum regression
/// with three criteria: minimize over (w1, w2, k), w3 = 1 - w1 - w2.
/// k is eliminated exactly for each weight pair.
inline double ws3_grid_search(const std::vector<std::vector<double>>& g, const std::vector<double>& nu) {
  auto error_at = [&](double w1, double w2) {
    const double w3 = 1.0 - w1 - w2;
    std::vector<double> u;
    for (const auto& x : g) u.push_back(w1 * x[0] + w2 * x[1] + w3 * x[2]);
    return best_scaling_error(u, nu);
  };
  double c1 = 1.0 / 3, c2 = 1.0 / 3, span = 1.0;
  double best = error_at(c1, c2);
  for (int level = 0; level < 30; ++level) {
    const int steps = 40;
    double b1 = c1, b2 = c2;
    for (int a = -steps; a <= steps; ++a)
      for (int b = -steps; b <= steps; ++b) {
        const double w1 = c1 + span * a / steps, w2 = c2 + span * b / steps;
        if (w1 < 0 || w2 < 0 || w1 + w2 > 1) continue;
        const double e = error_at(w1, w2);
        if (e < best) {
          best = e;
          b1 = w1;
          b2 = w2;
        }
      }
    c1 = b1;
    c2 = b2;
    span /= 4;
  }
  // vertices and edges of the simplex are covered by the first level; the
  // objective is convex so refinement around the incumbent converges
  return best;
}

}  // namespace dorplan::oracle

// ---- space-time enumeration oracle

#include <functional>
#include <random>

#include "dorplan/space_time.hpp"

namespace dorplan::oracle {

/// Feasibility re-derived from the model statement, independent of
/// check_feasible and of the LP rows.
inline bool feasible(const PlanningInstance& inst, const Scenario& sc, const Plan& plan) {
  const auto& B = inst.budgets[sc.budget].per_period;
  for (std::size_t t = 0; t < inst.periods; ++t) {
    Cents spend = 0, avail = 0;
    for (std::size_t s = 0; s <= t; ++s) avail += B[s];
    for (const auto& a : plan.assignments)
      if (a.period <= t) spend += inst.facilities[a.facility].locations[a.location].cost;
    if (spend > avail) return false;
  }
  auto at = [&](const Anchor& x) {
    for (const auto& a : plan.assignments)
      if (a.facility == x.facility && a.location == x.location) return true;
    return false;
  };
  auto opened = [&](std::size_t f) -> const Assignment* {
    for (const auto& a : plan.assignments)
      if (a.facility == f) return &a;
    return nullptr;
  };
  auto excl = inst.exclusions;
  excl.insert(excl.end(), sc.extra.forbidden.begin(), sc.extra.forbidden.end());
  for (const auto& e : excl)
    if (at(e.first) && at(e.second)) return false;
  auto prec = inst.precedences;
  prec.insert(prec.end(), sc.extra.precedences.begin(), sc.extra.precedences.end());
  for (const auto& p : prec) {
    const auto* l = opened(p.later);
    if (!l) continue;
    const auto* e = opened(p.earlier);
    if (!e || e->period >= l->period) return false;
  }
  for (auto f : sc.extra.required)
    if (!opened(f)) return false;
  for (const auto& g : sc.extra.at_least_one_of) {
    bool any = false;
    for (auto f : g) any = any || opened(f);
    if (!any) return false;
  }
  if (sc.extra.min_two_per_building != MinTwoRule::None) {
    std::map<std::string, std::set<std::size_t>> used;
    std::set<std::string> all;
    for (const auto& f : inst.facilities)
      for (const auto& l : f.locations) all.insert(l.buildings.begin(), l.buildings.end());
    for (const auto& a : plan.assignments)
      for (const auto& b : inst.facilities[a.facility].locations[a.location].buildings) used[b].insert(a.facility);
    for (const auto& b : all) {
      const auto n = used.count(b) ? used[b].size() : 0;
      if (sc.extra.min_two_per_building == MinTwoRule::All ? n < 2 : n == 1) return false;
    }
  }
  return true;
}

/// Every structurally valid plan: each facility closed or at one (l, t).
inline void for_each_plan(const PlanningInstance& inst, const std::function<void(const Plan&)>& visit) {
  Plan plan;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == inst.facilities.size()) {
      visit(plan);
      return;
    }
    rec(i + 1);
    for (std::size_t l = 0; l < inst.facilities[i].locations.size(); ++l)
      for (std::size_t t = 0; t < inst.periods; ++t) {
        plan.assignments.push_back({i, l, t});
        rec(i + 1);
        plan.assignments.pop_back();
      }
  };
  rec(0);
}

struct Best {
  bool found = false;
  double value = 0.0;
  Plan plan;
};

inline Best enumerate(const PlanningInstance& inst, const Scenario& sc) {
  Best best;
  for_each_plan(inst, [&](const Plan& p) {
    if (!feasible(inst, sc, p)) return;
    const double v = sc.objective.evaluate(contribution(inst, p, sc.synergy));
    if (!best.found || v > best.value) best = {true, v, p};
  });
  return best;
}

/// Small random instance with at most `max_binaries` assignment binaries,
/// exclusions, precedences, a synergy and a capacity with negative pairs.
inline std::pair<PlanningInstance, Scenario> random_case(std::mt19937& rng, std::size_t max_binaries = 20) {
  std::uniform_int_distribution<int> pick(0, 1 << 20);
  auto rnd = [&](int n) { return pick(rng) % n; };
  PlanningInstance inst;
  inst.name = "random";
  std::size_t F, L, T;
  do {
    F = 2 + rnd(4);
    L = 1 + rnd(2);
    T = 2 + rnd(3);
  } while (F * L * T > max_binaries);
  inst.periods = T;
  for (std::size_t t = 0; t < T; ++t) inst.discount.push_back(std::pow(1.1, -static_cast<double>(t)));
  const std::size_t m = 2 + rnd(2);
  for (std::size_t j = 0; j < m; ++j) inst.criteria.push_back({"c" + std::to_string(j), ""});
  const char* bld[] = {"A", "B", "C"};
  for (std::size_t i = 0; i < F; ++i) {
    Facility f{"F" + std::to_string(i), "", {}};
    for (std::size_t l = 0; l < L; ++l) {
      Location loc{"l" + std::to_string(l + 1), "", {}, {bld[rnd(3)]}, static_cast<Cents>(100 * (10 + rnd(60))), {}};
      for (std::size_t j = 0; j < m; ++j) loc.evaluations.push_back(static_cast<double>(rnd(100)));
      f.locations.push_back(loc);
    }
    inst.facilities.push_back(f);
  }
  std::vector<Cents> b(T);
  for (auto& x : b) x = static_cast<Cents>(100 * (20 + rnd(80)));
  inst.budgets.push_back({"B", b});
  if (rnd(2)) inst.exclusions.push_back({{0, static_cast<std::size_t>(rnd(L))}, {1, static_cast<std::size_t>(rnd(L))}});
  if (rnd(2)) inst.precedences.push_back({F - 1, F - 2});
  if (rnd(4) != 0)
    inst.synergies.push_back({{static_cast<std::size_t>(F - 1), 0}, {0, static_cast<std::size_t>(rnd(L))},
                              0.1 * (1 + rnd(3))});

  Scenario sc;
  sc.name = "rand";
  sc.synergy = rnd(3) != 0;
  if (rnd(4) == 0) {
    std::vector<double> w(m);
    double s = 0;
    for (auto& x : w) s += (x = 1 + rnd(10));
    for (auto& x : w) x /= s;
    sc.objective = ObjectiveSpec::weighted("w", w);
  } else {
    const bool bonus = !inst.synergies.empty() && rnd(2);
    Capacity2Additive cap(m, bonus ? 1 : 0);
    for (std::size_t j = 0; j < m; ++j) cap.set_singleton(j, 0.2 + rnd(10) / 10.0);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = j + 1; k < m; ++k) {
        const double lim = std::min(cap.singleton(j), cap.singleton(k)) / static_cast<double>(m);
        cap.set_pair(j, k, rnd(3) == 0 ? 0.0 : (rnd(2) ? -lim * (1 + rnd(9)) / 10 : rnd(10) / 10.0));
      }
    if (bonus) cap.bonus()[0] = rnd(5) / 10.0;
    const double s = cap.total();
    for (auto& w : cap.singletons()) w /= s;
    for (auto& w : cap.pairs()) w /= s;
    for (auto& w : cap.bonus()) w /= s;
    std::optional<Normalization> norm;
    if (rnd(3) == 0) norm = Normalization{std::vector<double>(m, 10.0), std::vector<double>(m, 150.0)};
    sc.objective = ObjectiveSpec::choquet("c", cap, norm);
  }
  if (rnd(5) == 0) sc.extra.at_least_one_of.push_back({0, 1});
  if (rnd(6) == 0) sc.extra.min_two_per_building = MinTwoRule::IfUsed;
  if (rnd(6) == 0 && F > 2) sc.extra.forbidden.push_back({{1, 0}, {2, 0}});
  return {inst, sc};
}

/// Monotone 2-additive capacity on m criteria with some negative pairs,
/// normalized to total mass 1.
inline Capacity2Additive random_capacity(std::mt19937& rng, std::size_t m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Capacity2Additive c(m);
  for (std::size_t j = 0; j < m; ++j) c.set_singleton(j, 0.1 + u(rng));
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = j + 1; k < m; ++k) {
      const double lim = std::min(c.singleton(j), c.singleton(k)) / static_cast<double>(m);
      c.set_pair(j, k, u(rng) < 0.5 ? -lim * u(rng) : u(rng));
    }
  const double s = c.total();
  for (auto& w : c.singletons()) w /= s;
  for (auto& w : c.pairs()) w /= s;
  return c;
}

inline std::size_t assignment_binaries(const PlanningInstance& inst) {
  std::size_t n = 0;
  for (const auto& f : inst.facilities) n += f.locations.size() * inst.periods;
  return n;
}

}  // namespace dorplan::oracle
