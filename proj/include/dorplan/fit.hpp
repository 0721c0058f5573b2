#pragma once

// Ordinal regression of a value function onto deck-of-cards scores.
//
//   min  sum_x sigma+(x) + sigma-(x)
//   s.t. U(x) - sigma+(x) + sigma-(x) = k * nu(x)   [+ k0 in affine mode]
//        family constraints on the parameters of U
//        k >= 0, sigma+/- >= 0
//
// Families: weighted sum, additive piecewise-linear (UTA-style marginals) and
// the 2-additive Choquet integral. The LPs are solved in exact rational
// arithmetic, so the reported optimum does not depend on variable order.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dorplan/deck.hpp"
#include "dorplan/lp.hpp"
#include "dorplan/model.hpp"

namespace dorplan {

enum class ValueFamily { WeightedSum, Piecewise, Choquet };
enum class ScalingMode { Multiplicative, Affine };
enum class ContributionScaling { None, MinMax };

inline const char* to_string(ValueFamily f) {
  switch (f) {
    case ValueFamily::WeightedSum: return "weighted-sum";
    case ValueFamily::Piecewise: return "piecewise-linear";
    case ValueFamily::Choquet: return "choquet-2additive";
  }
  return "?";
}
inline const char* to_string(ScalingMode m) { return m == ScalingMode::Affine ? "affine" : "multiplicative"; }

inline std::optional<ValueFamily> parse_family(const std::string& s) {
  if (s == "ws" || s == "weighted-sum" || s == "weighted_sum") return ValueFamily::WeightedSum;
  if (s == "piecewise" || s == "piecewise-linear" || s == "pwl") return ValueFamily::Piecewise;
  if (s == "choquet" || s == "choquet-2additive") return ValueFamily::Choquet;
  return std::nullopt;
}
inline std::optional<ScalingMode> parse_mode(const std::string& s) {
  if (s == "multiplicative") return ScalingMode::Multiplicative;
  if (s == "affine") return ScalingMode::Affine;
  return std::nullopt;
}

struct FitItem {
  std::string id;
  ContributionVector g;
};

struct FitRequest {
  ValueFamily family = ValueFamily::WeightedSum;
  std::vector<FitItem> items;
  std::vector<double> scores;                     // nu, aligned with items
  std::vector<std::vector<double>> breakpoints;   // piecewise only, per criterion
  double scale_total = 1.0;                       // piecewise normalization U-bar
  ScalingMode mode = ScalingMode::Multiplicative;
  bool use_flags = false;                         // standalone binary criteria (syn)
  ContributionScaling normalization = ContributionScaling::None;

  std::size_t criteria() const { return items.empty() ? 0 : items.front().g.criteria.size(); }
  std::size_t flag_count() const { return use_flags && !items.empty() ? items.front().g.flags.size() : 0; }

  void validate() const {
    std::vector<std::string> d;
    if (items.empty()) d.push_back("items: at least one item required");
    if (scores.size() != items.size()) d.push_back("scores: one score per item required");
    const std::size_t m = criteria();
    if (!items.empty() && m == 0) d.push_back("items: contribution vectors are empty");
    for (const auto& it : items) {
      if (it.g.criteria.size() != m) d.push_back("items[" + it.id + "]: inconsistent criteria count");
      if (use_flags && it.g.flags.size() != items.front().g.flags.size())
        d.push_back("items[" + it.id + "]: inconsistent flag count");
      for (double v : it.g.criteria)
        if (!std::isfinite(v)) d.push_back("items[" + it.id + "]: non-finite contribution");
    }
    for (double s : scores)
      if (!std::isfinite(s) || s < 0) d.push_back("scores: must be finite and >= 0");
    if (family == ValueFamily::Piecewise) {
      if (breakpoints.size() != m) d.push_back("breakpoints: one list per criterion required");
      for (std::size_t j = 0; j < breakpoints.size(); ++j) {
        const auto& b = breakpoints[j];
        if (b.size() < 2) d.push_back("breakpoints[" + std::to_string(j) + "]: need at least two");
        for (std::size_t r = 1; r < b.size(); ++r)
          if (!(b[r] > b[r - 1])) d.push_back("breakpoints[" + std::to_string(j) + "]: must strictly increase");
      }
      if (!(scale_total > 0)) d.push_back("scale_total: must be > 0");
    }
    if (!d.empty()) throw InputError("invalid fit request", std::move(d));
  }
};

/// Assemble a request from contribution vectors and a score table keyed by id.
inline FitRequest make_request(ValueFamily family, std::vector<FitItem> items, const ScoreTable& scores) {
  FitRequest req;
  req.family = family;
  for (const auto& it : items) {
    const auto* e = scores.find(it.id);
    if (!e) throw InputError("invalid fit request", {"scores: no score for item " + it.id});
    req.scores.push_back(static_cast<double>(e->score));
  }
  req.items = std::move(items);
  return req;
}

struct ItemFit {
  std::string id;
  double value = 0.0;   // fitted U
  double score = 0.0;   // nu
  double target = 0.0;  // k * nu (+ k0)
  double sigma_plus = 0.0;
  double sigma_minus = 0.0;
};

struct RegressionResult {
  ValueFamily family = ValueFamily::WeightedSum;
  ScalingMode mode = ScalingMode::Multiplicative;
  std::size_t criteria = 0;
  std::vector<double> weights;                   // weighted sum (criteria then flags)
  std::vector<std::vector<double>> breakpoints;  // piecewise
  std::vector<std::vector<double>> marginals;    // piecewise u_j at breakpoints
  Capacity2Additive capacity;                    // choquet
  std::optional<Normalization> normalization;
  double k = 0.0;
  double k0 = 0.0;
  double total_error = 0.0;
  std::vector<ItemFit> items;

  /// Fitted U for a raw (un-normalized) contribution vector.
  double evaluate(const ContributionVector& raw) const {
    const ContributionVector g = normalization ? normalization->apply(raw) : raw;
    switch (family) {
      case ValueFamily::WeightedSum: {
        double u = 0.0;
        const std::size_t m = g.criteria.size();
        for (std::size_t j = 0; j < m; ++j) u += weights[j] * g.criteria[j];
        for (std::size_t b = m; b < weights.size(); ++b) u += weights[b] * g.flags.at(b - m);
        return u;
      }
      case ValueFamily::Piecewise: {
        double u = 0.0;
        for (std::size_t j = 0; j < g.criteria.size(); ++j) u += marginal(j, g.criteria[j]);
        return u;
      }
      case ValueFamily::Choquet: return choquet_value(g, capacity);
    }
    return 0.0;
  }

  double marginal(std::size_t j, double x) const {
    const auto& b = breakpoints.at(j);
    const auto& u = marginals.at(j);
    if (x < b.front() - 1e-9 || x > b.back() + 1e-9)
      throw std::out_of_range("contribution outside breakpoint range");
    for (std::size_t r = 0; r + 1 < b.size(); ++r)
      if (x <= b[r + 1] || r + 2 == b.size())
        return u[r] + (x - b[r]) / (b[r + 1] - b[r]) * (u[r + 1] - u[r]);
    return u.back();
  }
};

namespace detail {

struct FitLayout {
  lp::LinearProgram lp;
  std::vector<std::size_t> weight;                     // ws: criteria then flags
  std::vector<std::vector<std::size_t>> marginal;      // piecewise: u_{j,r} for r >= 1
  std::vector<std::size_t> singleton;                  // choquet
  std::vector<std::size_t> pair_plus, pair_minus;      // choquet
  std::vector<std::size_t> bonus;                      // choquet flags
  std::size_t k = 0;
  std::optional<std::size_t> k0;
  std::vector<std::size_t> sigma_plus, sigma_minus;
  double score_scale = 1.0;
  std::vector<ContributionVector> g;                   // contributions as seen by the LP
  std::optional<Normalization> normalization;
};

// Coefficients of u_{j,r} (r = 1..R) in the linear interpolation at x.
inline std::vector<double> interpolation_row(const std::vector<double>& b, double x) {
  std::vector<double> coef(b.size(), 0.0);
  if (x < b.front() - 1e-9 || x > b.back() + 1e-9)
    throw InputError("contribution outside breakpoint range",
                     {"value " + std::to_string(x) + " not in [" + std::to_string(b.front()) + ", " +
                      std::to_string(b.back()) + "]"});
  for (std::size_t r = 0; r + 1 < b.size(); ++r) {
    if (x <= b[r + 1] || r + 2 == b.size()) {
      const double t = std::clamp((x - b[r]) / (b[r + 1] - b[r]), 0.0, 1.0);
      coef[r] += 1.0 - t;
      coef[r + 1] += t;
      break;
    }
  }
  return coef;
}

inline FitLayout build_fit_lp(const FitRequest& req) {
  req.validate();
  FitLayout L;
  const std::size_t m = req.criteria();
  const std::size_t nflags = req.flag_count();
  const std::size_t n = req.items.size();

  for (const auto& it : req.items) L.g.push_back(it.g);
  if (req.normalization == ContributionScaling::MinMax) {
    L.normalization = Normalization::min_max(L.g, m);
    for (auto& g : L.g) g = L.normalization->apply(g);
  }
  const double max_score = *std::max_element(req.scores.begin(), req.scores.end());
  L.score_scale = max_score > 0 ? max_score : 1.0;

  // a flag no item raises would let its weight absorb the whole
  // normalization (U = 0, k = 0); such weights are pinned to 0
  std::vector<bool> flag_seen(nflags, false);
  for (const auto& g : L.g)
    for (std::size_t f = 0; f < nflags; ++f) flag_seen[f] = flag_seen[f] || g.flags[f] != 0.0;

  auto& lp = L.lp;
  lp.set_sense(lp::Sense::Minimize);
  std::vector<lp::Term> norm;
  switch (req.family) {
    case ValueFamily::WeightedSum:
      for (std::size_t j = 0; j < m + nflags; ++j) {
        L.weight.push_back(lp.add_variable("w" + std::to_string(j + 1), 0.0,
                                           j < m || flag_seen[j - m] ? lp::kInf : 0.0));
        norm.push_back({L.weight.back(), 1.0});
      }
      lp.add_constraint(norm, lp::Relation::Equal, 1.0, "normalization");
      break;
    case ValueFamily::Piecewise:
      L.marginal.resize(m);
      for (std::size_t j = 0; j < m; ++j) {
        const auto& b = req.breakpoints[j];
        for (std::size_t r = 1; r < b.size(); ++r)
          L.marginal[j].push_back(lp.add_variable("u" + std::to_string(j + 1) + "_" + std::to_string(r)));
        // u_{j,1} >= u_{j,0} = 0 is the variable bound; the rest are rows
        for (std::size_t r = 1; r < L.marginal[j].size(); ++r)
          lp.add_constraint({{L.marginal[j][r], 1.0}, {L.marginal[j][r - 1], -1.0}}, lp::Relation::GreaterEqual,
                            0.0, "monotone_u" + std::to_string(j + 1) + "_" + std::to_string(r + 1));
        norm.push_back({L.marginal[j].back(), 1.0});
      }
      lp.add_constraint(norm, lp::Relation::Equal, req.scale_total, "normalization");
      break;
    case ValueFamily::Choquet: {
      for (std::size_t j = 0; j < m; ++j) {
        L.singleton.push_back(lp.add_variable("w" + std::to_string(j + 1)));
        norm.push_back({L.singleton.back(), 1.0});
      }
      const std::size_t np = m * (m - 1) / 2;
      for (std::size_t p = 0; p < np; ++p) {
        auto [a, b] = Capacity2Additive::pair_of(m, p);
        const std::string tag = std::to_string(a + 1) + std::to_string(b + 1);
        L.pair_plus.push_back(lp.add_variable("wp" + tag));
        L.pair_minus.push_back(lp.add_variable("wn" + tag));
        norm.push_back({L.pair_plus.back(), 1.0});
        norm.push_back({L.pair_minus.back(), -1.0});
      }
      for (std::size_t f = 0; f < nflags; ++f) {
        L.bonus.push_back(lp.add_variable("wb" + std::to_string(f + 1), 0.0, flag_seen[f] ? lp::kInf : 0.0));
        norm.push_back({L.bonus.back(), 1.0});
      }
      lp.add_constraint(norm, lp::Relation::Equal, 1.0, "normalization");
      // w_j + sum_{k} min(0, w_jk) >= 0, with the negative part carried by wn_jk
      for (std::size_t j = 0; j < m; ++j) {
        std::vector<lp::Term> row{{L.singleton[j], 1.0}};
        for (std::size_t k = 0; k < m; ++k)
          if (k != j) row.push_back({L.pair_minus[Capacity2Additive::pair_index(m, j, k)], -1.0});
        lp.add_constraint(row, lp::Relation::GreaterEqual, 0.0, "monotone_" + std::to_string(j + 1));
      }
      break;
    }
  }
  L.k = lp.add_variable("k");
  if (req.mode == ScalingMode::Affine) L.k0 = lp.add_variable("k0", -lp::kInf, lp::kInf);
  for (std::size_t i = 0; i < n; ++i) {
    L.sigma_plus.push_back(lp.add_variable("sp_" + req.items[i].id));
    L.sigma_minus.push_back(lp.add_variable("sn_" + req.items[i].id));
    lp.set_objective(L.sigma_plus.back(), 1.0);
    lp.set_objective(L.sigma_minus.back(), 1.0);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = L.g[i];
    std::vector<lp::Term> row;
    switch (req.family) {
      case ValueFamily::WeightedSum:
        for (std::size_t j = 0; j < m; ++j) row.push_back({L.weight[j], g.criteria[j]});
        for (std::size_t f = 0; f < nflags; ++f) row.push_back({L.weight[m + f], g.flags[f]});
        break;
      case ValueFamily::Piecewise:
        for (std::size_t j = 0; j < m; ++j) {
          const auto coef = interpolation_row(req.breakpoints[j], g.criteria[j]);
          for (std::size_t r = 1; r < coef.size(); ++r)
            if (coef[r] != 0.0) row.push_back({L.marginal[j][r - 1], coef[r]});
        }
        break;
      case ValueFamily::Choquet:
        for (std::size_t j = 0; j < m; ++j) row.push_back({L.singleton[j], g.criteria[j]});
        for (std::size_t p = 0; p < L.pair_plus.size(); ++p) {
          auto [a, b] = Capacity2Additive::pair_of(m, p);
          const double mn = std::min(g.criteria[a], g.criteria[b]);
          row.push_back({L.pair_plus[p], mn});
          row.push_back({L.pair_minus[p], -mn});
        }
        for (std::size_t f = 0; f < nflags; ++f) row.push_back({L.bonus[f], g.flags[f]});
        break;
    }
    row.push_back({L.sigma_plus[i], -1.0});
    row.push_back({L.sigma_minus[i], 1.0});
    row.push_back({L.k, -(req.scores[i] / L.score_scale)});
    if (L.k0) row.push_back({*L.k0, -1.0});
    lp.add_constraint(row, lp::Relation::Equal, 0.0, "fit_" + req.items[i].id);
  }
  return L;
}

}  // namespace detail

/// Solves the regression LP of `req`; `variable_order`, when non-empty, is a
/// permutation applied to the LP columns before solving (used to certify
/// that the optimum does not depend on column order).
inline RegressionResult fit(const FitRequest& req, const std::vector<std::size_t>& variable_order = {}) {
  auto L = detail::build_fit_lp(req);
  lp::SolveReport rep;
  mpq_class exact_total;
  if (variable_order.empty()) {
    rep = lp::solve_lp_exact(L.lp, {}, &exact_total);
  } else {
    auto permuted = lp::permute_variables(L.lp, variable_order);
    rep = lp::solve_lp_exact(permuted, {}, &exact_total);
    if (rep.status == lp::Status::Optimal) {
      std::vector<double> back(rep.values.size());
      for (std::size_t j = 0; j < variable_order.size(); ++j) back[variable_order[j]] = rep.values[j];
      rep.values = std::move(back);
    }
  }
  if (rep.status != lp::Status::Optimal)
    throw std::runtime_error(std::string("regression LP not solved: ") + lp::to_string(rep.status));
  const auto& x = rep.values;
  const std::size_t m = req.criteria();

  RegressionResult res;
  res.family = req.family;
  res.mode = req.mode;
  res.criteria = m;
  res.normalization = L.normalization;
  switch (req.family) {
    case ValueFamily::WeightedSum:
      for (auto v : L.weight) res.weights.push_back(x[v]);
      break;
    case ValueFamily::Piecewise:
      res.breakpoints = req.breakpoints;
      for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> u{0.0};
        for (auto v : L.marginal[j]) u.push_back(x[v]);
        res.marginals.push_back(std::move(u));
      }
      break;
    case ValueFamily::Choquet: {
      Capacity2Additive cap(m, L.bonus.size());
      for (std::size_t j = 0; j < m; ++j) cap.set_singleton(j, x[L.singleton[j]]);
      for (std::size_t p = 0; p < L.pair_plus.size(); ++p)
        cap.pairs()[p] = x[L.pair_plus[p]] - x[L.pair_minus[p]];
      for (std::size_t f = 0; f < L.bonus.size(); ++f) cap.bonus()[f] = x[L.bonus[f]];
      res.capacity = std::move(cap);
      break;
    }
  }
  res.k = x[L.k] / L.score_scale;
  res.k0 = L.k0 ? x[*L.k0] : 0.0;
  res.total_error = exact_total.get_d();
  for (std::size_t i = 0; i < req.items.size(); ++i) {
    ItemFit f;
    f.id = req.items[i].id;
    f.value = res.evaluate(req.items[i].g);
    f.score = req.scores[i];
    f.target = res.k * req.scores[i] + res.k0;
    f.sigma_plus = x[L.sigma_plus[i]];
    f.sigma_minus = x[L.sigma_minus[i]];
    res.items.push_back(f);
  }
  return res;
}

inline RegressionResult fit_piecewise(FitRequest req) {
  req.family = ValueFamily::Piecewise;
  return fit(req);
}

inline RegressionResult fit_choquet(FitRequest req) {
  req.family = ValueFamily::Choquet;
  return fit(req);
}

/// Per-item table: item, U, nu, k*nu, sigma+, sigma-.
inline void write_fit_csv(std::ostream& os, const RegressionResult& r) {
  os << "item,U,nu,k_nu,sigma_plus,sigma_minus\n";
  os.precision(10);
  for (const auto& it : r.items)
    os << it.id << ',' << it.value << ',' << it.score << ',' << it.target << ',' << it.sigma_plus << ','
       << it.sigma_minus << '\n';
}

}  // namespace dorplan
