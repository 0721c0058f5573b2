#pragma once

// Domain types shared across the toolkit plus the pure evaluation functions:
// discounted per-criterion contributions of a plan and the 2-additive
// Choquet integral (Moebius and sorted forms).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dorplan {

using Cents = std::int64_t;

/// Raised when an input document or domain object violates its invariants.
/// `details` carries one human-readable line per offending field.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& message, std::vector<std::string> details = {})
      : std::runtime_error(message), details_(std::move(details)) {}
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  std::vector<std::string> details_;
};

/// A plan references a facility, location or period that does not exist.
class StructuralError : public InputError {
 public:
  using InputError::InputError;
};

inline double cents_to_money(Cents c) { return static_cast<double>(c) / 100.0; }

struct Location {
  std::string id;
  std::string label;
  std::vector<std::string> rooms;
  std::vector<std::string> buildings;
  Cents cost = 0;
  std::vector<double> evaluations;  // one per criterion
};

struct Facility {
  std::string id;
  std::string label;
  std::vector<Location> locations;
};

struct Criterion {
  std::string id;
  std::string label;
};

/// A (facility, location) pair, both as indices into the instance.
struct Anchor {
  std::size_t facility = 0;
  std::size_t location = 0;
  friend auto operator<=>(const Anchor&, const Anchor&) = default;
};

struct Exclusion {
  Anchor first;
  Anchor second;
};

struct Precedence {
  std::size_t earlier = 0;
  std::size_t later = 0;
};

struct SynergySpec {
  Anchor first;
  Anchor second;
  double boost = 0.0;
};

struct BudgetSchedule {
  std::string name;
  std::vector<Cents> per_period;
};

struct PlanningInstance {
  std::string name;
  std::vector<Facility> facilities;
  std::size_t periods = 0;  // p + 1, periods indexed 0..p
  std::vector<Criterion> criteria;
  std::vector<BudgetSchedule> budgets;
  std::vector<double> discount;  // v(t), one per period
  std::vector<Exclusion> exclusions;
  std::vector<Precedence> precedences;
  std::vector<SynergySpec> synergies;

  std::size_t criteria_count() const { return criteria.size(); }

  double evaluation(const Anchor& a, std::size_t criterion) const {
    return facilities[a.facility].locations[a.location].evaluations[criterion];
  }

  bool has_anchor(const Anchor& a) const {
    return a.facility < facilities.size() && a.location < facilities[a.facility].locations.size();
  }

  std::optional<std::size_t> facility_index(const std::string& id) const {
    for (std::size_t i = 0; i < facilities.size(); ++i)
      if (facilities[i].id == id) return i;
    return std::nullopt;
  }

  std::optional<std::size_t> location_index(std::size_t facility, const std::string& id) const {
    const auto& locs = facilities.at(facility).locations;
    for (std::size_t l = 0; l < locs.size(); ++l)
      if (locs[l].id == id) return l;
    return std::nullopt;
  }

  std::optional<std::size_t> budget_index(const std::string& name) const {
    for (std::size_t b = 0; b < budgets.size(); ++b)
      if (budgets[b].name == name) return b;
    return std::nullopt;
  }

  std::string anchor_name(const Anchor& a) const {
    if (!has_anchor(a)) return "<invalid>";
    return facilities[a.facility].id + "@" + facilities[a.facility].locations[a.location].id;
  }

  /// Throws InputError listing every violated invariant.
  void validate() const {
    std::vector<std::string> d;
    const std::size_t m = criteria.size();
    if (facilities.empty()) d.push_back("facilities: at least one facility required");
    if (m == 0) d.push_back("criteria: at least one criterion required");
    if (periods == 0) d.push_back("periods: must be >= 1");
    for (std::size_t i = 0; i < facilities.size(); ++i) {
      const auto& f = facilities[i];
      if (f.locations.empty()) d.push_back("facilities[" + f.id + "]: no candidate locations");
      for (const auto& l : f.locations) {
        if (l.evaluations.size() != m)
          d.push_back("facilities[" + f.id + "].locations[" + l.id + "]: expected " +
                      std::to_string(m) + " evaluations");
        for (double y : l.evaluations)
          if (!(y >= 0.0) || !std::isfinite(y))
            d.push_back("facilities[" + f.id + "].locations[" + l.id + "]: evaluations must be finite and >= 0");
        if (l.cost < 0) d.push_back("facilities[" + f.id + "].locations[" + l.id + "]: negative cost");
      }
      for (std::size_t k = i + 1; k < facilities.size(); ++k)
        if (facilities[k].id == f.id) d.push_back("facilities: duplicate id " + f.id);
    }
    if (discount.size() != periods) {
      d.push_back("discount: expected " + std::to_string(periods) + " factors");
    } else {
      for (std::size_t t = 0; t < periods; ++t) {
        if (!(discount[t] >= 0.0 && discount[t] <= 1.0))
          d.push_back("discount[" + std::to_string(t) + "]: must lie in [0,1]");
        if (t > 0 && discount[t] > discount[t - 1])
          d.push_back("discount[" + std::to_string(t) + "]: must be non-increasing");
      }
    }
    for (const auto& b : budgets) {
      if (b.per_period.size() != periods)
        d.push_back("budgets[" + b.name + "]: expected " + std::to_string(periods) + " entries");
      for (Cents c : b.per_period)
        if (c < 0) d.push_back("budgets[" + b.name + "]: negative budget");
    }
    for (const auto& e : exclusions)
      if (!has_anchor(e.first) || !has_anchor(e.second))
        d.push_back("exclusions: reference to unknown facility/location");
    for (const auto& p : precedences)
      if (p.earlier >= facilities.size() || p.later >= facilities.size() || p.earlier == p.later)
        d.push_back("precedences: invalid facility pair");
    for (const auto& s : synergies) {
      if (!has_anchor(s.first) || !has_anchor(s.second))
        d.push_back("synergies: reference to unknown facility/location");
      else if (s.first.facility == s.second.facility)
        d.push_back("synergies: anchors must reference distinct facilities");
      if (!(s.boost >= 0.0)) d.push_back("synergies: boost must be >= 0");
    }
    if (!d.empty()) throw InputError("invalid planning instance", std::move(d));
  }
};

struct Assignment {
  std::size_t facility = 0;
  std::size_t location = 0;
  std::size_t period = 0;
  friend auto operator<=>(const Assignment&, const Assignment&) = default;
};

struct Plan {
  std::vector<Assignment> assignments;
  std::string provenance = "manual";

  /// Assignment set in canonical (sorted) order; used for deduplication.
  std::vector<Assignment> canonical() const {
    auto a = assignments;
    std::sort(a.begin(), a.end());
    return a;
  }
  bool same_assignments(const Plan& other) const { return canonical() == other.canonical(); }
  const Assignment* find(std::size_t facility) const {
    for (const auto& a : assignments)
      if (a.facility == facility) return &a;
    return nullptr;
  }
};

inline void check_structure(const PlanningInstance& inst, const Plan& plan) {
  for (const auto& a : plan.assignments) {
    if (a.facility >= inst.facilities.size() ||
        a.location >= inst.facilities[a.facility].locations.size() || a.period >= inst.periods) {
      std::ostringstream os;
      os << "invalid assignment (facility " << a.facility << ", location " << a.location
         << ", period " << a.period << ")";
      throw StructuralError(os.str(), {os.str()});
    }
  }
}

/// g_j per criterion plus binary flags for standalone criteria (the synergy
/// flag `syn` is flags[0] whenever the instance defines synergies).
struct ContributionVector {
  std::vector<double> criteria;
  std::vector<double> flags;
};

/// Per-synergy realization: both anchors placed (at any period).
inline std::vector<bool> realized_synergies(const PlanningInstance& inst, const Plan& plan) {
  std::vector<bool> out;
  out.reserve(inst.synergies.size());
  for (const auto& s : inst.synergies) {
    const auto* a = plan.find(s.first.facility);
    const auto* b = plan.find(s.second.facility);
    out.push_back(a && b && a->location == s.first.location && b->location == s.second.location);
  }
  return out;
}

/// First period at which synergy `s` is realized (both anchors activated at
/// tau <= t), if ever.
inline std::optional<std::size_t> synergy_period(const SynergySpec& s, const Plan& plan) {
  const auto* a = plan.find(s.first.facility);
  const auto* b = plan.find(s.second.facility);
  if (!a || !b || a->location != s.first.location || b->location != s.second.location)
    return std::nullopt;
  return std::max(a->period, b->period);
}

/// Discounted contribution per criterion and period (rows t = 0..p; row 0 is
/// always zero because contributions accrue strictly after activation).
inline std::vector<std::vector<double>> contribution_by_period(const PlanningInstance& inst, const Plan& plan,
                                                               bool synergies_enabled = true) {
  check_structure(inst, plan);
  const std::size_t m = inst.criteria_count();
  std::vector<std::vector<double>> rows(inst.periods, std::vector<double>(m, 0.0));
  for (std::size_t t = 1; t < inst.periods; ++t) {
    const double v = inst.discount[t];
    for (const auto& a : plan.assignments) {
      if (a.period >= t) continue;
      const auto& ev = inst.facilities[a.facility].locations[a.location].evaluations;
      for (std::size_t j = 0; j < m; ++j) rows[t][j] += v * ev[j];
    }
    if (!synergies_enabled) continue;
    for (const auto& s : inst.synergies) {
      auto when = synergy_period(s, plan);
      if (!when || *when > t) continue;
      for (std::size_t j = 0; j < m; ++j)
        rows[t][j] += v * s.boost * (inst.evaluation(s.first, j) + inst.evaluation(s.second, j));
    }
  }
  return rows;
}

inline ContributionVector contribution(const PlanningInstance& inst, const Plan& plan,
                                       bool synergies_enabled = true) {
  const auto rows = contribution_by_period(inst, plan, synergies_enabled);
  ContributionVector g;
  g.criteria.assign(inst.criteria_count(), 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < r.size(); ++j) g.criteria[j] += r[j];
  if (!inst.synergies.empty()) {
    const auto real = realized_synergies(inst, plan);
    g.flags.push_back(std::any_of(real.begin(), real.end(), [](bool b) { return b; }) ? 1.0 : 0.0);
  }
  return g;
}

/// Min-max bounds used to rescale contributions to roughly [0,1] before they
/// enter a fitted value function; the bounds travel with the fitted model.
struct Normalization {
  std::vector<double> lower;
  std::vector<double> upper;

  double scale(std::size_t j) const {
    const double range = upper[j] - lower[j];
    return range > 1e-12 ? range : 1.0;
  }
  double apply(std::size_t j, double g) const { return (g - lower[j]) / scale(j); }
  ContributionVector apply(const ContributionVector& g) const {
    ContributionVector out = g;
    for (std::size_t j = 0; j < out.criteria.size(); ++j) out.criteria[j] = apply(j, g.criteria[j]);
    return out;
  }

  static Normalization min_max(const std::vector<ContributionVector>& items, std::size_t m) {
    Normalization n;
    n.lower.assign(m, std::numeric_limits<double>::infinity());
    n.upper.assign(m, -std::numeric_limits<double>::infinity());
    for (const auto& g : items)
      for (std::size_t j = 0; j < m; ++j) {
        n.lower[j] = std::min(n.lower[j], g.criteria[j]);
        n.upper[j] = std::max(n.upper[j], g.criteria[j]);
      }
    if (items.empty()) {
      n.lower.assign(m, 0.0);
      n.upper.assign(m, 1.0);
    }
    return n;
  }
};

/// 2-additive capacity in Moebius form. Pair weights are stored as the upper
/// triangle in row-major order: (0,1),(0,2),...,(0,m-1),(1,2),...
class Capacity2Additive {
 public:
  Capacity2Additive() = default;
  explicit Capacity2Additive(std::size_t m, std::size_t bonus_count = 0)
      : singletons_(m, 0.0), pairs_(m * (m - (m > 0 ? 1 : 0)) / 2, 0.0), bonus_(bonus_count, 0.0) {}

  static Capacity2Additive additive(std::vector<double> weights) {
    Capacity2Additive c(weights.size());
    c.singletons_ = std::move(weights);
    return c;
  }

  std::size_t criteria() const { return singletons_.size(); }
  std::size_t pair_count() const { return pairs_.size(); }

  static std::size_t pair_index(std::size_t m, std::size_t j, std::size_t k) {
    if (j > k) std::swap(j, k);
    // offset of row j in the packed upper triangle
    return j * (2 * m - j - 1) / 2 + (k - j - 1);
  }
  static std::pair<std::size_t, std::size_t> pair_of(std::size_t m, std::size_t index) {
    for (std::size_t j = 0; j + 1 < m; ++j) {
      const std::size_t row = m - j - 1;
      if (index < row) return {j, j + 1 + index};
      index -= row;
    }
    throw std::out_of_range("pair index");
  }

  double singleton(std::size_t j) const { return singletons_.at(j); }
  double pair(std::size_t j, std::size_t k) const { return pairs_.at(pair_index(criteria(), j, k)); }
  void set_singleton(std::size_t j, double w) { singletons_.at(j) = w; }
  void set_pair(std::size_t j, std::size_t k, double w) {
    if (j == k) throw std::invalid_argument("pair weight needs two distinct criteria");
    pairs_.at(pair_index(criteria(), j, k)) = w;
  }
  const std::vector<double>& singletons() const { return singletons_; }
  const std::vector<double>& pairs() const { return pairs_; }
  const std::vector<double>& bonus() const { return bonus_; }
  std::vector<double>& bonus() { return bonus_; }
  std::vector<double>& pairs() { return pairs_; }
  std::vector<double>& singletons() { return singletons_; }

  double total() const {
    return std::accumulate(singletons_.begin(), singletons_.end(), 0.0) +
           std::accumulate(pairs_.begin(), pairs_.end(), 0.0) +
           std::accumulate(bonus_.begin(), bonus_.end(), 0.0);
  }

  bool is_additive() const {
    return std::all_of(pairs_.begin(), pairs_.end(), [](double w) { return w == 0.0; });
  }

  /// mu(A) for the criteria subset encoded by `mask` (bit j set <=> j in A).
  double measure(std::uint64_t mask) const {
    const std::size_t m = criteria();
    double mu = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (!(mask >> j & 1u)) continue;
      mu += singletons_[j];
      for (std::size_t k = j + 1; k < m; ++k)
        if (mask >> k & 1u) mu += pair(j, k);
    }
    return mu;
  }

  /// Monotonicity by enumerating every subset T of G \ {j}.
  bool is_monotone_exhaustive(double tol = 1e-9) const {
    const std::size_t m = criteria();
    for (std::size_t j = 0; j < m; ++j) {
      if (singletons_[j] < -tol) return false;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        if (mask >> j & 1u) continue;
        double s = singletons_[j];
        for (std::size_t k = 0; k < m; ++k)
          if (mask >> k & 1u) s += pair(j, k);
        if (s < -tol) return false;
      }
    }
    return true;
  }

  /// Same condition checked only on the worst subset: the negative pairs
  /// touching each criterion.
  bool is_monotone(double tol = 1e-9) const {
    const std::size_t m = criteria();
    for (std::size_t j = 0; j < m; ++j) {
      double s = singletons_[j];
      for (std::size_t k = 0; k < m; ++k)
        if (k != j) s += std::min(0.0, pair(j, k));
      if (singletons_[j] < -tol || s < -tol) return false;
    }
    return true;
  }

  /// Throws InputError when normalization, sign or monotonicity fail.
  void validate(double tol = 1e-9) const {
    std::vector<std::string> d;
    if (std::abs(total() - 1.0) > tol)
      d.push_back("capacity: weights must sum to 1 (got " + std::to_string(total()) + ")");
    for (double b : bonus_)
      if (b < -tol) d.push_back("capacity: bonus weights must be >= 0");
    if (!is_monotone(tol)) d.push_back("capacity: monotonicity violated");
    for (double w : singletons_)
      if (!std::isfinite(w)) d.push_back("capacity: non-finite weight");
    for (double w : pairs_)
      if (!std::isfinite(w)) d.push_back("capacity: non-finite weight");
    if (!d.empty()) throw InputError("invalid capacity", std::move(d));
  }

 private:
  std::vector<double> singletons_;
  std::vector<double> pairs_;
  std::vector<double> bonus_;
};

namespace detail {
inline void check_dimensions(const ContributionVector& g, const Capacity2Additive& cap) {
  if (g.criteria.size() != cap.criteria())
    throw std::invalid_argument("contribution vector has " + std::to_string(g.criteria.size()) +
                                " criteria, capacity expects " + std::to_string(cap.criteria()));
  if (!cap.bonus().empty() && g.flags.size() != cap.bonus().size())
    throw std::invalid_argument("capacity bonus weights do not match contribution flags");
}
}  // namespace detail

/// Moebius form: sum_j w_j g_j + sum_{j<k} w_jk min(g_j, g_k) + sum bonus*flag.
inline double choquet_value(const ContributionVector& g, const Capacity2Additive& cap) {
  detail::check_dimensions(g, cap);
  const std::size_t m = cap.criteria();
  double u = 0.0;
  for (std::size_t j = 0; j < m; ++j) u += cap.singleton(j) * g.criteria[j];
  for (std::size_t p = 0; p < cap.pair_count(); ++p) {
    const double w = cap.pairs()[p];
    if (w == 0.0) continue;
    auto [j, k] = Capacity2Additive::pair_of(m, p);
    u += w * std::min(g.criteria[j], g.criteria[k]);
  }
  for (std::size_t b = 0; b < cap.bonus().size(); ++b) u += cap.bonus()[b] * g.flags[b];
  return u;
}

/// Sorted (telescoping) form of the Choquet integral. Only valid for
/// capacities without standalone bonus terms.
inline double choquet_value_sorted(const ContributionVector& g, const Capacity2Additive& cap) {
  detail::check_dimensions(g, cap);
  if (std::any_of(cap.bonus().begin(), cap.bonus().end(), [](double b) { return b != 0.0; }))
    throw std::invalid_argument("sorted Choquet form does not accept bonus terms");
  const std::size_t m = cap.criteria();
  if (m > 63) throw std::invalid_argument("too many criteria for subset encoding");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return g.criteria[a] < g.criteria[b]; });
  // upper set {h : g_h >= g_(i)} shrinks as i advances through the sorted order
  std::uint64_t upper = (m == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << m) - 1);
  double prev = 0.0;
  double u = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double cur = g.criteria[order[i]];
    u += cap.measure(upper) * (cur - prev);
    prev = cur;
    upper &= ~(std::uint64_t{1} << order[i]);
  }
  return u;
}

inline double weighted_sum(const ContributionVector& g, const std::vector<double>& w) {
  if (g.criteria.size() != w.size()) throw std::invalid_argument("weight vector dimension mismatch");
  double u = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) u += w[j] * g.criteria[j];
  return u;
}

}  // namespace dorplan
