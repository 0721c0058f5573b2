#pragma once

// Self-contained LP / 0-1 MILP engine.
//
// solve_lp        dense two-phase tableau simplex in double precision
// solve_lp_exact  the same algorithm over GMP rationals (no tolerances)
// solve_milp      best-bound branch-and-bound over binary variables
//
// Pricing is Dantzig's rule; after a streak of degenerate pivots the phase
// switches to Bland's rule for the rest of the phase, which guarantees
// termination.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace dorplan::lp {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Sense { Minimize, Maximize };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  bool binary = false;
};

struct Term {
  std::size_t var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::vector<Term> terms;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
  std::string name;
};

class LinearProgram {
 public:
  std::size_t add_variable(std::string name, double lower = 0.0, double upper = kInf) {
    vars_.push_back({std::move(name), lower, upper, false});
    objective_.push_back(0.0);
    return vars_.size() - 1;
  }
  std::size_t add_binary(std::string name) {
    vars_.push_back({std::move(name), 0.0, 1.0, true});
    objective_.push_back(0.0);
    return vars_.size() - 1;
  }
  void add_constraint(std::vector<Term> terms, Relation rel, double rhs, std::string name = {}) {
    rows_.push_back({std::move(terms), rel, rhs, std::move(name)});
  }
  void set_sense(Sense s) { sense_ = s; }
  void set_objective(std::size_t var, double coef) { objective_.at(var) = coef; }
  void add_objective(std::size_t var, double coef) { objective_.at(var) += coef; }
  void set_objective_constant(double c) { constant_ = c; }

  Sense sense() const { return sense_; }
  const std::vector<Variable>& variables() const { return vars_; }
  std::vector<Variable>& variables() { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const std::vector<double>& objective() const { return objective_; }
  double objective_constant() const { return constant_; }
  std::size_t variable_count() const { return vars_.size(); }
  bool has_binaries() const {
    return std::any_of(vars_.begin(), vars_.end(), [](const Variable& v) { return v.binary; });
  }

  double evaluate(const std::vector<double>& x) const {
    double z = constant_;
    for (std::size_t j = 0; j < vars_.size(); ++j) z += objective_[j] * x[j];
    return z;
  }

  /// Largest violation of any row or bound, scaled by max(1, |rhs|, max|a|).
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (const auto& r : rows_) {
      double lhs = 0.0;
      double scale = std::max(1.0, std::abs(r.rhs));
      for (const auto& t : r.terms) {
        lhs += t.coef * x[t.var];
        scale = std::max(scale, std::abs(t.coef));
      }
      double v = 0.0;
      if (r.relation != Relation::GreaterEqual) v = std::max(v, lhs - r.rhs);
      if (r.relation != Relation::LessEqual) v = std::max(v, r.rhs - lhs);
      worst = std::max(worst, v / scale);
    }
    for (std::size_t j = 0; j < vars_.size(); ++j) {
      worst = std::max(worst, vars_[j].lower - x[j]);
      worst = std::max(worst, x[j] - vars_[j].upper);
    }
    return worst;
  }

  /// Throws std::invalid_argument on inconsistent bounds or non-finite data.
  void validate() const {
    for (const auto& v : vars_) {
      if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper)
        throw std::invalid_argument("variable " + v.name + ": inconsistent bounds");
      if (v.binary && (v.lower < 0.0 || v.upper > 1.0))
        throw std::invalid_argument("binary variable " + v.name + " must be bounded in [0,1]");
    }
    for (double c : objective_)
      if (!std::isfinite(c)) throw std::invalid_argument("non-finite objective coefficient");
    for (const auto& r : rows_) {
      if (!std::isfinite(r.rhs)) throw std::invalid_argument("non-finite right-hand side");
      for (const auto& t : r.terms) {
        if (t.var >= vars_.size()) throw std::invalid_argument("constraint references unknown variable");
        if (!std::isfinite(t.coef)) throw std::invalid_argument("non-finite constraint coefficient");
      }
    }
  }

 private:
  std::vector<Variable> vars_;
  std::vector<double> objective_;
  std::vector<Constraint> rows_;
  Sense sense_ = Sense::Minimize;
  double constant_ = 0.0;
};

/// Copy of `lp` whose column j is the original column order[j].
inline LinearProgram permute_variables(const LinearProgram& lp, const std::vector<std::size_t>& order) {
  if (order.size() != lp.variable_count()) throw std::invalid_argument("permutation size mismatch");
  std::vector<std::size_t> where(order.size(), order.size());
  for (std::size_t j = 0; j < order.size(); ++j) {
    if (order[j] >= order.size() || where[order[j]] != order.size())
      throw std::invalid_argument("not a permutation");
    where[order[j]] = j;
  }
  LinearProgram out;
  for (std::size_t j = 0; j < order.size(); ++j) {
    const auto& v = lp.variables()[order[j]];
    const auto idx = v.binary ? out.add_binary(v.name) : out.add_variable(v.name, v.lower, v.upper);
    out.set_objective(idx, lp.objective()[order[j]]);
  }
  for (const auto& r : lp.constraints()) {
    auto terms = r.terms;
    for (auto& t : terms) t.var = where[t.var];
    out.add_constraint(std::move(terms), r.relation, r.rhs, r.name);
  }
  out.set_sense(lp.sense());
  out.set_objective_constant(lp.objective_constant());
  return out;
}

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit, NodeLimit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration-limit";
    case Status::NodeLimit: return "node-limit";
  }
  return "unknown";
}

struct SolveReport {
  Status status = Status::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  std::size_t iterations = 0;
  std::size_t nodes = 0;
  double gap = 0.0;
  std::vector<double> incumbent_trace;  // MILP: objective after each improvement
};

struct SolverOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-9;
  double integrality_tol = 1e-6;
  double pivot_tol = 1e-10;
  std::size_t iteration_limit = 50000;
  std::size_t node_limit = 1000000;
  std::size_t degenerate_streak = 30;
};

namespace detail {

template <class T>
struct Arith;

template <>
struct Arith<double> {
  static double from(double x) { return x; }
  static double to_double(double x) { return x; }
  static double abs(double x) { return std::abs(x); }
  static constexpr bool exact = false;
};

template <>
struct Arith<mpq_class> {
  static mpq_class from(double x) { return mpq_class(x); }
  static double to_double(const mpq_class& x) { return x.get_d(); }
  static mpq_class abs(const mpq_class& x) { return ::abs(x); }
  static constexpr bool exact = true;
};

// Column mapping from an original variable to the nonnegative working
// columns: x = offset + sign * col  (or x = col_plus - col_minus when free).
struct ColumnMap {
  enum class Kind { Fixed, Shifted, Mirrored, Free } kind = Kind::Fixed;
  double offset = 0.0;
  std::size_t col = 0;
  std::size_t col_minus = 0;
};

template <class T>
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_((rows + 1) * (cols + 1)) {}

  T& at(std::size_t i, std::size_t j) { return a_[i * (n_ + 1) + j]; }
  const T& at(std::size_t i, std::size_t j) const { return a_[i * (n_ + 1) + j]; }
  T& rhs(std::size_t i) { return at(i, n_); }
  T& cost(std::size_t j) { return at(m_, j); }  // reduced-cost row lives at index m_
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  void pivot(std::size_t r, std::size_t c) {
    const T p = at(r, c);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= p;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const T f = at(i, c);
      if (f == 0) continue;
      T* dst = &a_[i * (n_ + 1)];
      const T* src = &a_[r * (n_ + 1)];
      for (std::size_t j = 0; j <= n_; ++j)
        if (src[j] != 0) dst[j] -= f * src[j];
      at(i, c) = 0;
    }
    at(r, c) = 1;
  }

  void drop_row(std::size_t r) {
    // move last constraint row into r, then shrink (objective row stays last)
    const std::size_t w = n_ + 1;
    if (r != m_ - 1)
      std::copy(a_.begin() + (m_ - 1) * w, a_.begin() + m_ * w, a_.begin() + r * w);
    std::copy(a_.begin() + m_ * w, a_.begin() + (m_ + 1) * w, a_.begin() + (m_ - 1) * w);
    --m_;
    a_.resize((m_ + 1) * w);
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<T> a_;
};

template <class T>
class SimplexSolver {
  using A = Arith<T>;

 public:
  SimplexSolver(const LinearProgram& lp, const SolverOptions& opt) : lp_(lp), opt_(opt) {}

  SolveReport run() {
    SolveReport rep;
    lp_.validate();
    const auto& vars = lp_.variables();
    const std::size_t nv = vars.size();

    // ---- map original variables onto nonnegative columns
    maps_.resize(nv);
    std::size_t ncols = 0;
    struct BoundRow {
      std::size_t col;
      double ub;
    };
    std::vector<BoundRow> bound_rows;
    for (std::size_t j = 0; j < nv; ++j) {
      const auto& v = vars[j];
      auto& mp = maps_[j];
      if (v.lower == v.upper) {
        mp.kind = ColumnMap::Kind::Fixed;
        mp.offset = v.lower;
      } else if (std::isfinite(v.lower)) {
        mp.kind = ColumnMap::Kind::Shifted;
        mp.offset = v.lower;
        mp.col = ncols++;
        if (std::isfinite(v.upper)) bound_rows.push_back({mp.col, v.upper - v.lower});
      } else if (std::isfinite(v.upper)) {
        mp.kind = ColumnMap::Kind::Mirrored;
        mp.offset = v.upper;
        mp.col = ncols++;
      } else {
        mp.kind = ColumnMap::Kind::Free;
        mp.col = ncols++;
        mp.col_minus = ncols++;
      }
    }
    const std::size_t nstruct = ncols;

    // ---- rows in working columns: sum a x (rel) b
    struct Row {
      std::vector<std::pair<std::size_t, T>> terms;
      Relation rel;
      T rhs;
    };
    std::vector<Row> rows;
    rows.reserve(lp_.constraints().size() + bound_rows.size());
    for (const auto& c : lp_.constraints()) {
      Row r{{}, c.relation, A::from(c.rhs)};
      std::vector<T> dense_coef;
      for (const auto& t : c.terms) {
        if (t.coef == 0.0) continue;
        const auto& mp = maps_[t.var];
        const T a = A::from(t.coef);
        switch (mp.kind) {
          case ColumnMap::Kind::Fixed: r.rhs -= a * A::from(mp.offset); break;
          case ColumnMap::Kind::Shifted:
            r.rhs -= a * A::from(mp.offset);
            r.terms.emplace_back(mp.col, a);
            break;
          case ColumnMap::Kind::Mirrored:
            r.rhs -= a * A::from(mp.offset);
            r.terms.emplace_back(mp.col, -a);
            break;
          case ColumnMap::Kind::Free:
            r.terms.emplace_back(mp.col, a);
            r.terms.emplace_back(mp.col_minus, -a);
            break;
        }
      }
      // merge duplicate columns
      std::sort(r.terms.begin(), r.terms.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      std::vector<std::pair<std::size_t, T>> merged;
      for (auto& t : r.terms) {
        if (!merged.empty() && merged.back().first == t.first)
          merged.back().second += t.second;
        else
          merged.push_back(t);
      }
      merged.erase(std::remove_if(merged.begin(), merged.end(), [](const auto& t) { return t.second == 0; }),
                   merged.end());
      r.terms = std::move(merged);
      if (r.terms.empty()) {
        // empty row: feasible iff 0 (rel) rhs
        const T tol = A::from(opt_.feasibility_tol);
        const bool exact = A::exact;
        bool ok = true;
        if (r.rel == Relation::LessEqual) ok = exact ? (r.rhs >= 0) : (r.rhs >= -tol);
        if (r.rel == Relation::GreaterEqual) ok = exact ? (r.rhs <= 0) : (r.rhs <= tol);
        if (r.rel == Relation::Equal) ok = exact ? (r.rhs == 0) : (A::abs(r.rhs) <= tol);
        if (!ok) {
          rep.status = Status::Infeasible;
          return rep;
        }
        continue;
      }
      rows.push_back(std::move(r));
    }
    // every working column is >= 0, so a <= row with nonnegative coefficients
    // already bounds each of its columns; such bound rows are not materialized
    std::vector<T> implied(nstruct, T(-1));
    for (const auto& r : rows) {
      if (r.rel != Relation::LessEqual || r.rhs < 0) continue;
      if (std::any_of(r.terms.begin(), r.terms.end(), [](const auto& t) { return t.second < 0; })) continue;
      for (const auto& [c, a] : r.terms) {
        const T cap = r.rhs / a;
        if (implied[c] < 0 || cap < implied[c]) implied[c] = cap;
      }
    }
    for (const auto& b : bound_rows) {
      const T ub = A::from(b.ub);
      if (!(implied[b.col] >= 0 && implied[b.col] <= ub))
        rows.push_back({{{b.col, T(1)}}, Relation::LessEqual, ub});
    }

    // ---- standard form: rhs >= 0, slack/surplus, artificials
    const std::size_t m = rows.size();
    for (auto& r : rows) {
      if (r.rhs < 0) {
        r.rhs = -r.rhs;
        for (auto& t : r.terms) t.second = -t.second;
        if (r.rel == Relation::LessEqual)
          r.rel = Relation::GreaterEqual;
        else if (r.rel == Relation::GreaterEqual)
          r.rel = Relation::LessEqual;
      }
      if constexpr (!A::exact) {
        // equilibrate: largest coefficient magnitude becomes 1
        double mx = 0.0;
        for (auto& t : r.terms) mx = std::max(mx, std::abs(t.second));
        if (mx > 0.0 && mx != 1.0) {
          for (auto& t : r.terms) t.second /= mx;
          r.rhs /= mx;
        }
      }
    }
    std::size_t nslack = 0, nart = 0;
    for (const auto& r : rows) {
      if (r.rel != Relation::Equal) ++nslack;
      if (r.rel != Relation::LessEqual) ++nart;
    }
    art_begin_ = nstruct + nslack;
    const std::size_t ntot = art_begin_ + nart;
    Tableau<T> tab(m, ntot);
    basis_.assign(m, 0);
    std::size_t s = nstruct, a = art_begin_;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& r = rows[i];
      for (const auto& t : r.terms) tab.at(i, t.first) = t.second;
      tab.rhs(i) = r.rhs;
      if (r.rel == Relation::LessEqual) {
        tab.at(i, s) = 1;
        basis_[i] = s++;
      } else {
        if (r.rel == Relation::GreaterEqual) tab.at(i, s++) = -1;
        tab.at(i, a) = 1;
        basis_[i] = a++;
      }
    }

    // ---- phase 1
    std::size_t iters = 0;
    allowed_end_ = ntot;
    if (nart > 0) {
      for (std::size_t j = 0; j <= ntot; ++j) tab.cost(j) = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (basis_[i] < art_begin_) continue;
        for (std::size_t j = 0; j <= ntot; ++j) tab.cost(j) -= tab.at(i, j);
      }
      for (std::size_t i = 0; i < m; ++i)
        if (basis_[i] >= art_begin_) tab.cost(basis_[i]) = 0;
      const Status st = iterate(tab, ntot, iters);
      if (st == Status::IterationLimit) {
        rep.status = st;
        rep.iterations = iters;
        return rep;
      }
      // phase-1 objective value is -cost(rhs)
      const T infeas = -tab.cost(ntot);
      const bool infeasible = A::exact ? (infeas > 0) : (A::to_double(infeas) > opt_.feasibility_tol);
      if (infeasible) {
        rep.status = Status::Infeasible;
        rep.iterations = iters;
        return rep;
      }
      // drive remaining artificials out of the basis
      for (std::size_t i = 0; i < tab.rows();) {
        if (basis_[i] < art_begin_) {
          ++i;
          continue;
        }
        std::size_t best = ntot;
        T bestv = 0;
        for (std::size_t j = 0; j < art_begin_; ++j) {
          const T v = A::abs(tab.at(i, j));
          if (v > bestv) {
            bestv = v;
            best = j;
          }
        }
        const bool usable = A::exact ? (bestv > 0) : (A::to_double(bestv) > opt_.pivot_tol);
        if (best < ntot && usable) {
          tab.pivot(i, best);
          basis_[i] = best;
          ++i;
        } else {
          tab.drop_row(i);
          basis_[i] = basis_.back();
          basis_.pop_back();
        }
      }
    }

    // ---- phase 2
    std::vector<T> cost(ntot, T(0));
    const double sgn = lp_.sense() == Sense::Maximize ? -1.0 : 1.0;
    T constant = A::from(lp_.objective_constant()) * A::from(sgn);
    for (std::size_t j = 0; j < nv; ++j) {
      const double c = lp_.objective()[j] * sgn;
      if (c == 0.0) continue;
      const T cj = A::from(c);
      const auto& mp = maps_[j];
      switch (mp.kind) {
        case ColumnMap::Kind::Fixed: constant += cj * A::from(mp.offset); break;
        case ColumnMap::Kind::Shifted:
          constant += cj * A::from(mp.offset);
          cost[mp.col] += cj;
          break;
        case ColumnMap::Kind::Mirrored:
          constant += cj * A::from(mp.offset);
          cost[mp.col] -= cj;
          break;
        case ColumnMap::Kind::Free:
          cost[mp.col] += cj;
          cost[mp.col_minus] -= cj;
          break;
      }
    }
    for (std::size_t j = 0; j <= ntot; ++j) tab.cost(j) = j < ntot ? cost[j] : T(0);
    for (std::size_t i = 0; i < tab.rows(); ++i) {
      const T cb = cost[basis_[i]];
      if (cb == 0) continue;
      for (std::size_t j = 0; j <= ntot; ++j) tab.cost(j) -= cb * tab.at(i, j);
    }
    // artificial columns may not re-enter
    allowed_end_ = art_begin_;
    const Status st = iterate(tab, ntot, iters);
    rep.iterations = iters;
    if (st != Status::Optimal) {
      rep.status = st;
      return rep;
    }

    std::vector<T> colval(ntot, T(0));
    for (std::size_t i = 0; i < tab.rows(); ++i) colval[basis_[i]] = tab.rhs(i);
    rep.values.resize(nv);
    for (std::size_t j = 0; j < nv; ++j) {
      const auto& mp = maps_[j];
      T x{};
      switch (mp.kind) {
        case ColumnMap::Kind::Fixed: x = A::from(mp.offset); break;
        case ColumnMap::Kind::Shifted: x = A::from(mp.offset) + colval[mp.col]; break;
        case ColumnMap::Kind::Mirrored: x = A::from(mp.offset) - colval[mp.col]; break;
        case ColumnMap::Kind::Free: x = colval[mp.col] - colval[mp.col_minus]; break;
      }
      rep.values[j] = A::to_double(x);
    }
    // tableau objective: min value = constant - cost(rhs)
    const T zmin = constant - tab.cost(ntot);
    rep.objective = A::to_double(zmin) * sgn;
    if constexpr (A::exact) {
      exact_objective_ = zmin * A::from(sgn);
    }
    rep.status = Status::Optimal;
    return rep;
  }

  const mpq_class& exact_objective() const { return exact_objective_; }

 private:
  bool negative(const T& x) const {
    if constexpr (A::exact)
      return x < 0;
    else
      return x < -opt_.optimality_tol;
  }

  Status iterate(Tableau<T>& tab, std::size_t ntot, std::size_t& iters) {
    bool bland = false;
    std::size_t streak = 0;
    const std::size_t limit = std::min(allowed_end_, ntot);
    while (true) {
      // entering column
      std::size_t enter = limit;
      T best = 0;
      for (std::size_t j = 0; j < limit; ++j) {
        const T& d = tab.cost(j);
        if (!negative(d)) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (enter == limit || d < best) {
          best = d;
          enter = j;
        }
      }
      if (enter == limit) return Status::Optimal;
      if (iters >= opt_.iteration_limit) return Status::IterationLimit;

      // ratio test
      std::size_t leave = tab.rows();
      T best_ratio = 0;
      T best_piv = 0;
      for (std::size_t i = 0; i < tab.rows(); ++i) {
        const T& aij = tab.at(i, enter);
        bool positive;
        if constexpr (A::exact)
          positive = aij > 0;
        else
          positive = aij > opt_.pivot_tol;
        if (!positive) continue;
        const T ratio = tab.rhs(i) / aij;
        if (leave == tab.rows()) {
          leave = i;
          best_ratio = ratio;
          best_piv = aij;
          continue;
        }
        bool better = false;
        bool tie = false;
        if constexpr (A::exact) {
          better = ratio < best_ratio;
          tie = ratio == best_ratio;
        } else {
          const double tol = 1e-12 * std::max(1.0, std::abs(best_ratio));
          better = ratio < best_ratio - tol;
          tie = !better && ratio <= best_ratio + tol;
        }
        if (better) {
          leave = i;
          best_ratio = ratio;
          best_piv = aij;
        } else if (tie) {
          if (bland) {
            if (basis_[i] < basis_[leave]) {
              leave = i;
              best_ratio = ratio;
              best_piv = aij;
            }
          } else if (aij > best_piv || (aij == best_piv && basis_[i] < basis_[leave])) {
            leave = i;
            best_ratio = ratio;
            best_piv = aij;
          }
        }
      }
      if (leave == tab.rows()) return Status::Unbounded;

      bool degenerate;
      if constexpr (A::exact)
        degenerate = best_ratio == 0;
      else
        degenerate = best_ratio <= opt_.feasibility_tol;
      streak = degenerate ? streak + 1 : 0;
      if (streak >= opt_.degenerate_streak) bland = true;

      tab.pivot(leave, enter);
      basis_[leave] = enter;
      ++iters;
      if constexpr (!A::exact) {
        // clamp tiny negative rhs produced by roundoff
        for (std::size_t i = 0; i < tab.rows(); ++i)
          if (tab.rhs(i) < 0 && tab.rhs(i) > -opt_.feasibility_tol) tab.rhs(i) = 0;
      }
    }
  }

  const LinearProgram& lp_;
  SolverOptions opt_;
  std::vector<ColumnMap> maps_;
  std::vector<std::size_t> basis_;
  std::size_t art_begin_ = 0;
  std::size_t allowed_end_ = 0;
  mpq_class exact_objective_;
};

}  // namespace detail

inline SolveReport solve_lp(const LinearProgram& lp, const SolverOptions& opt = {}) {
  detail::SimplexSolver<double> s(lp, opt);
  return s.run();
}

/// Exact rational solve. Input doubles are converted exactly; reported
/// values are rounded back to double. `exact_objective`, when given,
/// receives the optimum as a rational.
inline SolveReport solve_lp_exact(const LinearProgram& lp, const SolverOptions& opt = {},
                                  mpq_class* exact_objective = nullptr) {
  detail::SimplexSolver<mpq_class> s(lp, opt);
  auto rep = s.run();
  if (exact_objective && rep.status == Status::Optimal) *exact_objective = s.exact_objective();
  return rep;
}

namespace detail {

struct Node {
  double bound = 0.0;
  std::size_t seq = 0;
  std::vector<std::pair<std::size_t, double>> fixes;  // (binary var, value)
  std::vector<double> values;
};

}  // namespace detail

/// Best-bound branch-and-bound over the binary variables of `lp`. Branches on
/// the most fractional binary (ties: lowest index); open nodes are ordered by
/// LP bound, ties first-in first-out.
inline SolveReport solve_milp(const LinearProgram& lp, const SolverOptions& opt = {}) {
  lp.validate();
  const bool maximize = lp.sense() == Sense::Maximize;
  // internal comparisons are on "score" = objective for max, -objective for min
  auto score = [&](double obj) { return maximize ? obj : -obj; };

  std::vector<std::size_t> binaries;
  for (std::size_t j = 0; j < lp.variable_count(); ++j)
    if (lp.variables()[j].binary) binaries.push_back(j);

  LinearProgram work = lp;
  auto solve_with = [&](const std::vector<std::pair<std::size_t, double>>& fixes) {
    auto& vars = work.variables();
    for (std::size_t j : binaries) {
      vars[j].lower = lp.variables()[j].lower;
      vars[j].upper = lp.variables()[j].upper;
    }
    for (const auto& [j, v] : fixes) vars[j].lower = vars[j].upper = v;
    return solve_lp(work, opt);
  };

  SolveReport out;
  auto root = solve_with({});
  out.iterations += root.iterations;
  out.nodes = 1;
  if (root.status != Status::Optimal) {
    out.status = root.status;
    return out;
  }

  auto cmp = [](const detail::Node& a, const detail::Node& b) {
    if (a.bound != b.bound) return a.bound < b.bound;  // larger bound first
    return a.seq > b.seq;                              // then FIFO
  };
  std::priority_queue<detail::Node, std::vector<detail::Node>, decltype(cmp)> open(cmp);
  std::size_t seq = 0;
  open.push({score(root.objective), seq++, {}, std::move(root.values)});

  bool have_incumbent = false;
  double incumbent = -kInf;  // in score units
  std::vector<double> incumbent_x;

  auto prune_threshold = [&]() { return incumbent + 1e-9 * std::max(1.0, std::abs(incumbent)); };

  while (!open.empty()) {
    detail::Node node = open.top();
    open.pop();
    if (have_incumbent && node.bound <= prune_threshold()) continue;

    // most fractional binary
    std::size_t branch = lp.variable_count();
    double best_frac = opt.integrality_tol;
    for (std::size_t j : binaries) {
      const double x = node.values[j];
      const double frac = std::min(x - std::floor(x), std::ceil(x) - x);
      if (frac > best_frac + 1e-12) {
        best_frac = frac;
        branch = j;
      }
    }
    if (branch == lp.variable_count()) {
      // integral within tolerance: snap binaries and recompute continuous part
      std::vector<std::pair<std::size_t, double>> fixes;
      bool snapped = false;
      for (std::size_t j : binaries) {
        const double r = std::round(node.values[j]);
        if (r != node.values[j]) snapped = true;
        fixes.emplace_back(j, r);
      }
      std::vector<double> x = node.values;
      double obj = node.bound;
      if (snapped) {
        auto rep = solve_with(fixes);
        ++out.nodes;
        out.iterations += rep.iterations;
        if (rep.status != Status::Optimal) continue;
        x = rep.values;
        obj = score(rep.objective);
      }
      if (!have_incumbent || obj > prune_threshold()) {
        have_incumbent = true;
        incumbent = obj;
        incumbent_x = std::move(x);
        out.incumbent_trace.push_back(maximize ? incumbent : -incumbent);
      }
      continue;
    }

    for (double v : {0.0, 1.0}) {
      if (out.nodes >= opt.node_limit) break;
      auto fixes = node.fixes;
      fixes.emplace_back(branch, v);
      auto rep = solve_with(fixes);
      ++out.nodes;
      out.iterations += rep.iterations;
      if (rep.status == Status::Unbounded) {
        out.status = Status::Unbounded;
        return out;
      }
      if (rep.status != Status::Optimal) continue;
      const double b = score(rep.objective);
      if (have_incumbent && b <= prune_threshold()) continue;
      open.push({b, seq++, std::move(fixes), std::move(rep.values)});
    }
    if (out.nodes >= opt.node_limit) {
      out.status = Status::NodeLimit;
      double best_open = open.empty() ? incumbent : open.top().bound;
      out.gap = have_incumbent ? std::max(0.0, best_open - incumbent) : kInf;
      if (have_incumbent) {
        out.values = incumbent_x;
        out.objective = maximize ? incumbent : -incumbent;
      }
      return out;
    }
  }

  if (!have_incumbent) {
    out.status = Status::Infeasible;
    return out;
  }
  out.status = Status::Optimal;
  out.values = std::move(incumbent_x);
  out.objective = maximize ? incumbent : -incumbent;
  out.gap = 0.0;
  return out;
}

inline SolveReport solve(const LinearProgram& lp, const SolverOptions& opt = {}) {
  return lp.has_binaries() ? solve_milp(lp, opt) : solve_lp(lp, opt);
}

/// Plain-text LP format (CPLEX-style) for cross-checking with other solvers.
inline void write_lp_format(std::ostream& os, const LinearProgram& lp) {
  auto name = [&](std::size_t j) {
    const auto& n = lp.variables()[j].name;
    return n.empty() ? "x" + std::to_string(j) : n;
  };
  auto term = [&](double c, std::size_t j, bool first) {
    std::string s;
    if (c < 0)
      s = first ? "- " : " - ";
    else if (!first)
      s = " + ";
    os << s << std::abs(c) << " " << name(j);
  };
  os.precision(17);
  os << (lp.sense() == Sense::Maximize ? "Maximize\n" : "Minimize\n") << " obj: ";
  bool first = true;
  for (std::size_t j = 0; j < lp.variable_count(); ++j) {
    if (lp.objective()[j] == 0.0) continue;
    term(lp.objective()[j], j, first);
    first = false;
  }
  if (first) os << "0 " << name(0);
  os << "\nSubject To\n";
  std::size_t k = 0;
  for (const auto& r : lp.constraints()) {
    os << " " << (r.name.empty() ? "c" + std::to_string(k) : r.name) << ": ";
    ++k;
    bool f = true;
    for (const auto& t : r.terms) {
      term(t.coef, t.var, f);
      f = false;
    }
    if (f) os << "0 " << name(0);
    os << (r.relation == Relation::LessEqual ? " <= " : r.relation == Relation::Equal ? " = " : " >= ") << r.rhs
       << "\n";
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < lp.variable_count(); ++j) {
    const auto& v = lp.variables()[j];
    if (v.binary) continue;
    if (!std::isfinite(v.lower) && !std::isfinite(v.upper))
      os << " " << name(j) << " free\n";
    else if (!std::isfinite(v.lower))
      os << " -inf <= " << name(j) << " <= " << v.upper << "\n";
    else if (!std::isfinite(v.upper))
      os << " " << name(j) << " >= " << v.lower << "\n";
    else
      os << " " << v.lower << " <= " << name(j) << " <= " << v.upper << "\n";
  }
  bool any = false;
  for (std::size_t j = 0; j < lp.variable_count(); ++j) {
    if (!lp.variables()[j].binary) continue;
    if (!any) os << "Binary\n";
    any = true;
    os << " " << name(j) << "\n";
  }
  os << "End\n";
}

}  // namespace dorplan::lp
