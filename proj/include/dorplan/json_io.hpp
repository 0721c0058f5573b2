#pragma once

// JSON documents for every exchanged value: instances, plans, rankings,
// score tables, capacities, objectives, scenarios and fit requests/results.
// Parsers collect field-level diagnostics and throw InputError.

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dorplan/deck.hpp"
#include "dorplan/fit.hpp"
#include "dorplan/model.hpp"
#include "dorplan/space_time.hpp"

namespace dorplan::io {

using json = nlohmann::json;

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path, {path + ": file not readable"});
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("malformed JSON in " + path, {e.what()});
  }
}

inline json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("malformed JSON", {e.what()});
  }
}

// ---------------------------------------------------------------- currency

/// Integers are cents; strings are decimal euros with at most two decimals.
/// Thousands separators are rejected.
inline Cents parse_money(const json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<Cents>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) neg = s[i++] == '-';
    Cents whole = 0;
    std::size_t digits = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      whole = whole * 10 + (s[i++] - '0');
      ++digits;
    }
    Cents frac = 0;
    if (i < s.size() && s[i] == '.') {
      ++i;
      std::size_t fd = 0;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])) && fd < 3) {
        frac = frac * 10 + (s[i++] - '0');
        ++fd;
      }
      if (fd == 0 || fd > 2) throw InputError("invalid amount", {where + ": at most two decimals allowed"});
      if (fd == 1) frac *= 10;
    }
    if (digits == 0 || i != s.size())
      throw InputError("invalid amount", {where + ": \"" + s + "\" is not a plain decimal (no thousands separators)"});
    const Cents c = whole * 100 + frac;
    return neg ? -c : c;
  }
  throw InputError("invalid amount", {where + ": expected integer cents or a decimal string"});
}

inline json money_to_json(Cents c) {
  std::ostringstream os;
  if (c < 0) os << '-';
  const Cents a = c < 0 ? -c : c;
  os << a / 100;
  if (a % 100) os << '.' << (a % 100 < 10 ? "0" : "") << a % 100;
  return os.str();
}

// ---------------------------------------------------------------- helpers

namespace detail {

struct Diag {
  std::vector<std::string> lines;
  void add(std::string s) { lines.push_back(std::move(s)); }
  void raise(const std::string& what) const {
    if (!lines.empty()) throw InputError(what, lines);
  }
};

inline const json* field(const json& o, const char* key) {
  if (!o.is_object()) return nullptr;
  auto it = o.find(key);
  return it == o.end() ? nullptr : &*it;
}

inline std::string str_or(const json& o, const char* key, std::string dflt = {}) {
  const auto* f = field(o, key);
  return f && f->is_string() ? f->get<std::string>() : dflt;
}

inline std::vector<double> number_list(const json& v, const std::string& where, Diag& d) {
  std::vector<double> out;
  if (!v.is_array()) {
    d.add(where + ": expected an array of numbers");
    return out;
  }
  for (const auto& x : v) {
    if (!x.is_number()) {
      d.add(where + ": expected numbers");
      return {};
    }
    out.push_back(x.get<double>());
  }
  return out;
}

// "B12" -> "B"; names without a trailing number map to themselves
inline std::string building_of(const std::string& room) {
  std::size_t e = room.size();
  while (e > 0 && std::isdigit(static_cast<unsigned char>(room[e - 1]))) --e;
  return e == 0 ? room : room.substr(0, e);
}

}  // namespace detail

// ---------------------------------------------------------------- instance

inline Anchor parse_anchor(const PlanningInstance& inst, const json& v, const std::string& where,
                           detail::Diag& d) {
  const auto f = detail::str_or(v, "facility"), l = detail::str_or(v, "location");
  const auto fi = inst.facility_index(f);
  if (!fi) {
    d.add(where + ": unknown facility \"" + f + "\"");
    return {};
  }
  const auto li = inst.location_index(*fi, l);
  if (!li) {
    d.add(where + ": unknown location \"" + l + "\" for " + f);
    return {};
  }
  return {*fi, *li};
}

inline std::optional<std::size_t> parse_facility_ref(const PlanningInstance& inst, const json& v,
                                                     const std::string& where, detail::Diag& d) {
  if (!v.is_string()) {
    d.add(where + ": expected a facility id");
    return std::nullopt;
  }
  auto fi = inst.facility_index(v.get<std::string>());
  if (!fi) d.add(where + ": unknown facility \"" + v.get<std::string>() + "\"");
  return fi;
}

inline PlanningInstance instance_from_json(const json& j) {
  detail::Diag d;
  PlanningInstance inst;
  if (!j.is_object()) throw InputError("invalid planning instance", {"document: expected an object"});
  inst.name = detail::str_or(j, "name", "instance");

  if (const auto* p = detail::field(j, "periods"); p && p->is_number_integer() && p->get<long long>() > 0)
    inst.periods = p->get<std::size_t>();
  else
    d.add("periods: required positive integer (number of periods, t = 0..periods-1)");

  if (const auto* c = detail::field(j, "criteria"); c && c->is_array() && !c->empty()) {
    for (const auto& x : *c) {
      if (x.is_string())
        inst.criteria.push_back({x.get<std::string>(), x.get<std::string>()});
      else if (x.is_object() && detail::field(x, "id"))
        inst.criteria.push_back({detail::str_or(x, "id"), detail::str_or(x, "label", detail::str_or(x, "id"))});
      else
        d.add("criteria: entries must be ids or {id, label}");
    }
  } else {
    d.add("criteria: required non-empty array");
  }
  if (const auto* disc = detail::field(j, "discount")) {
    if (const auto* base = detail::field(*disc, "base"); base && base->is_number() && base->get<double>() > 0) {
      for (std::size_t t = 0; t < inst.periods; ++t)
        inst.discount.push_back(std::pow(base->get<double>(), -static_cast<double>(t)));
    } else if (const auto* fac = detail::field(*disc, "factors")) {
      inst.discount = detail::number_list(*fac, "discount.factors", d);
    } else {
      d.add("discount: expected {\"base\": b} or {\"factors\": [...]}");
    }
  } else {
    inst.discount.assign(inst.periods, 1.0);
  }

  if (const auto* b = detail::field(j, "budgets"); b && b->is_object()) {
    for (const auto& [name, v] : b->items()) {
      BudgetSchedule s{name, {}};
      try {
        if (v.is_array()) {
          for (std::size_t t = 0; t < v.size(); ++t)
            s.per_period.push_back(parse_money(v[t], "budgets." + name + "[" + std::to_string(t) + "]"));
        } else {
          s.per_period.assign(inst.periods, parse_money(v, "budgets." + name));
        }
      } catch (const InputError& e) {
        for (const auto& x : e.details()) d.add(x);
      }
      inst.budgets.push_back(std::move(s));
    }
  } else if (detail::field(j, "budgets")) {
    d.add("budgets: expected an object name -> amount or per-period list");
  }

  if (const auto* fs = detail::field(j, "facilities"); fs && fs->is_array()) {
    for (const auto& fj : *fs) {
      Facility f{detail::str_or(fj, "id"), detail::str_or(fj, "label"), {}};
      if (f.id.empty()) d.add("facilities: every facility needs an id");
      if (f.label.empty()) f.label = f.id;
      const auto* locs = detail::field(fj, "locations");
      if (!locs || !locs->is_array()) {
        d.add("facilities[" + f.id + "].locations: required array");
        inst.facilities.push_back(std::move(f));
        continue;
      }
      for (const auto& lj : *locs) {
        Location l;
        l.id = detail::str_or(lj, "id");
        l.label = detail::str_or(lj, "label", l.id);
        const std::string where = "facilities[" + f.id + "].locations[" + l.id + "]";
        if (l.id.empty()) d.add(where + ": id required");
        if (const auto* r = detail::field(lj, "rooms"); r && r->is_array())
          for (const auto& x : *r)
            if (x.is_string()) l.rooms.push_back(x.get<std::string>());
        if (const auto* b = detail::field(lj, "buildings"); b && b->is_array()) {
          for (const auto& x : *b)
            if (x.is_string()) l.buildings.push_back(x.get<std::string>());
        } else {
          for (const auto& r : l.rooms) {
            auto b = detail::building_of(r);
            if (std::find(l.buildings.begin(), l.buildings.end(), b) == l.buildings.end()) l.buildings.push_back(b);
          }
        }
        if (const auto* c = detail::field(lj, "cost")) {
          try {
            l.cost = parse_money(*c, where + ".cost");
          } catch (const InputError& e) {
            for (const auto& x : e.details()) d.add(x);
          }
        } else {
          d.add(where + ".cost: required");
        }
        if (const auto* e = detail::field(lj, "evaluations"))
          l.evaluations = detail::number_list(*e, where + ".evaluations", d);
        else
          d.add(where + ".evaluations: required");
        f.locations.push_back(std::move(l));
      }
      inst.facilities.push_back(std::move(f));
    }
  } else {
    d.add("facilities: required array");
  }
  d.raise("invalid planning instance");

  if (const auto* ex = detail::field(j, "exclusions"); ex && ex->is_array())
    for (std::size_t k = 0; k < ex->size(); ++k) {
      const auto& e = (*ex)[k];
      const std::string w = "exclusions[" + std::to_string(k) + "]";
      inst.exclusions.push_back(
          {parse_anchor(inst, e.value("a", json::object()), w + ".a", d), parse_anchor(inst, e.value("b", json::object()), w + ".b", d)});
    }
  if (const auto* pr = detail::field(j, "precedences"); pr && pr->is_array())
    for (std::size_t k = 0; k < pr->size(); ++k) {
      const auto& p = (*pr)[k];
      const std::string w = "precedences[" + std::to_string(k) + "]";
      auto e = parse_facility_ref(inst, p.value("earlier", json()), w + ".earlier", d);
      auto l = parse_facility_ref(inst, p.value("later", json()), w + ".later", d);
      if (e && l) inst.precedences.push_back({*e, *l});
    }
  if (const auto* sy = detail::field(j, "synergies"); sy && sy->is_array())
    for (std::size_t k = 0; k < sy->size(); ++k) {
      const auto& s = (*sy)[k];
      const std::string w = "synergies[" + std::to_string(k) + "]";
      SynergySpec spec{parse_anchor(inst, s.value("a", json::object()), w + ".a", d),
                       parse_anchor(inst, s.value("b", json::object()), w + ".b", d), 0.0};
      if (const auto* b = detail::field(s, "boost"); b && b->is_number())
        spec.boost = b->get<double>();
      else
        d.add(w + ".boost: required number");
      inst.synergies.push_back(spec);
    }
  d.raise("invalid planning instance");
  inst.validate();
  return inst;
}

inline json anchor_to_json(const PlanningInstance& inst, const Anchor& a) {
  return {{"facility", inst.facilities[a.facility].id}, {"location", inst.facilities[a.facility].locations[a.location].id}};
}

inline json instance_to_json(const PlanningInstance& inst) {
  json j;
  j["name"] = inst.name;
  j["periods"] = inst.periods;
  j["criteria"] = json::array();
  for (const auto& c : inst.criteria) j["criteria"].push_back({{"id", c.id}, {"label", c.label}});
  j["discount"] = {{"factors", inst.discount}};
  j["budgets"] = json::object();
  for (const auto& b : inst.budgets) {
    json arr = json::array();
    for (auto c : b.per_period) arr.push_back(c);
    j["budgets"][b.name] = arr;
  }
  j["facilities"] = json::array();
  for (const auto& f : inst.facilities) {
    json fj{{"id", f.id}, {"label", f.label}, {"locations", json::array()}};
    for (const auto& l : f.locations)
      fj["locations"].push_back({{"id", l.id},
                                 {"label", l.label},
                                 {"rooms", l.rooms},
                                 {"buildings", l.buildings},
                                 {"cost", l.cost},
                                 {"evaluations", l.evaluations}});
    j["facilities"].push_back(fj);
  }
  j["exclusions"] = json::array();
  for (const auto& e : inst.exclusions)
    j["exclusions"].push_back({{"a", anchor_to_json(inst, e.first)}, {"b", anchor_to_json(inst, e.second)}});
  j["precedences"] = json::array();
  for (const auto& p : inst.precedences)
    j["precedences"].push_back({{"earlier", inst.facilities[p.earlier].id}, {"later", inst.facilities[p.later].id}});
  j["synergies"] = json::array();
  for (const auto& s : inst.synergies)
    j["synergies"].push_back(
        {{"a", anchor_to_json(inst, s.first)}, {"b", anchor_to_json(inst, s.second)}, {"boost", s.boost}});
  return j;
}

// ---------------------------------------------------------------- plans

inline json plan_to_json(const PlanningInstance& inst, const Plan& plan) {
  json a = json::array();
  for (const auto& x : plan.canonical())
    a.push_back({{"facility", inst.facilities[x.facility].id},
                 {"location", inst.facilities[x.facility].locations[x.location].id},
                 {"period", x.period}});
  return {{"assignments", a}, {"provenance", plan.provenance}};
}

inline Plan plan_from_json(const PlanningInstance& inst, const json& j) {
  detail::Diag d;
  Plan plan;
  plan.provenance = detail::str_or(j, "provenance", "manual");
  const auto* a = detail::field(j, "assignments");
  if (!a || !a->is_array()) throw InputError("invalid plan", {"assignments: required array"});
  for (std::size_t k = 0; k < a->size(); ++k) {
    const auto& x = (*a)[k];
    const std::string w = "assignments[" + std::to_string(k) + "]";
    const auto anchor = parse_anchor(inst, x, w, d);
    const auto* p = detail::field(x, "period");
    if (!p || !p->is_number_integer() || p->get<long long>() < 0) {
      d.add(w + ".period: required non-negative integer");
      continue;
    }
    plan.assignments.push_back({anchor.facility, anchor.location, p->get<std::size_t>()});
  }
  d.raise("invalid plan");
  check_structure(inst, plan);
  return plan;
}

// Cell notation: "<location id>t<period>" for a selected facility, "×" otherwise.
inline const std::string kUnselected = "\xC3\x97";

inline std::string plan_cell(const PlanningInstance& inst, const Plan& plan, std::size_t facility) {
  const auto* a = plan.find(facility);
  if (!a) return kUnselected;
  return inst.facilities[facility].locations[a->location].id + "t" + std::to_string(a->period);
}

inline Plan plan_from_cells(const PlanningInstance& inst, const std::vector<std::string>& columns,
                            const std::vector<std::string>& cells, std::string provenance = "manual") {
  if (columns.size() != cells.size())
    throw InputError("invalid plan row", {"cells: expected " + std::to_string(columns.size()) + " entries"});
  detail::Diag d;
  Plan plan;
  plan.provenance = std::move(provenance);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto& cell = cells[c];
    if (cell.empty() || cell == "x" || cell == kUnselected) continue;
    const auto fi = inst.facility_index(columns[c]);
    if (!fi) {
      d.add("columns[" + std::to_string(c) + "]: unknown facility '" + columns[c] + "'");
      continue;
    }
    const auto cut = cell.rfind('t');
    const auto li = cut == std::string::npos ? std::nullopt : inst.location_index(*fi, cell.substr(0, cut));
    const auto digits = cut == std::string::npos ? std::string() : cell.substr(cut + 1);
    if (!li || digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      d.add("cells[" + std::to_string(c) + "]: malformed cell '" + cell + "'");
      continue;
    }
    plan.assignments.push_back({*fi, *li, static_cast<std::size_t>(std::stoul(digits))});
  }
  d.raise("invalid plan row");
  check_structure(inst, plan);
  return plan;
}

inline std::string escape_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// One row per plan, one column per facility in instance order.
inline std::string plan_table_csv(const PlanningInstance& inst,
                                  const std::vector<std::pair<std::string, Plan>>& rows) {
  std::ostringstream os;
  os << "plan";
  for (const auto& f : inst.facilities) os << ',' << escape_csv(f.id);
  os << '\n';
  for (const auto& [id, plan] : rows) {
    os << escape_csv(id);
    for (std::size_t f = 0; f < inst.facilities.size(); ++f) os << ',' << plan_cell(inst, plan, f);
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------- rankings

inline CardRanking ranking_from_json(const json& j) {
  detail::Diag d;
  CardRanking r;
  const auto* c = detail::field(j, "classes");
  if (!c || !c->is_array()) throw InputError("invalid ranking", {"classes: required array of arrays"});
  for (const auto& cls : *c) {
    if (!cls.is_array()) {
      d.add("classes: every class must be an array of item ids");
      continue;
    }
    std::vector<std::string> items;
    for (const auto& x : cls) {
      if (x.is_string())
        items.push_back(x.get<std::string>());
      else
        d.add("classes: item ids must be strings");
    }
    r.classes.push_back(std::move(items));
  }
  if (const auto* b = detail::field(j, "blanks")) {
    if (!b->is_array()) d.add("blanks: expected an array of integers");
    else
      for (const auto& x : *b) {
        if (x.is_number_integer()) r.blanks.push_back(x.get<long long>());
        else d.add("blanks: expected integers");
      }
  } else if (r.classes.size() > 1) {
    r.blanks.assign(r.classes.size() - 1, 0);
  }
  if (const auto* z = detail::field(j, "zero_gap")) {
    if (z->is_number_integer()) r.zero_gap = z->get<long long>();
    else d.add("zero_gap: expected an integer");
  }
  d.raise("invalid ranking");
  r.validate();
  return r;
}

inline json ranking_to_json(const CardRanking& r) {
  return {{"classes", r.classes}, {"blanks", r.blanks}, {"zero_gap", r.zero_gap}};
}

inline json scores_to_json(const ScoreTable& t) {
  json a = json::array();
  for (const auto& e : t.entries) a.push_back({{"item", e.item}, {"score", e.score}, {"class", e.rank_class}});
  return {{"scores", a}};
}

inline ScoreTable scores_from_json(const json& j) {
  ScoreTable t;
  const auto* s = detail::field(j, "scores");
  if (!s) throw InputError("invalid score table", {"scores: required"});
  if (s->is_object()) {
    for (const auto& [k, v] : s->items()) {
      if (!v.is_number()) throw InputError("invalid score table", {"scores." + k + ": expected a number"});
      t.entries.push_back({k, v.get<long long>(), 0});
    }
    return t;
  }
  if (!s->is_array()) throw InputError("invalid score table", {"scores: expected array or object"});
  for (const auto& e : *s)
    t.entries.push_back({detail::str_or(e, "item"), e.value("score", 0LL), e.value("class", std::size_t{0})});
  return t;
}

// ---------------------------------------------------------------- capacities, objectives

inline json normalization_to_json(const Normalization& n) { return {{"lower", n.lower}, {"upper", n.upper}}; }

inline Normalization normalization_from_json(const json& j) {
  detail::Diag d;
  Normalization n;
  n.lower = detail::number_list(j.value("lower", json()), "normalization.lower", d);
  n.upper = detail::number_list(j.value("upper", json()), "normalization.upper", d);
  if (n.lower.size() != n.upper.size()) d.add("normalization: lower and upper differ in length");
  d.raise("invalid normalization");
  return n;
}

inline json capacity_to_json(const Capacity2Additive& c) {
  json pairs = json::array();
  const std::size_t m = c.criteria();
  for (std::size_t p = 0; p < c.pair_count(); ++p) {
    auto [a, b] = Capacity2Additive::pair_of(m, p);
    pairs.push_back({{"j", a}, {"k", b}, {"w", c.pairs()[p]}});
  }
  return {{"singletons", c.singletons()}, {"pairs", pairs}, {"bonus", c.bonus()}};
}

inline Capacity2Additive capacity_from_json(const json& j) {
  detail::Diag d;
  const auto s = detail::number_list(j.value("singletons", json()), "capacity.singletons", d);
  std::vector<double> bonus;
  if (const auto* b = detail::field(j, "bonus")) bonus = detail::number_list(*b, "capacity.bonus", d);
  d.raise("invalid capacity");
  Capacity2Additive c(s.size(), bonus.size());
  for (std::size_t k = 0; k < s.size(); ++k) c.set_singleton(k, s[k]);
  for (std::size_t k = 0; k < bonus.size(); ++k) c.bonus()[k] = bonus[k];
  if (const auto* p = detail::field(j, "pairs"); p && p->is_array())
    for (const auto& e : *p) {
      const auto a = e.value("j", s.size()), b = e.value("k", s.size());
      if (a >= s.size() || b >= s.size() || a == b) {
        d.add("capacity.pairs: invalid criterion indices");
        continue;
      }
      c.set_pair(a, b, e.value("w", 0.0));
    }
  d.raise("invalid capacity");
  return c;
}

inline json objective_to_json(const ObjectiveSpec& o) {
  json j{{"name", o.name}};
  if (o.kind == ObjectiveSpec::Kind::WeightedSum) {
    j["kind"] = "weighted-sum";
    j["weights"] = o.weights;
  } else {
    j["kind"] = "choquet";
    j["capacity"] = capacity_to_json(o.capacity);
  }
  if (o.normalization) j["normalization"] = normalization_to_json(*o.normalization);
  return j;
}

inline ObjectiveSpec objective_from_json(const json& j, const std::string& fallback_name = "objective") {
  const auto name = detail::str_or(j, "name", fallback_name);
  const auto kind = detail::str_or(j, "kind", detail::field(j, "capacity") ? "choquet" : "weighted-sum");
  ObjectiveSpec o;
  if (kind == "weighted-sum") {
    detail::Diag d;
    o = ObjectiveSpec::weighted(name, detail::number_list(j.value("weights", json()), "objective.weights", d));
    d.raise("invalid objective");
  } else if (kind == "choquet") {
    const auto* c = detail::field(j, "capacity");
    if (!c) throw InputError("invalid objective", {"objective.capacity: required for kind choquet"});
    o = ObjectiveSpec::choquet(name, capacity_from_json(*c));
  } else {
    throw InputError("invalid objective", {"objective.kind: expected weighted-sum or choquet"});
  }
  if (const auto* n = detail::field(j, "normalization"); n && !n->is_null()) o.normalization = normalization_from_json(*n);
  return o;
}

// ---------------------------------------------------------------- scenarios

using ObjectiveCatalog = std::map<std::string, ObjectiveSpec>;

inline ExtraConstraints constraints_from_json(const PlanningInstance& inst, const json& j, detail::Diag& d) {
  ExtraConstraints x;
  if (j.is_null()) return x;
  if (!j.is_object()) {
    d.add("constraints: expected an object");
    return x;
  }
  if (const auto* r = detail::field(j, "required"); r && r->is_array())
    for (const auto& f : *r)
      if (auto i = parse_facility_ref(inst, f, "constraints.required", d)) x.required.push_back(*i);
  for (const char* key : {"required", "at_least_one_of", "forbidden_pairs", "precedences"})
    if (const auto* f = detail::field(j, key); f && !f->is_array())
      d.add(std::string("constraints.") + key + ": expected an array");
  if (const auto* g = detail::field(j, "at_least_one_of"); g && g->is_array()) {
    // a flat list is one group
    const bool flat = !g->empty() && (*g)[0].is_string();
    auto group = [&](const json& arr) {
      std::vector<std::size_t> out;
      for (const auto& f : arr)
        if (auto i = parse_facility_ref(inst, f, "constraints.at_least_one_of", d)) out.push_back(*i);
      x.at_least_one_of.push_back(out);
    };
    if (flat) group(*g);
    else
      for (const auto& arr : *g) group(arr);
  }
  if (const auto* f = detail::field(j, "forbidden_pairs"); f && f->is_array())
    for (const auto& e : *f)
      x.forbidden.push_back({parse_anchor(inst, e.value("a", json::object()), "constraints.forbidden_pairs.a", d),
                             parse_anchor(inst, e.value("b", json::object()), "constraints.forbidden_pairs.b", d)});
  if (const auto* p = detail::field(j, "precedences"); p && p->is_array())
    for (const auto& e : *p) {
      auto a = parse_facility_ref(inst, e.value("earlier", json()), "constraints.precedences.earlier", d);
      auto b = parse_facility_ref(inst, e.value("later", json()), "constraints.precedences.later", d);
      if (a && b) x.precedences.push_back({*a, *b});
    }
  const auto rule = detail::str_or(j, "min_two_per_building", "none");
  if (rule == "none") x.min_two_per_building = MinTwoRule::None;
  else if (rule == "if-used") x.min_two_per_building = MinTwoRule::IfUsed;
  else if (rule == "all") x.min_two_per_building = MinTwoRule::All;
  else d.add("constraints.min_two_per_building: expected none, if-used or all");
  return x;
}

inline json constraints_to_json(const PlanningInstance& inst, const ExtraConstraints& x) {
  json j = json::object();
  if (!x.required.empty()) {
    j["required"] = json::array();
    for (auto f : x.required) j["required"].push_back(inst.facilities[f].id);
  }
  if (!x.at_least_one_of.empty()) {
    j["at_least_one_of"] = json::array();
    for (const auto& g : x.at_least_one_of) {
      json a = json::array();
      for (auto f : g) a.push_back(inst.facilities[f].id);
      j["at_least_one_of"].push_back(a);
    }
  }
  if (!x.forbidden.empty()) {
    j["forbidden_pairs"] = json::array();
    for (const auto& e : x.forbidden)
      j["forbidden_pairs"].push_back({{"a", anchor_to_json(inst, e.first)}, {"b", anchor_to_json(inst, e.second)}});
  }
  if (!x.precedences.empty()) {
    j["precedences"] = json::array();
    for (const auto& p : x.precedences)
      j["precedences"].push_back({{"earlier", inst.facilities[p.earlier].id}, {"later", inst.facilities[p.later].id}});
  }
  if (x.min_two_per_building != MinTwoRule::None)
    j["min_two_per_building"] = x.min_two_per_building == MinTwoRule::All ? "all" : "if-used";
  return j;
}

inline Scenario scenario_from_json(const PlanningInstance& inst, const json& j, const ObjectiveCatalog& catalog) {
  detail::Diag d;
  Scenario sc;
  sc.name = detail::str_or(j, "name", "scenario");
  const auto budget = detail::str_or(j, "budget");
  if (auto b = inst.budget_index(budget)) sc.budget = *b;
  else d.add("scenario " + sc.name + ".budget: unknown budget schedule \"" + budget + "\"");
  const auto* o = detail::field(j, "objective");
  if (o && o->is_string()) {
    auto it = catalog.find(o->get<std::string>());
    if (it == catalog.end()) d.add("scenario " + sc.name + ".objective: unknown objective \"" + o->get<std::string>() + "\"");
    else sc.objective = it->second;
  } else if (o && o->is_object()) {
    try {
      sc.objective = objective_from_json(*o, sc.name);
    } catch (const InputError& e) {
      for (const auto& x : e.details()) d.add(x);
    }
  } else {
    d.add("scenario " + sc.name + ".objective: required (catalog name or inline objective)");
  }
  if (const auto* s = detail::field(j, "synergy")) {
    if (s->is_boolean()) sc.synergy = s->get<bool>();
    else if (s->is_string()) sc.synergy = s->get<std::string>() == "on";
    else d.add("scenario " + sc.name + ".synergy: expected boolean");
  }
  sc.extra = constraints_from_json(inst, j.value("constraints", json()), d);
  d.raise("invalid scenario");
  return sc;
}

inline json scenario_to_json(const PlanningInstance& inst, const Scenario& sc) {
  return {{"name", sc.name},
          {"budget", inst.budgets.at(sc.budget).name},
          {"objective", objective_to_json(sc.objective)},
          {"synergy", sc.synergy},
          {"constraints", constraints_to_json(inst, sc.extra)}};
}

/// A grid is either {"cells": [scenario...]} or {"product": {...}} expanding
/// budgets x objectives x synergy flags; an optional "objectives" object adds
/// named entries to the catalog first.
inline std::vector<Scenario> grid_from_json(const PlanningInstance& inst, const json& j, ObjectiveCatalog catalog) {
  if (!j.is_object()) throw InputError("invalid grid", {"grid: expected an object"});
  if (const auto* objs = detail::field(j, "objectives"); objs && objs->is_object())
    for (const auto& [k, v] : objs->items()) catalog[k] = objective_from_json(v, k);
  std::vector<Scenario> out;
  if (const auto* cells = detail::field(j, "cells"); cells && cells->is_array()) {
    for (const auto& c : *cells) out.push_back(scenario_from_json(inst, c, catalog));
  } else if (const auto* p = detail::field(j, "product"); p && p->is_object()) {
    const auto budgets = p->value("budgets", json::array());
    const auto objectives = p->value("objectives", json::array());
    const auto syn = p->value("synergy", json::array({true}));
    const auto cons = p->value("constraints", json());
    if (!budgets.is_array() || !objectives.is_array() || !syn.is_array())
      throw InputError("invalid grid", {"product: budgets, objectives and synergy must be arrays"});
    for (const auto& b : budgets)
      if (!b.is_string()) throw InputError("invalid grid", {"product.budgets: expected schedule names"});
    for (const auto& s : syn)
      if (!s.is_boolean()) throw InputError("invalid grid", {"product.synergy: expected booleans"});
    for (const auto& b : budgets)
      for (const auto& o : objectives)
        for (const auto& s : syn) {
          const std::string oname = o.is_string() ? o.get<std::string>() : o.value("name", "objective");
          json cell{{"name", b.get<std::string>() + "-" + oname + "-" + (s.get<bool>() ? "syn" : "nosyn")},
                    {"budget", b},
                    {"objective", o},
                    {"synergy", s},
                    {"constraints", cons}};
          out.push_back(scenario_from_json(inst, cell, catalog));
        }
  } else {
    throw InputError("invalid grid", {"grid: expected \"cells\" or \"product\""});
  }
  if (out.empty()) throw InputError("invalid grid", {"grid: no cells"});
  return out;
}

// ---------------------------------------------------------------- fits

inline ValueFamily family_from_string(const std::string& s) {
  auto f = parse_family(s);
  if (!f) throw InputError("invalid fit request", {"family: unknown value \"" + s + "\""});
  return *f;
}

/// {"family", "mode", "items": [{"id", "g": [...], "flags": [...]}],
///  "scores": {id: nu} | "ranking": CardRanking, "breakpoints", "scale_total",
///  "use_flags", "normalization": "none" | "min-max"}
inline FitRequest fit_request_from_json(const json& j) {
  detail::Diag d;
  FitRequest r;
  r.family = family_from_string(detail::str_or(j, "family", "weighted-sum"));
  const auto mode = parse_mode(detail::str_or(j, "mode", "multiplicative"));
  if (!mode) d.add("mode: expected multiplicative or affine");
  else r.mode = *mode;
  const auto* items = detail::field(j, "items");
  if (!items || !items->is_array()) throw InputError("invalid fit request", {"items: required array"});
  for (const auto& it : *items) {
    FitItem fi{detail::str_or(it, "id"), {}};
    fi.g.criteria = detail::number_list(it.value("g", json()), "items[" + fi.id + "].g", d);
    if (const auto* f = detail::field(it, "flags")) fi.g.flags = detail::number_list(*f, "items[" + fi.id + "].flags", d);
    r.items.push_back(std::move(fi));
  }
  ScoreTable table;
  if (const auto* s = detail::field(j, "scores")) {
    table = scores_from_json(json{{"scores", *s}});
  } else if (const auto* rk = detail::field(j, "ranking")) {
    table = score(ranking_from_json(*rk));
  } else {
    d.add("scores: provide \"scores\" or \"ranking\"");
  }
  d.raise("invalid fit request");
  for (const auto& it : r.items) {
    const auto* e = table.find(it.id);
    if (!e) d.add("scores: no score for item " + it.id);
    else r.scores.push_back(static_cast<double>(e->score));
  }
  if (const auto* b = detail::field(j, "breakpoints"); b && b->is_array())
    for (const auto& row : *b) r.breakpoints.push_back(detail::number_list(row, "breakpoints", d));
  r.scale_total = j.value("scale_total", r.family == ValueFamily::Piecewise ? 100.0 : 1.0);
  r.use_flags = j.value("use_flags", false);
  const auto norm = detail::str_or(j, "normalization", "none");
  if (norm == "min-max") r.normalization = ContributionScaling::MinMax;
  else if (norm != "none") d.add("normalization: expected none or min-max");
  d.raise("invalid fit request");
  r.validate();
  return r;
}

inline json fit_request_to_json(const FitRequest& r) {
  json items = json::array(), scores = json::object();
  for (std::size_t i = 0; i < r.items.size(); ++i) {
    json it{{"id", r.items[i].id}, {"g", r.items[i].g.criteria}};
    if (!r.items[i].g.flags.empty()) it["flags"] = r.items[i].g.flags;
    items.push_back(it);
    scores[r.items[i].id] = r.scores[i];
  }
  json j{{"family", to_string(r.family)}, {"mode", to_string(r.mode)}, {"items", items}, {"scores", scores},
         {"use_flags", r.use_flags},
         {"normalization", r.normalization == ContributionScaling::MinMax ? "min-max" : "none"}};
  if (r.family == ValueFamily::Piecewise) {
    j["breakpoints"] = r.breakpoints;
    j["scale_total"] = r.scale_total;
  }
  return j;
}

inline json fit_result_to_json(const RegressionResult& r) {
  json j{{"family", to_string(r.family)}, {"mode", to_string(r.mode)}, {"criteria", r.criteria},
         {"k", r.k},           {"k0", r.k0},                {"total_error", r.total_error}};
  switch (r.family) {
    case ValueFamily::WeightedSum: j["weights"] = r.weights; break;
    case ValueFamily::Piecewise:
      j["breakpoints"] = r.breakpoints;
      j["marginals"] = r.marginals;
      break;
    case ValueFamily::Choquet: j["capacity"] = capacity_to_json(r.capacity); break;
  }
  if (r.normalization) j["normalization"] = normalization_to_json(*r.normalization);
  j["items"] = json::array();
  for (const auto& it : r.items)
    j["items"].push_back({{"id", it.id},
                          {"U", it.value},
                          {"nu", it.score},
                          {"k_nu", it.target},
                          {"sigma_plus", it.sigma_plus},
                          {"sigma_minus", it.sigma_minus}});
  return j;
}

inline RegressionResult fit_result_from_json(const json& j) {
  RegressionResult r;
  r.family = family_from_string(detail::str_or(j, "family", "weighted-sum"));
  r.mode = parse_mode(detail::str_or(j, "mode", "multiplicative")).value_or(ScalingMode::Multiplicative);
  r.criteria = j.value("criteria", std::size_t{0});
  r.k = j.value("k", 0.0);
  r.k0 = j.value("k0", 0.0);
  r.total_error = j.value("total_error", 0.0);
  detail::Diag d;
  if (r.family == ValueFamily::WeightedSum) r.weights = detail::number_list(j.value("weights", json()), "weights", d);
  if (r.family == ValueFamily::Piecewise) {
    for (const auto& row : j.value("breakpoints", json::array())) r.breakpoints.push_back(detail::number_list(row, "breakpoints", d));
    for (const auto& row : j.value("marginals", json::array())) r.marginals.push_back(detail::number_list(row, "marginals", d));
  }
  if (r.family == ValueFamily::Choquet) r.capacity = capacity_from_json(j.value("capacity", json::object()));
  if (const auto* n = detail::field(j, "normalization"); n && !n->is_null()) r.normalization = normalization_from_json(*n);
  for (const auto& it : j.value("items", json::array()))
    r.items.push_back({detail::str_or(it, "id"), it.value("U", 0.0), it.value("nu", 0.0), it.value("k_nu", 0.0),
                       it.value("sigma_plus", 0.0), it.value("sigma_minus", 0.0)});
  d.raise("invalid fit result");
  return r;
}

inline json contribution_to_json(const ContributionVector& g) { return {{"g", g.criteria}, {"flags", g.flags}}; }

}  // namespace dorplan::io
