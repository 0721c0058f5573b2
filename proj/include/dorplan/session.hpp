#pragma once

// Iterative elicitation loop over a planning instance: generate plans from a
// scenario grid, curate them, collect deck-of-cards rankings, fit value
// functions and generate again until a plan is accepted.
//
// State is an append-only event log. Every mutation builds an event from its
// inputs, applies it, and records the computed result inside the event so
// that replay can verify determinism. A Session is not thread-safe; callers
// serialize mutations per session.

#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dorplan/deck.hpp"
#include "dorplan/fit.hpp"
#include "dorplan/json_io.hpp"
#include "dorplan/space_time.hpp"

namespace dorplan::session {

using io::json;

struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Mutation on a converged session.
struct ConflictError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Operation needs plans and the session has none.
struct EmptyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ReplayMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Status { Structuring, AwaitingRanking, Fitted, Converged };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::Structuring: return "structuring";
    case Status::AwaitingRanking: return "awaiting-ranking";
    case Status::Fitted: return "fitted";
    case Status::Converged: return "converged";
  }
  return "unknown";
}

struct Event {
  std::string type;  // structuring | generate | curate | rank | fit | accept | comment
  std::string ts;    // ISO 8601 UTC
  json payload;

  json to_json() const { return {{"type", type}, {"ts", ts}, {"payload", payload}}; }
  static Event from_json(const json& j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string() || !j.contains("payload"))
      throw InputError("invalid event", {"event: expected {type, ts, payload}"});
    return {j["type"].get<std::string>(), j.value("ts", std::string()), j["payload"]};
  }
};

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct PlanRecord {
  std::string id;     // "i<iteration>.p<n>", unique in the session
  std::string label;  // assigned by curation, unique in the session
  bool curated = false;
  Plan plan;
  std::vector<std::string> cells;    // generating scenario names
  std::vector<double> objectives;    // objective under each generating cell
  ContributionVector contribution;   // synergies enabled
  std::vector<std::vector<double>> periods;  // per-period, per-criterion increments

  const std::string& display() const { return label.empty() ? id : label; }
};

struct RankingRecord {
  std::string name;
  CardRanking ranking;
  ScoreTable scores;
  json source;  // submitted ranking or merge directive
};

struct FitRecord {
  std::string name;
  std::string ranking;
  FitRequest request;
  RegressionResult result;
  bool registered = false;  // usable as a generation objective
};

struct Iteration {
  std::size_t index = 0;
  json grid;
  std::vector<PlanRecord> plans;
  std::vector<std::string> warnings;
  std::map<std::string, RankingRecord> rankings;
  std::vector<RankingRecord> ranking_history;
  std::vector<FitRecord> fits;
  std::vector<std::string> comments;
  std::optional<std::string> accepted;

  bool any_curated() const {
    for (const auto& p : plans)
      if (p.curated) return true;
    return false;
  }
};

class Session {
 public:
  using Clock = std::function<std::string()>;
  using Sink = std::function<void(const Event&)>;

  /// Opens a session from an instance document (structuring event).
  static Session create(const json& instance_doc, Clock clock = utc_now, Sink sink = {}) {
    Session s(std::move(clock), std::move(sink));
    s.mutate("structuring", {{"instance", instance_doc}});
    return s;
  }

  /// Rebuilds a session from its log. With verify, every recorded result
  /// must match the recomputed one exactly.
  static Session replay(const std::vector<Event>& events, bool verify = true, Clock clock = utc_now, Sink sink = {}) {
    if (events.empty() || events.front().type != "structuring")
      throw InputError("invalid event log", {"log: first event must be structuring"});
    Session s(std::move(clock), {});
    for (std::size_t k = 0; k < events.size(); ++k) {
      Event e = events[k];
      try {
        s.apply(e, verify);
      } catch (const ReplayMismatch& m) {
        throw ReplayMismatch("event " + std::to_string(k + 1) + " (" + e.type + "): " + m.what());
      }
      s.log_.push_back(std::move(e));
    }
    s.sink_ = std::move(sink);
    return s;
  }

  // ------------------------------------------------------------ mutations

  const Iteration& generate(const json& grid) {
    mutate("generate", {{"grid", grid}});
    return iterations_.back();
  }

  /// selections: [{"plan": id | "cell": scenario name, "label": text?}]
  const Iteration& curate(std::size_t iteration, const json& selections) {
    mutate("curate", {{"iteration", iteration}, {"select", selections}});
    return iterations_.at(iteration - 1);
  }

  /// body: {"ranking": CardRanking} or {"merge": {"lower", "upper", "bridge"}}
  const RankingRecord& rank(std::size_t iteration, const std::string& name, const json& body) {
    json p{{"iteration", iteration}, {"name", name}};
    if (body.contains("merge")) p["merge"] = body["merge"];
    else p["ranking"] = body.contains("ranking") ? body["ranking"] : body;
    mutate("rank", p);
    return iterations_.at(iteration - 1).rankings.at(name);
  }

  /// request: {"name", "ranking", "family", "mode"?, "use_flags"?, "normalization"?,
  /// "breakpoints"?, "scale_total"?}
  const FitRecord& fit(std::size_t iteration, const json& request) {
    json p = request;
    p["iteration"] = iteration;
    mutate("fit", p);
    return iterations_.at(iteration - 1).fits.back();
  }

  /// Runs every fit on `iteration`, then generates the next iteration.
  const Iteration& fit_and_advance(std::size_t iteration, const json& requests, const json& grid) {
    guard_mutable();
    if (!requests.is_array() || requests.empty()) throw InputError("nothing to advance", {"fits: empty request list"});
    for (const auto& r : requests) fit(iteration, r);
    return generate(grid);
  }

  void accept(const std::string& plan_ref) { mutate("accept", {{"plan", plan_ref}}); }

  void comment(std::size_t iteration, const std::string& text) {
    mutate("comment", {{"iteration", iteration}, {"text", text}});
  }

  // ------------------------------------------------------------ queries

  Status status() const { return status_; }
  const PlanningInstance& instance() const { return instance_; }
  const std::vector<Iteration>& iterations() const { return iterations_; }
  const std::vector<Event>& events() const { return log_; }
  const io::ObjectiveCatalog& catalog() const { return catalog_; }

  const Iteration& iteration(std::size_t k) const {
    if (k == 0 || k > iterations_.size()) throw NotFoundError("unknown iteration " + std::to_string(k));
    return iterations_[k - 1];
  }

  /// Looks a plan up by label or id among iterations 1..upto (all when 0).
  const PlanRecord* find_plan(const std::string& ref, std::size_t upto = 0) const {
    const std::size_t n = upto == 0 ? iterations_.size() : std::min(upto, iterations_.size());
    for (std::size_t k = 0; k < n; ++k)
      for (const auto& p : iterations_[k].plans)
        if (p.label == ref) return &p;
    for (std::size_t k = 0; k < n; ++k)
      for (const auto& p : iterations_[k].plans)
        if (p.id == ref) return &p;
    return nullptr;
  }

  /// Plan table of one iteration: curated plans when curation happened, all otherwise.
  std::string export_csv(std::size_t k) const {
    const auto& it = iteration(k);
    std::vector<std::pair<std::string, Plan>> rows;
    const bool only = it.any_curated();
    for (const auto& p : it.plans)
      if (!only || p.curated) rows.emplace_back(p.display(), p.plan);
    return io::plan_table_csv(instance_, rows);
  }

  json plan_view(const PlanRecord& p) const {
    json a = io::plan_to_json(instance_, p.plan);
    return {{"id", p.id},
            {"label", p.label},
            {"curated", p.curated},
            {"cells", p.cells},
            {"objective", p.objectives.empty() ? 0.0 : p.objectives.front()},
            {"objectives", p.objectives},
            {"assignments", a["assignments"]},
            {"contributions", io::contribution_to_json(p.contribution)},
            {"periods", p.periods}};
  }

  json iteration_view(const Iteration& it) const {
    json plans = json::array();
    for (const auto& p : it.plans) plans.push_back(plan_view(p));
    json rankings = json::object();
    for (const auto& [name, r] : it.rankings)
      rankings[name] = {{"ranking", io::ranking_to_json(r.ranking)}, {"scores", io::scores_to_json(r.scores)["scores"]}};
    json fits = json::array();
    for (const auto& f : it.fits)
      fits.push_back({{"name", f.name}, {"ranking", f.ranking}, {"registered", f.registered},
                      {"result", io::fit_result_to_json(f.result)}});
    return {{"index", it.index},
            {"plans", plans},
            {"warnings", it.warnings},
            {"rankings", rankings},
            {"fits", fits},
            {"comments", it.comments},
            {"accepted", it.accepted ? json(*it.accepted) : json(nullptr)},
            {"pending_ranking", !it.plans.empty() && it.rankings.empty()}};
  }

  json view() const {
    json its = json::array();
    for (const auto& it : iterations_) its.push_back(iteration_view(it));
    json cat = json::array();
    for (const auto& [name, o] : catalog_) cat.push_back(name);
    return {{"status", to_string(status_)},
            {"instance", instance_.name},
            {"iterations", its},
            {"objectives", cat},
            {"events", log_.size()}};
  }

 private:
  Session(Clock clock, Sink sink) : clock_(std::move(clock)), sink_(std::move(sink)) {}

  void guard_mutable() const {
    if (status_ == Status::Converged) throw ConflictError("session is converged; no further changes accepted");
  }

  void mutate(const std::string& type, json payload) {
    if (type != "structuring") guard_mutable();
    Event e{type, clock_ ? clock_() : std::string(), std::move(payload)};
    apply(e, false);
    log_.push_back(e);
    if (sink_) sink_(log_.back());
  }

  static void check_result(json& payload, const json& result, bool verify) {
    if (verify) {
      if (!payload.contains("result")) throw ReplayMismatch("recorded result missing");
      if (payload["result"] != result) throw ReplayMismatch("recomputed result differs from the recorded one");
    }
    payload["result"] = result;
  }

  static std::size_t iteration_arg(const json& p) {
    if (!p.contains("iteration") || !p["iteration"].is_number_unsigned())
      throw InputError("invalid request", {"iteration: required positive integer"});
    return p["iteration"].get<std::size_t>();
  }

  Iteration& iteration_mut(std::size_t k) {
    if (k == 0 || k > iterations_.size()) throw NotFoundError("unknown iteration " + std::to_string(k));
    return iterations_[k - 1];
  }

  void apply(Event& e, bool verify) {
    if (e.type != "structuring" && !loaded_) throw InputError("invalid event log", {"session has no instance"});
    if (e.type != "structuring") guard_mutable();
    if (e.type == "structuring") return apply_structuring(e);
    if (e.type == "generate") return apply_generate(e, verify);
    if (e.type == "curate") return apply_curate(e);
    if (e.type == "rank") return apply_rank(e, verify);
    if (e.type == "fit") return apply_fit(e, verify);
    if (e.type == "accept") return apply_accept(e);
    if (e.type == "comment") return apply_comment(e);
    throw InputError("invalid event", {"type: unknown event type \"" + e.type + "\""});
  }

  void apply_structuring(const Event& e) {
    if (loaded_) throw InputError("invalid event log", {"structuring: instance already loaded"});
    instance_ = io::instance_from_json(e.payload.value("instance", json()));
    loaded_ = true;
    status_ = Status::Structuring;
  }

  void apply_generate(Event& e, bool verify) {
    const auto cells = io::grid_from_json(instance_, e.payload.value("grid", json()), catalog_);
    Iteration it;
    it.index = iterations_.size() + 1;
    it.grid = e.payload["grid"];
    std::map<std::vector<Assignment>, std::size_t> seen;
    for (const auto& sc : cells) {
      const auto r = optimize(instance_, sc);
      if (r.status != lp::Status::Optimal) {
        it.warnings.push_back("cell " + sc.name + ": " + lp::to_string(r.status));
        continue;
      }
      const auto key = r.plan.canonical();
      auto [pos, fresh] = seen.try_emplace(key, it.plans.size());
      if (fresh) {
        PlanRecord rec;
        rec.id = "i" + std::to_string(it.index) + ".p" + std::to_string(it.plans.size() + 1);
        rec.plan = r.plan;
        rec.plan.provenance = rec.id;
        rec.contribution = contribution(instance_, r.plan, true);
        rec.periods = contribution_by_period(instance_, r.plan, true);
        it.plans.push_back(std::move(rec));
      }
      auto& rec = it.plans[pos->second];
      rec.cells.push_back(sc.name);
      rec.objectives.push_back(r.objective);
    }
    if (it.plans.empty()) it.warnings.push_back("every grid cell is infeasible; iteration has no plans");
    json result = json::array();
    for (const auto& p : it.plans)
      result.push_back({{"id", p.id},
                        {"assignments", io::plan_to_json(instance_, p.plan)["assignments"]},
                        {"cells", p.cells},
                        {"objectives", p.objectives}});
    check_result(e.payload, {{"plans", result}, {"warnings", it.warnings}}, verify);
    iterations_.push_back(std::move(it));
    if (!iterations_.back().plans.empty()) status_ = Status::AwaitingRanking;
  }

  void apply_curate(const Event& e) {
    auto& it = iteration_mut(iteration_arg(e.payload));
    const auto sel = e.payload.value("select", json());
    if (!sel.is_array() || sel.empty()) throw InputError("invalid curation", {"select: required non-empty array"});
    std::vector<std::pair<std::size_t, std::string>> picks;
    std::vector<std::string> d;
    for (const auto& s : sel) {
      std::optional<std::size_t> idx;
      if (s.contains("plan") && s["plan"].is_string()) {
        for (std::size_t k = 0; k < it.plans.size(); ++k)
          if (it.plans[k].id == s["plan"].get<std::string>() || it.plans[k].label == s["plan"].get<std::string>()) idx = k;
        if (!idx) d.push_back("select: unknown plan \"" + s["plan"].get<std::string>() + "\"");
      } else if (s.contains("cell") && s["cell"].is_string()) {
        for (std::size_t k = 0; k < it.plans.size() && !idx; ++k)
          for (const auto& c : it.plans[k].cells)
            if (c == s["cell"].get<std::string>()) idx = k;
        if (!idx) d.push_back("select: no plan generated by cell \"" + s["cell"].get<std::string>() + "\"");
      } else {
        d.push_back("select: each entry needs \"plan\" or \"cell\"");
      }
      if (idx) picks.emplace_back(*idx, s.value("label", std::string()));
    }
    std::map<std::string, std::size_t> labels;
    std::map<std::size_t, std::string> chosen;
    for (const auto& [k, label] : picks) {
      auto [c, first] = chosen.try_emplace(k, label);
      if (!first && c->second != label) d.push_back("select: plan " + it.plans[k].id + " picked with two labels");
      if (label.empty()) continue;
      auto [pos, fresh] = labels.try_emplace(label, k);
      if (!fresh && pos->second != k) d.push_back("select: label \"" + label + "\" used twice");
      for (const auto& other : iterations_)
        for (const auto& p : other.plans) {
          const bool same = other.index == it.index && &p == &it.plans[k];
          if (!same && (p.id == label || (p.label == label && other.index != it.index)))
            d.push_back("select: label \"" + label + "\" collides with plan " + p.id);
        }
    }
    if (!d.empty()) throw InputError("invalid curation", std::move(d));
    for (auto& p : it.plans) {
      p.curated = false;
      p.label.clear();
    }
    for (const auto& [k, label] : picks) {
      it.plans[k].curated = true;
      if (!label.empty()) it.plans[k].label = label;
    }
  }

  void apply_rank(Event& e, bool verify) {
    const std::size_t k = iteration_arg(e.payload);
    auto& it = iteration_mut(k);
    const auto name = e.payload.value("name", std::string());
    if (name.empty()) throw InputError("invalid ranking", {"name: required"});
    CardRanking r;
    json source;
    if (e.payload.contains("merge")) {
      const auto& m = e.payload["merge"];
      const auto lo = m.value("lower", std::string()), up = m.value("upper", std::string());
      const auto* a = find_ranking(lo, k);
      const auto* b = find_ranking(up, k);
      std::vector<std::string> d;
      if (!a) d.push_back("merge.lower: unknown ranking \"" + lo + "\"");
      if (!b) d.push_back("merge.upper: unknown ranking \"" + up + "\"");
      if (!m.contains("bridge") || !m["bridge"].is_number_integer()) d.push_back("merge.bridge: required integer");
      if (!d.empty()) throw InputError("invalid ranking", std::move(d));
      r = merge(a->ranking, b->ranking, m["bridge"].get<long long>());
      source = {{"merge", m}};
    } else {
      r = io::ranking_from_json(e.payload.value("ranking", json()));
      source = {{"ranking", e.payload["ranking"]}};
    }
    std::vector<std::string> d;
    for (const auto& id : r.items())
      if (!find_plan(id, k)) d.push_back("ranking: unknown plan \"" + id + "\"");
    if (!d.empty()) throw InputError("invalid ranking", std::move(d));
    RankingRecord rec{name, r, score(r), source};
    check_result(e.payload, io::scores_to_json(rec.scores), verify);
    it.ranking_history.push_back(rec);
    it.rankings[name] = std::move(rec);
  }

  const RankingRecord* find_ranking(const std::string& name, std::size_t upto) const {
    for (std::size_t k = std::min(upto, iterations_.size()); k > 0; --k) {
      const auto& rs = iterations_[k - 1].rankings;
      if (auto p = rs.find(name); p != rs.end()) return &p->second;
    }
    return nullptr;
  }

  void apply_fit(Event& e, bool verify) {
    const std::size_t k = iteration_arg(e.payload);
    auto& it = iteration_mut(k);
    const auto& p = e.payload;
    const auto name = p.value("name", std::string());
    const auto rname = p.value("ranking", std::string());
    if (name.empty()) throw InputError("invalid fit request", {"name: required"});
    const auto* rk = find_ranking(rname, k);
    if (!rk) throw InputError("invalid fit request", {"ranking: no scores named \"" + rname + "\""});
    json doc{{"family", p.value("family", std::string("choquet"))},
             {"mode", p.value("mode", std::string("multiplicative"))},
             {"use_flags", p.value("use_flags", true)},
             {"normalization", p.value("normalization", std::string("min-max"))},
             {"items", json::array()},
             {"scores", json::object()}};
    for (const char* key : {"breakpoints", "scale_total"})
      if (p.contains(key)) doc[key] = p[key];
    for (const auto& entry : rk->scores.entries) {
      const auto* plan = find_plan(entry.item, k);
      if (!plan) throw InputError("invalid fit request", {"ranking: plan \"" + entry.item + "\" no longer resolves"});
      json item{{"id", entry.item}, {"g", plan->contribution.criteria}};
      if (!plan->contribution.flags.empty()) item["flags"] = plan->contribution.flags;
      doc["items"].push_back(item);
      doc["scores"][entry.item] = entry.score;
    }
    FitRecord rec;
    rec.name = name;
    rec.ranking = rname;
    rec.request = io::fit_request_from_json(doc);
    rec.result = dorplan::fit(rec.request);
    check_result(e.payload, io::fit_result_to_json(rec.result), verify);
    if (rec.result.family != ValueFamily::Piecewise) {
      catalog_[name] = ObjectiveSpec::from_fit(name, rec.result);
      rec.registered = true;
    }
    it.fits.push_back(std::move(rec));
    status_ = Status::Fitted;
  }

  void apply_accept(const Event& e) {
    bool any = false;
    for (const auto& it : iterations_) any = any || !it.plans.empty();
    if (!any) throw EmptyError("session has no plans to accept");
    const auto ref = e.payload.value("plan", std::string());
    const auto* p = find_plan(ref);
    if (!p) throw NotFoundError("unknown plan \"" + ref + "\"");
    for (auto& it : iterations_)
      for (const auto& q : it.plans)
        if (&q == p) it.accepted = p->id;
    status_ = Status::Converged;
  }

  void apply_comment(const Event& e) {
    auto& it = iteration_mut(iteration_arg(e.payload));
    if (!e.payload.contains("text") || !e.payload["text"].is_string())
      throw InputError("invalid comment", {"text: required string"});
    it.comments.push_back(e.payload["text"].get<std::string>());
  }

  Clock clock_;
  Sink sink_;
  bool loaded_ = false;
  PlanningInstance instance_;
  Status status_ = Status::Structuring;
  std::vector<Iteration> iterations_;
  io::ObjectiveCatalog catalog_;
  std::vector<Event> log_;
};

// ---------------------------------------------------------------- scripts

/// Runs a scripted session: a JSON array of steps
///   {"op": "init", "instance": doc | path}
///   {"op": "generate", "grid": doc | path}
///   {"op": "curate", "iteration", "select"}
///   {"op": "rank", "iteration", "name", "ranking": doc | path} or {..., "merge": {...}}
///   {"op": "fit", "iteration", "request"}
///   {"op": "fit_and_advance", "iteration", "fits": [...], "grid": doc | path}
///   {"op": "comment", "iteration", "text"}
///   {"op": "accept", "plan"}
/// String documents are paths relative to base_dir.
inline Session run_script(const json& script, const std::string& base_dir, Session::Clock clock = utc_now,
                          Session::Sink sink = {}) {
  if (!script.is_array() || script.empty() || script[0].value("op", std::string()) != "init")
    throw InputError("invalid script", {"script: expected an array starting with an init step"});
  auto doc = [&](const json& v) {
    return v.is_string() ? io::read_json_file(base_dir + "/" + v.get<std::string>()) : v;
  };
  auto step_iteration = [](const json& st) { return st.value("iteration", std::size_t{0}); };
  Session s = Session::create(doc(script[0].value("instance", json())), clock, sink);
  for (std::size_t k = 1; k < script.size(); ++k) {
    const auto& st = script[k];
    const auto op = st.value("op", std::string());
    if (op == "generate") s.generate(doc(st.value("grid", json())));
    else if (op == "curate") s.curate(step_iteration(st), st.value("select", json()));
    else if (op == "rank" && st.contains("merge")) s.rank(step_iteration(st), st.value("name", ""), {{"merge", st["merge"]}});
    else if (op == "rank") s.rank(step_iteration(st), st.value("name", ""), {{"ranking", doc(st.value("ranking", json()))}});
    else if (op == "fit") s.fit(step_iteration(st), st.value("request", json::object()));
    else if (op == "fit_and_advance") s.fit_and_advance(step_iteration(st), st.value("fits", json()), doc(st.value("grid", json())));
    else if (op == "comment") s.comment(step_iteration(st), st.value("text", ""));
    else if (op == "accept") s.accept(st.value("plan", ""));
    else throw InputError("invalid script", {"steps[" + std::to_string(k) + "].op: unknown \"" + op + "\""});
  }
  return s;
}

// ---------------------------------------------------------------- event log files

inline std::vector<Event> read_event_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path, {path + ": file not readable"});
  std::vector<Event> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Event::from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw InputError("malformed event log", {path + ":" + std::to_string(n) + ": " + e.what()});
    }
  }
  return out;
}

/// Appends one JSON line per event and flushes.
inline Session::Sink file_sink(const std::string& path) {
  return [path](const Event& e) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot append to " + path);
    out << e.to_json().dump() << '\n';
  };
}

inline void write_event_log(const std::string& path, const std::vector<Event>& events) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& e : events) out << e.to_json().dump() << '\n';
}

}  // namespace dorplan::session
