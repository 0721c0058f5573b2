// dorplan: batch entry point for solving, scoring, fitting and session logs.
//
// Exit codes: 0 ok, 2 usage, 3 infeasible or empty, 4 input error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "dorplan/json_io.hpp"
#include "dorplan/session.hpp"

using namespace dorplan;
using io::json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kEmpty = 3;
constexpr int kInput = 4;

struct Outcome : std::runtime_error {
  int code;
  Outcome(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

void print_details(const std::vector<std::string>& details) {
  for (const auto& d : details) std::cerr << "  " << d << '\n';
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const Outcome& e) {
    std::cerr << "dorplan: " << e.what() << '\n';
    return e.code;
  } catch (const session::EmptyError& e) {
    std::cerr << "dorplan: " << e.what() << '\n';
    return kEmpty;
  } catch (const InputError& e) {
    std::cerr << "dorplan: " << e.what() << '\n';
    print_details(e.details());
    return kInput;
  } catch (const json::exception& e) {
    std::cerr << "dorplan: malformed document: " << e.what() << '\n';
    return kInput;
  } catch (const session::NotFoundError& e) {
    std::cerr << "dorplan: " << e.what() << '\n';
    return kInput;
  } catch (const session::ConflictError& e) {
    std::cerr << "dorplan: " << e.what() << '\n';
    return kInput;
  } catch (const session::ReplayMismatch& e) {
    std::cerr << "dorplan: replay mismatch: " << e.what() << '\n';
    return kInput;
  }
}

std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> w;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      w.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw InputError("invalid weights", {"--weights: \"" + tok + "\" is not a number"});
    }
  }
  return w;
}

std::string money(Cents c) { return io::money_to_json(c).get<std::string>(); }

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string instance;
  std::string budget;
  std::string weights;
  std::string synergy = "on";
  std::string objective;
  std::string constraints;
  std::string lp_dump;
  std::string format = "both";
};

ObjectiveSpec load_objective(const std::string& path) {
  const auto doc = io::read_json_file(path);
  if (doc.contains("total_error")) return ObjectiveSpec::from_fit("fitted", io::fit_result_from_json(doc));
  return io::objective_from_json(doc, "objective");
}

void print_plan_table(const PlanningInstance& inst, const Scenario& sc, const OptimizeResult& r) {
  std::cout << "scenario " << sc.name << "  budget " << inst.budgets[sc.budget].name << "  synergy "
            << (sc.synergy ? "on" : "off") << '\n';
  std::cout << std::left << std::setw(12) << "facility" << std::setw(10) << "cell" << std::setw(14) << "cost"
            << "location\n";
  for (std::size_t i = 0; i < inst.facilities.size(); ++i) {
    const auto& f = inst.facilities[i];
    const auto* a = r.plan.find(i);
    std::cout << std::setw(12) << f.id << std::setw(10) << io::plan_cell(inst, r.plan, i);
    if (a) {
      const auto& loc = f.locations[a->location];
      std::cout << std::setw(14) << money(loc.cost) << (loc.label.empty() ? loc.id : loc.label);
    }
    std::cout << '\n';
  }
  std::cout << "\nperiod  spent         cumulative    budget(cum)\n";
  Cents cum = 0, cap = 0;
  for (std::size_t t = 0; t < inst.periods; ++t) {
    Cents spent = 0;
    for (const auto& a : r.plan.assignments)
      if (a.period == t) spent += inst.facilities[a.facility].locations[a.location].cost;
    cum += spent;
    cap += inst.budgets[sc.budget].per_period[t];
    std::cout << std::setw(8) << ("t" + std::to_string(t)) << std::setw(14) << money(spent) << std::setw(14)
              << money(cum) << money(cap) << '\n';
  }
  std::cout << "\ncontributions";
  for (std::size_t j = 0; j < inst.criteria.size(); ++j)
    std::cout << "  " << inst.criteria[j].id << '=' << std::setprecision(6) << r.contributions.criteria[j];
  std::cout << "\nobjective " << std::setprecision(10) << r.objective << '\n';
}

int cmd_solve(const SolveArgs& a) {
  const auto inst = io::instance_from_json(io::read_json_file(a.instance));
  Scenario sc;
  sc.name = "cli";
  if (inst.budgets.empty()) throw InputError("invalid scenario", {"budgets: instance defines none"});
  if (a.budget.empty()) {
    sc.budget = 0;
  } else {
    const auto b = inst.budget_index(a.budget);
    if (!b) throw InputError("invalid scenario", {"--budget: unknown schedule \"" + a.budget + "\""});
    sc.budget = *b;
  }
  sc.synergy = a.synergy == "on";
  if (!a.objective.empty()) {
    sc.objective = load_objective(a.objective);
  } else {
    auto w = a.weights.empty() ? std::vector<double>(inst.criteria.size(), 1.0 / inst.criteria.size())
                               : parse_weights(a.weights);
    sc.objective = ObjectiveSpec::weighted("weights", std::move(w));
  }
  if (!a.constraints.empty()) {
    io::detail::Diag d;
    sc.extra = io::constraints_from_json(inst, io::read_json_file(a.constraints), d);
    d.raise("invalid constraints");
  }

  if (!a.lp_dump.empty()) {
    std::ofstream out(a.lp_dump);
    if (!out) throw InputError("cannot write " + a.lp_dump, {"--lp-dump: file not writable"});
    lp::write_lp_format(out, assemble(inst, sc).lp);
  }
  const auto r = optimize(inst, sc);
  if (r.status != lp::Status::Optimal) throw Outcome(kEmpty, std::string("no plan: ") + lp::to_string(r.status));
  if (r.plan.assignments.empty()) throw Outcome(kEmpty, "no plan: the optimum activates no facility");

  if (a.format != "table") {
    json out{{"scenario", io::scenario_to_json(inst, sc)},
             {"status", lp::to_string(r.status)},
             {"objective", r.objective},
             {"milp_objective", r.milp_objective},
             {"plan", io::plan_to_json(inst, r.plan)},
             {"contributions", io::contribution_to_json(r.contributions)},
             {"periods", contribution_by_period(inst, r.plan, sc.synergy)}};
    std::cout << out.dump(2) << '\n';
  }
  if (a.format == "both") std::cout << '\n';
  if (a.format != "json") print_plan_table(inst, sc, r);
  return kOk;
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
  std::string ranking;
  std::vector<std::string> merge;
  long long bridge = 0;
  std::string format = "csv";
};

void print_scores(const ScoreTable& t, const std::string& format) {
  if (format == "json") {
    std::cout << io::scores_to_json(t).dump(2) << '\n';
    return;
  }
  std::cout << "item,class,score\n";
  for (const auto& e : t.entries) std::cout << io::escape_csv(e.item) << ',' << e.rank_class + 1 << ',' << e.score << '\n';
}

int cmd_score(const ScoreArgs& a) {
  CardRanking r;
  if (!a.merge.empty()) {
    if (!a.ranking.empty()) throw Outcome(kUsage, "give either a ranking file or --merge, not both");
    r = merge(io::ranking_from_json(io::read_json_file(a.merge[0])),
              io::ranking_from_json(io::read_json_file(a.merge[1])), a.bridge);
  } else {
    if (a.ranking.empty()) throw Outcome(kUsage, "a ranking file or --merge is required");
    r = io::ranking_from_json(io::read_json_file(a.ranking));
  }
  print_scores(score(r), a.format);
  return kOk;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string items;
  std::string scores;
  std::string family;
  std::string mode;
  std::string normalization;
  int use_flags = -1;  // -1 keeps the document's setting
  std::string format = "both";
};

int cmd_fit(const FitArgs& a) {
  auto doc = io::read_json_file(a.items);
  if (!a.scores.empty()) {
    const auto s = io::read_json_file(a.scores);
    doc.erase("scores");
    doc.erase("ranking");
    if (s.contains("classes")) doc["ranking"] = s;
    else doc["scores"] = s.contains("scores") ? s["scores"] : s;
  }
  if (!a.family.empty()) doc["family"] = a.family;
  if (!a.mode.empty()) doc["mode"] = a.mode;
  if (!a.normalization.empty()) doc["normalization"] = a.normalization;
  if (a.use_flags >= 0) doc["use_flags"] = a.use_flags == 1;
  const auto res = fit(io::fit_request_from_json(doc));
  if (a.format != "csv") std::cout << io::fit_result_to_json(res).dump(2) << '\n';
  if (a.format == "both") std::cout << '\n';
  if (a.format != "json") write_fit_csv(std::cout, res);
  return kOk;
}

// ---------------------------------------------------------------- session

struct SessionArgs {
  std::string log;
  bool force = false;
  std::size_t iteration = 0;  // 0: latest
  std::string doc;
  std::vector<std::string> plans;
  std::vector<std::string> cells;
  std::string name;
  std::vector<std::string> merge;
  long long bridge = 0;
  std::string ranking;
  std::string family = "choquet";
  std::string mode = "multiplicative";
  std::string normalization = "min-max";
  bool no_flags = false;
  std::string format = "csv";
  std::string text;
  std::string plan;
  bool no_verify = false;
  std::string clock;
};

session::Session::Clock clock_of(const SessionArgs& a) {
  if (a.clock.empty()) return session::utc_now;
  return [ts = a.clock] { return ts; };
}

session::Session load(const SessionArgs& a) {
  return session::Session::replay(session::read_event_log(a.log), true, clock_of(a), session::file_sink(a.log));
}

std::size_t pick_iteration(const session::Session& s, std::size_t requested) {
  if (requested != 0) return requested;
  if (s.iterations().empty()) throw session::NotFoundError("session has no iterations yet");
  return s.iterations().size();
}

void fresh_log(const SessionArgs& a) {
  if (std::filesystem::exists(a.log) && !a.force)
    throw InputError("log exists", {a.log + ": already present; pass --force to overwrite"});
  std::ofstream(a.log, std::ios::trunc);
}

void print_iteration(const session::Iteration& it) {
  std::cout << "iteration " << it.index << ": " << it.plans.size() << " plan(s)\n";
  for (const auto& p : it.plans) {
    std::cout << "  " << std::left << std::setw(8) << p.id << std::setw(8) << (p.label.empty() ? "-" : p.label)
              << (p.curated ? "* " : "  ") << std::setprecision(6) << std::setw(12)
              << (p.objectives.empty() ? 0.0 : p.objectives.front());
    for (std::size_t c = 0; c < p.cells.size(); ++c) std::cout << (c ? "," : "") << p.cells[c];
    if (it.accepted && *it.accepted == p.id) std::cout << "  [accepted]";
    std::cout << '\n';
  }
  for (const auto& w : it.warnings) std::cout << "  warning: " << w << '\n';
  for (const auto& c : it.comments) std::cout << "  comment: " << c << '\n';
}

void print_summary(const session::Session& s) {
  std::cout << "status " << session::to_string(s.status()) << ", " << s.events().size() << " event(s)\n";
  for (const auto& it : s.iterations()) print_iteration(it);
}

json selection(const SessionArgs& a) {
  json sel = json::array();
  auto add = [&](const std::string& spec, const char* key) {
    const auto eq = spec.find('=');
    json e{{key, spec.substr(0, eq)}};
    if (eq != std::string::npos) e["label"] = spec.substr(eq + 1);
    sel.push_back(e);
  };
  if (!a.doc.empty()) {
    const auto d = io::read_json_file(a.doc);
    for (const auto& e : d.is_object() ? d.value("select", json::array()) : d) sel.push_back(e);
  }
  for (const auto& p : a.plans) add(p, "plan");
  for (const auto& c : a.cells) add(c, "cell");
  if (sel.empty()) throw Outcome(kUsage, "curate needs a selection file, --plan or --cell");
  return sel;
}

int session_init(const SessionArgs& a) {
  const auto doc = io::read_json_file(a.doc);
  io::instance_from_json(doc);  // validate before touching the log
  fresh_log(a);
  const auto s = session::Session::create(doc, clock_of(a), session::file_sink(a.log));
  print_summary(s);
  return kOk;
}

int session_generate(const SessionArgs& a) {
  auto s = load(a);
  const auto& it = s.generate(io::read_json_file(a.doc));
  print_iteration(it);
  return it.plans.empty() ? kEmpty : kOk;
}

int session_curate(const SessionArgs& a) {
  auto s = load(a);
  print_iteration(s.curate(pick_iteration(s, a.iteration), selection(a)));
  return kOk;
}

int session_rank(const SessionArgs& a) {
  auto s = load(a);
  json body;
  if (!a.merge.empty()) {
    body["merge"] = {{"lower", a.merge[0]}, {"upper", a.merge[1]}, {"bridge", a.bridge}};
  } else {
    if (a.doc.empty()) throw Outcome(kUsage, "rank needs a ranking file or --merge");
    body["ranking"] = io::read_json_file(a.doc);
  }
  const auto& r = s.rank(pick_iteration(s, a.iteration), a.name, body);
  print_scores(r.scores, "csv");
  return kOk;
}

int session_fit(const SessionArgs& a) {
  auto s = load(a);
  const json req{{"name", a.name},       {"ranking", a.ranking},
                 {"family", a.family},   {"mode", a.mode},
                 {"use_flags", !a.no_flags}, {"normalization", a.normalization}};
  const auto& f = s.fit(pick_iteration(s, a.iteration), req);
  auto out = io::fit_result_to_json(f.result);
  out["name"] = f.name;
  out["registered"] = f.registered;
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int session_accept(const SessionArgs& a) {
  auto s = load(a);
  s.accept(a.plan);
  print_summary(s);
  return kOk;
}

int session_comment(const SessionArgs& a) {
  auto s = load(a);
  s.comment(pick_iteration(s, a.iteration), a.text);
  return kOk;
}

int session_export(const SessionArgs& a) {
  const auto s = session::Session::replay(session::read_event_log(a.log), true);
  const auto k = pick_iteration(s, a.iteration);
  if (a.format == "json") std::cout << s.iteration_view(s.iteration(k)).dump(2) << '\n';
  else std::cout << s.export_csv(k);
  return kOk;
}

int session_run_script(const SessionArgs& a) {
  const auto script = io::read_json_file(a.doc);
  fresh_log(a);
  const auto base = std::filesystem::path(a.doc).parent_path().string();
  const auto s = session::run_script(script, base.empty() ? "." : base, clock_of(a), session::file_sink(a.log));
  print_summary(s);
  return kOk;
}

int session_replay(const SessionArgs& a) {
  const auto s = session::Session::replay(session::read_event_log(a.log), !a.no_verify);
  print_summary(s);
  return kOk;
}

int session_view(const SessionArgs& a) {
  const auto s = session::Session::replay(session::read_event_log(a.log), true);
  std::cout << s.view().dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dorplan: multi-period facility planning with preference elicitation"};
  app.require_subcommand(1);
  long long seed = 0;
  app.add_option("--seed", seed, "Reserved; the solver is deterministic and ignores it");

  const std::vector<std::string> families{"ws", "weighted-sum", "piecewise", "pwl", "choquet"};
  const std::vector<std::string> modes{"multiplicative", "affine"};
  const std::vector<std::string> norms{"none", "min-max"};

  std::function<int()> action;

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Solve one scenario and print the optimal plan");
  solve->add_option("instance", sa.instance, "Instance JSON")->required();
  solve->add_option("--budget", sa.budget, "Budget schedule name (default: first)");
  solve->add_option("--weights", sa.weights, "Comma-separated weights, one per criterion (default: equal)");
  solve->add_option("--synergy", sa.synergy, "Count synergy contributions")->check(CLI::IsMember({"on", "off"}));
  solve->add_option("--objective", sa.objective, "Objective JSON or fitted result JSON")->excludes("--weights");
  solve->add_option("--constraints", sa.constraints, "Extra constraints JSON");
  solve->add_option("--lp-dump", sa.lp_dump, "Write the MILP in LP format");
  solve->add_option("--format", sa.format, "Output")->check(CLI::IsMember({"json", "table", "both"}));
  solve->callback([&] { action = [&] { return cmd_solve(sa); }; });

  ScoreArgs ca;
  auto* sc = app.add_subcommand("score", "Deck-of-cards scores of a ranking");
  sc->add_option("ranking", ca.ranking, "Ranking JSON");
  sc->add_option("--merge", ca.merge, "Lower and upper ranking files")->expected(2);
  sc->add_option("--bridge", ca.bridge, "Blank cards between the two rankings")->check(CLI::NonNegativeNumber);
  sc->add_option("--format", ca.format, "Output")->check(CLI::IsMember({"csv", "json"}));
  sc->callback([&] { action = [&] { return cmd_score(ca); }; });

  FitArgs fa;
  auto* ft = app.add_subcommand("fit", "Fit a value function to scored items");
  ft->add_option("items", fa.items, "Items JSON (may embed scores or a ranking)")->required();
  ft->add_option("scores", fa.scores, "Scores or ranking JSON overriding the embedded one");
  ft->add_option("--family", fa.family, "Value function family")->check(CLI::IsMember(families));
  ft->add_option("--mode", fa.mode, "Score scaling")->check(CLI::IsMember(modes));
  ft->add_option("--normalization", fa.normalization, "Contribution scaling")->check(CLI::IsMember(norms));
  ft->add_flag("--use-flags{1},--no-flags{0}", fa.use_flags, "Binary criteria as extra regressors");
  ft->add_option("--format", fa.format, "Output")->check(CLI::IsMember({"json", "csv", "both"}));
  ft->callback([&] { action = [&] { return cmd_fit(fa); }; });

  SessionArgs se;
  auto* ses = app.add_subcommand("session", "Event-logged elicitation session");
  ses->require_subcommand(1);
  auto log_opt = [&](CLI::App* c) { c->add_option("--log", se.log, "Event log (JSON lines)")->required(); };
  auto iter_opt = [&](CLI::App* c) { c->add_option("--iteration", se.iteration, "Iteration (default: latest)"); };
  auto clock_opt = [&](CLI::App* c) { c->add_option("--clock", se.clock, "Fixed event timestamp"); };
  auto bind = [&](CLI::App* c, int (*fn)(const SessionArgs&)) { c->callback([&, fn] { action = [&, fn] { return fn(se); }; }); };

  auto* s_init = ses->add_subcommand("init", "Start a session log from an instance");
  s_init->add_option("instance", se.doc)->required();
  s_init->add_flag("--force", se.force, "Overwrite an existing log");
  log_opt(s_init), clock_opt(s_init), bind(s_init, session_init);

  auto* s_gen = ses->add_subcommand("generate", "Solve a scenario grid into a new iteration");
  s_gen->add_option("grid", se.doc)->required();
  log_opt(s_gen), clock_opt(s_gen), bind(s_gen, session_generate);

  auto* s_cur = ses->add_subcommand("curate", "Select and label plans for the decision maker");
  s_cur->add_option("selection", se.doc, "JSON array of {plan|cell, label}");
  s_cur->add_option("--plan", se.plans, "ID=LABEL");
  s_cur->add_option("--cell", se.cells, "CELL=LABEL");
  log_opt(s_cur), iter_opt(s_cur), clock_opt(s_cur), bind(s_cur, session_curate);

  auto* s_rank = ses->add_subcommand("rank", "Record a ranking or merge two recorded rankings");
  s_rank->add_option("ranking", se.doc, "Ranking JSON");
  s_rank->add_option("--name", se.name)->required();
  s_rank->add_option("--merge", se.merge, "Lower and upper ranking names")->expected(2);
  s_rank->add_option("--bridge", se.bridge)->check(CLI::NonNegativeNumber);
  log_opt(s_rank), iter_opt(s_rank), clock_opt(s_rank), bind(s_rank, session_rank);

  auto* s_fit = ses->add_subcommand("fit", "Fit a value function to a recorded ranking");
  s_fit->add_option("--name", se.name)->required();
  s_fit->add_option("--ranking", se.ranking)->required();
  s_fit->add_option("--family", se.family)->check(CLI::IsMember(families));
  s_fit->add_option("--mode", se.mode)->check(CLI::IsMember(modes));
  s_fit->add_option("--normalization", se.normalization)->check(CLI::IsMember(norms));
  s_fit->add_flag("--no-flags", se.no_flags, "Ignore binary criteria");
  log_opt(s_fit), iter_opt(s_fit), clock_opt(s_fit), bind(s_fit, session_fit);

  auto* s_acc = ses->add_subcommand("accept", "Accept a plan and close the session");
  s_acc->add_option("plan", se.plan, "Plan label or id")->required();
  log_opt(s_acc), clock_opt(s_acc), bind(s_acc, session_accept);

  auto* s_com = ses->add_subcommand("comment", "Attach a comment to an iteration");
  s_com->add_option("text", se.text)->required();
  log_opt(s_com), iter_opt(s_com), clock_opt(s_com), bind(s_com, session_comment);

  auto* s_exp = ses->add_subcommand("export", "Print an iteration as a plan table");
  s_exp->add_option("--format", se.format)->check(CLI::IsMember({"csv", "json"}));
  log_opt(s_exp), iter_opt(s_exp), bind(s_exp, session_export);

  auto* s_run = ses->add_subcommand("run-script", "Run a scripted session into a fresh log");
  s_run->add_option("script", se.doc)->required();
  s_run->add_flag("--force", se.force, "Overwrite an existing log");
  log_opt(s_run), clock_opt(s_run), bind(s_run, session_run_script);

  auto* s_rep = ses->add_subcommand("replay", "Rebuild a session from its log and check every result");
  s_rep->add_flag("--no-verify", se.no_verify, "Skip result comparison");
  log_opt(s_rep), bind(s_rep, session_replay);

  auto* s_view = ses->add_subcommand("view", "Print the session view as JSON");
  log_opt(s_view), bind(s_view, session_view);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  return guarded(action);
}
