#pragma once

// HTTP semantics over sessions, independent of any socket library: a request
// (method, path, body) maps to a response (status, content type, body).
// Mutations on one session are serialized by a per-session mutex; views are
// served from a snapshot refreshed after each mutation, so reads never wait
// on a running solve.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dorplan/session.hpp"

namespace dorplan::api {

using io::json;

struct Request {
  std::string method;
  std::string path;
  std::string body;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;

  json json_body() const { return json::parse(body); }
};

inline Response json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

inline Response error_response(int status, const std::string& code, const std::string& message,
                               const std::vector<std::string>& details = {}) {
  return json_response(status, {{"code", code}, {"message", message}, {"details", details}});
}

struct Options {
  std::string data_dir;  // event logs live here when set
  std::chrono::milliseconds async_after{2000};
  session::Session::Clock clock = session::utc_now;
  std::string openapi_path;  // served at GET /openapi.json when set
};

class Service {
 public:
  explicit Service(Options opt = {}) : opt_(std::move(opt)) {
    if (!opt_.data_dir.empty()) load_persisted();
  }

  ~Service() {
    std::lock_guard lk(jobs_mu_);
    for (auto& [id, j] : jobs_)
      if (j->done.valid()) j->done.wait();
  }

  Response handle(const Request& req) {
    try {
      return route(req);
    } catch (const json::exception& e) {
      return error_response(422, "invalid_input", "request body has the wrong shape", {e.what()});
    } catch (const InputError& e) {
      return error_response(422, "invalid_input", e.what(), e.details());
    } catch (const session::NotFoundError& e) {
      return error_response(404, "not_found", e.what());
    } catch (const session::ConflictError& e) {
      return error_response(409, "conflict", e.what());
    } catch (const session::EmptyError& e) {
      return error_response(409, "conflict", e.what());
    } catch (const std::exception& e) {
      return error_response(500, "internal", e.what());
    }
  }

  std::size_t session_count() const {
    std::lock_guard lk(map_mu_);
    return sessions_.size();
  }

 private:
  struct Entry {
    std::string id;
    std::mutex write;  // one writer at a time
    std::optional<session::Session> s;
    mutable std::mutex snap_mu;
    json snapshot;

    void refresh() {
      json v = s->view();
      v["id"] = id;
      std::lock_guard lk(snap_mu);
      snapshot = std::move(v);
    }
    json view() const {
      std::lock_guard lk(snap_mu);
      return snapshot;
    }
  };

  struct Job {
    std::string id;
    std::string session;
    std::shared_future<Response> done;
  };

  static std::vector<std::string> split(const std::string& path) {
    std::vector<std::string> out;
    std::string cur;
    const auto q = path.find('?');
    for (char c : path.substr(0, q)) {
      if (c == '/') {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
  }

  static json parse_body(const Request& req) {
    if (req.body.empty()) return json::object();
    try {
      return json::parse(req.body);
    } catch (const json::parse_error& e) {
      throw BadRequest(e.what());
    }
  }

  struct BadRequest : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  Response route(const Request& req) {
    try {
      return route_inner(req);
    } catch (const BadRequest& e) {
      return error_response(400, "bad_request", "malformed JSON body", {e.what()});
    }
  }

  Response route_inner(const Request& req) {
    const auto seg = split(req.path);
    const auto& m = req.method;
    if (seg.size() == 1 && seg[0] == "openapi.json" && m == "GET") return openapi();
    if (seg.size() == 1 && seg[0] == "health" && m == "GET") return json_response(200, {{"status", "ok"}});
    if (seg.size() == 2 && seg[0] == "jobs" && m == "GET") return poll(seg[1]);
    if (seg.empty() || seg[0] != "sessions") return error_response(404, "not_found", "no route for " + req.path);
    if (seg.size() == 1) {
      if (m == "POST") return create(parse_body(req));
      if (m == "GET") return list();
      return method_not_allowed();
    }
    auto e = find(seg[1]);
    if (seg.size() == 2) {
      if (m == "GET") return json_response(200, e->view());
      return method_not_allowed();
    }
    const auto& op = seg[2];
    if (m == "GET" && seg.size() == 3 && op == "events") {
      std::lock_guard lk(e->write);
      json a = json::array();
      for (const auto& ev : e->s->events()) a.push_back(ev.to_json());
      return json_response(200, a);
    }
    if (m == "GET" && seg.size() == 5 && op == "iterations" && seg[4] == "plans.csv") {
      std::lock_guard lk(e->write);
      return {200, "text/csv; charset=utf-8", e->s->export_csv(parse_index(seg[3]))};
    }
    if (m == "GET" && seg.size() == 4 && op == "iterations") {
      const auto k = parse_index(seg[3]);
      const auto v = e->view();
      if (k == 0 || k > v["iterations"].size()) throw session::NotFoundError("unknown iteration " + seg[3]);
      return json_response(200, v["iterations"][k - 1]);
    }
    if (m != "POST" || seg.size() != 3) return error_response(404, "not_found", "no route for " + req.path);
    const json body = parse_body(req);
    if (op == "generate") return generate(e, body);
    if (op == "curate")
      return mutate(e, [&](session::Session& s) {
        const auto k = iteration_or_latest(s, body);
        return json_response(200, s.iteration_view(s.curate(k, body.value("select", json()))));
      });
    if (op == "rankings")
      return mutate(e, [&](session::Session& s) {
        const auto k = iteration_or_latest(s, body);
        const auto name = body.value("name", std::string());
        const auto& r = s.rank(k, name, body);
        json out = io::scores_to_json(r.scores);
        out["name"] = name;
        out["iteration"] = k;
        return json_response(201, out);
      });
    if (op == "fits")
      return mutate(e, [&](session::Session& s) {
        const auto k = iteration_or_latest(s, body);
        json req_body = body;
        req_body.erase("iteration");
        const auto& f = s.fit(k, req_body);
        json out = io::fit_result_to_json(f.result);
        out["name"] = f.name;
        out["registered"] = f.registered;
        return json_response(201, out);
      });
    if (op == "accept")
      return mutate(e, [&](session::Session& s) {
        s.accept(body.value("plan", std::string()));
        json v = s.view();
        v["id"] = e->id;
        return json_response(200, v);
      });
    if (op == "comments")
      return mutate(e, [&](session::Session& s) {
        const auto k = iteration_or_latest(s, body);
        s.comment(k, body.value("text", std::string()));
        return json_response(201, {{"iteration", k}, {"comments", s.iteration(k).comments}});
      });
    return error_response(404, "not_found", "no route for " + req.path);
  }

  static Response method_not_allowed() { return error_response(405, "method_not_allowed", "method not allowed"); }

  static std::size_t parse_index(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw session::NotFoundError("unknown iteration " + s);
    return std::stoul(s);
  }

  static std::size_t iteration_or_latest(const session::Session& s, const json& body) {
    if (body.contains("iteration")) {
      if (!body["iteration"].is_number_unsigned())
        throw InputError("invalid request", {"iteration: expected a positive integer"});
      return body["iteration"].get<std::size_t>();
    }
    if (s.iterations().empty()) throw session::NotFoundError("session has no iterations yet");
    return s.iterations().size();
  }

  template <class F>
  Response mutate(const std::shared_ptr<Entry>& e, F&& f) {
    std::lock_guard lk(e->write);
    Response r = f(*e->s);
    e->refresh();
    return r;
  }

  Response create(const json& body) {
    const std::string id = next_id();
    auto e = std::make_shared<Entry>();
    e->id = id;
    session::Session::Sink sink;
    if (!opt_.data_dir.empty()) sink = session::file_sink(log_path(id));
    e->s.emplace(session::Session::create(body, opt_.clock, sink));
    e->refresh();
    {
      std::lock_guard lk(map_mu_);
      sessions_[id] = e;
    }
    return json_response(201, {{"id", id}, {"status", session::to_string(e->s->status())}});
  }

  Response list() const {
    json a = json::array();
    std::lock_guard lk(map_mu_);
    for (const auto& [id, e] : sessions_) a.push_back({{"id", id}, {"status", e->view()["status"]}});
    return json_response(200, a);
  }

  Response generate(const std::shared_ptr<Entry>& e, const json& grid) {
    {
      std::lock_guard lk(e->write);
      if (e->s->status() == session::Status::Converged)
        throw session::ConflictError("session is converged; no further changes accepted");
    }
    auto task = std::async(std::launch::async, [this, e, grid] {
      return handle_guarded([&] {
        return mutate(e, [&](session::Session& s) { return json_response(200, s.iteration_view(s.generate(grid))); });
      });
    }).share();
    if (task.wait_for(opt_.async_after) == std::future_status::ready) return task.get();
    const std::string jid = "job" + std::to_string(++job_counter_);
    {
      std::lock_guard lk(jobs_mu_);
      jobs_[jid] = std::make_shared<Job>(Job{jid, e->id, task});
    }
    return json_response(202, {{"job", jid}, {"poll", "/jobs/" + jid}, {"session", e->id}});
  }

  template <class F>
  Response handle_guarded(F&& f) {
    try {
      return f();
    } catch (const InputError& x) {
      return error_response(422, "invalid_input", x.what(), x.details());
    } catch (const session::NotFoundError& x) {
      return error_response(404, "not_found", x.what());
    } catch (const session::ConflictError& x) {
      return error_response(409, "conflict", x.what());
    } catch (const std::exception& x) {
      return error_response(500, "internal", x.what());
    }
  }

  Response poll(const std::string& jid) {
    std::shared_ptr<Job> j;
    {
      std::lock_guard lk(jobs_mu_);
      auto it = jobs_.find(jid);
      if (it == jobs_.end()) return error_response(404, "not_found", "unknown job " + jid);
      j = it->second;
    }
    if (j->done.wait_for(std::chrono::milliseconds(0)) != std::future_status::ready)
      return json_response(200, {{"job", jid}, {"state", "running"}, {"session", j->session}});
    const auto& r = j->done.get();
    return json_response(200, {{"job", jid},
                               {"state", r.status < 300 ? "done" : "failed"},
                               {"session", j->session},
                               {"status", r.status},
                               {"result", json::parse(r.body)}});
  }

  Response openapi() const {
    if (opt_.openapi_path.empty()) return error_response(404, "not_found", "no API description configured");
    std::ifstream in(opt_.openapi_path);
    if (!in) return error_response(404, "not_found", "API description not readable");
    std::stringstream ss;
    ss << in.rdbuf();
    return {200, "application/json", ss.str()};
  }

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::lock_guard lk(map_mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw session::NotFoundError("unknown session " + id);
    return it->second;
  }

  std::string next_id() {
    std::lock_guard lk(map_mu_);
    std::string id;
    do id = "s" + std::to_string(++session_counter_);
    while (sessions_.count(id) || (!opt_.data_dir.empty() && std::filesystem::exists(log_path(id))));
    return id;
  }

  std::string log_path(const std::string& id) const { return opt_.data_dir + "/" + id + ".jsonl"; }

  void load_persisted() {
    std::filesystem::create_directories(opt_.data_dir);
    for (const auto& f : std::filesystem::directory_iterator(opt_.data_dir)) {
      if (f.path().extension() != ".jsonl") continue;
      const auto id = f.path().stem().string();
      auto e = std::make_shared<Entry>();
      e->id = id;
      e->s.emplace(session::Session::replay(session::read_event_log(f.path().string()), true, opt_.clock,
                                            session::file_sink(f.path().string())));
      e->refresh();
      sessions_[id] = e;
    }
  }

  Options opt_;
  mutable std::mutex map_mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::size_t session_counter_ = 0;
  std::mutex jobs_mu_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::atomic<std::size_t> job_counter_{0};
};

}  // namespace dorplan::api
