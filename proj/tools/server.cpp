// dorplan-server: HTTP front end for the session service.
// No authentication; run behind a reverse proxy when exposed.

#include <CLI11.hpp>

// bodies sent without a content type are parsed as form data; keep them unbounded like JSON
#define CPPHTTPLIB_FORM_URL_ENCODED_PAYLOAD_MAX_LENGTH ((std::numeric_limits<size_t>::max)())
#include <httplib.h>

#include <iostream>
#include <limits>

#include "dorplan/api.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dorplan-server: session API over HTTP"};
  std::string host = "127.0.0.1";
  int port = 8080;
  dorplan::api::Options opt;
  long long async_ms = opt.async_after.count();
  opt.openapi_path = DORPLAN_DOCS_DIR "/openapi.json";
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  app.add_option("--data-dir", opt.data_dir, "Directory of persisted event logs");
  app.add_option("--openapi", opt.openapi_path, "OpenAPI document served at /openapi.json");
  app.add_option("--async-after-ms", async_ms, "Generate returns 202 after this wall time")
      ->check(CLI::NonNegativeNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  opt.async_after = std::chrono::milliseconds(async_ms);

  std::unique_ptr<dorplan::api::Service> service;
  try {
    service = std::make_unique<dorplan::api::Service>(opt);
  } catch (const std::exception& e) {
    std::cerr << "dorplan-server: cannot load sessions: " << e.what() << '\n';
    return 4;
  }

  httplib::Server http;
  auto handler = [&](const httplib::Request& req, httplib::Response& res) {
    const auto r = service->handle({req.method, req.path, req.body});
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  const char* any = R"(/.*)";
  http.Get(any, handler);
  http.Post(any, handler);
  http.Put(any, handler);
  http.Patch(any, handler);
  http.Delete(any, handler);

  std::cerr << "dorplan-server listening on " << host << ':' << port << '\n';
  if (!http.listen(host, port)) {
    std::cerr << "dorplan-server: cannot bind " << host << ':' << port << '\n';
    return 1;
  }
  return 0;
}
