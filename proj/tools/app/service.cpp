#include "service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <ostream>

#include "commands.hpp"

namespace ctxgate::app {

std::unique_ptr<httplib::Server> make_server(const ContextGate& gate) {
  auto server = std::make_unique<httplib::Server>();
  // httplib defaults to SO_REUSEPORT, which lets a second instance silently
  // share a busy port. Plain SO_REUSEADDR makes that a bind failure.
  server->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  server->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.status = 200;
    res.set_content("ok", "text/plain");
  });
  server->Post("/classify", [&gate](const httplib::Request& req, httplib::Response& res) {
    auto parsed = parse_classify_request(req.body);
    if (!parsed.request) {
      spdlog::debug("rejected /classify: {}", parsed.error);
      res.status = 400;
      res.set_content(parsed.error, "text/plain");
      return;
    }
    try {
      res.status = 200;
      res.set_content(to_json(gate.classify(parsed.request->turns)), "application/json");
    } catch (const std::exception& e) {
      spdlog::error("/classify failed: {}", e.what());
      res.status = 500;
      res.set_content(e.what(), "text/plain");
    }
  });
  return server;
}

int serve(const std::filesystem::path& checkpoint, const std::string& bind, std::ostream& err) {
  const auto colon = bind.rfind(':');
  int port = -1;
  if (colon != std::string::npos) {
    try {
      port = std::stoi(bind.substr(colon + 1));
    } catch (const std::exception&) {
    }
  }
  if (port < 0 || port > 65535) {
    err << "serve: bind address must be host:port, got '" << bind << "'\n";
    return kExitUsage;
  }
  const std::string host = bind.substr(0, colon);
  try {
    const auto gate = ContextGate::open(checkpoint);
    auto server = make_server(gate);
    if (!server->bind_to_port(host, port)) {
      err << "serve: cannot bind " << bind << "\n";
      return kExitFailure;
    }
    spdlog::info("serving model {} on {}", gate.model_id(), bind);
    server->listen_after_bind();
    return kExitOk;
  } catch (const std::exception& e) {
    err << "serve: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace ctxgate::app
