#pragma once

#include <memory>
#include <string>

#include "gate.hpp"

namespace httplib {
class Server;
}

namespace ctxgate::app {

/// Routes: POST /classify, GET /healthz. The gate must outlive the server.
std::unique_ptr<httplib::Server> make_server(const ContextGate& gate);

/// Loads the checkpoint once and serves until stopped. bind is host:port.
int serve(const std::filesystem::path& checkpoint, const std::string& bind, std::ostream& err);

}  // namespace ctxgate::app
