#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "charonette/error.hpp"
#include "charonette/workspace.hpp"

namespace charonette {

// HTTP status for each error code.
int http_status(ErrorCode code);

// {"status", "code", "message", "field"}; field is null when absent.
nlohmann::json error_body(const Error& error);

struct ApiConfig {
  // When non-empty, every route except /api/v1/health requires
  // "Authorization: Bearer <token>".
  std::string token;
  // Optional directory of UI assets served at "/".
  std::filesystem::path static_dir;
};

/// JSON-over-HTTP adapter for a Workspace under /api/v1. Mutating routes
/// take the expected document revision from an If-Match header or a
/// "revision" body field and answer with the new one (also as ETag).
class ApiServer {
 public:
  ApiServer(Workspace& workspace, ApiConfig config = {});
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Blocks until stop(). Returns false when the address cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port for tests; serve with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace charonette
