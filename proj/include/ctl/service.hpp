#pragma once

#include <json.hpp>

#include <cstddef>
#include <map>
#include <memory>
#include <string>

namespace ctl {

inline constexpr std::size_t kMaxRequestBytes = 1u << 20;

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

// Transport-free request handling; the HTTP server is a thin adapter over
// this, which keeps the routes testable without sockets.
ApiResponse dispatch(const std::string& method, const std::string& path,
                     const std::map<std::string, std::string>& query, const std::string& body);

// HTTP adapter over dispatch(). bind() then serve() on one thread, stop()
// from any other.
class HttpServer {
public:
    HttpServer();
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Port 0 picks a free port. Returns the bound port, or -1.
    int bind(const std::string& host, int port);
    void serve();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Blocks serving HTTP on `host:port` until stopped. Returns false when the
/// socket cannot be bound.
bool run_server(const std::string& host, int port);

/// CTL_BIND when set, else 127.0.0.1.
std::string default_bind_address();

} // namespace ctl
