#include "ctl/service.hpp"

#include "ctl/error.hpp"
#include "ctl/scenario.hpp"

#include <httplib.h>

#include <cstdlib>
#include <iostream>

namespace ctl {

using nlohmann::json;

namespace {

json error_body(ErrorCode code, const std::string& message, const std::string& field) {
    json e{{"code", to_string(code)}, {"message", message}};
    if (!field.empty()) e["field"] = field;
    return {{"error", std::move(e)}};
}

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::NoCrossing:
        case ErrorCode::NonMonotone: return 422;
        case ErrorCode::Internal:    return 500;
        default:                     return 400;
    }
}

ApiResponse evaluate_route(const std::string& body, const std::map<std::string, std::string>& query) {
    const Scenario sc = parse_scenario(body);
    const auto it = query.find("rulesets");
    const Registry reg = it != query.end() ? selected_registry(it->second, builtin_registry())
                                           : selected_registry(sc, builtin_registry());
    return {200, verdicts_to_json(evaluate_all(sc.lineage, sc.subject, reg, sc.scaling))};
}

ApiResponse sweep_route(const std::string& body) {
    const Scenario sc = parse_scenario(body);
    const Registry reg = selected_registry(sc, builtin_registry());
    return {200, sweep_to_json(sweep(sc, reg, sc.scaling))};
}

// The rule set comes from ?ruleset=, or from the scenario when it selects
// exactly one.
ApiResponse crossing_route(const std::string& body, const std::map<std::string, std::string>& query) {
    const Scenario sc = parse_scenario(body);
    const Registry reg = selected_registry(sc, builtin_registry());
    const Ruleset* rs = nullptr;
    if (auto it = query.find("ruleset"); it != query.end()) {
        rs = reg.find(it->second);
        if (rs == nullptr) rs = builtin_registry().find(it->second);
        if (rs == nullptr) throw Error(ErrorCode::SchemaError, "unknown rule set '" + it->second + "'", "ruleset");
    } else if (sc.rulesets && reg.all().size() == 1) {
        rs = &reg.all().front();
    } else {
        throw Error(ErrorCode::SchemaError, "name one rule set with ?ruleset= or select exactly one in the scenario",
                    "ruleset");
    }
    double tol = 1e-3;
    if (auto it = query.find("tol_ooms"); it != query.end()) {
        try {
            tol = std::stod(it->second);
        } catch (const std::exception&) {
            throw Error(ErrorCode::SchemaError, "tol_ooms must be a number", "tol_ooms");
        }
    }
    const ComputeAmount x = find_crossing(sc, *rs, sc.scaling, tol);
    return {200,
            {{"ruleset", rs->id},
             {"target", sc.sweep->target},
             {"tolerance_ooms", tol},
             {"crossing", {{"flop", x.to_string()}, {"log10", x.log10()}, {"decimal", x.to_decimal()}}}}};
}

ApiResponse rulesets_route() {
    json out = json::array();
    for (const auto& r : builtin_registry().all()) {
        json j = ruleset_to_json(r);
        json lines = json::array();
        for (const auto& l : threshold_lines(r)) {
            lines.push_back({{"label", l.label},
                             {"comparator", l.comparator},
                             {"compute", l.compute.to_decimal()},
                             {"cost_usd", l.cost ? json(l.cost->usd()) : json(nullptr)}});
        }
        j["effective_thresholds"] = std::move(lines);
        out.push_back(std::move(j));
    }
    return {200, {{"rulesets", std::move(out)}}};
}

ApiResponse defaults_route() {
    json j = scaling_to_json(ScalingConfig{});
    j["sampling_preset"] = scaling_to_json(sampling_anchor_preset());
    j["max_sweep_steps"] = kMaxSweepSteps;
    return {200, std::move(j)};
}

} // namespace

ApiResponse dispatch(const std::string& method, const std::string& path,
                     const std::map<std::string, std::string>& query, const std::string& body) {
    try {
        const bool post = method == "POST";
        const bool get = method == "GET";
        if (path == "/api/evaluate" || path == "/api/sweep" || path == "/api/crossing") {
            if (!post) return {405, error_body(ErrorCode::SchemaError, "use POST", "")};
            if (body.size() > kMaxRequestBytes) {
                return {413, error_body(ErrorCode::SchemaError, "request body exceeds 1 MiB", "")};
            }
            if (path == "/api/evaluate") return evaluate_route(body, query);
            if (path == "/api/sweep") return sweep_route(body);
            return crossing_route(body, query);
        }
        if (path == "/api/rulesets" || path == "/api/defaults") {
            if (!get) return {405, error_body(ErrorCode::SchemaError, "use GET", "")};
            return path == "/api/rulesets" ? rulesets_route() : defaults_route();
        }
        return {404, error_body(ErrorCode::SchemaError, "no route " + path, "")};
    } catch (const Error& e) {
        const int status = status_for(e.code());
        if (status == 500) return {500, {{"error", {{"code", to_string(e.code())}}}}};
        return {status, error_body(e.code(), e.what(), e.field())};
    } catch (const std::exception&) {
        return {500, {{"error", {{"code", to_string(ErrorCode::Internal)}}}}};
    }
}

std::string default_bind_address() {
    const char* env = std::getenv("CTL_BIND");
    return env != nullptr && *env != '\0' ? env : "127.0.0.1";
}

struct HttpServer::Impl {
    httplib::Server server;
};

HttpServer::HttpServer() : impl_(std::make_unique<Impl>()) {
    auto& server = impl_->server;
    server.set_payload_max_length(kMaxRequestBytes);
    auto handle = [](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> query;
        for (const auto& [k, v] : req.params) query.emplace(k, v);
        const ApiResponse r = dispatch(req.method, req.path, query, req.body);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.Get(R"(/api/.*)", handle);
    server.Post(R"(/api/.*)", handle);
    // httplib answers oversized bodies itself; give them the same error shape.
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.status == 413) {
            res.set_content(error_body(ErrorCode::SchemaError, "request body exceeds 1 MiB", "").dump(),
                            "application/json");
        }
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}

bool run_server(const std::string& host, int port) {
    HttpServer server;
    const int bound = server.bind(host, port);
    if (bound < 0) return false;
    std::cerr << "ctl: listening on " << host << ":" << bound << "\n";
    server.serve();
    return true;
}

} // namespace ctl
