#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>

#include "amble/artifacts.hpp"
#include "amble/evaluation.hpp"
#include "amble/geo_grid.hpp"
#include "amble/k_shortest.hpp"
#include "amble/perception.hpp"
#include "amble/route_engine.hpp"

namespace amble::service {

struct WorkspaceConfig {
    std::filesystem::path graph;
    std::filesystem::path fields;
    std::optional<std::filesystem::path> landmarks;
    perception::ScoringCurve curve = perception::ScoringCurve::Cubic;
    routing::ExplorationPolicy policy;
    std::string host = "127.0.0.1";
    int port = 8080;

    /// Relative artifact paths resolve against `base_dir`.
    static WorkspaceConfig from_json(const io::Json& doc, const std::filesystem::path& base_dir);
    static WorkspaceConfig load(const std::filesystem::path& path);
    /// AMBLE_HOST and AMBLE_PORT override host and port.
    void apply_env();
};

/// Loaded, cross-checked artifacts. Immutable after construction.
struct Workspace {
    geo::LocationGraph graph;
    routing::Digraph digraph;
    std::string fingerprint;
    io::FieldBundle fields;
    perception::ScoringCurve curve = perception::ScoringCurve::Cubic;
    routing::ExplorationPolicy policy;

    /// Throws FingerprintMismatch when the fields were built on another graph.
    static Workspace assemble(geo::LocationGraph graph, io::FieldBundle fields, perception::ScoringCurve curve,
                              const routing::ExplorationPolicy& policy);
    static Workspace load(const WorkspaceConfig& config);
};

struct HttpResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

using Query = std::map<std::string, std::string, std::less<>>;

/// Request handling without any transport; the HTTP server only forwards.
/// Every body is canonical JSON, so equal requests give equal bytes.
class RouteService {
public:
    explicit RouteService(Workspace workspace) : ws_(std::move(workspace)) {}

    HttpResponse handle(std::string_view path, const Query& query) const;

    HttpResponse health() const;
    HttpResponse cells(const Query& query) const;
    HttpResponse route(const Query& query) const;

    const Workspace& workspace() const { return ws_; }

private:
    Workspace ws_;
};

HttpResponse error_response(int status, std::string_view code, std::string_view message);

/// Blocks serving GET /health, /cells and /route until `stop` is requested.
/// Port 0 binds any free port; `on_listening` receives the bound port.
void serve(const RouteService& service, const std::string& host, int port, std::stop_token stop = {},
           const std::function<void(int)>& on_listening = {});

}  // namespace amble::service
