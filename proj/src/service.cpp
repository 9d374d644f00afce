#include "amble/service.hpp"

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "httplib.h"

#include "amble/error.hpp"

namespace amble::service {

namespace {

using perception::Quality;

void read_policy(const io::Json& doc, routing::ExplorationPolicy& policy) {
    if (doc.contains("m_max")) policy.m_max = doc["m_max"].get<std::int64_t>();
    if (doc.contains("batch_size")) policy.batch_size = doc["batch_size"].get<std::int64_t>();
    if (doc.contains("epsilon")) policy.epsilon = doc["epsilon"].get<double>();
    if (doc.contains("mvt_enabled")) policy.mvt_enabled = doc["mvt_enabled"].get<bool>();
    if (doc.contains("simple_paths_only")) policy.simple_paths_only = doc["simple_paths_only"].get<bool>();
}

std::optional<geo::LatLon> parse_lat_lon(std::string_view text) {
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) return std::nullopt;
    const auto number = [](std::string_view s) -> std::optional<double> {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
        return v;
    };
    const auto lat = number(text.substr(0, comma));
    const auto lon = number(text.substr(comma + 1));
    if (!lat || !lon) return std::nullopt;
    return geo::LatLon{*lat, *lon};
}

std::string_view param(const Query& q, std::string_view key, std::string_view fallback = {}) {
    const auto it = q.find(key);
    return it == q.end() ? fallback : std::string_view(it->second);
}

HttpResponse json_response(const io::Json& doc) { return {200, io::canonical(doc), "application/geo+json"}; }

io::Json lon_lat(const geo::LatLon& p) { return io::Json::array({p.lon, p.lat}); }

/// Request failure carrying an HTTP status and a machine-readable code.
struct BadRequest {
    int status;
    std::string code;
    std::string message;
};

struct RouteRequest {
    int from_cell = 0;
    int to_cell = 0;
    std::vector<Quality> qualities;
    std::string quality_label;
    perception::ScoringCurve curve = perception::ScoringCurve::Cubic;
    bool simple = false;
};

int locate(const geo::LocationGraph& graph, const Query& query, std::string_view key) {
    const std::string_view text = param(query, key);
    if (text.empty()) throw BadRequest{400, "MISSING_PARAMETER", "query parameter '" + std::string(key) + "' is required"};
    const auto p = parse_lat_lon(text);
    if (!p) {
        throw BadRequest{400, "BAD_COORDINATES", "'" + std::string(key) + "' must be 'lat,lon'"};
    }
    try {
        return geo::cell_of(graph, *p);
    } catch (const Error& e) {
        throw BadRequest{400, std::string(to_string(ErrorCode::OutOfBounds)),
                         std::string(key) + " point lies outside the service area"};
    }
}

perception::ScoringCurve curve_param(const Query& query, perception::ScoringCurve fallback) {
    const std::string_view text = param(query, "curve");
    if (text.empty()) return fallback;
    const auto c = perception::parse_curve(text);
    if (!c) throw BadRequest{400, "BAD_CURVE", "curve must be linear|cubic|exponential|sqrt|sigmoid"};
    return *c;
}

const perception::QualityField& field_or_throw(const io::FieldBundle& bundle, Quality q) {
    const perception::QualityField* f = bundle.find(q);
    if (!f) {
        throw BadRequest{400, "QUALITY_UNAVAILABLE",
                         "no " + std::string(perception::to_string(q)) + " field in this workspace"};
    }
    return *f;
}

}  // namespace

WorkspaceConfig WorkspaceConfig::from_json(const io::Json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object() || doc.value("schema_version", 0) != io::kSchemaVersion) {
        throw Error(ErrorCode::Parse, "workspace config needs schema_version 1");
    }
    WorkspaceConfig cfg;
    const auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    try {
        cfg.graph = resolve(doc.at("graph").get<std::string>());
        cfg.fields = resolve(doc.at("fields").get<std::string>());
        if (doc.contains("landmarks")) cfg.landmarks = resolve(doc["landmarks"].get<std::string>());
        if (doc.contains("curve")) {
            const auto c = perception::parse_curve(doc["curve"].get<std::string>());
            if (!c) throw Error(ErrorCode::Parse, "workspace config: unknown curve");
            cfg.curve = *c;
        }
        if (doc.contains("policy")) read_policy(doc["policy"], cfg.policy);
        cfg.host = doc.value("host", cfg.host);
        cfg.port = doc.value("port", cfg.port);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("workspace config: ") + e.what());
    }
    cfg.policy.validate();
    return cfg;
}

WorkspaceConfig WorkspaceConfig::load(const std::filesystem::path& path) {
    return from_json(io::read_json_file(path), path.parent_path());
}

void WorkspaceConfig::apply_env() {
    if (const char* h = std::getenv("AMBLE_HOST"); h && *h) host = h;
    if (const char* p = std::getenv("AMBLE_PORT"); p && *p) {
        int v = 0;
        const std::string_view s(p);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || v < 1 || v > 65535) {
            throw Error(ErrorCode::InvalidArgument, "AMBLE_PORT must be a port number");
        }
        port = v;
    }
}

Workspace Workspace::assemble(geo::LocationGraph graph, io::FieldBundle fields, perception::ScoringCurve curve,
                              const routing::ExplorationPolicy& policy) {
    io::check_bundle(fields, graph);
    if (fields.fields.empty()) throw Error(ErrorCode::InvalidArgument, "workspace has no quality fields");
    policy.validate();
    Workspace ws;
    ws.fingerprint = io::graph_fingerprint(graph);
    ws.digraph = routing::Digraph::from_location_graph(graph);
    ws.graph = std::move(graph);
    ws.fields = std::move(fields);
    ws.curve = curve;
    ws.policy = policy;
    return ws;
}

Workspace Workspace::load(const WorkspaceConfig& config) {
    return assemble(io::graph_from_json(io::read_json_file(config.graph)),
                    io::fields_from_json(io::read_json_file(config.fields)), config.curve, config.policy);
}

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
    const io::Json doc = {{"error", {{"code", code}, {"message", message}}}};
    return {status, io::canonical(doc), "application/json"};
}

HttpResponse RouteService::handle(std::string_view path, const Query& query) const {
    if (path == "/health") return health();
    if (path == "/cells") return cells(query);
    if (path == "/route") return route(query);
    return error_response(404, "NOT_FOUND", "unknown endpoint " + std::string(path));
}

HttpResponse RouteService::health() const {
    io::Json qualities = io::Json::array();
    for (const auto& f : ws_.fields.fields) qualities.push_back(perception::to_string(f.quality));
    const io::Json doc = {{"status", "ok"},
                          {"graph_fingerprint", ws_.fingerprint},
                          {"cells", ws_.graph.size()},
                          {"qualities", qualities}};
    return {200, io::canonical(doc), "application/json"};
}

HttpResponse RouteService::cells(const Query& query) const {
    try {
        const std::string_view qtext = param(query, "quality", "beauty");
        const auto q = perception::parse_quality(qtext);
        if (!q) throw BadRequest{400, "BAD_QUALITY", "quality must be beauty|quiet|happy"};
        const perception::ScoringCurve curve = curve_param(query, ws_.curve);
        const perception::QualityField& stored = field_or_throw(ws_.fields, *q);
        const perception::QualityField field =
            stored.curve == curve ? stored : perception::with_curve(stored, curve);

        const geo::GridSpec& spec = ws_.graph.spec();
        io::Json features = io::Json::array();
        for (const geo::Cell& c : ws_.graph.cells()) {
            const double x0 = c.col * spec.cell_size_m;
            const double y0 = c.row * spec.cell_size_m;
            const double x1 = x0 + spec.cell_size_m;
            const double y1 = y0 + spec.cell_size_m;
            io::Json ring = io::Json::array();
            for (const auto& [x, y] : {std::pair{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}) {
                ring.push_back(lon_lat(geo::unproject(spec.bbox, {x, y})));
            }
            const auto i = static_cast<std::size_t>(c.id);
            features.push_back({{"type", "Feature"},
                                {"geometry", {{"type", "Polygon"}, {"coordinates", io::Json::array({ring})}}},
                                {"properties",
                                 {{"id", c.id},
                                  {"row", c.row},
                                  {"col", c.col},
                                  {"score", field.raw[i]},
                                  {"prob", field.prob[i]},
                                  {"rank", field.rank[i]}}}});
        }
        return json_response({{"type", "FeatureCollection"},
                              {"quality", perception::to_string(*q)},
                              {"curve", perception::to_string(curve)},
                              {"features", std::move(features)}});
    } catch (const BadRequest& e) {
        return error_response(e.status, e.code, e.message);
    }
}

HttpResponse RouteService::route(const Query& query) const {
    try {
        RouteRequest req;
        req.from_cell = locate(ws_.graph, query, "from");
        req.to_cell = locate(ws_.graph, query, "to");
        req.quality_label = std::string(param(query, "quality", "all"));
        if (req.quality_label == "all") {
            for (const auto& f : ws_.fields.fields) req.qualities.push_back(f.quality);
        } else if (req.quality_label == "shortest") {
        } else if (const auto q = perception::parse_quality(req.quality_label)) {
            req.qualities.push_back(*q);
            req.quality_label = perception::to_string(*q);
        } else {
            throw BadRequest{400, "BAD_QUALITY", "quality must be beauty|quiet|happy|shortest|all"};
        }
        req.curve = curve_param(query, ws_.curve);
        const std::string_view simple = param(query, "simple", "false");
        if (simple != "true" && simple != "false") {
            throw BadRequest{400, "BAD_PARAMETER", "simple must be true or false"};
        }
        req.simple = simple == "true";

        std::vector<perception::QualityField> fields;
        for (const auto& stored : ws_.fields.fields) {
            fields.push_back(stored.curve == req.curve ? stored : perception::with_curve(stored, req.curve));
        }
        for (Quality q : req.qualities) field_or_throw(ws_.fields, q);

        const auto per_quality = [&](std::span<const int> cells) {
            io::Json ranks = io::Json::object();
            io::Json scores = io::Json::object();
            io::Json probs = io::Json::object();
            for (const auto& f : fields) {
                double r = 0.0;
                double s = 0.0;
                double p = 0.0;
                for (int c : cells) {
                    const auto i = static_cast<std::size_t>(c);
                    r += f.rank[i];
                    s += f.raw[i];
                    p += f.prob[i];
                }
                const double n = static_cast<double>(cells.size());
                const std::string key(perception::to_string(f.quality));
                ranks[key] = r / n;
                scores[key] = s / n;
                probs[key] = p / n;
            }
            return std::tuple{ranks, scores, probs};
        };
        const auto line = [&](std::span<const int> cells) {
            io::Json coords = io::Json::array();
            for (int c : cells) coords.push_back(lon_lat(ws_.graph.cell(c).centroid));
            return coords;
        };

        io::Json features = io::Json::array();
        const io::Json query_echo = {{"from_cell", req.from_cell},
                                     {"to_cell", req.to_cell},
                                     {"quality", req.quality_label},
                                     {"curve", perception::to_string(req.curve)},
                                     {"simple", req.simple}};

        if (req.from_cell == req.to_cell) {
            const std::vector<int> cells{req.from_cell};
            auto [ranks, scores, probs] = per_quality(cells);
            features.push_back({{"type", "Feature"},
                                {"geometry", {{"type", "Point"}, {"coordinates", lon_lat(ws_.graph.cell(req.from_cell).centroid)}}},
                                {"properties",
                                 {{"quality", "shortest"},
                                  {"cells", cells},
                                  {"length_m", 0.0},
                                  {"walk_min", 0.0},
                                  {"avg_rank", nullptr},
                                  {"avg_ranks", ranks},
                                  {"mean_scores", scores},
                                  {"mean_probs", probs},
                                  {"delta_length_pct", 0.0},
                                  {"paths_explored", 1}}}});
            return json_response({{"type", "FeatureCollection"}, {"query", query_echo}, {"features", features}});
        }

        const routing::PathCandidate sp = routing::shortest_path(ws_.graph, req.from_cell, req.to_cell);
        const auto feature = [&](std::string_view label, const std::vector<int>& cells, double length_m,
                                 std::optional<double> avg_rank, std::int64_t explored) {
            auto [ranks, scores, probs] = per_quality(cells);
            return io::Json{{"type", "Feature"},
                            {"geometry", {{"type", "LineString"}, {"coordinates", line(cells)}}},
                            {"properties",
                             {{"quality", label},
                              {"cells", cells},
                              {"length_m", length_m},
                              {"walk_min", length_m / geo::kWalkingSpeedMPerMin},
                              {"avg_rank", avg_rank ? io::Json(*avg_rank) : io::Json(nullptr)},
                              {"avg_ranks", ranks},
                              {"mean_scores", scores},
                              {"mean_probs", probs},
                              {"delta_length_pct", 100.0 * (length_m - sp.length_m) / sp.length_m},
                              {"paths_explored", explored}}}};
        };
        features.push_back(feature("shortest", sp.cells, sp.length_m, std::nullopt, 1));

        routing::ExplorationPolicy policy = ws_.policy;
        policy.simple_paths_only = policy.simple_paths_only || req.simple;
        for (Quality q : req.qualities) {
            const perception::QualityField& f = field_or_throw(ws_.fields, q);
            const routing::RoutePlan plan =
                routing::best_pleasant_path(ws_.graph, ws_.digraph, f.rank, req.from_cell, req.to_cell, policy, q);
            features.push_back(feature(perception::to_string(q), plan.path.cells, plan.path.length_m,
                                       plan.path.avg_rank, plan.paths_explored));
        }
        return json_response({{"type", "FeatureCollection"}, {"query", query_echo}, {"features", features}});
    } catch (const BadRequest& e) {
        return error_response(e.status, e.code, e.message);
    } catch (const Error& e) {
        const bool internal = e.code() == ErrorCode::Internal;
        return error_response(internal ? 500 : 400, to_string(e.code()), e.what());
    }
}

void serve(const RouteService& service, const std::string& host, int port, std::stop_token stop,
           const std::function<void(int)>& on_listening) {
    httplib::Server server;
    const auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
        Query query;
        for (const auto& [k, v] : req.params) query.emplace(k, v);
        const HttpResponse r = service.handle(req.path, query);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server.Get("/health", forward);
    server.Get("/cells", forward);
    server.Get("/route", forward);
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (res.status == 404) {
            const HttpResponse r = error_response(404, "NOT_FOUND", "unknown endpoint " + req.path);
            res.set_content(r.body, r.content_type);
        }
    });
    const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (bound <= 0) throw Error(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
    std::cerr << "serving graph " << service.workspace().fingerprint << " on http://" << host << ':' << bound << "\n";
    if (on_listening) on_listening(bound);
    // The watcher waits for the accept loop before stopping it, so an early stop is not lost.
    std::jthread watcher([&server, stop](std::stop_token self) {
        while (!stop.stop_requested() && !self.stop_requested()) {
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        if (stop.stop_requested()) {
            server.wait_until_ready();
            server.stop();
        }
    });
    server.listen_after_bind();
}

}  // namespace amble::service
