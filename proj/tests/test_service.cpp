#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "service_fixture.hpp"

#include "amble/error.hpp"
#include "amble/service.hpp"
#include "amble/synth.hpp"

// After Eigen: resolv.h defines a _res macro that collides with Eigen internals.
#include "httplib.h"

using namespace amble;
using namespace amble::service;
using perception::Quality;

namespace {

using testing::service_fields;
using testing::service_graph;
using testing::service_policy;

const RouteService& shared_service() {
    static const RouteService svc(
        Workspace::assemble(service_graph(), service_fields(service_graph()), perception::ScoringCurve::Cubic,
                            service_policy()));
    return svc;
}

std::string at_cell(int id) { return testing::centroid_param(shared_service().workspace().graph, id); }

service::Query golden_query(const std::string& file) {
    for (const auto& r : testing::golden_route_requests(shared_service().workspace().graph)) {
        if (r.file == file) return r.query;
    }
    FAIL("no golden request " << file);
    return {};
}

io::Json body_of(const HttpResponse& r) { return io::Json::parse(r.body); }

// Set AMBLE_UPDATE_GOLDEN=1 to rewrite the golden files from the current output.
void check_golden(const std::string& name, const std::string& body) {
    const std::filesystem::path path = std::filesystem::path(AMBLE_SOURCE_DIR) / "tests" / "golden" / name;
    if (const char* update = std::getenv("AMBLE_UPDATE_GOLDEN"); update && std::string(update) == "1") {
        io::write_text_file(path, body);
    }
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in, "missing golden file " << path.string());
    std::stringstream expected;
    expected << in.rdbuf();
    CHECK_MESSAGE(expected.str() == body, "golden mismatch for " << name);
}

}  // namespace

TEST_CASE("route: quality=all gives the shortest path and one route per quality") {
    const HttpResponse r = shared_service().route(golden_query("route_all.json"));
    REQUIRE(r.status == 200);
    CHECK(r.content_type == "application/geo+json");
    const io::Json doc = body_of(r);
    CHECK(doc["type"] == "FeatureCollection");
    const io::Json& features = doc["features"];
    REQUIRE(features.size() == 4);
    const std::array<std::string, 4> labels = {"shortest", "beauty", "quiet", "happy"};
    const auto& ws = shared_service().workspace();
    const double shortest_len = features[0]["properties"]["length_m"].get<double>();
    for (std::size_t i = 0; i < 4; ++i) {
        const io::Json& props = features[i]["properties"];
        CHECK(props["quality"] == labels[i]);
        CHECK(features[i]["geometry"]["type"] == "LineString");
        const auto cells = props["cells"].get<std::vector<int>>();
        const io::Json& coords = features[i]["geometry"]["coordinates"];
        REQUIRE(coords.size() == cells.size());
        CHECK(cells.front() == 0);
        CHECK(cells.back() == 41);
        for (std::size_t k = 0; k < cells.size(); ++k) {
            CHECK(coords[k][0].get<double>() == ws.graph.cell(cells[k]).centroid.lon);
            CHECK(coords[k][1].get<double>() == ws.graph.cell(cells[k]).centroid.lat);
        }
        const double len = props["length_m"].get<double>();
        CHECK(len == doctest::Approx(routing::path_length(ws.graph, cells)));
        CHECK(props["walk_min"].get<double>() == doctest::Approx(len / 80.0));
        CHECK(len >= shortest_len - 1e-9);
        CHECK(props["delta_length_pct"].get<double>() == doctest::Approx(100.0 * (len - shortest_len) / shortest_len));
        CHECK(props["paths_explored"].get<std::int64_t>() >= 1);
        if (i > 0) {
            const double own = props["avg_rank"].get<double>();
            CHECK(own == doctest::Approx(props["avg_ranks"][labels[i]].get<double>()));
            // The recommended route never ranks worse than the shortest one on its own quality.
            CHECK(own <= features[0]["properties"]["avg_ranks"][labels[i]].get<double>() + 1e-12);
        } else {
            CHECK(props["avg_rank"].is_null());
        }
    }
    check_golden("route_all.json", r.body);
}

TEST_CASE("route: identical requests give identical bytes") {
    const Query q{{"from", at_cell(3)}, {"to", at_cell(38)}, {"quality", "beauty"}, {"curve", "sqrt"}};
    const HttpResponse a = shared_service().route(q);
    const HttpResponse b = shared_service().handle("/route", q);
    CHECK(a.status == 200);
    CHECK(a.body == b.body);
    const io::Json doc = body_of(a);
    CHECK(doc["features"].size() == 2);
    CHECK(doc["query"]["curve"] == "sqrt");
}

TEST_CASE("route: from and to in the same cell") {
    const HttpResponse r = shared_service().route(golden_query("route_degenerate.json"));
    REQUIRE(r.status == 200);
    const io::Json doc = body_of(r);
    REQUIRE(doc["features"].size() == 1);
    const io::Json& f = doc["features"][0];
    CHECK(f["geometry"]["type"] == "Point");
    CHECK(f["properties"]["length_m"] == 0.0);
    CHECK(f["properties"]["walk_min"] == 0.0);
    CHECK(f["properties"]["cells"] == io::Json::array({17}));
    check_golden("route_degenerate.json", r.body);
}

TEST_CASE("route: request errors") {
    const RouteService& svc = shared_service();
    const auto code = [&](const Query& q) {
        const HttpResponse r = svc.route(q);
        CHECK(r.status == 400);
        return body_of(r)["error"]["code"].get<std::string>();
    };
    const HttpResponse outside = svc.route(golden_query("route_out_of_bbox.json"));
    CHECK(outside.status == 400);
    check_golden("route_out_of_bbox.json", outside.body);

    CHECK(code({{"from", at_cell(0)}, {"to", "52.0,-0.13"}}) == "OUT_OF_BBOX");
    CHECK(code({{"from", at_cell(0)}, {"to", at_cell(5)}, {"quality", "loud"}}) == "BAD_QUALITY");
    CHECK(code({{"from", at_cell(0)}, {"to", at_cell(5)}, {"curve", "quartic"}}) == "BAD_CURVE");
    CHECK(code({{"from", "51.5;-0.13"}, {"to", at_cell(5)}}) == "BAD_COORDINATES");
    CHECK(code({{"from", "51.5,west"}, {"to", at_cell(5)}}) == "BAD_COORDINATES");
    CHECK(code({{"to", at_cell(5)}}) == "MISSING_PARAMETER");
    CHECK(code({{"from", at_cell(0)}, {"to", at_cell(5)}, {"simple", "yes"}}) == "BAD_PARAMETER");

    const HttpResponse missing = svc.handle("/nowhere", {});
    CHECK(missing.status == 404);
    CHECK(body_of(missing)["error"]["code"] == "NOT_FOUND");
}

TEST_CASE("route: quality=shortest and simple routes") {
    const RouteService& svc = shared_service();
    const io::Json only = body_of(svc.route({{"from", at_cell(0)}, {"to", at_cell(41)}, {"quality", "shortest"}}));
    CHECK(only["features"].size() == 1);
    const io::Json simple = body_of(
        svc.route({{"from", at_cell(0)}, {"to", at_cell(41)}, {"quality", "all"}, {"simple", "true"}}));
    REQUIRE(simple["features"].size() == 4);
    for (const auto& f : simple["features"]) {
        auto cells = f["properties"]["cells"].get<std::vector<int>>();
        std::sort(cells.begin(), cells.end());
        CHECK(std::adjacent_find(cells.begin(), cells.end()) == cells.end());
    }
}

TEST_CASE("route: a workspace without a quality reports it as unavailable") {
    const auto g = service_graph();
    io::FieldBundle b = service_fields(g);
    b.fields.resize(1);
    const RouteService svc(Workspace::assemble(g, b, perception::ScoringCurve::Cubic, service_policy()));
    const HttpResponse r = svc.route({{"from", at_cell(0)}, {"to", at_cell(9)}, {"quality", "happy"}});
    CHECK(r.status == 400);
    CHECK(body_of(r)["error"]["code"] == "QUALITY_UNAVAILABLE");
    CHECK(body_of(svc.route({{"from", at_cell(0)}, {"to", at_cell(9)}}))["features"].size() == 2);
}

TEST_CASE("cells: one closed polygon per cell; the curve changes prob, not rank") {
    const RouteService& svc = shared_service();
    const HttpResponse cubic = svc.cells({{"quality", "quiet"}});
    const HttpResponse sig = svc.cells({{"quality", "quiet"}, {"curve", "sigmoid"}});
    REQUIRE(cubic.status == 200);
    const io::Json a = body_of(cubic);
    const io::Json b = body_of(sig);
    const auto& ws = svc.workspace();
    REQUIRE(a["features"].size() == static_cast<std::size_t>(ws.graph.size()));
    double max_prob = 0.0;
    for (std::size_t i = 0; i < a["features"].size(); ++i) {
        const io::Json& ring = a["features"][i]["geometry"]["coordinates"][0];
        CHECK(ring.size() == 5);
        CHECK(ring.front() == ring.back());
        const geo::LatLon c = ws.graph.cell(static_cast<int>(i)).centroid;
        CHECK(ring[0][0].get<double>() < c.lon);
        CHECK(ring[2][0].get<double>() > c.lon);
        CHECK(ring[0][1].get<double>() < c.lat);
        CHECK(ring[2][1].get<double>() > c.lat);
        const io::Json& pa = a["features"][i]["properties"];
        const io::Json& pb = b["features"][i]["properties"];
        CHECK(pa["rank"] == pb["rank"]);
        CHECK(pa["score"] == pb["score"]);
        max_prob = std::max(max_prob, pa["prob"].get<double>());
    }
    CHECK(max_prob == 1.0);
    CHECK(a["features"] != b["features"]);
    CHECK(svc.cells({{"quality", "noisy"}}).status == 400);
}

TEST_CASE("health reports the graph fingerprint") {
    const io::Json h = body_of(shared_service().health());
    CHECK(h["status"] == "ok");
    CHECK(h["graph_fingerprint"] == io::graph_fingerprint(service_graph()));
}

TEST_CASE("workspace: mismatched artifacts are refused before serving") {
    const auto g = service_graph();
    const auto other = testing::london_grid(7, 6);
    CHECK_THROWS_AS(Workspace::assemble(other, service_fields(g), perception::ScoringCurve::Cubic, service_policy()),
                    Error);
    try {
        Workspace::assemble(other, service_fields(g), perception::ScoringCurve::Cubic, service_policy());
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::FingerprintMismatch);
    }

    const auto dir = std::filesystem::temp_directory_path() / "amble_test_workspace";
    std::filesystem::create_directories(dir);
    io::write_text_file(dir / "graph.json", io::canonical(io::graph_to_json(other)));
    io::write_text_file(dir / "fields.json", io::canonical(io::fields_to_json(service_fields(g))));
    io::write_text_file(dir / "workspace.json",
                        R"({"schema_version": 1, "graph": "graph.json", "fields": "fields.json", "curve": "linear",
                            "policy": {"m_max": 500}, "port": 9123})");
    const WorkspaceConfig cfg = WorkspaceConfig::load(dir / "workspace.json");
    CHECK(cfg.graph == dir / "graph.json");
    CHECK(cfg.curve == perception::ScoringCurve::Linear);
    CHECK(cfg.policy.m_max == 500);
    CHECK(cfg.port == 9123);
    try {
        Workspace::load(cfg);
        FAIL("expected a fingerprint mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::FingerprintMismatch);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("serve: live HTTP round trip matches the in-process handler") {
    const RouteService& svc = shared_service();
    std::promise<int> ready;
    auto port_future = ready.get_future();
    std::jthread server([&](std::stop_token stop) {
        serve(svc, "127.0.0.1", 0, stop, [&](int port) { ready.set_value(port); });
    });
    const int port = port_future.get();
    REQUIRE(port > 0);

    httplib::Client client("127.0.0.1", port);
    const Query q{{"from", at_cell(0)}, {"to", at_cell(41)}, {"quality", "all"}};
    const std::string path = "/route?" + httplib::detail::params_to_query_str({q.begin(), q.end()});
    const auto res = client.Get(path);
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == svc.route(q).body);
    CHECK(res->get_header_value("Content-Type") == "application/geo+json");

    const auto bad = client.Get("/route?from=0,0&to=0,0");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    const auto none = client.Get("/missing");
    REQUIRE(none);
    CHECK(none->status == 404);
    CHECK(io::Json::parse(none->body)["error"]["code"] == "NOT_FOUND");
    const auto health = client.Get("/health");
    REQUIRE(health);
    CHECK(health->body == svc.health().body);
    server.request_stop();
}
