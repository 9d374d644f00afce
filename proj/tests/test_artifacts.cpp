#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "grid_fixtures.hpp"

#include "amble/artifacts.hpp"
#include "amble/error.hpp"
#include "amble/synth.hpp"

using namespace amble;
using perception::Quality;

namespace {

ErrorCode code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected amble::Error");
    return ErrorCode::Internal;
}

io::FieldBundle bundle_for(const geo::LocationGraph& g) {
    const auto latent = synth::demo_latent(g.spec(), 3);
    io::FieldBundle b;
    b.graph_fingerprint = io::graph_fingerprint(g);
    b.fields.push_back(perception::make_quality_field(Quality::Happy, synth::sample_latent(g, latent[2])));
    b.fields.push_back(perception::make_quality_field(Quality::Beauty, synth::sample_latent(g, latent[0]),
                                                      perception::ScoringCurve::Sigmoid));
    return b;
}

}  // namespace

TEST_CASE("graph JSON: byte-identical round trip") {
    const auto g = testing::london_grid(5, 6);
    const std::string text = io::canonical(io::graph_to_json(g));
    CHECK(text.back() == '\n');
    const geo::LocationGraph back = io::graph_from_json(io::Json::parse(text));
    CHECK(io::canonical(io::graph_to_json(back)) == text);
    CHECK(back.size() == g.size());
    CHECK(back.adjacency() == g.adjacency());
    CHECK(io::graph_fingerprint(back) == io::graph_fingerprint(g));
}

TEST_CASE("graph fingerprint: 16 hex digits and sensitive to the grid") {
    const std::string a = io::graph_fingerprint(testing::london_grid(5, 6));
    CHECK(a.size() == 16);
    CHECK(a.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(a == io::graph_fingerprint(testing::london_grid(5, 6)));
    CHECK(a != io::graph_fingerprint(testing::london_grid(6, 5)));
    CHECK(a != io::graph_fingerprint(testing::london_grid(5, 7)));
}

TEST_CASE("graph JSON: schema and shape errors") {
    io::Json doc = io::graph_to_json(testing::london_grid(3, 3));
    CHECK(doc["kind"] == "graph");
    CHECK(doc["schema_version"] == 1);
    io::Json wrong = doc;
    wrong["schema_version"] = 2;
    CHECK(code_of([&] { io::graph_from_json(wrong); }) == ErrorCode::Parse);
    wrong = doc;
    wrong["kind"] = "fields";
    CHECK(code_of([&] { io::graph_from_json(wrong); }) == ErrorCode::Parse);
    wrong = doc;
    wrong["adjacency"][0][0]["to"] = 99;
    CHECK(code_of([&] { io::graph_from_json(wrong); }) == ErrorCode::Parse);
    CHECK(code_of([] { io::graph_from_json(io::Json::array()); }) == ErrorCode::Parse);
}

TEST_CASE("fields JSON: byte-identical round trip, sorted by quality") {
    const auto g = testing::london_grid(5, 6);
    const io::FieldBundle b = bundle_for(g);
    const std::string text = io::canonical(io::fields_to_json(b));
    const io::FieldBundle back = io::fields_from_json(io::Json::parse(text));
    CHECK(io::canonical(io::fields_to_json(back)) == text);
    REQUIRE(back.fields.size() == 2);
    CHECK(back.fields[0].quality == Quality::Beauty);
    CHECK(back.fields[1].quality == Quality::Happy);
    const perception::QualityField* beauty = back.find(Quality::Beauty);
    REQUIRE(beauty != nullptr);
    CHECK(beauty->curve == perception::ScoringCurve::Sigmoid);
    CHECK(beauty->raw == b.find(Quality::Beauty)->raw);
    CHECK(beauty->prob == b.find(Quality::Beauty)->prob);
    CHECK(beauty->rank == b.find(Quality::Beauty)->rank);
    CHECK(back.find(Quality::Quiet) == nullptr);
}

TEST_CASE("check_bundle: fields from another graph are refused") {
    const auto g = testing::london_grid(5, 6);
    const auto other = testing::london_grid(6, 5);
    const io::FieldBundle b = bundle_for(g);
    CHECK_NOTHROW(io::check_bundle(b, g));
    CHECK(code_of([&] { io::check_bundle(b, other); }) == ErrorCode::FingerprintMismatch);

    io::FieldBundle short_field = b;
    short_field.fields[0].raw.pop_back();
    CHECK(code_of([&] { io::check_bundle(short_field, g); }) != ErrorCode::FingerprintMismatch);
}

TEST_CASE("split_csv_record: RFC 4180 quoting") {
    using V = std::vector<std::string>;
    CHECK(io::split_csv_record("a,b,c") == V{"a", "b", "c"});
    CHECK(io::split_csv_record("a,,c,") == V{"a", "", "c", ""});
    CHECK(io::split_csv_record("\"x, y\",z") == V{"x, y", "z"});
    CHECK(io::split_csv_record("\"say \"\"hi\"\"\",1") == V{"say \"hi\"", "1"});
    CHECK(io::split_csv_record("a,b\r") == V{"a", "b"});
    CHECK(io::split_csv_record("") == V{""});
    CHECK(code_of([] { io::split_csv_record("\"open,1"); }) == ErrorCode::Parse);
}

TEST_CASE("CSV readers: header and field errors name the line") {
    std::istringstream bad_header("quality,a,b,outcome\nbeauty,s1,s2,a\n");
    CHECK(code_of([&] { io::read_votes(bad_header); }) == ErrorCode::Parse);
    std::istringstream empty("");
    CHECK(code_of([&] { io::read_votes(empty); }) == ErrorCode::Parse);

    std::istringstream bad_outcome("quality,scene_a,scene_b,outcome\nbeauty,s1,s2,a\nbeauty,s1,s2,maybe\n");
    try {
        io::read_votes(bad_outcome);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Parse);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::istringstream short_row("scene_id,lat,lon,source\ns1,51.5\n");
    CHECK(code_of([&] { io::read_scenes(short_row); }) == ErrorCode::Parse);
    std::istringstream bad_lat("scene_id,lat,lon,source\ns1,north,-0.1,geograph\n");
    CHECK(code_of([&] { io::read_scenes(bad_lat); }) == ErrorCode::Parse);
    std::istringstream header_only("quality,scene_a,scene_b,outcome\n");
    CHECK(io::read_votes(header_only).empty());
}

TEST_CASE("CSV writers and readers agree") {
    const std::vector<perception::VoteRecord> votes = {{Quality::Quiet, "s,1", "s2", perception::Outcome::A},
                                                       {Quality::Happy, "s\"3", "s4", perception::Outcome::Tie},
                                                       {Quality::Beauty, "s5", "s6", perception::Outcome::B}};
    std::stringstream vs;
    io::write_votes(vs, votes);
    const auto votes_back = io::read_votes(vs);
    REQUIRE(votes_back.size() == votes.size());
    for (std::size_t i = 0; i < votes.size(); ++i) {
        CHECK(votes_back[i].quality == votes[i].quality);
        CHECK(votes_back[i].scene_a == votes[i].scene_a);
        CHECK(votes_back[i].scene_b == votes[i].scene_b);
        CHECK(votes_back[i].outcome == votes[i].outcome);
    }

    const std::vector<perception::Scene> scenes = {{"a", {51.51234567, -0.12345678}, perception::SceneSource::Geograph},
                                                   {"b", {51.5, -0.1}, perception::SceneSource::StreetView}};
    std::stringstream ss;
    io::write_scenes(ss, scenes);
    const auto scenes_back = io::read_scenes(ss);
    REQUIRE(scenes_back.size() == 2);
    CHECK(scenes_back[0].location.lat == doctest::Approx(51.51234567).epsilon(1e-12));
    CHECK(scenes_back[1].source == perception::SceneSource::StreetView);

    flickr::PhotoMeta photo{"p1", {51.5, -0.1}, {"Big Ben", "sunny", "a,b"}, 120, 4, 2};
    std::stringstream ps;
    io::write_photos(ps, std::vector{photo});
    const auto photos_back = io::read_photos(ps);
    REQUIRE(photos_back.size() == 1);
    CHECK(photos_back[0].tags == photo.tags);
    CHECK(photos_back[0].n_views == 120);
    CHECK(photos_back[0].n_favorites == 4);
    CHECK(photos_back[0].n_comments == 2);
}

TEST_CASE("shipped landmarks: twenty distinct cells of the demo grid") {
    std::ifstream in(std::string(AMBLE_SOURCE_DIR) + "/data/landmarks.csv");
    REQUIRE(in);
    const auto shipped = io::read_landmarks(in);
    const auto builtin = synth::london_landmarks();
    REQUIRE(shipped.size() == builtin.size());
    for (std::size_t i = 0; i < shipped.size(); ++i) {
        CHECK(shipped[i].name == builtin[i].name);
        CHECK(shipped[i].location.lat == builtin[i].location.lat);
        CHECK(shipped[i].location.lon == builtin[i].location.lon);
    }
    const auto g = geo::build_graph(geo::build_grid(synth::london_bbox(), 200.0));
    CHECK(g.spec().rows == 19);
    CHECK(g.spec().cols == 28);
    CHECK(g.size() == 532);
    const auto set = evaluation::LandmarkSet::snap(g, shipped);
    std::set<int> cells;
    for (const auto& l : set.landmarks()) cells.insert(l.cell);
    CHECK(cells.size() == 20);
    CHECK(set.pairs().size() == 190);
}

TEST_CASE("shipped demo workspace: graph and fields agree") {
    const std::string dir = std::string(AMBLE_SOURCE_DIR) + "/data/demo/";
    const geo::LocationGraph g = io::graph_from_json(io::read_json_file(dir + "graph.json"));
    const io::FieldBundle b = io::fields_from_json(io::read_json_file(dir + "fields.json"));
    CHECK_NOTHROW(io::check_bundle(b, g));
    CHECK(b.fields.size() == 3);
    CHECK(code_of([&] { io::read_json_file(dir + "missing.json"); }) == ErrorCode::Io);
}
