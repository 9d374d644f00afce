#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "amble/artifacts.hpp"
#include "amble/error.hpp"
#include "amble/evaluation.hpp"
#include "amble/flickr_proxy.hpp"
#include "amble/geo_grid.hpp"
#include "amble/perception.hpp"
#include "amble/route_engine.hpp"
#include "amble/service.hpp"
#include "amble/synth.hpp"

namespace fs = std::filesystem;
using namespace amble;

namespace {

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
    return in;
}

template <class Writer, class Rows>
void write_csv(const fs::path& path, Writer writer, const Rows& rows) {
    std::ostringstream out;
    writer(out, rows);
    io::write_text_file(path, out.str());
}

perception::ScoringCurve curve_or_throw(const std::string& text) {
    const auto c = perception::parse_curve(text);
    if (!c) throw Error(ErrorCode::InvalidArgument, "unknown curve '" + text + "'");
    return *c;
}

struct GridArgs {
    std::vector<double> bbox;
    double cell = geo::kDefaultCellSizeM;
    fs::path out;
};

int run_build_grid(const GridArgs& a) {
    const geo::BoundingBox bbox{a.bbox[0], a.bbox[1], a.bbox[2], a.bbox[3]};
    const geo::LocationGraph graph = geo::build_graph(geo::build_grid(bbox, a.cell));
    io::write_text_file(a.out, io::canonical(io::graph_to_json(graph)));
    std::cerr << "grid " << graph.spec().rows << " x " << graph.spec().cols << " = " << graph.size()
              << " cells, fingerprint " << io::graph_fingerprint(graph) << "\n";
    return 0;
}

struct SynthArgs {
    fs::path graph;
    fs::path out_dir;
    std::uint64_t seed = 1;
    int photos_per_cell = synth::DemoOptions{}.photos_per_cell;
};

int run_synth(const SynthArgs& a) {
    const geo::LocationGraph graph = io::graph_from_json(io::read_json_file(a.graph));
    synth::DemoOptions opts;
    opts.photos_per_cell = a.photos_per_cell;
    const synth::DemoInputs in = synth::make_demo_inputs(graph, a.seed, opts);
    fs::create_directories(a.out_dir);
    write_csv(a.out_dir / "scenes.csv", io::write_scenes, in.scenes);
    write_csv(a.out_dir / "votes.csv", io::write_votes, in.votes);
    write_csv(a.out_dir / "photos.csv", io::write_photos, in.photos);
    std::cerr << in.scenes.size() << " scenes, " << in.votes.size() << " votes, " << in.photos.size()
              << " photos\n";
    return 0;
}

struct ScoreArgs {
    fs::path graph;
    fs::path votes;
    fs::path scenes;
    std::string curve = "cubic";
    std::string quality = "all";
    fs::path out;
};

int run_score(const ScoreArgs& a) {
    const geo::LocationGraph graph = io::graph_from_json(io::read_json_file(a.graph));
    const perception::ScoringCurve curve = curve_or_throw(a.curve);
    auto votes_in = open_input(a.votes);
    auto scenes_in = open_input(a.scenes);
    const auto votes = io::read_votes(votes_in);
    const auto scenes = io::read_scenes(scenes_in);

    std::vector<perception::Quality> qualities;
    if (a.quality == "all") {
        for (perception::Quality q : perception::kAllQualities) {
            const bool any = std::any_of(votes.begin(), votes.end(), [q](const auto& v) { return v.quality == q; });
            if (any) qualities.push_back(q);
        }
    } else if (const auto q = perception::parse_quality(a.quality)) {
        qualities.push_back(*q);
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown quality '" + a.quality + "'");
    }
    if (qualities.empty()) throw Error(ErrorCode::NoScoredScenes, "zero scored scenes");

    io::FieldBundle bundle;
    bundle.graph_fingerprint = io::graph_fingerprint(graph);
    for (perception::Quality q : qualities) {
        const perception::VoteAggregation agg = perception::aggregate_votes(votes, scenes, q);
        if (agg.scored_count() == 0) {
            throw Error(ErrorCode::NoScoredScenes,
                        "zero scored scenes for " + std::string(perception::to_string(q)));
        }
        const perception::CellInfill infill = perception::scenes_to_cells(graph, scenes, agg.scores);
        const auto observed = std::count(infill.observed.begin(), infill.observed.end(), true);
        std::cerr << perception::to_string(q) << ": " << agg.scored_count() << " scored scenes, " << agg.rejected
                  << " rejected votes, " << observed << "/" << graph.size() << " cells observed, "
                  << infill.scenes_outside_bbox << " scenes outside bbox\n";
        bundle.fields.push_back(perception::make_quality_field(q, infill.raw, curve));
    }
    io::write_text_file(a.out, io::canonical(io::fields_to_json(bundle)));
    return 0;
}

struct IngestArgs {
    fs::path graph;
    fs::path photos;
    fs::path lexicon;
    std::optional<fs::path> stopwords;
    std::optional<fs::path> merge;
    std::string curve = "cubic";
    fs::path out;
};

int run_ingest(const IngestArgs& a) {
    const geo::LocationGraph graph = io::graph_from_json(io::read_json_file(a.graph));
    auto photos_in = open_input(a.photos);
    auto lexicon_in = open_input(a.lexicon);
    const auto photos = io::read_photos(photos_in);
    const flickr::LiwcLexicon lexicon = flickr::LiwcLexicon::parse(lexicon_in);
    flickr::Stopwords stop;
    if (a.stopwords) {
        auto stop_in = open_input(*a.stopwords);
        stop = flickr::parse_stopwords(stop_in);
    }
    const flickr::BeautyProxy proxy =
        flickr::ingest_photos(graph, photos, lexicon, stop, flickr::BeautyModel{}, curve_or_throw(a.curve));
    std::cerr << photos.size() << " photos, " << proxy.photos_outside_bbox << " outside bbox, "
              << proxy.unclassified_tags << " unclassified tags, " << proxy.unpredictable_cells
              << " cells without photos (fallback " << proxy.fallback << ")\n";

    io::FieldBundle bundle;
    if (a.merge) {
        bundle = io::fields_from_json(io::read_json_file(*a.merge));
        io::check_bundle(bundle, graph);
        std::erase_if(bundle.fields, [](const auto& f) { return f.quality == perception::Quality::Beauty; });
    } else {
        bundle.graph_fingerprint = io::graph_fingerprint(graph);
    }
    bundle.fields.push_back(proxy.field);
    io::write_text_file(a.out, io::canonical(io::fields_to_json(bundle)));
    return 0;
}

struct RouteArgs {
    fs::path graph;
    fs::path fields;
    std::string from;
    std::string to;
    std::string quality = "all";
    std::optional<std::string> curve;
    std::int64_t m_max = routing::ExplorationPolicy{}.m_max;
    bool simple = false;
    bool no_mvt = false;
    std::optional<fs::path> out;
};

int run_route(const RouteArgs& a) {
    routing::ExplorationPolicy policy;
    policy.m_max = a.m_max;
    policy.mvt_enabled = !a.no_mvt;
    const service::RouteService svc(service::Workspace::assemble(
        io::graph_from_json(io::read_json_file(a.graph)), io::fields_from_json(io::read_json_file(a.fields)),
        a.curve ? curve_or_throw(*a.curve) : perception::ScoringCurve::Cubic, policy));
    service::Query q{{"from", a.from}, {"to", a.to}, {"quality", a.quality}, {"simple", a.simple ? "true" : "false"}};
    if (a.curve) q.emplace("curve", *a.curve);
    const service::HttpResponse r = svc.route(q);
    if (r.status != 200) {
        const auto err = io::Json::parse(r.body).at("error");
        std::cerr << "error: " << err.at("code").get<std::string>() << ": " << err.at("message").get<std::string>()
                  << "\n";
        return 1;
    }
    if (a.out) {
        io::write_text_file(*a.out, r.body);
    } else {
        std::cout << r.body;
    }
    return 0;
}

struct EvaluateArgs {
    fs::path graph;
    fs::path fields;
    fs::path landmarks;
    fs::path out;
    std::optional<fs::path> csv;
    std::int64_t m_max = routing::ExplorationPolicy{}.m_max;
    std::int64_t curve_m_max = 0;
    unsigned threads = 0;
};

int run_evaluate(const EvaluateArgs& a) {
    const geo::LocationGraph graph = io::graph_from_json(io::read_json_file(a.graph));
    const io::FieldBundle bundle = io::fields_from_json(io::read_json_file(a.fields));
    io::check_bundle(bundle, graph);
    evaluation::FieldSet fields;
    for (perception::Quality q : perception::kAllQualities) {
        const perception::QualityField* f = bundle.find(q);
        if (!f) {
            throw Error(ErrorCode::InvalidArgument,
                        "fields lack a " + std::string(perception::to_string(q)) + " field");
        }
        fields[evaluation::index_of(q)] = *f;
    }
    auto landmarks_in = open_input(a.landmarks);
    const auto landmarks = evaluation::LandmarkSet::snap(graph, io::read_landmarks(landmarks_in));

    routing::ExplorationPolicy policy;
    policy.m_max = a.m_max;
    const evaluation::ImprovementReport report =
        evaluation::improvement_matrix(graph, fields, landmarks, policy, a.threads);
    const evaluation::LengthTradeoff tradeoff = evaluation::length_tradeoff(report, graph.spec().cell_size_m);
    const auto correlations = evaluation::quality_correlations(fields);

    std::optional<evaluation::ExplorationCurve> curve;
    if (a.curve_m_max > 0) {
        std::vector<std::pair<int, int>> cell_pairs;
        for (const auto& [i, j] : landmarks.pairs()) {
            cell_pairs.emplace_back(landmarks.landmarks()[static_cast<std::size_t>(i)].cell,
                                    landmarks.landmarks()[static_cast<std::size_t>(j)].cell);
        }
        routing::ExplorationPolicy sweep;
        sweep.m_max = a.curve_m_max;
        sweep.mvt_enabled = false;
        curve = evaluation::exploration_curve(graph, fields[evaluation::index_of(perception::Quality::Beauty)],
                                              cell_pairs, sweep);
    }
    io::write_text_file(a.out, io::canonical(io::report_to_json(report, tradeoff, correlations, curve)));
    if (a.csv) io::write_text_file(*a.csv, io::report_to_csv(report));

    std::cerr << report.pairs.size() << " pairs, mean length overhead " << tradeoff.mean_delta_length_pct
              << "%, mean extra " << tradeoff.mean_extra_minutes << " min\n";
    for (perception::Quality q : perception::kAllQualities) {
        const auto& row = report.raw_pct[evaluation::index_of(q)];
        std::cerr << "  " << perception::to_string(q) << " route raw change %: " << row[0] << ' ' << row[1] << ' '
                  << row[2] << "\n";
    }
    return 0;
}

struct ServeArgs {
    fs::path workspace;
    std::optional<std::string> host;
    std::optional<int> port;
};

int run_serve(const ServeArgs& a) {
    service::WorkspaceConfig cfg = service::WorkspaceConfig::load(a.workspace);
    cfg.apply_env();
    if (a.host) cfg.host = *a.host;
    if (a.port) cfg.port = *a.port;
    const service::RouteService svc(service::Workspace::load(cfg));
    service::serve(svc, cfg.host, cfg.port);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"amble: pleasant walking routes over a city grid"};
    app.require_subcommand(1);
    std::uint64_t seed = 1;
    const auto add_seed = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Seed for synthetic data (routing is deterministic)");
    };
    int rc = 0;

    GridArgs grid;
    auto* c_grid = app.add_subcommand("build-grid", "Tile a bounding box into a cell graph");
    c_grid->add_option("--bbox", grid.bbox, "min_lat,min_lon,max_lat,max_lon")
        ->required()
        ->delimiter(',')
        ->expected(4);
    c_grid->add_option("--cell", grid.cell, "Cell edge in metres")->check(CLI::PositiveNumber);
    c_grid->add_option("--out", grid.out, "Graph JSON")->required();
    add_seed(c_grid);
    c_grid->callback([&] { rc = run_build_grid(grid); });

    SynthArgs syn;
    auto* c_syn = app.add_subcommand("synth", "Write seeded synthetic scenes, votes and photos for a graph");
    c_syn->add_option("--graph", syn.graph)->required();
    c_syn->add_option("--out-dir", syn.out_dir)->required();
    c_syn->add_option("--photos-per-cell", syn.photos_per_cell)->check(CLI::NonNegativeNumber);
    c_syn->add_option("--seed", syn.seed);
    c_syn->callback([&] { rc = run_synth(syn); });

    ScoreArgs score;
    auto* c_score = app.add_subcommand("score", "Turn pairwise votes into per-cell quality fields");
    c_score->add_option("--graph", score.graph)->required();
    c_score->add_option("--votes", score.votes)->required();
    c_score->add_option("--scenes", score.scenes)->required();
    c_score->add_option("--curve", score.curve, "linear|cubic|exponential|sqrt|sigmoid");
    c_score->add_option("--quality", score.quality, "beauty|quiet|happy|all");
    c_score->add_option("--out", score.out)->required();
    add_seed(c_score);
    c_score->callback([&] { rc = run_score(score); });

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest-photos", "Predict a beauty field from photo tags");
    c_ingest->add_option("--graph", ingest.graph)->required();
    c_ingest->add_option("--photos", ingest.photos)->required();
    c_ingest->add_option("--lexicon", ingest.lexicon, "category<TAB>pattern lines")->required();
    c_ingest->add_option("--stopwords", ingest.stopwords);
    c_ingest->add_option("--merge", ingest.merge, "Replace the beauty field of this bundle");
    c_ingest->add_option("--curve", ingest.curve);
    c_ingest->add_option("--out", ingest.out)->required();
    add_seed(c_ingest);
    c_ingest->callback([&] { rc = run_ingest(ingest); });

    RouteArgs route;
    auto* c_route = app.add_subcommand("route", "Shortest and pleasant routes as GeoJSON");
    c_route->add_option("--graph", route.graph)->required();
    c_route->add_option("--fields", route.fields)->required();
    c_route->add_option("--from", route.from, "lat,lon")->required();
    c_route->add_option("--to", route.to, "lat,lon")->required();
    c_route->add_option("--quality", route.quality, "beauty|quiet|happy|shortest|all");
    c_route->add_option("--curve", route.curve);
    c_route->add_option("--m-max", route.m_max)->check(CLI::PositiveNumber);
    c_route->add_flag("--simple", route.simple, "Only loop-free routes");
    c_route->add_flag("--no-mvt", route.no_mvt, "Explore all m-max candidates");
    c_route->add_option("--out", route.out);
    add_seed(c_route);
    c_route->callback([&] { rc = run_route(route); });

    EvaluateArgs eval;
    auto* c_eval = app.add_subcommand("evaluate", "Landmark-pair improvement report");
    c_eval->add_option("--graph", eval.graph)->required();
    c_eval->add_option("--fields", eval.fields)->required();
    c_eval->add_option("--landmarks", eval.landmarks)->required();
    c_eval->add_option("--out", eval.out)->required();
    c_eval->add_option("--csv", eval.csv);
    c_eval->add_option("--m-max", eval.m_max)->check(CLI::PositiveNumber);
    c_eval->add_option("--curve-m-max", eval.curve_m_max, "Also sweep m up to this bound (beauty)");
    c_eval->add_option("--threads", eval.threads);
    add_seed(c_eval);
    c_eval->callback([&] { rc = run_evaluate(eval); });

    ServeArgs serve;
    auto* c_serve = app.add_subcommand("serve", "HTTP service: /health, /cells, /route");
    c_serve->add_option("--workspace", serve.workspace, "workspace.json")->required();
    c_serve->add_option("--host", serve.host);
    c_serve->add_option("--port", serve.port)->check(CLI::Range(1, 65535));
    add_seed(c_serve);
    c_serve->callback([&] { rc = run_serve(serve); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << to_string(ErrorCode::Internal) << ": " << e.what() << "\n";
        return 1;
    }
    return rc;
}
