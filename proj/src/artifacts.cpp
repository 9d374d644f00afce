#include "amble/artifacts.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "amble/error.hpp"

namespace amble::io {

namespace {

using perception::Quality;

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::Parse, what); }

void check_header(const Json& doc, std::string_view kind) {
    if (!doc.is_object()) parse_error(std::string(kind) + " document must be a JSON object");
    if (!doc.contains("schema_version") || doc["schema_version"] != kSchemaVersion) {
        parse_error(std::string(kind) + " document has an unsupported schema_version");
    }
    if (!doc.contains("kind") || doc["kind"] != kind) {
        parse_error("expected a '" + std::string(kind) + "' document");
    }
}

template <typename T>
T get(const Json& obj, const char* key) {
    if (!obj.contains(key)) parse_error(std::string("missing key '") + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        parse_error(std::string("bad value for '") + key + "': " + e.what());
    }
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json matrix_json(const evaluation::Matrix& m) {
    Json rows = Json::array();
    for (const auto& row : m) rows.push_back(Json(std::vector<double>(row.begin(), row.end())));
    return rows;
}

Json scores_json(const evaluation::PathScores& s) {
    Json out = Json::object();
    for (Quality q : perception::kAllQualities) {
        const auto i = evaluation::index_of(q);
        out[std::string(perception::to_string(q))] = {{"raw", s.raw[i]}, {"prob", s.prob[i]}, {"rank", s.rank[i]}};
    }
    return out;
}

double parse_double(const std::string& text, const char* column, std::size_t line) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || text.empty()) {
        parse_error("line " + std::to_string(line) + ": bad " + column + " '" + text + "'");
    }
    return v;
}

std::int64_t parse_count(const std::string& text, const char* column, std::size_t line) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || v < 0) {
        parse_error("line " + std::to_string(line) + ": bad " + column + " '" + text + "'");
    }
    return v;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

/// Data rows of a CSV stream after checking its header names.
std::vector<std::pair<std::size_t, std::vector<std::string>>> csv_rows(std::istream& in,
                                                                       std::initializer_list<const char*> header) {
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_csv_record(line);
        for (auto& f : fields) f = trim(f);
        if (!seen_header) {
            seen_header = true;
            std::size_t i = 0;
            for (const char* name : header) {
                if (i >= fields.size() || fields[i] != name) {
                    parse_error("line 1: expected header column '" + std::string(name) + "'");
                }
                ++i;
            }
            continue;
        }
        if (fields.size() != header.size()) {
            parse_error("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(fields.size()));
        }
        rows.emplace_back(line_no, std::move(fields));
    }
    if (!seen_header) parse_error("empty CSV input (header row missing)");
    return rows;
}

}  // namespace

std::string canonical(const Json& doc) { return doc.dump(2) + "\n"; }

Json graph_to_json(const geo::LocationGraph& graph) {
    const geo::GridSpec& spec = graph.spec();
    Json cells = Json::array();
    for (const geo::Cell& c : graph.cells()) {
        cells.push_back({{"id", c.id},
                         {"row", c.row},
                         {"col", c.col},
                         {"lat", c.centroid.lat},
                         {"lon", c.centroid.lon},
                         {"x_m", c.centroid_m.x_m},
                         {"y_m", c.centroid_m.y_m}});
    }
    Json adjacency = Json::array();
    for (const auto& edges : graph.adjacency()) {
        Json list = Json::array();
        for (const geo::Edge& e : edges) list.push_back({{"to", e.to}, {"length_m", e.length_m}});
        adjacency.push_back(std::move(list));
    }
    return {{"schema_version", kSchemaVersion},
            {"kind", "graph"},
            {"grid",
             {{"bbox",
               {{"min_lat", spec.bbox.min_lat},
                {"min_lon", spec.bbox.min_lon},
                {"max_lat", spec.bbox.max_lat},
                {"max_lon", spec.bbox.max_lon}}},
              {"cell_size_m", spec.cell_size_m},
              {"rows", spec.rows},
              {"cols", spec.cols}}},
            {"cells", std::move(cells)},
            {"adjacency", std::move(adjacency)}};
}

geo::LocationGraph graph_from_json(const Json& doc) {
    check_header(doc, "graph");
    const Json& grid = doc.at("grid");
    const Json& bbox = grid.at("bbox");
    geo::GridSpec spec;
    spec.bbox = {get<double>(bbox, "min_lat"), get<double>(bbox, "min_lon"), get<double>(bbox, "max_lat"),
                 get<double>(bbox, "max_lon")};
    spec.cell_size_m = get<double>(grid, "cell_size_m");
    spec.rows = get<int>(grid, "rows");
    spec.cols = get<int>(grid, "cols");
    try {
        spec.bbox.validate();
    } catch (const Error& e) {
        parse_error(std::string("graph bbox: ") + e.what());
    }

    const Json& cells_doc = doc.at("cells");
    const Json& adj_doc = doc.at("adjacency");
    const auto n = static_cast<std::size_t>(spec.rows) * static_cast<std::size_t>(spec.cols);
    if (spec.rows < 1 || spec.cols < 1 || cells_doc.size() != n || adj_doc.size() != n) {
        parse_error("graph document: cell and adjacency counts must equal rows * cols");
    }
    std::vector<geo::Cell> cells;
    cells.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Json& c = cells_doc[i];
        geo::Cell cell{get<int>(c, "id"), get<int>(c, "row"), get<int>(c, "col"),
                       {get<double>(c, "lat"), get<double>(c, "lon")},
                       {get<double>(c, "x_m"), get<double>(c, "y_m")}};
        if (cell.id != static_cast<int>(i) || cell.id != cell.row * spec.cols + cell.col) {
            parse_error("graph document: cell ids must be row-major and in order");
        }
        cells.push_back(cell);
    }
    std::vector<std::vector<geo::Edge>> adjacency(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const Json& e : adj_doc[i]) {
            const int to = get<int>(e, "to");
            if (to < 0 || static_cast<std::size_t>(to) >= n) parse_error("graph document: edge to unknown cell");
            adjacency[i].push_back({to, get<double>(e, "length_m")});
        }
    }
    return geo::LocationGraph(spec, std::move(cells), std::move(adjacency));
}

std::string graph_fingerprint(const geo::LocationGraph& graph) {
    const std::string text = canonical(graph_to_json(graph));
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

const perception::QualityField* FieldBundle::find(Quality q) const {
    for (const auto& f : fields) {
        if (f.quality == q) return &f;
    }
    return nullptr;
}

Json fields_to_json(const FieldBundle& bundle) {
    std::vector<const perception::QualityField*> ordered;
    for (const auto& f : bundle.fields) ordered.push_back(&f);
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) { return a->quality < b->quality; });
    Json fields = Json::array();
    for (const perception::QualityField* fp : ordered) {
        const perception::QualityField& f = *fp;
        fields.push_back({{"quality", perception::to_string(f.quality)},
                          {"curve", perception::to_string(f.curve)},
                          {"k", f.k},
                          {"raw", f.raw},
                          {"prob", f.prob},
                          {"rank", f.rank}});
    }
    return {{"schema_version", kSchemaVersion},
            {"kind", "fields"},
            {"graph_fingerprint", bundle.graph_fingerprint},
            {"fields", std::move(fields)}};
}

FieldBundle fields_from_json(const Json& doc) {
    check_header(doc, "fields");
    FieldBundle bundle;
    bundle.graph_fingerprint = get<std::string>(doc, "graph_fingerprint");
    for (const Json& f : doc.at("fields")) {
        perception::QualityField field;
        const auto q = perception::parse_quality(get<std::string>(f, "quality"));
        const auto c = perception::parse_curve(get<std::string>(f, "curve"));
        if (!q || !c) parse_error("fields document: unknown quality or curve");
        if (bundle.find(*q)) parse_error("fields document: duplicate quality");
        field.quality = *q;
        field.curve = *c;
        field.k = get<double>(f, "k");
        field.raw = get<std::vector<double>>(f, "raw");
        field.prob = get<std::vector<double>>(f, "prob");
        field.rank = get<std::vector<int>>(f, "rank");
        if (field.prob.size() != field.raw.size() || field.rank.size() != field.raw.size()) {
            parse_error("fields document: raw/prob/rank lengths differ");
        }
        bundle.fields.push_back(std::move(field));
    }
    std::sort(bundle.fields.begin(), bundle.fields.end(),
              [](const auto& a, const auto& b) { return a.quality < b.quality; });
    return bundle;
}

void check_bundle(const FieldBundle& bundle, const geo::LocationGraph& graph) {
    const std::string expected = graph_fingerprint(graph);
    if (bundle.graph_fingerprint != expected) {
        throw Error(ErrorCode::FingerprintMismatch, "fields were built for graph " + bundle.graph_fingerprint +
                                                        ", loaded graph is " + expected);
    }
    for (const auto& f : bundle.fields) {
        if (f.size() != static_cast<std::size_t>(graph.size())) {
            throw Error(ErrorCode::InvalidArgument, std::string(perception::to_string(f.quality)) +
                                                        " field does not cover the graph");
        }
    }
}

Json report_to_json(const evaluation::ImprovementReport& report, const evaluation::LengthTradeoff& tradeoff,
                    std::span<const evaluation::QualityCorrelation> correlations,
                    const std::optional<evaluation::ExplorationCurve>& curve) {
    Json qualities = Json::array();
    for (Quality q : perception::kAllQualities) qualities.push_back(perception::to_string(q));

    Json excluded = Json::array();
    for (const auto& row : report.excluded) excluded.push_back(Json(std::vector<int>(row.begin(), row.end())));

    Json bins_x = Json::array();
    Json bins_y = Json::array();
    Json bins_n = Json::array();
    for (const auto& b : tradeoff.curve) {
        bins_x.push_back(0.5 * (b.lo_km + b.hi_km));
        bins_y.push_back(b.mean_delta_pct);
        bins_n.push_back(b.count);
    }

    Json corr = Json::array();
    for (const auto& c : correlations) {
        corr.push_back({{"a", perception::to_string(c.a)},
                        {"b", perception::to_string(c.b)},
                        {"r", optional_number(c.correlation.r)},
                        {"p_value", optional_number(c.correlation.p_value)},
                        {"n", c.correlation.n}});
    }

    Json pairs = Json::array();
    for (const auto& p : report.pairs) {
        Json variants = Json::object();
        for (Quality q : perception::kAllQualities) {
            const auto& v = p.recommended[evaluation::index_of(q)];
            Json d_raw = Json::array();
            Json d_prob = Json::array();
            Json d_rank = Json::array();
            for (std::size_t i = 0; i < 3; ++i) {
                d_raw.push_back(optional_number(v.delta_raw_pct[i]));
                d_prob.push_back(optional_number(v.delta_prob_pct[i]));
                d_rank.push_back(optional_number(v.delta_rank_pct[i]));
            }
            variants[std::string(perception::to_string(q))] = {{"cells", v.cells},
                                                               {"length_m", v.length_m},
                                                               {"paths_explored", v.paths_explored},
                                                               {"scores", scores_json(v.scores)},
                                                               {"delta_raw_pct", d_raw},
                                                               {"delta_prob_pct", d_prob},
                                                               {"delta_rank_pct", d_rank},
                                                               {"delta_length_pct", v.delta_length_pct}};
        }
        pairs.push_back({{"a", p.name_a},
                         {"b", p.name_b},
                         {"cell_a", p.cell_a},
                         {"cell_b", p.cell_b},
                         {"shortest", {{"cells", p.shortest_cells},
                                       {"length_m", p.shortest_length_m},
                                       {"scores", scores_json(p.shortest)}}},
                         {"recommended", std::move(variants)}});
    }

    Json doc = {{"schema_version", kSchemaVersion},
                {"kind", "report"},
                {"qualities", qualities},
                {"improvement_pct", {{"raw", matrix_json(report.raw_pct)},
                                     {"prob", matrix_json(report.prob_pct)},
                                     {"rank", matrix_json(report.rank_pct)},
                                     {"excluded_pairs", excluded}}},
                {"length_tradeoff", {{"mean_delta_length_pct", tradeoff.mean_delta_length_pct},
                                     {"mean_extra_cells", tradeoff.mean_extra_cells},
                                     {"mean_extra_minutes", tradeoff.mean_extra_minutes},
                                     {"curve", {{"x_km", bins_x}, {"y_pct", bins_y}, {"count", bins_n}}}}},
                {"correlations", corr}};
    if (curve) {
        Json m = Json::array();
        Json dr = Json::array();
        Json dl = Json::array();
        for (const auto& p : curve->points) {
            m.push_back(p.m);
            dr.push_back(p.mean_delta_rank);
            dl.push_back(p.mean_delta_length_pct);
        }
        doc["exploration_curve"] = {{"m", m}, {"delta_rank", dr}, {"delta_length_pct", dl}};
    }
    doc["pairs"] = std::move(pairs);
    return doc;
}

std::string report_to_csv(const evaluation::ImprovementReport& report) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "a,b,cell_a,cell_b,recommended_for,shortest_length_m,length_m,delta_length_pct,paths_explored";
    for (Quality q : perception::kAllQualities) out << ",delta_" << perception::to_string(q) << "_pct";
    out << "\n";
    const auto quoted = [](const std::string& s) {
        std::string r = "\"";
        for (char ch : s) r += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return r + "\"";
    };
    for (const auto& p : report.pairs) {
        for (Quality q : perception::kAllQualities) {
            const auto& v = p.recommended[evaluation::index_of(q)];
            out << quoted(p.name_a) << ',' << quoted(p.name_b) << ',' << p.cell_a << ',' << p.cell_b << ','
                << perception::to_string(q) << ',' << p.shortest_length_m << ',' << v.length_m << ','
                << v.delta_length_pct << ',' << v.paths_explored;
            for (const auto& d : v.delta_raw_pct) {
                out << ',';
                if (d) out << *d;
            }
            out << "\n";
        }
    }
    return out.str();
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        parse_error(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<std::string> split_csv_record(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                fields.back() += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.emplace_back();
        } else {
            fields.back() += ch;
        }
    }
    if (quoted) parse_error("unterminated quoted CSV field");
    return fields;
}

std::vector<perception::VoteRecord> read_votes(std::istream& in) {
    std::vector<perception::VoteRecord> votes;
    for (auto& [line, f] : csv_rows(in, {"quality", "scene_a", "scene_b", "outcome"})) {
        const auto q = perception::parse_quality(f[0]);
        const auto o = perception::parse_outcome(f[3]);
        if (!q) parse_error("line " + std::to_string(line) + ": unknown quality '" + f[0] + "'");
        if (!o) parse_error("line " + std::to_string(line) + ": unknown outcome '" + f[3] + "'");
        votes.push_back({*q, std::move(f[1]), std::move(f[2]), *o});
    }
    return votes;
}

std::vector<perception::Scene> read_scenes(std::istream& in) {
    std::vector<perception::Scene> scenes;
    for (auto& [line, f] : csv_rows(in, {"scene_id", "lat", "lon", "source"})) {
        const auto src = perception::parse_scene_source(f[3]);
        if (!src) parse_error("line " + std::to_string(line) + ": unknown source '" + f[3] + "'");
        scenes.push_back({std::move(f[0]), {parse_double(f[1], "lat", line), parse_double(f[2], "lon", line)}, *src});
    }
    return scenes;
}

std::vector<flickr::PhotoMeta> read_photos(std::istream& in) {
    std::vector<flickr::PhotoMeta> photos;
    for (auto& [line, f] :
         csv_rows(in, {"photo_id", "lat", "lon", "views", "favorites", "comments", "tags"})) {
        flickr::PhotoMeta p;
        p.photo_id = std::move(f[0]);
        p.location = {parse_double(f[1], "lat", line), parse_double(f[2], "lon", line)};
        p.n_views = parse_count(f[3], "views", line);
        p.n_favorites = parse_count(f[4], "favorites", line);
        p.n_comments = parse_count(f[5], "comments", line);
        std::string_view tags = f[6];
        while (!tags.empty()) {
            const auto cut = tags.find(';');
            p.tags.emplace_back(tags.substr(0, cut));
            if (cut == std::string_view::npos) break;
            tags.remove_prefix(cut + 1);
        }
        photos.push_back(std::move(p));
    }
    return photos;
}

std::vector<evaluation::Landmark> read_landmarks(std::istream& in) {
    std::vector<evaluation::Landmark> out;
    for (auto& [line, f] : csv_rows(in, {"name", "lat", "lon"})) {
        out.push_back({std::move(f[0]), {parse_double(f[1], "lat", line), parse_double(f[2], "lon", line)}, -1});
    }
    return out;
}

namespace {

std::string csv_field(std::string_view v) {
    if (v.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(v);
    std::string q = "\"";
    for (char ch : v) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + '"';
}

std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8f", v);
    return buf;
}

std::string_view outcome_name(perception::Outcome o) {
    switch (o) {
    case perception::Outcome::A: return "a";
    case perception::Outcome::B: return "b";
    case perception::Outcome::Tie: return "tie";
    }
    return "tie";
}

void check_stream(const std::ostream& out) {
    if (!out) throw Error(ErrorCode::Io, "CSV write failed");
}

}  // namespace

void write_votes(std::ostream& out, std::span<const perception::VoteRecord> votes) {
    out << "quality,scene_a,scene_b,outcome\n";
    for (const auto& v : votes) {
        out << perception::to_string(v.quality) << ',' << csv_field(v.scene_a) << ',' << csv_field(v.scene_b) << ','
            << outcome_name(v.outcome) << '\n';
    }
    check_stream(out);
}

void write_scenes(std::ostream& out, std::span<const perception::Scene> scenes) {
    out << "scene_id,lat,lon,source\n";
    for (const auto& s : scenes) {
        out << csv_field(s.scene_id) << ',' << coord(s.location.lat) << ',' << coord(s.location.lon) << ','
            << perception::to_string(s.source) << '\n';
    }
    check_stream(out);
}

void write_photos(std::ostream& out, std::span<const flickr::PhotoMeta> photos) {
    out << "photo_id,lat,lon,views,favorites,comments,tags\n";
    for (const auto& p : photos) {
        std::string tags;
        for (const auto& t : p.tags) {
            if (!tags.empty()) tags += ';';
            tags += t;
        }
        out << csv_field(p.photo_id) << ',' << coord(p.location.lat) << ',' << coord(p.location.lon) << ','
            << p.n_views << ',' << p.n_favorites << ',' << p.n_comments << ',' << csv_field(tags) << '\n';
    }
    check_stream(out);
}

void write_landmarks(std::ostream& out, std::span<const evaluation::Landmark> landmarks) {
    out << "name,lat,lon\n";
    for (const auto& l : landmarks) {
        out << csv_field(l.name) << ',' << coord(l.location.lat) << ',' << coord(l.location.lon) << '\n';
    }
    check_stream(out);
}

}  // namespace amble::io
