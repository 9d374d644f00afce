#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "amble/evaluation.hpp"
#include "amble/flickr_proxy.hpp"
#include "amble/geo_grid.hpp"
#include "amble/perception.hpp"

namespace amble::io {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

/// Canonical text: two-space indent, trailing newline. Equal documents give
/// equal bytes.
std::string canonical(const Json& doc);

Json graph_to_json(const geo::LocationGraph& graph);
/// Throws Parse for malformed documents or a wrong schema_version.
geo::LocationGraph graph_from_json(const Json& doc);

/// 16 hex digits of FNV-1a 64 over the canonical graph document.
std::string graph_fingerprint(const geo::LocationGraph& graph);

/// Fields of one graph; any subset of the qualities, in Quality order.
struct FieldBundle {
    std::string graph_fingerprint;
    std::vector<perception::QualityField> fields;

    const perception::QualityField* find(perception::Quality q) const;
};

Json fields_to_json(const FieldBundle& bundle);
FieldBundle fields_from_json(const Json& doc);
/// Throws FingerprintMismatch unless the bundle was built on `graph`, and
/// InvalidArgument when a field does not cover it.
void check_bundle(const FieldBundle& bundle, const geo::LocationGraph& graph);

Json report_to_json(const evaluation::ImprovementReport& report, const evaluation::LengthTradeoff& tradeoff,
                    std::span<const evaluation::QualityCorrelation> correlations,
                    const std::optional<evaluation::ExplorationCurve>& curve);

/// Flat per-pair records, one row per (pair, recommended quality).
std::string report_to_csv(const evaluation::ImprovementReport& report);

/// Throws Io when the file cannot be read or written, Parse for bad JSON.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// RFC 4180 field splitting of one record; quotes may wrap commas and "" escapes a quote.
std::vector<std::string> split_csv_record(std::string_view line);

/// `quality,scene_a,scene_b,outcome` with a header row.
std::vector<perception::VoteRecord> read_votes(std::istream& in);
/// `scene_id,lat,lon,source` with a header row.
std::vector<perception::Scene> read_scenes(std::istream& in);
/// `photo_id,lat,lon,views,favorites,comments,tags` with tags separated by ';'.
std::vector<flickr::PhotoMeta> read_photos(std::istream& in);
/// `name,lat,lon` with a header row.
std::vector<evaluation::Landmark> read_landmarks(std::istream& in);

/// Writers for the formats above. Coordinates keep 8 decimals (about 1 mm).
void write_votes(std::ostream& out, std::span<const perception::VoteRecord> votes);
void write_scenes(std::ostream& out, std::span<const perception::Scene> scenes);
void write_photos(std::ostream& out, std::span<const flickr::PhotoMeta> photos);
void write_landmarks(std::ostream& out, std::span<const evaluation::Landmark> landmarks);

}  // namespace amble::io
