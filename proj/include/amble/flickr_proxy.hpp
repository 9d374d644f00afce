#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "amble/geo_grid.hpp"
#include "amble/perception.hpp"

namespace amble::flickr {

struct PhotoMeta {
    std::string photo_id;
    geo::LatLon location;
    std::vector<std::string> tags;
    std::int64_t n_views = 0;
    std::int64_t n_favorites = 0;
    std::int64_t n_comments = 0;
};

using Stopwords = std::unordered_set<std::string>;

/// Lowercase, trim, drop stopwords and empty tags. Order is preserved.
std::vector<std::string> clean_tags(std::span<const std::string> tags, const Stopwords& stopwords);

/// Whitespace-separated words, '#' starts a comment.
Stopwords parse_stopwords(std::istream& in);

inline constexpr std::string_view kPositiveCategory = "posemo";
inline constexpr std::array<std::string_view, 5> kNegativeCategories = {"negemo", "swear", "anx", "sad",
                                                                        "anger"};

/// Category dictionary in the LIWC style: a pattern is either a literal word
/// or a prefix ending in '*'. A word may belong to several categories.
class LiwcLexicon {
public:
    /// Lines of `category<TAB>pattern`; blank lines and '#' comments skipped.
    /// Throws Parse on malformed lines and InvalidArgument when one of the
    /// posemo/negemo/swear/anx/sad/anger categories is missing.
    static LiwcLexicon parse(std::istream& in);

    void add(std::string_view category, std::string_view pattern);
    /// Throws InvalidArgument unless every required category has a pattern.
    void validate() const;

    /// Sorted category names.
    const std::vector<std::string>& categories() const { return categories_; }
    /// Indices into categories() of every category with a pattern matching the token.
    std::vector<int> match(std::string_view token) const;
    std::size_t pattern_count() const { return pattern_count_; }

private:
    int category_index(std::string_view category);

    std::vector<std::string> categories_;
    std::unordered_map<std::string, std::vector<int>> literals_;
    std::unordered_map<std::string, std::vector<int>> prefixes_;
    std::size_t longest_prefix_ = 0;
    std::size_t pattern_count_ = 0;
};

struct TagClassification {
    std::map<std::string, int> category_counts;
    int classified = 0;
    int unclassified = 0;
};

TagClassification classify_tags(std::span<const std::string> tokens, const LiwcLexicon& lexicon);

struct CellTagStats {
    int classified_tags = 0;
    std::map<std::string, int> category_counts;
};

struct NormalizedCounts {
    std::vector<std::string> categories;
    /// Per category, across cells.
    std::vector<double> mean;
    std::vector<double> stddev;
    /// [cell][category]
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> f;

    /// f for a named category; 0 for categories never seen.
    double f_of(std::size_t cell, std::string_view category) const;
};

/// z-scores of each category's share of a cell's classified tags, using the
/// population standard deviation across the given cells; 0 where it is 0.
/// Throws InsufficientCells unless two or more cells have classified tags.
NormalizedCounts normalized_counts(std::span<const CellTagStats> cells,
                                   std::span<const std::string> categories);

/// Mean of the five negative categories' f.
double negative_composite(const NormalizedCounts& counts, std::size_t cell);

struct BeautyModel {
    double intercept = 0.37;
    double coef_log_density = 0.03;
    double coef_fp = 0.20;
    double coef_fn = -0.21;
};

/// intercept + a*ln(density) + b*f_p + c*f_n, unclamped. Empty when the cell
/// has no photos.
std::optional<double> predict_beauty(double density, double f_p, double f_n,
                                     const BeautyModel& model = {});

inline double clamp_unit(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

struct BeautyFeatures {
    double log_density = 0.0;
    double f_p = 0.0;
    double f_n = 0.0;
};

struct BeautyFit {
    BeautyModel model;
    double r_squared = 0.0;
    /// intercept, log_density, f_p, f_n
    std::array<double, 4> standard_errors{};
    std::vector<double> fitted;
};

/// OLS of targets on (1, log density, f_p, f_n).
BeautyFit fit_beauty_model(std::span<const BeautyFeatures> features, std::span<const double> targets);

struct CellPhotoStats {
    int density = 0;
    std::int64_t views = 0;
    std::int64_t favorites = 0;
    std::int64_t comments = 0;
    int tags = 0;
    CellTagStats tag_stats;
    double f_p = 0.0;
    double f_n = 0.0;
    std::optional<double> predicted;
};

struct BeautyProxy {
    perception::QualityField field;
    std::vector<CellPhotoStats> cells;
    std::size_t photos_outside_bbox = 0;
    std::size_t unclassified_tags = 0;
    std::size_t unpredictable_cells = 0;
    /// Median clamped prediction, used for cells without photos.
    double fallback = 0.0;
};

/// Photos to a beauty field: bucket photos into cells, classify tags, z-score
/// the category shares over the cells holding photos, predict and clamp to
/// [0, 1]. Photo-less cells take the median prediction.
BeautyProxy ingest_photos(const geo::LocationGraph& graph, std::span<const PhotoMeta> photos,
                          const LiwcLexicon& lexicon, const Stopwords& stopwords,
                          const BeautyModel& model = {},
                          perception::ScoringCurve curve = perception::ScoringCurve::Cubic);

}  // namespace amble::flickr
