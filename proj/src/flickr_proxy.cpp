#include "amble/flickr_proxy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "amble/error.hpp"
#include "amble/stats.hpp"

namespace amble::flickr {

namespace {

std::string lower_trimmed(std::string_view text) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!text.empty() && is_space(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && is_space(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

void insert_sorted_unique(std::vector<int>& v, int value) {
    auto it = std::lower_bound(v.begin(), v.end(), value);
    if (it == v.end() || *it != value) v.insert(it, value);
}

}  // namespace

std::vector<std::string> clean_tags(std::span<const std::string> tags, const Stopwords& stopwords) {
    std::vector<std::string> out;
    out.reserve(tags.size());
    for (const std::string& tag : tags) {
        std::string t = lower_trimmed(tag);
        if (t.empty() || stopwords.contains(t)) continue;
        out.push_back(std::move(t));
    }
    return out;
}

Stopwords parse_stopwords(std::istream& in) {
    Stopwords words;
    std::string line;
    while (std::getline(in, line)) {
        line = line.substr(0, line.find('#'));
        std::size_t pos = 0;
        while (pos < line.size()) {
            const std::size_t start = line.find_first_not_of(" \t\r\n", pos);
            if (start == std::string::npos) break;
            const std::size_t end = line.find_first_of(" \t\r\n", start);
            words.insert(lower_trimmed(line.substr(start, end - start)));
            pos = end == std::string::npos ? line.size() : end;
        }
    }
    return words;
}

LiwcLexicon LiwcLexicon::parse(std::istream& in) {
    LiwcLexicon lexicon;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string trimmed = lower_trimmed(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw Error(ErrorCode::Parse, "lexicon line " + std::to_string(line_no) +
                                              ": expected category<TAB>pattern");
        }
        lexicon.add(line.substr(0, tab), line.substr(tab + 1));
    }
    lexicon.validate();
    return lexicon;
}

int LiwcLexicon::category_index(std::string_view category) {
    auto it = std::lower_bound(categories_.begin(), categories_.end(), category);
    if (it != categories_.end() && *it == category) {
        return static_cast<int>(it - categories_.begin());
    }
    const int idx = static_cast<int>(it - categories_.begin());
    categories_.insert(it, std::string(category));
    // Shift stored indices at or after the insertion point.
    for (auto* table : {&literals_, &prefixes_}) {
        for (auto& [key, ids] : *table) {
            for (int& id : ids) {
                if (id >= idx) ++id;
            }
        }
    }
    return idx;
}

void LiwcLexicon::add(std::string_view category, std::string_view pattern) {
    const std::string cat = lower_trimmed(category);
    std::string pat = lower_trimmed(pattern);
    if (cat.empty() || pat.empty() || pat == "*") {
        throw Error(ErrorCode::Parse, "lexicon entries need a category and a non-empty pattern");
    }
    const int idx = category_index(cat);
    if (pat.back() == '*') {
        pat.pop_back();
        longest_prefix_ = std::max(longest_prefix_, pat.size());
        insert_sorted_unique(prefixes_[pat], idx);
    } else {
        insert_sorted_unique(literals_[pat], idx);
    }
    ++pattern_count_;
}

void LiwcLexicon::validate() const {
    std::vector<std::string_view> required(kNegativeCategories.begin(), kNegativeCategories.end());
    required.push_back(kPositiveCategory);
    for (std::string_view cat : required) {
        if (!std::binary_search(categories_.begin(), categories_.end(), cat)) {
            throw Error(ErrorCode::InvalidArgument,
                        "lexicon lacks required category '" + std::string(cat) + "'");
        }
    }
}

std::vector<int> LiwcLexicon::match(std::string_view token) const {
    std::vector<int> out;
    if (auto it = literals_.find(std::string(token)); it != literals_.end()) {
        out = it->second;
    }
    const std::size_t max_len = std::min(longest_prefix_, token.size());
    for (std::size_t len = 1; len <= max_len; ++len) {
        auto it = prefixes_.find(std::string(token.substr(0, len)));
        if (it == prefixes_.end()) continue;
        for (int id : it->second) insert_sorted_unique(out, id);
    }
    return out;
}

TagClassification classify_tags(std::span<const std::string> tokens, const LiwcLexicon& lexicon) {
    TagClassification out;
    for (const std::string& token : tokens) {
        const std::vector<int> hits = lexicon.match(token);
        if (hits.empty()) {
            ++out.unclassified;
            continue;
        }
        ++out.classified;
        for (int id : hits) {
            ++out.category_counts[lexicon.categories()[static_cast<std::size_t>(id)]];
        }
    }
    return out;
}

double NormalizedCounts::f_of(std::size_t cell, std::string_view category) const {
    auto it = std::find(categories.begin(), categories.end(), category);
    if (it == categories.end()) return 0.0;
    return f.at(cell)[static_cast<std::size_t>(it - categories.begin())];
}

NormalizedCounts normalized_counts(std::span<const CellTagStats> cells,
                                   std::span<const std::string> categories) {
    const auto usable = std::count_if(cells.begin(), cells.end(),
                                      [](const CellTagStats& c) { return c.classified_tags > 0; });
    if (usable < 2) {
        throw Error(ErrorCode::InsufficientCells,
                    "normalized counts need at least 2 cells with classified tags");
    }

    NormalizedCounts out;
    out.categories.assign(categories.begin(), categories.end());
    const std::size_t n_cat = categories.size();
    out.w.assign(cells.size(), std::vector<double>(n_cat, 0.0));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].classified_tags == 0) continue;
        for (std::size_t c = 0; c < n_cat; ++c) {
            auto it = cells[i].category_counts.find(categories[c]);
            if (it != cells[i].category_counts.end()) {
                out.w[i][c] = static_cast<double>(it->second) / cells[i].classified_tags;
            }
        }
    }

    // Extended precision for the mean and deviations: two-cell corpora then
    // standardise to exactly -1 and +1.
    out.mean.assign(n_cat, 0.0);
    out.stddev.assign(n_cat, 0.0);
    out.f.assign(cells.size(), std::vector<double>(n_cat, 0.0));
    const auto count = static_cast<long double>(cells.size());
    std::vector<long double> dev(cells.size());
    for (std::size_t c = 0; c < n_cat; ++c) {
        long double sum = 0.0L;
        for (std::size_t i = 0; i < cells.size(); ++i) sum += out.w[i][c];
        const long double mu = sum / count;
        long double ss = 0.0L;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            dev[i] = out.w[i][c] - mu;
            ss += dev[i] * dev[i];
        }
        const long double sigma = std::sqrt(ss / count);
        out.mean[c] = static_cast<double>(mu);
        out.stddev[c] = static_cast<double>(sigma);
        if (sigma == 0.0L) continue;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out.f[i][c] = static_cast<double>(dev[i] / sigma);
        }
    }
    return out;
}

double negative_composite(const NormalizedCounts& counts, std::size_t cell) {
    double sum = 0.0;
    for (std::string_view cat : kNegativeCategories) sum += counts.f_of(cell, cat);
    return sum / static_cast<double>(kNegativeCategories.size());
}

std::optional<double> predict_beauty(double density, double f_p, double f_n, const BeautyModel& model) {
    if (density < 0.0 || !std::isfinite(density)) {
        throw Error(ErrorCode::InvalidArgument, "photo density must be a non-negative count");
    }
    if (density == 0.0) {
        return std::nullopt;
    }
    return model.intercept + model.coef_log_density * std::log(density) + model.coef_fp * f_p +
           model.coef_fn * f_n;
}

BeautyFit fit_beauty_model(std::span<const BeautyFeatures> features, std::span<const double> targets) {
    if (features.size() != targets.size()) {
        throw Error(ErrorCode::InvalidArgument, "features and targets differ in length");
    }
    const auto n = static_cast<Eigen::Index>(features.size());
    if (n < 5) {
        throw Error(ErrorCode::InsufficientCells, "beauty regression needs more cells than coefficients");
    }
    Eigen::MatrixXd x(n, 4);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const BeautyFeatures& f = features[static_cast<std::size_t>(i)];
        x.row(i) << 1.0, f.log_density, f.f_p, f.f_n;
        y(i) = targets[static_cast<std::size_t>(i)];
    }
    const stats::OlsFit ols =
        stats::ordinary_least_squares(x, y, {"intercept", "log_density", "f_p", "f_n"});

    BeautyFit fit;
    fit.model = {ols.coefficients(0), ols.coefficients(1), ols.coefficients(2), ols.coefficients(3)};
    fit.r_squared = ols.r_squared;
    for (Eigen::Index i = 0; i < 4; ++i) {
        fit.standard_errors[static_cast<std::size_t>(i)] = ols.standard_errors(i);
    }
    fit.fitted.assign(ols.fitted.data(), ols.fitted.data() + n);
    return fit;
}

BeautyProxy ingest_photos(const geo::LocationGraph& graph, std::span<const PhotoMeta> photos,
                          const LiwcLexicon& lexicon, const Stopwords& stopwords,
                          const BeautyModel& model, perception::ScoringCurve curve) {
    BeautyProxy out;
    const auto n = static_cast<std::size_t>(graph.size());
    out.cells.assign(n, {});

    for (const PhotoMeta& photo : photos) {
        if (!graph.spec().bbox.contains(photo.location)) {
            ++out.photos_outside_bbox;
            continue;
        }
        CellPhotoStats& cell = out.cells[static_cast<std::size_t>(geo::cell_of(graph, photo.location))];
        ++cell.density;
        cell.views += photo.n_views;
        cell.favorites += photo.n_favorites;
        cell.comments += photo.n_comments;
        cell.tags += static_cast<int>(photo.tags.size());

        const TagClassification cls = classify_tags(clean_tags(photo.tags, stopwords), lexicon);
        out.unclassified_tags += static_cast<std::size_t>(cls.unclassified);
        cell.tag_stats.classified_tags += cls.classified;
        for (const auto& [cat, count] : cls.category_counts) {
            cell.tag_stats.category_counts[cat] += count;
        }
    }

    // Statistics run over the cells that hold photos; empty cells are not
    // part of the photo corpus.
    std::vector<std::size_t> photo_cells;
    std::vector<CellTagStats> tag_stats;
    for (std::size_t c = 0; c < n; ++c) {
        if (out.cells[c].density > 0) {
            photo_cells.push_back(c);
            tag_stats.push_back(out.cells[c].tag_stats);
        }
    }
    const NormalizedCounts counts = normalized_counts(tag_stats, lexicon.categories());

    std::vector<double> predictions;
    for (std::size_t i = 0; i < photo_cells.size(); ++i) {
        CellPhotoStats& cell = out.cells[photo_cells[i]];
        cell.f_p = counts.f_of(i, kPositiveCategory);
        cell.f_n = negative_composite(counts, i);
        cell.predicted = predict_beauty(cell.density, cell.f_p, cell.f_n, model);
        predictions.push_back(clamp_unit(*cell.predicted));
    }

    std::sort(predictions.begin(), predictions.end());
    const std::size_t m = predictions.size();
    out.fallback = m % 2 == 1 ? predictions[m / 2] : 0.5 * (predictions[m / 2 - 1] + predictions[m / 2]);

    std::vector<double> raw(n);
    for (std::size_t c = 0; c < n; ++c) {
        if (out.cells[c].predicted) {
            raw[c] = clamp_unit(*out.cells[c].predicted);
        } else {
            raw[c] = out.fallback;
            ++out.unpredictable_cells;
        }
    }
    out.field = perception::make_quality_field(perception::Quality::Beauty, std::move(raw), curve);
    return out;
}

}  // namespace amble::flickr
