#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "grid_fixtures.hpp"

#include "amble/error.hpp"
#include "amble/flickr_proxy.hpp"

using namespace amble;
using namespace amble::flickr;

namespace {

LiwcLexicon small_lexicon() {
    std::istringstream in(
        "# category<TAB>pattern\n"
        "posemo\thappy\n"
        "posemo\tpretty\n"
        "posemo\tlove*\n"
        "affect\thostil*\n"
        "negemo\thostil*\n"
        "anger\thostil*\n"
        "negemo\thate\n"
        "swear\tdamn*\n"
        "anx\tafraid\n"
        "sad\tcried\n"
        "anger\tdisgust*\n");
    return LiwcLexicon::parse(in);
}

CellTagStats cell_with(int classified, std::map<std::string, int> counts) {
    return {classified, std::move(counts)};
}

}  // namespace

TEST_CASE("clean_tags: lowercase and stopwords") {
    const Stopwords stop{"the"};
    CHECK(clean_tags(std::vector<std::string>{"Happy", "THE", "london"}, stop) ==
          std::vector<std::string>{"happy", "london"});
    CHECK(clean_tags(std::vector<std::string>{}, stop).empty());
    CHECK(clean_tags(std::vector<std::string>{"The", "the"}, stop).empty());
    CHECK(clean_tags(std::vector<std::string>{"  ", ""}, stop).empty());
}

TEST_CASE("parse_stopwords") {
    std::istringstream in("the a an # articles\nOf\n");
    const Stopwords words = parse_stopwords(in);
    CHECK(words.size() == 4);
    CHECK(words.contains("of"));
}

TEST_CASE("lexicon: parse errors and required categories") {
    std::istringstream missing_tab("posemo happy\n");
    CHECK_THROWS_AS(LiwcLexicon::parse(missing_tab), Error);
    std::istringstream no_swear("posemo\thappy\nnegemo\thate\nanx\tafraid\nsad\tcried\nanger\trage\n");
    try {
        LiwcLexicon::parse(no_swear);
        FAIL("expected missing category");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
        CHECK(std::string(e.what()).find("swear") != std::string::npos);
    }
}

TEST_CASE("classify_tags: prefix pattern hits every category it belongs to") {
    const auto lex = small_lexicon();
    const auto cls = classify_tags(std::vector<std::string>{"hostility"}, lex);
    CHECK(cls.classified == 1);
    CHECK(cls.category_counts.at("affect") == 1);
    CHECK(cls.category_counts.at("negemo") == 1);
    CHECK(cls.category_counts.at("anger") == 1);
    CHECK(cls.category_counts.size() == 3);
}

TEST_CASE("classify_tags: unmatched and literal tokens") {
    const auto lex = small_lexicon();
    const auto none = classify_tags(std::vector<std::string>{"zzz"}, lex);
    CHECK(none.unclassified == 1);
    CHECK(none.classified == 0);

    const auto happy = classify_tags(std::vector<std::string>{"happy"}, lex);
    CHECK(happy.category_counts == std::map<std::string, int>{{"posemo", 1}});
    // Literal patterns do not act as prefixes.
    CHECK(classify_tags(std::vector<std::string>{"happyness"}, lex).unclassified == 1);
    CHECK(classify_tags(std::vector<std::string>{"lovely"}, lex).category_counts.at("posemo") == 1);
}

TEST_CASE("classify_tags: clean then classify is invariant to letter case") {
    const auto lex = small_lexicon();
    std::mt19937 rng(5);
    const std::vector<std::string> words{"Happy", "HOSTILE", "the", "Cried", "london", "DamnIt", "lovelY"};
    const Stopwords stop{"the"};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> tags;
        for (int i = 0; i < 6; ++i) tags.push_back(words[rng() % words.size()]);
        auto flipped = tags;
        for (auto& t : flipped) {
            for (char& c : t) {
                if (rng() % 2) c = static_cast<char>(std::isupper(static_cast<unsigned char>(c)) ? std::tolower(c) : std::toupper(c));
            }
        }
        const auto a = classify_tags(clean_tags(tags, stop), lex);
        const auto b = classify_tags(clean_tags(flipped, stop), lex);
        CHECK(a.category_counts == b.category_counts);
        CHECK(a.unclassified == b.unclassified);
    }
}

TEST_CASE("normalized_counts: two-point standardisation is exactly -1, +1") {
    const std::vector<std::string> cats{"posemo"};
    const std::vector<CellTagStats> cells{cell_with(5, {{"posemo", 1}}), cell_with(5, {{"posemo", 2}})};
    const auto n = normalized_counts(cells, cats);
    CHECK(n.mean[0] == doctest::Approx(0.3));
    CHECK(n.stddev[0] == doctest::Approx(0.1));
    CHECK(n.f[0][0] == -1.0);
    CHECK(n.f[1][0] == 1.0);
}

TEST_CASE("normalized_counts: identical cells and three-point example") {
    const std::vector<std::string> cats{"posemo", "negemo"};
    const std::vector<CellTagStats> same{cell_with(4, {{"posemo", 2}}), cell_with(2, {{"posemo", 1}})};
    const auto n = normalized_counts(same, cats);
    CHECK(n.f[0][0] == 0.0);
    CHECK(n.f[1][0] == 0.0);
    CHECK(n.f[0][1] == 0.0);

    const std::vector<CellTagStats> three{cell_with(10, {}), cell_with(10, {{"posemo", 3}}),
                                          cell_with(10, {{"posemo", 6}})};
    const auto t = normalized_counts(three, cats);
    // population sigma of {0, 0.3, 0.6} is sqrt(0.06) = 0.24495
    CHECK(t.stddev[0] == doctest::Approx(0.2449489742783178));
    CHECK(t.f[0][0] == doctest::Approx(-1.224744871391589));
    CHECK(t.f[1][0] == doctest::Approx(0.0));
    CHECK(t.f[2][0] == doctest::Approx(1.224744871391589));
}

TEST_CASE("normalized_counts: needs two usable cells; empty cells count as zero") {
    const std::vector<std::string> cats{"posemo"};
    CHECK_THROWS_AS(normalized_counts(std::vector{cell_with(3, {{"posemo", 1}}), cell_with(0, {})}, cats), Error);

    const auto n = normalized_counts(
        std::vector{cell_with(0, {}), cell_with(2, {{"posemo", 2}}), cell_with(4, {{"posemo", 1}})}, cats);
    CHECK(n.w[0][0] == 0.0);
}

TEST_CASE("normalized_counts: deviations sum to zero") {
    std::mt19937 rng(17);
    const std::vector<std::string> cats{"posemo", "negemo", "anx"};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<CellTagStats> cells;
        for (int i = 0; i < 30; ++i) {
            const int total = 1 + static_cast<int>(rng() % 20);
            cells.push_back(cell_with(total, {{"posemo", static_cast<int>(rng() % (total + 1))},
                                              {"negemo", static_cast<int>(rng() % (total + 1))},
                                              {"anx", static_cast<int>(rng() % (total + 1))}}));
        }
        const auto n = normalized_counts(cells, cats);
        for (std::size_t c = 0; c < cats.size(); ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < cells.size(); ++i) s += n.w[i][c] - n.mean[c];
            CHECK(std::abs(s) <= 1e-9);
        }
    }
}

TEST_CASE("predict_beauty: coefficient arithmetic") {
    CHECK(*predict_beauty(1.0, 0.0, 0.0) == 0.37);
    CHECK(*predict_beauty(std::numbers::e, 1.0, 1.0) == doctest::Approx(0.39).epsilon(1e-12));
    const double low = *predict_beauty(1.0, -1.0, 1.0);
    CHECK(low == doctest::Approx(-0.04).epsilon(1e-12));
    CHECK(clamp_unit(low) == 0.0);
    CHECK_FALSE(predict_beauty(0.0, 0.5, 0.5).has_value());
    CHECK_THROWS_AS(predict_beauty(-1.0, 0.0, 0.0), Error);
}

TEST_CASE("predict_beauty: increasing in f_p, decreasing in f_n") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 500; ++i) {
        const double d = 1 + std::abs(u(rng)) * 100;
        const double fp = u(rng);
        const double fn = u(rng);
        const double step = 0.01 + std::abs(u(rng));
        CHECK(*predict_beauty(d, fp + step, fn) > *predict_beauty(d, fp, fn));
        CHECK(*predict_beauty(d, fp, fn + step) < *predict_beauty(d, fp, fn));
    }
}

TEST_CASE("fit_beauty_model: noiseless recovery, R^2 = 1, orthogonal residuals") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_int_distribution<int> density(1, 400);
    const BeautyModel truth;
    std::vector<BeautyFeatures> x;
    std::vector<double> y;
    for (int i = 0; i < 60; ++i) {
        const BeautyFeatures f{std::log(static_cast<double>(density(rng))), z(rng), z(rng)};
        x.push_back(f);
        y.push_back(*predict_beauty(std::exp(f.log_density), f.f_p, f.f_n, truth));
    }
    const auto fit = fit_beauty_model(x, y);
    CHECK(fit.model.intercept == doctest::Approx(0.37).epsilon(1e-9));
    CHECK(std::abs(fit.model.coef_log_density - 0.03) < 1e-9);
    CHECK(std::abs(fit.model.coef_fp - 0.20) < 1e-9);
    CHECK(std::abs(fit.model.coef_fn + 0.21) < 1e-9);
    CHECK(std::abs(fit.r_squared - 1.0) < 1e-9);

    // Normal equations with noisy targets.
    for (double& t : y) t += 0.1 * z(rng);
    const auto noisy = fit_beauty_model(x, y);
    double dot_1 = 0, dot_d = 0, dot_p = 0, dot_n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - noisy.fitted[i];
        dot_1 += r;
        dot_d += r * x[i].log_density;
        dot_p += r * x[i].f_p;
        dot_n += r * x[i].f_n;
    }
    CHECK(std::abs(dot_1) < 1e-8);
    CHECK(std::abs(dot_d) < 1e-8);
    CHECK(std::abs(dot_p) < 1e-8);
    CHECK(std::abs(dot_n) < 1e-8);
}

TEST_CASE("fit_beauty_model: constant target") {
    std::vector<BeautyFeatures> x;
    std::vector<double> y;
    for (int i = 0; i < 20; ++i) {
        x.push_back({std::log(1.0 + i), std::sin(i * 1.0), std::cos(i * 0.7)});
        y.push_back(0.5);
    }
    const auto fit = fit_beauty_model(x, y);
    CHECK(std::abs(fit.model.coef_log_density) < 1e-12);
    CHECK(std::abs(fit.model.coef_fp) < 1e-12);
    CHECK(std::abs(fit.model.coef_fn) < 1e-12);
    CHECK(fit.r_squared == 0.0);
}

TEST_CASE("fit_beauty_model: collinear columns are named") {
    std::vector<BeautyFeatures> x;
    std::vector<double> y;
    for (int i = 0; i < 20; ++i) {
        const double v = std::sin(i * 1.3);
        x.push_back({std::log(2.0 + i), v, 2.0 * v});
        y.push_back(0.3 + 0.01 * i);
    }
    try {
        fit_beauty_model(x, y);
        FAIL("expected rank deficiency");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RankDeficient);
        const std::string msg = e.what();
        CHECK(msg.find("f_p") != std::string::npos);
        CHECK(msg.find("f_n") != std::string::npos);
    }
    CHECK_THROWS_AS(fit_beauty_model(std::vector<BeautyFeatures>(4), std::vector<double>(4)), Error);
}

TEST_CASE("ingest_photos: positive tags raise predicted beauty") {
    const auto g = amble::testing::london_grid(5, 5);
    const auto lex = small_lexicon();
    const Stopwords stop{"the"};
    std::vector<PhotoMeta> photos;
    const auto at = [&](int cell) { return g.cell(cell).centroid; };
    for (int i = 0; i < 6; ++i) photos.push_back({"p" + std::to_string(i), at(3), {"happy", "pretty", "the"}, 10, 1, 0});
    for (int i = 0; i < 6; ++i) photos.push_back({"n" + std::to_string(i), at(21), {"hate", "cried", "Disgusting"}, 5, 0, 1});
    photos.push_back({"m", at(12), {"happy", "hate"}, 0, 0, 0});
    photos.push_back({"out", {10.0, 10.0}, {"happy"}, 0, 0, 0});

    const auto proxy = ingest_photos(g, photos, lex, stop);
    CHECK(proxy.photos_outside_bbox == 1);
    CHECK(proxy.cells[3].density == 6);
    CHECK(proxy.cells[3].views == 60);
    CHECK(proxy.cells[3].f_p > 0.0);
    CHECK(proxy.cells[21].f_n > 0.0);
    CHECK(proxy.field.raw[3] > proxy.field.raw[21]);
    CHECK(proxy.unpredictable_cells == 22);
    CHECK(proxy.field.raw[0] == proxy.fallback);
    CHECK(proxy.field.rank[3] == 1);
    for (double r : proxy.field.raw) {
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
    }
}
