#include "amble/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "amble/error.hpp"

namespace amble::stats {

namespace {

constexpr double kRankThreshold = 1e-10;

std::string join(const std::vector<std::string>& names, const std::vector<Eigen::Index>& idx) {
    std::string out;
    for (Eigen::Index i : idx) {
        if (!out.empty()) out += ", ";
        out += names[static_cast<std::size_t>(i)];
    }
    return out;
}

}  // namespace

OlsFit ordinary_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                              const std::vector<std::string>& column_names) {
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    if (y.size() != n || static_cast<Eigen::Index>(column_names.size()) != p) {
        throw Error(ErrorCode::InvalidArgument, "design, target and column names disagree in size");
    }
    if (n <= p) {
        throw Error(ErrorCode::InsufficientCells,
                    "regression needs more rows than coefficients (" + std::to_string(n) +
                        " rows, " + std::to_string(p) + " coefficients)");
    }

    // Scale columns to unit norm so the rank threshold is scale-free.
    Eigen::VectorXd scale = design.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (scale(j) == 0.0) scale(j) = 1.0;
    }
    const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(kRankThreshold);
    if (qr.rank() < p) {
        const auto& perm = qr.colsPermutation().indices();
        std::vector<Eigen::Index> kept;
        std::vector<Eigen::Index> dropped;
        for (Eigen::Index i = 0; i < p; ++i) {
            (i < qr.rank() ? kept : dropped).push_back(perm(i));
        }
        std::ostringstream msg;
        msg << "collinear design columns:";
        for (Eigen::Index d : dropped) {
            // Express the dropped column through the kept ones to name its partners.
            Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(kept.size()));
            for (std::size_t k = 0; k < kept.size(); ++k) {
                basis.col(static_cast<Eigen::Index>(k)) = scaled.col(kept[k]);
            }
            const Eigen::VectorXd w = basis.colPivHouseholderQr().solve(scaled.col(d));
            std::vector<Eigen::Index> partners;
            for (std::size_t k = 0; k < kept.size(); ++k) {
                if (std::abs(w(static_cast<Eigen::Index>(k))) > 1e-8) partners.push_back(kept[k]);
            }
            msg << ' ' << column_names[static_cast<std::size_t>(d)] << " ~ {"
                << join(column_names, partners) << "}";
        }
        throw Error(ErrorCode::RankDeficient, msg.str());
    }

    OlsFit fit;
    fit.coefficients = qr.solve(y).cwiseQuotient(scale);
    fit.fitted = design * fit.coefficients;
    fit.residuals = y - fit.fitted;

    const double rss = fit.residuals.squaredNorm();
    const double y_mean = y.mean();
    const double tss = (y.array() - y_mean).matrix().squaredNorm();
    const double y_scale = y.cwiseAbs().maxCoeff();
    // A constant target explains nothing; treat round-off variance as zero.
    const double tss_floor = std::pow(1e-12 * std::max(y_scale, 1e-300), 2) * static_cast<double>(n);
    fit.r_squared = tss > tss_floor ? 1.0 - rss / tss : 0.0;

    fit.residual_variance = rss / static_cast<double>(n - p);
    const Eigen::MatrixXd gram_inv =
        (design.transpose() * design).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    fit.standard_errors = (fit.residual_variance * gram_inv.diagonal()).cwiseSqrt();
    return fit;
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double population_stddev(std::span<const double> values) {
    if (values.empty()) return 0.0;
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

Correlation pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::InvalidArgument, "correlated series differ in length");
    }
    Correlation out;
    out.n = a.size();
    if (out.n < 3) {
        throw Error(ErrorCode::InsufficientCells, "correlation needs at least 3 cells");
    }
    const auto constant = [](std::span<const double> v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return *lo == *hi;
    };
    if (constant(a) || constant(b)) return out;
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) {
        return out;
    }
    const double r = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
    out.r = r;

    const double df = static_cast<double>(out.n) - 2.0;
    if (std::abs(r) >= 1.0) {
        out.p_value = 0.0;
        return out;
    }
    const double t = r * std::sqrt(df / (1.0 - r * r));
    const boost::math::students_t dist(df);
    out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return out;
}

}  // namespace amble::stats
