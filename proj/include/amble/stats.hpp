#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace amble::stats {

struct OlsFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    Eigen::VectorXd fitted;
    Eigen::VectorXd residuals;
    double r_squared = 0.0;
    double residual_variance = 0.0;
};

/// Least squares of y on the columns of `design` (include an explicit
/// intercept column if you want one; R^2 assumes there is one). Throws
/// RankDeficient naming the dependent columns, or InsufficientCells when there
/// are not more rows than columns.
OlsFit ordinary_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                              const std::vector<std::string>& column_names);

struct Correlation {
    /// Unset when either series has zero variance.
    std::optional<double> r;
    std::optional<double> p_value;
    std::size_t n = 0;
};

/// Pearson r with a two-sided p-value from Student's t on n - 2 degrees of freedom.
Correlation pearson(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> values);
/// Population standard deviation.
double population_stddev(std::span<const double> values);

}  // namespace amble::stats
