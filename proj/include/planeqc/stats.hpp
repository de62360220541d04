#pragma once

/**
 * @file stats.hpp
 * @brief Rank/linear correlation and the paired t-test.
 */

#include <cstddef>
#include <span>
#include <vector>

#include "planeqc/errors.hpp"

namespace planeqc {

// Average ranks (1-based); ties share the mean of their rank range.
std::vector<double> average_ranks(std::span<const double> x);

// Pearson correlation. Lengths must match, n >= 3, neither input constant.
double plcc(std::span<const double> x, std::span<const double> y);

// Spearman: Pearson on average ranks.
double srcc(std::span<const double> x, std::span<const double> y);

struct TTestResult {
    double t = 0, p = 1;
    size_t n = 0;
};

// Paired two-sided t-test on the differences.
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta I_x(a, b); used for the t CDF.
double reg_incomplete_beta(double a, double b, double x);

}  // namespace planeqc
