#pragma once

#include <span>
#include <vector>

namespace exq {

/// 1-based ranks with ties sharing the average of the positions they span.
std::vector<double> average_ranks(std::span<const double> v);

double pearson(std::span<const double> a, std::span<const double> b);

/// Spearman's rank correlation with average ranks for ties.
/// Throws UndefinedCorrelation when either input is constant.
double spearman_rho(std::span<const double> p, std::span<const double> q);

double mae(std::span<const double> pred, std::span<const double> truth);
double rmse(std::span<const double> pred, std::span<const double> truth);

}  // namespace exq
