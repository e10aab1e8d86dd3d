#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "gravnet/core/dyad_table.hpp"

namespace gravnet {

// Empirical-decile bucket (1..10) of every value. A value v lands in bucket
// b when it lies in (q_{(b-1)/10}, q_{b/10}] under the inverse-ECDF
// quantile, which works out to b = floor(10 * #{x < v} / n) + 1. Ties at a
// boundary go to the lower bucket; an all-equal vector is all bucket 1.
// Depends on ranks only. Throws ValidationError on empty or NaN input.
std::vector<int> decile_indicators(std::span<const double> values);

// Pearson correlation of two equally long samples. Throws
// ValidationError when fewer than 2 points and UndefinedCorrelationError
// when either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

// Pearson correlation of two dyadic measures over the unordered pairs
// {i, j}, i < j, on which both are present. Each unordered pair counts
// once; its value is taken from the (i, j) row when present, else (j, i).
double correlate_measures(const DyadTable& a, std::string_view measure_a,
                          const DyadTable& b, std::string_view measure_b);

}  // namespace gravnet
