#pragma once

#include <array>
#include <cstdint>

#include "cardmix/querygen.hpp"
#include "cardmix/relstore.hpp"

namespace cardmix {

inline constexpr size_t kFeatureDim = 32;
inline constexpr size_t kReservedFeatureSlots = 8;  // slots 24..31 stay 0

/// Fixed-length schema-agnostic encoding. No identifier ever enters a slot;
/// only statistics do, so renaming tables or columns cannot change the
/// vector and the same encoder serves every database.
using FeatureVector = std::array<double, kFeatureDim>;

/// Histogram selectivity of one filter, clamped to [1/row_count, 1].
/// EQ uses the 1/ndv uniform-distinct approximation; range operators use
/// the interpolated cumulative fraction of the equi-depth histogram.
double filter_selectivity(const ColumnStats& stats, FilterOp op, int64_t value);

/// Classical attribute-value-independence estimate:
/// (prod of table rows) * (prod of filter selectivities) *
/// (prod over joins of 1/max(ndv(parent key), 1)).
double avi_estimate(const SpjQuery& q, const SchemaStats& stats);

FeatureVector encode(const SpjQuery& q, const SchemaStats& stats);

}  // namespace cardmix
