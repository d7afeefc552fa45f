#pragma once

#include <vector>

namespace dme {

using Vector = std::vector<double>;

/// Bit-budget regime: low is r <= d (subsampled schemes), high is r = m*d
/// with multiple bits per dimension.
enum class Precision { low, high };

}  // namespace dme
