#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mlsort {

using KeyVector = std::vector<double>;

enum class SortOrder { Ascending, Descending };

// Throws KeyError naming the first non-finite key.
void require_finite(std::span<const double> keys);

}  // namespace mlsort
