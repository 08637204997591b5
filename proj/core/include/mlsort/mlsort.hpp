#pragma once

#include "mlsort/analysis.hpp"
#include "mlsort/buckets.hpp"
#include "mlsort/cdf_model.hpp"
#include "mlsort/distributions.hpp"
#include "mlsort/error.hpp"
#include "mlsort/gvm.hpp"
#include "mlsort/key_io.hpp"
#include "mlsort/keys.hpp"
#include "mlsort/piecewise_linear.hpp"
#include "mlsort/random.hpp"
#include "mlsort/rank_index.hpp"
#include "mlsort/sorter.hpp"
