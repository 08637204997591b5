#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlsort/buckets.hpp"
#include "mlsort/keys.hpp"

namespace mlsort {

// counts[q] = number of buckets holding exactly q keys.
struct OccupancyHistogram {
  std::map<std::size_t, std::size_t> counts;
  std::size_t n = 0;  // bucket count

  std::size_t count(std::size_t q) const;
  double proportion(std::size_t q) const;
  std::size_t total_keys() const;
};

OccupancyHistogram occupancy_histogram(const BucketArray& buckets);
OccupancyHistogram occupancy_from_ranks(std::span<const std::size_t> ranks, std::size_t n);

// Binomial probability that one of n equally likely buckets receives
// exactly q of n keys: C(n,q) (1/n)^q (1 - 1/n)^(n-q), in log space.
double expected_occupancy(std::size_t n, std::size_t q);

inline constexpr std::size_t kOccupancyFitMaxQ = 4;

// |observed - expected| for q = 0..4 (0 where q > n).
std::array<double, kOccupancyFitMaxQ + 1> occupancy_errors(const OccupancyHistogram& hist);

// Largest entry of occupancy_errors.
double occupancy_fit(const OccupancyHistogram& hist);

struct DeviationStats {
  std::size_t max_abs = 0;
  double mean_abs = 0.0;
  std::size_t count = 0;
  // log2 bins: [0] deviation 0, [k] deviations in [2^(k-1), 2^k).
  std::vector<std::size_t> histogram;
};

// |estimated - true| per key, where the true rank of a key with duplicates
// is the nearest position of its block of equals in `truth`.
DeviationStats deviation_stats(std::span<const RankEstimate> estimates,
                               std::span<const double> truth);

bool verify_sorted(std::span<const double> seq, SortOrder order = SortOrder::Ascending);

nlohmann::json to_json(const OccupancyHistogram& hist);
nlohmann::json to_json(const DeviationStats& stats);

}  // namespace mlsort
