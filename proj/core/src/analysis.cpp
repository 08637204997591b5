#include "mlsort/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "mlsort/error.hpp"

namespace mlsort {

std::size_t OccupancyHistogram::count(std::size_t q) const {
  const auto it = counts.find(q);
  return it == counts.end() ? 0 : it->second;
}

double OccupancyHistogram::proportion(std::size_t q) const {
  return n == 0 ? 0.0 : static_cast<double>(count(q)) / static_cast<double>(n);
}

std::size_t OccupancyHistogram::total_keys() const {
  std::size_t total = 0;
  for (const auto& [q, c] : counts) total += q * c;
  return total;
}

namespace {

template <typename SizeOf>
OccupancyHistogram histogram_of(std::size_t n, SizeOf size_of) {
  OccupancyHistogram hist;
  hist.n = n;
  std::vector<std::size_t> dense;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t q = size_of(i);
    if (q >= dense.size()) dense.resize(q + 1, 0);
    ++dense[q];
  }
  for (std::size_t q = 0; q < dense.size(); ++q) {
    if (dense[q] != 0) hist.counts[q] = dense[q];
  }
  return hist;
}

}  // namespace

OccupancyHistogram occupancy_histogram(const BucketArray& buckets) {
  return histogram_of(buckets.bucket_count(), [&](std::size_t i) { return buckets.bucket_size(i); });
}

OccupancyHistogram occupancy_from_ranks(std::span<const std::size_t> ranks, std::size_t n) {
  std::vector<std::size_t> sizes(n, 0);
  for (const std::size_t r : ranks) {
    if (r >= n) throw ValidationError("occupancy: rank " + std::to_string(r) + " out of range");
    ++sizes[r];
  }
  return histogram_of(n, [&](std::size_t i) { return sizes[i]; });
}

double expected_occupancy(std::size_t n, std::size_t q) {
  if (n == 0) throw ValidationError("expected_occupancy: n must be >= 1");
  if (q > n) throw ValidationError("expected_occupancy: q must not exceed n");
  const double nd = static_cast<double>(n);
  const double qd = static_cast<double>(q);
  if (n == 1) return q == 1 ? 1.0 : 0.0;

  const double log_choose = std::lgamma(nd + 1.0) - std::lgamma(qd + 1.0) - std::lgamma(nd - qd + 1.0);
  const double log_p = log_choose - qd * std::log(nd) + (nd - qd) * std::log1p(-1.0 / nd);
  return std::exp(log_p);
}

std::array<double, kOccupancyFitMaxQ + 1> occupancy_errors(const OccupancyHistogram& hist) {
  std::array<double, kOccupancyFitMaxQ + 1> errors{};
  if (hist.n == 0) return errors;
  for (std::size_t q = 0; q <= kOccupancyFitMaxQ; ++q) {
    const double expected = q <= hist.n ? expected_occupancy(hist.n, q) : 0.0;
    errors[q] = std::abs(hist.proportion(q) - expected);
  }
  return errors;
}

double occupancy_fit(const OccupancyHistogram& hist) {
  const auto errors = occupancy_errors(hist);
  return *std::max_element(errors.begin(), errors.end());
}

DeviationStats deviation_stats(std::span<const RankEstimate> estimates,
                               std::span<const double> truth) {
  if (estimates.size() != truth.size()) {
    throw ValidationError("deviation_stats: " + std::to_string(estimates.size()) +
                          " estimates vs " + std::to_string(truth.size()) + " truth keys");
  }
  DeviationStats stats;
  stats.count = estimates.size();
  double sum = 0.0;
  for (const auto& e : estimates) {
    const auto [lo, hi] = std::equal_range(truth.begin(), truth.end(), e.key);
    if (lo == hi) throw ValidationError("deviation_stats: estimated key missing from truth");
    const auto first = static_cast<std::size_t>(lo - truth.begin());
    const auto last = static_cast<std::size_t>(hi - truth.begin()) - 1;
    std::size_t dev = 0;
    if (e.rank < first) dev = first - e.rank;
    else if (e.rank > last) dev = e.rank - last;

    stats.max_abs = std::max(stats.max_abs, dev);
    sum += static_cast<double>(dev);
    const auto bin = static_cast<std::size_t>(std::bit_width(dev));
    if (bin >= stats.histogram.size()) stats.histogram.resize(bin + 1, 0);
    ++stats.histogram[bin];
  }
  stats.mean_abs = stats.count == 0 ? 0.0 : sum / static_cast<double>(stats.count);
  return stats;
}

bool verify_sorted(std::span<const double> seq, SortOrder order) {
  if (order == SortOrder::Ascending) return std::is_sorted(seq.begin(), seq.end());
  return std::is_sorted(seq.begin(), seq.end(), std::greater<>());
}

nlohmann::json to_json(const OccupancyHistogram& hist) {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [q, c] : hist.counts) counts[std::to_string(q)] = c;
  nlohmann::json proportions = nlohmann::json::object();
  nlohmann::json expected = nlohmann::json::object();
  for (std::size_t q = 0; q <= kOccupancyFitMaxQ && q <= hist.n; ++q) {
    proportions[std::to_string(q)] = hist.proportion(q);
    expected[std::to_string(q)] = expected_occupancy(hist.n, q);
  }
  return {{"buckets", hist.n},
          {"counts", counts},
          {"proportions", proportions},
          {"expected", expected},
          {"fit_error", hist.n == 0 ? 0.0 : occupancy_fit(hist)}};
}

nlohmann::json to_json(const DeviationStats& stats) {
  return {{"count", stats.count},
          {"max_abs", stats.max_abs},
          {"mean_abs", stats.mean_abs},
          {"log2_histogram", stats.histogram}};
}

}  // namespace mlsort
