#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mlsort/cdf_model.hpp"
#include "mlsort/keys.hpp"

namespace mlsort {

struct RankEstimate {
  double key = 0.0;
  std::size_t rank = 0;  // in [0, n - 1]

  friend bool operator==(const RankEstimate&, const RankEstimate&) = default;
};

// n rank-labeled buckets, 0 .. n-1, stored contiguously: bucket i holds
// keys()[offsets()[i] .. offsets()[i + 1]). Within a bucket keys keep their
// input order.
class BucketArray {
 public:
  BucketArray() : offsets_{0} {}
  BucketArray(std::vector<std::size_t> offsets, KeyVector keys);

  std::size_t bucket_count() const noexcept { return offsets_.size() - 1; }
  std::size_t total() const noexcept { return keys_.size(); }
  std::size_t bucket_size(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
  std::span<const double> bucket(std::size_t i) const {
    return std::span<const double>(keys_).subspan(offsets_[i], bucket_size(i));
  }

  std::span<const std::size_t> offsets() const noexcept { return offsets_; }
  std::span<const double> keys() const noexcept { return keys_; }
  std::span<double> mutable_keys() noexcept { return keys_; }
  KeyVector release_keys() && { return std::move(keys_); }

 private:
  std::vector<std::size_t> offsets_;
  KeyVector keys_;
};

// round(predict(x) * n), half away from zero, clamped into [0, n - 1].
// Throws KeyError for non-finite x and ValidationError for n == 0.
RankEstimate estimate_rank(const CdfModel& model, double x, std::size_t n);

// Same mapping without the finiteness check, for already-validated input.
std::size_t rank_from_prediction(double prediction, std::size_t n) noexcept;

// Rank estimate for every key, in input order. The key range is split into
// `threads` contiguous shards evaluated concurrently; the result does not
// depend on the thread count.
std::vector<std::size_t> estimate_ranks(std::span<const double> data, const CdfModel& model,
                                        std::size_t n, unsigned threads = 1);

// Appends each key to bucket estimate_rank(x). One model evaluation per key.
BucketArray bucket_place(std::span<const double> data, const CdfModel& model, std::size_t n,
                         unsigned threads = 1);

// Scatter of pre-computed ranks (counting sort on rank, stable).
BucketArray bucket_place_ranked(std::span<const double> data,
                                std::span<const std::size_t> ranks, std::size_t n);

}  // namespace mlsort
