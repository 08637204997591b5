#include "mlsort/buckets.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "mlsort/error.hpp"

namespace mlsort {

void require_finite(std::span<const double> keys) {
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!std::isfinite(keys[i])) {
      throw KeyError(i, "non-finite key at index " + std::to_string(i));
    }
  }
}

BucketArray::BucketArray(std::vector<std::size_t> offsets, KeyVector keys)
    : offsets_(std::move(offsets)), keys_(std::move(keys)) {
  if (offsets_.empty() || offsets_.front() != 0 || offsets_.back() != keys_.size() ||
      !std::is_sorted(offsets_.begin(), offsets_.end())) {
    throw ValidationError("bucket offsets do not describe the key array");
  }
}

std::size_t rank_from_prediction(double prediction, std::size_t n) noexcept {
  const double scaled = std::round(prediction * static_cast<double>(n));
  const double top = static_cast<double>(n - 1);
  if (!(scaled > 0.0)) return 0;  // also catches NaN
  if (scaled >= top) return n - 1;
  return static_cast<std::size_t>(scaled);
}

RankEstimate estimate_rank(const CdfModel& model, double x, std::size_t n) {
  if (n == 0) throw ValidationError("estimate_rank: n must be >= 1");
  if (!std::isfinite(x)) throw KeyError(0, "estimate_rank: non-finite key");
  return {x, rank_from_prediction(model.predict(x), n)};
}

std::vector<std::size_t> estimate_ranks(std::span<const double> data, const CdfModel& model,
                                        std::size_t n, unsigned threads) {
  if (n == 0) throw ValidationError("estimate_ranks: n must be >= 1");
  std::vector<std::size_t> ranks(data.size());

  auto run_shard = [&](std::size_t begin, std::size_t end) {
    constexpr std::size_t kBlock = 4096;
    double predictions[kBlock];
    for (std::size_t i = begin; i < end; i += kBlock) {
      const std::size_t len = std::min(kBlock, end - i);
      model.predict_batch(data.subspan(i, len), std::span<double>(predictions, len));
      for (std::size_t k = 0; k < len; ++k) ranks[i + k] = rank_from_prediction(predictions[k], n);
    }
  };

  const std::size_t shards = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, data.size()));
  if (shards == 1) {
    run_shard(0, data.size());
    return ranks;
  }
  {
    std::vector<std::jthread> workers;
    workers.reserve(shards);
    const std::size_t per = data.size() / shards;
    const std::size_t extra = data.size() % shards;
    std::size_t begin = 0;
    for (std::size_t s = 0; s < shards; ++s) {
      const std::size_t end = begin + per + (s < extra ? 1 : 0);
      workers.emplace_back(run_shard, begin, end);
      begin = end;
    }
  }
  return ranks;
}

BucketArray bucket_place_ranked(std::span<const double> data,
                                std::span<const std::size_t> ranks, std::size_t n) {
  if (ranks.size() != data.size()) throw ValidationError("bucket_place: rank count mismatch");
  std::vector<std::size_t> offsets(n + 1, 0);
  for (const std::size_t r : ranks) {
    if (r >= n) throw ValidationError("bucket_place: rank out of range");
    ++offsets[r + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];

  KeyVector keys(data.size());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t i = 0; i < data.size(); ++i) keys[cursor[ranks[i]]++] = data[i];
  return BucketArray(std::move(offsets), std::move(keys));
}

BucketArray bucket_place(std::span<const double> data, const CdfModel& model, std::size_t n,
                         unsigned threads) {
  require_finite(data);
  const auto ranks = estimate_ranks(data, model, n, threads);
  return bucket_place_ranked(data, ranks, n);
}

}  // namespace mlsort
