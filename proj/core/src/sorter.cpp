#include "mlsort/sorter.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <iostream>
#include <string>
#include <unordered_set>

#include "mlsort/error.hpp"
#include "mlsort/piecewise_linear.hpp"
#include "mlsort/random.hpp"

namespace mlsort {
namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count();
}

// Seed streams derived from SortConfig::seed.
constexpr std::uint64_t kSampleStream = 0;
constexpr std::uint64_t kTrainStream = 1;

// A tail holding more than this share of all keys triggers the drift warning.
constexpr double kDriftShare = 0.10;

template <typename It>
void insertion_sort(It first, It last) {
  for (It i = first + (first != last ? 1 : 0); i < last; ++i) {
    const double v = *i;
    It j = i;
    while (j != first && *(j - 1) > v) {
      *j = *(j - 1);
      --j;
    }
    *j = v;
  }
}

// Each element moves left by at most `window - 1` slots.
void bounded_insertion_pass(KeyVector& keys, std::size_t window) {
  const std::size_t reach = window - 1;
  for (std::size_t i = 1; i < keys.size(); ++i) {
    const double v = keys[i];
    std::size_t j = i;
    while (j > 0 && i - j < reach && keys[j - 1] > v) {
      keys[j] = keys[j - 1];
      --j;
    }
    keys[j] = v;
  }
}

// Maps the model's output on [lo, hi] onto [0, 1] so a trimmed body fills
// its own buckets. Affine with a positive slope, so monotonicity carries over.
class WindowedModel final : public CdfModel {
 public:
  WindowedModel(const CdfModel& inner, double lo, double hi)
      : inner_(inner), offset_(inner.predict(lo)), scale_(1.0 / (inner.predict(hi) - offset_)) {}

  static bool usable(const CdfModel& inner, double lo, double hi) {
    const double span = inner.predict(hi) - inner.predict(lo);
    return std::isfinite(span) && span > 0.0;
  }

  double predict(double key) const override { return (inner_.predict(key) - offset_) * scale_; }
  void predict_batch(std::span<const double> keys, std::span<double> out) const override {
    inner_.predict_batch(keys, out);
    for (double& y : out) y = (y - offset_) * scale_;
  }
  bool is_monotone() const override { return inner_.is_monotone(); }
  std::size_t neuron_count() const override { return inner_.neuron_count(); }

 private:
  const CdfModel& inner_;
  double offset_;
  double scale_;
};

}  // namespace

void stderr_warning(std::string_view message) {
  std::cerr << "mlsort: warning: " << message << '\n';
}

void SortConfig::validate() const {
  train.validate();
  if (comb_size < 1) throw ValidationError("sort config: comb_size must be >= 1");
  if (!(tail_fraction >= 0.0 && tail_fraction < 0.5)) {
    throw ValidationError("sort config: tail_fraction must be in [0, 0.5)");
  }
  if (max_train_pairs < 2) throw ValidationError("sort config: max_train_pairs must be >= 2");
  if (threads < 1) throw ValidationError("sort config: threads must be >= 1");
}

KeyVector draw_training_set(std::span<const double> data, std::size_t n0, std::uint64_t seed) {
  const std::size_t n = data.size();
  if (n0 > n) {
    throw ValidationError("training size n0=" + std::to_string(n0) + " exceeds N=" +
                          std::to_string(n));
  }
  KeyVector sample;
  sample.reserve(n0);
  if (n0 == n) {
    sample.assign(data.begin(), data.end());
  } else {
    // Floyd's algorithm: n0 distinct indices in O(n0) expected time.
    Rng rng(seed);
    std::unordered_set<std::size_t> chosen;
    chosen.reserve(n0 * 2);
    std::vector<std::size_t> order;
    order.reserve(n0);
    for (std::size_t j = n - n0; j < n; ++j) {
      const auto t = static_cast<std::size_t>(rng.below(j + 1));
      const std::size_t pick = chosen.insert(t).second ? t : j;
      if (pick == j) chosen.insert(j);
      order.push_back(pick);
    }
    for (const std::size_t idx : order) sample.push_back(data[idx]);
  }
  std::sort(sample.begin(), sample.end());
  return sample;
}

std::vector<std::pair<double, double>> build_rank_pairs(std::span<const double> sorted_sample) {
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(sorted_sample.size());
  const double n0 = static_cast<double>(sorted_sample.size());
  for (std::size_t i = 0; i < sorted_sample.size(); ++i) {
    pairs.emplace_back(sorted_sample[i], static_cast<double>(i) / n0);
  }
  return pairs;
}

std::vector<std::pair<double, double>> thin_pairs(std::span<const std::pair<double, double>> pairs,
                                                  std::size_t limit) {
  if (pairs.size() <= limit) return {pairs.begin(), pairs.end()};
  if (limit < 2) throw ValidationError("thin_pairs: limit must be >= 2");
  std::vector<std::pair<double, double>> out;
  out.reserve(limit);
  const double step = static_cast<double>(pairs.size() - 1) / static_cast<double>(limit - 1);
  for (std::size_t k = 0; k < limit; ++k) {
    out.push_back(pairs[static_cast<std::size_t>(std::llround(step * static_cast<double>(k)))]);
  }
  return out;
}

std::shared_ptr<const CdfModel> fit_model(std::span<const double> sorted_sample,
                                          const SortConfig& cfg) {
  if (cfg.model_kind == ModelKind::PiecewiseLinear) {
    return std::make_shared<PiecewiseLinearModel>(
        pl_fit(KeyVector(sorted_sample.begin(), sorted_sample.end())));
  }
  const auto pairs = build_rank_pairs(sorted_sample);
  const auto training = thin_pairs(pairs, cfg.max_train_pairs);
  TrainConfig train = cfg.train;
  train.seed = derive_seed(cfg.seed, kTrainStream);
  return std::make_shared<GvmModel>(train_gvm(training, train));
}

KeyVector fixup_buckets(BucketArray buckets, SortOrder order) {
  const auto offsets = buckets.offsets();
  auto keys = buckets.mutable_keys();
  for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
    if (offsets[i + 1] - offsets[i] > 1) {
      insertion_sort(keys.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                     keys.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]));
    }
  }
  KeyVector out = std::move(buckets).release_keys();
  if (order == SortOrder::Descending) std::reverse(out.begin(), out.end());
  return out;
}

CombResult comb_fixup(KeyVector nearly_sorted, std::size_t l) {
  if (l == 0) throw ValidationError("comb_fixup: window must be >= 1");
  CombResult result;
  result.keys = std::move(nearly_sorted);
  result.final_window = l;
  if (verify_sorted(result.keys)) return result;

  const std::size_t doublings = std::max<std::size_t>(1, std::bit_width(result.keys.size() - 1));
  std::size_t window = l;
  for (std::size_t attempt = 0; attempt <= doublings; ++attempt) {
    bounded_insertion_pass(result.keys, window);
    ++result.passes;
    result.final_window = window;
    if (verify_sorted(result.keys)) return result;
    window *= 2;
  }
  std::sort(result.keys.begin(), result.keys.end());
  result.fell_back = true;
  return result;
}

TailSplit split_tails(std::span<const double> data, double sample_lo, double sample_hi) {
  if (sample_lo > sample_hi) throw ValidationError("split_tails: sample_lo > sample_hi");
  TailSplit split;
  split.body.reserve(data.size());
  for (const double x : data) {
    if (x < sample_lo) split.low_tail.push_back(x);
    else if (x > sample_hi) split.high_tail.push_back(x);
    else split.body.push_back(x);
  }
  std::sort(split.low_tail.begin(), split.low_tail.end());
  std::sort(split.high_tail.begin(), split.high_tail.end());
  const double limit = kDriftShare * static_cast<double>(data.size());
  split.drift_warning = static_cast<double>(split.low_tail.size()) > limit ||
                        static_cast<double>(split.high_tail.size()) > limit;
  return split;
}

SortReport ml_sort_report(std::span<const double> data, const SortConfig& cfg) {
  cfg.validate();
  require_finite(data);

  SortReport report;
  const std::size_t n = data.size();
  if (n <= 1) {
    report.sorted.assign(data.begin(), data.end());
    report.body_size = n;
    report.verified = true;
    return report;
  }

  const std::size_t n0 = cfg.n0 == 0 ? std::min(kDefaultTrainingSize, n) : cfg.n0;
  if (n0 > n) {
    throw ValidationError("training size n0=" + std::to_string(n0) + " exceeds N=" +
                          std::to_string(n));
  }
  report.n0 = n0;

  auto t0 = Clock::now();
  const KeyVector sample = draw_training_set(data, n0, derive_seed(cfg.seed, kSampleStream));
  const auto cut = static_cast<std::size_t>(cfg.tail_fraction * static_cast<double>(n0));
  const double lo = sample[cut];
  const double hi = sample[n0 - 1 - cut];
  if (sample.front() != sample.back()) report.model = fit_model(sample, cfg);
  report.timings.train_ns = elapsed_ns(t0);

  t0 = Clock::now();
  TailSplit split = split_tails(data, lo, hi);
  report.low_tail = split.low_tail.size();
  report.high_tail = split.high_tail.size();
  report.body_size = split.body.size();
  report.drift_warning = split.drift_warning;
  if (split.drift_warning && cfg.on_warning) {
    const std::size_t outside = report.low_tail + report.high_tail;
    cfg.on_warning("distribution drift: " + std::to_string(outside) + " of " +
                   std::to_string(n) +
                   " keys fall outside the training sample range; tails use comparison sort");
  }

  KeyVector body;
  if (!report.model || lo == hi) {
    // Every body key equals the single sampled value.
    body = std::move(split.body);
    report.timings.infer_place_ns = elapsed_ns(t0);
    t0 = Clock::now();
  } else {
    const std::size_t nb = split.body.size();
    const CdfModel& model = *report.model;
    const bool trimmed = cut > 0 && WindowedModel::usable(model, lo, hi);
    const auto ranks = trimmed
        ? estimate_ranks(split.body, WindowedModel(model, lo, hi), nb, cfg.threads)
        : estimate_ranks(split.body, model, nb, cfg.threads);
    BucketArray buckets = bucket_place_ranked(split.body, ranks, nb);
    report.timings.infer_place_ns = elapsed_ns(t0);

    t0 = Clock::now();
    report.occupancy = occupancy_histogram(buckets);
    if (cfg.keep_buckets) report.buckets = buckets;
    body = fixup_buckets(std::move(buckets), SortOrder::Ascending);
    if (!report.model->is_monotone() || !verify_sorted(body)) {
      report.used_comb = true;
      CombResult comb = comb_fixup(std::move(body), std::max<std::size_t>(cfg.comb_size, 2));
      body = std::move(comb.keys);
      report.comb_stats = std::move(comb);
    }
  }

  KeyVector& out = report.sorted;
  out.reserve(n);
  out.insert(out.end(), split.low_tail.begin(), split.low_tail.end());
  out.insert(out.end(), body.begin(), body.end());
  out.insert(out.end(), split.high_tail.begin(), split.high_tail.end());
  if (cfg.order == SortOrder::Descending) std::reverse(out.begin(), out.end());
  report.verified = out.size() == n && verify_sorted(out, cfg.order);
  report.timings.fixup_ns = elapsed_ns(t0);
  if (!report.verified) throw VerificationError("ml_sort: output failed sortedness verification");
  return report;
}

KeyVector ml_sort(std::span<const double> data, const SortConfig& cfg) {
  return std::move(ml_sort_report(data, cfg).sorted);
}

}  // namespace mlsort
