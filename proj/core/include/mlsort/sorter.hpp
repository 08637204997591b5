#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlsort/analysis.hpp"
#include "mlsort/buckets.hpp"
#include "mlsort/cdf_model.hpp"
#include "mlsort/gvm.hpp"
#include "mlsort/keys.hpp"

namespace mlsort {

enum class ModelKind { PiecewiseLinear, Gvm };

using WarningSink = std::function<void(std::string_view)>;

// Writes "mlsort: warning: <msg>" to stderr.
void stderr_warning(std::string_view message);

struct SortConfig {
  // Training sample size; 0 picks min(10^4, N). Values above N are rejected.
  std::size_t n0 = 0;
  ModelKind model_kind = ModelKind::Gvm;
  TrainConfig train;
  // Pairs handed to the trainer: the sorted sample thinned to at most this
  // many evenly spaced order statistics.
  std::size_t max_train_pairs = 512;
  // Repair window L for models that are not provably monotone.
  std::size_t comb_size = 8;
  SortOrder order = SortOrder::Ascending;
  std::uint64_t seed = 1;
  // Fraction of normalized-rank space at each end routed to the fallback
  // sort. 0 means exactly the keys outside the sample's [min, max]. With a
  // positive fraction the model output is rescaled onto the trimmed window.
  double tail_fraction = 0.0;
  unsigned threads = 1;
  // Copy the body buckets into SortReport::buckets before repair.
  bool keep_buckets = false;
  WarningSink on_warning = stderr_warning;

  void validate() const;
};

inline constexpr std::size_t kDefaultTrainingSize = 10000;

// Uniform sample of n0 keys without replacement, returned sorted ascending.
KeyVector draw_training_set(std::span<const double> data, std::size_t n0, std::uint64_t seed);

// (a'_i, i / N0) for an ascending sample.
std::vector<std::pair<double, double>> build_rank_pairs(std::span<const double> sorted_sample);

// At most `limit` pairs at evenly spaced indices, always keeping the ends.
std::vector<std::pair<double, double>> thin_pairs(std::span<const std::pair<double, double>> pairs,
                                                  std::size_t limit);

// Insertion-sorts every bucket (stable) and concatenates in label order;
// reversed for Descending. Totally sorted whenever the placing model was
// monotone.
KeyVector fixup_buckets(BucketArray buckets, SortOrder order);

struct CombResult {
  KeyVector keys;
  std::size_t passes = 0;
  std::size_t final_window = 0;
  bool fell_back = false;  // escalation exhausted, full comparison sort used
};

// Bounded-displacement insertion passes (each element moves at most l - 1
// slots), verified after each pass; l doubles up to log2(N) times before a
// full comparison sort. Always returns ascending sorted output.
CombResult comb_fixup(KeyVector nearly_sorted, std::size_t l);

struct TailSplit {
  KeyVector body;       // keys in [sample_lo, sample_hi], input order
  KeyVector low_tail;   // sorted ascending
  KeyVector high_tail;  // sorted ascending
  bool drift_warning = false;  // a tail holds more than 10% of the keys
};

TailSplit split_tails(std::span<const double> data, double sample_lo, double sample_hi);

struct PhaseTimings {
  std::int64_t train_ns = 0;        // sampling + model fit
  std::int64_t infer_place_ns = 0;  // rank estimation + bucket scatter
  std::int64_t fixup_ns = 0;        // tails, per-bucket repair, splice, verify
  std::int64_t sort_ns() const noexcept { return infer_place_ns + fixup_ns; }
  std::int64_t total_ns() const noexcept { return train_ns + sort_ns(); }
};

struct SortReport {
  KeyVector sorted;
  PhaseTimings timings;
  std::shared_ptr<const CdfModel> model;  // null when no model was needed
  std::size_t n0 = 0;
  std::size_t body_size = 0;
  std::size_t low_tail = 0;
  std::size_t high_tail = 0;
  bool drift_warning = false;
  bool used_comb = false;
  CombResult comb_stats;  // keys moved out; counters only
  OccupancyHistogram occupancy;
  BucketArray buckets;  // only with SortConfig::keep_buckets
  bool verified = false;
};

// Full pipeline: sample, fit, split tails, place, repair, splice, verify.
// Throws KeyError on non-finite input and ValidationError on bad config.
SortReport ml_sort_report(std::span<const double> data, const SortConfig& cfg);

KeyVector ml_sort(std::span<const double> data, const SortConfig& cfg);

// Fits the configured model on a sorted training sample.
std::shared_ptr<const CdfModel> fit_model(std::span<const double> sorted_sample,
                                          const SortConfig& cfg);

}  // namespace mlsort
