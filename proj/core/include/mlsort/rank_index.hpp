#pragma once

#include <cstddef>
#include <filesystem>
#include <span>

#include "mlsort/gvm.hpp"
#include "mlsort/keys.hpp"
#include "mlsort/sorter.hpp"

namespace mlsort {

// Position block of a key in the index: [first, last). For an absent key
// first == last is the insertion point.
struct RankLookup {
  bool found = false;
  std::size_t first = 0;
  std::size_t last = 0;

  friend bool operator==(const RankLookup&, const RankLookup&) = default;
};

// Learned approximate-rank index over a sorted key set (a "sparse hash
// table" whose key code is the rank). A query runs one network forward pass
// and then a binary search inside the window
// [estimate - max_deviation, estimate + max_deviation], which build()
// proves to contain every stored key.
class RankIndex {
 public:
  // Sorts data with ml_sort, trains a network on (key, position / N) pairs
  // (at most min(n0, max_train_pairs) evenly spaced positions) and measures
  // the deviation bound exhaustively over all stored keys.
  static RankIndex build(std::span<const double> data, const SortConfig& cfg);

  RankLookup query(double x) const;

  // Window-restricted search without the fallback that handles absent keys
  // falling outside the window. Used to audit the build-time bound.
  std::pair<std::size_t, std::size_t> search_window(double x) const;

  std::span<const double> keys() const noexcept { return keys_; }
  const GvmModel& model() const noexcept { return model_; }
  std::size_t size() const noexcept { return keys_.size(); }
  std::size_t max_observed_deviation() const noexcept { return max_deviation_; }

  // <prefix>.model.json and <prefix>.keys (magic "MLSRIDX", format
  // version byte, u64 little-endian count, then raw little-endian keys).
  void save(const std::filesystem::path& prefix) const;
  static RankIndex load(const std::filesystem::path& prefix);

 private:
  RankIndex(KeyVector keys, GvmModel model, std::size_t max_deviation);

  KeyVector keys_;
  GvmModel model_;
  std::size_t max_deviation_ = 0;
};

inline constexpr int kRankIndexFormatVersion = 1;

}  // namespace mlsort
