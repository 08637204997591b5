#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace mlsort {

// A fitted map from key to normalized rank (nominally [0, 1], may overshoot).
// Ascending convention: if is_monotone() is true then x1 <= x2 implies
// predict(x1) <= predict(x2).
class CdfModel {
 public:
  virtual ~CdfModel() = default;

  virtual double predict(double key) const = 0;

  // out[i] = predict(keys[i]). Sizes must match.
  virtual void predict_batch(std::span<const double> keys, std::span<double> out) const;

  virtual bool is_monotone() const = 0;

  // Hidden-layer width, i.e. activation evaluations per prediction.
  // Zero for models without activations.
  virtual std::size_t neuron_count() const = 0;
};

// Per-thread count of activation evaluations performed by network models.
// Used to audit the per-prediction cost.
std::uint64_t activation_evaluations() noexcept;
void reset_activation_evaluations() noexcept;

namespace detail {
inline thread_local std::uint64_t activation_counter = 0;
}  // namespace detail

}  // namespace mlsort
