#pragma once

#include <cstddef>
#include <span>

#include "mlsort/cdf_model.hpp"
#include "mlsort/keys.hpp"

namespace mlsort {

// Linear interpolation of the empirical CDF of a sorted sample: knot i maps
// to i / N0, the segment between knots is assumed uniform.
class PiecewiseLinearModel final : public CdfModel {
 public:
  explicit PiecewiseLinearModel(KeyVector knots);

  double predict(double key) const override;
  bool is_monotone() const override { return true; }
  std::size_t neuron_count() const override { return 0; }

  std::span<const double> knots() const noexcept { return knots_; }

 private:
  KeyVector knots_;
};

// Requires an ascending sample of at least two keys.
PiecewiseLinearModel pl_fit(KeyVector sorted_sample);

double pl_predict(const PiecewiseLinearModel& model, double x);

}  // namespace mlsort
