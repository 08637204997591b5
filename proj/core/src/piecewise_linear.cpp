#include "mlsort/piecewise_linear.hpp"

#include <algorithm>
#include <cmath>

#include "mlsort/error.hpp"

namespace mlsort {

PiecewiseLinearModel::PiecewiseLinearModel(KeyVector knots) : knots_(std::move(knots)) {
  if (knots_.size() < 2) throw ValidationError("piecewise-linear model needs >= 2 knots");
  require_finite(knots_);
  if (!std::is_sorted(knots_.begin(), knots_.end())) {
    throw ValidationError("piecewise-linear knots must be sorted ascending");
  }
}

double PiecewiseLinearModel::predict(double x) const {
  const std::size_t n0 = knots_.size();
  const double scale = 1.0 / static_cast<double>(n0);
  if (x < knots_.front()) return 0.0;
  if (x > knots_.back()) return 1.0;

  // Last knot <= x.
  const auto upper = std::upper_bound(knots_.begin(), knots_.end(), x);
  const auto i = static_cast<std::size_t>(upper - knots_.begin()) - 1;
  if (i + 1 == n0) return static_cast<double>(i) * scale;

  const double left = knots_[i];
  const double width = knots_[i + 1] - left;
  const double frac = width > 0.0 ? (x - left) / width : 0.0;
  return (static_cast<double>(i) + frac) * scale;
}

PiecewiseLinearModel pl_fit(KeyVector sorted_sample) {
  return PiecewiseLinearModel(std::move(sorted_sample));
}

double pl_predict(const PiecewiseLinearModel& model, double x) { return model.predict(x); }

}  // namespace mlsort
