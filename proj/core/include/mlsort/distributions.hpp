#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlsort/keys.hpp"

namespace mlsort {

enum class DistributionKind { Uniform, TruncatedNormal, Mixture };

enum class ComponentShape { Uniform, Normal };

// One mixture component. A Normal component is truncated to [lo, hi];
// mean/stddev are ignored for Uniform components.
struct Component {
  ComponentShape shape = ComponentShape::Uniform;
  double lo = 0.0;
  double hi = 1.0;
  double mean = 0.0;
  double stddev = 1.0;
  double weight = 1.0;
};

// A seedable synthetic key distribution. Uniform and TruncatedNormal carry a
// single component; lo/hi is always the hull of the component supports.
struct DistributionSpec {
  DistributionKind kind = DistributionKind::Uniform;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<Component> components;
  std::uint64_t seed = 0;
  std::string name;

  static DistributionSpec uniform(double lo, double hi, std::uint64_t seed = 0);
  static DistributionSpec truncated_normal(double mean, double stddev, double lo,
                                           double hi, std::uint64_t seed = 0);
  static DistributionSpec mixture(std::vector<Component> components,
                                  std::uint64_t seed = 0);
};

// Throws ValidationError when bounds, stddevs or weights are invalid.
void validate(const DistributionSpec& spec);

// n keys drawn from spec, all inside [spec.lo, spec.hi]. Truncation is by
// rejection; mixtures pick a component by weight, then draw from it.
// Identical (spec, n) gives a bit-identical vector.
KeyVector generate(const DistributionSpec& spec, std::size_t n);

// Exact CDF, clamped to 0 below lo and 1 above hi.
double exact_cdf(const DistributionSpec& spec, double x);

// Named presets on [-1000, 1000]:
//   uniform, truncnorm          -- the two smooth workloads
//   bimodal, trimodal, comb5    -- multi-modal stand-ins for hard densities
DistributionSpec preset(std::string_view name, std::uint64_t seed);
std::span<const std::string_view> preset_names();

// Hidden-layer width suggested for a distribution: 10 for the smooth
// single-component kinds, 50 otherwise.
std::size_t default_neurons(const DistributionSpec& spec);

}  // namespace mlsort
