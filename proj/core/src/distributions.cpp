#include "mlsort/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "mlsort/error.hpp"
#include "mlsort/random.hpp"

namespace mlsort {
namespace {

constexpr double kPresetLo = -1000.0;
constexpr double kPresetHi = 1000.0;

double standard_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double component_cdf(const Component& c, double x) {
  if (x <= c.lo) return 0.0;
  if (x >= c.hi) return 1.0;
  if (c.shape == ComponentShape::Uniform) return (x - c.lo) / (c.hi - c.lo);
  const double a = standard_normal_cdf((c.lo - c.mean) / c.stddev);
  const double b = standard_normal_cdf((c.hi - c.mean) / c.stddev);
  const double v = (standard_normal_cdf((x - c.mean) / c.stddev) - a) / (b - a);
  return std::clamp(v, 0.0, 1.0);
}

double draw_component(const Component& c, Rng& rng) {
  if (c.shape == ComponentShape::Uniform) {
    return std::clamp(rng.uniform(c.lo, c.hi), c.lo, c.hi);
  }
  for (;;) {
    const double v = c.mean + c.stddev * rng.normal();
    if (v >= c.lo && v <= c.hi) return v;
  }
}

void set_hull(DistributionSpec& spec) {
  if (spec.components.empty()) return;
  spec.lo = spec.components.front().lo;
  spec.hi = spec.components.front().hi;
  for (const auto& c : spec.components) {
    spec.lo = std::min(spec.lo, c.lo);
    spec.hi = std::max(spec.hi, c.hi);
  }
}

Component normal_component(double mean, double stddev, double weight) {
  return {ComponentShape::Normal, kPresetLo, kPresetHi, mean, stddev, weight};
}

constexpr std::array<std::string_view, 5> kPresetNames = {
    "uniform", "truncnorm", "bimodal", "trimodal", "comb5"};

}  // namespace

DistributionSpec DistributionSpec::uniform(double lo, double hi, std::uint64_t seed) {
  DistributionSpec spec;
  spec.kind = DistributionKind::Uniform;
  spec.components = {{ComponentShape::Uniform, lo, hi, 0.0, 1.0, 1.0}};
  spec.lo = lo;
  spec.hi = hi;
  spec.seed = seed;
  spec.name = "uniform";
  return spec;
}

DistributionSpec DistributionSpec::truncated_normal(double mean, double stddev,
                                                    double lo, double hi,
                                                    std::uint64_t seed) {
  DistributionSpec spec;
  spec.kind = DistributionKind::TruncatedNormal;
  spec.components = {{ComponentShape::Normal, lo, hi, mean, stddev, 1.0}};
  spec.lo = lo;
  spec.hi = hi;
  spec.seed = seed;
  spec.name = "truncnorm";
  return spec;
}

DistributionSpec DistributionSpec::mixture(std::vector<Component> components,
                                           std::uint64_t seed) {
  DistributionSpec spec;
  spec.kind = DistributionKind::Mixture;
  spec.components = std::move(components);
  spec.seed = seed;
  spec.name = "mixture";
  set_hull(spec);
  return spec;
}

void validate(const DistributionSpec& spec) {
  if (spec.components.empty()) {
    throw ValidationError("distribution has no components");
  }
  if (spec.kind != DistributionKind::Mixture && spec.components.size() != 1) {
    throw ValidationError("uniform/truncated-normal spec must have one component");
  }
  if (!(std::isfinite(spec.lo) && std::isfinite(spec.hi) && spec.lo < spec.hi)) {
    throw ValidationError("distribution bounds must satisfy lo < hi");
  }
  double total = 0.0;
  for (const auto& c : spec.components) {
    if (!(std::isfinite(c.lo) && std::isfinite(c.hi) && c.lo < c.hi)) {
      throw ValidationError("component bounds must satisfy lo < hi");
    }
    if (c.lo < spec.lo || c.hi > spec.hi) {
      throw ValidationError("component support lies outside distribution bounds");
    }
    if (c.shape == ComponentShape::Normal &&
        !(std::isfinite(c.mean) && std::isfinite(c.stddev) && c.stddev > 0.0)) {
      throw ValidationError("normal component needs finite mean and stddev > 0");
    }
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw ValidationError("mixture weights must be positive");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("mixture weights must sum to 1");
  }
}

KeyVector generate(const DistributionSpec& spec, std::size_t n) {
  validate(spec);
  if (n == 0) throw ValidationError("generate: n must be >= 1");

  Rng rng(spec.seed);
  KeyVector out;
  out.reserve(n);
  if (spec.components.size() == 1) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(draw_component(spec.components[0], rng));
    return out;
  }

  std::vector<double> cumulative;
  cumulative.reserve(spec.components.size());
  double acc = 0.0;
  for (const auto& c : spec.components) cumulative.push_back(acc += c.weight);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform01() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    const auto k = static_cast<std::size_t>(it - cumulative.begin());
    out.push_back(draw_component(spec.components[k], rng));
  }
  return out;
}

double exact_cdf(const DistributionSpec& spec, double x) {
  if (x <= spec.lo) return 0.0;
  if (x >= spec.hi) return 1.0;
  double total = 0.0;
  for (const auto& c : spec.components) total += c.weight * component_cdf(c, x);
  return std::clamp(total, 0.0, 1.0);
}

DistributionSpec preset(std::string_view name, std::uint64_t seed) {
  if (name == "uniform") return DistributionSpec::uniform(kPresetLo, kPresetHi, seed);
  if (name == "truncnorm") {
    return DistributionSpec::truncated_normal(0.0, 300.0, kPresetLo, kPresetHi, seed);
  }

  DistributionSpec spec;
  if (name == "bimodal") {
    spec = DistributionSpec::mixture(
        {normal_component(-400.0, 120.0, 0.5), normal_component(450.0, 150.0, 0.5)}, seed);
  } else if (name == "trimodal") {
    spec = DistributionSpec::mixture({normal_component(-500.0, 80.0, 0.6),
                                      normal_component(100.0, 200.0, 0.3),
                                      normal_component(700.0, 40.0, 0.1)},
                                     seed);
  } else if (name == "comb5") {
    std::vector<Component> teeth;
    for (int k = -2; k <= 2; ++k) teeth.push_back(normal_component(400.0 * k, 30.0, 0.2));
    spec = DistributionSpec::mixture(std::move(teeth), seed);
  } else {
    throw ValidationError("unknown distribution preset '" + std::string(name) + "'");
  }
  spec.lo = kPresetLo;
  spec.hi = kPresetHi;
  spec.name = std::string(name);
  return spec;
}

std::span<const std::string_view> preset_names() { return kPresetNames; }

std::size_t default_neurons(const DistributionSpec& spec) {
  return spec.kind == DistributionKind::Mixture ? 50 : 10;
}

}  // namespace mlsort
