#include "mlsort/gvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mlsort/error.hpp"
#include "mlsort/random.hpp"

namespace mlsort {

void CdfModel::predict_batch(std::span<const double> keys, std::span<double> out) const {
  if (keys.size() != out.size()) throw ValidationError("predict_batch: size mismatch");
  for (std::size_t i = 0; i < keys.size(); ++i) out[i] = predict(keys[i]);
}

std::uint64_t activation_evaluations() noexcept { return detail::activation_counter; }
void reset_activation_evaluations() noexcept { detail::activation_counter = 0; }

namespace {

inline double normalize_input(double x, double lo, double hi) noexcept {
  return 2.0 * (x - lo) / (hi - lo) - 1.0;
}

// Per-coordinate step sizes follow the 1/5 success rule: grow on accept,
// shrink on reject, so about one proposal in five is kept.
constexpr double kStepGrow = 1.5;
constexpr double kStepShrink = 0.9;
constexpr double kMinStep = 1e-9;
// Floor on the quantile spacing used to size initial slopes (normalized units).
constexpr double kMinSpacing = 1e-3;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

class Chain {
 public:
  Chain(std::span<const std::pair<double, double>> pairs, const TrainConfig& cfg,
        double lo, double hi, std::uint64_t seed)
      : cfg_(cfg), rng_(seed), n_(pairs.size()), m_(cfg.m) {
    params_.input_lo = lo;
    params_.input_hi = hi;
    params_.w1.resize(m_);
    params_.w2.resize(m_);
    params_.b.resize(m_);
    params_.beta.resize(m_);

    xn_.resize(n_);
    target_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      xn_[i] = normalize_input(pairs[i].first, lo, hi);
      target_[i] = pairs[i].second;
    }

    if (cfg.init == GvmInit::Quantile) {
      init_quantile();
    } else {
      for (std::size_t j = 0; j < m_; ++j) {
        params_.w1[j] = 1.0 - rng_.uniform01();
        params_.beta[j] = 1.0 - rng_.uniform01();
        params_.w2[j] = rng_.uniform01() / static_cast<double>(m_);
        params_.b[j] = rng_.uniform(-1.0, 1.0);
      }
    }
    act_.resize(m_ * n_);
    y_.assign(n_, 0.0);
    for (std::size_t j = 0; j < m_; ++j) {
      double* a = &act_[j * n_];
      for (std::size_t i = 0; i < n_; ++i) {
        a[i] = logistic(params_.beta[j] * (params_.w1[j] * xn_[i] - params_.b[j]));
        y_[i] += params_.w2[j] * a[i];
      }
    }
    loss_ = mse(y_);
    step_.assign(4 * m_, cfg.perturb_scale);
    scratch_act_.resize(n_);
    scratch_y_.resize(n_);
  }

  TrainedGvm run() {
    TrainedGvm out;
    out.stats.initial_loss = loss_;
    std::size_t it = 0;
    for (; it < cfg_.iterations && loss_ > cfg_.target_loss; ++it) {
      if (step()) {
        ++out.stats.accepted;
        out.stats.loss_history.push_back(loss_);
      }
    }
    out.stats.iterations_run = it;
    out.stats.final_loss = loss_;
    out.params = std::move(params_);
    return out;
  }

 private:
  enum Field { kW1 = 0, kW2 = 1, kBias = 2, kBeta = 3 };

  void init_quantile() {
    std::vector<double> xs = xn_;
    std::sort(xs.begin(), xs.end());
    const double top = *std::max_element(target_.begin(), target_.end());
    const auto md = static_cast<double>(m_);
    auto center = [&](double level) {
      const double pos = std::clamp(level, 0.0, 1.0) * static_cast<double>(n_ - 1);
      return xs[static_cast<std::size_t>(std::llround(pos))];
    };
    for (std::size_t j = 0; j < m_; ++j) {
      const double c = center((static_cast<double>(j) + 0.5) / md);
      const double spacing = center((static_cast<double>(j) + 1.0) / md) -
                             center(static_cast<double>(j) / md);
      params_.w1[j] = 1.0;
      params_.b[j] = c;
      params_.beta[j] = 4.0 / std::max(spacing, kMinSpacing);
      params_.w2[j] = top / md;
    }
  }

  double mse(const std::vector<double>& y) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double r = y[i] - target_[i];
      acc += r * r;
    }
    return acc / static_cast<double>(n_);
  }

  bool step() {
    const auto j = static_cast<std::size_t>(rng_.below(m_));
    const auto field = static_cast<Field>(rng_.below(4));
    double& magnitude = step_[4 * j + field];
    const double noise = rng_.normal();

    double w1 = params_.w1[j], w2 = params_.w2[j], b = params_.b[j], beta = params_.beta[j];
    double& v = field == kW1 ? w1 : field == kW2 ? w2 : field == kBias ? b : beta;
    v += noise * magnitude * (1.0 + std::abs(v));

    if (!std::isfinite(v) || (cfg_.enforce_monotone && !neuron_sign_feasible(w1, w2, beta))) {
      magnitude = std::max(kMinStep, magnitude * kStepShrink);
      return false;
    }

    const double* a = &act_[j * n_];
    double acc = 0.0;
    if (field == kW2) {
      const double dw = w2 - params_.w2[j];
      for (std::size_t i = 0; i < n_; ++i) {
        scratch_y_[i] = y_[i] + dw * a[i];
        const double r = scratch_y_[i] - target_[i];
        acc += r * r;
      }
    } else {
      for (std::size_t i = 0; i < n_; ++i) {
        scratch_act_[i] = logistic(beta * (w1 * xn_[i] - b));
        scratch_y_[i] = y_[i] + w2 * scratch_act_[i] - params_.w2[j] * a[i];
        const double r = scratch_y_[i] - target_[i];
        acc += r * r;
      }
    }
    const double candidate = acc / static_cast<double>(n_);
    if (!(candidate < loss_)) {
      magnitude = std::max(kMinStep, magnitude * kStepShrink);
      return false;
    }
    magnitude = std::min(cfg_.perturb_scale, magnitude * kStepGrow);

    if (field != kW2) std::copy(scratch_act_.begin(), scratch_act_.end(), act_.begin() + j * n_);
    y_.swap(scratch_y_);
    params_.w1[j] = w1;
    params_.w2[j] = w2;
    params_.b[j] = b;
    params_.beta[j] = beta;
    loss_ = candidate;
    return true;
  }

  const TrainConfig& cfg_;
  Rng rng_;
  std::size_t n_;
  std::size_t m_;
  GvmParams params_;
  std::vector<double> xn_, target_, act_, y_, scratch_act_, scratch_y_, step_;
  double loss_ = 0.0;
};

}  // namespace

void GvmParams::validate() const {
  const std::size_t n = w1.size();
  if (n == 0) throw ValidationError("gvm params: m must be >= 1");
  if (w2.size() != n || b.size() != n || beta.size() != n) {
    throw ValidationError("gvm params: arrays must all have length m");
  }
  if (!all_finite(w1) || !all_finite(w2) || !all_finite(b) || !all_finite(beta)) {
    throw ValidationError("gvm params: non-finite weight");
  }
  if (!(std::isfinite(input_lo) && std::isfinite(input_hi) && input_lo < input_hi)) {
    throw ValidationError("gvm params: input_lo must be < input_hi");
  }
}

void TrainConfig::validate() const {
  if (m < 1) throw ValidationError("train config: m must be >= 1");
  if (iterations < 1) throw ValidationError("train config: iterations must be >= 1");
  if (!(perturb_scale > 0.0) || !std::isfinite(perturb_scale)) {
    throw ValidationError("train config: perturb_scale must be > 0");
  }
  if (restarts < 1) throw ValidationError("train config: restarts must be >= 1");
}

double logistic(double t) noexcept { return 1.0 / (1.0 + std::exp(-t)); }

double gvm_forward(const GvmParams& params, double x) noexcept {
  const double xn = normalize_input(x, params.input_lo, params.input_hi);
  const std::size_t m = params.m();
  double y = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    y += params.w2[j] * logistic(params.beta[j] * (params.w1[j] * xn - params.b[j]));
    ++detail::activation_counter;
  }
  return y;
}

bool neuron_sign_feasible(double w1, double w2, double beta) noexcept {
  if (w1 == 0.0 || w2 == 0.0 || beta == 0.0) return true;
  // Sign of the product without forming it (no underflow to -0.0).
  const bool negative = ((w1 < 0.0) != (w2 < 0.0)) != (beta < 0.0);
  return !negative;
}

bool check_monotone(const GvmParams& params) noexcept {
  const std::size_t m = params.m();
  if (params.w2.size() != m || params.beta.size() != m) return false;
  for (std::size_t j = 0; j < m; ++j) {
    if (!neuron_sign_feasible(params.w1[j], params.w2[j], params.beta[j])) return false;
  }
  return true;
}

double gvm_loss(const GvmParams& params,
                std::span<const std::pair<double, double>> pairs) noexcept {
  if (pairs.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& [x, t] : pairs) {
    const double r = gvm_forward(params, x) - t;
    acc += r * r;
  }
  return acc / static_cast<double>(pairs.size());
}

TrainedGvm train_gvm(std::span<const std::pair<double, double>> pairs,
                     const TrainConfig& cfg) {
  cfg.validate();
  if (pairs.empty()) throw ValidationError("train_gvm: no training pairs");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [x, t] = pairs[i];
    if (!std::isfinite(x)) throw KeyError(i, "train_gvm: non-finite key at pair " + std::to_string(i));
    if (!std::isfinite(t) || t < 0.0 || t > 1.0) {
      throw ValidationError("train_gvm: target outside [0, 1] at pair " + std::to_string(i));
    }
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (lo == hi) {
    if (pairs.size() > 1) throw TrainingError("train_gvm: all training keys are equal");
    const double half = std::max(0.5, std::abs(lo) * 1e-6);
    lo -= half;
    hi += half;
  }

  TrainedGvm best;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    const std::uint64_t seed = r == 0 ? cfg.seed : derive_seed(cfg.seed, r);
    TrainedGvm candidate = Chain(pairs, cfg, lo, hi, seed).run();
    candidate.seed = seed;
    if (r == 0 || candidate.stats.final_loss < best.stats.final_loss) best = std::move(candidate);
  }
  return best;
}

GvmModel::GvmModel(GvmParams params, TrainStats stats, std::uint64_t seed)
    : params_(std::move(params)), stats_(std::move(stats)), seed_(seed) {
  params_.validate();
  monotone_ = check_monotone(params_);
}

void GvmModel::predict_batch(std::span<const double> keys, std::span<double> out) const {
  if (keys.size() != out.size()) throw ValidationError("predict_batch: size mismatch");
  for (std::size_t i = 0; i < keys.size(); ++i) out[i] = gvm_forward(params_, keys[i]);
}

nlohmann::json GvmModel::to_json() const {
  return {
      {"format", "mlsort.gvm"},
      {"version", kGvmFormatVersion},
      {"activation", "logistic"},
      {"m", params_.m()},
      {"w1", params_.w1},
      {"w2", params_.w2},
      {"b", params_.b},
      {"beta", params_.beta},
      {"input_lo", params_.input_lo},
      {"input_hi", params_.input_hi},
      {"final_loss", stats_.final_loss},
      {"seed", seed_},
  };
}

GvmModel GvmModel::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "mlsort.gvm") {
      throw ValidationError("model json: unexpected format tag");
    }
    if (doc.at("version").get<int>() != kGvmFormatVersion) {
      throw ValidationError("model json: unsupported version");
    }
    if (doc.at("activation").get<std::string>() != "logistic") {
      throw ValidationError("model json: unsupported activation");
    }
    GvmParams p;
    p.w1 = doc.at("w1").get<std::vector<double>>();
    p.w2 = doc.at("w2").get<std::vector<double>>();
    p.b = doc.at("b").get<std::vector<double>>();
    p.beta = doc.at("beta").get<std::vector<double>>();
    p.input_lo = doc.at("input_lo").get<double>();
    p.input_hi = doc.at("input_hi").get<double>();
    if (doc.at("m").get<std::size_t>() != p.m()) {
      throw ValidationError("model json: m does not match array lengths");
    }
    TrainStats stats;
    stats.final_loss = doc.at("final_loss").get<double>();
    return GvmModel(std::move(p), std::move(stats), doc.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model json: ") + e.what());
  }
}

}  // namespace mlsort
