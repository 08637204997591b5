#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlsort/cdf_model.hpp"

namespace mlsort {

// Weights of the single-hidden-layer network
//
//   y = sum_j w2[j] * f0(beta[j] * (w1[j] * xn - b[j]))
//
// where xn is the key mapped affinely from [input_lo, input_hi] to [-1, 1]
// and f0 is the logistic sigmoid.
struct GvmParams {
  std::vector<double> w1;
  std::vector<double> w2;
  std::vector<double> b;
  std::vector<double> beta;
  double input_lo = -1.0;
  double input_hi = 1.0;

  std::size_t m() const noexcept { return w1.size(); }

  // Throws ValidationError on mismatched lengths, m == 0, non-finite
  // values or input_lo >= input_hi.
  void validate() const;
};

enum class GvmInit {
  // w1, beta ~ U(0, 1]; w2 ~ U[0, 1/m]; b ~ U[-1, 1].
  Random,
  // Neuron j centred on the (j + 1/2)/m quantile of the training keys with a
  // slope matched to the local quantile spacing and equal output weights,
  // so the chain starts from a smoothed empirical CDF.
  Quantile,
};

struct TrainConfig {
  std::size_t m = 50;
  GvmInit init = GvmInit::Quantile;
  std::size_t iterations = 20000;
  double perturb_scale = 0.3;
  double target_loss = 1e-8;
  std::uint64_t seed = 1;
  bool enforce_monotone = true;
  // Independent chains with derived seeds; the lowest final loss wins.
  std::size_t restarts = 1;

  void validate() const;
};

struct TrainStats {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::size_t iterations_run = 0;
  std::size_t accepted = 0;
  // Loss after every accepted proposal, in order. Strictly decreasing.
  std::vector<double> loss_history;
};

struct TrainedGvm {
  GvmParams params;
  TrainStats stats;
  std::uint64_t seed = 0;
};

double logistic(double t) noexcept;

// Network output for one key; evaluates exactly m activations.
double gvm_forward(const GvmParams& params, double x) noexcept;

// Sufficient condition for a non-decreasing network on all of R:
// w1[j] * w2[j] * beta[j] >= 0 for every neuron.
bool check_monotone(const GvmParams& params) noexcept;
bool neuron_sign_feasible(double w1, double w2, double beta) noexcept;

// Randomized local search on mean squared error over (key, target) pairs.
// Each proposal perturbs one scalar of one neuron and is kept only if the
// loss strictly drops (and, with enforce_monotone, the sign condition holds).
TrainedGvm train_gvm(std::span<const std::pair<double, double>> pairs,
                     const TrainConfig& cfg);

// Mean squared error of params over pairs.
double gvm_loss(const GvmParams& params,
                std::span<const std::pair<double, double>> pairs) noexcept;

class GvmModel final : public CdfModel {
 public:
  GvmModel() = default;
  explicit GvmModel(GvmParams params, TrainStats stats = {}, std::uint64_t seed = 0);
  explicit GvmModel(TrainedGvm trained)
      : GvmModel(std::move(trained.params), std::move(trained.stats), trained.seed) {}

  double predict(double key) const override { return gvm_forward(params_, key); }
  void predict_batch(std::span<const double> keys, std::span<double> out) const override;
  bool is_monotone() const override { return monotone_; }
  std::size_t neuron_count() const override { return params_.m(); }

  const GvmParams& params() const noexcept { return params_; }
  const TrainStats& stats() const noexcept { return stats_; }
  std::uint64_t seed() const noexcept { return seed_; }

  // Versioned document: format, version, activation, m, w1, w2, b, beta,
  // input_lo, input_hi, final_loss, seed. Doubles round-trip exactly.
  nlohmann::json to_json() const;
  static GvmModel from_json(const nlohmann::json& doc);

 private:
  GvmParams params_;
  TrainStats stats_;
  std::uint64_t seed_ = 0;
  bool monotone_ = false;
};

inline constexpr int kGvmFormatVersion = 1;

}  // namespace mlsort
