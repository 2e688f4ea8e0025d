#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eas/sampler.hpp"

namespace eas {

/// Strictly increasing positive epsilon values.
class EpsilonGrid {
 public:
  explicit EpsilonGrid(std::vector<double> values);
  /// k evenly spaced values from lo to hi inclusive.
  static EpsilonGrid uniform(double lo, double hi, int k);
  /// "lo:hi:k".
  static EpsilonGrid parse(const std::string& spec);
  /// 24 values on [0.05, 10].
  static EpsilonGrid simulation_default();
  /// 16 values on [0.01, 0.2].
  static EpsilonGrid fine();

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
};

enum class TuneMethod { Bic, Cv };
const char* to_string(TuneMethod m);

enum class WeightMode { Correlation, Uniform, Given };

struct TuneOptions {
  std::uint64_t seed = 0;
  /// Chain length per grid cell (BIC default 5000/2000, CV default 500/200).
  std::size_t steps = 5000;
  std::size_t burn_in = 2000;
  /// Final chain at the CV winner.
  std::size_t final_steps = 10000;
  std::size_t final_burn_in = 5000;
  WeightMode weights = WeightMode::Correlation;
  std::optional<ProposalWeights> given_weights;
  HConfig h;
  int max_model_size = 0;
  /// See ChainConfig::jump_probability.
  double jump_probability = 0.05;
  int threads = 1;
};

struct TuningRow {
  double epsilon = 0.0;
  /// BIC or mean CV-MSPE; +inf when no admissible model exists.
  double score = 0.0;
  std::optional<ModelIndexSet> map_model;
  std::vector<double> fold_scores;
};

struct TuningResult {
  TuneMethod method = TuneMethod::Bic;
  double chosen_epsilon = 0.0;
  std::size_t chosen_index = 0;
  std::vector<TuningRow> rows;
  ChainSummary final_chain;
};

/// n log det(Sigma-hat / n) + q |M| log n.
double bic_score(const Dataset& data, const ModelIndexSet& model);

/// Least-squares refit of `model` on `train`, scored on `test` as
/// ||Y - B X_M||_F^2 / (n_test q).
double prediction_mse(const Dataset& train, const Dataset& test, const ModelIndexSet& model);

/// Runs one chain per epsilon, scores its MAP model by BIC and keeps the
/// smallest epsilon attaining the minimum. The winner's chain is returned
/// as the final chain. Throws InitializationFailed when every epsilon fails.
TuningResult tune_bic(const Dataset& data, const EpsilonGrid& grid, const TuneOptions& opt);

/// k-fold cross-validation over seeded observation folds; the winner is
/// re-run on the full data for opt.final_steps.
TuningResult tune_cv(const Dataset& data, const EpsilonGrid& grid, std::size_t folds,
                     const TuneOptions& opt);

/// Fold index per observation: a seeded permutation cut into `folds`
/// contiguous blocks of near-equal size.
std::vector<std::size_t> assign_folds(std::size_t n, std::size_t folds, std::uint64_t seed);

/// Weights for a dataset under the chosen mode.
ProposalWeights make_weights(const Dataset& data, const TuneOptions& opt);

}  // namespace eas
