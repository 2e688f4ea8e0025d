#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eas/tuning.hpp"

namespace eas {

enum class PredictorCovariance { Ar1, NonDecaying };
enum class ErrorCovariance { Ar1, Dense };

struct SimulationDesign {
  std::string name;
  int n = 0;
  int p = 0;
  int q = 0;
  int true_size = 0;
  PredictorCovariance predictor_cov = PredictorCovariance::Ar1;
  ErrorCovariance error_cov = ErrorCovariance::Ar1;
  /// Sets B0 = 0 (null model) for harness checks.
  bool zero_coefficients = false;

  void validate() const;
};

/// Named designs: ld-sparse, ld-dense, hd-sparse, hd-dense,
/// uhd-ultrasparse, uhd-sparse, largeq-ar1, largeq-nondecay, largeq-dense.
/// Throws ConfigError for unknown names.
SimulationDesign design_preset(const std::string& name);
std::vector<std::string> preset_names();

/// Gamma_ij = 0.5^|i-j| or 0.5 (1 + I(i = j)).
DenseMatrix predictor_covariance(PredictorCovariance kind, int p);
/// V_ij = 2 * 0.5^|i-j| or 1 + I(i = j).
DenseMatrix error_covariance(ErrorCovariance kind, int q);

struct SimulatedData {
  Dataset data;
  ModelIndexSet truth;
  DenseMatrix coef;       ///< B0 restricted to the true model, q x |M_o|
  DenseMatrix error_cov;  ///< V0
};

/// X columns ~ N(0, Gamma); M_o drawn without replacement; B0 entries
/// U + I(U > -0.5) with U ~ Uniform(-5, 4); Y columns ~ N(B0 X_{M_o}, V0).
SimulatedData generate(const SimulationDesign& design, RngStream& rng);
/// Fresh (X, Y) of the same size from the same truth.
Dataset generate_test(const SimulationDesign& design, const SimulatedData& sim, RngStream& rng);

struct MetricsRecord {
  double mspe = 0.0;
  double fdr = 0.0;
  double fnr = 0.0;
  double mp = 0.0;
  int pcm = 0;
  /// Entry-level counts: each predictor contributes q coefficient entries.
  long long tp = 0, fp = 0, tn = 0, fn = 0;
  /// Set when FP + TP = 0 (FDR reported as 0).
  bool fdr_undefined = false;
  /// Set when FN + TN = 0 (FNR reported as 0).
  bool fnr_undefined = false;
  double runtime_sec = 0.0;
  std::optional<double> true_model_probability;
};

/// FDR = FP/(FP+TP), FNR = FN/(FN+TN) (note the TN denominator),
/// MP = (FP+FN)/(pq), MSPE = ||Y_new - B X_new||_F^2 / (n q).
MetricsRecord compute_metrics(const ModelIndexSet& estimated, const ModelIndexSet& truth,
                              const DenseMatrix& coef, const Dataset& test);

struct MethodConfig {
  TuneMethod method = TuneMethod::Bic;
  EpsilonGrid grid = EpsilonGrid::simulation_default();
  std::size_t folds = 10;
  TuneOptions options;
  /// Skip tuning and run one chain at this epsilon.
  std::optional<double> fixed_epsilon;
};

struct ReplicationRecord {
  std::size_t replication = 0;
  bool ok = false;
  std::string error;
  double chosen_epsilon = 0.0;
  ModelIndexSet estimated;
  ModelIndexSet truth;
  MetricsRecord metrics;
};

struct AggregateMetrics {
  double median_mspe = 0.0;
  double mean_fdr = 0.0;
  double mean_fnr = 0.0;
  double mean_mp = 0.0;
  double mean_pcm = 0.0;
  double mean_true_model_probability = 0.0;
  double median_runtime_sec = 0.0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
};

struct ExperimentReport {
  SimulationDesign design;
  std::string method;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  std::vector<ReplicationRecord> records;
  AggregateMetrics aggregate;
};

/// One replication with data, test and chain streams derived from
/// (seed, replication) so it can be reproduced in isolation.
ReplicationRecord run_replication(const SimulationDesign& design, std::size_t replication,
                                  std::uint64_t seed, const MethodConfig& method);

/// Runs replications (in parallel over `threads`), then aggregates in
/// replication order: median MSPE and runtime, means of the rest.
ExperimentReport run_experiment(const SimulationDesign& design, std::size_t replications,
                                std::uint64_t seed, const MethodConfig& method, int threads = 1);

AggregateMetrics aggregate(const std::vector<ReplicationRecord>& records);

double median(std::vector<double> values);

}  // namespace eas
