#pragma once

#include <vector>

#include "eas/model.hpp"

namespace eas {

struct HConfig {
  double epsilon = 1.0;
  /// Relative objective change below which descent is considered converged.
  double threshold = 1e-7;
  int max_iterations = 5000;
  /// Stop as soon as a sparse B with g(B) < epsilon is found.
  bool early_stop = true;
  /// After each thresholding step, replace the kept columns by the exact
  /// least-squares fit on that support.
  bool polish = true;
  bool record_trace = false;
};

enum class HMethod { Indicator, ProjectedGradient, ExhaustiveOracle };

const char* to_string(HMethod m);

struct HResult {
  int h = 0;
  /// Best objective found, g(B) = 1/2 ||L^{-1}(B_M X_M - B X)||_F^2.
  double objective = 0.0;
  int iterations = 0;
  HMethod method = HMethod::Indicator;
  /// q x p coefficient matrix achieving `objective` (empty for the
  /// indicator short-circuits).
  DenseMatrix certificate;
  std::vector<int> support;
  bool converged = false;
  /// Objective after the warm start and after each iteration.
  std::vector<double> trace;
};

/// Warm start for descent: B-hat embedded into q x p with its minimum-norm
/// column zeroed (ties go to the lowest position).
DenseMatrix warm_start(const FittedModel& fitted, Eigen::Index p);
/// Position within the model of the column `warm_start` zeroes.
int warm_start_column(const DenseMatrix& coef);

/// g(B) for a q x p matrix B against target coefficients (q x |M|).
double h_objective(const Dataset& data, const FittedModel& fitted, const DenseMatrix& target,
                   const DenseMatrix& b);

/// Evaluates h_eps(B-hat) by projected gradient descent with hard
/// thresholding to |M|-1 columns. A verdict of 0 always comes with a
/// certificate; a verdict of 1 is heuristic.
HResult h_pgd(const Dataset& data, const FittedModel& fitted, const HConfig& cfg);
/// Same, for an arbitrary coefficient matrix of model M (e.g. a matrix-t draw).
HResult h_pgd(const Dataset& data, const FittedModel& fitted, const DenseMatrix& target,
              const HConfig& cfg);

/// Exact h by enumerating every support of size |M|-1. Throws CapExceeded
/// when p > cap.
HResult h_exhaustive(const Dataset& data, const FittedModel& fitted, double epsilon,
                     int cap = 15);

/// Monte-Carlo estimate of E[h_eps(B_{.M})] over matrix-t draws.
double expected_h_monte_carlo(const Dataset& data, const FittedModel& fitted, const HConfig& cfg,
                              int draws, RngStream& rng);

}  // namespace eas
