#pragma once

#include <cstdint>
#include <list>
#include <optional>
#include <unordered_map>
#include <vector>

#include "eas/admissibility.hpp"
#include "eas/model.hpp"

namespace eas {

/// Nonnegative per-predictor weights used when choosing which predictor
/// to add in add and swap moves.
class ProposalWeights {
 public:
  static ProposalWeights uniform(int p);
  /// w_j = ||Y X_j^T||_F / ||X_j||, rescaled to sum to one. Predictors with
  /// zero variance get weight zero.
  static ProposalWeights correlation(const Dataset& data);
  /// Throws std::invalid_argument unless all weights are finite, >= 0 and
  /// their sum is positive.
  static ProposalWeights from_values(std::vector<double> values);

  const std::vector<double>& values() const { return w_; }
  int size() const { return static_cast<int>(w_.size()); }

 private:
  std::vector<double> w_;
};

/// Source of model masses for the chain. `log_prefactor` is the log mass a
/// model would have if admissible (-inf when structurally excluded);
/// `log_h` is log E[h] (0 or -inf for point evaluation).
class ModelScorer {
 public:
  virtual ~ModelScorer() = default;
  virtual double log_prefactor(const ModelIndexSet& model) = 0;
  virtual double log_h(const ModelIndexSet& model) = 0;
};

/// Scores models of a dataset at a fixed epsilon.
class EasScorer final : public ModelScorer {
 public:
  /// mc_draws = 0 plugs h_eps(B-hat) in for E[h]; otherwise E[h] is
  /// averaged over that many matrix-t draws from a stream keyed by the model.
  EasScorer(const Dataset& data, HConfig h, int mc_draws = 0, std::uint64_t seed = 0);

  double log_prefactor(const ModelIndexSet& model) override;
  double log_h(const ModelIndexSet& model) override;

  const Dataset& data() const { return data_; }

 private:
  const FittedModel& fit(const ModelIndexSet& model);

  const Dataset& data_;
  HConfig h_;
  int mc_draws_;
  std::uint64_t seed_;
  std::optional<FittedModel> last_;
};

/// LRU memo of prefactors and h values keyed by model. Entries are pure
/// functions of the key, so eviction never changes results.
class MassCache {
 public:
  MassCache(ModelScorer& scorer, std::size_t capacity = 1'000'000);

  double log_prefactor(const ModelIndexSet& model);
  double log_h(const ModelIndexSet& model);
  double log_mass(const ModelIndexSet& model);

  std::size_t size() const { return map_.size(); }
  std::size_t h_evaluations() const { return h_evaluations_; }

 private:
  struct Entry {
    double prefactor;
    std::optional<double> log_h;
    std::list<ModelIndexSet>::iterator lru;
  };
  Entry& lookup(const ModelIndexSet& model);

  ModelScorer& scorer_;
  std::size_t capacity_;
  std::list<ModelIndexSet> order_;
  std::unordered_map<ModelIndexSet, Entry, ModelIndexSetHash> map_;
  std::size_t h_evaluations_ = 0;
};

enum class MoveType { Add, Remove, Swap, Jump, Stay };

struct Proposal {
  ModelIndexSet candidate;
  /// log q(current | candidate) - log q(candidate | current).
  double log_correction = 0.0;
  MoveType move = MoveType::Stay;
};

/// Draws a neighbour of `current`. The move type is uniform over the
/// feasible ones among add (size < cap, some absent predictor has positive
/// weight), remove (size >= 2) and swap; with all three feasible each has
/// probability 1/3. Added predictors are drawn proportional to weight over
/// the complement; removed ones uniformly.
Proposal propose(RngStream& rng, const ModelIndexSet& current, const ProposalWeights& weights,
                 int cap);

/// log q(to | from) under `propose`; -inf when `to` is unreachable in one move.
double proposal_log_probability(const ModelIndexSet& from, const ModelIndexSet& to,
                                const ProposalWeights& weights, int cap);

/// Independence proposal: size uniform on [1, cap], then a uniform subset of
/// that size. The correction is log C(p, |candidate|) - log C(p, |current|).
Proposal propose_jump(RngStream& rng, const ModelIndexSet& current, int p, int cap);

struct ChainState {
  ModelIndexSet model;
  double log_mass = kNegInf;
};

struct StepResult {
  bool accepted = false;
  Proposal proposal;
};

/// One Metropolis-Hastings step. With probability `jump_probability` the
/// proposal comes from propose_jump, otherwise from propose; each kernel is
/// reversible on its own, so the mixture is too. The uniform is always drawn;
/// h of the candidate is only evaluated when the acceptance test could pass
/// with h = 1, which leaves the chain unchanged in law and in realization.
StepResult mh_step(RngStream& rng, ChainState& state, MassCache& cache,
                   const ProposalWeights& weights, int cap, double jump_probability = 0.0);

struct ChainConfig {
  std::size_t steps = 5000;
  std::size_t burn_in = 2000;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double epsilon = 1.0;
  /// 0 selects min(p, n - q - 1).
  int max_model_size = 0;
  std::optional<ProposalWeights> weights;
  std::optional<ModelIndexSet> initial;
  /// Share of steps using the independence proposal; lets the chain cross
  /// inadmissible gaps that single add, remove and swap moves cannot.
  double jump_probability = 0.05;
  /// Try prefixes of the forward-backward path before the top-k ladder.
  bool forward_start = true;
  /// Precomputed forward path (see forward_path); computed when absent.
  std::optional<std::vector<int>> start_path;
  HConfig h;
  std::size_t cache_capacity = 1'000'000;
  int mc_h_draws = 0;
};

struct VisitedModel {
  ModelIndexSet model;
  double log_mass = kNegInf;
  std::size_t visits = 0;
  /// Mass-normalized over the distinct visited models.
  double probability = 0.0;
  /// Share of post-burn-in iterations spent in the model.
  double visit_frequency = 0.0;
};

struct ChainSummary {
  /// Sorted by decreasing log mass, ties by index set.
  std::vector<VisitedModel> models;
  ModelIndexSet map_model;
  double map_log_mass = kNegInf;
  std::vector<double> inclusion;
  double acceptance_rate = 0.0;
  int p = 0;
  int cap = 0;
  std::size_t steps = 0;
  std::size_t burn_in = 0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  ModelIndexSet initial_model;

  /// Mass-normalized probability of `m`, 0 when not visited.
  double probability_of(const ModelIndexSet& m) const;
  double visit_frequency_of(const ModelIndexSet& m) const;
};

/// Fills probabilities, ordering, MAP and inclusion from models' log masses
/// and visit counts. Requires at least one finite mass.
void finalize_summary(ChainSummary& summary);

/// P(j) = sum over visited M containing j of r(M) / sum of r(M).
std::vector<double> marginal_inclusion(const ChainSummary& summary);

/// Predictors ranked by weight (ties to lower index), top k.
ModelIndexSet top_weighted(const ProposalWeights& weights, int k);

/// Generic chain over any scorer.
ChainSummary run_chain(ModelScorer& scorer, int p, const ChainConfig& cfg,
                       const ProposalWeights& weights, int cap);
/// Chain over a dataset at cfg.epsilon. Starting points are tried in order:
/// the supplied initial model, prefixes of the forward path from longest to
/// shortest, then top-k weighted models for k = min(5, cap) down to 1.
/// Throws InitializationFailed when none is admissible.
ChainSummary run_chain(const Dataset& data, const ChainConfig& cfg);

/// Greedy forward selection: each step adds the predictor giving the
/// smallest log det Sigma-hat (ties to the lower index). The search stops
/// after 10 steps without a new extended-BIC minimum, or at min(max_size,
/// n/2), and the path is cut at that minimum. The kept set is then ordered
/// by backward elimination, last removed first, so each prefix is the
/// backward-elimination model of that size.
std::vector<int> forward_path(const Dataset& data, int max_size);

/// min(p, n - q - 1).
int default_size_cap(const Dataset& data);

}  // namespace eas
