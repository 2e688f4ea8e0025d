#include "eas/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "eas/errors.hpp"
#include "eas/parallel.hpp"

namespace eas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stream keys; kept distinct so no two cells share draws.
constexpr std::uint64_t kBicStream = 0x100;
constexpr std::uint64_t kCvStream = 0x200;
constexpr std::uint64_t kFinalStream = 0x300;
constexpr std::uint64_t kFoldStream = 0x400;

std::size_t argmin_smallest(const std::vector<TuningRow>& rows) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].score < rows[best].score) best = i;
  }
  return best;
}

ChainConfig chain_config(const TuneOptions& opt, double eps, std::size_t steps,
                         std::size_t burn_in, std::uint64_t stream) {
  ChainConfig c;
  c.steps = steps;
  c.burn_in = burn_in;
  c.seed = opt.seed;
  c.stream = stream;
  c.epsilon = eps;
  c.h = opt.h;
  c.max_model_size = opt.max_model_size;
  c.jump_probability = opt.jump_probability;
  return c;
}

}  // namespace

EpsilonGrid::EpsilonGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ConfigError("epsilon grid is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
      throw ConfigError("epsilon grid values must be positive");
    }
    if (i && !(values_[i] > values_[i - 1])) {
      throw ConfigError("epsilon grid must be strictly increasing");
    }
  }
}

EpsilonGrid EpsilonGrid::uniform(double lo, double hi, int k) {
  if (k < 1) throw ConfigError("epsilon grid needs at least one point");
  if (k == 1) return EpsilonGrid({lo});
  std::vector<double> v(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) v[i] = lo + (hi - lo) * i / (k - 1);
  v.back() = hi;
  return EpsilonGrid(std::move(v));
}

EpsilonGrid EpsilonGrid::parse(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream in(spec);
  for (std::string tok; std::getline(in, tok, ':');) parts.push_back(tok);
  const auto bad = [&] { return ConfigError("grid must look like lo:hi:k, got '" + spec + "'"); };
  if (parts.size() != 3) throw bad();
  try {
    std::size_t used = 0;
    const double lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw bad();
    const double hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw bad();
    const int k = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw bad();
    return uniform(lo, hi, k);
  } catch (const std::logic_error&) {
    throw bad();
  }
}

EpsilonGrid EpsilonGrid::simulation_default() { return uniform(0.05, 10.0, 24); }
EpsilonGrid EpsilonGrid::fine() { return uniform(0.01, 0.2, 16); }

const char* to_string(TuneMethod m) { return m == TuneMethod::Bic ? "bic" : "cv"; }

ProposalWeights make_weights(const Dataset& data, const TuneOptions& opt) {
  switch (opt.weights) {
    case WeightMode::Uniform: return ProposalWeights::uniform(static_cast<int>(data.p()));
    case WeightMode::Given:
      if (!opt.given_weights || opt.given_weights->size() != data.p()) {
        throw ConfigError("weights file does not match p");
      }
      return *opt.given_weights;
    case WeightMode::Correlation: break;
  }
  return ProposalWeights::correlation(data);
}

double bic_score(const Dataset& data, const ModelIndexSet& model) {
  const FittedModel fit = fit_model(data, model);
  if (!fit.full_rank || !fit.residual_factor) return kInf;
  const double n = static_cast<double>(data.n());
  const double q = static_cast<double>(data.q());
  return n * (fit.log_det_residual - q * std::log(n)) +
         q * static_cast<double>(model.size()) * std::log(n);
}

double prediction_mse(const Dataset& train, const Dataset& test, const ModelIndexSet& model) {
  const FittedModel fit = fit_model(train, model);
  if (!fit.full_rank) return kInf;
  const DenseMatrix resid = test.y() - fit.coef * model_rows(test.x(), model);
  return resid.squaredNorm() / static_cast<double>(test.n() * test.q());
}

std::vector<std::size_t> assign_folds(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2 || folds > n) throw ConfigError("folds must satisfy 2 <= folds <= n");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  RngStream rng(seed, kFoldStream);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
  std::vector<std::size_t> fold(n);
  for (std::size_t r = 0; r < n; ++r) fold[perm[r]] = r * folds / n;
  return fold;
}

TuningResult tune_bic(const Dataset& data, const EpsilonGrid& grid, const TuneOptions& opt) {
  const ProposalWeights weights = make_weights(data, opt);
  const std::vector<int> path =
      forward_path(data, opt.max_model_size > 0 ? opt.max_model_size : default_size_cap(data));
  TuningResult res;
  res.method = TuneMethod::Bic;
  res.rows.resize(grid.size());
  std::vector<std::optional<ChainSummary>> chains(grid.size());
  parallel_for(grid.size(), opt.threads, [&](std::size_t i) {
    TuningRow& row = res.rows[i];
    row.epsilon = grid.values()[i];
    ChainConfig c = chain_config(opt, row.epsilon, opt.steps, opt.burn_in, kBicStream + i);
    c.weights = weights;
    c.start_path = path;
    try {
      chains[i] = run_chain(data, c);
      row.map_model = chains[i]->map_model;
      row.score = bic_score(data, *row.map_model);
    } catch (const InitializationFailed&) {
      row.score = kInf;
    }
  });
  res.chosen_index = argmin_smallest(res.rows);
  if (!chains[res.chosen_index]) {
    throw InitializationFailed("no epsilon in the grid admits any model");
  }
  res.chosen_epsilon = res.rows[res.chosen_index].epsilon;
  res.final_chain = std::move(*chains[res.chosen_index]);
  return res;
}

TuningResult tune_cv(const Dataset& data, const EpsilonGrid& grid, std::size_t folds,
                     const TuneOptions& opt) {
  const auto n = static_cast<std::size_t>(data.n());
  const auto fold_of = assign_folds(n, folds, opt.seed);
  std::vector<Dataset> train, test;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> tr, te;
    for (std::size_t i = 0; i < n; ++i) {
      (fold_of[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
    }
    train.push_back(data.select_observations(tr));
    test.push_back(data.select_observations(te));
  }
  std::vector<std::vector<int>> paths(folds);
  parallel_for(folds, opt.threads, [&](std::size_t f) {
    const int cap = default_size_cap(train[f]);
    if (cap >= 1) paths[f] = forward_path(train[f], opt.max_model_size > 0 ? opt.max_model_size : cap);
  });

  TuningResult res;
  res.method = TuneMethod::Cv;
  res.rows.resize(grid.size());
  std::vector<double> cell(grid.size() * folds, kInf);
  parallel_for(grid.size() * folds, opt.threads, [&](std::size_t c) {
    const std::size_t i = c / folds;
    const std::size_t f = c % folds;
    const Dataset& tr = train[f];
    ChainConfig cfg = chain_config(opt, grid.values()[i], opt.steps, opt.burn_in,
                                   kCvStream + c);
    const int cap = default_size_cap(tr);
    if (cap < 1) return;
    if (opt.max_model_size > 0) cfg.max_model_size = std::min(opt.max_model_size, cap);
    cfg.weights = make_weights(tr, opt);
    cfg.start_path = paths[f];
    try {
      const ChainSummary s = run_chain(tr, cfg);
      cell[c] = prediction_mse(tr, test[f], s.map_model);
    } catch (const InitializationFailed&) {
    } catch (const std::invalid_argument&) {
      // fold too small for the requested size cap
    }
  });
  for (std::size_t i = 0; i < grid.size(); ++i) {
    TuningRow& row = res.rows[i];
    row.epsilon = grid.values()[i];
    row.fold_scores.assign(cell.begin() + static_cast<std::ptrdiff_t>(i * folds),
                           cell.begin() + static_cast<std::ptrdiff_t>((i + 1) * folds));
    row.score = std::accumulate(row.fold_scores.begin(), row.fold_scores.end(), 0.0) /
                static_cast<double>(folds);
  }
  res.chosen_index = argmin_smallest(res.rows);
  if (!std::isfinite(res.rows[res.chosen_index].score)) {
    throw InitializationFailed("no epsilon in the grid gives a finite CV score");
  }
  res.chosen_epsilon = res.rows[res.chosen_index].epsilon;
  ChainConfig final_cfg = chain_config(opt, res.chosen_epsilon, opt.final_steps,
                                       opt.final_burn_in, kFinalStream);
  final_cfg.weights = make_weights(data, opt);
  res.final_chain = run_chain(data, final_cfg);
  res.rows[res.chosen_index].map_model = res.final_chain.map_model;
  return res;
}

}  // namespace eas
