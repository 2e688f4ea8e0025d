#include "eas/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "eas/errors.hpp"

namespace eas {

// ---- weights ----

ProposalWeights ProposalWeights::uniform(int p) {
  if (p < 1) throw std::invalid_argument("ProposalWeights: p must be >= 1");
  return from_values(std::vector<double>(static_cast<std::size_t>(p), 1.0 / p));
}

ProposalWeights ProposalWeights::correlation(const Dataset& data) {
  std::vector<double> w(static_cast<std::size_t>(data.p()));
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    const double xn = std::sqrt(data.gram()(j, j));
    w[j] = xn > 0.0 ? data.cross().row(j).norm() / xn : 0.0;
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) return uniform(static_cast<int>(data.p()));
  for (double& v : w) v /= total;
  return from_values(std::move(w));
}

ProposalWeights ProposalWeights::from_values(std::vector<double> values) {
  double total = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("ProposalWeights: weights must be finite and nonnegative");
    }
    total += v;
  }
  if (!(total > 0.0)) throw std::invalid_argument("ProposalWeights: weights sum to zero");
  ProposalWeights out;
  out.w_ = std::move(values);
  return out;
}

ModelIndexSet top_weighted(const ProposalWeights& weights, int k) {
  std::vector<int> order(static_cast<std::size_t>(weights.size()));
  std::iota(order.begin(), order.end(), 0);
  const auto& w = weights.values();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return w[a] > w[b]; });
  order.resize(static_cast<std::size_t>(std::clamp(k, 0, weights.size())));
  return ModelIndexSet(std::move(order));
}

// ---- scorer & cache ----

EasScorer::EasScorer(const Dataset& data, HConfig h, int mc_draws, std::uint64_t seed)
    : data_(data), h_(h), mc_draws_(mc_draws), seed_(seed) {}

const FittedModel& EasScorer::fit(const ModelIndexSet& model) {
  if (!last_ || last_->model != model) last_ = fit_model(data_, model);
  return *last_;
}

double EasScorer::log_prefactor(const ModelIndexSet& model) {
  return log_mass_prefactor(fit(model), data_.n(), data_.q());
}

double EasScorer::log_h(const ModelIndexSet& model) {
  const FittedModel& f = fit(model);
  if (mc_draws_ > 0) {
    RngStream rng(seed_, ModelIndexSetHash{}(model));
    const double eh = expected_h_monte_carlo(data_, f, h_, mc_draws_, rng);
    return eh > 0.0 ? std::log(eh) : kNegInf;
  }
  return h_pgd(data_, f, h_).h == 1 ? 0.0 : kNegInf;
}

MassCache::MassCache(ModelScorer& scorer, std::size_t capacity)
    : scorer_(scorer), capacity_(std::max<std::size_t>(capacity, 1)) {}

MassCache::Entry& MassCache::lookup(const ModelIndexSet& model) {
  auto it = map_.find(model);
  if (it != map_.end()) {
    order_.splice(order_.begin(), order_, it->second.lru);
    return it->second;
  }
  if (map_.size() >= capacity_) {
    map_.erase(order_.back());
    order_.pop_back();
  }
  order_.push_front(model);
  Entry e{scorer_.log_prefactor(model), std::nullopt, order_.begin()};
  return map_.emplace(model, std::move(e)).first->second;
}

double MassCache::log_prefactor(const ModelIndexSet& model) { return lookup(model).prefactor; }

double MassCache::log_h(const ModelIndexSet& model) {
  Entry& e = lookup(model);
  if (!e.log_h) {
    e.log_h = std::isfinite(e.prefactor) ? scorer_.log_h(model) : kNegInf;
    ++h_evaluations_;
  }
  return *e.log_h;
}

double MassCache::log_mass(const ModelIndexSet& model) {
  const double pre = log_prefactor(model);
  if (!std::isfinite(pre)) return kNegInf;
  return pre + log_h(model);
}

// ---- proposals ----

namespace {

struct Feasibility {
  bool add = false;
  bool remove = false;
  bool swap = false;
  double complement_weight = 0.0;
  int count() const { return int(add) + int(remove) + int(swap); }
};

Feasibility feasible_moves(const ModelIndexSet& m, const ProposalWeights& weights, int cap) {
  Feasibility f;
  const auto& w = weights.values();
  for (int j = 0; j < weights.size(); ++j) {
    if (!m.contains(j)) f.complement_weight += w[j];
  }
  const int k = static_cast<int>(m.size());
  const bool can_insert = f.complement_weight > 0.0;
  f.add = can_insert && k < cap;
  f.remove = k >= 2;
  f.swap = can_insert && k >= 1;
  return f;
}

int draw_absent(RngStream& rng, const ModelIndexSet& m, const ProposalWeights& weights,
                double complement_weight) {
  const auto& w = weights.values();
  const double target = rng.uniform() * complement_weight;
  double acc = 0.0;
  int last = -1;
  for (int j = 0; j < weights.size(); ++j) {
    if (m.contains(j) || w[j] <= 0.0) continue;
    acc += w[j];
    last = j;
    if (target < acc) return j;
  }
  return last;
}

}  // namespace

double proposal_log_probability(const ModelIndexSet& from, const ModelIndexSet& to,
                                const ProposalWeights& weights, int cap) {
  const Feasibility f = feasible_moves(from, weights, cap);
  if (f.count() == 0) return kNegInf;
  const double log_type = -std::log(static_cast<double>(f.count()));
  const auto& w = weights.values();
  const auto k = from.size();
  std::vector<int> added;
  std::vector<int> removed;
  std::set_difference(to.indices().begin(), to.indices().end(), from.indices().begin(),
                      from.indices().end(), std::back_inserter(added));
  std::set_difference(from.indices().begin(), from.indices().end(), to.indices().begin(),
                      to.indices().end(), std::back_inserter(removed));
  if (added.size() == 1 && removed.empty() && f.add) {
    return log_type + std::log(w[added[0]] / f.complement_weight);
  }
  if (added.empty() && removed.size() == 1 && f.remove) {
    return log_type - std::log(static_cast<double>(k));
  }
  if (added.size() == 1 && removed.size() == 1 && f.swap) {
    return log_type - std::log(static_cast<double>(k)) +
           std::log(w[added[0]] / f.complement_weight);
  }
  return kNegInf;
}

Proposal propose(RngStream& rng, const ModelIndexSet& current, const ProposalWeights& weights,
                 int cap) {
  if (current.empty()) throw std::invalid_argument("propose: current model is empty");
  const Feasibility f = feasible_moves(current, weights, cap);
  Proposal out;
  out.candidate = current;
  if (f.count() == 0) return out;
  std::vector<MoveType> types;
  if (f.add) types.push_back(MoveType::Add);
  if (f.remove) types.push_back(MoveType::Remove);
  if (f.swap) types.push_back(MoveType::Swap);
  out.move = types[rng.index(types.size())];
  const auto& idx = current.indices();
  switch (out.move) {
    case MoveType::Add:
      out.candidate = current.with(draw_absent(rng, current, weights, f.complement_weight));
      break;
    case MoveType::Remove:
      out.candidate = current.without(idx[rng.index(idx.size())]);
      break;
    case MoveType::Swap: {
      const int drop = idx[rng.index(idx.size())];
      const int add = draw_absent(rng, current, weights, f.complement_weight);
      out.candidate = current.without(drop).with(add);
      break;
    }
    case MoveType::Jump:
    case MoveType::Stay:
      break;
  }
  out.log_correction = proposal_log_probability(out.candidate, current, weights, cap) -
                       proposal_log_probability(current, out.candidate, weights, cap);
  return out;
}

namespace {

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

Proposal propose_jump(RngStream& rng, const ModelIndexSet& current, int p, int cap) {
  const int k = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(cap)));
  std::vector<int> pool(static_cast<std::size_t>(p));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) + rng.index(static_cast<std::size_t>(p - i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  Proposal out;
  out.candidate = ModelIndexSet(std::move(pool));
  if (out.candidate == current) {
    out.move = MoveType::Stay;
    return out;
  }
  out.move = MoveType::Jump;
  out.log_correction = log_binomial(p, k) - log_binomial(p, static_cast<int>(current.size()));
  return out;
}

StepResult mh_step(RngStream& rng, ChainState& state, MassCache& cache,
                   const ProposalWeights& weights, int cap, double jump_probability) {
  StepResult res;
  if (jump_probability > 0.0 && rng.uniform() < jump_probability) {
    res.proposal = propose_jump(rng, state.model, weights.size(), cap);
  } else {
    res.proposal = propose(rng, state.model, weights, cap);
  }
  const double log_u = std::log(rng.uniform());
  if (res.proposal.move == MoveType::Stay) return res;
  const ModelIndexSet& cand = res.proposal.candidate;
  const double pre = cache.log_prefactor(cand);
  if (!std::isfinite(pre)) return res;
  const double bound = pre - state.log_mass + res.proposal.log_correction;
  if (!(log_u < bound)) return res;
  const double lh = cache.log_h(cand);
  if (!(log_u < bound + lh)) return res;
  state.model = cand;
  state.log_mass = pre + lh;
  res.accepted = true;
  return res;
}

// ---- summaries ----

double ChainSummary::probability_of(const ModelIndexSet& m) const {
  for (const auto& v : models) {
    if (v.model == m) return v.probability;
  }
  return 0.0;
}

double ChainSummary::visit_frequency_of(const ModelIndexSet& m) const {
  for (const auto& v : models) {
    if (v.model == m) return v.visit_frequency;
  }
  return 0.0;
}

void finalize_summary(ChainSummary& s) {
  std::sort(s.models.begin(), s.models.end(), [](const VisitedModel& a, const VisitedModel& b) {
    if (a.log_mass != b.log_mass) return a.log_mass > b.log_mass;
    return a.model < b.model;
  });
  std::vector<double> logs;
  std::size_t total_visits = 0;
  for (const auto& v : s.models) {
    logs.push_back(v.log_mass);
    total_visits += v.visits;
  }
  const auto probs = normalize_log_masses(logs);
  for (std::size_t i = 0; i < s.models.size(); ++i) {
    s.models[i].probability = probs[i];
    s.models[i].visit_frequency =
        total_visits ? static_cast<double>(s.models[i].visits) / total_visits : 0.0;
  }
  s.map_model = s.models.front().model;
  s.map_log_mass = s.models.front().log_mass;
  s.inclusion = marginal_inclusion(s);
}

std::vector<double> marginal_inclusion(const ChainSummary& summary) {
  std::vector<double> logs;
  for (const auto& v : summary.models) logs.push_back(v.log_mass);
  const auto probs = normalize_log_masses(logs);
  std::vector<double> out(static_cast<std::size_t>(summary.p), 0.0);
  for (std::size_t i = 0; i < summary.models.size(); ++i) {
    for (int j : summary.models[i].model.indices()) {
      if (j < summary.p) out[j] += probs[i];
    }
  }
  for (double& v : out) v = std::min(v, 1.0);
  return out;
}

std::vector<int> forward_path(const Dataset& data, int max_size) {
  const Eigen::Index p = data.p();
  const Eigen::Index q = data.q();
  const double n = static_cast<double>(data.n());
  const DenseMatrix& g = data.gram();
  const DenseMatrix& c = data.cross();
  // beyond n/2 predictors the residual covariance is too poorly estimated to
  // steer the search
  max_size = std::min<int>(max_size, static_cast<int>(std::min<Eigen::Index>(
                                         {p, data.n() - q - 1, data.n() / 2})));
  std::vector<int> path;
  std::vector<bool> used(static_cast<std::size_t>(p), false);
  double log_det;
  try {
    log_det = cholesky(data.response_gram()).log_det();
  } catch (const NotPositiveDefinite&) {
    return path;
  }
  double bic = n * (log_det - static_cast<double>(q) * std::log(n));
  // the path is cut at its extended-BIC minimum, searched until 10 steps
  // bring no improvement (the criterion collapses again near saturation)
  constexpr std::size_t kPatience = 10;
  double best_bic = bic;
  std::size_t best_size = 0;
  while (static_cast<int>(path.size()) < max_size) {
    const auto k = static_cast<Eigen::Index>(path.size());
    // residualized predictor norms D and cross products R = X (I - H) Y^T
    DenseMatrix z(k, p), a(k, q);
    Vector d = g.diagonal();
    DenseMatrix r = c;
    DenseMatrix sigma = data.response_gram();
    if (k > 0) {
      DenseMatrix gmm(k, k), gm(k, p), cm(k, q);
      for (Eigen::Index i = 0; i < k; ++i) {
        gm.row(i) = g.row(path[i]);
        cm.row(i) = c.row(path[i]);
        for (Eigen::Index j = 0; j < k; ++j) gmm(i, j) = g(path[i], path[j]);
      }
      const SpdFactor lf = cholesky(gmm);
      z = lf.solve_lower(gm);
      a = lf.solve_lower(cm);
      d -= z.colwise().squaredNorm().transpose();
      r.noalias() -= z.transpose() * a;
      sigma.noalias() -= a.transpose() * a;
      sigma = 0.5 * (sigma + sigma.transpose()).eval();
    }
    std::optional<SpdFactor> sf;
    try {
      sf = cholesky(sigma);
    } catch (const NotPositiveDefinite&) {
      break;
    }
    int best = -1;
    double best_drop = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (used[j] || !(d(j) > 1e-10 * g(j, j)) || g(j, j) <= 0.0) continue;
      const double explained = sf->solve_lower(r.row(j).transpose()).squaredNorm() / d(j);
      if (!(explained < 1.0)) continue;
      const double drop = std::log1p(-explained);
      if (best < 0 || drop < best_drop) {
        best = static_cast<int>(j);
        best_drop = drop;
      }
    }
    if (best < 0) break;
    // extended BIC: the 2 log C(p, k) model-count term keeps the path short when p >> n
    const double next = bic + n * best_drop + static_cast<double>(q) * std::log(n) +
                        2.0 * std::log(static_cast<double>(p - k) / static_cast<double>(k + 1));
    bic = next;
    used[best] = true;
    path.push_back(best);
    if (bic < best_bic) {
      best_bic = bic;
      best_size = path.size();
    } else if (path.size() >= best_size + kPatience) {
      break;
    }
  }
  path.resize(best_size);
  // Backward pass: repeatedly drop the predictor whose removal raises log det
  // Sigma-hat least, and order the path so every prefix is a model on this route.
  std::vector<int> order;
  std::vector<int> current = path;
  while (current.size() > 1) {
    std::size_t drop = 0;
    double best_log_det = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < current.size(); ++i) {
      std::vector<int> rest = current;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      const double ld = fit_model(data, ModelIndexSet(rest)).log_det_residual;
      if (i == 0 || ld < best_log_det) {
        drop = i;
        best_log_det = ld;
      }
    }
    order.push_back(current[drop]);
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  order.insert(order.end(), current.begin(), current.end());
  return {order.rbegin(), order.rend()};
}

int default_size_cap(const Dataset& data) {
  return static_cast<int>(std::min<Eigen::Index>(data.p(), data.n() - data.q() - 1));
}

ChainSummary run_chain(ModelScorer& scorer, int p, const ChainConfig& cfg,
                       const ProposalWeights& weights, int cap) {
  const std::optional<std::vector<int>>& path = cfg.start_path;
  if (cfg.burn_in >= cfg.steps) {
    throw std::invalid_argument("run_chain: burn-in must be smaller than steps");
  }
  if (weights.size() != p) throw std::invalid_argument("run_chain: weight count != p");
  MassCache cache(scorer, cfg.cache_capacity);

  std::optional<ChainState> start;
  auto try_start = [&](const ModelIndexSet& m) {
    if (m.empty() || static_cast<int>(m.size()) > cap || m.indices().back() >= p) return false;
    const double lm = cache.log_mass(m);
    if (!std::isfinite(lm)) return false;
    start = ChainState{m, lm};
    return true;
  };
  bool ok = cfg.initial && try_start(*cfg.initial);
  if (!ok && path) {
    for (std::size_t k = path->size(); !ok && k >= 1; --k) {
      ok = try_start(ModelIndexSet(std::vector<int>(path->begin(), path->begin() + k)));
    }
  }
  for (int k = std::min(5, cap); !ok && k >= 1; --k) ok = try_start(top_weighted(weights, k));
  if (!ok) {
    throw InitializationFailed("no admissible initial model at epsilon = " +
                               std::to_string(cfg.epsilon));
  }

  RngStream rng(cfg.seed, cfg.stream);
  ChainState state = *start;
  std::map<ModelIndexSet, VisitedModel> visited;
  std::size_t accepted = 0;
  for (std::size_t t = 1; t <= cfg.steps; ++t) {
    if (mh_step(rng, state, cache, weights, cap, cfg.jump_probability).accepted) ++accepted;
    if (t > cfg.burn_in) {
      auto [it, fresh] = visited.try_emplace(state.model);
      if (fresh) {
        it->second.model = state.model;
        it->second.log_mass = state.log_mass;
      }
      ++it->second.visits;
    }
  }

  ChainSummary s;
  s.p = p;
  s.cap = cap;
  s.steps = cfg.steps;
  s.burn_in = cfg.burn_in;
  s.seed = cfg.seed;
  s.epsilon = cfg.epsilon;
  s.initial_model = start->model;
  s.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(cfg.steps);
  for (auto& [m, v] : visited) s.models.push_back(std::move(v));
  finalize_summary(s);
  return s;
}

ChainSummary run_chain(const Dataset& data, const ChainConfig& cfg) {
  const int cap = cfg.max_model_size > 0 ? cfg.max_model_size : default_size_cap(data);
  if (cap < 1 || cap >= data.n() - data.q()) {
    throw std::invalid_argument("run_chain: model size cap must satisfy 1 <= cap < n - q");
  }
  const ProposalWeights weights =
      cfg.weights ? *cfg.weights : ProposalWeights::correlation(data);
  HConfig h = cfg.h;
  h.epsilon = cfg.epsilon;
  EasScorer scorer(data, h, cfg.mc_h_draws, cfg.seed);
  if (cfg.forward_start && !cfg.start_path) {
    ChainConfig with_path = cfg;
    with_path.start_path = forward_path(data, cap);
    return run_chain(scorer, static_cast<int>(data.p()), with_path, weights, cap);
  }
  return run_chain(scorer, static_cast<int>(data.p()), cfg, weights, cap);
}

}  // namespace eas
