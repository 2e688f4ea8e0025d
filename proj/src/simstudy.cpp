#include "eas/simstudy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "eas/errors.hpp"
#include "eas/parallel.hpp"

namespace eas {

void SimulationDesign::validate() const {
  if (n < 1 || p < 1 || q < 1) throw ConfigError("design: n, p, q must be >= 1");
  if (true_size < 0 || true_size > p) throw ConfigError("design: |M_o| must lie in [0, p]");
}

std::vector<std::string> preset_names() {
  return {"ld-sparse",       "ld-dense",   "hd-sparse",  "hd-dense",        "uhd-ultrasparse",
          "uhd-sparse",      "largeq-ar1", "largeq-nondecay", "largeq-dense"};
}

SimulationDesign design_preset(const std::string& name) {
  using P = PredictorCovariance;
  using E = ErrorCovariance;
  auto make = [&](int n, int p, int q, int m, P pc = P::Ar1, E ec = E::Ar1) {
    return SimulationDesign{name, n, p, q, m, pc, ec, false};
  };
  if (name == "ld-sparse") return make(60, 30, 3, 5);
  if (name == "ld-dense") return make(80, 60, 6, 40);
  if (name == "hd-sparse") return make(50, 200, 5, 20);
  if (name == "hd-dense") return make(60, 100, 6, 40);
  if (name == "uhd-ultrasparse") return make(100, 500, 3, 10);
  if (name == "uhd-sparse") return make(150, 1000, 4, 50);
  if (name == "largeq-ar1") return make(150, 1000, 60, 50);
  if (name == "largeq-nondecay") return make(150, 1000, 60, 50, P::NonDecaying);
  if (name == "largeq-dense") return make(150, 1000, 60, 50, P::NonDecaying, E::Dense);
  throw ConfigError("unknown preset '" + name + "'");
}

DenseMatrix predictor_covariance(PredictorCovariance kind, int p) {
  DenseMatrix g(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      g(i, j) = kind == PredictorCovariance::Ar1 ? std::pow(0.5, std::abs(i - j))
                                                 : 0.5 * (1.0 + (i == j ? 1.0 : 0.0));
    }
  }
  return g;
}

DenseMatrix error_covariance(ErrorCovariance kind, int q) {
  DenseMatrix v(q, q);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      v(i, j) = kind == ErrorCovariance::Ar1 ? 2.0 * std::pow(0.5, std::abs(i - j))
                                             : 1.0 + (i == j ? 1.0 : 0.0);
    }
  }
  return v;
}

namespace {

DenseMatrix draw_design(const SimulationDesign& d, RngStream& rng) {
  const SpdFactor gamma = cholesky(predictor_covariance(d.predictor_cov, d.p));
  DenseMatrix z(d.p, d.n);
  for (int c = 0; c < d.n; ++c) {
    for (int r = 0; r < d.p; ++r) z(r, c) = rng.normal();
  }
  return gamma.lower() * z;
}

DenseMatrix draw_response(const SimulationDesign& d, const DenseMatrix& x,
                          const ModelIndexSet& truth, const DenseMatrix& coef,
                          const DenseMatrix& v, RngStream& rng) {
  const SpdFactor vf = cholesky(v);
  DenseMatrix z(d.q, d.n);
  for (int c = 0; c < d.n; ++c) {
    for (int r = 0; r < d.q; ++r) z(r, c) = rng.normal();
  }
  DenseMatrix y = vf.lower() * z;
  if (!truth.empty()) y += coef * model_rows(x, truth);
  return y;
}

}  // namespace

SimulatedData generate(const SimulationDesign& design, RngStream& rng) {
  design.validate();
  DenseMatrix x = draw_design(design, rng);
  // partial Fisher-Yates for |M_o| indices without replacement
  std::vector<int> pool(static_cast<std::size_t>(design.p));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < design.true_size; ++i) {
    const auto j = i + static_cast<int>(rng.index(static_cast<std::size_t>(design.p - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(design.true_size));
  ModelIndexSet truth(pool);
  DenseMatrix coef(design.q, design.true_size);
  for (int c = 0; c < design.true_size; ++c) {
    for (int r = 0; r < design.q; ++r) {
      const double u = -5.0 + 9.0 * rng.uniform();
      coef(r, c) = design.zero_coefficients ? 0.0 : u + (u > -0.5 ? 1.0 : 0.0);
    }
  }
  DenseMatrix v = error_covariance(design.error_cov, design.q);
  DenseMatrix y = draw_response(design, x, truth, coef, v, rng);
  return SimulatedData{Dataset(std::move(y), std::move(x)), truth, coef, v};
}

Dataset generate_test(const SimulationDesign& design, const SimulatedData& sim, RngStream& rng) {
  DenseMatrix x = draw_design(design, rng);
  DenseMatrix y = draw_response(design, x, sim.truth, sim.coef, sim.error_cov, rng);
  return Dataset(std::move(y), std::move(x));
}

MetricsRecord compute_metrics(const ModelIndexSet& estimated, const ModelIndexSet& truth,
                              const DenseMatrix& coef, const Dataset& test) {
  MetricsRecord m;
  const long long q = test.q();
  const long long p = test.p();
  long long both = 0;
  for (int j : estimated.indices()) both += truth.contains(j) ? 1 : 0;
  const long long est = static_cast<long long>(estimated.size());
  const long long tru = static_cast<long long>(truth.size());
  m.tp = q * both;
  m.fp = q * (est - both);
  m.fn = q * (tru - both);
  m.tn = q * (p - est - tru + both);
  if (m.fp + m.tp == 0) {
    m.fdr_undefined = true;
  } else {
    m.fdr = static_cast<double>(m.fp) / static_cast<double>(m.fp + m.tp);
  }
  if (m.fn + m.tn == 0) {
    m.fnr_undefined = true;
  } else {
    m.fnr = static_cast<double>(m.fn) / static_cast<double>(m.fn + m.tn);
  }
  m.mp = static_cast<double>(m.fp + m.fn) / static_cast<double>(p * q);
  m.pcm = estimated == truth ? 1 : 0;
  DenseMatrix resid = test.y();
  if (!estimated.empty()) resid -= coef * model_rows(test.x(), estimated);
  m.mspe = resid.squaredNorm() / static_cast<double>(test.n() * test.q());
  return m;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t h = values.size() / 2;
  return values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
}

ReplicationRecord run_replication(const SimulationDesign& design, std::size_t replication,
                                  std::uint64_t seed, const MethodConfig& method) {
  ReplicationRecord rec;
  rec.replication = replication;
  const RngStream base(seed, replication);
  RngStream data_rng = base.derive(1);
  RngStream test_rng = base.derive(2);
  const auto start = std::chrono::steady_clock::now();
  try {
    const SimulatedData sim = generate(design, data_rng);
    rec.truth = sim.truth;
    TuneOptions opt = method.options;
    opt.seed = mix64(seed ^ mix64(replication + 1));
    opt.threads = 1;
    ChainSummary chain;
    if (method.fixed_epsilon) {
      ChainConfig c;
      c.steps = opt.steps;
      c.burn_in = opt.burn_in;
      c.seed = opt.seed;
      c.epsilon = *method.fixed_epsilon;
      c.h = opt.h;
      c.max_model_size = opt.max_model_size;
      c.jump_probability = opt.jump_probability;
      c.weights = make_weights(sim.data, opt);
      chain = run_chain(sim.data, c);
      rec.chosen_epsilon = c.epsilon;
    } else {
      TuningResult t = method.method == TuneMethod::Bic
                           ? tune_bic(sim.data, method.grid, opt)
                           : tune_cv(sim.data, method.grid, method.folds, opt);
      rec.chosen_epsilon = t.chosen_epsilon;
      chain = std::move(t.final_chain);
    }
    rec.estimated = chain.map_model;
    const FittedModel refit = fit_model(sim.data, rec.estimated);
    const Dataset test = generate_test(design, sim, test_rng);
    rec.metrics = compute_metrics(rec.estimated, rec.truth, refit.coef, test);
    rec.metrics.true_model_probability = chain.probability_of(sim.truth);
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.metrics.runtime_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

AggregateMetrics aggregate(const std::vector<ReplicationRecord>& records) {
  AggregateMetrics a;
  std::vector<double> mspe, runtime;
  for (const auto& r : records) {
    if (!r.ok) {
      ++a.failed;
      continue;
    }
    ++a.succeeded;
    mspe.push_back(r.metrics.mspe);
    runtime.push_back(r.metrics.runtime_sec);
    a.mean_fdr += r.metrics.fdr;
    a.mean_fnr += r.metrics.fnr;
    a.mean_mp += r.metrics.mp;
    a.mean_pcm += r.metrics.pcm;
    a.mean_true_model_probability += r.metrics.true_model_probability.value_or(0.0);
  }
  if (a.succeeded) {
    const double k = static_cast<double>(a.succeeded);
    a.mean_fdr /= k;
    a.mean_fnr /= k;
    a.mean_mp /= k;
    a.mean_pcm /= k;
    a.mean_true_model_probability /= k;
  }
  a.median_mspe = median(mspe);
  a.median_runtime_sec = median(runtime);
  return a;
}

ExperimentReport run_experiment(const SimulationDesign& design, std::size_t replications,
                                std::uint64_t seed, const MethodConfig& method, int threads) {
  if (replications < 1) throw ConfigError("replications must be >= 1");
  design.validate();
  ExperimentReport rep;
  rep.design = design;
  rep.method = method.fixed_epsilon ? "fixed" : to_string(method.method);
  rep.replications = replications;
  rep.seed = seed;
  rep.records.resize(replications);
  parallel_for(replications, threads, [&](std::size_t r) {
    rep.records[r] = run_replication(design, r, seed, method);
  });
  rep.aggregate = aggregate(rep.records);
  return rep;
}

}  // namespace eas
