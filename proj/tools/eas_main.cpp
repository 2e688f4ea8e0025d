// eas: group variable selection for multivariate regression by
// epsilon-admissible subsets.
//
//   eas fit --y Y.csv --x X.csv --epsilon 0.5
//   eas tune --y Y.csv --x X.csv --grid 0.05:10:24 --method bic
//   eas simulate --preset ld-sparse --y Y.csv --x X.csv
//   eas benchmark --preset ld-sparse --reps 10 --seed 7
//   eas summarize --in report.json
//
// Results go to stdout or --out; diagnostics to stderr.
// Exit codes: 0 ok, 2 input error, 3 initialization failure, 4 config error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "eas/errors.hpp"
#include "eas/io.hpp"
#include "eas/parallel.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitInit = 3;
constexpr int kExitConfig = 4;

struct Options {
  std::string y_path, x_path, in_path, out_path, weights_file;
  std::string grid = "0.05:10:24";
  std::string method = "bic";
  std::string format = "json";
  std::string weights = "corr";
  std::string preset;
  double epsilon = 1.0;
  std::optional<double> fixed_epsilon;
  std::size_t folds = 10;
  std::optional<std::size_t> steps, burn_in;
  std::uint64_t seed = 1;
  int threads = eas::default_threads();
  std::size_t reps = 10;
  int max_size = 0;
  int mc_draws = 0;
  double jump = 0.05;
  bool header = false, center = false, standardize = false, timing = false;
  bool no_polish = false;
};

void emit(const Options& o, const std::string& text) {
  if (o.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.out_path);
  if (!out) throw eas::InputError("cannot write '" + o.out_path + "'");
  out << text;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

eas::Dataset load(const Options& o) {
  if (o.y_path.empty() || o.x_path.empty()) throw eas::ConfigError("--y and --x are required");
  eas::Dataset d = eas::read_dataset(o.y_path, o.x_path, o.header);
  if (o.center || o.standardize) d = eas::preprocess(d, true, o.standardize);
  return d;
}

eas::WeightMode weight_mode(const Options& o) {
  if (o.weights == "corr") return eas::WeightMode::Correlation;
  if (o.weights == "uniform") return eas::WeightMode::Uniform;
  if (o.weights != "file") throw eas::ConfigError("--weights must be corr, uniform or file");
  if (o.weights_file.empty()) throw eas::ConfigError("--weights file needs --weights-file");
  return eas::WeightMode::Given;
}

eas::TuneOptions tune_options(const Options& o, const eas::Dataset* data, bool cv) {
  eas::TuneOptions t;
  t.seed = o.seed;
  t.steps = o.steps.value_or(cv ? 500 : 5000);
  t.burn_in = o.burn_in.value_or(cv ? 200 : 2000);
  t.weights = weight_mode(o);
  if (t.weights == eas::WeightMode::Given) {
    const eas::DenseMatrix w = eas::read_csv_file(o.weights_file, o.header);
    if (data && w.size() != data->p()) {
      throw eas::InputError(o.weights_file + ": expected " + std::to_string(data->p()) +
                            " weights, found " + std::to_string(w.size()));
    }
    try {
      t.given_weights = eas::ProposalWeights::from_values(
          std::vector<double>(w.data(), w.data() + w.size()));
    } catch (const std::invalid_argument& e) {
      throw eas::InputError(o.weights_file + ": " + e.what());
    }
  }
  t.h.polish = !o.no_polish;
  t.max_model_size = o.max_size;
  t.jump_probability = o.jump;
  t.threads = o.threads;
  return t;
}

eas::TuneMethod tune_method(const Options& o) {
  if (o.method == "bic") return eas::TuneMethod::Bic;
  if (o.method == "cv") return eas::TuneMethod::Cv;
  throw eas::ConfigError("--method must be bic or cv");
}

bool table(const Options& o) {
  if (o.format != "json" && o.format != "table") {
    throw eas::ConfigError("--format must be json or table");
  }
  return o.format == "table";
}

int cmd_fit(const Options& o) {
  const bool as_table = table(o);
  const eas::Dataset data = load(o);
  const eas::TuneOptions t = tune_options(o, &data, false);
  eas::ChainConfig c;
  c.steps = t.steps;
  c.burn_in = t.burn_in;
  c.seed = o.seed;
  c.epsilon = o.epsilon;
  c.max_model_size = o.max_size;
  c.jump_probability = o.jump;
  c.weights = eas::make_weights(data, t);
  c.h = t.h;
  c.mc_h_draws = o.mc_draws;
  const eas::ChainSummary s = eas::run_chain(data, c);
  emit(o, as_table ? eas::format_table(s) : dump(eas::to_json(s)));
  return 0;
}

int cmd_tune(const Options& o) {
  const bool as_table = table(o);
  const eas::TuneMethod method = tune_method(o);
  const eas::EpsilonGrid grid = eas::EpsilonGrid::parse(o.grid);
  const eas::Dataset data = load(o);
  const eas::TuneOptions t = tune_options(o, &data, method == eas::TuneMethod::Cv);
  const eas::TuningResult r = method == eas::TuneMethod::Bic
                                  ? eas::tune_bic(data, grid, t)
                                  : eas::tune_cv(data, grid, o.folds, t);
  emit(o, as_table ? eas::format_table(r) : dump(eas::to_json(r)));
  return 0;
}

int cmd_simulate(const Options& o) {
  if (o.preset.empty()) throw eas::ConfigError("--preset is required");
  if (o.y_path.empty() || o.x_path.empty()) throw eas::ConfigError("--y and --x are required");
  const eas::SimulationDesign design = eas::design_preset(o.preset);
  eas::RngStream rng(o.seed);
  const eas::SimulatedData sim = eas::generate(design, rng);
  eas::write_csv_file(o.y_path, sim.data.y());
  eas::write_csv_file(o.x_path, sim.data.x());
  nlohmann::json j = {{"design", eas::to_json(design)},
                      {"seed", o.seed},
                      {"true_model", sim.truth.one_based()}};
  emit(o, dump(j));
  return 0;
}

int cmd_benchmark(const Options& o) {
  const bool as_table = table(o);
  if (o.preset.empty()) throw eas::ConfigError("--preset is required");
  const eas::SimulationDesign design = eas::design_preset(o.preset);
  eas::MethodConfig m;
  m.method = tune_method(o);
  m.grid = eas::EpsilonGrid::parse(o.grid);
  m.folds = o.folds;
  m.options = tune_options(o, nullptr, m.method == eas::TuneMethod::Cv);
  m.fixed_epsilon = o.fixed_epsilon;
  const eas::ExperimentReport r = eas::run_experiment(design, o.reps, o.seed, m, o.threads);
  for (const auto& rec : r.records) {
    if (!rec.ok) std::cerr << "replication " << rec.replication << ": " << rec.error << "\n";
  }
  emit(o, as_table ? eas::format_table(r, o.timing) : dump(eas::to_json(r, o.timing)));
  return 0;
}

std::string summarize_json(const nlohmann::json& j) {
  std::ostringstream os;
  auto chain = [&](const nlohmann::json& c) {
    os << "MAP model " << c.at("map_model").dump() << "  acceptance "
       << c.at("acceptance_rate").get<double>() << "\n";
    std::size_t shown = 0;
    for (const auto& m : c.at("models")) {
      if (shown++ == 10) break;
      os << "  " << m.at("indices").dump() << "  prob " << m.at("prob").get<double>()
         << "\n";
    }
  };
  if (j.contains("aggregate")) {
    os << "design " << j.at("design").at("name").get<std::string>() << "  method "
       << j.at("method").get<std::string>() << "\n";
    for (const auto& [k, v] : j.at("aggregate").items()) os << "  " << k << " " << v.dump() << "\n";
  } else if (j.contains("final_chain")) {
    os << "method " << j.at("method").get<std::string>() << "  chosen epsilon "
       << j.at("chosen_epsilon").get<double>() << "\n";
    chain(j.at("final_chain"));
  } else if (j.contains("models")) {
    chain(j);
  } else {
    throw eas::InputError("unrecognized report");
  }
  return os.str();
}

int cmd_summarize(const Options& o) {
  if (o.in_path.empty()) throw eas::ConfigError("--in is required");
  std::ifstream in(o.in_path);
  if (!in) throw eas::InputError("cannot open '" + o.in_path + "'");
  nlohmann::json j;
  try {
    in >> j;
    emit(o, summarize_json(j));
  } catch (const nlohmann::json::exception& e) {
    throw eas::InputError(o.in_path + ": " + e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group variable selection by epsilon-admissible subsets"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "RNG seed");
    c->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    c->add_option("--out", o.out_path, "Output file (default stdout)");
    c->add_option("--format", o.format, "json or table");
  };
  auto add_data = [&](CLI::App* c) {
    c->add_option("--y", o.y_path, "Responses CSV, one row per observation");
    c->add_option("--x", o.x_path, "Predictors CSV, one row per observation");
    c->add_flag("--header", o.header, "First CSV line is a header");
    c->add_flag("--center", o.center, "Center every column");
    c->add_flag("--standardize", o.standardize, "Center and scale every column");
  };
  auto add_chain = [&](CLI::App* c) {
    c->add_option("--steps", o.steps, "MCMC steps");
    c->add_option("--burnin", o.burn_in, "Burn-in steps");
    c->add_option("--weights", o.weights, "corr, uniform or file");
    c->add_option("--weights-file", o.weights_file, "One weight per predictor");
    c->add_option("--max-size", o.max_size, "Largest model size (0: n-q-1)");
    c->add_flag("--no-polish", o.no_polish, "Plain projected gradient in h");
    c->add_option("--jump", o.jump, "Share of independence-proposal steps")
        ->check(CLI::Range(0.0, 1.0));
  };
  auto add_tune = [&](CLI::App* c) {
    c->add_option("--grid", o.grid, "Epsilon grid lo:hi:k");
    c->add_option("--method", o.method, "bic or cv");
    c->add_option("--folds", o.folds, "CV folds")->check(CLI::Range(2, 1000));
  };

  auto* fit = app.add_subcommand("fit", "Sample models at a fixed epsilon");
  add_common(fit);
  add_data(fit);
  add_chain(fit);
  fit->add_option("--epsilon", o.epsilon, "Admissibility threshold");
  fit->add_option("--mc-h", o.mc_draws, "Matrix-t draws per model for E[h] (0: plug-in)");

  auto* tune = app.add_subcommand("tune", "Choose epsilon on a grid");
  add_common(tune);
  add_data(tune);
  add_chain(tune);
  add_tune(tune);

  auto* simulate = app.add_subcommand("simulate", "Write one synthetic dataset");
  add_common(simulate);
  simulate->add_option("--preset", o.preset, "Design preset");
  simulate->add_option("--y", o.y_path, "Responses CSV to write");
  simulate->add_option("--x", o.x_path, "Predictors CSV to write");

  auto* bench = app.add_subcommand("benchmark", "Run a simulation experiment");
  add_common(bench);
  add_chain(bench);
  add_tune(bench);
  bench->add_option("--preset", o.preset, "Design preset");
  bench->add_option("--reps", o.reps, "Replications")->check(CLI::PositiveNumber);
  bench->add_option("--epsilon", o.fixed_epsilon, "Skip tuning and use this epsilon");
  bench->add_flag("--timing", o.timing, "Include wall-clock runtimes");

  auto* summarize = app.add_subcommand("summarize", "Print a short table from a JSON report");
  summarize->add_option("--in", o.in_path, "JSON report");
  summarize->add_option("--out", o.out_path, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*fit) return cmd_fit(o);
    if (*tune) return cmd_tune(o);
    if (*simulate) return cmd_simulate(o);
    if (*bench) return cmd_benchmark(o);
    return cmd_summarize(o);
  } catch (const eas::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const eas::InitializationFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInit;
  } catch (const eas::AllInadmissible& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInit;
  } catch (const eas::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
