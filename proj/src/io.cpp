#include "eas/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "eas/errors.hpp"

namespace eas {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, const std::string& source, std::size_t line,
                  std::size_t col) {
  const std::string cell = trim(raw);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (cell.empty() || used != cell.size() || !std::isfinite(v)) {
    throw InputError(source + ":" + std::to_string(line) + ": field " + std::to_string(col) +
                     " is not a finite number: '" + cell + "'");
  }
  return v;
}

// JSON numbers cannot hold -inf; emit null instead.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

DenseMatrix read_csv(std::istream& in, bool header, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool skipped_header = !header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_cell(cell, source, line_no, row.size() + 1));
    if (!line.empty() && line.back() == ',') {
      throw InputError(source + ":" + std::to_string(line_no) + ": trailing empty field");
    }
    if (width == 0) {
      width = row.size();
    } else if (row.size() != width) {
      throw InputError(source + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(width) + " fields, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(source + ": no data rows");
  DenseMatrix m(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) m(c, r) = rows[r][c];
  }
  return m;
}

DenseMatrix read_csv_file(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_csv(in, header, path);
}

void write_csv(std::ostream& out, const DenseMatrix& m) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index r = 0; r < m.cols(); ++r) {
    for (Eigen::Index c = 0; c < m.rows(); ++c) {
      if (c) out << ',';
      out << m(c, r);
    }
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_csv(out, m);
}

Dataset read_dataset(const std::string& y_path, const std::string& x_path, bool header) {
  DenseMatrix y = read_csv_file(y_path, header);
  DenseMatrix x = read_csv_file(x_path, header);
  if (y.cols() != x.cols()) {
    throw InputError("Y has " + std::to_string(y.cols()) + " rows but X has " +
                     std::to_string(x.cols()));
  }
  try {
    return Dataset(std::move(y), std::move(x));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

json to_json(const ChainSummary& s) {
  json models = json::array();
  for (const auto& m : s.models) {
    models.push_back({{"indices", m.model.one_based()},
                      {"log_mass", finite_or_null(m.log_mass)},
                      {"prob", m.probability},
                      {"visits", m.visits},
                      {"visit_frequency", m.visit_frequency}});
  }
  json inclusion = json::object();
  for (std::size_t j = 0; j < s.inclusion.size(); ++j) {
    inclusion[std::to_string(j + 1)] = s.inclusion[j];
  }
  return {{"map_model", s.map_model.one_based()},
          {"map_log_mass", finite_or_null(s.map_log_mass)},
          {"models", std::move(models)},
          {"inclusion", std::move(inclusion)},
          {"acceptance_rate", s.acceptance_rate},
          {"config",
           {{"p", s.p},
            {"max_model_size", s.cap},
            {"steps", s.steps},
            {"burn_in", s.burn_in},
            {"seed", s.seed},
            {"epsilon", s.epsilon},
            {"initial_model", s.initial_model.one_based()}}}};
}

json to_json(const TuningResult& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = {{"epsilon", r.epsilon}, {"score", finite_or_null(r.score)}};
    row["map_model"] = r.map_model ? json(r.map_model->one_based()) : json(nullptr);
    if (!r.fold_scores.empty()) {
      json folds = json::array();
      for (double f : r.fold_scores) folds.push_back(finite_or_null(f));
      row["fold_scores"] = std::move(folds);
    }
    rows.push_back(std::move(row));
  }
  return {{"method", to_string(t.method)},
          {"chosen_epsilon", t.chosen_epsilon},
          {"chosen_index", t.chosen_index},
          {"grid", std::move(rows)},
          {"final_chain", to_json(t.final_chain)}};
}

json to_json(const SimulationDesign& d) {
  return {{"name", d.name},
          {"n", d.n},
          {"p", d.p},
          {"q", d.q},
          {"true_size", d.true_size},
          {"predictor_covariance", d.predictor_cov == PredictorCovariance::Ar1 ? "ar1" : "nondecaying"},
          {"error_covariance", d.error_cov == ErrorCovariance::Ar1 ? "ar1" : "dense"},
          {"zero_coefficients", d.zero_coefficients}};
}

json to_json(const ExperimentReport& r, bool timing) {
  json records = json::array();
  for (const auto& rec : r.records) {
    json j = {{"replication", rec.replication}, {"ok", rec.ok}};
    if (!rec.ok) {
      j["error"] = rec.error;
    } else {
      const MetricsRecord& m = rec.metrics;
      j["chosen_epsilon"] = rec.chosen_epsilon;
      j["estimated_model"] = rec.estimated.one_based();
      j["true_model"] = rec.truth.one_based();
      j["mspe"] = m.mspe;
      j["fdr"] = m.fdr;
      j["fnr"] = m.fnr;
      j["mp"] = m.mp;
      j["pcm"] = m.pcm;
      j["counts"] = {{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}};
      j["fdr_undefined"] = m.fdr_undefined;
      j["fnr_undefined"] = m.fnr_undefined;
      j["true_model_probability"] =
          m.true_model_probability ? json(*m.true_model_probability) : json(nullptr);
    }
    if (timing) j["runtime_sec"] = rec.metrics.runtime_sec;
    records.push_back(std::move(j));
  }
  const AggregateMetrics& a = r.aggregate;
  json agg = {{"median_mspe", a.median_mspe},
              {"mean_fdr", a.mean_fdr},
              {"mean_fnr", a.mean_fnr},
              {"mean_mp", a.mean_mp},
              {"mean_pcm", a.mean_pcm},
              {"mean_true_model_probability", a.mean_true_model_probability},
              {"succeeded", a.succeeded},
              {"failed", a.failed}};
  if (timing) agg["median_runtime_sec"] = a.median_runtime_sec;
  return {{"design", to_json(r.design)},
          {"method", r.method},
          {"replications", r.replications},
          {"seed", r.seed},
          {"records", std::move(records)},
          {"aggregate", std::move(agg)}};
}

std::string format_table(const ChainSummary& s, std::size_t max_rows) {
  std::ostringstream os;
  os << "epsilon " << s.epsilon << "  steps " << s.steps << "  burn-in " << s.burn_in
     << "  acceptance " << fixed(s.acceptance_rate, 3) << "\n";
  os << "MAP " << s.map_model.to_string() << "\n\n";
  os << std::left << std::setw(6) << "rank" << std::setw(32) << "model" << std::right
     << std::setw(14) << "log mass" << std::setw(12) << "prob" << std::setw(10) << "visits"
     << "\n";
  for (std::size_t i = 0; i < s.models.size() && i < max_rows; ++i) {
    const auto& m = s.models[i];
    os << std::left << std::setw(6) << i + 1 << std::setw(32) << m.model.to_string()
       << std::right << std::setw(14) << fixed(m.log_mass, 3) << std::setw(12)
       << fixed(m.probability, 6) << std::setw(10) << m.visits << "\n";
  }
  os << "\n" << std::left << std::setw(10) << "predictor" << std::right << std::setw(12)
     << "inclusion" << "\n";
  for (std::size_t j = 0; j < s.inclusion.size(); ++j) {
    if (s.inclusion[j] <= 0.0) continue;
    os << std::left << std::setw(10) << j + 1 << std::right << std::setw(12)
       << fixed(s.inclusion[j], 6) << "\n";
  }
  return os.str();
}

std::string format_table(const TuningResult& t) {
  std::ostringstream os;
  os << "method " << to_string(t.method) << "  chosen epsilon " << t.chosen_epsilon << "\n\n";
  os << std::right << std::setw(12) << "epsilon" << std::setw(16) << "score" << "  "
     << std::left << "MAP model" << "\n";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    os << std::right << std::setw(12) << fixed(r.epsilon, 4) << std::setw(16)
       << fixed(r.score, 4) << "  " << std::left
       << (r.map_model ? r.map_model->to_string() : "-") << (i == t.chosen_index ? "  *" : "")
       << "\n";
  }
  os << "\n" << format_table(t.final_chain);
  return os.str();
}

std::string format_table(const ExperimentReport& r, bool timing) {
  const AggregateMetrics& a = r.aggregate;
  std::ostringstream os;
  os << "design " << r.design.name << " (n=" << r.design.n << ", p=" << r.design.p
     << ", q=" << r.design.q << ", |M_o|=" << r.design.true_size << ")  method " << r.method
     << "  replications " << r.replications << "  seed " << r.seed << "\n\n";
  os << std::right << std::setw(10) << "MSPE" << std::setw(10) << "FDR" << std::setw(10)
     << "FNR" << std::setw(10) << "MP" << std::setw(10) << "PCM" << std::setw(12) << "P(M_o|Y)";
  if (timing) os << std::setw(12) << "time(s)";
  os << "\n";
  os << std::setw(10) << fixed(a.median_mspe, 3) << std::setw(10) << fixed(a.mean_fdr, 4)
     << std::setw(10) << fixed(a.mean_fnr, 4) << std::setw(10) << fixed(a.mean_mp, 4)
     << std::setw(10) << fixed(a.mean_pcm, 3) << std::setw(12)
     << fixed(a.mean_true_model_probability, 4);
  if (timing) os << std::setw(12) << fixed(a.median_runtime_sec, 2);
  os << "\n";
  if (a.failed) os << "\n" << a.failed << " replication(s) failed\n";
  return os.str();
}

}  // namespace eas
