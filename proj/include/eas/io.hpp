#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "eas/simstudy.hpp"

namespace eas {

/// Reads a numeric CSV whose rows are records; returns the transpose, so
/// columns are observations. Throws InputError naming the offending line.
DenseMatrix read_csv(std::istream& in, bool header, const std::string& source = "<stream>");
DenseMatrix read_csv_file(const std::string& path, bool header);

/// Writes the transpose of `columns_as_records` (one row per column), 17
/// significant digits, so a read reproduces every entry exactly.
void write_csv(std::ostream& out, const DenseMatrix& columns_as_records);
void write_csv_file(const std::string& path, const DenseMatrix& columns_as_records);

/// Loads Y (n x q) and X (n x p) record files; throws InputError when n differs.
Dataset read_dataset(const std::string& y_path, const std::string& x_path, bool header);

nlohmann::json to_json(const ChainSummary& s);
nlohmann::json to_json(const TuningResult& t);
nlohmann::json to_json(const SimulationDesign& d);
/// `timing` toggles wall-clock fields, which would otherwise break
/// byte-identical reruns.
nlohmann::json to_json(const ExperimentReport& r, bool timing);

std::string format_table(const ChainSummary& s, std::size_t max_rows = 20);
std::string format_table(const TuningResult& t);
std::string format_table(const ExperimentReport& r, bool timing);

}  // namespace eas
