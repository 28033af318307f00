#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "zadr/compositions.hpp"
#include "zadr/inference.hpp"
#include "zadr/model.hpp"
#include "zadr/simulation.hpp"

namespace zadr::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; nullopt when absent.
  std::optional<std::size_t> find(std::string_view name) const;
};

/// RFC-4180-style reader: a header row, comma separated, optional double
/// quotes. Ragged rows and empty cells are Parse errors.
CsvTable read_csv(std::istream& in);
/// Throws Io when the file cannot be opened.
CsvTable read_csv_file(const std::filesystem::path& path);

struct RegressionData {
  CompositionDataset ds;
  CovariateMatrix X;
};

/// Splits a table into compositions and covariates.
///  - components: explicit names, or every column prefixed "y:" when empty
///    (the prefix is stripped from the component names).
///  - covariates: explicit names, or every remaining numeric column.
///  - a remaining non-numeric column (the first one) supplies row ids.
RegressionData to_regression_data(const CsvTable& table, const std::vector<std::string>& components,
                                  const std::vector<std::string>& covariates,
                                  double tolerance = kDefaultRowSumTolerance);

/// Design matrix (with intercept) from the named columns.
CovariateMatrix to_covariates(const CsvTable& table, const std::vector<std::string>& covariates);

double parse_real(const std::string& cell, std::string_view context);

std::string library_version();

// Model documents: JSON with model_kind, ref_index, component_names,
// covariate_names, B (row-major), precision {phi | gamma}, p_hat, covariance
// (row-major), loglik, converged, seed, zero_mode, library_version. Reals are
// written so that they parse back bit-identically.
std::string model_to_json(const ZadrModel& model);
ZadrModel model_from_json(const std::string& text);
void save_model(const ZadrModel& model, const std::filesystem::path& path);
ZadrModel load_model(const std::filesystem::path& path);

std::string diagnostic_to_json(const DiagnosticResult& diag, const ZadrModel& final,
                               const BootstrapResult* bias = nullptr);
std::string simulation_to_json(const SimulationReport& report);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace zadr::io
