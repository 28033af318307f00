#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>

#include "zadr/error.hpp"
#include "zadr/io.hpp"

namespace zadr::io {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Splits one logical record; handles quoted fields (including embedded
// newlines, which pull further physical lines from `in`).
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  ++line_no;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0;; ++i) {
    if (i == line.size()) {
      if (quoted) {
        std::string more;
        if (!std::getline(in, more)) throw Error(Errc::Parse, "unterminated quote at line " + std::to_string(line_no));
        ++line_no;
        field += '\n';
        line = more;
        i = static_cast<std::size_t>(-1);
        continue;
      }
      break;
    }
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? field : trim(field));
      field.clear();
      was_quoted = false;
    } else {
      field += c;
    }
  }
  fields.push_back(was_quoted ? field : trim(field));
  return true;
}

bool is_numeric(const std::string& cell) {
  double v;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  return ec == std::errc() && ptr == end;
}

std::vector<std::size_t> resolve(const CsvTable& table, const std::vector<std::string>& names, const char* what) {
  std::vector<std::size_t> out;
  for (const auto& name : names) {
    const auto idx = table.find(name);
    if (!idx) throw Error(Errc::SchemaMismatch, std::string(what) + " column '" + name + "' not found in CSV header");
    out.push_back(*idx);
  }
  return out;
}

Eigen::MatrixXd numeric_block(const CsvTable& table, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_real(table.rows[r][cols[c]], "row " + std::to_string(r + 1) + ", column '" + table.header[cols[c]] + "'");
  return m;
}

}  // namespace

std::optional<std::size_t> CsvTable::find(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

double parse_real(const std::string& cell, std::string_view context) {
  if (cell.empty()) throw Error(Errc::Parse, "empty cell at " + std::string(context));
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw Error(Errc::Parse, "cannot parse '" + cell + "' as a number at " + std::string(context));
  return v;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::size_t line_no = 0;
  if (!read_record(in, table.header, line_no)) throw Error(Errc::EmptyInput, "CSV input is empty");
  if (!table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0) table.header[0].erase(0, 3);
  std::vector<std::string> fields;
  while (read_record(in, fields, line_no)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != table.header.size())
      throw Error(Errc::Parse, "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                   " fields, header has " + std::to_string(table.header.size()));
    for (std::size_t c = 0; c < fields.size(); ++c)
      if (fields[c].empty())
        throw Error(Errc::Parse, "empty cell at line " + std::to_string(line_no) + ", column '" + table.header[c] + "'");
    table.rows.push_back(fields);
  }
  if (table.rows.empty()) throw Error(Errc::EmptyInput, "CSV has a header but no data rows");
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  return read_csv(in);
}

CovariateMatrix to_covariates(const CsvTable& table, const std::vector<std::string>& covariates) {
  const auto cols = resolve(table, covariates, "covariate");
  return CovariateMatrix::with_intercept(numeric_block(table, cols), covariates);
}

RegressionData to_regression_data(const CsvTable& table, const std::vector<std::string>& components,
                                  const std::vector<std::string>& covariates, double tolerance) {
  std::vector<std::size_t> comp_cols;
  std::vector<std::string> comp_names;
  if (components.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (table.header[c].rfind("y:", 0) == 0) {
        comp_cols.push_back(c);
        comp_names.push_back(table.header[c].substr(2));
      }
    }
    if (comp_cols.empty())
      throw Error(Errc::SchemaMismatch, "no composition columns: pass --components or prefix columns with 'y:'");
  } else {
    comp_cols = resolve(table, components, "component");
    comp_names = components;
  }

  std::vector<std::size_t> cov_cols;
  std::vector<std::string> cov_names;
  std::optional<std::size_t> id_col;
  if (!covariates.empty()) {
    cov_cols = resolve(table, covariates, "covariate");
    cov_names = covariates;
  }
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (std::find(comp_cols.begin(), comp_cols.end(), c) != comp_cols.end()) continue;
    if (std::find(cov_cols.begin(), cov_cols.end(), c) != cov_cols.end()) continue;
    const bool numeric =
        std::all_of(table.rows.begin(), table.rows.end(), [&](const auto& row) { return is_numeric(row[c]); });
    if (!numeric) {
      if (!id_col) id_col = c;
    } else if (covariates.empty()) {
      cov_cols.push_back(c);
      cov_names.push_back(table.header[c]);
    }
  }

  std::vector<std::string> row_ids;
  if (id_col)
    for (const auto& row : table.rows) row_ids.push_back(row[*id_col]);

  RegressionData out{
      load_dataset(numeric_block(table, comp_cols), comp_names, tolerance, row_ids),
      CovariateMatrix::with_intercept(numeric_block(table, cov_cols), cov_names),
  };
  return out;
}

}  // namespace zadr::io
