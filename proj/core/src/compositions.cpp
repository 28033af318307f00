#include "zadr/compositions.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "zadr/error.hpp"

namespace zadr {

namespace {

std::string row_label(std::size_t i) { return "row " + std::to_string(i + 1); }

}  // namespace

std::vector<std::string> default_component_names(std::size_t D) {
  std::vector<std::string> names;
  names.reserve(D);
  for (std::size_t i = 0; i < D; ++i) names.push_back("c" + std::to_string(i + 1));
  return names;
}

bool CompositionDataset::has_zeros() const { return (values_.array() == 0.0).any(); }

CompositionDataset CompositionDataset::select_rows(const std::vector<std::size_t>& rows) const {
  CompositionDataset out;
  out.values_.resize(static_cast<Eigen::Index>(rows.size()), values_.cols());
  out.component_names_ = component_names_;
  out.row_ids_.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(rows[k]);
    if (rows[k] >= this->rows()) throw Error(Errc::InvalidArgument, "row index out of range");
    out.values_.row(static_cast<Eigen::Index>(k)) = values_.row(r);
    out.row_ids_.push_back(row_ids_[rows[k]]);
  }
  return out;
}

CovariateMatrix CovariateMatrix::select_rows(const std::vector<std::size_t>& rows) const {
  CovariateMatrix out;
  out.names_ = names_;
  out.design_.resize(static_cast<Eigen::Index>(rows.size()), design_.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= this->rows()) throw Error(Errc::InvalidArgument, "row index out of range");
    out.design_.row(static_cast<Eigen::Index>(k)) = design_.row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

CovariateMatrix CovariateMatrix::with_intercept(const Eigen::MatrixXd& raw, std::vector<std::string> names) {
  Eigen::MatrixXd design(raw.rows(), raw.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(raw.cols()) = raw;
  if (names.size() == static_cast<std::size_t>(raw.cols())) names.insert(names.begin(), kInterceptName);
  return from_design(design, std::move(names));
}

CovariateMatrix CovariateMatrix::from_design(const Eigen::MatrixXd& design, std::vector<std::string> names) {
  if (design.rows() == 0 || design.cols() == 0) throw Error(Errc::EmptyInput, "empty design matrix");
  if (!design.allFinite()) throw Error(Errc::DomainError, "design matrix has non-finite entries");
  if (!(design.col(0).array() == 1.0).all())
    throw Error(Errc::InvalidArgument, "first design column must be the all-ones intercept");
  if (names.empty()) {
    names.push_back(kInterceptName);
    for (Eigen::Index j = 1; j < design.cols(); ++j) names.push_back("x" + std::to_string(j));
  }
  if (names.size() != static_cast<std::size_t>(design.cols()))
    throw Error(Errc::ShapeMismatch, "covariate name count does not match design columns");
  CovariateMatrix out;
  out.design_ = design;
  out.names_ = std::move(names);
  return out;
}

CompositionDataset load_dataset(const Eigen::MatrixXd& rows, std::vector<std::string> component_names,
                                double tolerance, std::vector<std::string> row_ids) {
  if (!(tolerance > 0.0)) throw Error(Errc::InvalidArgument, "tolerance must be positive");
  if (rows.rows() == 0 || rows.cols() == 0) throw Error(Errc::EmptyInput, "no composition rows");
  if (rows.cols() < 2) throw Error(Errc::InvalidArgument, "a composition needs at least two components");
  const auto n = static_cast<std::size_t>(rows.rows());
  const auto D = static_cast<std::size_t>(rows.cols());
  if (component_names.empty()) component_names = default_component_names(D);
  if (component_names.size() != D) throw Error(Errc::ShapeMismatch, "component name count does not match columns");
  if (row_ids.empty()) {
    row_ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) row_ids.push_back(std::to_string(i + 1));
  }
  if (row_ids.size() != n) throw Error(Errc::ShapeMismatch, "row id count does not match rows");

  CompositionDataset ds;
  ds.values_ = rows;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    auto row = ds.values_.row(i);
    int positive = 0;
    double sum = 0.0;
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      const double v = row(j);
      if (!std::isfinite(v)) throw Error(Errc::DomainError, row_label(static_cast<std::size_t>(i)) + " has a non-finite entry");
      if (v < 0.0) throw Error(Errc::NegativeEntry, row_label(static_cast<std::size_t>(i)) + " has a negative entry");
      if (v > 0.0) ++positive;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance)
      throw Error(Errc::RowSumViolation, row_label(static_cast<std::size_t>(i)) + " sums to " + std::to_string(sum));
    if (positive < 2)
      throw Error(Errc::DegenerateRow, row_label(static_cast<std::size_t>(i)) + " has fewer than two positive parts");
    if (sum != 1.0) row /= sum;  // zeros stay exactly zero
  }
  ds.component_names_ = std::move(component_names);
  ds.row_ids_ = std::move(row_ids);
  return ds;
}

void check_paired(const CompositionDataset& ds, const CovariateMatrix& X) {
  if (ds.rows() != X.rows())
    throw Error(Errc::ShapeMismatch, "composition rows (" + std::to_string(ds.rows()) +
                                         ") and covariate rows (" + std::to_string(X.rows()) + ") differ");
}

ZeroPattern zero_pattern(const CompositionDataset& ds) {
  const auto& y = ds.values();
  ZeroPattern zp;
  zp.u = (y.array() > 0.0).cast<int>().matrix();
  zp.nonzero_sets.resize(ds.rows());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    auto& C = zp.nonzero_sets[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < y.cols(); ++j)
      if (zp.u(i, j) == 1) C.push_back(static_cast<std::size_t>(j));
    if (C.size() != ds.components()) zp.zero_row_indices.push_back(static_cast<std::size_t>(i));
  }
  return zp;
}

std::vector<std::size_t> zero_free_rows(const CompositionDataset& ds) {
  std::vector<std::size_t> out;
  const auto& y = ds.values();
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    if ((y.row(i).array() > 0.0).all()) out.push_back(static_cast<std::size_t>(i));
  return out;
}

Eigen::MatrixXd alr(const Eigen::MatrixXd& values, std::size_t ref_index) {
  const Eigen::Index D = values.cols();
  if (ref_index >= static_cast<std::size_t>(D)) throw Error(Errc::InvalidArgument, "reference index out of range");
  if ((values.array() <= 0.0).any()) throw Error(Errc::ZeroInTransform, "alr requires strictly positive entries");
  const auto ref = static_cast<Eigen::Index>(ref_index);
  Eigen::MatrixXd z(values.rows(), D - 1);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    const double log_ref = std::log(values(i, ref));
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < D; ++j) {
      if (j == ref) continue;
      z(i, k++) = std::log(values(i, j)) - log_ref;
    }
  }
  return z;
}

Eigen::MatrixXd alr(const CompositionDataset& ds, std::size_t ref_index) { return alr(ds.values(), ref_index); }

CompositionDataset alr_inv(const Eigen::MatrixXd& z, std::size_t ref_index, std::vector<std::string> component_names) {
  if (!z.allFinite()) throw Error(Errc::DomainError, "alr_inv requires finite input");
  const Eigen::Index d = z.cols();
  const Eigen::Index D = d + 1;
  if (ref_index >= static_cast<std::size_t>(D)) throw Error(Errc::InvalidArgument, "reference index out of range");
  const auto ref = static_cast<Eigen::Index>(ref_index);
  Eigen::MatrixXd y(z.rows(), D);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double shift = std::max(0.0, z.row(i).maxCoeff());
    double total = 0.0;
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < D; ++j) {
      const double e = std::exp((j == ref ? 0.0 : z(i, k++)) - shift);
      y(i, j) = e;
      total += e;
    }
    y.row(i) /= total;
  }
  return load_dataset(y, std::move(component_names), 1e-8);
}

Eigen::VectorXd estimate_p(const ZeroPattern& zp) {
  if (zp.u.rows() == 0) throw Error(Errc::EmptyInput, "zero pattern has no rows");
  return zp.u.cast<double>().colwise().sum().transpose() / static_cast<double>(zp.u.rows());
}

}  // namespace zadr
