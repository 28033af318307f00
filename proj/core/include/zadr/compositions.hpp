#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace zadr {

inline constexpr double kDefaultRowSumTolerance = 1e-8;

/// n x D matrix of proportions on the simplex. Instances are only produced by
/// load_dataset (or helpers built on it), so every row is known to be
/// nonnegative, to sum to one and to carry at least two positive parts.
class CompositionDataset {
 public:
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t components() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  const std::vector<std::string>& component_names() const noexcept { return component_names_; }
  const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }

  bool has_zeros() const;

  /// Sub-dataset made of the given rows, in the given order.
  CompositionDataset select_rows(const std::vector<std::size_t>& rows) const;

 private:
  friend CompositionDataset load_dataset(const Eigen::MatrixXd&, std::vector<std::string>, double,
                                         std::vector<std::string>);

  Eigen::MatrixXd values_;
  std::vector<std::string> component_names_;
  std::vector<std::string> row_ids_;
};

/// n x (p+1) design matrix whose first column is the intercept.
class CovariateMatrix {
 public:
  const Eigen::MatrixXd& design() const noexcept { return design_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(design_.rows()); }
  /// Number of non-intercept covariates.
  std::size_t p() const noexcept { return static_cast<std::size_t>(design_.cols()) - 1; }
  std::size_t columns() const noexcept { return static_cast<std::size_t>(design_.cols()); }
  const std::vector<std::string>& covariate_names() const noexcept { return names_; }

  CovariateMatrix select_rows(const std::vector<std::size_t>& rows) const;

  /// Prepends the intercept column to raw covariates (n x p, may be n x 0).
  static CovariateMatrix with_intercept(const Eigen::MatrixXd& raw, std::vector<std::string> names);

  /// Accepts a full design; the first column must be all ones.
  static CovariateMatrix from_design(const Eigen::MatrixXd& design, std::vector<std::string> names);

 private:
  Eigen::MatrixXd design_;
  std::vector<std::string> names_;
};

inline constexpr const char* kInterceptName = "(Intercept)";

/// Binary nonzero indicators and the per-row positive index sets.
struct ZeroPattern {
  Eigen::MatrixXi u;                                   // 1 = strictly positive
  std::vector<std::vector<std::size_t>> nonzero_sets;  // C_j, ascending
  std::vector<std::size_t> zero_row_indices;           // rows with at least one zero
};

/// Validates and (when within tolerance) renormalizes rows. Zeros are kept
/// bit-exact. Empty row_ids are filled with 1-based row numbers.
CompositionDataset load_dataset(const Eigen::MatrixXd& rows, std::vector<std::string> component_names,
                                double tolerance = kDefaultRowSumTolerance,
                                std::vector<std::string> row_ids = {});

/// Throws ShapeMismatch unless the two agree on row count.
void check_paired(const CompositionDataset& ds, const CovariateMatrix& X);

ZeroPattern zero_pattern(const CompositionDataset& ds);

/// Indices of rows without any zero component.
std::vector<std::size_t> zero_free_rows(const CompositionDataset& ds);

/// Additive log-ratio against `ref_index` (0-based). Result is n x (D-1) with
/// the non-reference columns in their original order.
Eigen::MatrixXd alr(const Eigen::MatrixXd& values, std::size_t ref_index);
Eigen::MatrixXd alr(const CompositionDataset& ds, std::size_t ref_index);

/// Inverse of alr. Component names default to c1..cD.
CompositionDataset alr_inv(const Eigen::MatrixXd& z, std::size_t ref_index,
                           std::vector<std::string> component_names = {});

/// Per-component proportion of strictly positive entries.
Eigen::VectorXd estimate_p(const ZeroPattern& zp);

std::vector<std::string> default_component_names(std::size_t D);

}  // namespace zadr
