#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "roylab/design.hpp"

namespace roylab {

/// Relative tolerance for rank decisions.
inline constexpr double kRankTolerance = 1e-10;

struct LeastSquaresResult {
  Eigen::VectorXd coef;    // NaN for columns that were not estimated
  std::vector<int> dropped;  // collinear with earlier columns
  std::vector<int> empty;    // no support in the data
  int rank = 0;
  double ssr = 0.0;
};

/// Least squares by Householder QR taken in column order. A column whose residual
/// norm, after projecting out the columns kept before it, falls below tol times its
/// own norm is dropped, so the latest-added member of a collinear set goes.
LeastSquaresResult ordered_least_squares(Eigen::MatrixXd A, Eigen::VectorXd b,
                                         double tol = kRankTolerance);

/// Identical design rows (and instrument rows, when given) merged into weighted cells.
/// Least squares on the cells weighted by their counts solves the row-level problem exactly.
struct CellData {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Z;
  Eigen::VectorXd mean_y;
  Eigen::VectorXd weight;
  double within_ss = 0.0;  // sum of squared deviations of y from its cell mean
};

CellData collapse_rows(const SparseRows& X, const Eigen::VectorXd& y,
                       const SparseRows* Z = nullptr);

struct FitResult {
  LeastSquaresResult ls;
  std::size_t n_obs = 0;
  double residual_variance = 0.0;
  std::vector<double> first_stage_r2;  // 2SLS only, per column
  int n_groups = 0;                    // within fits only
};

FitResult fit_ols(const SparseRows& X, const Eigen::VectorXd& y, double tol = kRankTolerance);

/// Two-stage least squares with every column of X instrumented by Z.
FitResult fit_2sls(const SparseRows& X, const SparseRows& Z, const Eigen::VectorXd& y,
                   double tol = kRankTolerance);

/// Least squares after removing group means. Groups with a single row carry no
/// within variation and are skipped. Normal equations are solved by conjugate
/// gradients after an in-order pivot check drops collinear columns.
FitResult fit_within(const SparseRows& X, const Eigen::VectorXd& y, std::span<const int> groups,
                     double tol = kRankTolerance);

}  // namespace roylab
