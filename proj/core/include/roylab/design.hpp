#pragma once

#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "roylab/panel.hpp"
#include "roylab/types.hpp"

namespace roylab {

enum class DesignKind { ols, iv, amenity, fe, fe_nobase };

enum class ColumnRole { price, gamma_diag, gamma_cross, amenity, slope, instrument };

struct DesignColumn {
  std::string name;
  ColumnRole role = ColumnRole::price;
  int year = -1;
  int age_group = -1;
  int k_from = -1;
  int k = -1;
};

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct DesignMatrix {
  DesignKind kind = DesignKind::ols;
  TimeFrame frame;
  int n_occupations = 0;
  int n_age_groups = 0;
  int reference = -1;  // omitted occupation of the amenity block

  std::vector<DesignColumn> columns;
  SparseRows X;
  Eigen::VectorXd y;
  std::vector<int> row_index;  // panel row behind each design row

  std::vector<bool> endogenous;              // per column, IV only
  std::vector<DesignColumn> instruments;     // IV only
  SparseRows Z;
  std::vector<int> empty_instruments;        // all-zero instrument columns

  std::vector<int> groups;  // stint id per row, FE only

  int rows() const { return static_cast<int>(X.rows()); }
  int cols() const { return static_cast<int>(X.cols()); }
  /// Column index by name, -1 when absent.
  int find(const std::string& name) const;
};

/// Saturated first-difference design: price changes per (year > base_end, k),
/// diagonal accumulation per (a, k) and cross accumulation per (a, k', k != k').
DesignMatrix build_ols_design(const PanelDataset& panel, const TimeFrame& frame,
                              const AgeGrouping& grouping, int n_occupations);

/// Same structural columns on rows with two lagged choices observed. Every structural
/// column is treated as endogenous; instruments are the previous-choice dummies per
/// (year > base_end, k) and the lagged transition dummies (a, k(t-2), k(t-1)) and
/// (a, k(t-3), k(t-2)).
DesignMatrix build_iv_design(const PanelDataset& panel, const TimeFrame& frame,
                             const AgeGrouping& grouping, int n_occupations);

/// OLS design plus I_a * dI_k columns per (a, year > base_end, k != reference).
DesignMatrix build_amenity_design(const PanelDataset& panel, const TimeFrame& frame,
                                  const AgeGrouping& grouping, int n_occupations, int reference);

/// Levels design for the stint fixed-effects estimator. Price dummies per (year, k) and
/// tenure slopes per (a, k), where the (a, k) slope counts the stint years accrued while
/// the worker's previous-year age was in group a. Stint intercepts are left implicit
/// (groups). Without a base period, price dummies cover every year after first_year
/// and the oldest age group's slope is pinned to zero.
DesignMatrix build_fe_design(const PanelDataset& panel, const TimeFrame& frame,
                             const AgeGrouping& grouping, int n_occupations,
                             bool with_base_period);

}  // namespace roylab
