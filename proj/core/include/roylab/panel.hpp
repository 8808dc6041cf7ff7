#pragma once

#include <span>
#include <vector>

#include "roylab/types.hpp"

namespace roylab {

/// First-difference observation for the year pair (year - 1, year).
struct DiffRow {
  int worker_id = 0;
  int year = 0;
  int age = 0;  // age in year - 1
  int k_prev = 0;
  int k_curr = 0;
  double dlogw = 0.0;
  int k_lag2 = -1;  // choice in year - 2, -1 when unobserved
  int k_lag3 = -1;  // choice in year - 3
};

struct LevelRow {
  int worker_id = 0;
  int year = 0;
  int age = 0;
  int k = 0;
  double logw = 0.0;
  int stint_id = 0;
  int tenure = 0;  // years since the stint started
};

struct PanelDataset {
  int n_occupations = 0;
  std::vector<DiffRow> diffs;
  std::vector<LevelRow> levels;

  int stint_count() const;
};

/// One DiffRow per consecutive year pair and one LevelRow per worker-year.
/// Rows keep the career order; stint ids are numbered from 0 across the whole panel.
PanelDataset flatten(std::span<const Career> careers, const TimeFrame& frame);

/// Rebuilds k_lag2 / k_lag3 from consecutive rows of the same worker.
/// Expects rows grouped by worker and sorted by year within each worker.
void attach_lags(std::vector<DiffRow>& rows);

/// Rebuilds stint ids and tenure from the (worker, year, k) columns of sorted levels rows.
void assign_stints(std::vector<LevelRow>& rows);

}  // namespace roylab
