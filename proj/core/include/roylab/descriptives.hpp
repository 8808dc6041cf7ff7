#pragma once

#include <optional>
#include <vector>

#include "roylab/panel.hpp"
#include "roylab/types.hpp"

namespace roylab {

enum class FlowDirection {
  entrants,  // occupation in t by source: same or other occupation in t-1, or joiner
  leavers,   // occupation in t-1 by destination: same or other occupation in t, or exiter
};

enum class FlowNormalization { counts, shares_of_destination, shares_of_origin };

/// counts(from, to) over occupations 0..K-1; index K stands for joiners (as a
/// source) and exiters (as a destination).
struct FlowMatrix {
  FlowDirection direction = FlowDirection::entrants;
  int n_occupations = 0;
  std::optional<int> year;  // destination year of the pair, pooled when empty
  std::vector<double> counts;

  double operator()(int from, int to) const { return counts[from * (n_occupations + 1) + to]; }
  double& operator()(int from, int to) { return counts[from * (n_occupations + 1) + to]; }
  /// Counts rescaled so destinations (columns) or origins (rows) sum to one.
  FlowMatrix normalized(FlowNormalization mode) const;
};

/// Joiners are workers whose first panel year is after the panel's first year;
/// exiters are workers whose last panel year is before the panel's last year.
FlowMatrix switcher_flows(const PanelDataset& panel, FlowDirection direction,
                          std::optional<int> year = std::nullopt);

struct Histogram {
  double lo = -1.0;
  double hi = 1.0;
  double bin_width = 0.01;
  // counts[0] is (-inf, lo), counts.back() is [hi, inf), the rest are [lo + i*w, lo + (i+1)*w)
  std::vector<double> counts;

  int n_inner() const { return static_cast<int>(counts.size()) - 2; }
  double bin_lo(int i) const;  // i indexes counts
  double bin_hi(int i) const;
  double total() const;
};

Histogram wage_growth_hist(const PanelDataset& panel, double bin_width = 0.01, double range = 1.0);

struct GrowthMoments {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

GrowthMoments wage_growth_moments(const PanelDataset& panel);

struct QuantilePoint {
  int year = 0;
  double prob = 0.0;
  double value = 0.0;  // NaN for years without observations
};

/// Inclusive linear interpolation (type 7), one entry per (year, prob) of the frame.
std::vector<QuantilePoint> quantile_paths(const PanelDataset& panel, const TimeFrame& frame,
                                          const std::vector<double>& probs = {0.1, 0.5, 0.9});

/// Type 7 quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double prob);

}  // namespace roylab
