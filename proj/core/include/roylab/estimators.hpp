#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roylab/design.hpp"
#include "roylab/panel.hpp"
#include "roylab/types.hpp"

namespace roylab {

enum class Method { ols, iv, ols_amenity, fe_stint, fe_nobase };

std::string_view method_name(Method m);
/// Accepts the method names plus the CLI aliases "amenity", "fe" and "fe-nobase".
Method parse_method(std::string_view name);

struct EstimateSet {
  Method method = Method::ols;
  TimeFrame frame;
  int n_occupations = 0;
  int n_age_groups = 0;
  YearTable dpi;     // 0 through base_end, NaN when not estimable
  YearTable pi_cum;  // 0 at base_end
  Gamma gamma_hat;   // NaN where not estimable or not part of the method
  std::vector<double> psi_hat;  // [a][analysis year][k], amenity method only
  std::size_t n_obs = 0;
  double residual_variance = 0.0;
  std::vector<std::string> dropped_columns;
  std::vector<std::string> empty_columns;
  std::vector<std::string> weak_instruments;

  bool has_psi() const { return !psi_hat.empty(); }
  double psi(int a, int year, int k) const;
};

/// Instruments whose first-stage R^2 falls below this are flagged.
inline constexpr double kWeakInstrumentR2 = 0.01;

EstimateSet solve_ols(const DesignMatrix& design);
EstimateSet solve_iv(const DesignMatrix& design);
EstimateSet solve_fe(const DesignMatrix& design);

/// Running sum of dpi over analysis years, anchored at 0 through base_end.
YearTable cumulate_prices(const YearTable& dpi, const TimeFrame& frame);

/// Builds the design for `method` and solves it.
EstimateSet estimate(const PanelDataset& panel, Method method, const TimeFrame& frame,
                     const AgeGrouping& grouping, const OccupationSet& occupations);

struct MCAggregate {
  Method method = Method::ols;
  TimeFrame frame;
  int n_occupations = 0;
  int n_age_groups = 0;
  int repetitions = 0;
  YearTable dpi_mean, dpi_sd, pi_mean, pi_sd;
  YearTable truth_dpi, truth_pi;  // truth_pi relative to base_end
  Gamma gamma_mean, gamma_sd, gamma_true;
  std::vector<double> psi_mean, psi_sd, psi_true;
};

/// Across-repetition means and population standard deviations, truth attached.
/// NaN entries of a repetition are skipped for that parameter.
MCAggregate aggregate(std::span<const EstimateSet> estimates, const ParameterSet& truth,
                      const TimeFrame& frame);

/// Average of the two-period amenity levels relative to the reference occupation.
std::vector<double> amenity_truth(const ParameterSet& truth, const TimeFrame& frame, int n_age_groups);

// Error summaries of an aggregate, computed on the across-repetition mean path.
double price_mae(const MCAggregate& agg);
double price_mae(const MCAggregate& agg, int k);
double max_price_error(const MCAggregate& agg);
double final_year_error(const MCAggregate& agg, int k);  // signed: estimate - truth
double max_gamma_diag_error(const MCAggregate& agg);
double gamma_diag_mad(const MCAggregate& agg);
/// Mean over (a, k' != k) of gamma_mean - gamma_true.
double gamma_cross_bias(const MCAggregate& agg);
/// Least-squares slope over years of the mean amenity estimate for occupation k,
/// averaged across age groups.
double psi_slope(const MCAggregate& agg, int k);

}  // namespace roylab
