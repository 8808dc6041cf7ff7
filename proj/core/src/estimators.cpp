#include "roylab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "roylab/dgp.hpp"
#include "roylab/least_squares.hpp"

namespace roylab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

EstimateSet empty_estimate(Method method, const DesignMatrix& d) {
  EstimateSet est;
  est.method = method;
  est.frame = d.frame;
  est.n_occupations = d.n_occupations;
  est.n_age_groups = d.n_age_groups;
  est.dpi = YearTable(d.frame, d.n_occupations, 0.0);
  for (int year = d.frame.base_end + 1; year <= d.frame.last_year; ++year)
    for (int k = 0; k < d.n_occupations; ++k) est.dpi.at(year, k) = kNaN;
  est.gamma_hat = Gamma(d.n_age_groups, d.n_occupations, kNaN);
  return est;
}

void record_columns(EstimateSet& est, const DesignMatrix& d, const LeastSquaresResult& ls) {
  for (int j : ls.dropped) est.dropped_columns.push_back(d.columns[j].name);
  for (int j : ls.empty) est.empty_columns.push_back(d.columns[j].name);
}

// Coefficients of the first-difference designs to parameters.
void map_first_difference(EstimateSet& est, const DesignMatrix& d, const Eigen::VectorXd& coef) {
  const int n_analysis = d.frame.n_analysis_years();
  if (d.kind == DesignKind::amenity) {
    est.psi_hat.assign(static_cast<std::size_t>(d.n_age_groups) * n_analysis * d.n_occupations, kNaN);
    for (int a = 0; a < d.n_age_groups; ++a)
      for (int i = 0; i < n_analysis; ++i)
        est.psi_hat[(a * n_analysis + i) * d.n_occupations + d.reference] = 0.0;
  }
  for (std::size_t j = 0; j < d.columns.size(); ++j) {
    const auto& c = d.columns[j];
    const double v = coef(static_cast<Eigen::Index>(j));
    switch (c.role) {
      case ColumnRole::price:
        est.dpi.at(c.year, c.k) = v;
        break;
      case ColumnRole::gamma_diag:
      case ColumnRole::gamma_cross:
        est.gamma_hat(c.age_group, c.k_from, c.k) = v;
        break;
      case ColumnRole::amenity:
        est.psi_hat[(c.age_group * n_analysis + (c.year - d.frame.base_end - 1)) * d.n_occupations + c.k] = -v;
        break;
      default:
        break;
    }
  }
  est.pi_cum = cumulate_prices(est.dpi, d.frame);
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::ols: return "ols";
    case Method::iv: return "iv";
    case Method::ols_amenity: return "ols_amenity";
    case Method::fe_stint: return "fe_stint";
    case Method::fe_nobase: return "fe_nobase";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "ols") return Method::ols;
  if (name == "iv") return Method::iv;
  if (name == "ols_amenity" || name == "amenity") return Method::ols_amenity;
  if (name == "fe_stint" || name == "fe") return Method::fe_stint;
  if (name == "fe_nobase" || name == "fe-nobase") return Method::fe_nobase;
  throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

double EstimateSet::psi(int a, int year, int k) const {
  if (psi_hat.empty()) return kNaN;
  const int n_analysis = frame.n_analysis_years();
  const int i = year - frame.base_end - 1;
  if (a < 0 || a >= n_age_groups || i < 0 || i >= n_analysis || k < 0 || k >= n_occupations)
    throw std::out_of_range("amenity index");
  return psi_hat[(a * n_analysis + i) * n_occupations + k];
}

YearTable cumulate_prices(const YearTable& dpi, const TimeFrame& frame) {
  YearTable pi(frame, dpi.occupations(), 0.0);
  for (int year = frame.base_end + 1; year <= frame.last_year; ++year)
    for (int k = 0; k < dpi.occupations(); ++k)
      pi.at(year, k) = pi.at(year - 1, k) + dpi.at(year, k);
  return pi;
}

EstimateSet solve_ols(const DesignMatrix& design) {
  if (design.kind != DesignKind::ols && design.kind != DesignKind::amenity)
    throw EstimationError("solve_ols needs a first-difference OLS or amenity design");
  const FitResult fit = fit_ols(design.X, design.y);
  EstimateSet est = empty_estimate(design.kind == DesignKind::amenity ? Method::ols_amenity : Method::ols, design);
  map_first_difference(est, design, fit.ls.coef);
  record_columns(est, design, fit.ls);
  est.n_obs = fit.n_obs;
  est.residual_variance = fit.residual_variance;
  return est;
}

EstimateSet solve_iv(const DesignMatrix& design) {
  if (design.kind != DesignKind::iv) throw EstimationError("solve_iv needs an IV design");
  const FitResult fit = fit_2sls(design.X, design.Z, design.y);
  EstimateSet est = empty_estimate(Method::iv, design);
  map_first_difference(est, design, fit.ls.coef);
  record_columns(est, design, fit.ls);
  for (int j : design.empty_instruments) est.weak_instruments.push_back(design.instruments[j].name + " (empty)");
  for (std::size_t j = 0; j < fit.first_stage_r2.size(); ++j) {
    const double r2 = fit.first_stage_r2[j];
    if (!std::isnan(r2) && r2 < kWeakInstrumentR2) est.weak_instruments.push_back(design.columns[j].name);
  }
  est.n_obs = fit.n_obs;
  est.residual_variance = fit.residual_variance;
  return est;
}

EstimateSet solve_fe(const DesignMatrix& design) {
  if (design.kind != DesignKind::fe && design.kind != DesignKind::fe_nobase)
    throw EstimationError("solve_fe needs a levels design");
  const FitResult fit = fit_within(design.X, design.y, design.groups);
  const bool nobase = design.kind == DesignKind::fe_nobase;
  EstimateSet est = empty_estimate(nobase ? Method::fe_nobase : Method::fe_stint, design);
  const TimeFrame& frame = design.frame;
  const int K = design.n_occupations;

  // price levels, normalized to the first year without a dummy
  YearTable level(frame, K, 0.0);
  for (std::size_t j = 0; j < design.columns.size(); ++j) {
    const auto& c = design.columns[j];
    const double v = fit.ls.coef(static_cast<Eigen::Index>(j));
    if (c.role == ColumnRole::price) level.at(c.year, c.k) = v;
    if (c.role == ColumnRole::slope) est.gamma_hat(c.age_group, c.k, c.k) = v;
  }
  if (nobase)
    for (int k = 0; k < K; ++k) est.gamma_hat(design.n_age_groups - 1, k, k) = 0.0;

  est.pi_cum = YearTable(frame, K, 0.0);
  for (int year = frame.first_year; year <= frame.last_year; ++year)
    for (int k = 0; k < K; ++k) {
      est.pi_cum.at(year, k) = level.at(year, k) - level.at(frame.base_end, k);
      if (year > frame.first_year && (nobase || year > frame.base_end))
        est.dpi.at(year, k) = level.at(year, k) - level.at(year - 1, k);
    }
  record_columns(est, design, fit.ls);
  est.n_obs = fit.n_obs;
  est.residual_variance = fit.residual_variance;
  return est;
}

EstimateSet estimate(const PanelDataset& panel, Method method, const TimeFrame& frame,
                     const AgeGrouping& grouping, const OccupationSet& occupations) {
  const int K = occupations.size();
  switch (method) {
    case Method::ols:
      return solve_ols(build_ols_design(panel, frame, grouping, K));
    case Method::iv:
      return solve_iv(build_iv_design(panel, frame, grouping, K));
    case Method::ols_amenity:
      return solve_ols(build_amenity_design(panel, frame, grouping, K, occupations.reference_index));
    case Method::fe_stint:
    case Method::fe_nobase:
      if (panel.levels.empty()) throw EstimationError("fixed-effects estimation needs the levels view");
      return solve_fe(build_fe_design(panel, frame, grouping, K, method == Method::fe_stint));
  }
  throw EstimationError("unknown method");
}

std::vector<double> amenity_truth(const ParameterSet& truth, const TimeFrame& frame, int n_age_groups) {
  const int K = truth.occupation_count();
  const int ref = truth.occupations.reference_index;
  const int n_analysis = frame.n_analysis_years();
  const YearTable psi = amenity_levels(truth.amenity_trend, frame);
  std::vector<double> out(static_cast<std::size_t>(n_age_groups) * n_analysis * K);
  for (int a = 0; a < n_age_groups; ++a)
    for (int i = 0; i < n_analysis; ++i) {
      const int year = frame.base_end + 1 + i;
      for (int k = 0; k < K; ++k) {
        const double vbar = 0.5 * (psi.at(year, k) + psi.at(year - 1, k));
        const double vref = 0.5 * (psi.at(year, ref) + psi.at(year - 1, ref));
        out[(a * n_analysis + i) * K + k] = vbar - vref;
      }
    }
  return out;
}

MCAggregate aggregate(std::span<const EstimateSet> estimates, const ParameterSet& truth,
                      const TimeFrame& frame) {
  if (estimates.empty()) throw EstimationError("no repetitions to aggregate");
  const EstimateSet& first = estimates.front();
  for (const auto& e : estimates)
    if (e.method != first.method || e.n_occupations != first.n_occupations ||
        e.n_age_groups != first.n_age_groups || e.psi_hat.size() != first.psi_hat.size() ||
        !e.dpi.covers(frame))
      throw EstimationError("estimate shapes differ across repetitions");

  const int K = first.n_occupations;
  const int L = first.n_age_groups;
  MCAggregate agg;
  agg.method = first.method;
  agg.frame = frame;
  agg.n_occupations = K;
  agg.n_age_groups = L;
  agg.repetitions = static_cast<int>(estimates.size());

  std::vector<double> xs;
  auto moments = [&](auto&& get, double& mean, double& sd) {
    xs.clear();
    for (const auto& e : estimates) {
      const double v = get(e);
      if (std::isfinite(v)) xs.push_back(v);
    }
    if (xs.empty()) {
      mean = sd = kNaN;
      return;
    }
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    if (*lo == *hi) {
      mean = *lo;
      sd = 0.0;
      return;
    }
    mean = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(xs.size()));
  };

  agg.dpi_mean = agg.dpi_sd = agg.pi_mean = agg.pi_sd = YearTable(frame, K);
  agg.truth_dpi = agg.truth_pi = YearTable(frame, K);
  for (int year = frame.first_year; year <= frame.last_year; ++year)
    for (int k = 0; k < K; ++k) {
      moments([&](const EstimateSet& e) { return e.dpi.at(year, k); }, agg.dpi_mean.at(year, k), agg.dpi_sd.at(year, k));
      moments([&](const EstimateSet& e) { return e.pi_cum.at(year, k); }, agg.pi_mean.at(year, k), agg.pi_sd.at(year, k));
      agg.truth_pi.at(year, k) = truth.prices.at(year, k) - truth.prices.at(frame.base_end, k);
      agg.truth_dpi.at(year, k) =
          year > frame.first_year ? truth.prices.at(year, k) - truth.prices.at(year - 1, k) : 0.0;
    }

  agg.gamma_mean = agg.gamma_sd = Gamma(L, K);
  agg.gamma_true = truth.gamma;
  for (int a = 0; a < L; ++a)
    for (int from = 0; from < K; ++from)
      for (int to = 0; to < K; ++to)
        moments([&](const EstimateSet& e) { return e.gamma_hat(a, from, to); }, agg.gamma_mean(a, from, to),
                agg.gamma_sd(a, from, to));

  if (first.has_psi()) {
    const std::size_t n = first.psi_hat.size();
    agg.psi_mean.resize(n);
    agg.psi_sd.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      moments([&](const EstimateSet& e) { return e.psi_hat[i]; }, agg.psi_mean[i], agg.psi_sd[i]);
    agg.psi_true = amenity_truth(truth, frame, L);
  }
  return agg;
}

double price_mae(const MCAggregate& agg, int k) {
  double s = 0.0;
  int n = 0;
  for (int year = agg.frame.base_end + 1; year <= agg.frame.last_year; ++year) {
    const double e = agg.pi_mean.at(year, k) - agg.truth_pi.at(year, k);
    if (std::isnan(e)) return kNaN;
    s += std::abs(e);
    ++n;
  }
  return s / n;
}

double price_mae(const MCAggregate& agg) {
  double s = 0.0;
  for (int k = 0; k < agg.n_occupations; ++k) s += price_mae(agg, k);
  return s / agg.n_occupations;
}

double max_price_error(const MCAggregate& agg) {
  double m = 0.0;
  for (int year = agg.frame.base_end + 1; year <= agg.frame.last_year; ++year)
    for (int k = 0; k < agg.n_occupations; ++k) {
      const double e = std::abs(agg.pi_mean.at(year, k) - agg.truth_pi.at(year, k));
      if (std::isnan(e)) return kNaN;
      m = std::max(m, e);
    }
  return m;
}

double final_year_error(const MCAggregate& agg, int k) {
  const int year = agg.frame.last_year;
  return agg.pi_mean.at(year, k) - agg.truth_pi.at(year, k);
}

double max_gamma_diag_error(const MCAggregate& agg) {
  double m = 0.0;
  for (int a = 0; a < agg.n_age_groups; ++a)
    for (int k = 0; k < agg.n_occupations; ++k) {
      const double e = std::abs(agg.gamma_mean(a, k, k) - agg.gamma_true(a, k, k));
      if (std::isnan(e)) return kNaN;
      m = std::max(m, e);
    }
  return m;
}

double gamma_diag_mad(const MCAggregate& agg) {
  double s = 0.0;
  for (int a = 0; a < agg.n_age_groups; ++a)
    for (int k = 0; k < agg.n_occupations; ++k) s += std::abs(agg.gamma_mean(a, k, k) - agg.gamma_true(a, k, k));
  return s / (agg.n_age_groups * agg.n_occupations);
}

double gamma_cross_bias(const MCAggregate& agg) {
  double s = 0.0;
  int n = 0;
  for (int a = 0; a < agg.n_age_groups; ++a)
    for (int from = 0; from < agg.n_occupations; ++from)
      for (int to = 0; to < agg.n_occupations; ++to) {
        if (from == to) continue;
        const double e = agg.gamma_mean(a, from, to) - agg.gamma_true(a, from, to);
        if (std::isnan(e)) continue;
        s += e;
        ++n;
      }
  return n ? s / n : kNaN;
}

double psi_slope(const MCAggregate& agg, int k) {
  if (agg.psi_mean.empty()) return kNaN;
  const int n_analysis = agg.frame.n_analysis_years();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int i = 0; i < n_analysis; ++i) {
    double y = 0.0;
    int m = 0;
    for (int a = 0; a < agg.n_age_groups; ++a) {
      const double v = agg.psi_mean[(a * n_analysis + i) * agg.n_occupations + k];
      if (std::isfinite(v)) {
        y += v;
        ++m;
      }
    }
    if (m == 0) continue;
    y /= m;
    const double x = i;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return kNaN;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace roylab
