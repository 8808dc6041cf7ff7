#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "roylab/dgp.hpp"
#include "roylab/estimators.hpp"
#include "roylab/least_squares.hpp"
#include "test_support.hpp"

namespace roylab {
namespace {

const TimeFrame kFrame;
const AgeGrouping kGroups = AgeGrouping::ten_year_bins();

PanelDataset simulate_panel(const ParameterSet& p, int n, std::uint64_t seed_value = 1) {
  SeedConfig seed;
  seed.n_workers = n;
  seed.seed = seed_value;
  return flatten(simulate_careers(seed, p, kFrame, kGroups), kFrame);
}

TEST(OrderedLeastSquares, DropsLatestCollinearColumn) {
  Eigen::MatrixXd A(5, 3);
  A << 1, 0, 1,
       1, 1, 2,
       0, 1, 1,
       2, 0, 2,
       0, 3, 3;
  const Eigen::VectorXd b = A.leftCols(2) * Eigen::Vector2d(0.5, -1.0);
  const auto r = ordered_least_squares(A, b);
  EXPECT_EQ(r.rank, 2);
  EXPECT_EQ(r.dropped, std::vector<int>{2});
  EXPECT_NEAR(r.coef(0), 0.5, 1e-12);
  EXPECT_NEAR(r.coef(1), -1.0, 1e-12);
  EXPECT_TRUE(std::isnan(r.coef(2)));
  EXPECT_NEAR(r.ssr, 0.0, 1e-20);
}

TEST(OrderedLeastSquares, EmptyColumnsReported) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 2);
  A.col(1) << 1, 2, 3;
  const auto r = ordered_least_squares(A, Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(r.empty, std::vector<int>{0});
  EXPECT_NEAR(r.coef(1), 1.0, 1e-12);
}

TEST(OrderedLeastSquares, MatchesDenseSolver) {
  Rng rng(4);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd A(40, 6);
  Eigen::VectorXd b(40);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 6; ++j) A(i, j) = n01(rng);
    b(i) = n01(rng);
  }
  const auto r = ordered_least_squares(A, b);
  const Eigen::VectorXd ref = A.colPivHouseholderQr().solve(b);
  EXPECT_LT((r.coef - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CollapseRows, CellsReproduceRowLevelFit) {
  const auto panel = simulate_panel(test::moderate_parameters(kFrame), 60);
  const auto d = build_ols_design(panel, kFrame, kGroups, 4);
  const auto cells = collapse_rows(d.X, d.y);
  EXPECT_LT(cells.X.rows(), d.rows());
  EXPECT_NEAR(cells.weight.sum(), d.rows(), 1e-9);
  double total = 0.0;
  for (Eigen::Index i = 0; i < cells.mean_y.size(); ++i) total += cells.weight(i) * cells.mean_y(i);
  EXPECT_NEAR(total, d.y.sum(), 1e-9);
}

TEST(SaturatedOls, CellMeanOracleOnSmallPanels) {
  for (std::uint64_t s : {1u, 2u, 3u}) {
    auto panel = simulate_panel(test::moderate_parameters(kFrame), 40, s);
    if (panel.diffs.size() > 500) panel.diffs.resize(500);
    const auto est = solve_ols(build_ols_design(panel, kFrame, kGroups, 4));
    const auto cmp = test::saturated_cell_oracle(panel.diffs, kFrame, kGroups, 4, est);
    EXPECT_TRUE(cmp.kept_full_rank);
    EXPECT_GT(cmp.n_kept, 0);
    EXPECT_LT(cmp.max_coef_diff, 1e-10) << "seed " << s;
    EXPECT_LT(cmp.max_fit_diff, 1e-10) << "seed " << s;
  }
}

TEST(SaturatedOls, NoShockPanelRecoversTruth) {
  TimeFrame f;
  ParameterSet p = test::moderate_parameters(f);
  p.shocks.family = ShockFamily::none;
  p.shocks.sigma_multiplier = 0.0;
  const auto panel = simulate_panel(p, 1500);
  const auto est = solve_ols(build_ols_design(panel, f, kGroups, 4));
  for (int year = f.base_end + 1; year <= f.last_year; ++year)
    for (int k = 0; k < 4; ++k)
      EXPECT_NEAR(est.pi_cum.at(year, k), p.prices.at(year, k) - p.prices.at(f.base_end, k), 1e-3);
  for (int a = 0; a < 3; ++a)
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(est.gamma_hat(a, k, k), p.gamma(a, k, k), 1e-3);
}

TEST(TwoStage, InstrumentsEqualRegressorsGiveOls) {
  const auto panel = simulate_panel(test::moderate_parameters(kFrame), 300);
  const auto d = build_ols_design(panel, kFrame, kGroups, 4);
  const auto ols = fit_ols(d.X, d.y);
  const auto tsls = fit_2sls(d.X, d.X, d.y);
  int compared = 0;
  for (Eigen::Index j = 0; j < ols.ls.coef.size(); ++j) {
    EXPECT_EQ(std::isnan(ols.ls.coef(j)), std::isnan(tsls.ls.coef(j))) << j;
    if (std::isnan(ols.ls.coef(j))) continue;
    EXPECT_NEAR(ols.ls.coef(j), tsls.ls.coef(j), 1e-9) << d.columns[j].name;
    ++compared;
  }
  EXPECT_GT(compared, 100);
}

TEST(TwoStage, RecoversStructuralCoefficientWithEndogeneity) {
  // y = 2 x + e, x = z + e: OLS is biased, 2SLS is not
  Rng rng(21);
  std::normal_distribution<double> n01;
  const int n = 20000;
  std::vector<Eigen::Triplet<double>> tx, tz;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double z = n01(rng), e = n01(rng);
    const double x = z + e;
    tx.emplace_back(i, 0, x);
    tx.emplace_back(i, 1, 1.0);
    tz.emplace_back(i, 0, z);
    tz.emplace_back(i, 1, 1.0);
    y(i) = 2.0 * x + e;
  }
  SparseRows X(n, 2), Z(n, 2);
  X.setFromTriplets(tx.begin(), tx.end());
  Z.setFromTriplets(tz.begin(), tz.end());
  EXPECT_GT(fit_ols(X, y).ls.coef(0), 2.3);
  const auto iv = fit_2sls(X, Z, y);
  EXPECT_NEAR(iv.ls.coef(0), 2.0, 0.05);
  EXPECT_GT(iv.first_stage_r2[0], 0.3);
}

TEST(FixedEffects, SingleStintExactSlope) {
  PanelDataset p;
  p.n_occupations = 4;
  for (int t = 0; t < 3; ++t) p.levels.push_back({1, 1977 + t, 30 + t, 1, 2.0 + 0.04 * t, 0, t});
  const auto est = solve_fe(build_fe_design(p, kFrame, kGroups, 4, true));
  EXPECT_NEAR(est.gamma_hat(0, 1, 1), 0.04, 1e-12);
}

TEST(FixedEffects, NoShockPanelPerfectlyIdentified) {
  ParameterSet p = test::moderate_parameters(kFrame);
  p.shocks.family = ShockFamily::none;
  p.shocks.sigma_multiplier = 0.0;
  const auto panel = simulate_panel(p, 800);
  const auto est = estimate(panel, Method::fe_stint, kFrame, kGroups, OccupationSet::broad_groups());
  for (int year = kFrame.base_end + 1; year <= kFrame.last_year; ++year)
    for (int k = 0; k < 4; ++k)
      EXPECT_NEAR(est.pi_cum.at(year, k), p.prices.at(year, k), 1e-6) << year << " " << k;
  for (int a = 0; a < 3; ++a)
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(est.gamma_hat(a, k, k), p.gamma(a, k, k), 1e-6);
}

TEST(FixedEffects, InvariantToStintConstants) {
  auto panel = simulate_panel(test::moderate_parameters(kFrame), 300);
  const auto base = estimate(panel, Method::fe_stint, kFrame, kGroups, OccupationSet::broad_groups());
  for (auto& r : panel.levels) r.logw += 0.37 * (r.stint_id % 7) - 1.1;
  const auto shifted = estimate(panel, Method::fe_stint, kFrame, kGroups, OccupationSet::broad_groups());
  for (int year = kFrame.base_end + 1; year <= kFrame.last_year; ++year)
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(base.pi_cum.at(year, k), shifted.pi_cum.at(year, k), 1e-8);
  for (int a = 0; a < 3; ++a)
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(base.gamma_hat(a, k, k), shifted.gamma_hat(a, k, k), 1e-8);
}

TEST(FixedEffects, WithinMatchesDummyRegression) {
  auto panel = simulate_panel(test::moderate_parameters(kFrame), 40);
  const auto d = build_fe_design(panel, kFrame, kGroups, 4, true);
  int n_groups = 0;
  for (int g : d.groups) n_groups = std::max(n_groups, g + 1);
  // explicit stint dummies placed first so the slope and price columns are the ones dropped
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d.rows(), n_groups + d.cols());
  for (int i = 0; i < d.rows(); ++i) A(i, d.groups[i]) = 1.0;
  A.rightCols(d.cols()) = Eigen::MatrixXd(d.X);
  const auto dummies = ordered_least_squares(A, d.y);
  const auto within = fit_within(d.X, d.y, d.groups);
  for (int j = 0; j < d.cols(); ++j) {
    const double ca = dummies.coef(n_groups + j), cb = within.ls.coef(j);
    if (std::isfinite(ca) && std::isfinite(cb)) {
      EXPECT_NEAR(ca, cb, 1e-7) << d.columns[j].name;
    }
  }
  EXPECT_NEAR(dummies.ssr, within.ls.ssr, 1e-8 * (1.0 + dummies.ssr));
}

TEST(CumulatePrices, Examples) {
  YearTable dpi(kFrame, 2, 0.0);
  auto flat = cumulate_prices(dpi, kFrame);
  for (double v : flat.values()) EXPECT_EQ(v, 0.0);
  for (int year = kFrame.base_end + 1; year <= kFrame.last_year; ++year) dpi.at(year, 1) = 0.01;
  const auto pi = cumulate_prices(dpi, kFrame);
  EXPECT_NEAR(pi.at(2010, 1), 0.26, 1e-12);
  for (int year = kFrame.base_end + 1; year <= kFrame.last_year; ++year)
    EXPECT_NEAR(pi.at(year, 1) - pi.at(year - 1, 1), dpi.at(year, 1), 1e-15);
}

EstimateSet constant_estimate(double v) {
  EstimateSet e;
  e.frame = kFrame;
  e.n_occupations = 4;
  e.n_age_groups = 3;
  e.dpi = YearTable(kFrame, 4, 0.0);
  for (int year = kFrame.base_end + 1; year <= kFrame.last_year; ++year)
    for (int k = 0; k < 4; ++k) e.dpi.at(year, k) = v;
  e.pi_cum = cumulate_prices(e.dpi, kFrame);
  e.gamma_hat = Gamma(3, 4, v);
  return e;
}

TEST(Aggregate, MeanAndPopulationSd) {
  const ParameterSet truth = test::moderate_parameters(kFrame);
  const std::vector<EstimateSet> reps = {constant_estimate(0.04), constant_estimate(0.06)};
  const auto agg = aggregate(reps, truth, kFrame);
  EXPECT_NEAR(agg.dpi_mean.at(2000, 1), 0.05, 1e-15);
  EXPECT_NEAR(agg.dpi_sd.at(2000, 1), 0.01, 1e-15);
  EXPECT_NEAR(agg.gamma_sd(1, 2, 3), 0.01, 1e-15);
  EXPECT_EQ(agg.repetitions, 2);
  EXPECT_NEAR(agg.truth_pi.at(2010, 0), 0.26, 1e-12);
}

TEST(Aggregate, IdenticalRepetitionsHaveZeroSd) {
  const ParameterSet truth = test::moderate_parameters(kFrame);
  const std::vector<EstimateSet> reps(3, constant_estimate(0.02));
  const auto agg = aggregate(reps, truth, kFrame);
  for (double v : agg.pi_sd.values()) EXPECT_EQ(v, 0.0);
}

TEST(Aggregate, SkipsMissingValues) {
  const ParameterSet truth = test::moderate_parameters(kFrame);
  std::vector<EstimateSet> reps = {constant_estimate(0.04), constant_estimate(0.08)};
  reps[1].gamma_hat = Gamma(3, 4, std::numeric_limits<double>::quiet_NaN());
  const auto agg = aggregate(reps, truth, kFrame);
  EXPECT_NEAR(agg.gamma_mean(0, 0, 1), 0.04, 1e-15);
  EXPECT_EQ(agg.gamma_sd(0, 0, 1), 0.0);
}

TEST(Metrics, PerfectAggregate) {
  const ParameterSet truth = test::moderate_parameters(kFrame);
  EstimateSet e = constant_estimate(0.0);
  for (int year = kFrame.first_year; year <= kFrame.last_year; ++year)
    for (int k = 0; k < 4; ++k) e.pi_cum.at(year, k) = truth.prices.at(year, k);
  e.gamma_hat = truth.gamma;
  const std::vector<EstimateSet> reps = {e};
  const auto agg = aggregate(reps, truth, kFrame);
  EXPECT_EQ(price_mae(agg), 0.0);
  EXPECT_EQ(max_price_error(agg), 0.0);
  EXPECT_EQ(final_year_error(agg, 3), 0.0);
  EXPECT_EQ(max_gamma_diag_error(agg), 0.0);
  EXPECT_EQ(gamma_cross_bias(agg), 0.0);
}

TEST(AmenityTruth, TwoPeriodAverage) {
  ParameterSet p = test::moderate_parameters(kFrame);
  p.amenity_trend = {0.02, 0.0, 0.0, 0.0};
  const auto t = amenity_truth(p, kFrame, 3);
  const int n = kFrame.n_analysis_years();
  EXPECT_NEAR(t[0 * 4 + 0], 0.01, 1e-15);  // 1985: (0.02 + 0) / 2
  EXPECT_NEAR(t[((2 * n) + n - 1) * 4 + 0], 0.51, 1e-12);
  EXPECT_EQ(t[5 * 4 + 2], 0.0);
}

TEST(Estimate, MethodNames) {
  EXPECT_EQ(parse_method("amenity"), Method::ols_amenity);
  EXPECT_EQ(parse_method("fe"), Method::fe_stint);
  EXPECT_EQ(parse_method("fe-nobase"), Method::fe_nobase);
  EXPECT_EQ(parse_method(method_name(Method::iv)), Method::iv);
  EXPECT_THROW(parse_method("gmm"), ConfigError);
}

TEST(Estimate, FixedEffectsNeedLevels) {
  auto panel = simulate_panel(test::moderate_parameters(kFrame), 30);
  panel.levels.clear();
  EXPECT_THROW(estimate(panel, Method::fe_stint, kFrame, kGroups, OccupationSet::broad_groups()),
               EstimationError);
}

}  // namespace
}  // namespace roylab
