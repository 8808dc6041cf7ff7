#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "roylab/descriptives.hpp"
#include "roylab/dgp.hpp"
#include "test_support.hpp"

namespace roylab {
namespace {

using test::make_career;

const TimeFrame kFrame;

PanelDataset simulated(const ParameterSet& p, int n) {
  SeedConfig seed;
  seed.n_workers = n;
  return flatten(simulate_careers(seed, p, kFrame, AgeGrouping::ten_year_bins()), kFrame);
}

TEST(Flows, StaticPanelHasNoOffDiagonalMass) {
  const auto panel = simulated(test::static_parameters(kFrame), 300);
  const auto f = switcher_flows(panel, FlowDirection::entrants);
  double diag = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j)
        diag += f(i, j);
      else
        EXPECT_EQ(f(i, j), 0.0);
    }
  EXPECT_EQ(diag, static_cast<double>(panel.diffs.size()));
}

TEST(Flows, ModerateShocksFillEveryOffDiagonalCell) {
  const auto panel = simulated(test::moderate_parameters(kFrame), 2000);
  const auto f = switcher_flows(panel, FlowDirection::leavers);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) {
        EXPECT_GT(f(i, j), 0.0) << i << "->" << j;
      }
}

TEST(Flows, EntrantColumnsCountDestinationHeadcount) {
  const auto panel = simulated(test::moderate_parameters(kFrame), 500);
  for (int year : {1976, 1990, 2010}) {
    const auto f = switcher_flows(panel, FlowDirection::entrants, year);
    for (int k = 0; k < 4; ++k) {
      double col = 0.0;
      for (int from = 0; from <= 4; ++from) col += f(from, k);
      double heads = 0.0;
      for (const auto& r : panel.levels)
        if (r.year == year && r.k == k) heads += 1.0;
      EXPECT_EQ(col, heads) << year << " " << k;
    }
  }
}

TEST(Flows, LeaverAndEntrantViewsAgree) {
  const auto panel = simulated(test::moderate_parameters(kFrame), 500);
  const auto in = switcher_flows(panel, FlowDirection::entrants);
  const auto out = switcher_flows(panel, FlowDirection::leavers);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(in(i, j), out(i, j));
  double joiners = 0.0, exiters = 0.0;
  for (int k = 0; k < 4; ++k) {
    joiners += in(4, k);
    exiters += out(k, 4);
  }
  EXPECT_GT(joiners, 0.0);
  EXPECT_GT(exiters, 0.0);
}

TEST(Flows, JoinersAndExiters) {
  PanelDataset p = flatten(std::vector<Career>{make_career(1, 1975, 30, {0, 0, 0}, {}),
                                               make_career(2, 1976, 30, {1, 2}, {}),
                                               make_career(3, 1975, 30, {3, 3}, {})},
                           kFrame);
  const auto in = switcher_flows(p, FlowDirection::entrants);
  EXPECT_EQ(in(4, 1), 1.0);
  EXPECT_EQ(in(1, 2), 1.0);
  const auto out = switcher_flows(p, FlowDirection::leavers);
  EXPECT_EQ(out(3, 4), 1.0);
  EXPECT_EQ(out(0, 4), 0.0);
  const auto shares = in.normalized(FlowNormalization::shares_of_destination);
  EXPECT_DOUBLE_EQ(shares(4, 1), 1.0);
}

TEST(Histogram, SingleBinAndMass) {
  PanelDataset p;
  p.n_occupations = 4;
  for (int i = 0; i < 10; ++i) p.diffs.push_back({i, 1990, 30, 0, 0, 0.01});
  const auto h = wage_growth_hist(p);
  int occupied = 0;
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    if (h.counts[i] > 0) {
      ++occupied;
      EXPECT_LE(h.bin_lo(static_cast<int>(i)), 0.01);
      EXPECT_GT(h.bin_hi(static_cast<int>(i)), 0.01);
    }
  EXPECT_EQ(occupied, 1);
  EXPECT_EQ(h.total(), 10.0);
}

TEST(Histogram, TailsAndTotal) {
  const auto panel = simulated(test::moderate_parameters(kFrame), 300);
  auto h = wage_growth_hist(panel);
  EXPECT_EQ(h.n_inner(), 200);
  EXPECT_EQ(h.total(), static_cast<double>(panel.diffs.size()));
  EXPECT_TRUE(std::isinf(h.bin_lo(0)));
  PanelDataset empty;
  EXPECT_THROW(wage_growth_hist(empty), Error);
}

TEST(GrowthMoments, ShocksWidenGrowth) {
  const auto calm = wage_growth_moments(simulated(test::static_parameters(kFrame), 300));
  const auto moderate = wage_growth_moments(simulated(test::moderate_parameters(kFrame), 300));
  EXPECT_EQ(calm.sd, 0.0);
  EXPECT_GT(moderate.sd, 0.05);
}

TEST(Quantiles, Type7) {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(quantile_sorted(x, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(x, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(x, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_sorted(x, 0.1), 1.3);
}

TEST(Quantiles, ConstantWagesGiveFlatLines) {
  PanelDataset p = flatten(std::vector<Career>{make_career(1, 1975, 30, {0, 0, 0}, {2.0, 2.0, 2.0}),
                                               make_career(2, 1975, 30, {1, 1, 1}, {2.0, 2.0, 2.0})},
                           kFrame);
  for (const auto& q : quantile_paths(p, kFrame)) {
    if (q.year <= 1977)
      EXPECT_EQ(q.value, 2.0);
    else
      EXPECT_TRUE(std::isnan(q.value));
  }
}

TEST(Quantiles, MonotoneInProbAndWideningUnderLargeShocks) {
  ParameterSet p = test::moderate_parameters(kFrame);
  p.shocks.sigma_multiplier = 1.5;
  const auto q = quantile_paths(simulated(p, 1500), kFrame, {0.1, 0.5, 0.9});
  ASSERT_EQ(q.size(), 36u * 3);
  std::map<int, double> spread;
  for (std::size_t i = 0; i < q.size(); i += 3) {
    EXPECT_LE(q[i].value, q[i + 1].value);
    EXPECT_LE(q[i + 1].value, q[i + 2].value);
    spread[q[i].year] = q[i + 2].value - q[i].value;
  }
  // widens while the initial cross-section ages out, then levels off
  for (int year = 1990; year <= 2000; year += 5) EXPECT_GT(spread[year], spread[year - 5]) << year;
  EXPECT_GT(spread[2010], spread[1985] + 0.3);
}

}  // namespace
}  // namespace roylab
