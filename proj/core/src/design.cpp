#include "roylab/design.hpp"

#include <string>

namespace roylab {

namespace {

using Triplet = Eigen::Triplet<double>;

std::string price_name(int year, int k) {
  return "dpi_" + std::to_string(year) + "_k" + std::to_string(k);
}

// Column layout shared by the first-difference designs.
struct StructuralBlocks {
  int K = 0;
  int L = 0;
  int base_end = 0;
  int n_price = 0;
  std::vector<int> cross;  // [a][from][to] -> column, -1 on the diagonal

  StructuralBlocks(DesignMatrix& d, const TimeFrame& frame, int n_occupations, int n_age_groups)
      : K(n_occupations), L(n_age_groups), base_end(frame.base_end) {
    for (int year = frame.base_end + 1; year <= frame.last_year; ++year)
      for (int k = 0; k < K; ++k) d.columns.push_back({price_name(year, k), ColumnRole::price, year, -1, -1, k});
    n_price = static_cast<int>(d.columns.size());
    for (int a = 0; a < L; ++a)
      for (int k = 0; k < K; ++k)
        d.columns.push_back({"gdiag_a" + std::to_string(a) + "_k" + std::to_string(k),
                             ColumnRole::gamma_diag, -1, a, k, k});
    cross.assign(static_cast<std::size_t>(L) * K * K, -1);
    for (int a = 0; a < L; ++a)
      for (int from = 0; from < K; ++from)
        for (int to = 0; to < K; ++to) {
          if (from == to) continue;
          cross[(a * K + from) * K + to] = static_cast<int>(d.columns.size());
          d.columns.push_back({"gcross_a" + std::to_string(a) + "_k" + std::to_string(from) +
                                   "_k" + std::to_string(to),
                               ColumnRole::gamma_cross, -1, a, from, to});
        }
  }

  int price(int year, int k) const { return (year - base_end - 1) * K + k; }
  int diag(int a, int k) const { return n_price + a * K + k; }

  void add_row(std::vector<Triplet>& t, int row, int year, int a, int k_prev, int k_curr) const {
    if (year > base_end) {
      t.emplace_back(row, price(year, k_prev), 0.5);
      t.emplace_back(row, price(year, k_curr), 0.5);
    }
    t.emplace_back(row, diag(a, k_prev), k_prev == k_curr ? 1.0 : 0.5);
    if (k_prev != k_curr) t.emplace_back(row, cross[(a * K + k_prev) * K + k_curr], 0.5);
  }
};

void check_row(const DiffRow& r, const TimeFrame& frame, int K) {
  if (r.year <= frame.first_year || r.year > frame.last_year)
    throw ConfigError("panel year " + std::to_string(r.year) + " outside the time frame");
  if (r.k_prev < 0 || r.k_prev >= K || r.k_curr < 0 || r.k_curr >= K)
    throw ConfigError("occupation index out of range for worker " + std::to_string(r.worker_id));
}

DesignMatrix first_difference(DesignKind kind, const PanelDataset& panel, const TimeFrame& frame,
                              const AgeGrouping& grouping, int K, int reference) {
  frame.validate();
  grouping.validate();
  if (K < 2) throw ConfigError("need at least two occupations");
  DesignMatrix d;
  d.kind = kind;
  d.frame = frame;
  d.n_occupations = K;
  d.n_age_groups = grouping.size();
  d.reference = reference;
  const int L = grouping.size();
  StructuralBlocks blocks(d, frame, K, L);

  // amenity block: [a][year][k] -> column
  std::vector<int> amenity;
  const int n_analysis = frame.n_analysis_years();
  if (kind == DesignKind::amenity) {
    if (reference < 0 || reference >= K) throw ConfigError("reference occupation out of range");
    amenity.assign(static_cast<std::size_t>(L) * n_analysis * K, -1);
    for (int a = 0; a < L; ++a)
      for (int year = frame.base_end + 1; year <= frame.last_year; ++year)
        for (int k = 0; k < K; ++k) {
          if (k == reference) continue;
          amenity[(a * n_analysis + (year - frame.base_end - 1)) * K + k] =
              static_cast<int>(d.columns.size());
          d.columns.push_back({"psi_a" + std::to_string(a) + "_" + std::to_string(year) + "_k" +
                                   std::to_string(k),
                               ColumnRole::amenity, year, a, -1, k});
        }
  }

  // instrument blocks
  std::size_t lag12 = 0, lag23 = 0;
  if (kind == DesignKind::iv) {
    for (int year = frame.base_end + 1; year <= frame.last_year; ++year)
      for (int k = 0; k < K; ++k)
        d.instruments.push_back({"zprice_" + std::to_string(year) + "_k" + std::to_string(k),
                                 ColumnRole::instrument, year, -1, k, k});
    lag12 = d.instruments.size();
    for (int a = 0; a < L; ++a)
      for (int k2 = 0; k2 < K; ++k2)
        for (int k1 = 0; k1 < K; ++k1)
          d.instruments.push_back({"zlag12_a" + std::to_string(a) + "_k" + std::to_string(k2) +
                                       "_k" + std::to_string(k1),
                                   ColumnRole::instrument, -1, a, k2, k1});
    lag23 = d.instruments.size();
    for (int a = 0; a < L; ++a)
      for (int k3 = 0; k3 < K; ++k3)
        for (int k2 = 0; k2 < K; ++k2)
          d.instruments.push_back({"zlag23_a" + std::to_string(a) + "_k" + std::to_string(k3) +
                                       "_k" + std::to_string(k2),
                                   ColumnRole::instrument, -1, a, k3, k2});
  }

  std::vector<Triplet> tx, tz;
  std::vector<double> response;
  tx.reserve(panel.diffs.size() * 4);
  int row = 0;
  for (std::size_t i = 0; i < panel.diffs.size(); ++i) {
    const auto& r = panel.diffs[i];
    check_row(r, frame, K);
    if (kind == DesignKind::iv) {
      if (r.k_lag2 < 0 || r.k_lag3 < 0) continue;
      if (r.k_lag2 >= K || r.k_lag3 >= K) throw ConfigError("lagged occupation out of range");
    }
    const int a = age_group(r.age, grouping);
    blocks.add_row(tx, row, r.year, a, r.k_prev, r.k_curr);
    if (kind == DesignKind::amenity && r.year > frame.base_end && r.k_prev != r.k_curr) {
      const std::size_t base = static_cast<std::size_t>(a * n_analysis + (r.year - frame.base_end - 1)) * K;
      if (r.k_curr != reference) tx.emplace_back(row, amenity[base + r.k_curr], 1.0);
      if (r.k_prev != reference) tx.emplace_back(row, amenity[base + r.k_prev], -1.0);
    }
    if (kind == DesignKind::iv) {
      if (r.year > frame.base_end) tz.emplace_back(row, blocks.price(r.year, r.k_prev), 1.0);
      tz.emplace_back(row, static_cast<int>(lag12) + (a * K + r.k_lag2) * K + r.k_prev, 1.0);
      tz.emplace_back(row, static_cast<int>(lag23) + (a * K + r.k_lag3) * K + r.k_lag2, 1.0);
    }
    response.push_back(r.dlogw);
    d.row_index.push_back(static_cast<int>(i));
    ++row;
  }

  if (kind == DesignKind::iv && row == 0)
    throw EstimationError("no observations with two lagged occupation choices");

  d.X.resize(row, static_cast<Eigen::Index>(d.columns.size()));
  d.X.setFromTriplets(tx.begin(), tx.end());
  d.y = Eigen::Map<const Eigen::VectorXd>(response.data(), row);
  if (kind == DesignKind::iv) {
    d.Z.resize(row, static_cast<Eigen::Index>(d.instruments.size()));
    d.Z.setFromTriplets(tz.begin(), tz.end());
    d.endogenous.assign(d.columns.size(), true);
    std::vector<int> nnz(d.instruments.size(), 0);
    for (const auto& t : tz) ++nnz[t.col()];
    for (std::size_t j = 0; j < nnz.size(); ++j)
      if (nnz[j] == 0) d.empty_instruments.push_back(static_cast<int>(j));
  }
  return d;
}

}  // namespace

int DesignMatrix::find(const std::string& name) const {
  for (std::size_t j = 0; j < columns.size(); ++j)
    if (columns[j].name == name) return static_cast<int>(j);
  return -1;
}

DesignMatrix build_ols_design(const PanelDataset& panel, const TimeFrame& frame,
                              const AgeGrouping& grouping, int n_occupations) {
  return first_difference(DesignKind::ols, panel, frame, grouping, n_occupations, -1);
}

DesignMatrix build_iv_design(const PanelDataset& panel, const TimeFrame& frame,
                             const AgeGrouping& grouping, int n_occupations) {
  return first_difference(DesignKind::iv, panel, frame, grouping, n_occupations, -1);
}

DesignMatrix build_amenity_design(const PanelDataset& panel, const TimeFrame& frame,
                                  const AgeGrouping& grouping, int n_occupations, int reference) {
  return first_difference(DesignKind::amenity, panel, frame, grouping, n_occupations, reference);
}

DesignMatrix build_fe_design(const PanelDataset& panel, const TimeFrame& frame,
                             const AgeGrouping& grouping, int n_occupations,
                             bool with_base_period) {
  frame.validate();
  grouping.validate();
  const int K = n_occupations;
  const int L = grouping.size();
  DesignMatrix d;
  d.kind = with_base_period ? DesignKind::fe : DesignKind::fe_nobase;
  d.frame = frame;
  d.n_occupations = K;
  d.n_age_groups = L;

  const int first_price_year = with_base_period ? frame.base_end + 1 : frame.first_year + 1;
  for (int year = first_price_year; year <= frame.last_year; ++year)
    for (int k = 0; k < K; ++k)
      d.columns.push_back({"pi_" + std::to_string(year) + "_k" + std::to_string(k),
                           ColumnRole::price, year, -1, -1, k});
  const int n_price = static_cast<int>(d.columns.size());
  const int n_slope_groups = with_base_period ? L : L - 1;
  for (int a = 0; a < n_slope_groups; ++a)
    for (int k = 0; k < K; ++k)
      d.columns.push_back({"slope_a" + std::to_string(a) + "_k" + std::to_string(k),
                           ColumnRole::slope, -1, a, k, k});

  std::vector<Triplet> tx;
  std::vector<double> response;
  std::vector<int> per_group(L);
  tx.reserve(panel.levels.size() * 3);
  int row = 0;
  for (std::size_t i = 0; i < panel.levels.size(); ++i) {
    const auto& r = panel.levels[i];
    if (!frame.contains(r.year))
      throw ConfigError("panel year " + std::to_string(r.year) + " outside the time frame");
    if (r.k < 0 || r.k >= K) throw ConfigError("occupation index out of range");
    if (r.tenure < 0) throw ConfigError("negative tenure");
    if (r.year >= first_price_year)
      tx.emplace_back(row, (r.year - first_price_year) * K + r.k, 1.0);
    if (r.tenure > 0) {
      if (r.age < 0) throw ConfigError("age unknown for worker " + std::to_string(r.worker_id));
      std::fill(per_group.begin(), per_group.end(), 0);
      for (int back = 1; back <= r.tenure; ++back) ++per_group[age_group(r.age - back, grouping)];
      for (int a = 0; a < n_slope_groups; ++a)
        if (per_group[a] > 0) tx.emplace_back(row, n_price + a * K + r.k, per_group[a]);
    }
    response.push_back(r.logw);
    d.groups.push_back(r.stint_id);
    d.row_index.push_back(static_cast<int>(i));
    ++row;
  }
  d.X.resize(row, static_cast<Eigen::Index>(d.columns.size()));
  d.X.setFromTriplets(tx.begin(), tx.end());
  d.y = Eigen::Map<const Eigen::VectorXd>(response.data(), row);
  return d;
}

}  // namespace roylab
