#include "roylab/descriptives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace roylab {

FlowMatrix FlowMatrix::normalized(FlowNormalization mode) const {
  FlowMatrix out = *this;
  if (mode == FlowNormalization::counts) return out;
  const int n = n_occupations + 1;
  for (int i = 0; i < n; ++i) {
    double total = 0.0;
    for (int j = 0; j < n; ++j)
      total += mode == FlowNormalization::shares_of_destination ? (*this)(j, i) : (*this)(i, j);
    if (total == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (mode == FlowNormalization::shares_of_destination)
        out(j, i) /= total;
      else
        out(i, j) /= total;
    }
  }
  return out;
}

FlowMatrix switcher_flows(const PanelDataset& panel, FlowDirection direction, std::optional<int> year) {
  const int K = panel.n_occupations;
  FlowMatrix flows;
  flows.direction = direction;
  flows.n_occupations = K;
  flows.year = year;
  flows.counts.assign(static_cast<std::size_t>(K + 1) * (K + 1), 0.0);

  for (const auto& r : panel.diffs)
    if (!year || r.year == *year) flows(r.k_prev, r.k_curr) += 1.0;

  if (panel.levels.empty()) return flows;
  int first = panel.levels.front().year, last = first;
  for (const auto& r : panel.levels) {
    first = std::min(first, r.year);
    last = std::max(last, r.year);
  }
  // first and last year of every worker
  std::map<int, std::pair<const LevelRow*, const LevelRow*>> span;
  for (const auto& r : panel.levels) {
    auto [it, inserted] = span.try_emplace(r.worker_id, &r, &r);
    if (inserted) continue;
    if (r.year < it->second.first->year) it->second.first = &r;
    if (r.year > it->second.second->year) it->second.second = &r;
  }
  for (const auto& [id, ends] : span) {
    const LevelRow& in = *ends.first;
    const LevelRow& out = *ends.second;
    if (direction == FlowDirection::entrants && in.year > first && (!year || in.year == *year))
      flows(K, in.k) += 1.0;
    if (direction == FlowDirection::leavers && out.year < last && (!year || out.year + 1 == *year))
      flows(out.k, K) += 1.0;
  }
  return flows;
}

double Histogram::bin_lo(int i) const {
  if (i == 0) return -std::numeric_limits<double>::infinity();
  return lo + (i - 1) * bin_width;
}

double Histogram::bin_hi(int i) const {
  if (i == static_cast<int>(counts.size()) - 1) return std::numeric_limits<double>::infinity();
  return lo + i * bin_width;
}

double Histogram::total() const {
  double s = 0.0;
  for (double c : counts) s += c;
  return s;
}

Histogram wage_growth_hist(const PanelDataset& panel, double bin_width, double range) {
  if (panel.diffs.empty()) throw EstimationError("wage growth histogram of an empty panel");
  if (!(bin_width > 0.0) || !(range > 0.0)) throw ConfigError("histogram bin width and range must be positive");
  Histogram h;
  h.lo = -range;
  h.hi = range;
  h.bin_width = bin_width;
  const int n_inner = static_cast<int>(std::lround(2.0 * range / bin_width));
  h.counts.assign(n_inner + 2, 0.0);
  for (const auto& r : panel.diffs) {
    const double x = r.dlogw;
    int idx;
    if (x < h.lo)
      idx = 0;
    else if (x >= h.hi)
      idx = n_inner + 1;
    else {
      int i = std::clamp(static_cast<int>(std::floor((x - h.lo) / bin_width)), 0, n_inner - 1);
      // keep the bin consistent with the reported edges
      if (i > 0 && x < h.bin_lo(i + 1)) --i;
      else if (i < n_inner - 1 && x >= h.bin_hi(i + 1)) ++i;
      idx = 1 + i;
    }
    h.counts[idx] += 1.0;
  }
  return h;
}

GrowthMoments wage_growth_moments(const PanelDataset& panel) {
  GrowthMoments m;
  m.n = panel.diffs.size();
  if (m.n == 0) return m;
  for (const auto& r : panel.diffs) m.mean += r.dlogw;
  m.mean /= static_cast<double>(m.n);
  double ss = 0.0;
  for (const auto& r : panel.diffs) ss += (r.dlogw - m.mean) * (r.dlogw - m.mean);
  m.sd = std::sqrt(ss / static_cast<double>(m.n));
  return m;
}

double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (!(prob >= 0.0 && prob <= 1.0)) throw ConfigError("quantile probability outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<QuantilePoint> quantile_paths(const PanelDataset& panel, const TimeFrame& frame,
                                          const std::vector<double>& probs) {
  std::vector<std::vector<double>> by_year(frame.n_years());
  for (const auto& r : panel.levels)
    if (frame.contains(r.year)) by_year[frame.index(r.year)].push_back(r.logw);
  std::vector<QuantilePoint> out;
  out.reserve(by_year.size() * probs.size());
  for (int year = frame.first_year; year <= frame.last_year; ++year) {
    auto& xs = by_year[frame.index(year)];
    std::sort(xs.begin(), xs.end());
    for (double p : probs) out.push_back({year, p, quantile_sorted(xs, p)});
  }
  return out;
}

}  // namespace roylab
