#include "roylab/panel.hpp"

#include <string>
#include <unordered_set>

namespace roylab {

int PanelDataset::stint_count() const {
  std::unordered_set<int> ids;
  for (const auto& row : levels) ids.insert(row.stint_id);
  return static_cast<int>(ids.size());
}

PanelDataset flatten(std::span<const Career> careers, const TimeFrame& frame) {
  PanelDataset panel;
  std::size_t n_years = 0;
  for (const auto& c : careers) {
    n_years += c.years.size();
    if (panel.n_occupations == 0) panel.n_occupations = c.n_occupations;
  }
  panel.levels.reserve(n_years);
  panel.diffs.reserve(n_years);

  int next_stint = 0;
  for (const auto& c : careers) {
    const auto& ys = c.years;
    int stint = -1;
    int stint_start = 0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const auto& cur = ys[i];
      if (!frame.contains(cur.year))
        throw MalformedCareerError("worker " + std::to_string(c.worker_id) + ": year " +
                                   std::to_string(cur.year) + " outside the time frame");
      if (i > 0) {
        const auto& prev = ys[i - 1];
        if (cur.year != prev.year + 1 || cur.age != prev.age + 1)
          throw MalformedCareerError("worker " + std::to_string(c.worker_id) +
                                     ": non-consecutive years " + std::to_string(prev.year) +
                                     " -> " + std::to_string(cur.year));
      }
      if (i == 0 || cur.occupation != ys[i - 1].occupation) {
        stint = next_stint++;
        stint_start = cur.year;
      }
      panel.levels.push_back(
          {c.worker_id, cur.year, cur.age, cur.occupation, cur.log_wage, stint, cur.year - stint_start});
      if (i == 0) continue;
      const auto& prev = ys[i - 1];
      DiffRow row{c.worker_id, cur.year, prev.age, prev.occupation, cur.occupation,
                  cur.log_wage - prev.log_wage};
      if (i >= 2) row.k_lag2 = ys[i - 2].occupation;
      if (i >= 3) row.k_lag3 = ys[i - 3].occupation;
      panel.diffs.push_back(row);
    }
  }
  return panel;
}

void attach_lags(std::vector<DiffRow>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    row.k_lag2 = row.k_lag3 = -1;
    if (i == 0) continue;
    const auto& p1 = rows[i - 1];
    if (p1.worker_id != row.worker_id || p1.year != row.year - 1) continue;
    row.k_lag2 = p1.k_prev;
    if (i < 2) continue;
    const auto& p2 = rows[i - 2];
    if (p2.worker_id != row.worker_id || p2.year != row.year - 2) continue;
    row.k_lag3 = p2.k_prev;
  }
}

void assign_stints(std::vector<LevelRow>& rows) {
  int next_stint = 0;
  int start = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    const bool continues = i > 0 && rows[i - 1].worker_id == row.worker_id &&
                           rows[i - 1].year == row.year - 1 && rows[i - 1].k == row.k;
    if (!continues) {
      if (i > 0 && rows[i - 1].worker_id == row.worker_id && rows[i - 1].year >= row.year)
        throw MalformedCareerError("worker " + std::to_string(row.worker_id) +
                                   ": levels rows not sorted by year");
      ++next_stint;
      start = row.year;
    }
    row.stint_id = next_stint - 1;
    row.tenure = row.year - start;
  }
}

}  // namespace roylab
