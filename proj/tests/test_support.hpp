#pragma once

#include <vector>

#include "roylab/dgp.hpp"
#include "roylab/panel.hpp"
#include "roylab/types.hpp"

namespace roylab::test {

// Career with explicit choices and wages, starting at (first_year, first_age).
inline Career make_career(int id, int first_year, int first_age, const std::vector<int>& ks,
                          const std::vector<double>& logw, int n_occupations = 4) {
  Career c;
  c.worker_id = id;
  c.entry_year = first_year;
  c.entry_age = first_age;
  c.n_occupations = n_occupations;
  for (std::size_t i = 0; i < ks.size(); ++i)
    c.years.push_back({first_year + static_cast<int>(i), first_age + static_cast<int>(i), ks[i], 0.0,
                       i < logw.size() ? logw[i] : 0.0});
  return c;
}

inline ParameterSet static_parameters(const TimeFrame& frame, int K = 4, int L = 3) {
  ParameterSet p;
  p.prices = YearTable(frame, K);
  p.gamma = Gamma(L, K);
  p.shocks.family = ShockFamily::none;
  p.shocks.sigma_multiplier = 0.0;
  p.amenity_trend.assign(K, 0.0);
  return p;
}

// Moderate-shock truth with linear price drift.
inline ParameterSet moderate_parameters(const TimeFrame& frame) {
  ParameterSet p;
  const std::vector<double> drift = {0.010, 0.003, -0.005, -0.008};
  p.prices = linear_price_paths(frame, drift);
  p.gamma = gamma_from_table(reference_gamma_table(), 1.0 / 3.0);
  p.shocks.family = ShockFamily::gaussian;
  p.shocks.sigma_multiplier = 0.5;
  p.amenity_trend.assign(4, 0.0);
  return p;
}

}  // namespace roylab::test
