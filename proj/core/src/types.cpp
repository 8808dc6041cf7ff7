#include "roylab/types.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace roylab {

OccupationSet OccupationSet::broad_groups() {
  return {{"Mgr-Prof-Tech", "Sales-Office", "Prod-Op-Crafts", "Srvc-Care"}, 2};
}

void OccupationSet::validate() const {
  if (labels.size() < 2) throw ConfigError("need at least two occupations");
  std::set<std::string> unique(labels.begin(), labels.end());
  if (unique.size() != labels.size()) throw ConfigError("occupation labels must be unique");
  if (reference_index < 0 || reference_index >= size())
    throw ConfigError("reference occupation index out of range");
}

AgeGrouping AgeGrouping::ten_year_bins() { return {{{25, 34}, {35, 44}, {45, 54}}, 25, 54}; }

void AgeGrouping::validate() const {
  if (bounds.empty()) throw ConfigError("age grouping has no intervals");
  if (entry_age > exit_age) throw ConfigError("entry age after exit age");
  if (bounds.front().first != entry_age || bounds.back().second != exit_age)
    throw ConfigError("age intervals must start at entry_age and end at exit_age");
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (bounds[i].first > bounds[i].second) throw ConfigError("empty age interval");
    if (i > 0 && bounds[i].first != bounds[i - 1].second + 1)
      throw ConfigError("age intervals must be contiguous");
  }
}

int age_group(int age, const AgeGrouping& grouping) {
  if (age < grouping.entry_age || age > grouping.exit_age)
    throw ConfigError("age " + std::to_string(age) + " outside [" +
                      std::to_string(grouping.entry_age) + ", " +
                      std::to_string(grouping.exit_age) + "]");
  for (int a = 0; a < grouping.size(); ++a)
    if (age <= grouping.bounds[a].second) return a;
  throw ConfigError("age " + std::to_string(age) + " not covered by any interval");
}

void TimeFrame::validate() const {
  if (!(first_year <= base_end && base_end < last_year))
    throw ConfigError("time frame requires first_year <= base_end < last_year");
}

YearTable::YearTable(const TimeFrame& frame, int n_occupations, double fill)
    : first_year_(frame.first_year),
      n_years_(frame.n_years()),
      n_occupations_(n_occupations),
      values_(static_cast<std::size_t>(frame.n_years()) * n_occupations, fill) {}

bool YearTable::covers(const TimeFrame& frame) const {
  return first_year_ <= frame.first_year && last_year() >= frame.last_year;
}

std::size_t YearTable::offset(int year, int k) const {
  const int y = year - first_year_;
  if (y < 0 || y >= n_years_ || k < 0 || k >= n_occupations_)
    throw std::out_of_range("YearTable index (" + std::to_string(year) + ", " +
                            std::to_string(k) + ")");
  return static_cast<std::size_t>(y) * n_occupations_ + k;
}

Gamma::Gamma(int n_age_groups, int n_occupations, double fill)
    : n_age_groups_(n_age_groups),
      n_occupations_(n_occupations),
      values_(static_cast<std::size_t>(n_age_groups) * n_occupations * n_occupations, fill) {}

std::size_t Gamma::offset(int a, int from, int to) const {
  if (a < 0 || a >= n_age_groups_ || from < 0 || from >= n_occupations_ || to < 0 ||
      to >= n_occupations_)
    throw std::out_of_range("Gamma index");
  return (static_cast<std::size_t>(a) * n_occupations_ + from) * n_occupations_ + to;
}

double ShockLaw::innovation_sd() const {
  if (family == ShockFamily::none) return 0.0;
  return sigma_multiplier * sigma_ref;
}

void ShockLaw::normalize() {
  if (family == ShockFamily::none) sigma_multiplier = 0.0;
  if (family == ShockFamily::empirical && empirical_sample.size() > 1) {
    const double n = static_cast<double>(empirical_sample.size());
    const double mean = std::accumulate(empirical_sample.begin(), empirical_sample.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : empirical_sample) ss += (x - mean) * (x - mean);
    sigma_ref = std::sqrt(ss / n);
  }
}

void ShockLaw::validate() const {
  if (!(sigma_multiplier >= 0.0)) throw ConfigError("sigma_multiplier must be >= 0");
  if (!(sigma_ref >= 0.0)) throw ConfigError("sigma_ref must be >= 0");
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho must lie in [0, 1)");
  if (family == ShockFamily::none && sigma_multiplier != 0.0)
    throw ConfigError("shock family 'none' requires a zero multiplier");
  if (family == ShockFamily::empirical && empirical_sample.size() < 2)
    throw ConfigError("empirical shock family needs at least two sample draws");
}

void ParameterSet::validate(const TimeFrame& frame, const AgeGrouping& grouping) const {
  occupations.validate();
  frame.validate();
  grouping.validate();
  shocks.validate();
  const int K = occupation_count();
  if (prices.occupations() != K || !prices.covers(frame))
    throw ConfigError("price paths do not cover the time frame and occupations");
  for (int year = frame.first_year; year <= frame.last_year; ++year)
    for (int k = 0; k < K; ++k)
      if (!std::isfinite(prices.at(year, k))) throw ConfigError("non-finite skill price");
  for (int year = frame.first_year + 1; year <= frame.base_end; ++year)
    for (int k = 0; k < K; ++k)
      if (prices.at(year, k) != prices.at(year - 1, k))
        throw ConfigError("skill prices must be constant through the base period");
  if (gamma.occupations() != K || gamma.age_groups() != grouping.size())
    throw ConfigError("skill accumulation tensor has the wrong shape");
  for (double g : gamma.values())
    if (!std::isfinite(g)) throw ConfigError("non-finite skill accumulation parameter");
  if (!(switch_cost >= 0.0)) throw ConfigError("switch cost must be >= 0");
  if (switch_cost_form == SwitchCostForm::multiplicative && switch_cost >= 1.0)
    throw ConfigError("multiplicative switch cost must be < 1");
  if (static_cast<int>(amenity_trend.size()) != K)
    throw ConfigError("amenity trend needs one entry per occupation");
  if (amenity_trend[occupations.reference_index] != 0.0)
    throw ConfigError("amenity trend of the reference occupation must be zero");
  if (!(amenity_dispersion >= 0.0)) throw ConfigError("amenity dispersion must be >= 0");
  if (!(initial_skill_scale > 0.0)) throw ConfigError("initial skill scale must be > 0");
}

std::span<const double> Career::skills_at(std::size_t i) const {
  return std::span<const double>(skills).subspan(i * n_occupations, n_occupations);
}

std::span<const double> Career::shocks_at(std::size_t i) const {
  return std::span<const double>(shocks).subspan(i * n_occupations, n_occupations);
}

std::span<const double> Career::amenities_at(std::size_t i) const {
  return std::span<const double>(amenities).subspan(i * n_occupations, n_occupations);
}

int Career::switches() const {
  int n = 0;
  for (std::size_t i = 1; i < years.size(); ++i)
    if (years[i].occupation != years[i - 1].occupation) ++n;
  return n;
}

}  // namespace roylab
