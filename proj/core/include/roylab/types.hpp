#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace roylab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameter values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A career whose years do not advance one at a time.
class MalformedCareerError : public Error {
 public:
  using Error::Error;
};

/// The estimation problem cannot be solved (no rows, no identifying variation).
class EstimationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

struct OccupationSet {
  std::vector<std::string> labels;
  int reference_index = 0;

  /// Mgr-Prof-Tech, Sales-Office, Prod-Op-Crafts, Srvc-Care with Prod-Op-Crafts as reference.
  static OccupationSet broad_groups();

  int size() const { return static_cast<int>(labels.size()); }
  void validate() const;
};

struct AgeGrouping {
  std::vector<std::pair<int, int>> bounds;  // inclusive
  int entry_age = 25;
  int exit_age = 54;

  static AgeGrouping ten_year_bins();

  int size() const { return static_cast<int>(bounds.size()); }
  void validate() const;
};

/// Index of the interval containing `age`. Throws ConfigError outside [entry_age, exit_age].
int age_group(int age, const AgeGrouping& grouping);

struct TimeFrame {
  int first_year = 1975;
  int last_year = 2010;
  int base_end = 1984;

  int n_years() const { return last_year - first_year + 1; }
  int n_analysis_years() const { return last_year - base_end; }
  int index(int year) const { return year - first_year; }
  bool contains(int year) const { return year >= first_year && year <= last_year; }
  bool in_base(int year) const { return year <= base_end; }
  void validate() const;
};

/// Dense (year, occupation) table covering every year of a TimeFrame.
class YearTable {
 public:
  YearTable() = default;
  YearTable(const TimeFrame& frame, int n_occupations, double fill = 0.0);

  double& at(int year, int k) { return values_[offset(year, k)]; }
  double at(int year, int k) const { return values_[offset(year, k)]; }

  int first_year() const { return first_year_; }
  int last_year() const { return first_year_ + n_years_ - 1; }
  int n_years() const { return n_years_; }
  int occupations() const { return n_occupations_; }
  bool covers(const TimeFrame& frame) const;
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

 private:
  std::size_t offset(int year, int k) const;

  int first_year_ = 0;
  int n_years_ = 0;
  int n_occupations_ = 0;
  std::vector<double> values_;
};

/// Skill accumulation tensor indexed by (age group, previous occupation, occupation).
class Gamma {
 public:
  Gamma() = default;
  Gamma(int n_age_groups, int n_occupations, double fill = 0.0);

  double& operator()(int a, int from, int to) { return values_[offset(a, from, to)]; }
  double operator()(int a, int from, int to) const { return values_[offset(a, from, to)]; }

  int age_groups() const { return n_age_groups_; }
  int occupations() const { return n_occupations_; }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t offset(int a, int from, int to) const;

  int n_age_groups_ = 0;
  int n_occupations_ = 0;
  std::vector<double> values_;
};

enum class ShockFamily { none, gaussian, empirical };

struct ShockLaw {
  ShockFamily family = ShockFamily::gaussian;
  double sigma_multiplier = 0.5;
  // Stand-in for the dispersion of observed annual log wage growth.
  double sigma_ref = 0.15;
  double rho = 0.0;
  std::vector<double> empirical_sample;

  /// Standard deviation of the AR(1) innovation.
  double innovation_sd() const;
  /// Applies family-specific conventions: `none` zeroes the multiplier,
  /// `empirical` takes sigma_ref from the sample.
  void normalize();
  void validate() const;
};

enum class SwitchCostForm { multiplicative, additive };

struct ParameterSet {
  OccupationSet occupations = OccupationSet::broad_groups();
  YearTable prices;  // log skill prices
  Gamma gamma;
  ShockLaw shocks;
  double switch_cost = 0.0;
  SwitchCostForm switch_cost_form = SwitchCostForm::multiplicative;
  std::vector<double> amenity_trend;  // yearly amenity change per occupation after base_end
  double amenity_dispersion = 0.0;
  double initial_skill_scale = 3.0;

  int occupation_count() const { return occupations.size(); }
  void validate(const TimeFrame& frame, const AgeGrouping& grouping) const;
};

struct CareerYear {
  int year = 0;
  int age = 0;
  int occupation = 0;
  double amenity = 0.0;  // decision-relevant amenity of the chosen occupation
  double log_wage = 0.0;
};

/// One worker's simulated trajectory. Per-year vectors over all occupations
/// are stored row-major in `skills`, `shocks` and `amenities`.
struct Career {
  int worker_id = 0;
  int entry_year = 0;
  int entry_age = 0;
  int n_occupations = 0;
  std::vector<CareerYear> years;
  std::vector<double> skills;
  std::vector<double> shocks;
  std::vector<double> amenities;

  std::span<const double> skills_at(std::size_t i) const;
  std::span<const double> shocks_at(std::size_t i) const;
  std::span<const double> amenities_at(std::size_t i) const;
  int switches() const;
};

}  // namespace roylab
