#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "roylab/random.hpp"
#include "roylab/types.hpp"

namespace roylab {

enum class CohortScheme {
  cross_section,  // first-year cross-section plus one entry cohort per later year
  uniform_entry,  // every worker enters at entry_age in a uniformly drawn year
};

struct SeedConfig {
  int n_workers = 5000;
  std::vector<double> shares = {0.25, 0.25, 0.35, 0.15};
  std::vector<double> log_wage_mean = {4.5, 4.2, 4.2, 3.9};
  std::vector<double> log_wage_sd = {0.45, 0.40, 0.35, 0.40};
  CohortScheme scheme = CohortScheme::cross_section;
  std::uint64_t seed = 1;

  void validate(int n_occupations) const;
};

struct SimulationOptions {
  int threads = 1;
  bool keep_latent = true;  // store skills, shocks and amenities per year
};

/// Flat prices through base_end, then level + drift * (year - base_end).
YearTable linear_price_paths(const TimeFrame& frame, std::span<const double> drift,
                             std::span<const double> level = {});

/// Amenity levels: zero through base_end, then cumulated yearly trend.
YearTable amenity_levels(std::span<const double> trend, const TimeFrame& frame);

/// Skill component of an observed initial wage.
double decompose_initial_wage(double w0, int k0, int year, const YearTable& prices);

/// Latent skills in every occupation given the skill in the chosen one. Entry k0 of the
/// result is s_k0; the others are truncated normal draws that keep k0 optimal at entry.
/// `amenities`, when given, extends the bound to the decision values wage + amenity.
std::vector<double> draw_latent_skills(double s_k0, int k0, int year, const YearTable& prices,
                                       double sigma, Rng& rng,
                                       const YearTable* amenities = nullptr);

/// Skill accumulation source table for the four broad occupation groups and
/// ten-year age bins. Diagonal entries are the accumulation truth, cross entries
/// are three times the truth used with cross_scale = 1/3.
Gamma reference_gamma_table();

/// Copies the diagonal and scales the cross entries.
Gamma gamma_from_table(const Gamma& source, double cross_scale);

/// Number of workers the seed population will contain.
int seed_population_size(const SeedConfig& seed, const TimeFrame& frame,
                         const AgeGrouping& grouping);

std::vector<Career> simulate_careers(const SeedConfig& seed, const ParameterSet& params,
                                     const TimeFrame& frame, const AgeGrouping& grouping,
                                     const SimulationOptions& options = {});

}  // namespace roylab
