#include "roylab/dgp.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "roylab/parallel.hpp"
#include "roylab/truncated_normal.hpp"

namespace roylab {

namespace {

// [from][to][age group], broad groups order, truth values with cross_scale = 1/3
constexpr double kGammaTruth[4][4][3] = {
    {{0.048, 0.016, 0.003}, {0.063, 0.009, -0.010}, {0.023, -0.011, -0.022}, {-0.008, -0.036, -0.004}},
    {{0.088, 0.027, 0.009}, {0.044, 0.016, 0.001}, {0.056, 0.019, -0.008}, {0.010, -0.034, -0.024}},
    {{0.075, 0.042, 0.021}, {0.036, 0.022, 0.000}, {0.020, 0.008, -0.007}, {-0.017, -0.014, -0.009}},
    {{0.099, 0.063, 0.041}, {0.090, 0.048, 0.015}, {0.106, 0.075, 0.037}, {0.019, 0.005, -0.011}},
};

struct EntrySlot {
  int worker_id;
  int year;
  int age;  // -1: draw uniformly over working ages (first-year cross-section)
};

std::vector<EntrySlot> entry_slots(const SeedConfig& seed, const TimeFrame& frame,
                                   const AgeGrouping& grouping) {
  std::vector<EntrySlot> slots;
  if (seed.scheme == CohortScheme::cross_section) {
    const int n_ages = grouping.exit_age - grouping.entry_age + 1;
    const int cohort = static_cast<int>(std::lround(static_cast<double>(seed.n_workers) / n_ages));
    slots.reserve(seed.n_workers + static_cast<std::size_t>(cohort) * (frame.n_years() - 1));
    int id = 0;
    for (int i = 0; i < seed.n_workers; ++i) slots.push_back({id++, frame.first_year, -1});
    for (int year = frame.first_year + 1; year <= frame.last_year; ++year)
      for (int i = 0; i < cohort; ++i) slots.push_back({id++, year, grouping.entry_age});
  } else {
    for (int i = 0; i < seed.n_workers; ++i) slots.push_back({i, -1, grouping.entry_age});
  }
  return slots;
}

class ShockDrawer {
 public:
  explicit ShockDrawer(const ShockLaw& law) : law_(law), sd_(law.innovation_sd()) {
    if (law.family == ShockFamily::empirical && !law.empirical_sample.empty()) {
      const double n = static_cast<double>(law.empirical_sample.size());
      mean_ = std::accumulate(law.empirical_sample.begin(), law.empirical_sample.end(), 0.0) / n;
    }
  }

  double operator()(Rng& rng) const {
    switch (law_.family) {
      case ShockFamily::none:
        return 0.0;
      case ShockFamily::gaussian:
        return sd_ == 0.0 ? 0.0 : sd_ * std::normal_distribution<double>(0.0, 1.0)(rng);
      case ShockFamily::empirical: {
        std::uniform_int_distribution<std::size_t> pick(0, law_.empirical_sample.size() - 1);
        return law_.sigma_multiplier * (law_.empirical_sample[pick(rng)] - mean_);
      }
    }
    return 0.0;
  }

 private:
  const ShockLaw& law_;
  double sd_;
  double mean_ = 0.0;
};

Career simulate_one(const EntrySlot& slot, const SeedConfig& seed, const ParameterSet& params,
                    const YearTable& psi, const ShockDrawer& draw_shock, const TimeFrame& frame,
                    const AgeGrouping& grouping, bool keep_latent) {
  const int K = params.occupation_count();
  Rng rng = worker_rng(seed.seed, static_cast<std::uint64_t>(slot.worker_id));

  int entry_year = slot.year;
  if (entry_year < 0)
    entry_year = std::uniform_int_distribution<int>(frame.first_year, frame.last_year - 1)(rng);
  int entry_age = slot.age;
  if (entry_age < 0)
    entry_age = std::uniform_int_distribution<int>(grouping.entry_age, grouping.exit_age)(rng);

  std::discrete_distribution<int> pick_occupation(seed.shares.begin(), seed.shares.end());
  const int k0 = pick_occupation(rng);
  const double w0 = std::normal_distribution<double>(seed.log_wage_mean[k0], seed.log_wage_sd[k0])(rng);
  const double s0 = decompose_initial_wage(w0, k0, entry_year, params.prices);
  std::vector<double> skill = draw_latent_skills(s0, k0, entry_year, params.prices,
                                                 params.initial_skill_scale, rng, &psi);

  const int last_year = std::min(frame.last_year, entry_year + (grouping.exit_age - entry_age));
  const int n_years = last_year - entry_year + 1;

  Career career;
  career.worker_id = slot.worker_id;
  career.entry_year = entry_year;
  career.entry_age = entry_age;
  career.n_occupations = K;
  career.years.reserve(n_years);
  if (keep_latent) {
    career.skills.reserve(static_cast<std::size_t>(n_years) * K);
    career.shocks.reserve(static_cast<std::size_t>(n_years) * K);
    career.amenities.reserve(static_cast<std::size_t>(n_years) * K);
  }

  std::vector<double> shock(K, 0.0), amenity(K), value(K);
  for (int k = 0; k < K; ++k) amenity[k] = psi.at(entry_year, k);
  auto record = [&](int year, int age, int k) {
    career.years.push_back({year, age, k, amenity[k], params.prices.at(year, k) + skill[k]});
    if (keep_latent) {
      career.skills.insert(career.skills.end(), skill.begin(), skill.end());
      career.shocks.insert(career.shocks.end(), shock.begin(), shock.end());
      career.amenities.insert(career.amenities.end(), amenity.begin(), amenity.end());
    }
  };
  record(entry_year, entry_age, k0);

  const double rho = params.shocks.rho;
  const double c = params.switch_cost;
  const bool multiplicative = params.switch_cost_form == SwitchCostForm::multiplicative;
  std::normal_distribution<double> std_normal(0.0, 1.0);

  int k_prev = k0;
  for (int year = entry_year + 1; year <= last_year; ++year) {
    const int age_prev = entry_age + (year - 1 - entry_year);
    const int a = age_group(age_prev, grouping);
    for (int k = 0; k < K; ++k) {
      shock[k] = rho * shock[k] + draw_shock(rng);
      skill[k] += params.gamma(a, k_prev, k) + shock[k];
    }
    for (int k = 0; k < K; ++k) {
      amenity[k] = psi.at(year, k);
      if (params.amenity_dispersion > 0.0) amenity[k] += params.amenity_dispersion * std_normal(rng);
      const double u = params.prices.at(year, k) + skill[k] + amenity[k];
      if (k == k_prev)
        value[k] = u;
      else
        value[k] = multiplicative ? (1.0 - c) * u : u - c;
    }
    int best = k_prev;
    for (int k = 0; k < K; ++k)
      if (value[k] > value[best]) best = k;
    record(year, age_prev + 1, best);
    k_prev = best;
  }
  return career;
}

}  // namespace

void SeedConfig::validate(int n_occupations) const {
  if (n_workers < 1) throw ConfigError("n_workers must be >= 1");
  const auto K = static_cast<std::size_t>(n_occupations);
  if (shares.size() != K || log_wage_mean.size() != K || log_wage_sd.size() != K)
    throw ConfigError("seed population needs one share, wage mean and wage sd per occupation");
  double total = 0.0;
  for (double s : shares) {
    if (!(s >= 0.0)) throw ConfigError("occupation shares must be nonnegative");
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("occupation shares must sum to 1");
  for (std::size_t k = 0; k < K; ++k)
    if (!std::isfinite(log_wage_mean[k]) || !(log_wage_sd[k] >= 0.0))
      throw ConfigError("invalid initial log wage law");
}

YearTable linear_price_paths(const TimeFrame& frame, std::span<const double> drift,
                             std::span<const double> level) {
  const int K = static_cast<int>(drift.size());
  if (!level.empty() && static_cast<int>(level.size()) != K)
    throw ConfigError("price level and drift sizes differ");
  YearTable prices(frame, K);
  for (int year = frame.first_year; year <= frame.last_year; ++year)
    for (int k = 0; k < K; ++k) {
      const double base = level.empty() ? 0.0 : level[k];
      prices.at(year, k) = base + drift[k] * std::max(0, year - frame.base_end);
    }
  return prices;
}

YearTable amenity_levels(std::span<const double> trend, const TimeFrame& frame) {
  const int K = static_cast<int>(trend.size());
  YearTable psi(frame, K);
  for (int year = frame.base_end + 1; year <= frame.last_year; ++year)
    for (int k = 0; k < K; ++k) psi.at(year, k) = psi.at(year - 1, k) + trend[k];
  return psi;
}

double decompose_initial_wage(double w0, int k0, int year, const YearTable& prices) {
  return w0 - prices.at(year, k0);
}

std::vector<double> draw_latent_skills(double s_k0, int k0, int year, const YearTable& prices,
                                       double sigma, Rng& rng, const YearTable* amenities) {
  if (!(sigma > 0.0)) throw ConfigError("initial skill scale must be > 0");
  const int K = prices.occupations();
  std::vector<double> skills(K);
  const double w0 = s_k0 + prices.at(year, k0);
  const double u0 = w0 + (amenities ? amenities->at(year, k0) : 0.0);
  for (int k = 0; k < K; ++k) {
    if (k == k0) {
      skills[k] = s_k0;
      continue;
    }
    const double bound = u0 - prices.at(year, k) - (amenities ? amenities->at(year, k) : 0.0);
    if (!std::isfinite(bound)) throw ConfigError("non-finite truncation bound");
    skills[k] = truncated_normal_upper(w0, sigma, bound, rng);
  }
  return skills;
}

Gamma reference_gamma_table() {
  Gamma g(3, 4);
  for (int from = 0; from < 4; ++from)
    for (int to = 0; to < 4; ++to)
      for (int a = 0; a < 3; ++a)
        g(a, from, to) = from == to ? kGammaTruth[from][to][a] : 3.0 * kGammaTruth[from][to][a];
  return g;
}

Gamma gamma_from_table(const Gamma& source, double cross_scale) {
  Gamma g(source.age_groups(), source.occupations());
  for (int a = 0; a < source.age_groups(); ++a)
    for (int from = 0; from < source.occupations(); ++from)
      for (int to = 0; to < source.occupations(); ++to) {
        const double v = source(a, from, to);
        if (!std::isfinite(v))
          throw ConfigError("skill accumulation table is missing cell (" + std::to_string(a) +
                            ", " + std::to_string(from) + ", " + std::to_string(to) + ")");
        g(a, from, to) = from == to ? v : cross_scale * v;
      }
  return g;
}

int seed_population_size(const SeedConfig& seed, const TimeFrame& frame,
                         const AgeGrouping& grouping) {
  return static_cast<int>(entry_slots(seed, frame, grouping).size());
}

std::vector<Career> simulate_careers(const SeedConfig& seed, const ParameterSet& params,
                                     const TimeFrame& frame, const AgeGrouping& grouping,
                                     const SimulationOptions& options) {
  params.validate(frame, grouping);
  seed.validate(params.occupation_count());
  if (params.shocks.family == ShockFamily::none && params.shocks.sigma_multiplier != 0.0)
    throw ConfigError("shock family 'none' requires a zero multiplier");

  const auto slots = entry_slots(seed, frame, grouping);
  const YearTable psi = amenity_levels(params.amenity_trend, frame);
  const ShockDrawer draw_shock(params.shocks);
  std::vector<Career> careers(slots.size());
  parallel_for(slots.size(), options.threads, [&](std::size_t i) {
    careers[i] = simulate_one(slots[i], seed, params, psi, draw_shock, frame, grouping,
                              options.keep_latent);
  });
  return careers;
}

}  // namespace roylab
