#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roylab/descriptives.hpp"
#include "roylab/dgp.hpp"
#include "roylab/estimators.hpp"
#include "roylab/types.hpp"

namespace roylab {

enum class Profile { desk, paper };

struct ExperimentConfig {
  std::string scenario = "custom";
  int n_workers = 5000;
  int repetitions = 20;
  std::uint64_t base_seed = 20240601;

  ShockLaw shocks;
  double cross_scale = 1.0 / 3.0;
  double switch_cost = 0.0;
  SwitchCostForm switch_cost_form = SwitchCostForm::multiplicative;
  std::vector<double> amenity_trend = {0.0, 0.0, 0.0, 0.0};
  double amenity_dispersion = 0.0;
  std::vector<double> price_drift = {0.010, 0.003, -0.005, -0.008};
  std::vector<double> price_level = {0.0, 0.0, 0.0, 0.0};
  SeedConfig seed;  // n_workers and seed are filled per repetition
  double initial_skill_scale = 3.0;

  OccupationSet occupations = OccupationSet::broad_groups();
  TimeFrame frame;
  AgeGrouping grouping = AgeGrouping::ten_year_bins();

  std::vector<Method> estimators = {Method::ols};
  std::string output_dir = "runs";

  void apply_profile(Profile profile);
  ParameterSet parameters() const;
  SeedConfig seed_for(int rep) const;
  void validate() const;
};

/// Parses a JSON configuration layered over the defaults. Each override has the form
/// "dotted.path=value" and must name a key that exists in the default configuration;
/// the value is parsed as JSON and falls back to a plain string.
ExperimentConfig parse_config(std::string_view json_text, std::span<const std::string> overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});
std::string config_to_json(const ExperimentConfig& config);

/// The eight scenarios of the Monte Carlo study, in desk or paper scale.
std::vector<ExperimentConfig> builtin_scenarios(Profile profile = Profile::desk);
/// A builtin by name; also knows "switch-costs-text" (c = 0.075), which is not one of the eight.
ExperimentConfig builtin_scenario(std::string_view name, Profile profile = Profile::desk);

struct RunOptions {
  int threads = 0;             // <= 0: all cores
  bool keep_repetitions = true;  // keep per-repetition estimates in the report
};

struct MethodReport {
  Method method = Method::ols;
  std::optional<MCAggregate> aggregate;  // empty when every repetition failed
  std::vector<EstimateSet> repetitions;  // successful ones, in repetition order
  std::vector<int> repetition_index;
  std::vector<std::string> failures;     // "rep N: message"
};

struct DescriptivePanels {
  FlowMatrix entrants;
  FlowMatrix leavers;
  Histogram growth_hist;
  GrowthMoments growth;
  std::vector<QuantilePoint> quantiles;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<MethodReport> methods;
  DescriptivePanels descriptives;        // first repetition
  std::vector<int> switches;             // total switches per repetition
  std::vector<std::size_t> observations; // first-difference rows per repetition
  double wall_seconds = 0.0;

  const MethodReport* find(Method m) const;
};

/// Simulates and estimates one repetition; the result depends only on (config, rep).
struct RepetitionOutcome {
  std::vector<std::optional<EstimateSet>> estimates;  // per configured estimator
  std::vector<std::string> errors;
  int switches = 0;
  std::size_t observations = 0;
  std::optional<DescriptivePanels> descriptives;
};

RepetitionOutcome run_repetition(const ExperimentConfig& config, int rep, bool with_descriptives);

ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

DescriptivePanels describe(const PanelDataset& panel, const TimeFrame& frame);

}  // namespace roylab
