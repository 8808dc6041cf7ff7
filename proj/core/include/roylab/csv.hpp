#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "roylab/descriptives.hpp"
#include "roylab/estimators.hpp"
#include "roylab/experiment.hpp"
#include "roylab/panel.hpp"

namespace roylab {

/// Shortest round-trip representation; NaN is written as NA and infinities as Inf / -Inf.
std::string format_number(double x);

void write_diff_csv(const std::filesystem::path& path, const std::vector<DiffRow>& rows);
void write_levels_csv(const std::filesystem::path& path, const std::vector<LevelRow>& rows);
std::vector<DiffRow> read_diff_csv(const std::filesystem::path& path);
std::vector<LevelRow> read_levels_csv(const std::filesystem::path& path);

/// Reads a first-difference file and an optional levels file. Rows are sorted by
/// (worker, year), lagged choices are rebuilt, and levels ages are taken from the
/// first-difference rows (-1 when a worker has none).
PanelDataset read_panel(const std::filesystem::path& diff_path,
                        const std::optional<std::filesystem::path>& levels_path, int n_occupations);

/// prices.csv, gammas.csv and, for the amenity method, psi.csv of a single estimate.
/// Truth columns are NA when `truth` is null.
void write_estimate(const std::filesystem::path& dir, const EstimateSet& est,
                    const OccupationSet& occupations, const ParameterSet* truth = nullptr);

/// Across-repetition output of one estimator: prices.csv and gammas.csv with means,
/// truth and standard deviations, psi.csv when present, and prices_reps.csv with every
/// repetition's path.
void write_method_report(const std::filesystem::path& dir, const MethodReport& report,
                         const OccupationSet& occupations);

void write_descriptives(const std::filesystem::path& dir, const DescriptivePanels& panels,
                        const OccupationSet& occupations);

/// <out>/<scenario>/<estimator>/*.csv, <out>/<scenario>/descriptives/*.csv and
/// <out>/<scenario>/report.json.
std::filesystem::path write_report(const std::filesystem::path& out, const ExperimentReport& report);

}  // namespace roylab
