#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "roylab/csv.hpp"
#include "roylab/experiment.hpp"
#include "roylab/panel.hpp"

namespace roylab::cli {

namespace fs = std::filesystem;

namespace {

struct ConfigOptions {
  std::string config_path;
  std::string scenario;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
  cmd->add_option("--scenario", o.scenario, "builtin scenario to start from");
  cmd->add_option("--profile", o.profile, "scale profile")->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--set", o.overrides, "override a configuration value, dotted.path=value");
}

Profile parse_profile(const std::string& s) { return s == "paper" ? Profile::paper : Profile::desk; }

ExperimentConfig resolve_config(const ConfigOptions& o) {
  std::vector<std::string> overrides;
  if (!o.profile.empty()) {
    ExperimentConfig scaled;
    scaled.apply_profile(parse_profile(o.profile));
    overrides.push_back("n_workers=" + std::to_string(scaled.n_workers));
    overrides.push_back("repetitions=" + std::to_string(scaled.repetitions));
  }
  overrides.insert(overrides.end(), o.overrides.begin(), o.overrides.end());
  if (o.seed) overrides.push_back("base_seed=" + std::to_string(*o.seed));

  if (!o.config_path.empty()) {
    if (!o.scenario.empty()) throw ConfigError("--config and --scenario are mutually exclusive");
    return load_config(o.config_path, overrides);
  }
  if (!o.scenario.empty()) {
    const Profile p = o.profile.empty() ? Profile::desk : parse_profile(o.profile);
    return parse_config(config_to_json(builtin_scenario(o.scenario, p)), overrides);
  }
  return parse_config("", overrides);
}

int thread_count(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("ROYLAB_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("ROYLAB_THREADS must be a positive integer, got '") + env + "'");
  }
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo lab for occupation skill prices under Roy selection", "roylab"};
  app.require_subcommand(1);
  int threads = 0;
  std::string out_dir = "runs";
  app.add_option("--threads", threads, "worker threads (default: ROYLAB_THREADS or all cores)");

  ConfigOptions sim_opts, exp_opts, est_opts, desc_opts;
  int rep = 0;
  auto* simulate = app.add_subcommand("simulate", "simulate one repetition and write the panel CSVs");
  add_config_options(simulate, sim_opts);
  simulate->add_option("--rep", rep, "repetition index whose seed to use")->check(CLI::NonNegativeNumber);
  simulate->add_option("--out", out_dir, "output directory");
  simulate->add_option("--threads", threads, "worker threads");

  std::string panel_path, levels_path, method_name_arg;
  auto* estimate_cmd = app.add_subcommand("estimate", "estimate prices and accumulation from panel CSVs");
  add_config_options(estimate_cmd, est_opts);
  estimate_cmd->add_option("--panel", panel_path, "first-difference CSV")->required()->check(CLI::ExistingFile);
  estimate_cmd->add_option("--levels", levels_path, "levels CSV (fixed-effects methods)")->check(CLI::ExistingFile);
  estimate_cmd->add_option("--method", method_name_arg, "estimator")
      ->required()
      ->check(CLI::IsMember({"ols", "iv", "amenity", "fe", "fe-nobase"}));
  estimate_cmd->add_option("--out", out_dir, "output directory");

  bool run_all = false;
  auto* experiment = app.add_subcommand("experiment", "run a Monte Carlo experiment");
  add_config_options(experiment, exp_opts);
  experiment->add_flag("--all", run_all, "run every builtin scenario");
  experiment->add_option("--out", out_dir, "output directory");
  experiment->add_option("--threads", threads, "worker threads");

  auto* describe_cmd = app.add_subcommand("describe", "descriptive panels of a simulated panel");
  add_config_options(describe_cmd, desc_opts);
  describe_cmd->add_option("--panel", panel_path, "first-difference CSV")->required()->check(CLI::ExistingFile);
  describe_cmd->add_option("--levels", levels_path, "levels CSV")->check(CLI::ExistingFile);
  describe_cmd->add_option("--out", out_dir, "output directory");

  std::string export_dir;
  auto* scenarios = app.add_subcommand("scenarios", "list the builtin scenarios");
  scenarios->add_option("--export", export_dir, "write one JSON configuration per scenario into this directory");
  scenarios->add_option("--profile", sim_opts.profile, "scale profile")->check(CLI::IsMember({"desk", "paper"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    const int n_threads = thread_count(threads);
    if (*simulate) {
      const ExperimentConfig cfg = resolve_config(sim_opts);
      SimulationOptions opts;
      opts.threads = n_threads;
      opts.keep_latent = false;
      const auto careers = simulate_careers(cfg.seed_for(rep), cfg.parameters(), cfg.frame, cfg.grouping, opts);
      const PanelDataset panel = flatten(careers, cfg.frame);
      write_diff_csv(fs::path(out_dir) / "panel.csv", panel.diffs);
      write_levels_csv(fs::path(out_dir) / "levels.csv", panel.levels);
      out << "simulated " << careers.size() << " workers, " << panel.diffs.size() << " first-difference rows -> "
          << out_dir << "\n";
    } else if (*estimate_cmd) {
      const bool have_config = !est_opts.config_path.empty() || !est_opts.scenario.empty();
      const ExperimentConfig cfg = resolve_config(est_opts);
      const Method method = parse_method(method_name_arg);
      std::optional<fs::path> levels;
      if (!levels_path.empty()) levels = levels_path;
      const PanelDataset panel = read_panel(panel_path, levels, cfg.occupations.size());
      const EstimateSet est = roylab::estimate(panel, method, cfg.frame, cfg.grouping, cfg.occupations);
      std::optional<ParameterSet> truth;
      if (have_config) truth = cfg.parameters();
      write_estimate(out_dir, est, cfg.occupations, truth ? &*truth : nullptr);
      out << method_name(method) << ": " << est.n_obs << " observations, " << est.dropped_columns.size()
          << " dropped and " << est.empty_columns.size() << " empty columns -> " << out_dir << "\n";
      for (const auto& w : est.weak_instruments) err << "warning: weak instrument: " << w << "\n";
    } else if (*experiment) {
      std::vector<ExperimentConfig> configs;
      if (run_all) {
        for (auto& base : builtin_scenarios(exp_opts.profile.empty() ? Profile::desk : parse_profile(exp_opts.profile))) {
          ConfigOptions o = exp_opts;
          o.scenario = base.scenario;
          configs.push_back(resolve_config(o));
        }
      } else {
        configs.push_back(resolve_config(exp_opts));
      }
      RunOptions run;
      run.threads = n_threads;
      for (const auto& cfg : configs) {
        const ExperimentReport report = run_experiment(cfg, run);
        const fs::path dir = write_report(out_dir, report);
        out << cfg.scenario << " (" << cfg.repetitions << " reps, " << cfg.n_workers << " workers) -> "
            << dir.string() << "\n";
        for (const auto& m : report.methods) {
          out << "  " << method_name(m.method) << ": ";
          if (m.aggregate)
            out << "price MAE " << format_number(price_mae(*m.aggregate)) << ", diagonal gamma MAD "
                << format_number(gamma_diag_mad(*m.aggregate));
          else
            out << "no successful repetition";
          if (!m.failures.empty()) out << " (" << m.failures.size() << " failed)";
          out << "\n";
        }
      }
    } else if (*describe_cmd) {
      const ExperimentConfig cfg = resolve_config(desc_opts);
      std::optional<fs::path> levels;
      if (!levels_path.empty()) levels = levels_path;
      const PanelDataset panel = read_panel(panel_path, levels, cfg.occupations.size());
      write_descriptives(out_dir, describe(panel, cfg.frame), cfg.occupations);
      out << "descriptives -> " << out_dir << "\n";
    } else if (*scenarios) {
      const Profile p = sim_opts.profile.empty() ? Profile::desk : parse_profile(sim_opts.profile);
      for (const auto& cfg : builtin_scenarios(p)) {
        out << cfg.scenario << "\n";
        if (!export_dir.empty()) {
          const fs::path path = fs::path(export_dir) / (cfg.scenario + ".json");
          std::error_code ec;
          fs::create_directories(export_dir, ec);
          std::ofstream f(path, std::ios::binary);
          if (!f || !(f << config_to_json(cfg))) throw IoError("cannot write " + path.string());
        }
      }
    }
  } catch (const ConfigError& e) {
    err << "error: config: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    err << "error: io: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: runtime: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace roylab::cli
