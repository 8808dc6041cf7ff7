#include "roylab/experiment.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "roylab/parallel.hpp"
#include "roylab/panel.hpp"
#include "roylab/random.hpp"

namespace roylab {

using nlohmann::json;

namespace {

std::string_view family_name(ShockFamily f) {
  switch (f) {
    case ShockFamily::none: return "none";
    case ShockFamily::gaussian: return "gaussian";
    case ShockFamily::empirical: return "empirical";
  }
  return "?";
}

ShockFamily parse_family(const std::string& s) {
  if (s == "none") return ShockFamily::none;
  if (s == "gaussian") return ShockFamily::gaussian;
  if (s == "empirical") return ShockFamily::empirical;
  throw ConfigError("unknown shock family '" + s + "'");
}

json to_json_value(const ExperimentConfig& c) {
  json bounds = json::array();
  for (const auto& [lo, hi] : c.grouping.bounds) bounds.push_back({lo, hi});
  json estimators = json::array();
  for (Method m : c.estimators) estimators.push_back(std::string(method_name(m)));
  return {
      {"scenario", c.scenario},
      {"n_workers", c.n_workers},
      {"repetitions", c.repetitions},
      {"base_seed", c.base_seed},
      {"shocks",
       {{"family", std::string(family_name(c.shocks.family))},
        {"sigma_multiplier", c.shocks.sigma_multiplier},
        {"sigma_ref", c.shocks.sigma_ref},
        {"rho", c.shocks.rho},
        {"empirical_sample", c.shocks.empirical_sample}}},
      {"gamma", {{"cross_scale", c.cross_scale}}},
      {"switch_cost",
       {{"c", c.switch_cost},
        {"form", c.switch_cost_form == SwitchCostForm::multiplicative ? "multiplicative" : "additive"}}},
      {"amenity", {{"trend", c.amenity_trend}, {"dispersion", c.amenity_dispersion}}},
      {"prices", {{"drift", c.price_drift}, {"level", c.price_level}}},
      {"seed_population",
       {{"shares", c.seed.shares},
        {"log_wage_mean", c.seed.log_wage_mean},
        {"log_wage_sd", c.seed.log_wage_sd},
        {"cohort_scheme", c.seed.scheme == CohortScheme::cross_section ? "cross_section" : "uniform_entry"},
        {"initial_skill_scale", c.initial_skill_scale}}},
      {"occupations", {{"labels", c.occupations.labels}, {"reference", c.occupations.reference_index}}},
      {"frame", {{"first_year", c.frame.first_year}, {"last_year", c.frame.last_year}, {"base_end", c.frame.base_end}}},
      {"age_groups", {{"bounds", bounds}, {"entry_age", c.grouping.entry_age}, {"exit_age", c.grouping.exit_age}}},
      {"estimators", estimators},
      {"output_dir", c.output_dir},
  };
}

ExperimentConfig from_json_value(const json& j) {
  ExperimentConfig c;
  j.at("scenario").get_to(c.scenario);
  j.at("n_workers").get_to(c.n_workers);
  j.at("repetitions").get_to(c.repetitions);
  j.at("base_seed").get_to(c.base_seed);
  const auto& s = j.at("shocks");
  c.shocks.family = parse_family(s.at("family").get<std::string>());
  s.at("sigma_multiplier").get_to(c.shocks.sigma_multiplier);
  s.at("sigma_ref").get_to(c.shocks.sigma_ref);
  s.at("rho").get_to(c.shocks.rho);
  s.at("empirical_sample").get_to(c.shocks.empirical_sample);
  j.at("gamma").at("cross_scale").get_to(c.cross_scale);
  j.at("switch_cost").at("c").get_to(c.switch_cost);
  const auto form = j.at("switch_cost").at("form").get<std::string>();
  if (form == "multiplicative")
    c.switch_cost_form = SwitchCostForm::multiplicative;
  else if (form == "additive")
    c.switch_cost_form = SwitchCostForm::additive;
  else
    throw ConfigError("unknown switch cost form '" + form + "'");
  j.at("amenity").at("trend").get_to(c.amenity_trend);
  j.at("amenity").at("dispersion").get_to(c.amenity_dispersion);
  j.at("prices").at("drift").get_to(c.price_drift);
  j.at("prices").at("level").get_to(c.price_level);
  const auto& sp = j.at("seed_population");
  sp.at("shares").get_to(c.seed.shares);
  sp.at("log_wage_mean").get_to(c.seed.log_wage_mean);
  sp.at("log_wage_sd").get_to(c.seed.log_wage_sd);
  const auto scheme = sp.at("cohort_scheme").get<std::string>();
  if (scheme == "cross_section")
    c.seed.scheme = CohortScheme::cross_section;
  else if (scheme == "uniform_entry")
    c.seed.scheme = CohortScheme::uniform_entry;
  else
    throw ConfigError("unknown cohort scheme '" + scheme + "'");
  sp.at("initial_skill_scale").get_to(c.initial_skill_scale);
  j.at("occupations").at("labels").get_to(c.occupations.labels);
  j.at("occupations").at("reference").get_to(c.occupations.reference_index);
  const auto& f = j.at("frame");
  f.at("first_year").get_to(c.frame.first_year);
  f.at("last_year").get_to(c.frame.last_year);
  f.at("base_end").get_to(c.frame.base_end);
  const auto& ag = j.at("age_groups");
  c.grouping.bounds.clear();
  for (const auto& b : ag.at("bounds")) {
    if (!b.is_array() || b.size() != 2) throw ConfigError("age group bounds must be [lo, hi] pairs");
    c.grouping.bounds.emplace_back(b[0].get<int>(), b[1].get<int>());
  }
  ag.at("entry_age").get_to(c.grouping.entry_age);
  ag.at("exit_age").get_to(c.grouping.exit_age);
  c.estimators.clear();
  for (const auto& m : j.at("estimators")) c.estimators.push_back(parse_method(m.get<std::string>()));
  j.at("output_dir").get_to(c.output_dir);
  return c;
}

void check_known_keys(const json& user, const json& defaults, const std::string& prefix) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!defaults.contains(it.key())) throw ConfigError("unknown configuration key '" + path + "'");
    const auto& d = defaults.at(it.key());
    if (d.is_object()) {
      if (!it.value().is_object()) throw ConfigError("configuration key '" + path + "' must be an object");
      check_known_keys(it.value(), d, path);
    }
  }
}

void apply_override(json& j, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + text + "' is not key=value");
  const std::string key = text.substr(0, eq);
  const std::string raw = text.substr(eq + 1);
  json* node = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part))
      throw ConfigError("override key '" + key + "' does not name an existing configuration key");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw ConfigError("override key '" + key + "' names a section, not a value");
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  *node = value;
}

ExperimentConfig checked_config(const json& j) {
  try {
    return from_json_value(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
}

}  // namespace

void ExperimentConfig::apply_profile(Profile profile) {
  if (profile == Profile::paper) {
    n_workers = 50000;
    repetitions = 100;
  } else {
    n_workers = 5000;
    repetitions = 20;
  }
}

ParameterSet ExperimentConfig::parameters() const {
  ParameterSet p;
  p.occupations = occupations;
  p.prices = linear_price_paths(frame, price_drift, price_level);
  const int K = occupations.size();
  if (K == 4 && grouping.size() == 3)
    p.gamma = gamma_from_table(reference_gamma_table(), cross_scale);
  else
    throw ConfigError("the builtin skill accumulation table covers four occupations and three age groups");
  p.shocks = shocks;
  p.shocks.normalize();
  p.switch_cost = switch_cost;
  p.switch_cost_form = switch_cost_form;
  p.amenity_trend = amenity_trend;
  p.amenity_dispersion = amenity_dispersion;
  p.initial_skill_scale = initial_skill_scale;
  return p;
}

SeedConfig ExperimentConfig::seed_for(int rep) const {
  SeedConfig s = seed;
  s.n_workers = n_workers;
  s.seed = repetition_seed(base_seed, static_cast<std::uint64_t>(rep));
  return s;
}

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (n_workers < 1) throw ConfigError("n_workers must be >= 1");
  if (estimators.empty()) throw ConfigError("no estimator configured");
  for (std::size_t i = 0; i < estimators.size(); ++i)
    for (std::size_t j = i + 1; j < estimators.size(); ++j)
      if (estimators[i] == estimators[j]) throw ConfigError("estimator listed twice");
  if (static_cast<int>(price_drift.size()) != occupations.size() ||
      static_cast<int>(price_level.size()) != occupations.size())
    throw ConfigError("price drift and level need one entry per occupation");
  const ParameterSet p = parameters();
  p.validate(frame, grouping);
  seed_for(0).validate(occupations.size());
}

ExperimentConfig parse_config(std::string_view json_text, std::span<const std::string> overrides) {
  json merged = to_json_value(ExperimentConfig{});
  const json defaults = merged;
  if (!json_text.empty()) {
    json user = json::parse(json_text, nullptr, false);
    if (user.is_discarded()) throw ConfigError("configuration is not valid JSON");
    if (!user.is_object()) throw ConfigError("configuration must be a JSON object");
    check_known_keys(user, defaults, "");
    merged.merge_patch(user);
  }
  for (const auto& o : overrides) apply_override(merged, o);
  ExperimentConfig config = checked_config(merged);
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read configuration " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

std::string config_to_json(const ExperimentConfig& config) { return to_json_value(config).dump(2) + "\n"; }

std::vector<ExperimentConfig> builtin_scenarios(Profile profile) {
  auto make = [&](std::string name, double mult, double rho, double cross, double c,
                  std::vector<Method> estimators) {
    ExperimentConfig cfg;
    cfg.apply_profile(profile);
    cfg.scenario = std::move(name);
    cfg.shocks.family = mult == 0.0 ? ShockFamily::none : ShockFamily::gaussian;
    cfg.shocks.sigma_multiplier = mult;
    cfg.shocks.rho = rho;
    cfg.cross_scale = cross;
    cfg.switch_cost = c;
    cfg.estimators = std::move(estimators);
    return cfg;
  };
  using M = Method;
  const double third = 1.0 / 3.0;
  std::vector<ExperimentConfig> out;
  out.push_back(make("no-shocks", 0.0, 0.0, third, 0.0, {M::ols, M::fe_stint, M::fe_nobase}));
  out.push_back(make("moderate-shocks", 0.5, 0.0, third, 0.0, {M::ols, M::iv, M::fe_stint}));
  out.push_back(make("vlarge-shocks", 1.5, 0.0, third, 0.0, {M::ols, M::iv, M::fe_stint}));
  out.push_back(make("persistent-shocks", 0.5, 0.3, third, 0.0, {M::ols, M::iv}));
  out.push_back(make("switch-costs-no-shocks", 0.0, 0.0, 1.0, 0.05, {M::ols}));
  out.push_back(make("moderate-switch-costs", 0.5, 0.0, third, 0.05, {M::ols, M::iv}));
  out.push_back(make("high-switch-costs", 1.5, 0.0, third, 0.2, {M::ols, M::iv}));
  auto amenities = make("trends-amenities", 0.5, 0.0, third, 0.0, {M::ols, M::ols_amenity});
  amenities.amenity_trend = {0.02, 0.0, 0.0, 0.0};
  out.push_back(amenities);
  return out;
}

ExperimentConfig builtin_scenario(std::string_view name, Profile profile) {
  if (name == "switch-costs-text") {
    ExperimentConfig cfg = builtin_scenario("switch-costs-no-shocks", profile);
    cfg.scenario = "switch-costs-text";
    cfg.switch_cost = 0.075;
    return cfg;
  }
  for (auto& cfg : builtin_scenarios(profile))
    if (cfg.scenario == name) return cfg;
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

const MethodReport* ExperimentReport::find(Method m) const {
  for (const auto& r : methods)
    if (r.method == m) return &r;
  return nullptr;
}

DescriptivePanels describe(const PanelDataset& panel, const TimeFrame& frame) {
  DescriptivePanels d;
  d.entrants = switcher_flows(panel, FlowDirection::entrants);
  d.leavers = switcher_flows(panel, FlowDirection::leavers);
  d.growth_hist = wage_growth_hist(panel);
  d.growth = wage_growth_moments(panel);
  d.quantiles = quantile_paths(panel, frame);
  return d;
}

RepetitionOutcome run_repetition(const ExperimentConfig& config, int rep, bool with_descriptives) {
  const ParameterSet params = config.parameters();
  SimulationOptions sim;
  sim.threads = 1;
  sim.keep_latent = false;
  PanelDataset panel;
  RepetitionOutcome out;
  {
    const auto careers = simulate_careers(config.seed_for(rep), params, config.frame, config.grouping, sim);
    for (const auto& c : careers) out.switches += c.switches();
    panel = flatten(careers, config.frame);
  }
  out.observations = panel.diffs.size();
  for (Method m : config.estimators) {
    try {
      out.estimates.emplace_back(estimate(panel, m, config.frame, config.grouping, config.occupations));
      out.errors.emplace_back();
    } catch (const Error& e) {
      out.estimates.emplace_back(std::nullopt);
      out.errors.emplace_back(e.what());
    }
  }
  if (with_descriptives) out.descriptives = describe(panel, config.frame);
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  std::vector<RepetitionOutcome> outcomes(config.repetitions);
  parallel_for(outcomes.size(), options.threads,
               [&](std::size_t r) { outcomes[r] = run_repetition(config, static_cast<int>(r), r == 0); });

  ExperimentReport report;
  report.config = config;
  const ParameterSet truth = config.parameters();
  for (std::size_t m = 0; m < config.estimators.size(); ++m) {
    MethodReport mr;
    mr.method = config.estimators[m];
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
      auto& est = outcomes[r].estimates[m];
      if (est) {
        mr.repetitions.push_back(std::move(*est));
        mr.repetition_index.push_back(static_cast<int>(r));
      } else {
        mr.failures.push_back("rep " + std::to_string(r) + ": " + outcomes[r].errors[m]);
      }
    }
    if (!mr.repetitions.empty()) mr.aggregate = aggregate(mr.repetitions, truth, config.frame);
    if (!options.keep_repetitions) mr.repetitions.clear();
    report.methods.push_back(std::move(mr));
  }
  for (const auto& o : outcomes) {
    report.switches.push_back(o.switches);
    report.observations.push_back(o.observations);
  }
  if (outcomes.front().descriptives) report.descriptives = std::move(*outcomes.front().descriptives);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace roylab
