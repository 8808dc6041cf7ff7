// Desk-scale acceptance run. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "roylab/csv.hpp"
#include "roylab/experiment.hpp"
#include "roylab/truncated_normal.hpp"

namespace fs = std::filesystem;
using namespace roylab;

namespace {

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

struct Runs {
  Profile profile = Profile::desk;
  int threads = 0;
  std::map<std::string, ExperimentReport> done;

  const ExperimentReport& get(const std::string& scenario, std::vector<Method> methods) {
    auto it = done.find(scenario);
    if (it != done.end()) return it->second;
    ExperimentConfig cfg = builtin_scenario(scenario, profile);
    cfg.estimators = std::move(methods);
    RunOptions opts;
    opts.threads = threads;
    const auto t0 = std::chrono::steady_clock::now();
    auto rep = run_experiment(cfg, opts);
    std::fprintf(stderr, "  [%s: %d reps x %d workers, %.1fs]\n", scenario.c_str(), cfg.repetitions,
                 cfg.n_workers, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return done.emplace(scenario, std::move(rep)).first->second;
  }
};

const MCAggregate& agg(const ExperimentReport& r, Method m) {
  const MethodReport* mr = r.find(m);
  if (!mr || !mr->aggregate) throw Error(std::string("no aggregate for ") + std::string(method_name(m)));
  return *mr->aggregate;
}

long total(const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0L); }

void no_shock_approximation(Runs& runs) {
  const auto& r = runs.get("no-shocks", {Method::ols, Method::fe_stint});
  const auto& a = agg(r, Method::ols);
  const double p = max_price_error(a), g = max_gamma_diag_error(a);
  report(p < 1e-3 && g < 1e-3, "no-shock-approximation",
         "OLS max |pi err| " + fmt("%.2e", p) + " < 1e-3, max |diag gamma err| " + fmt("%.2e", g) + " < 1e-3");
}

void saturation_oracle() {
  const TimeFrame frame;
  const auto grouping = AgeGrouping::ten_year_bins();
  ExperimentConfig cfg = builtin_scenario("moderate-shocks");
  const ParameterSet params = cfg.parameters();
  double worst = 0.0, worst_fit = 0.0;
  bool full_rank = true;
  int panels = 0;
  for (int rep = 0; rep < 20; ++rep) {
    SeedConfig seed = cfg.seed_for(rep);
    seed.n_workers = 12 + rep;
    auto panel = flatten(simulate_careers(seed, params, frame, grouping), frame);
    if (panel.diffs.size() > 500) panel.diffs.resize(500);
    const auto est = solve_ols(build_ols_design(panel, frame, grouping, 4));
    const auto cmp = test::saturated_cell_oracle(panel.diffs, frame, grouping, 4, est);
    worst = std::max(worst, cmp.max_coef_diff);
    worst_fit = std::max(worst_fit, cmp.max_fit_diff);
    full_rank = full_rank && cmp.kept_full_rank;
    ++panels;
  }
  report(worst < 1e-10 && worst_fit < 1e-10 && full_rank, "saturation-oracle",
         std::to_string(panels) + " panels <= 500 rows: max |coef - cell-mean oracle| " + fmt("%.2e", worst) +
             ", max fitted diff " + fmt("%.2e", worst_fit) + " (tol 1e-10)");
}

void moderate_ols(Runs& runs) {
  const auto& a = agg(runs.get("moderate-shocks", {Method::ols, Method::iv, Method::fe_stint}), Method::ols);
  int above = 0;
  double lo = 1.0, hi = -1.0;
  for (int g = 0; g < a.n_age_groups; ++g)
    for (int k = 0; k < a.n_occupations; ++k) {
      const double e = a.gamma_mean(g, k, k) - a.gamma_true(g, k, k);
      if (e > 0.0 && e <= 0.01) ++above;
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
  const double mae = price_mae(a);
  report(above >= 10 && mae < 0.01, "moderate-ols-bias",
         std::to_string(above) + "/12 diag cells with excess in (0, 0.01] (need >= 10; range " + fmt("%+.4f", lo) +
             ".." + fmt("%+.4f", hi) + "), price MAE " + fmt("%.4f", mae) + " < 0.01");
}

void moderate_iv(Runs& runs) {
  const auto& a = agg(runs.get("moderate-shocks", {Method::ols, Method::iv, Method::fe_stint}), Method::iv);
  const double e = max_gamma_diag_error(a);
  report(e <= 0.003, "moderate-iv-diagonal", "IV max |diag gamma err| " + fmt("%.4f", e) + " <= 0.003");
}

void dispersed(Runs& runs) {
  const auto& mod = agg(runs.get("moderate-shocks", {Method::ols, Method::iv, Method::fe_stint}), Method::ols);
  const auto& r = runs.get("vlarge-shocks", {Method::ols, Method::iv, Method::fe_stint});
  const double ols = price_mae(agg(r, Method::ols)), iv = price_mae(agg(r, Method::iv));
  report(ols > price_mae(mod) && iv < 0.01, "dispersed-shocks",
         "OLS price MAE " + fmt("%.4f", ols) + " > moderate " + fmt("%.4f", price_mae(mod)) + ", IV price MAE " +
             fmt("%.4f", iv) + " < 0.01");
}

void persistent(Runs& runs) {
  const auto& r = runs.get("persistent-shocks", {Method::ols, Method::iv});
  const double ols = price_mae(agg(r, Method::ols)), iv = price_mae(agg(r, Method::iv));
  report(ols < 0.015 && iv < 0.015, "persistent-shocks",
         "OLS price MAE " + fmt("%.4f", ols) + ", IV price MAE " + fmt("%.4f", iv) + " (both < 0.015)");
}

void switching_costs(Runs& runs) {
  const auto& base = runs.get("moderate-shocks", {Method::ols, Method::iv, Method::fe_stint});
  const auto& sc = runs.get("moderate-switch-costs", {Method::ols});
  bool fewer_each = base.switches.size() == sc.switches.size();
  for (std::size_t i = 0; fewer_each && i < sc.switches.size(); ++i) fewer_each = sc.switches[i] < base.switches[i];
  const double mae0 = price_mae(agg(base, Method::ols)), mae1 = price_mae(agg(sc, Method::ols));
  const double cross0 = gamma_cross_bias(agg(base, Method::ols)), cross1 = gamma_cross_bias(agg(sc, Method::ols));
  report(fewer_each && mae1 <= mae0 && cross1 > cross0, "switching-costs",
         "switches/rep " + fmt("%.0f", double(total(sc.switches)) / sc.switches.size()) + " vs " +
             fmt("%.0f", double(total(base.switches)) / base.switches.size()) +
             (fewer_each ? " (fewer in every rep)" : " (NOT fewer in every rep)") + ", OLS price MAE " +
             fmt("%.4f", mae1) + " <= " + fmt("%.4f", mae0) + ", cross overshoot " + fmt("%+.4f", cross1) + " > " +
             fmt("%+.4f", cross0));
}

void amenities(Runs& runs) {
  const auto& r = runs.get("trends-amenities", {Method::ols, Method::ols_amenity});
  const auto& ols = agg(r, Method::ols);
  const auto& cor = agg(r, Method::ols_amenity);
  const double drift = final_year_error(ols, 0);
  const double mae = price_mae(cor);
  const double slope = psi_slope(cor, 0);
  const bool ok = std::abs(drift) > 0.02 && mae < 0.01 && std::abs(slope - 0.02) <= 0.2 * 0.02;
  report(ok, "amenity-correction",
         "uncorrected final-year error (trending occ.) " + fmt("%+.4f", drift) + " (|.| > 0.02), corrected price MAE " +
             fmt("%.4f", mae) + " < 0.01, amenity slope " + fmt("%.5f", slope) + " in [0.016, 0.024]");
}

void fixed_effects(Runs& runs) {
  const auto& calm = agg(runs.get("no-shocks", {Method::ols, Method::fe_stint}), Method::fe_stint);
  const double p0 = max_price_error(calm), g0 = max_gamma_diag_error(calm);
  const auto& mod = agg(runs.get("moderate-shocks", {Method::ols, Method::iv, Method::fe_stint}), Method::fe_stint);
  const double mae = price_mae(mod);
  const auto& r = runs.get("vlarge-shocks", {Method::ols, Method::iv, Method::fe_stint});
  const auto& fe = agg(r, Method::fe_stint);
  const auto& iv = agg(r, Method::iv);
  int off = 0;
  std::string ratios;
  for (int k = 0; k < fe.n_occupations; ++k) {
    const double ef = std::abs(final_year_error(fe, k)), ei = std::abs(final_year_error(iv, k));
    if (ef >= 2.0 * ei) ++off;
    ratios += (k ? "," : "") + fmt("%.1f", ef / ei);
  }
  report(p0 < 1e-3 && g0 < 1e-3 && mae < 0.015 && off >= 3, "fixed-effects",
         "no shocks: max pi err " + fmt("%.1e", p0) + ", max gamma err " + fmt("%.1e", g0) +
             " (< 1e-3); moderate price MAE " + fmt("%.4f", mae) + " < 0.015; dispersed: " + std::to_string(off) +
             "/4 occupations with |FE final err| >= 2 x IV (ratios " + ratios + ")");
}

std::map<std::string, std::string> csv_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    out[fs::relative(e.path(), root).string()] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return out;
}

void determinism(Runs& runs) {
  ExperimentConfig cfg = builtin_scenario("moderate-shocks", runs.profile);
  cfg.estimators = {Method::ols, Method::iv, Method::fe_stint};
  const fs::path dir = fs::temp_directory_path() / ("roylab_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  std::vector<std::map<std::string, std::string>> files;
  for (int threads : {1, 3}) {
    RunOptions opts;
    opts.threads = threads;
    write_report(dir / std::to_string(threads), run_experiment(cfg, opts));
    files.push_back(csv_bytes(dir / std::to_string(threads)));
  }
  fs::remove_all(dir);
  report(!files[0].empty() && files[0] == files[1], "determinism",
         std::to_string(files[0].size()) + " CSV files from moderate-shocks, 1 vs 3 threads: " +
             (files[0] == files[1] ? "byte-identical" : "DIFFER"));
}

void truncated_normal() {
  struct Case {
    double mu, sigma, upper;
  };
  // bound at the mean uses plain rejection, the others the exponential tail sampler
  const std::vector<Case> cases = {{0.0, 3.0, 0.0}, {0.0, 3.0, -3.0}, {1.0, 2.0, -2.0}};
  bool moments_ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const int n = 1000000;
    Rng rng(101), oracle(202);
    std::normal_distribution<double> norm(c.mu, c.sigma);
    double s1 = 0, s2 = 0, o1 = 0, o2 = 0;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) a[i] = truncated_normal_upper(c.mu, c.sigma, c.upper, rng);
    for (int i = 0; i < n;) {
      const double z = norm(oracle);
      if (z <= c.upper) b[i++] = z;
    }
    for (int i = 0; i < n; ++i) {
      s1 += a[i];
      o1 += b[i];
    }
    s1 /= n;
    o1 /= n;
    double s4 = 0, o4 = 0;
    for (int i = 0; i < n; ++i) {
      const double da = a[i] - s1, db = b[i] - o1;
      s2 += da * da;
      o2 += db * db;
      s4 += da * da * da * da;
      o4 += db * db * db * db;
    }
    s2 /= n - 1;
    o2 /= n - 1;
    s4 /= n;
    o4 /= n;
    const double z_mean = (s1 - o1) / std::sqrt(s2 / n + o2 / n);
    const double z_var = (s2 - o2) / std::sqrt((s4 - s2 * s2) / n + (o4 - o2 * o2) / n);
    moments_ok = moments_ok && std::abs(z_mean) < 3.0 && std::abs(z_var) < 3.0;
    detail += fmt("b=%.0f: ", (c.upper - c.mu) / c.sigma) + fmt("z_mean %+.2f", z_mean) + fmt(" z_var %+.2f; ", z_var);
  }
  long violations = 0;
  Rng rng(303);
  const double bounds[] = {0.5, 0.0, -1.0, -4.0};
  for (long i = 0; i < 10000000; ++i) {
    const double u = bounds[i % 4];
    if (truncated_normal_upper(0.0, 1.0, u, rng) > u) ++violations;
  }
  report(moments_ok && violations == 0, "truncated-normal",
         detail + "bound violations in 1e7 draws: " + std::to_string(violations));
}

}  // namespace

int main(int argc, char** argv) {
  Runs runs;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--paper") == 0) runs.profile = Profile::paper;
    if (std::strncmp(argv[i], "--threads=", 10) == 0) runs.threads = std::atoi(argv[i] + 10);
  }
  const auto t0 = std::chrono::steady_clock::now();
  try {
    no_shock_approximation(runs);
    saturation_oracle();
    moderate_ols(runs);
    moderate_iv(runs);
    dispersed(runs);
    persistent(runs);
    switching_costs(runs);
    amenities(runs);
    fixed_effects(runs);
    determinism(runs);
    truncated_normal();
  } catch (const std::exception& e) {
    std::printf("FAIL  %-28s %s\n", "aborted", e.what());
    return 1;
  }
  std::printf("%d criteria failed (%.0fs)\n", failures,
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return failures == 0 ? 0 : 1;
}
