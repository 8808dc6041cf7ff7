#include "roylab/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace roylab {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

class CsvReader {
 public:
  CsvReader(const fs::path& path, const std::string& expected_header) : path_(path), in_(path) {
    if (!in_) throw IoError("cannot read " + path.string());
    std::string header;
    if (!std::getline(in_, header)) throw IoError(path.string() + ": empty file");
    strip(header);
    if (header != expected_header)
      throw IoError(path.string() + ": expected header '" + expected_header + "', found '" + header + "'");
  }

  bool next(std::vector<std::string>& fields, std::size_t n_fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      strip(line);
      if (line.empty()) continue;
      fields = split(line);
      if (fields.size() != n_fields)
        fail("expected " + std::to_string(n_fields) + " fields, found " + std::to_string(fields.size()));
      return true;
    }
    return false;
  }

  int to_int(const std::string& s) const {
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail("not an integer: '" + s + "'");
    return v;
  }

  double to_double(const std::string& s) const {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) fail("not a finite number: '" + s + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw IoError(path_.string() + ":" + std::to_string(line_no_ + 1) + ": " + what);
  }

 private:
  static void strip(std::string& s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
  }

  fs::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};


std::string label(const OccupationSet& occupations, int k) {
  if (k >= 0 && k < occupations.size()) return occupations.labels[k];
  return std::to_string(k);
}

void write_flows(const fs::path& path, const FlowMatrix& flows, const OccupationSet& occupations) {
  auto out = open_out(path);
  out << "year_pair,k_from,k_to,count\n";
  const int K = flows.n_occupations;
  const std::string pair =
      flows.year ? std::to_string(*flows.year - 1) + "-" + std::to_string(*flows.year) : "all";
  const bool entrants = flows.direction == FlowDirection::entrants;
  for (int from = 0; from <= K; ++from)
    for (int to = 0; to <= K; ++to) {
      if (from == K && to == K) continue;
      if (entrants && to == K) continue;
      if (!entrants && from == K) continue;
      const std::string a = from == K ? "joiner" : label(occupations, from);
      const std::string b = to == K ? "exiter" : label(occupations, to);
      out << pair << ',' << a << ',' << b << ',' << format_number(flows(from, to)) << '\n';
    }
  finish(out, path);
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  if (x == 0.0) return "0";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

void write_diff_csv(const fs::path& path, const std::vector<DiffRow>& rows) {
  auto out = open_out(path);
  out << "worker_id,year,age,k_prev,k_curr,dlogw\n";
  for (const auto& r : rows)
    out << r.worker_id << ',' << r.year << ',' << r.age << ',' << r.k_prev << ',' << r.k_curr << ','
        << format_number(r.dlogw) << '\n';
  finish(out, path);
}

void write_levels_csv(const fs::path& path, const std::vector<LevelRow>& rows) {
  auto out = open_out(path);
  out << "worker_id,year,k,logw,stint_id,tenure\n";
  for (const auto& r : rows)
    out << r.worker_id << ',' << r.year << ',' << r.k << ',' << format_number(r.logw) << ',' << r.stint_id
        << ',' << r.tenure << '\n';
  finish(out, path);
}

std::vector<DiffRow> read_diff_csv(const fs::path& path) {
  CsvReader in(path, "worker_id,year,age,k_prev,k_curr,dlogw");
  std::vector<DiffRow> rows;
  std::vector<std::string> f;
  while (in.next(f, 6))
    rows.push_back({in.to_int(f[0]), in.to_int(f[1]), in.to_int(f[2]), in.to_int(f[3]), in.to_int(f[4]),
                    in.to_double(f[5])});
  return rows;
}

std::vector<LevelRow> read_levels_csv(const fs::path& path) {
  CsvReader in(path, "worker_id,year,k,logw,stint_id,tenure");
  std::vector<LevelRow> rows;
  std::vector<std::string> f;
  while (in.next(f, 6)) {
    LevelRow r;
    r.worker_id = in.to_int(f[0]);
    r.year = in.to_int(f[1]);
    r.age = -1;
    r.k = in.to_int(f[2]);
    r.logw = in.to_double(f[3]);
    r.stint_id = in.to_int(f[4]);
    r.tenure = in.to_int(f[5]);
    rows.push_back(r);
  }
  return rows;
}

PanelDataset read_panel(const fs::path& diff_path, const std::optional<fs::path>& levels_path, int n_occupations) {
  PanelDataset panel;
  panel.n_occupations = n_occupations;
  panel.diffs = read_diff_csv(diff_path);
  auto by_worker_year = [](const auto& a, const auto& b) {
    return a.worker_id != b.worker_id ? a.worker_id < b.worker_id : a.year < b.year;
  };
  std::stable_sort(panel.diffs.begin(), panel.diffs.end(), by_worker_year);
  attach_lags(panel.diffs);
  if (levels_path) {
    panel.levels = read_levels_csv(*levels_path);
    std::stable_sort(panel.levels.begin(), panel.levels.end(), by_worker_year);
    auto key = [](int worker, int year) {
      return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(worker)) << 32) | static_cast<std::uint32_t>(year);
    };
    std::unordered_map<std::uint64_t, int> age;
    for (const auto& r : panel.diffs) {
      age[key(r.worker_id, r.year - 1)] = r.age;
      age[key(r.worker_id, r.year)] = r.age + 1;
    }
    for (auto& r : panel.levels) {
      const auto it = age.find(key(r.worker_id, r.year));
      r.age = it == age.end() ? -1 : it->second;
    }
  }
  return panel;
}

void write_estimate(const fs::path& dir, const EstimateSet& est, const OccupationSet& occupations,
                    const ParameterSet* truth) {
  const TimeFrame& frame = est.frame;
  const double na = std::nan("");
  {
    const auto path = dir / "prices.csv";
    auto out = open_out(path);
    out << "year,k,dpi,pi_cum,truth_dpi,truth_pi\n";
    for (int year = frame.first_year; year <= frame.last_year; ++year)
      for (int k = 0; k < est.n_occupations; ++k) {
        double tdpi = na, tpi = na;
        if (truth) {
          tpi = truth->prices.at(year, k) - truth->prices.at(frame.base_end, k);
          tdpi = year > frame.first_year ? truth->prices.at(year, k) - truth->prices.at(year - 1, k) : 0.0;
        }
        out << year << ',' << label(occupations, k) << ',' << format_number(est.dpi.at(year, k)) << ','
            << format_number(est.pi_cum.at(year, k)) << ',' << format_number(tdpi) << ',' << format_number(tpi)
            << '\n';
      }
    finish(out, path);
  }
  {
    const auto path = dir / "gammas.csv";
    auto out = open_out(path);
    out << "age_group,k_prev,k_curr,gamma_hat,gamma_true,sigma_gamma\n";
    for (int a = 0; a < est.n_age_groups; ++a)
      for (int from = 0; from < est.n_occupations; ++from)
        for (int to = 0; to < est.n_occupations; ++to)
          out << a << ',' << label(occupations, from) << ',' << label(occupations, to) << ','
              << format_number(est.gamma_hat(a, from, to)) << ','
              << format_number(truth ? truth->gamma(a, from, to) : na) << ",NA\n";
    finish(out, path);
  }
  if (est.has_psi()) {
    const auto path = dir / "psi.csv";
    auto out = open_out(path);
    out << "age_group,year,k,psi_hat,psi_true,sigma_psi\n";
    const auto psi_truth = truth ? amenity_truth(*truth, frame, est.n_age_groups) : std::vector<double>{};
    const int n_analysis = frame.n_analysis_years();
    for (int a = 0; a < est.n_age_groups; ++a)
      for (int i = 0; i < n_analysis; ++i)
        for (int k = 0; k < est.n_occupations; ++k) {
          const std::size_t idx = (static_cast<std::size_t>(a) * n_analysis + i) * est.n_occupations + k;
          out << a << ',' << frame.base_end + 1 + i << ',' << label(occupations, k) << ','
              << format_number(est.psi_hat[idx]) << ',' << format_number(truth ? psi_truth[idx] : na) << ",NA\n";
        }
    finish(out, path);
  }
}

void write_method_report(const fs::path& dir, const MethodReport& report, const OccupationSet& occupations) {
  if (!report.aggregate) return;
  const MCAggregate& agg = *report.aggregate;
  const TimeFrame& frame = agg.frame;
  {
    const auto path = dir / "prices.csv";
    auto out = open_out(path);
    out << "year,k,dpi,pi_cum,truth_dpi,truth_pi,sigma_dpi,sigma_pi\n";
    for (int year = frame.first_year; year <= frame.last_year; ++year)
      for (int k = 0; k < agg.n_occupations; ++k)
        out << year << ',' << label(occupations, k) << ',' << format_number(agg.dpi_mean.at(year, k)) << ','
            << format_number(agg.pi_mean.at(year, k)) << ',' << format_number(agg.truth_dpi.at(year, k)) << ','
            << format_number(agg.truth_pi.at(year, k)) << ',' << format_number(agg.dpi_sd.at(year, k)) << ','
            << format_number(agg.pi_sd.at(year, k)) << '\n';
    finish(out, path);
  }
  {
    const auto path = dir / "gammas.csv";
    auto out = open_out(path);
    out << "age_group,k_prev,k_curr,gamma_hat,gamma_true,sigma_gamma\n";
    for (int a = 0; a < agg.n_age_groups; ++a)
      for (int from = 0; from < agg.n_occupations; ++from)
        for (int to = 0; to < agg.n_occupations; ++to)
          out << a << ',' << label(occupations, from) << ',' << label(occupations, to) << ','
              << format_number(agg.gamma_mean(a, from, to)) << ',' << format_number(agg.gamma_true(a, from, to))
              << ',' << format_number(agg.gamma_sd(a, from, to)) << '\n';
    finish(out, path);
  }
  if (!agg.psi_mean.empty()) {
    const auto path = dir / "psi.csv";
    auto out = open_out(path);
    out << "age_group,year,k,psi_hat,psi_true,sigma_psi\n";
    const int n_analysis = frame.n_analysis_years();
    for (int a = 0; a < agg.n_age_groups; ++a)
      for (int i = 0; i < n_analysis; ++i)
        for (int k = 0; k < agg.n_occupations; ++k) {
          const std::size_t idx = (static_cast<std::size_t>(a) * n_analysis + i) * agg.n_occupations + k;
          out << a << ',' << frame.base_end + 1 + i << ',' << label(occupations, k) << ','
              << format_number(agg.psi_mean[idx]) << ',' << format_number(agg.psi_true[idx]) << ','
              << format_number(agg.psi_sd[idx]) << '\n';
        }
    finish(out, path);
  }
  if (!report.repetitions.empty()) {
    const auto path = dir / "prices_reps.csv";
    auto out = open_out(path);
    out << "rep,year,k,dpi,pi_cum\n";
    for (std::size_t r = 0; r < report.repetitions.size(); ++r) {
      const auto& est = report.repetitions[r];
      for (int year = frame.first_year; year <= frame.last_year; ++year)
        for (int k = 0; k < est.n_occupations; ++k)
          out << report.repetition_index[r] << ',' << year << ',' << label(occupations, k) << ','
              << format_number(est.dpi.at(year, k)) << ',' << format_number(est.pi_cum.at(year, k)) << '\n';
    }
    finish(out, path);
  }
}

void write_descriptives(const fs::path& dir, const DescriptivePanels& panels, const OccupationSet& occupations) {
  write_flows(dir / "flows_entrants.csv", panels.entrants, occupations);
  write_flows(dir / "flows_leavers.csv", panels.leavers, occupations);
  {
    const auto path = dir / "wage_growth_hist.csv";
    auto out = open_out(path);
    out << "bin_lo,bin_hi,count\n";
    const auto& h = panels.growth_hist;
    for (int i = 0; i < static_cast<int>(h.counts.size()); ++i)
      out << format_number(h.bin_lo(i)) << ',' << format_number(h.bin_hi(i)) << ',' << format_number(h.counts[i])
          << '\n';
    finish(out, path);
  }
  {
    const auto path = dir / "wage_quantiles.csv";
    auto out = open_out(path);
    out << "year,prob,value\n";
    for (const auto& q : panels.quantiles)
      out << q.year << ',' << format_number(q.prob) << ',' << format_number(q.value) << '\n';
    finish(out, path);
  }
}

fs::path write_report(const fs::path& out, const ExperimentReport& report) {
  const auto& cfg = report.config;
  const fs::path root = out / cfg.scenario;
  nlohmann::json methods = nlohmann::json::object();
  for (const auto& m : report.methods) {
    const std::string name(method_name(m.method));
    write_method_report(root / name, m, cfg.occupations);
    nlohmann::json j;
    j["successes"] = m.repetition_index.size();
    j["failures"] = m.failures;
    if (m.aggregate) {
      const auto& agg = *m.aggregate;
      auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
      j["price_mae"] = num(price_mae(agg));
      j["max_price_error"] = num(max_price_error(agg));
      nlohmann::json final_err = nlohmann::json::object();
      for (int k = 0; k < agg.n_occupations; ++k) final_err[cfg.occupations.labels[k]] = num(final_year_error(agg, k));
      j["final_year_error"] = final_err;
      j["gamma_diag_mad"] = num(gamma_diag_mad(agg));
      j["max_gamma_diag_error"] = num(max_gamma_diag_error(agg));
      j["gamma_cross_bias"] = num(gamma_cross_bias(agg));
      if (!agg.psi_mean.empty()) {
        nlohmann::json slopes = nlohmann::json::object();
        for (int k = 0; k < agg.n_occupations; ++k) slopes[cfg.occupations.labels[k]] = num(psi_slope(agg, k));
        j["psi_slope"] = slopes;
      }
    }
    methods[name] = j;
  }
  write_descriptives(root / "descriptives", report.descriptives, cfg.occupations);

  nlohmann::json j;
  j["config"] = nlohmann::json::parse(config_to_json(cfg));
  j["estimators"] = methods;
  j["switches"] = report.switches;
  j["observations"] = report.observations;
  j["wage_growth"] = {{"mean", report.descriptives.growth.mean}, {"sd", report.descriptives.growth.sd}};
  j["wall_seconds"] = report.wall_seconds;
  const auto path = root / "report.json";
  auto o = open_out(path);
  o << j.dump(2) << '\n';
  finish(o, path);
  return root;
}

}  // namespace roylab
