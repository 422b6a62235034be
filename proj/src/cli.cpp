#include "qkr/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "qkr/classical.hpp"
#include "qkr/floquet.hpp"
#include "qkr/generic_hbar.hpp"
#include "qkr/io.hpp"
#include "qkr/observables.hpp"
#include "qkr/propagator.hpp"
#include "qkr/wannier.hpp"

#ifndef QKR_VERSION
#define QKR_VERSION "0.0.0"
#endif

namespace qkr::cli {

using nlohmann::json;

namespace {

const std::vector<std::string> kCommands = {"spectrum", "deff",    "lengths",   "orbit",
                                            "classical", "generic", "truncated", "compare"};

constexpr int kReducedLimit = 4096;
constexpr int kTruncatedLimit = 10000;

bool uses_resonant_grid(const std::string& c) {
  return c == "spectrum" || c == "deff" || c == "lengths" || c == "orbit" || c == "compare";
}

std::vector<int> np_list(const ExperimentConfig& c) { return c.Np.empty() ? c.Nx : c.Np; }

std::vector<double> deff_labels(const ExperimentConfig& c) {
  if (!c.labels.empty()) return c.labels;
  std::vector<double> out;
  for (int k = 1; k <= 19; ++k) out.push_back(0.05 * k);
  return out;
}

EigenMethod parse_method(const std::string& m) {
  if (m == "auto") return EigenMethod::automatic;
  if (m == "parity") return EigenMethod::parity;
  if (m == "hermitian") return EigenMethod::hermitian;
  if (m == "schur") return EigenMethod::schur;
  throw ConfigError("unknown eigensolver method '" + m + "'");
}

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string tag(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// Runs `fn` and rethrows module failures as ComputeError naming the step.
template <typename Fn>
auto guarded(const char* step, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const ComputeError&) {
    throw;
  } catch (const std::exception& e) {
    throw ComputeError(std::string(step) + ": " + e.what());
  }
}

// Independent jobs on `workers` threads; the first failure is rethrown.
void run_jobs(std::size_t n, int workers, const std::function<void(std::size_t)>& job) {
  const std::size_t threads = std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(workers)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content, std::size_t rows) {
    io::write_atomic(dir_ / name, content);
    std::lock_guard lock(mutex_);
    records_.push_back({name, io::sha256_hex(content), rows});
  }
  void write(const std::string& name, const io::CsvWriter& csv) { write(name, csv.text(), csv.rows()); }

  std::vector<OutputRecord> records() {
    std::lock_guard lock(mutex_);
    auto out = records_;
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.file < b.file; });
    return out;
  }

 private:
  std::filesystem::path dir_;
  std::mutex mutex_;
  std::vector<OutputRecord> records_;
};

struct GridPoint {
  double K;
  int Nx;
  int Np;
};

std::vector<GridPoint> grid_points(const ExperimentConfig& c) {
  std::vector<GridPoint> out;
  const auto nps = np_list(c);
  for (double K : c.K)
    for (std::size_t i = 0; i < c.Nx.size(); ++i) out.push_back({K, c.Nx[i], nps[i]});
  return out;
}

std::string point_suffix(const GridPoint& p, bool single) {
  if (single) return "";
  return "_K" + tag(p.K) + "_Nx" + std::to_string(p.Nx) + "_Np" + std::to_string(p.Np);
}

struct Solved {
  ModelParams params;
  EigenDecomposition eig;
  double unitarity = 0.0;
};

Solved solve(const ExperimentConfig& c, const GridPoint& p) {
  Solved s;
  s.params = ModelParams{p.K, c.M, p.Nx, p.Np, c.theta};
  const FloquetMatrix v = guarded("floquet.build_v", [&] { return build_v(s.params); });
  s.unitarity = unitarity_defect(v.entries);
  s.eig = guarded("floquet.diagonalize", [&] { return diagonalize(v, parse_method(c.method)); });
  return s;
}

io::CsvWriter spectrum_csv(const AreaSpectrum& spec) {
  io::CsvWriter csv({"rank", "label", "area", "quasi_energy", "eigen_index"});
  for (const auto& e : spec.entries) {
    csv.cell(e.rank).cell(e.label).cell(e.area).cell(e.quasi_energy).cell(e.index);
    csv.end_row();
  }
  return csv;
}

json point_json(const Solved& s) {
  return json{{"K", s.params.K},           {"M", s.params.M},
              {"Nx", s.params.Nx},         {"Np", s.params.Np},
              {"N", s.params.dim()},       {"hbar", s.params.hbar()},
              {"unitarity_defect", s.unitarity}, {"max_residual", s.eig.max_residual()}};
}

json run_spectrum(const ExperimentConfig& c, OutputSet& out) {
  const auto points = grid_points(c);
  std::vector<json> rows(points.size());
  run_jobs(points.size(), c.workers, [&](std::size_t i) {
    const Solved s = solve(c, points[i]);
    const AreaSpectrum spec = area_spectrum(s.eig, build_basis(s.params.Nx, s.params.Np), s.params.hbar());
    const std::string name = "area_spectrum" + point_suffix(points[i], points.size() == 1) + ".csv";
    out.write(name, spectrum_csv(spec));
    json r = point_json(s);
    r["file"] = name;
    r["area_ratio_0.9_0.1"] = spec.at_label(0.9).area / spec.at_label(0.1).area;
    r["demarcation"] = demarcation_point(spec, c.threshold);
    rows[i] = r;
  });
  return json{{"points", rows}};
}

json run_deff(const ExperimentConfig& c, OutputSet& out) {
  const auto points = grid_points(c);
  std::vector<AreaSpectrum> spectra(points.size());
  run_jobs(points.size(), c.workers, [&](std::size_t i) {
    const Solved s = solve(c, points[i]);
    spectra[i] = area_spectrum(s.eig, build_basis(s.params.Nx, s.params.Np), s.params.hbar());
  });
  json summary = json::array();
  for (double K : c.K) {
    std::vector<AreaSpectrum> series;
    for (std::size_t i = 0; i < points.size(); ++i)
      if (points[i].K == K) series.push_back(spectra[i]);
    io::CsvWriter csv({"label", "slope", "d_eff", "residual", "points"});
    json fits = json::array();
    for (double label : deff_labels(c)) {
      const DeffResult r = guarded("observables.effective_dimension", [&] { return effective_dimension(series, label); });
      csv.cell(label).cell(r.slope).cell(r.d_eff).cell(r.residual).cell(static_cast<int>(r.points.size()));
      csv.end_row();
      fits.push_back({{"label", label}, {"d_eff", r.d_eff}});
    }
    const std::string name = c.K.size() == 1 ? "deff.csv" : "deff_K" + tag(K) + ".csv";
    out.write(name, csv);
    summary.push_back({{"K", K}, {"file", name}, {"fits", fits}});
  }
  return json{{"series", summary}};
}

io::CsvWriter lengths_csv(const CellLengthMap& map, const std::vector<double>* orbit) {
  std::vector<std::string> header{"X", "P", "length", "label"};
  if (orbit) header.push_back("orbit_area");
  io::CsvWriter csv(header);
  for (int P = 0; P < map.Np; ++P)
    for (int X = 0; X < map.Nx; ++X) {
      const std::size_t cidx = static_cast<std::size_t>(P) * map.Nx + X;
      csv.cell(X).cell(P).cell(map.lengths[cidx]).cell(map.labels[cidx]);
      if (orbit) csv.cell((*orbit)[cidx]);
      csv.end_row();
    }
  return csv;
}

json run_lengths(const ExperimentConfig& c, OutputSet& out, bool with_orbit) {
  const auto points = grid_points(c);
  std::vector<json> rows(points.size());
  run_jobs(points.size(), c.workers, [&](std::size_t i) {
    const Solved s = solve(c, points[i]);
    const WannierBasis basis = build_basis(s.params.Nx, s.params.Np);
    const RMatrix probs = cell_probabilities(s.eig, basis);
    const CellLengthMap map = cell_lengths(probs, s.params.Nx, s.params.Np);
    json r = point_json(s);
    const std::string suffix = point_suffix(points[i], points.size() == 1);
    if (!with_orbit) {
      out.write("cell_lengths" + suffix + ".csv", lengths_csv(map, nullptr));
      rows[i] = r;
      return;
    }
    const std::vector<double> orbit = long_time_area_cells(probs);
    out.write("orbit_area" + suffix + ".csv", lengths_csv(map, &orbit));
    r["spearman_length_orbit"] = spearman(map.lengths, orbit);

    if (c.samples > 0) {
      const auto times = log_spaced_times(100, 10000, c.times);
      const FloquetMatrix v = build_v(s.params);
      std::mt19937_64 rng(c.seed);
      std::uniform_int_distribution<int> pick(0, basis.dim() - 1);
      io::CsvWriter csv({"X", "P", "diagonal", "direct", "relative_difference"});
      double worst = 0.0;
      for (int k = 0; k < c.samples; ++k) {
        const int cell = pick(rng);
        const int X = cell % s.params.Nx, P = cell / s.params.Nx;
        const CVector init = basis.state(X, P);
        const double direct = guarded("observables.long_time_area_direct",
                                      [&] { return long_time_area_direct(init, v, basis, times); });
        const double diag = orbit[static_cast<std::size_t>(cell)];
        const double rel = std::abs(diag - direct) / direct;
        worst = std::max(worst, rel);
        csv.cell(X).cell(P).cell(diag).cell(direct).cell(rel);
        csv.end_row();
      }
      out.write("orbit_direct" + suffix + ".csv", csv);
      r["max_relative_difference"] = worst;
    }
    rows[i] = r;
  });
  return json{{"points", rows}};
}

ClassicalParams classical_params(const ExperimentConfig& c, double K, int Nc) {
  return ClassicalParams{K, Nc, c.n_init, c.n_T, c.seed};
}

io::CsvWriter classical_csv(const ClassicalAreaSpectrum& spec) {
  io::CsvWriter csv({"rank", "label", "area", "x0", "p0"});
  for (const auto& e : spec.entries) {
    csv.cell(e.rank).cell(e.label).cell(e.area).cell(e.start.x).cell(e.start.p);
    csv.end_row();
  }
  return csv;
}

json run_classical(const ExperimentConfig& c, OutputSet& out) {
  std::vector<std::pair<double, int>> jobs;
  for (double K : c.K)
    for (int Nc : c.Nc) jobs.emplace_back(K, Nc);
  std::vector<json> rows(jobs.size());
  run_jobs(jobs.size(), c.workers, [&](std::size_t i) {
    const auto [K, Nc] = jobs[i];
    const auto spec = guarded("classical.classical_area_spectrum",
                              [&] { return classical_area_spectrum(classical_params(c, K, Nc)); });
    const std::string name = "classical_area_K" + tag(K) + "_Nc" + std::to_string(Nc) + ".csv";
    out.write(name, classical_csv(spec));
    const auto areas = spec.areas();
    rows[i] = {{"K", K},
               {"Nc", Nc},
               {"file", name},
               {"demarcation", demarcation_point(areas, static_cast<double>(Nc) * Nc, c.threshold)}};
  });
  json diffusion = json::array();
  for (double K : c.K) {
    const auto d = guarded("classical.diffusion_coefficient",
                           [&] { return diffusion_coefficient(K, c.n_init, std::min<long long>(c.n_T, 10000), c.seed); });
    diffusion.push_back({{"K", K}, {"D_c", d.coefficient}, {"trajectories_used", d.trajectories_used}});
  }
  return json{{"spectra", rows}, {"diffusion", diffusion}};
}

json run_generic(const ExperimentConfig& c, OutputSet& out) {
  const double K = c.K.front();
  const RationalApprox approx = guarded("generic_hbar.rational_sequence", [&] {
    return rational_sequence(c.Nx.front(), c.delta, c.count, c.max_dim);
  });
  std::vector<AreaSpectrum> spectra(approx.terms.size());
  run_jobs(approx.terms.size(), c.workers, [&](std::size_t j) {
    const auto& t = approx.terms[j];
    ModelParams params{K, t.M, approx.Nx, t.Np, 0.0};
    const FloquetMatrix v = guarded("floquet.build_v", [&] { return build_v(params); });
    const EigenDecomposition eig = guarded("floquet.diagonalize", [&] { return diagonalize(v, parse_method(c.method)); });
    spectra[j] = area_spectrum(eig, build_basis(params.Nx, params.Np), params.hbar());
    out.write("area_spectrum_j" + std::to_string(j + 1) + ".csv", spectrum_csv(spectra[j]));
  });

  io::CsvWriter csv({"j", "M", "Np", "N", "hbar", "delta_hbar", "convergent", "area_half", "area_low"});
  for (std::size_t j = 0; j < approx.terms.size(); ++j) {
    const auto& t = approx.terms[j];
    csv.cell(static_cast<int>(j + 1)).cell(t.M).cell(t.Np).cell(approx.Nx * t.Np).cell(t.hbar).cell(t.delta_hbar);
    csv.cell(t.convergent ? 1 : 0).cell(spectra[j].at_label(0.5).area).cell(spectra[j].at_label(0.05).area);
    csv.end_row();
  }
  out.write("sequence.csv", csv);

  double dc = c.diffusion;
  if (dc < 0.0) dc = diffusion_coefficient(K, c.n_init, std::min<long long>(c.n_T, 10000), c.seed).coefficient;
  return json{{"hbar_target", approx.hbar_target},
              {"notes", approx.notes},
              {"D_c", dc},
              {"n_loc", localization_length(dc, approx.hbar_target)}};
}

json run_truncated(const ExperimentConfig& c, OutputSet& out) {
  TruncatedParams p;
  p.K = c.K.front();
  p.Nx = c.Nx.front();
  p.delta = c.delta;
  p.n_cut = c.n_cut;
  p.window_center = c.window_center;
  p.min_inside = c.min_inside;
  p.min_selected = c.min_selected;
  const TruncatedSpectrum t = guarded("generic_hbar.truncated_spectrum", [&] { return truncated_spectrum(p); });

  io::CsvWriter csv({"state", "eigen_abs", "mean_n", "inside_weight", "normalized_area", "shifted_area", "class"});
  for (const auto& s : t.selected) {
    csv.cell(s.index).cell(std::abs(s.eigenvalue)).cell(s.mean_n).cell(s.inside_weight);
    csv.cell(s.area).cell(s.shifted_area).cell(s.cls);
    csv.end_row();
  }
  out.write("truncated.csv", csv);

  if (c.profile) {
    io::CsvWriter prof({"state", "n", "log_prob"});
    for (std::size_t k = 0; k < t.selected.size(); ++k)
      for (int n = t.window_lo; n <= t.window_hi; ++n) {
        const double pr = std::norm(t.states(n - 1, static_cast<Eigen::Index>(k)));
        prof.cell(t.selected[k].index).cell(n).cell(std::log(std::max(pr, 1e-300)));
        prof.end_row();
      }
    out.write("momentum_profile.csv", prof);
  }
  return json{{"hbar", t.hbar},
              {"candidates", t.candidates},
              {"selected", t.selected.size()},
              {"median_small", t.median_small},
              {"median_large", t.median_large},
              {"median_ratio", t.median_ratio()},
              {"max_shift_change", t.max_shift_change()}};
}

json run_compare(const ExperimentConfig& c, OutputSet& out) {
  const auto points = grid_points(c);
  const int Nc = c.Nc.front();
  std::vector<double> quantum(points.size()), classical(points.size());
  run_jobs(points.size(), c.workers, [&](std::size_t i) {
    const Solved s = solve(c, points[i]);
    const AreaSpectrum spec = area_spectrum(s.eig, build_basis(s.params.Nx, s.params.Np), s.params.hbar());
    quantum[i] = demarcation_point(spec, c.threshold);
    const auto cs = guarded("classical.classical_area_spectrum",
                            [&] { return classical_area_spectrum(classical_params(c, points[i].K, Nc)); });
    classical[i] = demarcation_point(cs.areas(), static_cast<double>(Nc) * Nc, c.threshold);
  });
  io::CsvWriter csv({"K", "Nx", "Np", "quantum_lc", "classical_lc"});
  json rows = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    csv.cell(points[i].K).cell(points[i].Nx).cell(points[i].Np).cell(quantum[i]).cell(classical[i]);
    csv.end_row();
    rows.push_back({{"K", points[i].K}, {"quantum_lc", quantum[i]}, {"classical_lc", classical[i]}});
  }
  out.write("compare.csv", csv);
  return json{{"rows", rows}};
}

}  // namespace

json ExperimentConfig::to_json() const {
  return json{{"command", command},
              {"K", K},
              {"Nx", Nx},
              {"Np", Np},
              {"M", M},
              {"theta", theta},
              {"method", method},
              {"labels", labels},
              {"threshold", threshold},
              {"samples", samples},
              {"times", times},
              {"Nc", Nc},
              {"n_init", n_init},
              {"n_T", n_T},
              {"seed", seed},
              {"delta", delta},
              {"count", count},
              {"max_dim", max_dim},
              {"n_cut", n_cut},
              {"window_center", window_center},
              {"min_inside", min_inside},
              {"min_selected", min_selected},
              {"diffusion", diffusion},
              {"profile", profile},
              {"workers", workers},
              {"full_scale", full_scale},
              {"out_dir", out_dir}};
}

namespace {
template <typename T>
void read_list(const json& j, std::vector<T>& dst) {
  dst.clear();
  if (j.is_array()) {
    for (const auto& v : j) dst.push_back(v.get<T>());
  } else {
    dst.push_back(j.get<T>());
  }
}
}  // namespace

void apply_json(ExperimentConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "command") c.command = v.get<std::string>();
      else if (key == "K") read_list(v, c.K);
      else if (key == "Nx") read_list(v, c.Nx);
      else if (key == "Np") read_list(v, c.Np);
      else if (key == "M") c.M = v.get<int>();
      else if (key == "theta") c.theta = v.get<double>();
      else if (key == "method") c.method = v.get<std::string>();
      else if (key == "labels") read_list(v, c.labels);
      else if (key == "threshold") c.threshold = v.get<double>();
      else if (key == "samples") c.samples = v.get<int>();
      else if (key == "times") c.times = v.get<int>();
      else if (key == "Nc") read_list(v, c.Nc);
      else if (key == "n_init") c.n_init = v.get<int>();
      else if (key == "n_T") c.n_T = v.get<long long>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "delta") c.delta = v.get<double>();
      else if (key == "count") c.count = v.get<int>();
      else if (key == "max_dim") c.max_dim = v.get<int>();
      else if (key == "n_cut") c.n_cut = v.get<int>();
      else if (key == "window_center") c.window_center = v.get<int>();
      else if (key == "min_inside") c.min_inside = v.get<double>();
      else if (key == "min_selected") c.min_selected = v.get<int>();
      else if (key == "diffusion") c.diffusion = v.get<double>();
      else if (key == "profile") c.profile = v.get<bool>();
      else if (key == "workers") c.workers = v.get<int>();
      else if (key == "full_scale") c.full_scale = v.get<bool>();
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> v;
  if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end()) {
    v.push_back("unknown command '" + c.command + "'");
    return v;
  }
  if (c.workers < 1) v.push_back("workers must be at least 1");
  if (c.K.empty()) v.push_back("K list is empty");
  for (double K : c.K)
    if (!(K >= 0.0) || !std::isfinite(K)) v.push_back("K must be finite and non-negative");
  if (c.Nx.empty()) v.push_back("Nx list is empty");
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) v.push_back("threshold must lie in (0, 1)");
  try {
    parse_method(c.method);
  } catch (const ConfigError& e) {
    v.push_back(e.what());
  }

  if (uses_resonant_grid(c.command)) {
    if (!c.Np.empty() && c.Np.size() != c.Nx.size()) v.push_back("Np list must match the Nx list in length");
    const auto nps = np_list(c);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < c.Nx.size() && i < nps.size(); ++i) {
      ModelParams p{c.K.empty() ? 0.0 : c.K.front(), c.M, c.Nx[i], nps[i], c.theta};
      for (const auto& msg : p.violations()) {
        std::ostringstream s;
        s << msg << " (Nx=" << c.Nx[i] << ", Np=" << nps[i] << ", M=" << c.M << ")";
        if (seen.insert(s.str()).second) v.push_back(s.str());
      }
      if (!c.full_scale && static_cast<long long>(c.Nx[i]) * nps[i] > kReducedLimit)
        v.push_back("N = " + std::to_string(static_cast<long long>(c.Nx[i]) * nps[i]) +
                    " exceeds 4096 and requires --full-scale");
    }
  }
  if (c.command == "deff") {
    std::set<double> hbars;
    const auto nps = np_list(c);
    for (std::size_t i = 0; i < c.Nx.size() && i < nps.size(); ++i)
      hbars.insert(static_cast<double>(c.M) / (static_cast<double>(c.Nx[i]) * nps[i]));
    if (hbars.size() < 4) v.push_back("deff needs at least 4 distinct hbar values");
    for (double l : c.labels)
      if (!(l > 0.0 && l <= 1.0)) v.push_back("labels must lie in (0, 1]");
  }
  if (c.command == "orbit") {
    if (c.samples < 0) v.push_back("samples must be non-negative");
    if (c.samples > 0 && c.times < 1) v.push_back("times must be at least 1");
  }
  if (c.command == "classical" || c.command == "compare") {
    if (c.Nc.empty()) v.push_back("Nc list is empty");
    for (int Nc : c.Nc) {
      for (const auto& msg : ClassicalParams{1.0, Nc, c.n_init, c.n_T, c.seed}.violations())
        if (std::find(v.begin(), v.end(), msg) == v.end()) v.push_back(msg);
    }
  }
  if (c.command == "generic" || c.command == "truncated") {
    if (c.K.size() != 1) v.push_back(c.command + " takes a single K");
    if (c.Nx.size() != 1) v.push_back(c.command + " takes a single Nx");
    if (!(c.delta >= -1.0 && c.delta < 1.0)) v.push_back("delta must lie in [-1, 1)");
  }
  if (c.command == "generic") {
    if (!c.Nx.empty() && (c.Nx.front() <= 0 || c.Nx.front() % 2)) v.push_back("N must be even: Nx must be even and positive");
    if (c.count < 1) v.push_back("count must be at least 1");
    if (c.max_dim < 2) v.push_back("max_dim must be at least 2");
    if (!c.full_scale && c.max_dim > kReducedLimit * 2)
      v.push_back("max_dim above 8192 requires --full-scale");
    if (c.diffusion < 0.0 && (c.n_init < 1 || c.n_T < 1)) v.push_back("n_init and n_T must be positive to measure D_c");
  }
  if (c.command == "truncated") {
    const int nx = c.Nx.empty() ? 0 : c.Nx.front();
    const long long local = 3LL * nx * nx;
    if (nx <= 0) v.push_back("Nx must be positive");
    if (c.n_cut < 2) v.push_back("n_cut must be at least 2");
    if (!c.full_scale && c.n_cut > kTruncatedLimit)
      v.push_back("n_cut = " + std::to_string(c.n_cut) + " exceeds 10000 and requires --full-scale");
    if (c.window_center - local / 2 < 0 || c.window_center - local / 2 + local + 1 > c.n_cut)
      v.push_back("local Wannier window (3 Nx^2 states around window_center) must fit inside [1, n_cut]");
    if (!(c.min_inside > 0.0 && c.min_inside < 1.0)) v.push_back("min_inside must lie in (0, 1)");
    if (c.min_selected < 1) v.push_back("min_selected must be at least 1");
  }
  return v;
}

double memory_estimate(const ExperimentConfig& c) {
  constexpr double complex_bytes = 16.0;
  double dim = 0.0;
  if (uses_resonant_grid(c.command)) {
    const auto nps = np_list(c);
    for (std::size_t i = 0; i < c.Nx.size() && i < nps.size(); ++i)
      dim = std::max(dim, static_cast<double>(c.Nx[i]) * nps[i]);
    // V, eigenvectors, solver workspace, per worker
    return 4.0 * dim * dim * complex_bytes * std::min<double>(c.workers, static_cast<double>(c.Nx.size() * c.K.size()));
  }
  if (c.command == "generic") return 4.0 * c.max_dim * static_cast<double>(c.max_dim) * complex_bytes;
  if (c.command == "truncated") return 3.0 * c.n_cut * static_cast<double>(c.n_cut) * complex_bytes;
  return 8.0 * c.n_init + 1.0 * (c.Nc.empty() ? 0 : c.Nc.back()) * (c.Nc.empty() ? 0 : c.Nc.back()) * c.workers;
}

json RunManifest::to_json() const {
  json files = json::array();
  for (const auto& o : outputs) files.push_back({{"file", o.file}, {"sha256", o.sha256}, {"rows", o.rows}});
  return json{{"config", config}, {"version", version}, {"started", started},
              {"finished", finished}, {"outputs", files}, {"summary", summary}};
}

RunManifest run(const ExperimentConfig& c) {
  const auto violations = validate(c);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid configuration:";
    for (const auto& v : violations) msg << "\n  - " << v;
    throw ConfigError(msg.str());
  }
  const std::filesystem::path dir = c.out_dir.empty() ? std::filesystem::path("qkr_out") : std::filesystem::path(c.out_dir);

  RunManifest m;
  m.config = c.to_json();
  m.version = QKR_VERSION;
  m.started = now_utc();
  OutputSet out(dir);
  if (c.command == "spectrum") m.summary = run_spectrum(c, out);
  else if (c.command == "deff") m.summary = run_deff(c, out);
  else if (c.command == "lengths") m.summary = run_lengths(c, out, false);
  else if (c.command == "orbit") m.summary = run_lengths(c, out, true);
  else if (c.command == "classical") m.summary = run_classical(c, out);
  else if (c.command == "generic") m.summary = run_generic(c, out);
  else if (c.command == "truncated") m.summary = run_truncated(c, out);
  else if (c.command == "compare") m.summary = run_compare(c, out);

  out.write("summary.json", m.summary.dump(2) + "\n", 0);
  m.outputs = out.records();
  m.finished = now_utc();
  io::write_atomic(dir / "manifest.json", m.to_json().dump(2) + "\n");
  return m;
}

namespace {

struct Flags {
  std::string config_file;
  std::string K, Nx, Np, labels, Nc;
  ExperimentConfig values;
  bool dry_run = false;
};

template <typename T>
std::vector<T> split_list(const std::string& s, const char* what) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw ConfigError(std::string("cannot parse ") + what + " entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string(what) + " list is empty");
  return out;
}

void add_options(CLI::App* app, Flags& f) {
  auto& v = f.values;
  app->add_option("--config", f.config_file, "JSON config; flags override its values");
  app->add_option("--K", f.K, "kick strength(s), comma-separated");
  app->add_option("--Nx", f.Nx, "cells along x, comma-separated");
  app->add_option("--Np", f.Np, "cells along p, comma-separated (default: Nx)");
  app->add_option("--M", v.M, "resonance numerator");
  app->add_option("--theta", v.theta, "Bloch phase");
  app->add_option("--method", v.method, "eigensolver: auto | parity | hermitian | schur");
  app->add_option("--labels", f.labels, "deff sample labels, comma-separated");
  app->add_option("--threshold", v.threshold, "demarcation threshold fraction");
  app->add_option("--samples", v.samples, "orbit: cells checked by explicit evolution");
  app->add_option("--times", v.times, "orbit: number of log-spaced times");
  app->add_option("--Nc", f.Nc, "classical grid sizes, comma-separated");
  app->add_option("--n-init", v.n_init, "classical initial points");
  app->add_option("--n-T", v.n_T, "classical kicks per trajectory");
  app->add_option("--seed", v.seed, "RNG seed");
  app->add_option("--delta", v.delta, "hbar_e = 2 pi / (Nx + delta)^2");
  app->add_option("--count", v.count, "generic: number of approximants");
  app->add_option("--max-dim", v.max_dim, "generic: largest N");
  app->add_option("--n-cut", v.n_cut, "truncated: momentum cutoff");
  app->add_option("--window-center", v.window_center, "truncated: centre of the local Wannier window");
  app->add_option("--min-inside", v.min_inside, "truncated: leakage guard");
  app->add_option("--min-selected", v.min_selected, "truncated: minimum accepted states");
  app->add_option("--diffusion", v.diffusion, "D_c override");
  app->add_flag("--profile", v.profile, "truncated: export momentum profiles");
  app->add_option("--workers", v.workers, "parallel sweep jobs");
  app->add_flag("--full-scale", v.full_scale, "allow N > 4096 / n_cut > 10000");
  app->add_option("--out", v.out_dir, "output directory (default $QKR_OUT_DIR or ./qkr_out)");
  app->add_flag("--dry-run", f.dry_run, "validate only");
}

// Precedence: defaults < $QKR_OUT_DIR < config file < flags.
ExperimentConfig resolve(CLI::App* app, const Flags& f, const std::string& command) {
  ExperimentConfig c;
  if (const char* env = std::getenv("QKR_OUT_DIR")) c.out_dir = env;
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw ConfigError("cannot read config file " + f.config_file);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    apply_json(c, j);
  }
  if (!command.empty()) c.command = command;
  auto given = [&](const char* name) { return app->count(name) > 0; };
  const auto& v = f.values;
  if (given("--K")) c.K = split_list<double>(f.K, "K");
  if (given("--Nx")) c.Nx = split_list<int>(f.Nx, "Nx");
  if (given("--Np")) c.Np = split_list<int>(f.Np, "Np");
  if (given("--labels")) c.labels = split_list<double>(f.labels, "labels");
  if (given("--Nc")) c.Nc = split_list<int>(f.Nc, "Nc");
  if (given("--M")) c.M = v.M;
  if (given("--theta")) c.theta = v.theta;
  if (given("--method")) c.method = v.method;
  if (given("--threshold")) c.threshold = v.threshold;
  if (given("--samples")) c.samples = v.samples;
  if (given("--times")) c.times = v.times;
  if (given("--n-init")) c.n_init = v.n_init;
  if (given("--n-T")) c.n_T = v.n_T;
  if (given("--seed")) c.seed = v.seed;
  if (given("--delta")) c.delta = v.delta;
  if (given("--count")) c.count = v.count;
  if (given("--max-dim")) c.max_dim = v.max_dim;
  if (given("--n-cut")) c.n_cut = v.n_cut;
  if (given("--window-center")) c.window_center = v.window_center;
  if (given("--min-inside")) c.min_inside = v.min_inside;
  if (given("--min-selected")) c.min_selected = v.min_selected;
  if (given("--diffusion")) c.diffusion = v.diffusion;
  if (given("--profile")) c.profile = true;
  if (given("--workers")) c.workers = v.workers;
  if (given("--full-scale")) c.full_scale = true;
  if (given("--out")) c.out_dir = v.out_dir;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wannier-basis analysis of the quantum kicked rotor"};
  app.require_subcommand(1);
  std::vector<std::pair<CLI::App*, std::unique_ptr<Flags>>> subs;
  for (const auto& name : kCommands) {
    auto flags = std::make_unique<Flags>();
    auto* sub = app.add_subcommand(name, "run the " + name + " pipeline");
    add_options(sub, *flags);
    subs.emplace_back(sub, std::move(flags));
  }
  auto vflags = std::make_unique<Flags>();
  std::string target;
  auto* vsub = app.add_subcommand("validate", "check a configuration without computing");
  vsub->add_option("--command", target, "pipeline to validate (default: the config file's)");
  add_options(vsub, *vflags);
  subs.emplace_back(vsub, std::move(vflags));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (auto& [sub, flags] : subs) {
    if (!sub->parsed()) continue;
    const bool validate_only = sub == vsub || flags->dry_run;
    ExperimentConfig config;
    try {
      config = resolve(sub, *flags, sub == vsub ? target : sub->get_name());
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
    if (validate_only) {
      const auto violations = validate(config);
      for (const auto& v : violations) std::cout << v << "\n";
      if (violations.empty()) std::cout << "valid\n";
      return violations.empty() ? 0 : 2;
    }
    if (config.full_scale) {
      std::fprintf(stderr, "memory estimate: %.2f GiB\n", memory_estimate(config) / (1024.0 * 1024.0 * 1024.0));
    }
    try {
      const RunManifest m = run(config);
      for (const auto& o : m.outputs) std::cout << o.file << " " << o.sha256 << "\n";
      return 0;
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "compute error: " << e.what() << "\n";
      return 3;
    }
  }
  return 2;
}

}  // namespace qkr::cli
