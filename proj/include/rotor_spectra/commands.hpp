#pragma once

#include <cstdio>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rotor_spectra/config.hpp"
#include "rotor_spectra/io.hpp"
#include "rotor_spectra/oracle.hpp"
#include "rotor_spectra/response.hpp"
#include "rotor_spectra/simulate.hpp"
#include "rotor_spectra/spectra.hpp"
#include "rotor_spectra/zero_noise.hpp"

#ifndef ROTOR_SPECTRA_VERSION
#define ROTOR_SPECTRA_VERSION "0.0.0"
#endif

namespace rotor::cli {

namespace fs = std::filesystem;

/// Exit codes shared by every command.
enum Exit : int { Ok = 0, Failed = 1, BadConfig = 2 };

inline int exit_code_for(const Error& e) { return e.code() == ErrorCode::Config ? BadConfig : Failed; }

/// Collects written files and notes, then records them next to the outputs.
class Run {
 public:
  Run(std::string command, const RunConfig& cfg, fs::path out) : command_(std::move(command)), cfg_(cfg), out_(std::move(out)) {
    fs::create_directories(out_);
  }

  std::ofstream file(const std::string& name) {
    files_.push_back(name);
    return io::open(out_ / name);
  }
  void note(const std::string& text) { notes_.push_back(text); }
  const fs::path& dir() const { return out_; }

  void write_manifest(int exit_code) const {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg_.source_text)));
    nlohmann::json m;
    m["command"] = command_;
    m["version"] = ROTOR_SPECTRA_VERSION;
    m["config_hash"] = std::string(hash);
    m["seed"] = cfg_.seed;
    m["ks"] = cfg_.ks;
    m["epsilons"] = cfg_.epsilons;
    m["delta"] = cfg_.delta;
    m["bins"] = cfg_.bins;
    m["tol"] = cfg_.tol;
    m["x_res"] = cfg_.x_res;
    m["files"] = files_;
    m["notes"] = notes_;
    m["exit_code"] = exit_code;
    std::ofstream(out_ / "manifest.json") << m.dump(2) << '\n';
  }

 private:
  std::string command_;
  const RunConfig& cfg_;
  fs::path out_;
  std::vector<std::string> files_;
  std::vector<std::string> notes_;
};

inline std::string ktag(long k) { return "k" + std::to_string(k); }

inline int cmd_validate(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  Run run("validate", cfg, out);
  const BandModel model = cfg.model();
  const NoiseGenerator gen = cfg.noise();
  const auto r = validate_admissibility(gen, model, cfg.tol);
  nlohmann::json j;
  j["N"] = model.fibres();
  j["S"] = model.bands();
  j["row_sum_defect"] = r.row_sum_defect;
  j["symmetry_defect"] = r.symmetry_defect;
  j["min_offdiag"] = r.min_offdiag;
  j["min_eigen_gap_full"] = r.min_eigen_gap_full;
  j["min_eigen_gap_blocks"] = r.min_eigen_gap_blocks;
  j["eps_max"] = r.eps_max;
  j["tol"] = r.tol;
  j["item1_symmetric_stochastic"] = r.item1;
  j["item2_simple_spectrum"] = r.item2;
  j["item3_simple_blocks"] = r.item3;
  j["pass"] = r.pass();
  run.file("validate.json") << j.dump(2) << '\n';
  log << "N=" << model.fibres() << " S=" << model.bands() << '\n'
      << "  item 1 (symmetric, off-diagonal >= 0, zero row sums): " << (r.item1 ? "pass" : "FAIL")
      << "  [row sum " << r.row_sum_defect << ", symmetry " << r.symmetry_defect << ", min off-diagonal "
      << r.min_offdiag << "]\n"
      << "  item 2 (N distinct eigenvalues): " << (r.item2 ? "pass" : "FAIL") << "  [min gap "
      << r.min_eigen_gap_full << "]\n"
      << "  item 3 (distinct eigenvalues per band block): " << (r.item3 ? "pass" : "FAIL") << "  [min gap "
      << r.min_eigen_gap_blocks << "]\n"
      << "  eps_max = " << r.eps_max << '\n'
      << (r.pass() ? "admissible" : "NOT admissible") << '\n';
  const int code = r.pass() ? Ok : Failed;
  run.write_manifest(code);
  return code;
}

/// Labelled spectra per (k, eps); labelling failures are reported per pair
/// and the sweep continues.
inline int cmd_spectrum(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  Run run("spectrum", cfg, out);
  const BandModel model = cfg.model();
  const NoiseGenerator gen = cfg.noise();
  {
    auto f = run.file("unit_circle.csv");
    io::write_unit_circle(f);
  }
  int failures = 0;
  for (long k : cfg.ks)
    for (double eps : cfg.epsilons) {
      const std::string stem = ktag(k) + "_eps" + io::tag(eps);
      try {
        auto spec = labelled_spectrum<double>(model, gen, k, eps);
        apply_delta_factor(spec, cfg.delta);
        auto f1 = run.file("spectrum_" + stem + ".csv");
        io::write_spectrum(f1, spec);
        auto f2 = run.file("eigenvectors_" + stem + ".csv");
        io::write_eigenvectors(f2, spec);
        auto f3 = run.file("gershgorin_" + stem + ".csv");
        io::write_gershgorin_circles(f3, spec, model);
        log << "k=" << k << " eps=" << eps << ": " << spec.size() << " eigenvalues, max distance to target "
            << spec.assignment_cost * std::abs(spec.factor) << ", radius " << spec.gersh_radius << '\n';
      } catch (const Error& e) {
        if (e.code() != ErrorCode::AmbiguousLabelling) throw;
        ++failures;
        run.note(stem + ": " + e.what());
        log << "k=" << k << " eps=" << eps << ": " << e.what() << '\n';
      }
    }
  const int code = failures ? Failed : Ok;
  run.write_manifest(code);
  return code;
}

inline int cmd_limit(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  Run run("limit", cfg, out);
  const BandModel model = cfg.model();
  const NoiseGenerator gen = cfg.noise();
  for (long k : cfg.ks) {
    const LimitBasis basis = limit_basis(model, gen, k);
    auto f1 = run.file("limit_" + ktag(k) + ".csv");
    io::write_limit(f1, basis);
    std::vector<double> grid;
    for (double e : cfg.epsilons)
      if (e > 0) grid.push_back(e);
    const auto rows = convergence_study(model, gen, k, grid);
    auto f2 = run.file("convergence_" + ktag(k) + ".csv");
    io::write_convergence(f2, rows);
    double worst = 0;
    for (const auto& r : rows) worst = std::max(worst, r.proj_distance);
    log << "k=" << k << ": limit basis of " << basis.size() << " vectors"
        << (basis.whole_generator ? " (whole generator)" : "") << ", max projective distance over eps grid "
        << worst << '\n';
  }
  run.write_manifest(Ok);
  return Ok;
}

inline std::vector<double> response_grid() { return {1e-2, 1e-3, 1e-4, 1e-5}; }

inline int cmd_response(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  Run run("response", cfg, out);
  const BandModel model = cfg.model();
  const NoiseGenerator gen = cfg.noise();
  for (long k : cfg.ks) {
    const ResponseData data = compute_response(model, gen, k);
    auto f1 = run.file("response_" + ktag(k) + ".csv");
    io::write_response(f1, data);
    auto f2 = run.file("fhat_" + ktag(k) + ".csv");
    io::write_fhat(f2, data);
    std::vector<OrderCheck> checks(data.size());
    parallel_for(data.size(), [&](std::size_t ell) {
      checks[ell] = order_check(model, gen, k, static_cast<int>(ell), response_grid());
    });
    auto f3 = run.file("order_" + ktag(k) + ".csv");
    io::write_order_checks(f3, checks);
    double min_s1 = 1e300, min_s2 = 1e300;
    for (const auto& c : checks) {
      min_s1 = std::min(min_s1, c.slope_1);
      min_s2 = std::min(min_s2, c.slope_2);
    }
    log << "k=" << k << ": " << data.size() << " labels" << (data.exact ? " (first order exact)" : "")
        << ", smallest slopes r1=" << min_s1 << " r2=" << min_s2 << '\n';
  }
  run.write_manifest(Ok);
  return Ok;
}

inline int cmd_oracle(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  Run run("oracle", cfg, out);
  const BandModel model = cfg.model();
  const NoiseGenerator gen = cfg.noise();
  for (long k : cfg.ks) {
    const auto rep = oracle_crosscheck(model, gen, k, cfg.tol);
    auto f = run.file("oracle_" + ktag(k) + ".csv");
    io::write_oracle(f, rep);
    if (rep.fallback) run.note(ktag(k) + ": whole-generator case solved numerically");
    log << "k=" << k << ": " << rep.rows.size() << " pairs, max eigenvalue difference " << rep.max_abs_diff
        << ", max projective distance " << rep.max_vec_dist << (rep.fallback ? " (numeric fallback)" : "") << '\n';
  }
  run.write_manifest(Ok);
  return Ok;
}

inline int cmd_simulate(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  Run run("simulate", cfg, out);
  const BandModel model = cfg.model();
  const NoiseGenerator gen = cfg.noise();
  const double eps = cfg.epsilons.empty() ? 0.0 : cfg.epsilons.front();
  const TrajectoryBatch batch = simulate(model, gen, eps, cfg.delta, cfg.paths, cfg.steps, cfg.seed);
  {
    auto f = run.file("trajectories.csv");
    io::write_trajectories(f, batch);
  }
  const UlamOperator analytic = ulam_analytic(model, gen, eps, cfg.delta, cfg.bins);
  const CycleReport ra = detect_cycles(analytic, model, cfg.top_m);
  {
    auto f = run.file("cycles_analytic.csv");
    io::write_cycles(f, ra, model.bands());
  }
  log << "analytic Ulam (" << analytic.size() << " cells):\n";
  for (const auto& c : ra.cycles)
    log << "  |lambda|=" << c.magnitude << " arg=" << c.arg << " period=" << c.period_steps << " band "
        << c.band + 1 << " (mass " << c.band_masses[static_cast<std::size_t>(c.band)] << ")\n";
  try {
    const UlamOperator empirical = ulam_empirical(batch, cfg.bins);
    const CycleReport re = detect_cycles(empirical, model, cfg.top_m);
    auto f = run.file("cycles_empirical.csv");
    io::write_cycles(f, re, model.bands());
    const auto tv = row_tv_distance(analytic, empirical);
    double mean = 0;
    for (double v : tv) mean += v;
    mean /= static_cast<double>(tv.size());
    log << "empirical Ulam: mean row TV distance to analytic " << mean << ", " << empirical.self_loop_rows.size()
        << " unvisited cells\n";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientData && e.code() != ErrorCode::NoComplexEigenvalues) throw;
    run.note(std::string("empirical Ulam skipped: ") + e.what());
    log << "empirical Ulam skipped: " << e.what() << '\n';
  }
  run.write_manifest(Ok);
  return Ok;
}

/// Spectrum at eps = delta, limit basis, response tables and eigenfunction
/// grids for every k in the config.
inline int cmd_casestudy(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  Run run("casestudy", cfg, out);
  const BandModel model = cfg.model();
  const NoiseGenerator gen = cfg.noise();
  const double eps = cfg.epsilons.empty() ? cfg.delta : cfg.epsilons.front();
  {
    auto f = run.file("unit_circle.csv");
    io::write_unit_circle(f);
  }
  for (long k : cfg.ks) {
    auto spec = labelled_spectrum<double>(model, gen, k, eps);
    apply_delta_factor(spec, cfg.delta);
    const std::string stem = ktag(k) + "_eps" + io::tag(eps);
    auto f1 = run.file("spectrum_" + stem + ".csv");
    io::write_spectrum(f1, spec);
    auto f2 = run.file("eigenvectors_" + stem + ".csv");
    io::write_eigenvectors(f2, spec);
    auto f3 = run.file("gershgorin_" + stem + ".csv");
    io::write_gershgorin_circles(f3, spec, model);
    auto f4 = run.file("eigenfunctions_" + stem + ".csv");
    io::write_eigenfunction_grid(f4, spec, cfg.x_res);

    const LimitBasis basis = limit_basis(model, gen, k);
    auto f5 = run.file("limit_" + ktag(k) + ".csv");
    io::write_limit(f5, basis);
    const ResponseData data = compute_response(model, gen, k);
    auto f6 = run.file("response_" + ktag(k) + ".csv");
    io::write_response(f6, data);
    auto f7 = run.file("fhat_" + ktag(k) + ".csv");
    io::write_fhat(f7, data);
    log << "k=" << k << ": spectrum at eps=" << eps << " delta=" << cfg.delta << " (factor " << spec.factor
        << "), limit basis, response tables, " << cfg.x_res << "-point eigenfunction grid\n";
  }
  run.write_manifest(Ok);
  return Ok;
}

}  // namespace rotor::cli
