// Command-line front end: densities, oracles, calibration and the self-test.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flatcone/acceptance.hpp"
#include "flatcone/error.hpp"
#include "flatcone/geometry.hpp"
#include "flatcone/measure_io.hpp"
#include "flatcone/recurrence.hpp"
#include "flatcone/signature.hpp"
#include "flatcone/version.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace flatcone;

namespace {

constexpr const char* kCacheEnv = "FLATCONE_CACHE_DIR";

struct RunConfig {
  std::string phi = "pi,pi";
  std::string alpha = "pi,pi";
  SolverConfig solver;
  std::string out;
  std::string format = "json";
  std::string cache_dir;
  std::uint64_t seed = 1;
  bool quick = false;
  bool length = false;
  std::size_t samples = 1000000;
  double epsilon = 0.01;
  std::string mesh;
  int i = 0;
  int j = 1;
  bool raw = false;
};

void add_solver_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--grid-cells", cfg.solver.grid_cells, "cells of the area grid");
  cmd->add_option("--beta-nodes", cfg.solver.beta_nodes, "splitting-parameter nodes");
  cmd->add_option("--c0", cfg.solver.calibration_constant, "calibration constant");
  cmd->add_option("--workers", cfg.solver.workers, "worker threads");
  cmd->add_option("--cache-dir", cfg.cache_dir,
                  std::string("density cache directory (default: $") + kCacheEnv + ")");
}

void add_signature_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--phi", cfg.phi, "distinguished angles, e.g. pi,pi or 6pi/5,6pi/5");
  cmd->add_option("--alpha", cfg.alpha, "defects of the other cone points");
}

void add_output_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--out", cfg.out, "output path stem");
  cmd->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

AngleSignature parse_signature(const RunConfig& cfg) {
  const auto phi = parse_angle_list(cfg.phi);
  if (phi.size() != 2) throw Error(ErrorKind::InvalidConfig, "--phi needs exactly two angles");
  return validate_signature(phi[0], phi[1], parse_angle_list(cfg.alpha));
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig solver = cfg.solver;
  if (!cfg.cache_dir.empty()) {
    solver.cache_dir = fs::path(cfg.cache_dir);
  } else if (const char* env = std::getenv(kCacheEnv); env && *env) {
    solver.cache_dir = fs::path(env);
  }
  solver.validate();
  return solver;
}

json provenance(const RunConfig& cfg, const SolverConfig& solver) {
  return {{"code_version", std::string(kCodeVersion)},
          {"c0", solver.calibration_constant},
          {"grid", {{"grid_cells", solver.grid_cells}, {"beta_nodes", solver.beta_nodes}}},
          {"config",
           {{"phi", cfg.phi},
            {"alpha", cfg.alpha},
            {"grid_cells", solver.grid_cells},
            {"beta_nodes", solver.beta_nodes},
            {"grading_ratio", solver.grading_ratio},
            {"c0", solver.calibration_constant},
            {"ode_tolerance", solver.ode_tolerance},
            {"format", cfg.format},
            {"seed", cfg.seed}}}};
}

void write_json(const fs::path& path, const json& doc) { write_text_file(path, doc.dump(2) + "\n"); }

fs::path with_suffix(const std::string& stem, const std::string& suffix) {
  return fs::path(stem + suffix);
}

/// Writes mu as `<stem><tag>.json`, or `<stem><tag>.csv` plus a JSON sidecar.
std::vector<std::string> write_measure(const RunConfig& cfg, const json& prov, const Measure1D& mu,
                                       const std::string& tag, const std::string& header) {
  if (cfg.format == "json") {
    json doc = measure_to_json(mu);
    doc["provenance"] = prov;
    const auto path = with_suffix(cfg.out, tag + ".json");
    write_json(path, doc);
    return {path.string()};
  }
  const auto csv = with_suffix(cfg.out, tag + ".csv");
  const auto sidecar = with_suffix(cfg.out, tag + ".sidecar.json");
  write_text_file(csv, measure_to_csv(mu, header));
  json side = measure_sidecar(mu);
  side["provenance"] = prov;
  write_json(sidecar, side);
  return {csv.string(), sidecar.string()};
}

int cmd_density(const RunConfig& cfg) {
  const AngleSignature sig = parse_signature(cfg);
  const SolverConfig solver = solver_config(cfg);
  const auto f = density(sig, solver);
  json summary = {{"volume", f->total_mass()}};
  if (f->total_mass() > 1e-15) {
    const LengthStats stats = length_stats(*f);
    summary["mean"] = stats.mean;
    summary["median"] = stats.median;
  }
  if (!cfg.out.empty()) {
    const json prov = provenance(cfg, solver);
    json files = write_measure(cfg, prov, *f, ".area", "a,f");
    if (cfg.length) {
      for (auto& p : write_measure(cfg, prov, to_length_density(*f), ".length", "l,rho")) {
        files.push_back(p);
      }
    }
    summary["files"] = files;
  }
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_oracle_torus(const RunConfig& cfg) {
  const SolverConfig solver = solver_config(cfg);
  const SampleBatch batch =
      sample_torus_quotient(cfg.samples, cfg.seed, cfg.epsilon, solver.workers);
  std::vector<double> a;
  a.reserve(batch.samples.size());
  for (const Sample& s : batch.samples) a.push_back(s.a);
  const AngleSignature anchor = validate_signature(kPi, kPi, {kPi, kPi});
  const double ks =
      ks_distance(normalized(*density(anchor, solver)), empirical_measure(std::move(a)));
  // Below 1e5 samples the statistical floor exceeds the threshold.
  constexpr std::size_t kJudged = 100000;
  json summary = {{"ks", ks},
                  {"n", cfg.samples},
                  {"seed", cfg.seed},
                  {"epsilon", cfg.epsilon},
                  {"bias_bound", truncation_bias_bound(cfg.epsilon)},
                  {"threshold", 0.01}};
  summary["pass"] = cfg.samples >= kJudged ? json(ks < 0.01) : json(nullptr);
  if (!cfg.out.empty()) {
    const auto csv = with_suffix(cfg.out, ".csv");
    const auto sidecar = with_suffix(cfg.out, ".sidecar.json");
    write_text_file(csv, samples_to_csv(batch));
    json side = samples_sidecar(batch);
    side["ks"] = ks;
    side["provenance"] = provenance(cfg, solver);
    write_json(sidecar, side);
    summary["files"] = {csv.string(), sidecar.string()};
  }
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_geodesic(const RunConfig& cfg) {
  json doc;
  try {
    doc = json::parse(read_text_file(cfg.mesh));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("mesh is not valid JSON: ") + e.what());
  }
  double distance = 0.0;
  std::string kind;
  if (doc.is_object() && doc.contains("faces")) {
    distance = polyhedron_distance(polyhedron_from_json(doc), cfg.i, cfg.j, !cfg.raw);
    kind = "polyhedron";
  } else {
    distance = doubled_distance(polygon_from_json(doc), cfg.i, cfg.j, !cfg.raw);
    kind = "doubled_polygon";
  }
  std::cout << json{{"distance", distance},
                    {"i", cfg.i},
                    {"j", cfg.j},
                    {"surface", kind},
                    {"unit_area", !cfg.raw}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_calibrate(const RunConfig& cfg) {
  if (cfg.phi != "pi,pi" || cfg.alpha != "pi,pi") {
    const AngleSignature sig = parse_signature(cfg);
    const bool anchor = sig.phi1() == kPi && sig.phi2() == kPi && sig.alpha().size() == 2 &&
                        sig.alpha()[0] == kPi && sig.alpha()[1] == kPi;
    if (!anchor) {
      throw Error(ErrorKind::InvalidConfig, "calibration requires the anchor ((pi,pi),(pi,pi))");
    }
  }
  const SolverConfig solver = solver_config(cfg);
  const CalibrationResult result = calibrate(solver);
  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";
  const bool ok = std::abs(result.c0 - 0.25) < 1e-6;
  json summary = {{"c0", result.c0},
                  {"relative_misfit", result.relative_misfit},
                  {"warnings", result.warnings},
                  {"ok", ok}};
  if (!cfg.out.empty()) {
    json doc = summary;
    doc["provenance"] = provenance(cfg, solver);
    const auto path = with_suffix(cfg.out, ".json");
    write_json(path, doc);
    summary["files"] = {path.string()};
  }
  std::cout << summary.dump() << "\n";
  return ok ? 0 : 1;
}

int cmd_selftest(const RunConfig& cfg) {
  AcceptanceOptions options;
  options.config = solver_config(cfg);
  options.seed = cfg.seed;
  options.quick = cfg.quick;
  const auto results = run_acceptance(options);
  print_acceptance(std::cout, results);
  bool ok = true;
  json rows = json::array();
  for (const CriterionResult& r : results) {
    ok = ok && r.pass;
    rows.push_back({{"criterion", r.id},
                    {"name", r.name},
                    {"expected", r.expected},
                    {"actual", r.actual},
                    {"tolerance", r.tolerance},
                    {"pass", r.pass}});
  }
  if (!cfg.out.empty()) {
    write_json(with_suffix(cfg.out, ".json"),
               {{"criteria", rows}, {"pass", ok}, {"provenance", provenance(cfg, options.config)}});
  }
  return ok ? 0 : 1;
}

void report(std::string_view kind, const std::string& message) {
  std::cerr << json{{"error", std::string(kind)}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Area and length distributions of flat cone spheres"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* density_cmd = app.add_subcommand("density", "density of a = 1/l^2 and its statistics");
  add_signature_flags(density_cmd, cfg);
  add_solver_flags(density_cmd, cfg);
  add_output_flags(density_cmd, cfg);
  density_cmd->add_flag("--length", cfg.length, "also write the density of l");

  auto* torus_cmd = app.add_subcommand("oracle-torus", "torus-quotient Monte Carlo oracle");
  add_solver_flags(torus_cmd, cfg);
  torus_cmd->add_option("--out", cfg.out, "output path stem");
  torus_cmd->add_option("--seed", cfg.seed, "RNG seed");
  torus_cmd->add_option("--samples", cfg.samples, "sample count")->check(CLI::PositiveNumber);
  torus_cmd->add_option("--epsilon", cfg.epsilon, "cusp truncation height");

  auto* geodesic_cmd = app.add_subcommand("geodesic", "distance between two cone points of a mesh");
  geodesic_cmd->add_option("mesh", cfg.mesh, "polyhedron or polygon JSON")->required();
  geodesic_cmd->add_option("i", cfg.i, "first vertex")->required();
  geodesic_cmd->add_option("j", cfg.j, "second vertex")->required();
  geodesic_cmd->add_flag("--raw", cfg.raw, "do not rescale to unit area");

  auto* calibrate_cmd = app.add_subcommand("calibrate", "fit c0 against the closed-form anchor");
  add_signature_flags(calibrate_cmd, cfg);
  add_solver_flags(calibrate_cmd, cfg);
  calibrate_cmd->add_option("--out", cfg.out, "output path stem");

  auto* selftest_cmd = app.add_subcommand("selftest", "run the acceptance battery");
  add_solver_flags(selftest_cmd, cfg);
  selftest_cmd->add_option("--seed", cfg.seed, "RNG seed");
  selftest_cmd->add_flag("--quick", cfg.quick, "only the sub-second criteria");
  selftest_cmd->add_option("--out", cfg.out, "output path stem");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report("InvalidConfig", e.what());
    return 2;
  }

  try {
    if (*density_cmd) return cmd_density(cfg);
    if (*torus_cmd) return cmd_oracle_torus(cfg);
    if (*geodesic_cmd) return cmd_geodesic(cfg);
    if (*calibrate_cmd) return cmd_calibrate(cfg);
    if (*selftest_cmd) return cmd_selftest(cfg);
  } catch (const Error& e) {
    report(to_string(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    report("InternalError", e.what());
    return 1;
  }
  return 1;
}
