// vstates -- command-line driver.
//
// Subcommands:
//   trace    run (or resume) a continuation run from a config file
//   audit    re-run the verification audits over a persisted run
//   field    evaluate the stream-function field of one persisted record
//   oracle   print closed-form reference numbers
//
// Exit codes: 0 success (including a branch that stopped early but produced
// records), 1 audit failures, 2 configuration/input errors, 3 numerical
// failure before the first record.

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vstates/errors.hpp"
#include "vstates/field.hpp"
#include "vstates/io.hpp"
#include "vstates/oracle.hpp"
#include "vstates/solver.hpp"
#include "vstates/verify.hpp"

namespace fs = std::filesystem;
using namespace vstates;

namespace {

int cmd_trace(const std::string& config_path, bool resume,
              const std::optional<unsigned>& workers,
              const std::optional<std::string>& out_dir, bool plots) {
  io::RunConfig cfg = io::parse_config_file(config_path);
  if (workers) cfg.workers = *workers;
  if (out_dir) cfg.out_dir = *out_dir;
  if (plots) cfg.plots = true;
  return io::run(cfg, config_path, resume);
}

BranchConfig branch_config_for(const fs::path& out_dir, int m, int modes) {
  // Prefer the run's own persisted configuration; otherwise reconstruct the
  // essentials from the records themselves.
  const fs::path cfg_file = out_dir / "config.txt";
  if (fs::exists(cfg_file)) {
    return io::parse_config_file(cfg_file).branch;
  }
  BranchConfig cfg;
  cfg.m = m;
  cfg.modes = modes;
  return cfg;
}

int cmd_audit(const std::string& out_dir, int every, bool write) {
  int m = 0, N = 0;
  const auto records = io::load_records(out_dir, &m, &N);
  if (records.empty()) {
    std::fprintf(stderr, "no records found in %s\n", out_dir.c_str());
    return 2;
  }
  BranchConfig cfg = branch_config_for(
      out_dir, m, static_cast<int>(records.front().coeffs.a.size()));
  cfg.grid = N;
  const AuditReport report = run_audit(records, cfg, every);
  for (const auto& e : report.entries) {
    std::printf("%s %s: %s\n", e.pass ? "PASS" : "FAIL", e.name.c_str(),
                e.detail.c_str());
  }
  std::printf("%s\n", report.all_pass() ? "ALL PASS" : "FAILURES PRESENT");
  if (write) {
    std::ofstream f(fs::path(out_dir) / "audit.txt",
                    std::ios::binary | std::ios::trunc);
    for (const auto& e : report.entries) {
      f << (e.pass ? "PASS " : "FAIL ") << e.name << ": " << e.detail << '\n';
    }
    f << (report.all_pass() ? "ALL PASS" : "FAILURES PRESENT") << '\n';
  }
  return report.all_pass() ? 0 : 1;
}

int cmd_field(const std::string& out_dir, int step,
              const std::optional<std::string>& svg_path,
              const std::optional<std::string>& csv_path, int nr, int ntheta,
              double r_scale) {
  int m = 0, N = 0;
  const auto records = io::load_records(out_dir, &m, &N);
  if (records.empty()) {
    std::fprintf(stderr, "no records found in %s\n", out_dir.c_str());
    return 2;
  }
  if (step < 0) step = records.back().step;
  if (step >= static_cast<int>(records.size())) {
    std::fprintf(stderr, "step %d not present (run has %zu records)\n", step,
                 records.size());
    return 2;
  }
  const auto& rec = records[static_cast<std::size_t>(step)];
  const GridTrace trace = synthesize(rec.coeffs, N);
  const TraceField field(trace, rec.omega);

  std::printf("step %d: omega = %.17g, max radius = %.12g\n", rec.step,
              rec.omega, field.max_radius());
  for (const auto& cp : find_critical_points(trace, rec.omega)) {
    std::printf(
        "critical point: %s at r = %.12g, theta = %.12g (distance to "
        "boundary %.12g, det %.6g, Psi %.12g)\n",
        to_string(cp.kind), cp.r, cp.theta, cp.distance_to_boundary,
        cp.hessian_det, cp.psi_value);
  }
  std::printf("corotation radius on the symmetry ray: %.12g\n",
              field.rc_radius(0.0));

  if (svg_path) {
    std::ofstream f(*svg_path, std::ios::binary | std::ios::trunc);
    f << io::render_svg(trace, rec.omega);
    std::printf("wrote %s\n", svg_path->c_str());
  }
  if (csv_path) {
    double r_max = field.max_radius() * r_scale;
    const FieldGrid grid = sample_field(trace, rec.omega, nr, ntheta, r_max);
    std::ofstream f(*csv_path, std::ios::binary | std::ios::trunc);
    f << "r,theta,psi,psi_r,psi_theta,inside,near_boundary\n";
    for (int ir = 0; ir < grid.nr; ++ir) {
      for (int jt = 0; jt < grid.ntheta; ++jt) {
        const std::size_t idx =
            static_cast<std::size_t>(ir) * grid.ntheta + jt;
        f << grid.r[ir] << ',' << grid.theta[jt] << ','
          << grid.at(grid.psi, ir, jt) << ',' << grid.at(grid.psi_r, ir, jt)
          << ',' << grid.at(grid.psi_theta, ir, jt) << ','
          << int(grid.inside[idx]) << ',' << int(grid.near_boundary[idx])
          << '\n';
      }
    }
    std::printf("wrote %s\n", csv_path->c_str());
  }
  return 0;
}

int cmd_oracle(const std::optional<int>& critical_m,
               const std::optional<double>& ellipse_c,
               const std::optional<double>& disk_omega) {
  bool printed = false;
  if (critical_m) {
    const int m = *critical_m;
    std::printf("bifurcation rotation numbers for %d-fold symmetry:\n", m);
    for (int k = 1; k <= 6; ++k) {
      std::printf("  Omega_{%d} = (%d - 1)/(2 * %d) = %.17g\n", k * m, k * m,
                  k * m, critical_omega(k * m));
    }
    printed = true;
  }
  if (ellipse_c) {
    const double c = *ellipse_c;
    std::printf("ellipse with trace w + %.12g/w:\n", c);
    std::printf("  semi-axes: %.12g, %.12g\n", 1.0 + c, 1.0 - c);
    std::printf("  rotation number (1 - c^2)/4 = %.17g\n",
                oracle::ellipse_omega(c));
    const std::complex<double> g =
        oracle::ellipse_dzpsi_boundary(c, {1.0, 0.0});
    std::printf("  boundary dpsi/dz at w = 1: %.17g%+.17gi\n", g.real(),
                g.imag());
    printed = true;
  }
  if (disk_omega) {
    const double om = *disk_omega;
    std::printf("unit disk at Omega = %.12g:\n", om);
    std::printf("  boundary dPsi/dr = 1/2 - Omega = %.17g\n", 0.5 - om);
    if (om > 0.0 && om < 0.5) {
      const double rc = 1.0 / std::sqrt(2.0 * om);
      std::printf("  corotation radius 1/sqrt(2 Omega) = %.17g\n", rc);
      std::printf("  corotation distance to the boundary = %.17g\n", rc - 1.0);
    }
    printed = true;
  }
  if (!printed) {
    std::printf("reference rotation numbers Omega_m = (m - 1)/(2 m):\n");
    for (int m = 2; m <= 6; ++m) {
      std::printf("  m = %d: %.17g\n", m, critical_omega(m));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "vstates: uniformly rotating vortex patches by spectral "
      "boundary-integral continuation"};
  app.require_subcommand(1);

  // trace
  auto* trace_cmd =
      app.add_subcommand("trace", "run or resume a continuation run");
  std::string config_path;
  bool resume = false, plots = false;
  std::optional<unsigned> workers;
  std::optional<std::string> out_override;
  trace_cmd->add_option("--config", config_path, "config file (key = value)")
      ->required()
      ->check(CLI::ExistingFile);
  trace_cmd->add_flag("--resume", resume,
                      "continue from records already in the output directory");
  trace_cmd->add_option("--workers", workers, "worker thread cap");
  trace_cmd->add_option("--out", out_override,
                        "output directory (overrides the config)");
  trace_cmd->add_flag("--plots", plots, "write SVG plots (overrides config)");

  // audit
  auto* audit_cmd =
      app.add_subcommand("audit", "re-run verification audits over a run");
  std::string audit_dir;
  int audit_every = 1;
  bool audit_write = false;
  audit_cmd->add_option("--out", audit_dir, "output directory of the run")
      ->required()
      ->check(CLI::ExistingDirectory);
  audit_cmd->add_option("--every", audit_every,
                        "audit every k-th record (default 1)");
  audit_cmd->add_flag("--write", audit_write,
                      "also rewrite audit.txt in the run directory");

  // field
  auto* field_cmd = app.add_subcommand(
      "field", "evaluate the stream-function field of one record");
  std::string field_dir;
  int field_step = -1, field_nr = 96, field_ntheta = 96;
  double field_scale = 2.0;
  std::optional<std::string> svg_path, csv_path;
  field_cmd->add_option("--out", field_dir, "output directory of the run")
      ->required()
      ->check(CLI::ExistingDirectory);
  field_cmd->add_option("--step", field_step,
                        "record index (default: the last record)");
  field_cmd->add_option("--svg", svg_path, "write an SVG picture here");
  field_cmd->add_option("--csv", csv_path, "write a polar field grid here");
  field_cmd->add_option("--nr", field_nr, "radial grid points for --csv");
  field_cmd->add_option("--ntheta", field_ntheta,
                        "angular grid points for --csv");
  field_cmd->add_option("--scale", field_scale,
                        "grid extent as a multiple of the patch radius");

  // oracle
  auto* oracle_cmd = app.add_subcommand(
      "oracle", "print closed-form reference numbers");
  std::optional<int> critical_m;
  std::optional<double> ellipse_c, disk_omega;
  oracle_cmd->add_option("--critical", critical_m,
                         "bifurcation rotation numbers for this symmetry");
  oracle_cmd->add_option("--ellipse", ellipse_c,
                         "rotating-ellipse data for trace w + c/w");
  oracle_cmd->add_option("--disk", disk_omega,
                         "unit-disk data at this rotation number");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*trace_cmd) {
      return cmd_trace(config_path, resume, workers, out_override, plots);
    }
    if (*audit_cmd) {
      return cmd_audit(audit_dir, audit_every, audit_write);
    }
    if (*field_cmd) {
      return cmd_field(field_dir, field_step, svg_path, csv_path, field_nr,
                       field_ntheta, field_scale);
    }
    if (*oracle_cmd) {
      return cmd_oracle(critical_m, ellipse_c, disk_omega);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const SchemaMismatchError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
