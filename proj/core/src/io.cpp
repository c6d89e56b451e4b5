#include "vstates/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>

#include <json.hpp>

#include "vstates/errors.hpp"
#include "vstates/field.hpp"
#include "vstates/parallel.hpp"
#include "vstates/verify.hpp"

namespace vstates::io {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Shortest decimal that round-trips to the same bits.
std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// 17 significant digits: also round-trips, but with a fixed width so omega
// columns align across rows.
std::string fmt_double17(double v) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void config_fail(const std::string& origin, int line,
                              const std::string& what) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

long parse_long(const std::string& origin, int line, std::string_view key,
                std::string_view value) {
  long out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(),
                                   out);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    config_fail(origin, line,
                "value of '" + std::string(key) + "' is not an integer: '" +
                    std::string(value) + "'");
  }
  return out;
}

double parse_double(const std::string& origin, int line, std::string_view key,
                    std::string_view value) {
  double out = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(),
                                   out);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    config_fail(origin, line,
                "value of '" + std::string(key) + "' is not a number: '" +
                    std::string(value) + "'");
  }
  return out;
}

bool parse_bool(const std::string& origin, int line, std::string_view key,
                std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no" || value == "off") {
    return false;
  }
  config_fail(origin, line,
              "value of '" + std::string(key) + "' is not a boolean: '" +
                  std::string(value) + "'");
}

void require(bool ok, const std::string& origin, int line,
             const std::string& what) {
  if (!ok) config_fail(origin, line, what);
}

ordered_json metrics_json(const HealthMetrics& h) {
  ordered_json j;
  j["minA"] = h.minA;
  j["sizeInv"] = h.sizeInv;
  j["angleMargin"] = h.angleMargin;
  j["minDphi"] = h.minDphi;
  j["minPhi"] = h.minPhi;
  j["maxPhi"] = h.maxPhi;
  j["minPsiR"] = h.minPsiR;
  return j;
}

HealthMetrics metrics_from_json(const ordered_json& j) {
  HealthMetrics h{};
  h.minA = j.at("minA").get<double>();
  h.sizeInv = j.at("sizeInv").get<double>();
  h.angleMargin = j.at("angleMargin").get<double>();
  h.minDphi = j.at("minDphi").get<double>();
  h.minPhi = j.at("minPhi").get<double>();
  h.maxPhi = j.at("maxPhi").get<double>();
  h.minPsiR = j.at("minPsiR").get<double>();
  return h;
}

}  // namespace

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      config_fail(origin, line_no, "expected 'key = value'");
    }
    const std::string key{trim(line.substr(0, eq))};
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      config_fail(origin, line_no, "expected 'key = value'");
    }

    const auto as_long = [&] { return parse_long(origin, line_no, key, value); };
    const auto as_double = [&] {
      return parse_double(origin, line_no, key, value);
    };
    const auto as_bool = [&] { return parse_bool(origin, line_no, key, value); };

    if (key == "m") {
      cfg.branch.m = static_cast<int>(as_long());
      require(cfg.branch.m >= 2, origin, line_no, "m must be >= 2");
    } else if (key == "modes") {
      cfg.branch.modes = static_cast<int>(as_long());
      require(cfg.branch.modes >= 1, origin, line_no, "modes must be >= 1");
    } else if (key == "grid") {
      cfg.branch.grid = static_cast<int>(as_long());
      require(cfg.branch.grid >= 0, origin, line_no, "grid must be >= 0");
    } else if (key == "delta") {
      cfg.branch.delta = as_double();
      require(cfg.branch.delta > 0.0, origin, line_no, "delta must be > 0");
    } else if (key == "max_steps") {
      cfg.branch.max_steps = static_cast<int>(as_long());
      require(cfg.branch.max_steps >= 0, origin, line_no,
              "max_steps must be >= 0");
    } else if (key == "extra_start_points") {
      cfg.branch.extra_start_points = static_cast<int>(as_long());
      require(cfg.branch.extra_start_points >= 0, origin, line_no,
              "extra_start_points must be >= 0");
    } else if (key == "tail_threshold") {
      cfg.branch.tail_threshold = as_double();
      require(cfg.branch.tail_threshold > 0.0, origin, line_no,
              "tail_threshold must be > 0");
    } else if (key == "tail_window") {
      cfg.branch.tail_window = as_double();
      require(cfg.branch.tail_window > 0.0 && cfg.branch.tail_window <= 0.5,
              origin, line_no, "tail_window must be in (0, 0.5]");
    } else if (key == "use_secant") {
      cfg.branch.use_secant = as_bool();
    } else if (key == "compute_saddle") {
      cfg.branch.compute_saddle = as_bool();
    } else if (key == "newton_tol") {
      cfg.branch.newton.tol_residual = as_double();
      require(cfg.branch.newton.tol_residual > 0.0, origin, line_no,
              "newton_tol must be > 0");
    } else if (key == "newton_max_iters") {
      cfg.branch.newton.max_iters = static_cast<int>(as_long());
      require(cfg.branch.newton.max_iters >= 1, origin, line_no,
              "newton_max_iters must be >= 1");
    } else if (key == "newton_max_backtracks") {
      cfg.branch.newton.max_backtracks = static_cast<int>(as_long());
      require(cfg.branch.newton.max_backtracks >= 0, origin, line_no,
              "newton_max_backtracks must be >= 0");
    } else if (key == "krylov_tol") {
      cfg.branch.newton.krylov_tol = as_double();
      require(cfg.branch.newton.krylov_tol > 0.0, origin, line_no,
              "krylov_tol must be > 0");
    } else if (key == "krylov_restart") {
      cfg.branch.newton.krylov_restart = static_cast<int>(as_long());
      require(cfg.branch.newton.krylov_restart >= 1, origin, line_no,
              "krylov_restart must be >= 1");
    } else if (key == "krylov_max_iters") {
      cfg.branch.newton.krylov_max_iters = static_cast<int>(as_long());
      require(cfg.branch.newton.krylov_max_iters >= 1, origin, line_no,
              "krylov_max_iters must be >= 1");
    } else if (key == "diag_preconditioner") {
      cfg.branch.newton.use_diag_preconditioner = as_bool();
    } else if (key == "lgmres") {
      cfg.branch.newton.use_lgmres_augmentation = as_bool();
    } else if (key == "lgmres_aug") {
      cfg.branch.newton.lgmres_aug = static_cast<int>(as_long());
      require(cfg.branch.newton.lgmres_aug >= 1, origin, line_no,
              "lgmres_aug must be >= 1");
    } else if (key == "out_dir") {
      cfg.out_dir = fs::path(std::string(value));
    } else if (key == "plots") {
      cfg.plots = as_bool();
    } else if (key == "plot_every") {
      cfg.plot_every = static_cast<int>(as_long());
      require(cfg.plot_every >= 1, origin, line_no, "plot_every must be >= 1");
    } else if (key == "audit") {
      cfg.audit = as_bool();
    } else if (key == "audit_every") {
      cfg.audit_every = static_cast<int>(as_long());
      require(cfg.audit_every >= 1, origin, line_no,
              "audit_every must be >= 1");
    } else if (key == "workers") {
      const long w = as_long();
      require(w >= 1, origin, line_no, "workers must be >= 1");
      cfg.workers = static_cast<unsigned>(w);
    } else if (key == "field_export") {
      cfg.field_export = as_bool();
    } else if (key == "field_nr") {
      cfg.field_nr = static_cast<int>(as_long());
      require(cfg.field_nr >= 2, origin, line_no, "field_nr must be >= 2");
    } else if (key == "field_ntheta") {
      cfg.field_ntheta = static_cast<int>(as_long());
      require(cfg.field_ntheta >= 2, origin, line_no,
              "field_ntheta must be >= 2");
    } else if (key == "field_r_scale") {
      cfg.field_r_scale = as_double();
      require(cfg.field_r_scale > 1.0, origin, line_no,
              "field_r_scale must be > 1");
    } else {
      config_fail(origin, line_no, "unknown key '" + key + "'");
    }
  }

  // Cross-field validation: an explicit grid has to resolve the projection
  // band (N > 2 m M) of the Galerkin system.
  if (cfg.branch.grid != 0 &&
      cfg.branch.grid <= 2 * cfg.branch.m * cfg.branch.modes) {
    throw ConfigError(origin + ": grid must exceed 2*m*modes (or be 0 for " +
                      "the default)");
  }
  return cfg;
}

RunConfig parse_config_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

std::string serialize_record(const SolutionRecord& record, int m, int N) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["step"] = record.step;
  j["m"] = m;
  j["M"] = record.coeffs.modes();
  j["N"] = N;
  j["omega"] = record.omega;
  j["coefficients"] = record.coeffs.a;
  j["tail_ratio"] = record.tail_ratio;
  j["metrics"] = metrics_json(record.metrics);
  ordered_json nj;
  nj["converged"] = record.newton.converged;
  nj["iterations"] = record.newton.iterations;
  nj["initial_residual"] = record.newton.initial_residual;
  nj["final_residual"] = record.newton.final_residual;
  nj["total_krylov_iters"] = record.newton.total_krylov_iters;
  nj["total_backtracks"] = record.newton.total_backtracks;
  nj["residual_history"] = record.newton.residual_history;
  j["newton"] = std::move(nj);
  if (record.saddle) {
    ordered_json sj;
    sj["r"] = record.saddle->r;
    sj["theta"] = record.saddle->theta;
    sj["hessian_det"] = record.saddle->hessian_det;
    sj["psi_value"] = record.saddle->psi_value;
    sj["distance_to_boundary"] = record.saddle->distance_to_boundary;
    sj["degenerate"] = record.saddle->degenerate;
    j["saddle"] = std::move(sj);
  } else {
    j["saddle"] = nullptr;
  }
  return j.dump(2) + "\n";
}

SolutionRecord parse_record(const std::string& json_text, int* m_out,
                            int* N_out) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw SchemaMismatchError(std::string("unparseable record: ") + e.what());
  }
  if (!j.contains("schema_version") ||
      j["schema_version"].get<int>() != kSchemaVersion) {
    throw SchemaMismatchError("record schema version mismatch (want " +
                              std::to_string(kSchemaVersion) + ")");
  }
  SolutionRecord rec;
  try {
    rec.step = j.at("step").get<int>();
    rec.coeffs.m = j.at("m").get<int>();
    rec.omega = j.at("omega").get<double>();
    rec.coeffs.a = j.at("coefficients").get<std::vector<double>>();
    rec.tail_ratio = j.at("tail_ratio").get<double>();
    rec.metrics = metrics_from_json(j.at("metrics"));
    const auto& nj = j.at("newton");
    rec.newton.converged = nj.at("converged").get<bool>();
    rec.newton.iterations = nj.at("iterations").get<int>();
    rec.newton.initial_residual = nj.at("initial_residual").get<double>();
    rec.newton.final_residual = nj.at("final_residual").get<double>();
    rec.newton.total_krylov_iters = nj.at("total_krylov_iters").get<int>();
    rec.newton.total_backtracks = nj.at("total_backtracks").get<int>();
    rec.newton.residual_history =
        nj.at("residual_history").get<std::vector<double>>();
    if (!j.at("saddle").is_null()) {
      const auto& sj = j.at("saddle");
      SaddleInfo s;
      s.r = sj.at("r").get<double>();
      s.theta = sj.at("theta").get<double>();
      s.hessian_det = sj.at("hessian_det").get<double>();
      s.psi_value = sj.at("psi_value").get<double>();
      s.distance_to_boundary = sj.at("distance_to_boundary").get<double>();
      s.degenerate = sj.at("degenerate").get<bool>();
      rec.saddle = s;
    }
    if (m_out) *m_out = j.at("m").get<int>();
    if (N_out) *N_out = j.at("N").get<int>();
  } catch (const std::exception& e) {
    throw SchemaMismatchError(std::string("malformed record: ") + e.what());
  }
  return rec;
}

std::string branch_csv_header() {
  return "step,omega,a1,max_radius,min_psi_r,angle_margin,saddle_r,"
         "saddle_distance,newton_iters,residual_norm,tail_ratio";
}

std::string branch_csv_row(const SolutionRecord& record) {
  const double a1 = record.coeffs.a.empty() ? 0.0 : record.coeffs.a[0];
  const double nan = std::nan("");
  std::string row;
  row += std::to_string(record.step);
  row += ',';
  row += fmt_double17(record.omega);
  row += ',';
  row += fmt_double(a1);
  row += ',';
  row += fmt_double(record.metrics.maxPhi);
  row += ',';
  row += fmt_double(record.metrics.minPsiR);
  row += ',';
  row += fmt_double(record.metrics.angleMargin);
  row += ',';
  row += fmt_double(record.saddle ? record.saddle->r : nan);
  row += ',';
  row += fmt_double(record.saddle ? record.saddle->distance_to_boundary : nan);
  row += ',';
  row += std::to_string(record.newton.iterations);
  row += ',';
  row += fmt_double(record.newton.final_residual);
  row += ',';
  row += fmt_double(record.tail_ratio);
  return row;
}

std::vector<SolutionRecord> load_records(const fs::path& out_dir, int* m_out,
                                         int* N_out) {
  const fs::path sols = out_dir / "solutions";
  std::vector<SolutionRecord> records;
  int m = 0, N = 0;
  if (fs::exists(sols)) {
    for (const auto& entry : fs::directory_iterator(sols)) {
      const std::string name = entry.path().filename().string();
      if (!name.starts_with("step_") || !name.ends_with(".json")) continue;
      std::ifstream in(entry.path(), std::ios::binary);
      std::ostringstream buf;
      buf << in.rdbuf();
      int mi = 0, Ni = 0;
      SolutionRecord rec = parse_record(buf.str(), &mi, &Ni);
      if (m == 0) {
        m = mi;
        N = Ni;
      } else if (mi != m || Ni != N) {
        throw SchemaMismatchError("inconsistent m/N across records in " +
                                  sols.string());
      }
      records.push_back(std::move(rec));
    }
  }
  std::sort(records.begin(), records.end(),
            [](const SolutionRecord& a, const SolutionRecord& b) {
              return a.step < b.step;
            });
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].step != static_cast<int>(i)) {
      throw SchemaMismatchError("persisted steps are not contiguous from 0 in " +
                                sols.string());
    }
  }
  if (m_out) *m_out = m;
  if (N_out) *N_out = N;
  return records;
}

int run(const RunConfig& config, const fs::path& config_source, bool resume) {
  const fs::path out = config.out_dir;
  const fs::path sols = out / "solutions";
  fs::create_directories(sols);

  parallel::set_max_threads(config.workers);

  const int N = config.branch.grid > 0
                    ? config.branch.grid
                    : default_grid_size(config.branch.m, config.branch.modes);

  std::vector<SolutionRecord> prior;
  if (resume) {
    int m_prior = 0, N_prior = 0;
    prior = load_records(out, &m_prior, &N_prior);
    if (!prior.empty() && (m_prior != config.branch.m || N_prior != N)) {
      throw ConfigError("resume m/N (" + std::to_string(m_prior) + "/" +
                        std::to_string(N_prior) +
                        ") do not match the configured run (" +
                        std::to_string(config.branch.m) + "/" +
                        std::to_string(N) + ")");
    }
  } else {
    for (const auto& entry : fs::directory_iterator(sols)) {
      const std::string name = entry.path().filename().string();
      if (name.starts_with("step_") && name.ends_with(".json")) {
        throw ConfigError(
            "output directory already contains solution records; resume the "
            "run or choose a clean directory: " +
            out.string());
      }
    }
  }

  // Self-description: keep a copy of the driving configuration next to the
  // results.
  if (!config_source.empty() && fs::exists(config_source)) {
    fs::copy_file(config_source, out / "config.txt",
                  fs::copy_options::overwrite_existing);
  }

  RecordDecorator decorator;
  if (config.branch.compute_saddle) {
    decorator = [](const GridTrace& trace,
                   double omega) -> std::optional<SaddleInfo> {
      try {
        for (const CriticalPoint& cp : find_critical_points(trace, omega)) {
          if (std::abs(cp.theta) > 1e-8) continue;  // want the theta = 0 ray
          SaddleInfo s;
          s.r = cp.r;
          s.theta = cp.theta;
          s.hessian_det = cp.hessian_det;
          s.psi_value = cp.psi_value;
          s.distance_to_boundary = cp.distance_to_boundary;
          s.degenerate = cp.kind == CriticalKind::Degenerate;
          return s;
        }
        return std::nullopt;
      } catch (const NumericalError&) {
        return std::nullopt;
      }
    };
  }

  const RecordSink sink = [&](const SolutionRecord& rec) {
    std::ofstream f(sols / ("step_" + std::to_string(rec.step) + ".json"),
                    std::ios::binary | std::ios::trunc);
    f << serialize_record(rec, config.branch.m, N);
  };

  const BranchSummary summary =
      trace_branch(config.branch, sink, decorator, prior);

  {
    std::ofstream csv(out / "branch.csv", std::ios::binary | std::ios::trunc);
    csv << branch_csv_header() << '\n';
    for (const auto& rec : summary.records) {
      csv << branch_csv_row(rec) << '\n';
    }
  }
  {
    std::ofstream t(out / "termination.txt",
                    std::ios::binary | std::ios::trunc);
    t << to_string(summary.termination) << '\n';
    if (!summary.termination_detail.empty()) {
      t << summary.termination_detail << '\n';
    }
  }

  if (summary.records.empty()) return 3;

  if (config.audit) {
    const AuditReport report =
        run_audit(summary.records, config.branch, config.audit_every);
    std::ofstream a(out / "audit.txt", std::ios::binary | std::ios::trunc);
    for (const auto& e : report.entries) {
      a << (e.pass ? "PASS " : "FAIL ") << e.name << ": " << e.detail << '\n';
    }
    a << (report.all_pass() ? "ALL PASS" : "FAILURES PRESENT") << '\n';
  }

  if (config.plots) {
    fs::create_directories(out / "plots");
    for (std::size_t i = 0; i < summary.records.size(); ++i) {
      if (i % static_cast<std::size_t>(config.plot_every) != 0 &&
          i + 1 != summary.records.size()) {
        continue;
      }
      const auto& rec = summary.records[i];
      const GridTrace trace = synthesize(rec.coeffs, N);
      std::ofstream s(out / "plots" / ("step_" + std::to_string(rec.step) +
                                       ".svg"),
                      std::ios::binary | std::ios::trunc);
      s << render_svg(trace, rec.omega);
    }
  }

  if (config.field_export) {
    const auto& rec = summary.records.back();
    const GridTrace trace = synthesize(rec.coeffs, N);
    double r_max = 0.0;
    for (const auto& z : trace.phi) r_max = std::max(r_max, std::abs(z));
    r_max *= config.field_r_scale;
    const FieldGrid grid = sample_field(trace, rec.omega, config.field_nr,
                                        config.field_ntheta, r_max);
    std::ofstream f(out / "field.csv", std::ios::binary | std::ios::trunc);
    f << "r,theta,psi,psi_r,psi_theta,inside,near_boundary\n";
    for (int ir = 0; ir < grid.nr; ++ir) {
      for (int jt = 0; jt < grid.ntheta; ++jt) {
        f << fmt_double(grid.r[ir]) << ',' << fmt_double(grid.theta[jt]) << ','
          << fmt_double(grid.at(grid.psi, ir, jt)) << ','
          << fmt_double(grid.at(grid.psi_r, ir, jt)) << ','
          << fmt_double(grid.at(grid.psi_theta, ir, jt)) << ','
          << int(grid.inside[static_cast<std::size_t>(ir) * grid.ntheta + jt])
          << ','
          << int(grid.near_boundary[static_cast<std::size_t>(ir) *
                                        grid.ntheta +
                                    jt])
          << '\n';
      }
    }
  }

  return 0;
}

}  // namespace vstates::io
