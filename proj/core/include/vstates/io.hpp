// vstates -- run configuration, persistence, and reporting.
//
// Line-oriented `key = value` config files drive batch runs; results are
// persisted as one JSON document per solution (lossless round-trip), a
// branch-level CSV, optional SVG plots, and a self-describing output
// directory that supports byte-identical resume.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vstates/continuation.hpp"

namespace vstates::io {

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  BranchConfig branch;
  std::filesystem::path out_dir = "out";
  bool plots = false;
  int plot_every = 5;        ///< plot every k-th record (and the last)
  bool audit = false;
  int audit_every = 1;
  unsigned workers = 1;
  bool field_export = false;
  int field_nr = 96;
  int field_ntheta = 96;
  double field_r_scale = 2.0;  ///< grid r_max = scale * max boundary radius
};

/// Parse a config file. Unknown keys, malformed lines and out-of-range values
/// throw ConfigError. `#` starts a comment; blank lines are ignored.
RunConfig parse_config_file(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text,
                            const std::string& origin = "<config>");

/// Serialize a solution record to its JSON document / parse it back.
/// Round-trips are lossless: parse(serialize(r)) reproduces every number
/// bit-identically, and serialize(parse(s)) == s.
std::string serialize_record(const SolutionRecord& record, int m, int N);
SolutionRecord parse_record(const std::string& json_text, int* m_out = nullptr,
                            int* N_out = nullptr);

/// branch.csv header + one formatted row per record. All values use
/// shortest round-trip decimals except omega, written with 17 significant
/// digits; both re-read to identical bits.
std::string branch_csv_header();
std::string branch_csv_row(const SolutionRecord& record);

/// Execute a configured run end to end: trace (or resume) the branch, write
/// solutions/step_k.json incrementally, regenerate branch.csv
/// deterministically, and optionally write audits and SVG plots.
/// Returns the process exit code contract: 0 on success (including a branch
/// that terminated early but produced records), 3 if no record was produced.
int run(const RunConfig& config, const std::filesystem::path& config_source,
        bool resume);

/// Load previously persisted records (sorted by step) from an output
/// directory. Used by --resume and the audit/field subcommands.
std::vector<SolutionRecord> load_records(const std::filesystem::path& out_dir,
                                         int* m_out = nullptr,
                                         int* N_out = nullptr);

/// Render an SVG picture of one record: patch boundary, corotation curve
/// (dashed), critical-point markers, and a few stream-function level curves.
std::string render_svg(const GridTrace& trace, double omega);

}  // namespace vstates::io
