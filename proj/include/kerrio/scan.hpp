// Parameter scans, artifact files, and comparisons: the plumbing that turns
// the library's observables into plot-ready data. A scan sweeps exactly one
// axis (a model parameter, tau, or omega), evaluates one observable per grid
// point, and writes a table with a metadata header. Output is deterministic:
// no timestamps, full-precision numbers, ordered rows regardless of worker
// count.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kerrio/contractions.hpp"
#include "kerrio/model.hpp"
#include "kerrio/oracle.hpp"
#include "kerrio/resum.hpp"

namespace kerrio {

const char* version();

// Worker threads for parameter-axis scans: the KERRIO_WORKERS environment
// variable when set (integer in [1, 1024]), otherwise the hardware thread
// count. Grid points are distributed dynamically but written back in order.
int worker_count();

struct SweepAxis {
  std::string name;  // delta | kappa | u | f_re | f_im | n_b | tau | omega
  double start = 0.0;
  double stop = 0.0;
  int count = 1;  // count == 1 degenerates to the single point `start`
};

struct ScanConfig {
  ModelParams params;  // template; the sweep axis overrides one field
  SummationMode mode = SummationMode::bare(2);
  FockConfig fock;    // oracle_* observables
  double theta = 0.0;  // squeezing quadrature angle
  std::string observable;
  SweepAxis sweep;
  std::string output = "scan.csv";
  std::string format = "csv";  // csv | json
};

// Flat `key = value` text, one pair per line, '#' comments. Keys: observable,
// mode, order, delta, kappa, u, f_re, f_im, n_b, theta, n_max,
// convergence_margin, sweep, start, stop, count, output, format. Unknown
// keys, duplicates, or malformed values fail with the line number; missing
// required fields and cross-field violations fail with the field name.
ScanConfig parse_scan_config(const std::string& text);
ScanConfig load_scan_config(const std::string& path);

// One scan result. columns[0] is the sweep axis; every row holds one double
// per column. A grid point whose evaluation failed keeps its axis value,
// carries NaN in the value columns, and is listed in row_errors.
struct ScanTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<int, std::string>> row_errors;
};

ScanTable run_scan(const ScanConfig& cfg);

// CSV: `# key = value` metadata lines, a header row, then one comma-separated
// row per grid point, numbers printed with 17 significant digits. JSON: an
// ordered object {schema, metadata, columns, rows, errors}. Both round-trip
// through read_table bit for bit.
void write_table(const ScanTable& table, const std::string& path,
                 const std::string& format);
ScanTable read_table(const std::string& path);

struct ColumnDeviation {
  std::string name;
  double max_abs = 0.0;
  double max_rel = 0.0;
};

// Column-wise deviations over the columns the two tables share (the sweep
// axis must match bitwise). pass requires every shared column within tol in
// max-abs and both tables free of row errors.
struct CompareReport {
  bool pass = false;
  std::vector<ColumnDeviation> columns;
  std::string note;
};

CompareReport compare_tables(const ScanTable& a, const ScanTable& b,
                             double tol);
CompareReport compare_files(const std::string& path_a,
                            const std::string& path_b, double tol);

// Detector list syntax: comma-separated tokens, each `b` or `bd` with an
// optional `@0` / `@tau` pin (default `@0`), e.g. "bd@tau,b@0".
std::vector<DetectorOp> parse_cumulant_spec(const std::string& spec);

// GraphViz rendering of every connected diagram group of the cumulant at the
// given order: one digraph per group, preceded by comment lines with the
// group's labeled weight.
std::string render_cumulant_dot(const std::vector<DetectorOp>& detectors,
                                int order);

}  // namespace kerrio
