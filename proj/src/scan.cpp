#include "kerrio/scan.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "kerrio/observables.hpp"

namespace kerrio {

namespace {

constexpr const char* kSchema = "kerrio-scan-v1";

[[noreturn]] void fail(ErrorKind kind, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  throw Error(kind, buf);
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

bool parse_int(const std::string& text, int& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

// 17 significant digits round-trip an IEEE double exactly.
std::string format_double(double v) {
  char buf[40];
  snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::set<std::string>& param_axes() {
  static const std::set<std::string> axes = {"delta", "kappa", "u",
                                             "f_re",  "f_im",  "n_b"};
  return axes;
}

// Sweep axis each observable expects: a model parameter for the steady-state
// scalars, tau for the delay curves, omega for the spectra.
enum class AxisClass { Param, Tau, Omega };

AxisClass axis_class_of(const std::string& observable) {
  if (observable == "reflection" || observable == "meanfield" ||
      observable == "oracle_reflection" || observable == "oracle_meanfield") {
    return AxisClass::Param;
  }
  if (observable == "g1" || observable == "g2" || observable == "oracle_g1" ||
      observable == "oracle_g2") {
    return AxisClass::Tau;
  }
  if (observable == "squeezing") return AxisClass::Omega;
  fail(ErrorKind::ConfigParse, "unknown observable '%s'", observable.c_str());
}

void set_axis_value(ModelParams& p, const std::string& axis, double value) {
  if (axis == "delta") {
    p.delta = value;
  } else if (axis == "kappa") {
    p.kappa = value;
  } else if (axis == "u") {
    p.u = value;
  } else if (axis == "f_re") {
    p.f = cplx(value, p.f.imag());
  } else if (axis == "f_im") {
    p.f = cplx(p.f.real(), value);
  } else if (axis == "n_b") {
    p.n_b = value;
  } else {
    fail(ErrorKind::InvalidParameter, "unknown sweep axis '%s'", axis.c_str());
  }
}

std::vector<double> sweep_grid(const SweepAxis& sweep) {
  std::vector<double> grid(sweep.count);
  for (int i = 0; i < sweep.count; ++i) {
    grid[i] = sweep.count == 1 ? sweep.start
                               : sweep.start + (sweep.stop - sweep.start) * i /
                                                   (sweep.count - 1);
  }
  return grid;
}

// One order lower in the same mode, for the last-term truncation estimate.
// Returns false when there is no lower order to difference against.
bool lower_order(const SummationMode& mode, SummationMode& out) {
  if (mode.kind == SummationKind::MeanField || mode.order < 1) return false;
  out = mode;
  out.order -= 1;
  return true;
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

using RowFn = std::vector<double> (*)(const ScanConfig&, const ModelParams&);

std::vector<double> reflection_row(const ScanConfig& cfg,
                                   const ModelParams& p) {
  const Reflection refl = reflection(p, cfg.mode);
  double err = 0.0;
  SummationMode lower;
  if (lower_order(cfg.mode, lower)) {
    err = std::abs(refl.r - reflection(p, lower).r);
  }
  return {refl.r, refl.theta, err};
}

std::vector<double> meanfield_row(const ScanConfig& cfg, const ModelParams& p) {
  (void)cfg;
  const MeanFieldState st = mean_field_steady_state(p);
  return {st.a_mean.real(), st.a_mean.imag(), std::abs(st.a_mean),
          st.residual};
}

std::vector<double> oracle_reflection_row(const ScanConfig& cfg,
                                          const ModelParams& p) {
  if (p.f == cplx(0.0)) {
    throw Error(ErrorKind::InvalidParameter,
                "reflection is undefined for f = 0");
  }
  const SteadyState ss = steady_state(p, cfg.fock);
  const cplx mean_out =
      p.f + std::sqrt(p.kappa) * fock_moment(ss, 0, 1);
  const cplx ratio = mean_out / p.f;
  return {std::norm(ratio), -std::arg(ratio), ss.trace_error};
}

std::vector<double> oracle_meanfield_row(const ScanConfig& cfg,
                                         const ModelParams& p) {
  const SteadyState ss = steady_state(p, cfg.fock);
  const cplx a = fock_moment(ss, 0, 1);
  return {a.real(), a.imag(), std::abs(a), ss.trace_error};
}

struct ParamScanSpec {
  std::vector<std::string> value_columns;
  RowFn row_fn;
};

ParamScanSpec param_scan_spec(const std::string& observable) {
  if (observable == "reflection") {
    return {{"r", "theta", "r_err"}, &reflection_row};
  }
  if (observable == "meanfield") {
    return {{"a_re", "a_im", "a_abs", "residual"}, &meanfield_row};
  }
  if (observable == "oracle_reflection") {
    return {{"r", "theta", "trace_error"}, &oracle_reflection_row};
  }
  return {{"a_re", "a_im", "a_abs", "trace_error"}, &oracle_meanfield_row};
}

// Parameter-axis scans evaluate grid points independently: a dynamic worker
// pool pulls indices off a shared counter and writes results back by index,
// so the output is identical for any worker count. A point that throws keeps
// its axis value, gets NaN payloads, and is recorded as a row error.
void run_param_scan(const ScanConfig& cfg, const std::vector<double>& grid,
                    ScanTable& table) {
  const ParamScanSpec spec = param_scan_spec(cfg.observable);
  table.columns.insert(table.columns.end(), spec.value_columns.begin(),
                       spec.value_columns.end());
  const int n = static_cast<int>(grid.size());
  table.rows.assign(n, {});
  std::vector<std::string> errors(n);

  std::atomic<int> next{0};
  auto work = [&]() {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      ModelParams p = cfg.params;
      set_axis_value(p, cfg.sweep.name, grid[i]);
      std::vector<double>& row = table.rows[i];
      row.push_back(grid[i]);
      try {
        p.check();
        const std::vector<double> values = spec.row_fn(cfg, p);
        row.insert(row.end(), values.begin(), values.end());
      } catch (const Error& e) {
        row.resize(1 + spec.value_columns.size(), kNan);
        errors[i] = e.what();
      }
    }
  };

  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty()) table.row_errors.emplace_back(i, errors[i]);
  }
}

// Delay and frequency curves come from one closed-form evaluation over the
// whole grid, so they are computed in a single call; a failure there aborts
// the scan rather than a row.
void run_curve_scan(const ScanConfig& cfg, const std::vector<double>& grid,
                    ScanTable& table) {
  SummationMode lower;
  const bool have_lower = lower_order(cfg.mode, lower);

  if (cfg.observable == "g1" || cfg.observable == "g2") {
    const SpectrumCurve curve = cfg.observable == "g1"
                                    ? g1(cfg.params, cfg.mode, grid)
                                    : g2(cfg.params, cfg.mode, grid);
    const SpectrumCurve prev =
        have_lower ? (cfg.observable == "g1" ? g1(cfg.params, lower, grid)
                                             : g2(cfg.params, lower, grid))
                   : curve;
    if (curve.no_oracle) table.metadata.emplace_back("no_oracle", "1");
    if (cfg.observable == "g1") {
      table.columns = {"tau", "re", "im", "err", "re_delta", "im_delta"};
      for (size_t i = 0; i < grid.size(); ++i) {
        const cplx v = curve.values[i];
        const double err =
            have_lower ? std::abs(v - prev.values[i]) : 0.0;
        // The delta(tau) coefficient lives on the tau = 0 row only.
        const cplx d = grid[i] == 0.0 ? curve.delta_coeff : cplx(0.0);
        table.rows.push_back(
            {grid[i], v.real(), v.imag(), err, d.real(), d.imag()});
      }
    } else {
      table.columns = {"tau", "g2", "err"};
      for (size_t i = 0; i < grid.size(); ++i) {
        const double err =
            have_lower ? std::abs(curve.values[i] - prev.values[i]) : 0.0;
        table.rows.push_back({grid[i], curve.values[i].real(), err});
      }
    }
    return;
  }

  if (cfg.observable == "squeezing") {
    const SqueezingPair s =
        squeezing_spectrum(cfg.params, cfg.mode, cfg.theta, grid);
    SqueezingPair prev = s;
    if (have_lower) {
      prev = squeezing_spectrum(cfg.params, lower, cfg.theta, grid);
    }
    table.columns = {"omega", "s_plus", "s_minus", "s_plus_err",
                     "s_minus_err"};
    for (size_t i = 0; i < grid.size(); ++i) {
      const double ep =
          have_lower ? std::abs(s.plus.values[i] - prev.plus.values[i]) : 0.0;
      const double em =
          have_lower ? std::abs(s.minus.values[i] - prev.minus.values[i])
                     : 0.0;
      table.rows.push_back({grid[i], s.plus.values[i].real(),
                            s.minus.values[i].real(), ep, em});
    }
    return;
  }

  if (cfg.observable == "oracle_g1") {
    const std::vector<cplx> values = oracle_g1(cfg.params, cfg.fock, grid);
    table.columns = {"tau", "re", "im"};
    for (size_t i = 0; i < grid.size(); ++i) {
      table.rows.push_back({grid[i], values[i].real(), values[i].imag()});
    }
    return;
  }

  const std::vector<double> values = oracle_g2(cfg.params, cfg.fock, grid);
  table.columns = {"tau", "g2"};
  for (size_t i = 0; i < grid.size(); ++i) {
    table.rows.push_back({grid[i], values[i]});
  }
}

std::vector<std::pair<std::string, std::string>> config_metadata(
    const ScanConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> md;
  md.emplace_back("schema", kSchema);
  md.emplace_back("version", version());
  md.emplace_back("observable", cfg.observable);
  md.emplace_back("mode", summation_name(cfg.mode.kind));
  md.emplace_back("order", std::to_string(cfg.mode.order));
  md.emplace_back("delta", format_double(cfg.params.delta));
  md.emplace_back("kappa", format_double(cfg.params.kappa));
  md.emplace_back("u", format_double(cfg.params.u));
  md.emplace_back("f_re", format_double(cfg.params.f.real()));
  md.emplace_back("f_im", format_double(cfg.params.f.imag()));
  md.emplace_back("n_b", format_double(cfg.params.n_b));
  md.emplace_back("theta", format_double(cfg.theta));
  md.emplace_back("n_max", std::to_string(cfg.fock.n_max));
  md.emplace_back("convergence_margin",
                  format_double(cfg.fock.convergence_margin));
  md.emplace_back("sweep", cfg.sweep.name);
  md.emplace_back("start", format_double(cfg.sweep.start));
  md.emplace_back("stop", format_double(cfg.sweep.stop));
  md.emplace_back("count", std::to_string(cfg.sweep.count));
  return md;
}

}  // namespace

const char* version() { return "1.0.0"; }

int worker_count() {
  const char* env = std::getenv("KERRIO_WORKERS");
  if (env == nullptr || *env == '\0') {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
  }
  int n = 0;
  if (!parse_int(trim(env), n) || n < 1 || n > 1024) {
    fail(ErrorKind::ConfigParse,
         "KERRIO_WORKERS must be an integer in [1, 1024], got '%s'", env);
  }
  return n;
}

ScanConfig parse_scan_config(const std::string& text) {
  ScanConfig cfg;
  std::set<std::string> seen;
  bool have[6] = {};  // observable, sweep, start, stop, count, output
  enum { kObservable, kSweep, kStart, kStop, kCount, kOutput };

  std::istringstream stream(text);
  std::string line;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::ConfigParse, "line %d: expected key = value", lineno);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      fail(ErrorKind::ConfigParse, "line %d: expected key = value", lineno);
    }
    if (!seen.insert(key).second) {
      fail(ErrorKind::ConfigParse, "line %d: duplicate key '%s'", lineno,
           key.c_str());
    }

    auto number = [&]() {
      double v = 0.0;
      if (!parse_double(value, v)) {
        fail(ErrorKind::ConfigParse, "line %d: '%s' is not a number for %s",
             lineno, value.c_str(), key.c_str());
      }
      return v;
    };
    auto integer = [&]() {
      int v = 0;
      if (!parse_int(value, v)) {
        fail(ErrorKind::ConfigParse, "line %d: '%s' is not an integer for %s",
             lineno, value.c_str(), key.c_str());
      }
      return v;
    };

    if (key == "observable") {
      cfg.observable = value;
      have[kObservable] = true;
    } else if (key == "mode") {
      if (value == "bare") {
        cfg.mode.kind = SummationKind::Bare;
      } else if (value == "loop_summed") {
        cfg.mode.kind = SummationKind::LoopSummed;
      } else if (value == "mean_field") {
        cfg.mode.kind = SummationKind::MeanField;
      } else {
        fail(ErrorKind::ConfigParse,
             "line %d: mode must be bare, loop_summed, or mean_field", lineno);
      }
    } else if (key == "order") {
      cfg.mode.order = integer();
    } else if (key == "delta") {
      cfg.params.delta = number();
    } else if (key == "kappa") {
      cfg.params.kappa = number();
    } else if (key == "u") {
      cfg.params.u = number();
    } else if (key == "f_re") {
      cfg.params.f = cplx(number(), cfg.params.f.imag());
    } else if (key == "f_im") {
      cfg.params.f = cplx(cfg.params.f.real(), number());
    } else if (key == "n_b") {
      cfg.params.n_b = number();
    } else if (key == "theta") {
      cfg.theta = number();
    } else if (key == "n_max") {
      cfg.fock.n_max = integer();
    } else if (key == "convergence_margin") {
      cfg.fock.convergence_margin = number();
    } else if (key == "sweep") {
      cfg.sweep.name = value;
      have[kSweep] = true;
    } else if (key == "start") {
      cfg.sweep.start = number();
      have[kStart] = true;
    } else if (key == "stop") {
      cfg.sweep.stop = number();
      have[kStop] = true;
    } else if (key == "count") {
      cfg.sweep.count = integer();
      have[kCount] = true;
    } else if (key == "output") {
      cfg.output = value;
      have[kOutput] = true;
    } else if (key == "format") {
      if (value != "csv" && value != "json") {
        fail(ErrorKind::ConfigParse, "line %d: format must be csv or json",
             lineno);
      }
      cfg.format = value;
    } else {
      fail(ErrorKind::ConfigParse, "line %d: unknown key '%s'", lineno,
           key.c_str());
    }
  }

  static const char* required[] = {"observable", "sweep", "start",
                                   "stop",       "count", "output"};
  for (int i = 0; i < 6; ++i) {
    if (!have[i]) {
      fail(ErrorKind::ConfigParse, "missing required key '%s'", required[i]);
    }
  }

  try {
    cfg.params.check();
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigParse, e.what());
  }
  if (cfg.sweep.count < 1) {
    fail(ErrorKind::ConfigParse, "count must be at least 1, got %d",
         cfg.sweep.count);
  }
  if (cfg.mode.order < 0) {
    fail(ErrorKind::ConfigParse, "order must be non-negative, got %d",
         cfg.mode.order);
  }
  if (cfg.fock.n_max < 2) {
    fail(ErrorKind::ConfigParse, "n_max must be at least 2, got %d",
         cfg.fock.n_max);
  }

  const AxisClass cls = axis_class_of(cfg.observable);
  const std::string& axis = cfg.sweep.name;
  const bool is_param = param_axes().count(axis) > 0;
  if (!is_param && axis != "tau" && axis != "omega") {
    fail(ErrorKind::ConfigParse, "unknown sweep axis '%s'", axis.c_str());
  }
  const char* expected = cls == AxisClass::Param ? "a model parameter"
                         : cls == AxisClass::Tau ? "tau"
                                                 : "omega";
  const bool matches = (cls == AxisClass::Param && is_param) ||
                       (cls == AxisClass::Tau && axis == "tau") ||
                       (cls == AxisClass::Omega && axis == "omega");
  if (!matches) {
    fail(ErrorKind::ConfigParse, "observable %s sweeps %s, got '%s'",
         cfg.observable.c_str(), expected, axis.c_str());
  }
  if (!is_param) {
    if (cfg.sweep.count > 1 && !(cfg.sweep.stop > cfg.sweep.start)) {
      fail(ErrorKind::ConfigParse, "%s sweep must be increasing",
           axis.c_str());
    }
    if (axis == "tau" && cfg.sweep.start < 0.0) {
      fail(ErrorKind::ConfigParse, "tau sweep must start at or above 0");
    }
  }
  return cfg;
}

ScanConfig load_scan_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorKind::ConfigParse, "cannot open config file '%s'", path.c_str());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scan_config(buf.str());
}

ScanTable run_scan(const ScanConfig& cfg) {
  ScanTable table;
  table.metadata = config_metadata(cfg);
  table.columns = {cfg.sweep.name};
  const std::vector<double> grid = sweep_grid(cfg.sweep);
  if (axis_class_of(cfg.observable) == AxisClass::Param) {
    run_param_scan(cfg, grid, table);
  } else {
    table.columns.clear();  // curve scans set the full column list
    run_curve_scan(cfg, grid, table);
  }
  return table;
}

void write_table(const ScanTable& table, const std::string& path,
                 const std::string& format) {
  std::ofstream out(path);
  if (!out) {
    fail(ErrorKind::InvalidParameter, "cannot open '%s' for writing",
         path.c_str());
  }

  if (format == "csv") {
    for (const auto& [key, value] : table.metadata) {
      out << "# " << key << " = " << value << "\n";
    }
    for (const auto& [row, message] : table.row_errors) {
      out << "# error[" << row << "] = " << message << "\n";
    }
    for (size_t c = 0; c < table.columns.size(); ++c) {
      out << (c ? "," : "") << table.columns[c];
    }
    out << "\n";
    for (const std::vector<double>& row : table.rows) {
      for (size_t c = 0; c < row.size(); ++c) {
        out << (c ? "," : "") << format_double(row[c]);
      }
      out << "\n";
    }
  } else if (format == "json") {
    nlohmann::ordered_json j;
    j["schema"] = kSchema;
    nlohmann::ordered_json md = nlohmann::ordered_json::object();
    for (const auto& [key, value] : table.metadata) {
      if (key != "schema") md[key] = value;
    }
    j["metadata"] = md;
    j["columns"] = table.columns;
    j["rows"] = nlohmann::ordered_json::array();
    for (const std::vector<double>& row : table.rows) {
      nlohmann::ordered_json jr = nlohmann::ordered_json::array();
      for (double v : row) {
        // NaN has no JSON literal; null stands in for it.
        if (std::isnan(v)) {
          jr.push_back(nullptr);
        } else {
          jr.push_back(v);
        }
      }
      j["rows"].push_back(jr);
    }
    j["errors"] = nlohmann::ordered_json::array();
    for (const auto& [row, message] : table.row_errors) {
      j["errors"].push_back({row, message});
    }
    out << j.dump(2) << "\n";
  } else {
    fail(ErrorKind::InvalidParameter, "unknown output format '%s'",
         format.c_str());
  }

  if (!out.good()) {
    fail(ErrorKind::InvalidParameter, "write to '%s' failed", path.c_str());
  }
}

namespace {

ScanTable read_table_csv(const std::string& content, const std::string& path) {
  ScanTable table;
  std::istringstream stream(content);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(stream, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    if (line.rfind("# ", 0) == 0) {
      const std::string body = line.substr(2);
      const auto sep = body.find(" = ");
      if (sep == std::string::npos) {
        fail(ErrorKind::Schema, "%s:%d: malformed metadata line", path.c_str(),
             lineno);
      }
      const std::string key = body.substr(0, sep);
      const std::string value = body.substr(sep + 3);
      if (key.rfind("error[", 0) == 0 && key.back() == ']') {
        int row = 0;
        if (!parse_int(key.substr(6, key.size() - 7), row)) {
          fail(ErrorKind::Schema, "%s:%d: malformed row-error index",
               path.c_str(), lineno);
        }
        table.row_errors.emplace_back(row, value);
      } else {
        table.metadata.emplace_back(key, value);
      }
      continue;
    }

    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      table.columns = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != table.columns.size()) {
      fail(ErrorKind::Schema, "%s:%d: expected %zu cells, got %zu",
           path.c_str(), lineno, table.columns.size(), cells.size());
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const std::string& c : cells) {
      double v = 0.0;
      if (!parse_double(c, v)) {
        fail(ErrorKind::Schema, "%s:%d: '%s' is not a number", path.c_str(),
             lineno, c.c_str());
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) {
    fail(ErrorKind::Schema, "%s: no header row", path.c_str());
  }
  return table;
}

ScanTable read_table_json(const std::string& content,
                          const std::string& path) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Schema, "%s: %s", path.c_str(), e.what());
  }
  if (!j.is_object() || j.value("schema", "") != kSchema) {
    fail(ErrorKind::Schema, "%s: missing schema marker '%s'", path.c_str(),
         kSchema);
  }
  ScanTable table;
  table.metadata.emplace_back("schema", kSchema);
  for (const auto& [key, value] : j.at("metadata").items()) {
    table.metadata.emplace_back(key, value.get<std::string>());
  }
  table.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& jr : j.at("rows")) {
    std::vector<double> row;
    row.reserve(jr.size());
    for (const auto& cell : jr) {
      row.push_back(cell.is_null() ? kNan : cell.get<double>());
    }
    if (row.size() != table.columns.size()) {
      fail(ErrorKind::Schema, "%s: row width does not match columns",
           path.c_str());
    }
    table.rows.push_back(std::move(row));
  }
  for (const auto& je : j.at("errors")) {
    table.row_errors.emplace_back(je.at(0).get<int>(),
                                  je.at(1).get<std::string>());
  }
  return table;
}

}  // namespace

ScanTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorKind::Schema, "cannot open '%s'", path.c_str());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '{') {
    return read_table_json(content, path);
  }
  return read_table_csv(content, path);
}

CompareReport compare_tables(const ScanTable& a, const ScanTable& b,
                             double tol) {
  if (a.columns.empty() || b.columns.empty()) {
    throw Error(ErrorKind::Schema, "cannot compare tables without columns");
  }
  if (a.columns[0] != b.columns[0]) {
    fail(ErrorKind::Schema, "sweep axes differ: '%s' vs '%s'",
         a.columns[0].c_str(), b.columns[0].c_str());
  }
  if (a.rows.size() != b.rows.size()) {
    fail(ErrorKind::Schema, "row counts differ: %zu vs %zu", a.rows.size(),
         b.rows.size());
  }
  for (size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i][0] != b.rows[i][0]) {
      fail(ErrorKind::Schema, "sweep grids differ at row %zu", i);
    }
  }

  std::vector<std::string> shared;
  std::vector<std::string> skipped;
  for (size_t c = 1; c < a.columns.size(); ++c) {
    const bool in_b = std::find(b.columns.begin() + 1, b.columns.end(),
                                a.columns[c]) != b.columns.end();
    (in_b ? shared : skipped).push_back(a.columns[c]);
  }
  for (size_t c = 1; c < b.columns.size(); ++c) {
    if (std::find(a.columns.begin(), a.columns.end(), b.columns[c]) ==
        a.columns.end()) {
      skipped.push_back(b.columns[c]);
    }
  }
  if (shared.empty()) {
    throw Error(ErrorKind::Schema, "tables share no value columns");
  }

  CompareReport report;
  report.pass = a.row_errors.empty() && b.row_errors.empty();
  for (const std::string& name : shared) {
    const size_t ca =
        std::find(a.columns.begin(), a.columns.end(), name) -
        a.columns.begin();
    const size_t cb =
        std::find(b.columns.begin(), b.columns.end(), name) -
        b.columns.begin();
    ColumnDeviation dev;
    dev.name = name;
    for (size_t i = 0; i < a.rows.size(); ++i) {
      const double va = a.rows[i][ca];
      const double vb = b.rows[i][cb];
      const double diff = std::abs(va - vb);
      const double scale = std::max({std::abs(va), std::abs(vb), 1e-300});
      if (!(diff <= dev.max_abs)) dev.max_abs = diff;  // NaN sticks
      if (!(diff / scale <= dev.max_rel)) dev.max_rel = diff / scale;
    }
    if (!(dev.max_abs <= tol)) report.pass = false;
    report.columns.push_back(dev);
  }

  std::ostringstream note;
  note << shared.size() << " shared column" << (shared.size() == 1 ? "" : "s");
  if (!skipped.empty()) {
    note << "; skipped";
    for (size_t i = 0; i < skipped.size(); ++i) {
      note << (i ? ", " : " ") << skipped[i];
    }
  }
  if (!a.row_errors.empty() || !b.row_errors.empty()) {
    note << "; " << (a.row_errors.size() + b.row_errors.size())
         << " row errors";
  }
  report.note = note.str();
  return report;
}

CompareReport compare_files(const std::string& path_a,
                            const std::string& path_b, double tol) {
  return compare_tables(read_table(path_a), read_table(path_b), tol);
}

std::vector<DetectorOp> parse_cumulant_spec(const std::string& spec) {
  std::vector<DetectorOp> detectors;
  std::istringstream stream(spec);
  std::string token;
  while (std::getline(stream, token, ',')) {
    token = trim(token);
    if (token.empty()) {
      fail(ErrorKind::InvalidParameter, "empty detector token in '%s'",
           spec.c_str());
    }
    std::string op = token;
    std::string pin = "0";
    const auto at = token.find('@');
    if (at != std::string::npos) {
      op = token.substr(0, at);
      pin = token.substr(at + 1);
    }
    DetectorOp det;
    if (op == "b") {
      det.dagger = false;
    } else if (op == "bd") {
      det.dagger = true;
    } else {
      fail(ErrorKind::InvalidParameter,
           "detector must be b or bd, got '%s' in '%s'", token.c_str(),
           spec.c_str());
    }
    if (pin == "0") {
      det.pin = TimePin::Zero;
    } else if (pin == "tau") {
      det.pin = TimePin::Tau;
    } else {
      fail(ErrorKind::InvalidParameter,
           "detector pin must be 0 or tau, got '%s' in '%s'", token.c_str(),
           spec.c_str());
    }
    detectors.push_back(det);
  }
  if (detectors.empty()) {
    fail(ErrorKind::InvalidParameter, "empty cumulant spec");
  }
  return detectors;
}

std::string render_cumulant_dot(const std::vector<DetectorOp>& detectors,
                                int order) {
  CumulantRequest req;
  req.detectors = detectors;
  req.order = order;
  std::vector<ContractionTerm> terms = expand_cumulant(req);
  connected_filter(terms);
  const std::vector<DiagramGroup> groups = group_terms(terms);

  std::ostringstream out;
  out << "// cumulant:";
  for (size_t i = 0; i < detectors.size(); ++i) {
    out << (i ? "," : " ") << (detectors[i].dagger ? "bd" : "b") << '@'
        << (detectors[i].pin == TimePin::Tau ? "tau" : "0");
  }
  out << "\n// order: " << order << "\n";
  out << "// connected groups: " << groups.size() << "\n";
  for (size_t g = 0; g < groups.size(); ++g) {
    out << "\n// group " << (g + 1) << " of " << groups.size()
        << ": multiplicity " << groups[g].labeled_count << "\n";
    out << render_dot(groups[g].rep);
  }
  return out.str();
}

}  // namespace kerrio
