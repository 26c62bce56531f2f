#include "experiment.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "asymptotics.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "format.hpp"
#include "risk.hpp"
#include "seqmodel.hpp"

namespace ridgelab {

using json = nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::ConfigError, msg); }

const std::vector<std::string>& known_fields() {
  static const std::vector<std::string> fields = {
      "command", "d",   "n",    "c",      "estimators", "m",           "tau",      "reps",
      "seed",    "workers", "format", "out", "inject_fault", "direction"};
  return fields;
}

double json_to_double(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    if (auto parsed = parse_double(v.get<std::string>())) return *parsed;
  }
  config_error(where + ": expected a number or \"inf\"");
}

std::int64_t json_to_int(const json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::floor(x) == x && std::abs(x) < 9e15) return static_cast<std::int64_t>(x);
  }
  config_error(where + ": expected an integer");
}

std::uint64_t json_to_uint(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  config_error(where + ": expected a nonnegative integer");
}

template <class T, class Conv>
std::vector<T> json_list(const json& v, const std::string& field, Conv conv) {
  std::vector<T> out;
  if (!v.is_array()) {
    out.push_back(conv(v, field));
    return out;
  }
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(conv(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

std::string cell_label(std::int64_t d, std::int64_t n, double c) {
  return "d=" + std::to_string(d) + " n=" + std::to_string(n) + " c=" + format_double(c);
}

// One output row of risk-sweep and bounds.
struct SweepRow {
  std::int64_t d = 0;
  std::int64_t n = 0;
  double c = 0.0;
  std::string estimator;
  RiskEstimate risk;
  std::string reference_name;
  std::optional<double> reference;
};

struct SeqRow {
  std::int64_t m = 0;
  double tau = 0.0;
  double c = 0.0;
  std::string quantity;
  double value = 0.0;
  std::string reference_name;
  double reference = 0.0;
};

struct CheckRow {
  std::string check;
  double measured = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

std::string header_comment() { return std::string("# ridgelab ") + RIDGELAB_VERSION + "\n"; }

std::optional<double> deviation(const SweepRow& r) {
  if (!r.reference) return std::nullopt;
  return r.risk.mean - *r.reference;
}

std::string render_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << header_comment()
     << "d,n,c,estimator,risk_mean,risk_stderr,reps,seed,reference_name,reference_value,"
        "deviation\n";
  for (const auto& r : rows) {
    os << r.d << ',' << r.n << ',' << format_double(r.c) << ',' << r.estimator << ','
       << format_double(r.risk.mean) << ',' << format_double(r.risk.std_error) << ','
       << r.risk.reps << ',' << r.risk.master_seed << ',' << r.reference_name << ',';
    if (r.reference) os << format_double(*r.reference);
    os << ',';
    if (auto dev = deviation(r)) os << format_double(*dev);
    os << '\n';
  }
  return os.str();
}

json rows_json(const std::vector<SweepRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    const auto dev = deviation(r);
    arr.push_back({{"d", r.d},
                   {"n", r.n},
                   {"c", number_or_string(r.c)},
                   {"estimator", r.estimator},
                   {"risk_mean", number_or_string(r.risk.mean)},
                   {"risk_stderr", r.risk.std_error},
                   {"reps", r.risk.reps},
                   {"seed", r.risk.master_seed},
                   {"reference_name", r.reference_name},
                   {"reference_value", r.reference ? number_or_string(*r.reference) : json()},
                   {"deviation", dev ? number_or_string(*dev) : json()}});
  }
  return arr;
}

std::string render_csv(const std::vector<SeqRow>& rows) {
  std::ostringstream os;
  os << header_comment() << "m,tau,c,quantity,value,reference_name,reference_value,deviation\n";
  for (const auto& r : rows)
    os << r.m << ',' << format_double(r.tau) << ',' << format_double(r.c) << ',' << r.quantity
       << ',' << format_double(r.value) << ',' << r.reference_name << ','
       << format_double(r.reference) << ',' << format_double(r.value - r.reference) << '\n';
  return os.str();
}

json rows_json(const std::vector<SeqRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"m", r.m},
                   {"tau", r.tau},
                   {"c", r.c},
                   {"quantity", r.quantity},
                   {"value", number_or_string(r.value)},
                   {"reference_name", r.reference_name},
                   {"reference_value", number_or_string(r.reference)},
                   {"deviation", number_or_string(r.value - r.reference)}});
  return arr;
}

std::string render_csv(const std::vector<CheckRow>& rows) {
  std::ostringstream os;
  os << header_comment() << "check,measured,reference,tolerance,verdict\n";
  for (const auto& r : rows)
    os << r.check << ',' << format_double(r.measured) << ',' << format_double(r.reference) << ','
       << format_double(r.tolerance) << ',' << (r.pass ? "pass" : "fail") << '\n';
  return os.str();
}

json rows_json(const std::vector<CheckRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"check", r.check},
                   {"measured", number_or_string(r.measured)},
                   {"reference", number_or_string(r.reference)},
                   {"tolerance", r.tolerance},
                   {"verdict", r.pass ? "pass" : "fail"}});
  return arr;
}

template <class Row>
std::string render(const ExperimentConfig& cfg, const std::vector<Row>& rows, double seconds) {
  if (cfg.format == OutputFormat::Csv) return render_csv(rows);
  json doc;
  doc["metadata"] = {{"version", RIDGELAB_VERSION},
                     {"command", command_name(cfg.command)},
                     {"config", json::parse(cfg.to_json())},
                     {"wall_time_seconds", seconds}};
  doc["rows"] = rows_json(rows);
  return doc.dump(2) + "\n";
}

void report(const ProgressFn& progress, const std::string& msg) {
  if (progress) progress(msg);
}

RunOptions run_options(const ExperimentConfig& cfg) {
  RunOptions opts;
  opts.workers = cfg.workers;
  return opts;
}

// Reference value for an estimator at a grid cell, when one is known.
void attach_reference(SweepRow& row, const EstimatorSpec& spec) {
  const bool classical = row.d + 1 < row.n;
  switch (spec.kind) {
    case EstimatorKind::Null:
      row.reference_name = "null_exact";
      row.reference = row.c * row.c;
      return;
    case EstimatorKind::Ols:
      if (classical) {
        row.reference_name = "ols_exact";
        row.reference = ols_risk_exact(row.d, row.n);
      }
      return;
    case EstimatorKind::ScaledOlsOracle:
      if (classical) {
        row.reference_name = "scaled_ols_exact";
        row.reference = scaled_ols_risk_exact(row.d, row.n, row.c);
      }
      return;
    case EstimatorKind::Ridge:
      if (spec.c != row.c) return;
      [[fallthrough]];
    case EstimatorKind::OracleRidge:
    case EstimatorKind::AdaptiveRidge:
    case EstimatorKind::SphereBayes: {
      if (spec.kind == EstimatorKind::SphereBayes && spec.c && *spec.c != row.c) return;
      const double rho = static_cast<double>(row.d) / static_cast<double>(row.n);
      const double r = limiting_ridge_risk(rho, row.c);
      if (!std::isfinite(r)) return;
      row.reference_name = "limiting_ridge_risk";
      row.reference = r;
      return;
    }
  }
}

struct Grid {
  std::int64_t d;
  std::int64_t n;
  double c;
};

std::vector<Grid> grid_cells(const ExperimentConfig& cfg) {
  std::vector<Grid> cells;
  for (auto d : cfg.d)
    for (auto n : cfg.n)
      for (auto c : cfg.c) cells.push_back({d, n, c});
  return cells;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const ProgressFn& progress) {
  std::vector<EstimatorSpec> specs;
  for (const auto& tag : cfg.estimators) specs.push_back(EstimatorSpec::parse(tag));
  const RunOptions opts = run_options(cfg);
  std::vector<SweepRow> rows;
  for (const auto& cell : grid_cells(cfg)) {
    const ModelSpec model{cell.d, cell.n, cell.c,
                          cfg.haar_direction ? DirectionPolicy::HaarRandomPerReplicate
                                             : DirectionPolicy::FixedFirstAxis};
    for (const auto& spec : specs) {
      report(progress, "risk-sweep " + cell_label(cell.d, cell.n, cell.c) + " " + spec.tag());
      SweepRow row{cell.d, cell.n, cell.c, spec.tag(), {}, {}, {}};
      row.risk = mc_risk(spec, model, cfg.reps, cfg.seed, opts);
      attach_reference(row, spec);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

RiskEstimate exact_row(double v, const ExperimentConfig& cfg) {
  return RiskEstimate{v, 0.0, cfg.reps, cfg.seed, 0};
}

std::vector<SweepRow> run_bounds(const ExperimentConfig& cfg, const ProgressFn& progress) {
  const RunOptions opts = run_options(cfg);
  std::vector<SweepRow> rows;
  for (const auto& cell : grid_cells(cfg)) {
    report(progress, "bounds " + cell_label(cell.d, cell.n, cell.c));
    const double rho = static_cast<double>(cell.d) / static_cast<double>(cell.n);
    auto row = [&](std::string name, RiskEstimate est) {
      return SweepRow{cell.d, cell.n, cell.c, std::move(name), est, {}, {}};
    };
    if (cell.d + 1 < cell.n) {
      const BoundReport jb = jensen_bounds(cell.d, cell.n, cell.c);
      rows.push_back(row("jensen_lower", exact_row(jb.lower, cfg)));
      rows.push_back(row("jensen_upper", exact_row(jb.upper, cfg)));
    }
    SweepRow trace = row("oracle_ridge_trace", trace_risk_oracle_ridge(cell.d, cell.n, cell.c,
                                                                        cfg.reps, cfg.seed, opts));
    const double limit = limiting_ridge_risk(rho, cell.c);
    if (std::isfinite(limit)) {
      trace.reference_name = "limiting_ridge_risk";
      trace.reference = limit;
    }
    rows.push_back(std::move(trace));
    if (cell.d > cell.n)
      rows.push_back(row("equivariant_floor",
                         exact_row(equivariant_floor(cell.d, cell.n, cell.c), cfg)));
    rows.push_back(
        row("gap_bound", ridge_gap_bound(cell.d, cell.n, cell.c, cfg.reps, cfg.seed, opts)));
  }
  return rows;
}

std::vector<SeqRow> run_seq_check(const ExperimentConfig& cfg, const ProgressFn& progress) {
  std::vector<SeqRow> rows;
  for (auto m : cfg.m)
    for (auto tau : cfg.tau)
      for (auto c : cfg.c) {
        report(progress, "seq-check m=" + std::to_string(m) + " tau=" + format_double(tau) +
                             " c=" + format_double(c));
        const IidSeqSpec spec{m, tau * tau, c};
        const MarchandReport mr = marchand_gap_check(spec);
        rows.push_back({m, tau, c, "marchand_gap", mr.gap, "marchand_bound", mr.bound});
        if (m <= 2) {
          const BrownReport br = brown_identity_check(spec);
          rows.push_back({m, tau, c, "sphere_bayes_risk", br.lhs, "brown_rhs", br.rhs});
        }
        if (m == 1) {
          const StamReport sr = stam_bound_check(1, spec, tau * tau);
          rows.push_back({m, tau, c, "stam_min_slack", sr.min_slack, "zero", 0.0});
        }
      }
  return rows;
}

// verify-asymptotics

class Verifier {
 public:
  Verifier(const ExperimentConfig& cfg, const ProgressFn& progress)
      : cfg_(cfg), progress_(progress), opts_(run_options(cfg)) {}

  std::vector<CheckRow> run() {
    closed_forms();
    jensen();
    for (const auto& cell : grid_cells(cfg_)) limiting(cell);
    null_and_floor();
    analytic_identities();
    equivariant_gap();
    sequence_checks();
    return rows_;
  }

 private:
  double ref(const std::string& check, double value) const {
    return cfg_.inject_fault == check ? 1.25 * value + 0.1 : value;
  }

  void add(std::string name, double measured, double reference, double tolerance, bool pass) {
    report(progress_, "verify " + name + (pass ? " pass" : " FAIL"));
    rows_.push_back({std::move(name), measured, reference, tolerance, pass});
  }

  void within(const std::string& name, double measured, double reference, double tolerance) {
    add(name, measured, reference, tolerance, std::abs(measured - reference) <= tolerance);
  }

  void closed_forms() {
    const ModelSpec spec{10, 30, 1.0, DirectionPolicy::FixedFirstAxis};
    const RiskEstimate o = mc_risk(EstimatorSpec::ols(), spec, cfg_.reps, cfg_.seed, opts_);
    within("ols_exact_risk", o.mean, ref("ols_exact_risk", ols_risk_exact(10, 30)),
           3.0 * o.std_error);
    const RiskEstimate s =
        mc_risk(EstimatorSpec::scaled_ols_oracle(), spec, cfg_.reps, cfg_.seed, opts_);
    within("scaled_ols_exact_risk", s.mean,
           ref("scaled_ols_exact_risk", scaled_ols_risk_exact(10, 30, 1.0)), 3.0 * s.std_error);
  }

  void jensen() {
    const RiskEstimate t = trace_risk_oracle_ridge(10, 30, 1.0, cfg_.reps, cfg_.seed, opts_);
    const BoundReport b = jensen_bounds(10, 30, 1.0);
    const double tol = 3.0 * t.std_error;
    const double lo = ref("jensen_lower", b.lower);
    const double hi = ref("jensen_upper", b.upper);
    add("jensen_lower", t.mean, lo, tol, t.mean >= lo - tol);
    add("jensen_upper", t.mean, hi, tol, t.mean <= hi + tol);
  }

  void limiting(const Grid& cell) {
    const double rho = static_cast<double>(cell.d) / static_cast<double>(cell.n);
    const RiskEstimate t =
        trace_risk_oracle_ridge(cell.d, cell.n, cell.c, cfg_.reps, cfg_.seed, opts_);
    within("limiting_ridge_risk[" + cell_label(cell.d, cell.n, cell.c) + "]", t.mean,
           ref("limiting_ridge_risk", limiting_ridge_risk(rho, cell.c)), 0.02);
  }

  void null_and_floor() {
    const ModelSpec high{400, 40, 1.0, DirectionPolicy::FixedFirstAxis};
    const RiskEstimate z = mc_risk(EstimatorSpec::null(), high, cfg_.reps, cfg_.seed, opts_);
    add("null_risk", z.mean, ref("null_risk", 1.0), 0.0,
        z.mean == ref("null_risk", 1.0) && z.std_error == 0.0);
    const RiskEstimate r =
        mc_risk(EstimatorSpec::oracle_ridge(), high, cfg_.reps, cfg_.seed, opts_);
    const double floor = ref("equivariant_floor", equivariant_floor(400, 40, 1.0));
    const double tol = 3.0 * r.std_error;
    add("equivariant_floor", r.mean, floor, tol, r.mean >= floor - tol && r.mean <= 1.0 + tol);
  }

  void analytic_identities() {
    double worst = 0.0;
    for (double rho : {0.25, 0.5, 1.0, 2.0, 4.0})
      for (double c : {0.1, 0.5, 1.0, 2.0, 10.0}) {
        const double lhs = rho * mp_stieltjes(rho, -rho / (c * c));
        worst = std::max(worst, std::abs(lhs - ref("mp_stieltjes_identity",
                                                    limiting_ridge_risk(rho, c))));
      }
    add("mp_stieltjes_identity", worst, 0.0, 1e-8, worst <= 1e-8);

    double residual = 0.0;
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        const double rho = 0.05 * std::pow(1.5, i);
        const double c = 0.05 * std::pow(1.45, j);
        const double scale = 1.0 + std::pow(c, 4) + rho * rho;
        residual = std::max(residual, std::abs(limiting_ridge_residual(rho, c)) / scale);
      }
    if (cfg_.inject_fault == "limiting_ridge_residual") residual += 1.0;
    add("limiting_ridge_residual", residual, 0.0, 1e-10, residual <= 1e-10);

    double small = 0.0;
    for (double c : {0.1, 0.3, 1.0, 3.0, 10.0}) {
      const double ratio = limiting_ridge_risk(0.01, c) /
                           ref("linear_minimax_small_ratio", linear_minimax_risk(0.01, c));
      small = std::max(small, std::abs(ratio - 1.0));
    }
    add("linear_minimax_small_ratio", small, 0.0, 0.05, small <= 0.05);
  }

  void equivariant_gap() {
    const ModelSpec spec{2, 10, 1.0, DirectionPolicy::FixedFirstAxis};
    RunOptions opts = opts_;
    opts.sphere.mode = SphereIntegration::Quadrature;
    const PairedRiskEstimate p =
        mc_risk_paired(EstimatorSpec::oracle_ridge(), EstimatorSpec::sphere_bayes(std::nullopt),
                       spec, cfg_.reps, cfg_.seed, opts);
    const RiskEstimate bound = ridge_gap_bound(2, 10, 1.0, cfg_.reps, cfg_.seed, opts_);
    const double b = ref("equivariant_gap_bound", bound.mean);
    const double tol = 3.0 * std::hypot(p.difference.std_error, bound.std_error);
    const double gap = p.difference.mean;
    add("equivariant_gap_bound", gap, b, tol,
        gap >= -3.0 * p.difference.std_error && gap <= b + tol);
  }

  void sequence_checks() {
    double worst = -std::numeric_limits<double>::infinity();
    for (const IidSeqSpec& s : {IidSeqSpec{1, 1.0, 1.0}, IidSeqSpec{2, 1.0, 2.0},
                                IidSeqSpec{2, 0.25, 1.5}}) {
      const MarchandReport r = marchand_gap_check(s);
      worst = std::max(worst, r.gap - ref("marchand_bound", r.bound));
    }
    add("marchand_bound", worst, 0.0, 1e-6, worst <= 1e-6);

    double brown = 0.0;
    for (const IidSeqSpec& s : {IidSeqSpec{1, 1.0, 1.0}, IidSeqSpec{2, 0.25, 1.5}}) {
      const BrownReport r = brown_identity_check(s);
      brown = std::max(brown, std::abs(r.lhs - ref("brown_identity", r.rhs)));
    }
    add("brown_identity", brown, 0.0, 1e-5, brown <= 1e-5);
  }

  const ExperimentConfig& cfg_;
  const ProgressFn& progress_;
  RunOptions opts_;
  std::vector<CheckRow> rows_;
};

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
  if (name == "risk-sweep") return Command::RiskSweep;
  if (name == "verify-asymptotics") return Command::VerifyAsymptotics;
  if (name == "bounds") return Command::Bounds;
  if (name == "seq-check") return Command::SeqCheck;
  return std::nullopt;
}

const char* command_name(Command command) {
  switch (command) {
    case Command::RiskSweep: return "risk-sweep";
    case Command::VerifyAsymptotics: return "verify-asymptotics";
    case Command::Bounds: return "bounds";
    case Command::SeqCheck: return "seq-check";
  }
  return "unknown";
}

std::vector<std::string> verify_check_names() {
  return {"ols_exact_risk",        "scaled_ols_exact_risk",   "jensen_lower",
          "jensen_upper",          "limiting_ridge_risk",     "null_risk",
          "equivariant_floor",     "mp_stieltjes_identity",   "limiting_ridge_residual",
          "linear_minimax_small_ratio", "equivariant_gap_bound", "marchand_bound",
          "brown_identity"};
}

ExperimentConfig ExperimentConfig::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error("config is not valid JSON at byte " + std::to_string(e.byte) + ": " +
                 e.what());
  }
  if (!doc.is_object()) config_error("config must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const auto& known = known_fields();
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      config_error("unknown field '" + it.key() + "'");
  }

  ExperimentConfig cfg;
  if (doc.contains("command")) {
    if (!doc["command"].is_string()) config_error("command: expected a string");
    auto cmd = parse_command(doc["command"].get<std::string>());
    if (!cmd) config_error("command: unknown command '" + doc["command"].get<std::string>() + "'");
    cfg.command = *cmd;
  }
  switch (cfg.command) {
    case Command::RiskSweep:
      cfg.estimators = {"oracle_ridge"};
      break;
    case Command::VerifyAsymptotics:
      cfg.d = {200};
      cfg.n = {400};
      cfg.c = {1.0};
      cfg.reps = 500;
      break;
    case Command::Bounds:
      break;
    case Command::SeqCheck:
      cfg.m = {1, 2};
      cfg.tau = {1.0};
      cfg.c = {1.0};
      break;
  }

  if (doc.contains("d")) cfg.d = json_list<std::int64_t>(doc["d"], "d", json_to_int);
  if (doc.contains("n")) cfg.n = json_list<std::int64_t>(doc["n"], "n", json_to_int);
  if (doc.contains("c")) cfg.c = json_list<double>(doc["c"], "c", json_to_double);
  if (doc.contains("m")) cfg.m = json_list<std::int64_t>(doc["m"], "m", json_to_int);
  if (doc.contains("tau")) cfg.tau = json_list<double>(doc["tau"], "tau", json_to_double);
  if (doc.contains("estimators")) {
    cfg.estimators = json_list<std::string>(
        doc["estimators"], "estimators", [](const json& v, const std::string& where) {
          if (!v.is_string()) config_error(where + ": expected an estimator tag string");
          return v.get<std::string>();
        });
  }
  if (doc.contains("reps")) cfg.reps = json_to_uint(doc["reps"], "reps");
  if (doc.contains("seed")) cfg.seed = json_to_uint(doc["seed"], "seed");
  if (doc.contains("workers")) {
    const auto w = json_to_uint(doc["workers"], "workers");
    if (w < 1 || w > 1024) config_error("workers: must be in [1, 1024]");
    cfg.workers = static_cast<unsigned>(w);
  }
  if (doc.contains("format")) {
    const auto& f = doc["format"];
    if (f == "csv")
      cfg.format = OutputFormat::Csv;
    else if (f == "json")
      cfg.format = OutputFormat::Json;
    else
      config_error("format: expected \"csv\" or \"json\"");
  }
  if (doc.contains("out")) {
    if (!doc["out"].is_string()) config_error("out: expected a path string");
    cfg.out = doc["out"].get<std::string>();
  }
  if (doc.contains("inject_fault")) {
    if (!doc["inject_fault"].is_string()) config_error("inject_fault: expected a check name");
    cfg.inject_fault = doc["inject_fault"].get<std::string>();
  }
  if (doc.contains("direction")) {
    const auto& dir = doc["direction"];
    if (dir != "fixed" && dir != "haar") config_error("direction: expected \"fixed\" or \"haar\"");
    cfg.haar_direction = dir == "haar";
  }
  cfg.validate();
  return cfg;
}

std::string ExperimentConfig::to_json() const {
  json doc;
  doc["command"] = command_name(command);
  if (command == Command::SeqCheck) {
    doc["m"] = m;
    doc["tau"] = tau;
  } else {
    doc["d"] = d;
    doc["n"] = n;
  }
  json cs = json::array();
  for (double v : c) cs.push_back(number_or_string(v));
  doc["c"] = cs;
  if (command == Command::RiskSweep) doc["estimators"] = estimators;
  doc["reps"] = reps;
  doc["seed"] = seed;
  doc["workers"] = workers;
  doc["format"] = format == OutputFormat::Csv ? "csv" : "json";
  if (!out.empty()) doc["out"] = out;
  if (haar_direction) doc["direction"] = "haar";
  if (!inject_fault.empty()) doc["inject_fault"] = inject_fault;
  return doc.dump();
}

void ExperimentConfig::validate() const {
  auto nonempty = [](const auto& list, const char* field) {
    if (list.empty()) config_error(std::string(field) + ": grid is empty");
  };
  if (reps < 2) config_error("reps: must be >= 2");
  if (workers < 1) config_error("workers: must be >= 1");
  nonempty(c, "c");
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!(c[i] >= 0.0))
      config_error("c[" + std::to_string(i) + "]: must be in [0, inf]");

  if (command == Command::SeqCheck) {
    nonempty(m, "m");
    nonempty(tau, "tau");
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] < 1 || m[i] > 3) config_error("m[" + std::to_string(i) + "]: must be 1, 2 or 3");
    for (std::size_t i = 0; i < tau.size(); ++i)
      if (!(tau[i] > 0.0) || std::isinf(tau[i]))
        config_error("tau[" + std::to_string(i) + "]: must be positive and finite");
    for (std::size_t i = 0; i < c.size(); ++i)
      if (std::isinf(c[i])) config_error("c[" + std::to_string(i) + "]: must be finite");
    return;
  }

  nonempty(d, "d");
  nonempty(n, "n");
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] < 1) config_error("d[" + std::to_string(i) + "]: must be >= 1");
  for (std::size_t i = 0; i < n.size(); ++i)
    if (n[i] <= 2) config_error("n[" + std::to_string(i) + "]: must be > 2");
  for (auto dd : d)
    for (auto nn : n)
      if (static_cast<double>(dd) * static_cast<double>(nn) > 5e7)
        config_error("d, n: cell d=" + std::to_string(dd) + " n=" + std::to_string(nn) +
                     " exceeds the 5e7-entry design limit");

  if (command == Command::RiskSweep) {
    for (std::size_t i = 0; i < c.size(); ++i)
      if (std::isinf(c[i])) config_error("c[" + std::to_string(i) + "]: must be finite");
    nonempty(estimators, "estimators");
    for (std::size_t i = 0; i < estimators.size(); ++i) {
      const std::string field = "estimators[" + std::to_string(i) + "]";
      EstimatorSpec spec;
      try {
        spec = EstimatorSpec::parse(estimators[i]);
      } catch (const Error& e) {
        config_error(field + ": " + e.what());
      }
      if (spec.kind != EstimatorKind::SphereBayes) continue;
      for (auto dd : d)
        for (auto nn : n)
          if (dd > nn)
            config_error(field + ": sphere_bayes needs d <= n, grid has d=" +
                         std::to_string(dd) + " n=" + std::to_string(nn));
      if (!spec.c)
        for (double cc : c)
          if (std::isinf(cc)) config_error(field + ": sphere_bayes needs a finite c");
    }
  }
  if (command == Command::VerifyAsymptotics && !inject_fault.empty()) {
    const auto names = verify_check_names();
    if (std::find(names.begin(), names.end(), inject_fault) == names.end())
      config_error("inject_fault: unknown check '" + inject_fault + "'");
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  ExperimentResult result;
  switch (config.command) {
    case Command::RiskSweep: {
      const auto rows = run_sweep(config, progress);
      result.output = render(config, rows, elapsed());
      break;
    }
    case Command::Bounds: {
      const auto rows = run_bounds(config, progress);
      result.output = render(config, rows, elapsed());
      break;
    }
    case Command::SeqCheck: {
      const auto rows = run_seq_check(config, progress);
      result.output = render(config, rows, elapsed());
      break;
    }
    case Command::VerifyAsymptotics: {
      const auto rows = Verifier(config, progress).run();
      for (const auto& r : rows)
        if (!r.pass) result.exit_code = 1;
      result.output = render(config, rows, elapsed());
      break;
    }
  }
  return result;
}

}  // namespace ridgelab
