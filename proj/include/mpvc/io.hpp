// Serialization: run results as JSON, iteration logs and batch tables as
// CSV, solver settings as key=value text, truss models as JSON.
#pragma once

#include "mpvc/batch.hpp"
#include "mpvc/problems.hpp"
#include "mpvc/sqp.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mpvc {

using Json = nlohmann::ordered_json;

/// Flat record of one run, as written to the result file.
struct RunResult {
  std::string problem;
  std::string algorithm;
  Vector x0;
  std::string status;
  std::string message;
  Vector x;
  double f = 0.0;
  double viol = 0.0;
  double rho = 0.0;
  std::string level;
  bool weak = false, m = false, q = false, qm = false, s = false;
  IndexList beta1, beta2;
  double stationarity_residual = 0.0;
  double complementarity_residual = 0.0;
  double feasibility_residual = 0.0;
  double lp_margin = 0.0;
  double cert_tol = 0.0;
  std::string cert_note;
  int outer_iterations = 0;
  std::vector<int> N_k;
  int sum_j = 0;
  int f_evals = 0;
  int grad_evals = 0;
  int corrections = 0;
  bool invariants_ok = true;
  std::vector<std::string> invariant_messages;
  double wall_seconds = 0.0;
};

/// Exact equality, treating NaN as equal to NaN.
bool operator==(const RunResult& a, const RunResult& b);

RunResult make_run_result(const std::string& problem, Algorithm algorithm, const Vector& x0,
                          const SqpResult& result);

Json to_json(const RunResult& r);
RunResult run_result_from_json(const Json& j);

/// Non-finite doubles are written as the strings "nan", "inf", "-inf".
std::string serialize(const RunResult& r);
RunResult parse_run_result(const std::string& text);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

/// Header and one row per record; the last column only for extended runs.
void write_trace_csv(std::ostream& os, const std::vector<IterationRecord>& trace,
                     bool extended);

/// One row per start: index, start, status, end point, f, viol, level, counters.
void write_runs_csv(std::ostream& os, const std::vector<Vector>& starts,
                    const std::vector<SqpResult>& results);

Json summary_to_json(const BatchSummary& summary, const std::vector<Vector>& starts,
                     const std::vector<SqpResult>& results);

/// Sets one SqpConfig field by name. Throws std::invalid_argument naming the
/// key for unknown keys or unparsable values.
void set_config_value(SqpConfig& config, const std::string& key, const std::string& value);

/// Applies "key = value" lines; '#' starts a comment. Throws
/// std::invalid_argument with the line number on malformed lines.
SqpConfig parse_config(const std::string& text, SqpConfig base = {});

/// All fields as key = value lines, readable by parse_config.
std::string format_config(const SqpConfig& config);

/// Level, flags, residuals and witness multipliers.
Json certificate_to_json(const StationarityCertificate& cert);

/// Nodes, bars, supports, loads and parameters; optional areas add the
/// per-bar areas and, with displacements, the stresses.
Json model_to_json(const TrussModel& model, const std::optional<Vector>& areas = std::nullopt,
                   const std::optional<Vector>& displacements = std::nullopt);

}  // namespace mpvc
