// Command-line front end: solve, grid, certify and export subcommands.

#include "mpvc/batch.hpp"
#include "mpvc/io.hpp"
#include "mpvc/problems.hpp"
#include "mpvc/stationarity.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

using namespace mpvc;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFailure = 1;

// Bad command-line input; reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string problem = "academic";
  double stress_cap = 100.0;
  std::string algorithm = "basic";
  std::string config_file;
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--problem", c.problem, "academic | academic-constrained | tenbar | cantilever")
      ->capture_default_str();
  app->add_option("--stress-cap", c.stress_cap, "stress cap of the cantilever")
      ->capture_default_str();
  app->add_option("--algorithm", c.algorithm, "basic | extended")->capture_default_str();
  app->add_option("--config", c.config_file, "key = value file with solver settings");
  app->add_option("--set", c.sets, "key=value override (repeatable)");
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw UsageError(std::string(what) + ": cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

NamedProblem load_problem(const Common& c) {
  try {
    return make_named_problem(c.problem, c.stress_cap);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--problem: ") + e.what());
  }
}

Algorithm load_algorithm(const Common& c) {
  try {
    return algorithm_from_string(c.algorithm);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--algorithm: ") + e.what());
  }
}

SqpConfig load_config(const Common& c) {
  SqpConfig cfg;
  try {
    if (!c.config_file.empty()) cfg = parse_config(read_file(c.config_file, "--config"));
  } catch (const std::invalid_argument& e) {
    throw UsageError("--config: " + std::string(e.what()));
  }
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set: expected key=value, got '" + kv + "'");
    try {
      set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw UsageError("--set: " + std::string(e.what()));
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError("config: " + std::string(e.what()));
  }
  return cfg;
}

double parse_number(const std::string& field, const std::string& token) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != token.size()) {
    throw UsageError(field + ": cannot parse '" + token + "' as a number");
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

Vector parse_vector(const std::string& field, const std::string& text, int n) {
  const auto tokens = split(text, ',');
  if (static_cast<int>(tokens.size()) != n) {
    throw UsageError(field + ": expected " + std::to_string(n) + " comma-separated values, got " +
                     std::to_string(tokens.size()));
  }
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = parse_number(field, tokens[i]);
  return v;
}

// Comma-separated values and ranges a:b or a:b:step.
std::vector<double> parse_axis(const std::string& text) {
  std::vector<double> axis;
  for (const auto& tok : split(text, ',')) {
    if (tok.empty()) continue;
    const auto parts = split(tok, ':');
    if (parts.size() == 1) {
      axis.push_back(parse_number("--axis", tok));
      continue;
    }
    if (parts.size() > 3) throw UsageError("--axis: malformed range '" + tok + "'");
    const double a = parse_number("--axis", parts[0]);
    const double b = parse_number("--axis", parts[1]);
    const double step = parts.size() == 3 ? parse_number("--axis", parts[2]) : 1.0;
    if (!(step > 0.0) || b < a) throw UsageError("--axis: malformed range '" + tok + "'");
    const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= count; ++i) axis.push_back(a + static_cast<double>(i) * step);
  }
  return axis;
}

int exit_code(SqpStatus status) {
  switch (status) {
    case SqpStatus::Solved: return 0;
    case SqpStatus::Degenerate: return 3;
    case SqpStatus::RestartLimit: return 4;
    case SqpStatus::MaxIter: return 5;
    case SqpStatus::BacktrackLimit:
    case SqpStatus::Error: return kExitFailure;
  }
  return kExitFailure;
}

int cmd_solve(const Common& c, const std::string& x0_text, const std::string& out,
              const std::string& log, bool quiet) {
  const NamedProblem np = load_problem(c);
  const Algorithm alg = load_algorithm(c);
  const SqpConfig cfg = load_config(c);
  const Vector x0 = x0_text.empty() ? np.default_start
                                    : parse_vector("--x0", x0_text, np.problem.n);
  const SqpResult r = run_algorithm(np.problem, x0, alg, cfg);
  const RunResult rr = make_run_result(np.id, alg, x0, r);
  if (!out.empty()) write_file(out, serialize(rr) + "\n");
  if (!log.empty()) {
    std::ostringstream os;
    write_trace_csv(os, r.trace, alg == Algorithm::Extended);
    write_file(log, os.str());
  }
  if (!quiet) {
    std::printf("status %s  k %d  f %.12g  viol %.3g  level %s  f_evals %d  grad_evals %d  "
                "time %.3fs\n",
                rr.status.c_str(), rr.outer_iterations, rr.f, rr.viol, rr.level.c_str(),
                rr.f_evals, rr.grad_evals, rr.wall_seconds);
    if (np.model) {
      const auto nb = np.model->num_bars();
      std::printf("volume %.12g  f'u %.12g\n", np.model->volume(r.x.head(nb)),
                  np.model->load.dot(r.x.tail(np.model->num_dofs)));
    }
    if (!rr.message.empty()) std::printf("%s\n", rr.message.c_str());
  }
  return exit_code(r.status);
}

int cmd_grid(const Common& c, const std::vector<std::string>& axes_text, int threads,
             double radius, const std::string& summary_path, const std::string& runs_path) {
  const NamedProblem np = load_problem(c);
  const Algorithm alg = load_algorithm(c);
  const SqpConfig cfg = load_config(c);
  std::vector<std::vector<double>> axes;
  if (axes_text.empty()) {
    if (np.problem.n != 2) throw UsageError("--axis: required for problem " + np.id);
    axes = {academic_axis(), academic_axis()};
  } else if (axes_text.size() == 1) {
    axes.assign(np.problem.n, parse_axis(axes_text.front()));
  } else if (static_cast<int>(axes_text.size()) == np.problem.n) {
    for (const auto& t : axes_text) axes.push_back(parse_axis(t));
  } else {
    throw UsageError("--axis: give one axis or one per variable (" +
                     std::to_string(np.problem.n) + ")");
  }
  const auto starts = grid_points(axes);
  const auto results = run_batch(np.problem, starts, alg, cfg, threads);
  const auto summary = summarize(results, radius);
  if (!summary_path.empty()) {
    write_file(summary_path, summary_to_json(summary, starts, results).dump(2) + "\n");
  }
  if (!runs_path.empty()) {
    std::ostringstream os;
    write_runs_csv(os, starts, results);
    write_file(runs_path, os.str());
  }
  std::printf("runs %d  solved %d  failures %zu\n", summary.runs, summary.solved,
              summary.failures.size());
  for (const auto& cl : summary.clusters) {
    std::printf("  %4zu runs -> (", cl.members.size());
    for (Eigen::Index i = 0; i < cl.point.size(); ++i) {
      std::printf(i ? ", %.6g" : "%.6g", cl.point(i));
    }
    std::printf(")  f %.10g\n", cl.f);
  }
  for (const auto& [status, n] : summary.status_counts) {
    if (status != "Solved") std::printf("  %4d runs %s\n", n, status.c_str());
  }
  return 0;
}

int cmd_certify(const Common& c, const std::string& x_text, bool exhaustive, double rel_tol,
                const std::string& out) {
  const NamedProblem np = load_problem(c);
  const Vector x = parse_vector("--x", x_text, np.problem.n);
  CertifyOptions opt;
  opt.rel_tol = rel_tol;
  opt.exhaustive = exhaustive;
  const auto cert = certify(np.problem, x, std::nullopt, opt);
  const std::string text = certificate_to_json(cert).dump(2) + "\n";
  if (out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    write_file(out, text);
    std::printf("level %s\n", to_string(cert.level).c_str());
  }
  return 0;
}

int cmd_export(const Common& c, const std::string& result_path, const std::string& out) {
  const NamedProblem np = load_problem(c);
  if (!np.model) throw UsageError("--problem: export needs a truss problem");
  std::optional<Vector> areas, disp;
  if (!result_path.empty()) {
    RunResult rr;
    try {
      rr = parse_run_result(read_file(result_path, "--result"));
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      throw UsageError("--result: " + std::string(e.what()));
    }
    if (rr.x.size() != np.problem.n) {
      throw UsageError("--result: point has " + std::to_string(rr.x.size()) +
                       " entries, problem has " + std::to_string(np.problem.n));
    }
    areas = rr.x.head(np.model->num_bars());
    disp = rr.x.tail(np.model->num_dofs);
  }
  const std::string text = model_to_json(*np.model, areas, disp).dump(2) + "\n";
  if (out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    write_file(out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver suite for programs with vanishing constraints"};
  app.require_subcommand(1);

  Common solve_c, grid_c, cert_c, export_c;
  std::string x0, out, log, axis_out, runs_out, x_cert, cert_out, result_in, model_out;
  std::vector<std::string> axes;
  bool quiet = false, exhaustive = false;
  int threads = 0;
  double radius = 1e-3, rel_tol = 1e-6;

  auto* solve = app.add_subcommand("solve", "run one solve");
  add_common(solve, solve_c);
  solve->add_option("--x0", x0, "start point, comma separated (default: problem start)");
  solve->add_option("--out", out, "result JSON path");
  solve->add_option("--log", log, "iteration CSV path");
  solve->add_flag("--quiet", quiet, "no summary on stdout");

  auto* grid = app.add_subcommand("grid", "run a grid of start points");
  add_common(grid, grid_c);
  grid->add_option("--axis", axes,
                   "axis values, e.g. -5:10,20; once for all variables or once per variable");
  grid->add_option("--threads", threads, "worker threads (0: OpenMP default)");
  grid->add_option("--radius", radius, "clustering radius")->capture_default_str();
  grid->add_option("--summary", axis_out, "summary JSON path");
  grid->add_option("--runs", runs_out, "per-run CSV path");

  auto* cert = app.add_subcommand("certify", "certify stationarity of a point");
  add_common(cert, cert_c);
  cert->add_option("--x", x_cert, "point, comma separated")->required();
  cert->add_flag("--exhaustive", exhaustive, "try every partition of the bi-active set");
  cert->add_option("--rel-tol", rel_tol, "relative tolerance")->capture_default_str();
  cert->add_option("--out", cert_out, "certificate JSON path (default: stdout)");

  auto* exp = app.add_subcommand("export", "export a truss model as JSON");
  add_common(exp, export_c);
  exp->add_option("--result", result_in, "result JSON whose point supplies areas and stresses");
  exp->add_option("--out", model_out, "model JSON path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve) return cmd_solve(solve_c, x0, out, log, quiet);
    if (*grid) return cmd_grid(grid_c, axes, threads, radius, axis_out, runs_out);
    if (*cert) return cmd_certify(cert_c, x_cert, exhaustive, rel_tol, cert_out);
    if (*exp) return cmd_export(export_c, result_in, model_out);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
