#include "mpvc/io.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mpvc {

namespace {

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!same(a(i), b(i))) return false;
  }
  return true;
}

Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double read_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  throw std::invalid_argument("not a number: '" + s + "'");
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

Vector read_vector(const Json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = read_number(j[i]);
  return v;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument(key + ": cannot parse '" + text + "' as a number");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  int v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument(key + ": cannot parse '" + text + "' as an integer");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

bool operator==(const RunResult& a, const RunResult& b) {
  return a.problem == b.problem && a.algorithm == b.algorithm && same(a.x0, b.x0) &&
         a.status == b.status && a.message == b.message && same(a.x, b.x) && same(a.f, b.f) &&
         same(a.viol, b.viol) && same(a.rho, b.rho) && a.level == b.level &&
         a.weak == b.weak && a.m == b.m && a.q == b.q && a.qm == b.qm && a.s == b.s &&
         a.beta1 == b.beta1 && a.beta2 == b.beta2 &&
         same(a.stationarity_residual, b.stationarity_residual) &&
         same(a.complementarity_residual, b.complementarity_residual) &&
         same(a.feasibility_residual, b.feasibility_residual) &&
         same(a.lp_margin, b.lp_margin) && same(a.cert_tol, b.cert_tol) &&
         a.cert_note == b.cert_note && a.outer_iterations == b.outer_iterations &&
         a.N_k == b.N_k && a.sum_j == b.sum_j && a.f_evals == b.f_evals &&
         a.grad_evals == b.grad_evals && a.corrections == b.corrections &&
         a.invariants_ok == b.invariants_ok && a.invariant_messages == b.invariant_messages &&
         same(a.wall_seconds, b.wall_seconds);
}

RunResult make_run_result(const std::string& problem, Algorithm algorithm, const Vector& x0,
                          const SqpResult& result) {
  RunResult r;
  r.problem = problem;
  r.algorithm = to_string(algorithm);
  r.x0 = x0;
  r.status = to_string(result.status);
  r.message = result.message;
  r.x = result.x;
  r.f = result.f;
  r.viol = result.viol;
  r.rho = result.rho;
  const auto& c = result.certificate;
  r.level = to_string(c.level);
  r.weak = c.weak;
  r.m = c.m;
  r.q = c.q;
  r.qm = c.qm;
  r.s = c.s;
  r.beta1 = c.beta1;
  r.beta2 = c.beta2;
  r.stationarity_residual = c.stationarity_residual;
  r.complementarity_residual = c.complementarity_residual;
  r.feasibility_residual = c.feasibility_residual;
  r.lp_margin = c.lp_margin;
  r.cert_tol = c.tol;
  r.cert_note = c.note;
  r.outer_iterations = result.counters.outer_iterations;
  r.N_k = result.counters.N_k;
  r.sum_j = result.counters.sum_j;
  r.f_evals = result.counters.f_evals;
  r.grad_evals = result.counters.grad_evals;
  r.corrections = result.counters.corrections;
  r.invariants_ok = result.invariants.all();
  r.invariant_messages = result.invariants.messages;
  r.wall_seconds = result.wall_seconds;
  return r;
}

Json to_json(const RunResult& r) {
  Json j;
  j["problem"] = r.problem;
  j["algorithm"] = r.algorithm;
  j["x0"] = vector_json(r.x0);
  j["status"] = r.status;
  j["message"] = r.message;
  j["x"] = vector_json(r.x);
  j["f"] = number(r.f);
  j["viol"] = number(r.viol);
  j["rho"] = number(r.rho);
  j["certificate"] = {
      {"level", r.level},
      {"weak", r.weak},
      {"m", r.m},
      {"q", r.q},
      {"qm", r.qm},
      {"s", r.s},
      {"beta1", r.beta1},
      {"beta2", r.beta2},
      {"stationarity_residual", number(r.stationarity_residual)},
      {"complementarity_residual", number(r.complementarity_residual)},
      {"feasibility_residual", number(r.feasibility_residual)},
      {"lp_margin", number(r.lp_margin)},
      {"tol", number(r.cert_tol)},
      {"note", r.cert_note},
  };
  j["counters"] = {
      {"outer_iterations", r.outer_iterations},
      {"N_k", r.N_k},
      {"sum_j", r.sum_j},
      {"f_evals", r.f_evals},
      {"grad_evals", r.grad_evals},
      {"corrections", r.corrections},
  };
  j["invariants"] = {{"ok", r.invariants_ok}, {"messages", r.invariant_messages}};
  j["wall_seconds"] = number(r.wall_seconds);
  return j;
}

RunResult run_result_from_json(const Json& j) {
  RunResult r;
  r.problem = j.at("problem").get<std::string>();
  r.algorithm = j.at("algorithm").get<std::string>();
  r.x0 = read_vector(j.at("x0"));
  r.status = j.at("status").get<std::string>();
  r.message = j.at("message").get<std::string>();
  r.x = read_vector(j.at("x"));
  r.f = read_number(j.at("f"));
  r.viol = read_number(j.at("viol"));
  r.rho = read_number(j.at("rho"));
  const Json& c = j.at("certificate");
  r.level = c.at("level").get<std::string>();
  r.weak = c.at("weak").get<bool>();
  r.m = c.at("m").get<bool>();
  r.q = c.at("q").get<bool>();
  r.qm = c.at("qm").get<bool>();
  r.s = c.at("s").get<bool>();
  r.beta1 = c.at("beta1").get<IndexList>();
  r.beta2 = c.at("beta2").get<IndexList>();
  r.stationarity_residual = read_number(c.at("stationarity_residual"));
  r.complementarity_residual = read_number(c.at("complementarity_residual"));
  r.feasibility_residual = read_number(c.at("feasibility_residual"));
  r.lp_margin = read_number(c.at("lp_margin"));
  r.cert_tol = read_number(c.at("tol"));
  r.cert_note = c.at("note").get<std::string>();
  const Json& k = j.at("counters");
  r.outer_iterations = k.at("outer_iterations").get<int>();
  r.N_k = k.at("N_k").get<std::vector<int>>();
  r.sum_j = k.at("sum_j").get<int>();
  r.f_evals = k.at("f_evals").get<int>();
  r.grad_evals = k.at("grad_evals").get<int>();
  r.corrections = k.at("corrections").get<int>();
  r.invariants_ok = j.at("invariants").at("ok").get<bool>();
  r.invariant_messages = j.at("invariants").at("messages").get<std::vector<std::string>>();
  r.wall_seconds = read_number(j.at("wall_seconds"));
  return r;
}

std::string serialize(const RunResult& r) { return to_json(r).dump(2); }

RunResult parse_run_result(const std::string& text) {
  return run_result_from_json(Json::parse(text));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_trace_csv(std::ostream& os, const std::vector<IterationRecord>& trace,
                     bool extended) {
  os << "k,f,viol,delta_N,N_k,j_k,gamma,rho,sigma_max,step_norm";
  if (extended) os << ",correction_dfdk";
  os << '\n';
  for (const auto& r : trace) {
    os << r.k << ',' << format_double(r.f) << ',' << format_double(r.viol) << ','
       << format_double(r.delta_N) << ',' << r.N_k << ',' << r.j_k << ','
       << format_double(r.gamma) << ',' << format_double(r.rho) << ','
       << format_double(r.sigma_max) << ',' << format_double(r.step_norm);
    if (extended) os << ',' << format_double(r.correction_dfdk);
    os << '\n';
  }
}

void write_runs_csv(std::ostream& os, const std::vector<Vector>& starts,
                    const std::vector<SqpResult>& results) {
  const Eigen::Index n = starts.empty() ? 0 : starts.front().size();
  os << "index";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x0_" << i + 1;
  os << ",status";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x_" << i + 1;
  os << ",f,viol,level,k,sum_j,f_evals,grad_evals\n";
  for (std::size_t r = 0; r < results.size(); ++r) {
    const auto& res = results[r];
    os << r;
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(starts[r](i));
    os << ',' << to_string(res.status);
    for (Eigen::Index i = 0; i < n; ++i) {
      os << ',' << (i < res.x.size() ? format_double(res.x(i)) : "nan");
    }
    os << ',' << format_double(res.f) << ',' << format_double(res.viol) << ','
       << to_string(res.certificate.level) << ',' << res.counters.outer_iterations << ','
       << res.counters.sum_j << ',' << res.counters.f_evals << ','
       << res.counters.grad_evals << '\n';
  }
}

Json summary_to_json(const BatchSummary& summary, const std::vector<Vector>& starts,
                     const std::vector<SqpResult>& results) {
  Json j;
  j["runs"] = summary.runs;
  j["solved"] = summary.solved;
  Json clusters = Json::array();
  for (const auto& c : summary.clusters) {
    clusters.push_back({{"point", vector_json(c.point)},
                        {"f", number(c.f)},
                        {"count", c.members.size()},
                        {"members", c.members}});
  }
  j["clusters"] = clusters;
  Json failures = Json::array();
  for (int i : summary.failures) {
    failures.push_back({{"index", i},
                        {"x0", vector_json(starts[i])},
                        {"status", to_string(results[i].status)},
                        {"message", results[i].message}});
  }
  j["failures"] = failures;
  j["status_counts"] = summary.status_counts;
  double wall = 0.0;
  for (const auto& r : results) wall += r.wall_seconds;
  j["total_run_seconds"] = wall;
  return j;
}

void set_config_value(SqpConfig& c, const std::string& key, const std::string& value) {
  auto d = [&](double& field) { field = parse_double(key, value); };
  auto i = [&](int& field) { field = parse_int(key, value); };
  if (key == "zeta") d(c.zeta);
  else if (key == "rho0") d(c.rho0);
  else if (key == "rho_bar") d(c.rho_bar);
  else if (key == "xi") d(c.xi);
  else if (key == "xi1") d(c.xi1);
  else if (key == "xi2") d(c.xi2);
  else if (key == "gamma_ratio") d(c.gamma_ratio);
  else if (key == "sigma0") d(c.sigma0);
  else if (key == "eps_C") d(c.eps_C);
  else if (key == "eps_1") d(c.eps_1);
  else if (key == "tau_act") d(c.tau_act);
  else if (key == "max_outer") i(c.max_outer);
  else if (key == "max_restarts") i(c.max_restarts);
  else if (key == "max_backtracks") i(c.max_backtracks);
  else if (key == "mu") d(c.mu);
  else if (key == "alpha_ratio") d(c.alpha_ratio);
  else if (key == "eps_init") d(c.eps_init);
  else if (key == "B_update") {
    try {
      c.B_update = b_update_from_string(value);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument(key + ": unknown policy '" + value + "'");
    }
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

SqpConfig parse_config(const std::string& text, SqpConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

std::string format_config(const SqpConfig& c) {
  std::ostringstream os;
  auto d = [&](const char* k, double v) { os << k << " = " << format_double(v) << '\n'; };
  auto i = [&](const char* k, int v) { os << k << " = " << v << '\n'; };
  d("zeta", c.zeta);
  d("rho0", c.rho0);
  d("rho_bar", c.rho_bar);
  d("xi", c.xi);
  d("xi1", c.xi1);
  d("xi2", c.xi2);
  d("gamma_ratio", c.gamma_ratio);
  d("sigma0", c.sigma0);
  d("eps_C", c.eps_C);
  d("eps_1", c.eps_1);
  d("tau_act", c.tau_act);
  i("max_outer", c.max_outer);
  i("max_restarts", c.max_restarts);
  i("max_backtracks", c.max_backtracks);
  os << "B_update = " << to_string(c.B_update) << '\n';
  d("mu", c.mu);
  d("alpha_ratio", c.alpha_ratio);
  d("eps_init", c.eps_init);
  return os.str();
}

Json certificate_to_json(const StationarityCertificate& c) {
  Json j;
  j["x"] = vector_json(c.x);
  j["level"] = to_string(c.level);
  j["weak"] = c.weak;
  j["m"] = c.m;
  j["q"] = c.q;
  j["qm"] = c.qm;
  j["s"] = c.s;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["stationarity_residual"] = number(c.stationarity_residual);
  j["complementarity_residual"] = number(c.complementarity_residual);
  j["feasibility_residual"] = number(c.feasibility_residual);
  j["lp_margin"] = number(c.lp_margin);
  j["tol"] = number(c.tol);
  j["note"] = c.note;
  Json w = Json::array();
  for (const auto& l : c.witnesses) {
    w.push_back({{"lambda_h", vector_json(l.lambda_h)},
                 {"lambda_g", vector_json(l.lambda_g)},
                 {"lambda_H", vector_json(l.lambda_H)},
                 {"lambda_G", vector_json(l.lambda_G)}});
  }
  j["witnesses"] = w;
  return j;
}

Json model_to_json(const TrussModel& model, const std::optional<Vector>& areas,
                   const std::optional<Vector>& displacements) {
  Json j;
  j["name"] = model.name;
  Json nodes = Json::array();
  for (const auto& p : model.nodes) nodes.push_back({number(p(0)), number(p(1))});
  j["nodes"] = nodes;
  Json bars = Json::array();
  for (const auto& [a, b] : model.bars) bars.push_back({a, b});
  j["bars"] = bars;
  j["fixed"] = model.fixed;
  Json loads = Json::array();
  for (std::size_t k = 0; k < model.nodes.size(); ++k) {
    const double fx = model.dof_x[k] >= 0 ? model.load(model.dof_x[k]) : 0.0;
    const double fy = model.dof_y[k] >= 0 ? model.load(model.dof_y[k]) : 0.0;
    if (fx != 0.0 || fy != 0.0) loads.push_back({{"node", k}, {"fx", fx}, {"fy", fy}});
  }
  j["loads"] = loads;
  j["lengths"] = vector_json(model.lengths);
  j["E"] = model.E;
  j["a_max"] = model.a_max;
  j["compliance_cap"] = model.compliance_cap;
  j["stress_cap"] = model.stress_cap;
  if (areas) {
    j["areas"] = vector_json(*areas);
    j["volume"] = model.volume(*areas);
    if (displacements) {
      j["compliance"] = model.load.dot(*displacements);
      j["stresses"] = vector_json(model.stresses(*displacements));
    }
  }
  return j;
}

}  // namespace mpvc
