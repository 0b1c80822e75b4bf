#include "mpvc/sqp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace mpvc {

namespace {

constexpr double kZeroStep = 1e-12;
constexpr double kDeltaIncreaseTol = 1e-10;
constexpr double kPieceFeasTol = 1e-8;
constexpr double kDescentSlack = 1e-9;
constexpr double kMeritRoundoff = 16 * std::numeric_limits<double>::epsilon();

double pos(double a) { return std::max(a, 0.0); }

PointValues linearize(const EvalPoint& pt, const Vector& s) {
  PointValues v;
  v.x = pt.x + s;
  v.f = pt.f + pt.grad_f.dot(s);
  v.h = pt.h.size() ? Vector(pt.h + pt.Jh * s) : Vector();
  v.g = pt.g.size() ? Vector(pt.g + pt.Jg * s) : Vector();
  v.H = pt.H.size() ? Vector(pt.H + pt.JH * s) : Vector();
  v.G = pt.G.size() ? Vector(pt.G + pt.JG * s) : Vector();
  return v;
}

std::vector<Vector> path_points(const PiecePath& path) {
  std::vector<Vector> pts;
  pts.reserve(path.steps.size());
  for (const auto& st : path.steps) pts.push_back(st.s);
  return pts;
}

void fail(InvariantReport& report, bool& flag, const std::string& what) {
  flag = false;
  if (report.messages.size() < 50) report.messages.push_back(what);
}

}  // namespace

PenaltyParams PenaltyParams::initial(const ProblemInstance& problem, double sigma0,
                                     double xi1, double xi2) {
  return {Vector::Constant(problem.num_eq, sigma0), Vector::Constant(problem.num_ineq, sigma0),
          Vector::Constant(problem.num_vanishing, sigma0), xi1, xi2};
}

double PenaltyParams::max() const {
  double m = 0.0;
  for (const Vector* v : {&sigma_h, &sigma_g, &sigma_F}) {
    if (v->size()) m = std::max(m, v->maxCoeff());
  }
  return m;
}

LambdaTilde lambda_tilde(const PiecePath& path) {
  if (path.N() < 1) throw std::invalid_argument("lambda_tilde needs a path with N >= 1");
  const auto& first = path.steps[1].lambda;
  LambdaTilde lt{Vector::Zero(first.lambda_h.size()), Vector::Zero(first.lambda_g.size()),
                 Vector::Zero(first.lambda_F.rows())};
  for (int t = 1; t <= path.N(); ++t) {
    const auto& l = path.steps[t].lambda;
    lt.h = lt.h.cwiseMax(l.lambda_h.cwiseAbs());
    lt.g = lt.g.cwiseMax(l.lambda_g.cwiseAbs());
    if (l.lambda_F.rows()) lt.F = lt.F.cwiseMax(l.lambda_F.cwiseAbs().rowwise().maxCoeff());
  }
  return lt;
}

PenaltyParams update_penalties(const PenaltyParams& prev, const PiecePath& path) {
  const LambdaTilde lt = lambda_tilde(path);
  PenaltyParams next = prev;
  auto rule = [&](Vector& sigma, const Vector& lam) {
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
      if (sigma(i) < prev.xi1 * lam(i)) sigma(i) = prev.xi2 * lam(i);
    }
  };
  rule(next.sigma_h, lt.h);
  rule(next.sigma_g, lt.g);
  rule(next.sigma_F, lt.F);
  return next;
}

bool penalty_dominates(const PenaltyParams& sigma, const LambdaTilde& lt) {
  return (sigma.sigma_h.array() >= lt.h.array()).all() &&
         (sigma.sigma_g.array() >= lt.g.array()).all() &&
         (sigma.sigma_F.array() >= lt.F.array()).all();
}

std::string to_string(BUpdate policy) {
  return policy == BUpdate::DampedBFGS ? "DampedBFGS" : "Identity";
}

BUpdate b_update_from_string(const std::string& name) {
  if (name == "DampedBFGS") return BUpdate::DampedBFGS;
  if (name == "Identity") return BUpdate::Identity;
  throw std::invalid_argument("B_update must be DampedBFGS or Identity, got '" + name + "'");
}

void SqpConfig::validate() const {
  auto open01 = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) {
      throw std::invalid_argument(std::string(name) + " must lie in (0,1)");
    }
  };
  open01(zeta, "zeta");
  open01(xi, "xi");
  open01(gamma_ratio, "gamma_ratio");
  open01(mu, "mu");
  open01(alpha_ratio, "alpha_ratio");
  if (!(rho0 > 0.0)) throw std::invalid_argument("rho0 must be positive");
  if (!(rho_bar > 1.0)) throw std::invalid_argument("rho_bar must exceed 1");
  if (!(xi1 > 1.0 && xi2 > xi1)) throw std::invalid_argument("xi1, xi2 need 1 < xi1 < xi2");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");
  if (!(eps_C >= 0.0)) throw std::invalid_argument("eps_C must be nonnegative");
  if (!(eps_1 >= 0.0)) throw std::invalid_argument("eps_1 must be nonnegative");
  if (!(tau_act >= 0.0)) throw std::invalid_argument("tau_act must be nonnegative");
  if (!(eps_init >= 0.0)) throw std::invalid_argument("eps_init must be nonnegative");
  if (max_outer < 0) throw std::invalid_argument("max_outer must be nonnegative");
  if (max_restarts < 0) throw std::invalid_argument("max_restarts must be nonnegative");
  if (max_backtracks < 1) throw std::invalid_argument("max_backtracks must be positive");
}

double penalty_split(const PointValues& v, const PenaltyParams& sigma, const Partition& part) {
  double p = 0.0;
  for (Eigen::Index i = 0; i < v.h.size(); ++i) p += sigma.sigma_h(i) * std::abs(v.h(i));
  for (Eigen::Index i = 0; i < v.g.size(); ++i) p += sigma.sigma_g(i) * pos(v.g(i));
  for (int i = 0; i < static_cast<int>(v.H.size()); ++i) {
    const ConeBranch b = part.contains(i) ? ConeBranch::P1 : ConeBranch::P2;
    p += sigma.sigma_F(i) * dist_to_branch(v.F(i), b);
  }
  return p;
}

double penalty_full(const PointValues& v, const PenaltyParams& sigma) {
  double p = 0.0;
  for (Eigen::Index i = 0; i < v.h.size(); ++i) p += sigma.sigma_h(i) * std::abs(v.h(i));
  for (Eigen::Index i = 0; i < v.g.size(); ++i) p += sigma.sigma_g(i) * pos(v.g(i));
  for (int i = 0; i < static_cast<int>(v.H.size()); ++i) {
    p += sigma.sigma_F(i) * dist_to_branch(v.F(i), ConeBranch::P);
  }
  return p;
}

double merit_hat_phi(const AuxiliaryProblem& aux, const PenaltyParams& sigma,
                     const Partition& part, const Vector& s) {
  const PointValues lin = linearize(aux.pt, s);
  return lin.f + 0.5 * s.dot(aux.B * s) + penalty_split(lin, sigma, part);
}

double merit_phi(const ProblemInstance& problem, const PenaltyParams& sigma,
                 const Partition& part, const Vector& x_base, const Vector& s) {
  const PointValues v = evaluate_values(problem, x_base + s);
  return v.f + penalty_split(v, sigma, part);
}

double merit_Phi(const ProblemInstance& problem, const PenaltyParams& sigma, const Vector& x) {
  return merit_Phi(evaluate_values(problem, x), sigma);
}

double merit_Phi(const PointValues& v, const PenaltyParams& sigma) {
  return v.f + penalty_full(v, sigma);
}

std::vector<double> arc_lengths(const std::vector<Vector>& points) {
  std::vector<double> S(points.size(), 0.0);
  for (std::size_t t = 1; t < points.size(); ++t) {
    S[t] = S[t - 1] + (points[t] - points[t - 1]).norm();
  }
  return S;
}

PathPoint parametrize_path(const std::vector<Vector>& points, double gamma) {
  if (points.size() < 2) throw std::invalid_argument("path needs at least two points");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0,1]");
  const std::vector<double> S = arc_lengths(points);
  const int N = static_cast<int>(points.size()) - 1;
  const double total = S[N];
  if (!(total > 0.0)) throw std::invalid_argument("path has zero length");
  PathPoint p;
  if (gamma == 1.0) {
    p.t = N;
    p.alpha = 1.0;
    p.s = points[N];
    return p;
  }
  const double target = gamma * total;
  int t = 1;
  while (t < N && !(S[t] > target)) ++t;
  p.t = t;
  const double len = S[t] - S[t - 1];
  p.alpha = len > 0.0 ? std::clamp((target - S[t - 1]) / len, 0.0, 1.0) : 1.0;
  p.s = points[t - 1] + p.alpha * (points[t] - points[t - 1]);
  return p;
}

PathPoint parametrize_path(const PiecePath& path, double gamma) {
  return parametrize_path(path_points(path), gamma);
}

LineSearchResult accept_step(const ProblemInstance& problem, const AuxiliaryProblem& aux,
                             const PenaltyParams& sigma, const PiecePath& path,
                             const SqpConfig& config) {
  const std::vector<Vector> pts = path_points(path);
  const Vector& xk = aux.pt.x;
  auto hat_Z = [&](const PathPoint& p) {
    const Partition& part = path.steps[p.t].V1;
    const double z0 = merit_hat_phi(aux, sigma, part, pts[p.t - 1]);
    const double z1 = merit_hat_phi(aux, sigma, part, pts[p.t]);
    return (1.0 - p.alpha) * z0 + p.alpha * z1;
  };

  LineSearchResult res;
  const PathPoint p0 = parametrize_path(pts, 0.0);
  const PointValues v0 = evaluate_values(problem, xk);
  res.value_evals = 1;
  res.Y0 = v0.f + penalty_split(v0, sigma, path.steps[p0.t].V1);
  res.Z0 = hat_Z(p0);
  res.Phi_before = merit_Phi(v0, sigma);
  const double slack = kMeritRoundoff * (1.0 + std::abs(res.Y0));

  double gamma = 1.0;
  for (int j = 1; j <= config.max_backtracks; ++j, gamma *= config.gamma_ratio) {
    PathPoint p = parametrize_path(pts, gamma);
    PointValues v = evaluate_values(problem, xk + p.s);
    ++res.value_evals;
    const double Y = v.f + penalty_split(v, sigma, path.steps[p.t].V1);
    const double Z = hat_Z(p);
    if (Y - res.Y0 <= config.xi * (Z - res.Z0) + slack) {
      res.j = j;
      res.gamma = gamma;
      res.Y = Y;
      res.Z = Z;
      res.x_next = xk + p.s;
      res.point = std::move(p);
      res.Phi_after = merit_Phi(v, sigma);
      res.values_next = std::move(v);
      return res;
    }
  }
  throw BacktrackLimitError("no acceptable step after " + std::to_string(config.max_backtracks) +
                            " reductions");
}

DescentCheck descent_check(const AuxiliaryProblem& aux, const PenaltyParams& sigma,
                           const PiecePath& path) {
  DescentCheck dc;
  const int N = path.N();
  const double base = merit_hat_phi(aux, sigma, path.steps[1].V1, path.steps[0].s);
  const double scale = 1.0 + std::abs(base);
  dc.r0.assign(N + 1, 0.0);
  dc.r1.assign(N + 1, 0.0);
  dc.bound0.assign(N + 1, 0.0);
  dc.bound1.assign(N + 1, 0.0);
  double acc = 0.0;
  for (int t = 1; t <= N; ++t) {
    const Partition& part = path.steps[t].V1;
    dc.bound0[t] = -acc;
    const Vector ds = path.steps[t].s - path.steps[t - 1].s;
    acc += 0.5 * ds.dot(aux.B * ds);
    dc.bound1[t] = -acc;
    dc.r0[t] = merit_hat_phi(aux, sigma, part, path.steps[t - 1].s) - base;
    dc.r1[t] = merit_hat_phi(aux, sigma, part, path.steps[t].s) - base;
    dc.worst_slack = std::max({dc.worst_slack, (dc.r0[t] - dc.bound0[t]) / scale,
                               (dc.r1[t] - dc.bound1[t]) / scale});
  }
  return dc;
}

Vector lagrangian_gradient(const EvalPoint& pt, const MpvcMultiplier& l) {
  Vector r = pt.grad_f;
  if (pt.h.size()) r += pt.Jh.transpose() * l.lambda_h;
  if (pt.g.size()) r += pt.Jg.transpose() * l.lambda_g;
  if (pt.H.size()) r += -pt.JH.transpose() * l.lambda_H + pt.JG.transpose() * l.lambda_G;
  return r;
}

MpvcMultiplier to_mpvc_multiplier(const PieceMultiplier& l) {
  MpvcMultiplier m;
  m.lambda_h = l.lambda_h;
  m.lambda_g = l.lambda_g;
  m.lambda_H = l.lambda_F.rows() ? Vector(l.lambda_F.col(0)) : Vector();
  m.lambda_G = l.lambda_F.rows() ? Vector(l.lambda_F.col(1)) : Vector();
  return m;
}

Matrix update_B(const Matrix& B, const Vector& s, const Vector& y, BUpdate policy) {
  const auto n = B.rows();
  if (policy == BUpdate::Identity) return Matrix::Identity(n, n);
  if (s.norm() <= kZeroStep) return B;
  const Vector Bs = B * s;
  const double sBs = s.dot(Bs);
  if (!(sBs > 0.0)) return Matrix::Identity(n, n);
  const double sy = s.dot(y);
  const double theta = sy >= 0.2 * sBs ? 1.0 : 0.8 * sBs / (sBs - sy);
  const Vector r = theta * y + (1.0 - theta) * Bs;
  const double sr = s.dot(r);
  Matrix next = B - Bs * Bs.transpose() / sBs + r * r.transpose() / sr;
  next = 0.5 * (next + next.transpose());
  Eigen::LLT<Matrix> llt(next);
  if (llt.info() != Eigen::Success || !next.allFinite()) return Matrix::Identity(n, n);
  return next;
}

std::string to_string(SqpStatus status) {
  switch (status) {
    case SqpStatus::Solved: return "Solved";
    case SqpStatus::Degenerate: return "Degenerate";
    case SqpStatus::RestartLimit: return "RestartLimit";
    case SqpStatus::MaxIter: return "MaxIter";
    case SqpStatus::BacktrackLimit: return "BacktrackLimit";
    case SqpStatus::Error: return "Error";
  }
  return "MaxIter";
}

SqpStatus sqp_status_from_string(const std::string& name) {
  for (auto s : {SqpStatus::Solved, SqpStatus::Degenerate, SqpStatus::RestartLimit,
                 SqpStatus::MaxIter, SqpStatus::BacktrackLimit, SqpStatus::Error}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown status '" + name + "'");
}

void check_path_invariants(const AuxiliaryProblem& aux, const PiecePath& path,
                           InvariantReport& report, int k) {
  auto epoch = [&](const std::vector<PieceStep>& steps, bool abandoned) {
    const std::size_t last = abandoned ? steps.size() - 1 : steps.size();
    for (std::size_t t = 1; t < last; ++t) {
      if (steps[t].delta > steps[t - 1].delta + kDeltaIncreaseTol) {
        std::ostringstream os;
        os << "k=" << k << ": delta increased at t=" << t;
        fail(report, report.delta_monotone, os.str());
      }
    }
    for (std::size_t t = 1; t < steps.size(); ++t) {
      const QuadProgram qp = build_piece_qp(aux, steps[t].V1);
      Vector z(aux.n() + 1);
      z << steps[t].s, steps[t].delta;
      double scale = 1.0;
      if (qp.beq.size()) scale = std::max(scale, qp.beq.cwiseAbs().maxCoeff());
      if (qp.bin.size()) scale = std::max(scale, qp.bin.cwiseAbs().maxCoeff());
      const double v = primal_infeasibility(qp.Aeq, qp.beq, qp.Ain, qp.bin, z) / scale;
      report.worst_piece_violation = std::max(report.worst_piece_violation, v);
      if (v > kPieceFeasTol) {
        std::ostringstream os;
        os << "k=" << k << ": piece " << t << " infeasible by " << v;
        fail(report, report.piece_feasible, os.str());
      }
    }
  };
  for (const auto& steps : path.abandoned) epoch(steps, true);
  epoch(path.steps, false);
}

SqpResult run_basic_sqp(const ProblemInstance& problem, const Vector& x0,
                        const SqpConfig& config, const IterationSink& sink) {
  return run_sqp_loop(problem, x0, config, sink, {});
}

SqpResult run_sqp_loop(const ProblemInstance& problem, const Vector& x0,
                       const SqpConfig& config, const IterationSink& sink,
                       const PreStepHook& pre_step) {
  const auto t_start = std::chrono::steady_clock::now();
  config.validate();
  problem.validate();
  if (x0.size() != problem.n) {
    throw std::invalid_argument("x0 has " + std::to_string(x0.size()) + " entries, expected " +
                                std::to_string(problem.n));
  }
  if (!x0.allFinite()) throw std::invalid_argument("x0 must be finite");

  SqpResult res;
  Matrix B = Matrix::Identity(problem.n, problem.n);
  double rho = config.rho0;
  PenaltyParams sigma = PenaltyParams::initial(problem, config.sigma0, config.xi1, config.xi2);
  EvalPoint pt = evaluate_point(problem, x0);
  res.counters.grad_evals = 1;
  res.multiplier = MpvcMultiplier::zero(problem);
  Vector x_prev;
  bool finished = false;

  for (int k = 0; k < config.max_outer && !finished; ++k) {
    IterationRecord rec;
    rec.k = k;
    if (pre_step) {
      PreStep ps;
      try {
        ps = pre_step(pt, sigma, x_prev, k);
      } catch (const BacktrackLimitError& e) {
        res.status = SqpStatus::BacktrackLimit;
        res.message = e.what();
        break;
      }
      res.counters.f_evals += ps.value_evals;
      rec.correction_dfdk = ps.dfdk;
      rec.correction_alpha = ps.alpha;
      rec.eps_k = ps.eps_k;
      if (ps.moved) {
        if (ps.Phi_after > ps.Phi_before + kMeritRoundoff * (1.0 + std::abs(ps.Phi_before))) {
          std::ostringstream os;
          os << "k=" << k << ": correction raised Phi from " << ps.Phi_before << " to "
             << ps.Phi_after;
          fail(res.invariants, res.invariants.correction_monotone, os.str());
        }
        ++res.counters.corrections;
        pt = evaluate_point(problem, ps.x);
        ++res.counters.grad_evals;
      }
    }
    rec.x = pt.x;
    rec.f = pt.f;
    rec.viol = constraint_violation(pt);

    AuxiliaryProblem aux = make_auxiliary(pt, B, rho);
    aux.zeta = config.zeta;
    aux.rho_bar = config.rho_bar;
    aux.max_restarts = config.max_restarts;
    PiecePath path;
    try {
      path = solve_qpvc(aux);
    } catch (const RestartLimitError& e) {
      res.status = SqpStatus::RestartLimit;
      res.message = e.what();
      rec.rho = rho;
      rec.sigma_max = sigma.max();
      if (sink) sink(rec);
      res.trace.push_back(rec);
      break;
    }
    rho = path.final_rho;
    aux.rho = rho;
    check_path_invariants(aux, path, res.invariants, k);

    const Vector& sN = path.s_final();
    rec.delta_N = path.delta_final();
    rec.N_k = path.N();
    rec.rho = rho;
    rec.restarts = path.restarts;
    rec.step_norm = sN.norm();
    res.counters.N_k.push_back(path.N());
    res.multiplier = to_mpvc_multiplier(path.under_multiplier);

    auto emit = [&] {
      rec.sigma_max = sigma.max();
      if (sink) sink(rec);
      res.trace.push_back(rec);
    };

    if (path.status == QpvcStatus::Degenerate) {
      res.status = SqpStatus::Degenerate;
      res.message = "subproblem degenerate: constraint violation cannot be reduced";
      emit();
      break;
    }
    if (rec.step_norm <= kZeroStep ||
        (rec.viol <= config.eps_C && sN.dot(B * sN) <= config.eps_1)) {
      res.status = SqpStatus::Solved;
      emit();
      finished = true;
      break;
    }

    sigma = update_penalties(sigma, path);
    if (!penalty_dominates(sigma, lambda_tilde(path))) {
      fail(res.invariants, res.invariants.penalty_dominance,
           "k=" + std::to_string(k) + ": penalty below multiplier bound");
    }
    const DescentCheck dc = descent_check(aux, sigma, path);
    res.invariants.worst_descent_slack = std::max(res.invariants.worst_descent_slack,
                                                  dc.worst_slack);
    if (dc.worst_slack > kDescentSlack) {
      std::ostringstream os;
      os << "k=" << k << ": merit descent bound violated by " << dc.worst_slack;
      fail(res.invariants, res.invariants.descent, os.str());
    }

    LineSearchResult ls;
    try {
      ls = accept_step(problem, aux, sigma, path, config);
    } catch (const BacktrackLimitError& e) {
      res.status = SqpStatus::BacktrackLimit;
      res.message = e.what();
      emit();
      break;
    }
    if (ls.Phi_after >= ls.Phi_before + kMeritRoundoff * (1.0 + std::abs(ls.Phi_before))) {
      std::ostringstream os;
      os << "k=" << k << ": Phi did not decrease (" << ls.Phi_before << " -> " << ls.Phi_after
         << ")";
      fail(res.invariants, res.invariants.merit_decrease, os.str());
    }
    res.counters.f_evals += ls.value_evals;
    res.counters.sum_j += ls.j;
    ++res.counters.outer_iterations;
    rec.j_k = ls.j;
    rec.gamma = ls.gamma;
    emit();

    EvalPoint next = evaluate_point(problem, ls.x_next);
    ++res.counters.grad_evals;
    const MpvcMultiplier& lam = res.multiplier;
    const Vector y = lagrangian_gradient(next, lam) - lagrangian_gradient(pt, lam);
    B = update_B(B, ls.x_next - pt.x, y, config.B_update);
    x_prev = pt.x;
    pt = std::move(next);
  }

  res.x = pt.x;
  res.f = pt.f;
  res.viol = constraint_violation(pt);
  res.rho = rho;
  res.sigma = sigma;
  try {
    res.certificate = certify(problem, pt.x, res.multiplier);
  } catch (const std::exception& e) {
    res.certificate.x = pt.x;
    res.certificate.note = std::string("certification failed: ") + e.what();
  }
  if (res.status == SqpStatus::MaxIter && res.message.empty()) {
    res.message = "outer iteration limit reached";
  }
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

}  // namespace mpvc
