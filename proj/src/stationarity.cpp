#include "mpvc/stationarity.hpp"

#include <algorithm>
#include <cmath>

namespace mpvc {

namespace {

double neg_part(double a) { return std::min(a, 0.0); }

double grad_scale(const EvalPoint& pt) {
  return 1.0 + (pt.grad_f.size() ? pt.grad_f.lpNorm<Eigen::Infinity>() : 0.0);
}

IndexList sorted_union(IndexList a, const IndexList& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

IndexList difference(const IndexList& a, const IndexList& b) {
  IndexList out;
  for (int i : a) {
    if (std::find(b.begin(), b.end(), i) == b.end()) out.push_back(i);
  }
  return out;
}

std::vector<PairRole> roles_for(int nv, const IndexList& W1) {
  std::vector<PairRole> roles(nv, PairRole::P2);
  for (int i : W1) roles[i] = PairRole::P1;
  return roles;
}

bool satisfies_M(const MpvcMultiplier& l, const IndexList& I00, double tol) {
  for (int i : I00) {
    if (std::min(std::abs(l.lambda_H(i)), std::abs(l.lambda_G(i))) > tol) return false;
  }
  return true;
}

}  // namespace

std::string to_string(StationarityLevel level) {
  switch (level) {
    case StationarityLevel::None: return "None";
    case StationarityLevel::Weak: return "Weak";
    case StationarityLevel::M: return "M";
    case StationarityLevel::Q: return "Q";
    case StationarityLevel::QM: return "QM";
    case StationarityLevel::S: return "S";
  }
  return "None";
}

StationarityLevel level_from_string(const std::string& name) {
  for (auto l : {StationarityLevel::None, StationarityLevel::Weak, StationarityLevel::M,
                 StationarityLevel::Q, StationarityLevel::QM, StationarityLevel::S}) {
    if (to_string(l) == name) return l;
  }
  throw std::invalid_argument("unknown stationarity level '" + name + "'");
}

MpvcMultiplier MpvcMultiplier::zero(const ProblemInstance& problem) {
  return {Vector::Zero(problem.num_eq), Vector::Zero(problem.num_ineq),
          Vector::Zero(problem.num_vanishing), Vector::Zero(problem.num_vanishing)};
}

StationarityLevel StationarityCheck::level() const {
  if (m) return StationarityLevel::M;
  if (weak) return StationarityLevel::Weak;
  return StationarityLevel::None;
}

double stationarity_residual(const EvalPoint& pt, const MpvcMultiplier& l) {
  Vector r = pt.grad_f;
  if (pt.h.size()) r += pt.Jh.transpose() * l.lambda_h;
  if (pt.g.size()) r += pt.Jg.transpose() * l.lambda_g;
  if (pt.H.size()) r += -pt.JH.transpose() * l.lambda_H + pt.JG.transpose() * l.lambda_G;
  return r.lpNorm<Eigen::Infinity>();
}

StationarityCheck check_weak_M(const ProblemInstance& problem, const Vector& x,
                               const MpvcMultiplier& lambda, double tol) {
  return check_weak_M(evaluate_point(problem, x), lambda, tol);
}

StationarityCheck check_weak_M(const EvalPoint& pt, const MpvcMultiplier& l, double tol) {
  StationarityCheck c;
  c.feasibility_residual = constraint_violation(pt);
  if (c.feasibility_residual > tol) {
    throw InfeasiblePoint("point violates the constraints by " +
                          std::to_string(c.feasibility_residual));
  }
  if (l.lambda_h.size() != pt.h.size() || l.lambda_g.size() != pt.g.size() ||
      l.lambda_H.size() != pt.H.size() || l.lambda_G.size() != pt.G.size()) {
    throw std::invalid_argument("multiplier dimensions disagree with the problem");
  }
  const IndexSets sets = classify_indices(pt, tol);
  c.stationarity_residual = stationarity_residual(pt, l);

  double sign = 0.0;
  double comp = 0.0;
  for (Eigen::Index i = 0; i < pt.g.size(); ++i) {
    sign = std::max(sign, -l.lambda_g(i));
    comp = std::max(comp, std::abs(l.lambda_g(i) * pt.g(i)));
  }
  for (Eigen::Index i = 0; i < pt.H.size(); ++i) {
    comp = std::max(comp, std::abs(l.lambda_H(i) * pt.H(i)));
    comp = std::max(comp, std::abs(l.lambda_G(i) * pt.G(i)));
  }
  for (int i : sets.I0minus) sign = std::max(sign, -l.lambda_H(i));
  for (int i : sets.I00) sign = std::max(sign, -l.lambda_G(i));
  for (int i : sets.Iplus0) sign = std::max(sign, -l.lambda_G(i));
  c.sign_violation = sign;
  c.complementarity_residual = comp;
  double mres = 0.0;
  for (int i : sets.I00) {
    mres = std::max(mres, std::min(std::abs(l.lambda_H(i)), std::abs(l.lambda_G(i))));
  }
  c.m_residual = mres;
  c.weak = c.stationarity_residual <= tol && sign <= tol && comp <= tol;
  c.m = c.weak && mres <= tol;
  return c;
}

LinProgram build_direction_lp(const EvalPoint& pt, const std::vector<PairRole>& roles) {
  const auto n = pt.x.size();
  const auto ne = pt.h.size();
  const auto ni = pt.g.size();
  const int nv = static_cast<int>(pt.H.size());
  if (static_cast<int>(roles.size()) != nv) {
    throw std::invalid_argument("direction LP needs one role per vanishing pair");
  }
  int n1 = 0;
  int nrows = 0;
  for (auto r : roles) {
    if (r == PairRole::P1) ++n1;
    nrows += r == PairRole::P2 ? 2 : (r == PairRole::HOnly ? 1 : 0);
  }
  LinProgram lp;
  lp.c = pt.grad_f;
  lp.Aeq.resize(ne + n1, n);
  lp.beq = Vector::Zero(ne + n1);
  if (ne) lp.Aeq.topRows(ne) = pt.Jh;
  lp.Ain.resize(ni + nrows, n);
  lp.bin.resize(ni + nrows);
  for (Eigen::Index i = 0; i < ni; ++i) {
    lp.Ain.row(i) = pt.Jg.row(i);
    lp.bin(i) = -neg_part(pt.g(i));
  }
  Eigen::Index req = ne;
  Eigen::Index rin = ni;
  for (int i = 0; i < nv; ++i) {
    switch (roles[i]) {
      case PairRole::P1:
        lp.Aeq.row(req++) = -pt.JH.row(i);
        break;
      case PairRole::P2:
        lp.Ain.row(rin) = -pt.JH.row(i);
        lp.bin(rin++) = -neg_part(-pt.H(i));
        lp.Ain.row(rin) = pt.JG.row(i);
        lp.bin(rin++) = -neg_part(pt.G(i));
        break;
      case PairRole::HOnly:
        lp.Ain.row(rin) = -pt.JH.row(i);
        lp.bin(rin++) = -neg_part(-pt.H(i));
        break;
    }
  }
  lp.lower = Vector::Constant(n, -1.0);
  lp.upper = Vector::Constant(n, 1.0);
  return lp;
}

LinProgram build_lp_correction(const EvalPoint& pt, const IndexList& W1) {
  return build_direction_lp(pt, roles_for(static_cast<int>(pt.H.size()), W1));
}

MpvcMultiplier direction_lp_multiplier(const EvalPoint& pt,
                                       const std::vector<PairRole>& roles,
                                       const SolveResult& result) {
  const auto ne = pt.h.size();
  const auto ni = pt.g.size();
  const int nv = static_cast<int>(pt.H.size());
  MpvcMultiplier l{result.mu_eq.head(ne), result.mu_in.head(ni), Vector::Zero(nv),
                   Vector::Zero(nv)};
  Eigen::Index req = ne;
  Eigen::Index rin = ni;
  for (int i = 0; i < nv; ++i) {
    switch (roles[i]) {
      case PairRole::P1:
        l.lambda_H(i) = result.mu_eq(req++);
        break;
      case PairRole::P2:
        l.lambda_H(i) = result.mu_in(rin++);
        l.lambda_G(i) = result.mu_in(rin++);
        break;
      case PairRole::HOnly:
        l.lambda_H(i) = result.mu_in(rin++);
        break;
    }
  }
  return l;
}

namespace {

struct LpOutcome {
  double optimum = 0.0;
  MpvcMultiplier lambda;
};

LpOutcome solve_direction(const EvalPoint& pt, const std::vector<PairRole>& roles) {
  const SolveResult res = solve_lp(build_direction_lp(pt, roles));
  if (!res.optimal()) {
    throw std::runtime_error("direction LP failed with status " + to_string(res.status));
  }
  return {res.objective, direction_lp_multiplier(pt, roles, res)};
}

QTest q_test(const EvalPoint& pt, const IndexSets& sets, const IndexList& beta1,
             double tol) {
  QTest t;
  t.beta1 = beta1;
  std::sort(t.beta1.begin(), t.beta1.end());
  t.beta2 = difference(sets.I00, t.beta1);
  const int nv = static_cast<int>(pt.H.size());
  const auto over = solve_direction(pt, roles_for(nv, sorted_union(sets.I0plus, t.beta1)));
  const auto under = solve_direction(pt, roles_for(nv, sorted_union(sets.I0plus, t.beta2)));
  t.optimum_beta1 = over.optimum;
  t.optimum_beta2 = under.optimum;
  t.lambda_over = over.lambda;
  t.lambda_under = under.lambda;
  t.q = over.optimum >= -tol && under.optimum >= -tol;
  t.over_is_M = satisfies_M(over.lambda, sets.I00, tol);
  t.under_is_M = satisfies_M(under.lambda, sets.I00, tol);
  return t;
}

}  // namespace

QTest check_Q_via_LP(const ProblemInstance& problem, const Vector& x,
                     const IndexList& beta1, double tol) {
  const EvalPoint pt = evaluate_point(problem, x);
  const double viol = constraint_violation(pt);
  if (viol > tol) {
    throw InfeasiblePoint("point violates the constraints by " + std::to_string(viol));
  }
  const IndexSets sets = classify_indices(pt, tol);
  for (int i : beta1) {
    if (std::find(sets.I00.begin(), sets.I00.end(), i) == sets.I00.end()) {
      throw std::invalid_argument("beta1 must be a subset of the bi-active set");
    }
  }
  return q_test(pt, sets, beta1, tol);
}

StationarityCertificate certificate_from_multiplier(const ProblemInstance& problem,
                                                    const Vector& x,
                                                    const MpvcMultiplier& lambda,
                                                    double rel_tol) {
  const EvalPoint pt = evaluate_point(problem, x);
  StationarityCertificate cert;
  cert.x = x;
  cert.tol = rel_tol * grad_scale(pt);
  cert.feasibility_residual = constraint_violation(pt);
  if (cert.feasibility_residual > cert.tol) {
    cert.note = "infeasible point";
    return cert;
  }
  const StationarityCheck c = check_weak_M(pt, lambda, cert.tol);
  cert.weak = c.weak;
  cert.m = c.m;
  cert.level = c.level();
  cert.stationarity_residual = c.stationarity_residual;
  cert.complementarity_residual = c.complementarity_residual;
  cert.witnesses.push_back(lambda);
  return cert;
}

StationarityCertificate certify(const ProblemInstance& problem, const Vector& x,
                                const std::optional<MpvcMultiplier>& hint,
                                const CertifyOptions& options) {
  const EvalPoint pt = evaluate_point(problem, x);
  StationarityCertificate cert;
  cert.x = x;
  cert.tol = options.rel_tol * grad_scale(pt);
  const double tol = cert.tol;
  cert.feasibility_residual = constraint_violation(pt);
  if (cert.feasibility_residual > tol) {
    cert.note = "infeasible point";
    return cert;
  }
  const IndexSets sets = classify_indices(pt, tol);
  cert.stationarity_residual = std::numeric_limits<double>::infinity();

  auto absorb = [&](const MpvcMultiplier& l) {
    const StationarityCheck c = check_weak_M(pt, l, tol);
    cert.weak = cert.weak || c.weak;
    cert.m = cert.m || c.m;
    cert.stationarity_residual = std::min(cert.stationarity_residual, c.stationarity_residual);
    cert.complementarity_residual = c.complementarity_residual;
    return c;
  };
  if (hint) {
    absorb(*hint);
    cert.witnesses.push_back(*hint);
  }

  std::vector<IndexList> partitions = {{}, sets.I00};
  if (options.exhaustive && !sets.I00.empty() && sets.I00.size() <= 10) {
    partitions.clear();
    const unsigned count = 1u << sets.I00.size();
    for (unsigned mask = 0; mask < count; ++mask) {
      IndexList b1;
      for (std::size_t j = 0; j < sets.I00.size(); ++j) {
        if (mask & (1u << j)) b1.push_back(sets.I00[j]);
      }
      partitions.push_back(b1);
    }
  }
  if (sets.I00.empty()) partitions.resize(1);

  cert.lp_margin = 0.0;
  bool have_q = false;
  for (const auto& beta1 : partitions) {
    const QTest t = q_test(pt, sets, beta1, tol);
    cert.lp_margin = std::min({cert.lp_margin, t.optimum_beta1, t.optimum_beta2});
    // A single LP with optimum zero still yields a weak multiplier.
    if (t.optimum_beta1 >= -tol) absorb(t.lambda_over);
    if (t.optimum_beta2 >= -tol) absorb(t.lambda_under);
    if (!t.q) continue;
    const auto c_over = check_weak_M(pt, t.lambda_over, tol);
    const auto c_under = check_weak_M(pt, t.lambda_under, tol);
    if (!(c_over.weak && c_under.weak)) continue;
    const bool qm = c_over.m || c_under.m;
    if (!have_q || (qm && !cert.qm)) {
      cert.q = true;
      cert.qm = qm;
      cert.beta1 = t.beta1;
      cert.beta2 = t.beta2;
      cert.witnesses.push_back(t.lambda_over);
      cert.witnesses.push_back(t.lambda_under);
      have_q = true;
    }
    if (cert.qm) break;
  }

  // S: the KKT multiplier exists iff the LP with lambda^G = 0 on I00 has optimum 0.
  {
    std::vector<PairRole> roles(pt.H.size(), PairRole::P2);
    for (int i : sets.I0plus) roles[i] = PairRole::P1;
    for (int i : sets.I00) roles[i] = PairRole::HOnly;
    const auto s = solve_direction(pt, roles);
    if (s.optimum >= -tol) {
      const auto c = absorb(s.lambda);
      if (c.m) {
        cert.s = true;
        cert.witnesses.push_back(s.lambda);
      }
    }
  }

  if (cert.s && cert.qm) {
    cert.level = StationarityLevel::S;
  } else if (cert.qm && cert.m) {
    cert.level = StationarityLevel::QM;
  } else if (cert.q && cert.m) {
    cert.level = StationarityLevel::Q;
  } else if (cert.m) {
    cert.level = StationarityLevel::M;
  } else if (cert.weak) {
    cert.level = StationarityLevel::Weak;
  }
  if (!std::isfinite(cert.stationarity_residual)) cert.stationarity_residual = 0.0;
  if (problem.num_vanishing > 0) cert.note = "MFCQ of the LP constraints is not verified";
  return cert;
}

}  // namespace mpvc
