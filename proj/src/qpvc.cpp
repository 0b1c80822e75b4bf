#include "mpvc/qpvc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace mpvc {

namespace {

constexpr double kDeltaIncreaseTol = 1e-10;
constexpr int kMaxPiecesPerEpoch = 100000;

IndexList sorted_union(IndexList a, const IndexList& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

IndexList intersect(const IndexList& a, const IndexList& b) {
  IndexList out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexList difference(const IndexList& a, const IndexList& b) {
  IndexList out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

struct PieceSolve {
  Vector s;
  double delta = 0.0;
  double objective = 0.0;
  PieceMultiplier lambda;
};

PieceSolve solve_piece(const AuxiliaryProblem& aux, const Partition& part) {
  const QuadProgram qp = build_piece_qp(aux, part);
  const SolveResult res = solve_qp(qp);
  if (!res.optimal()) {
    throw std::runtime_error("piece QP failed with status " + to_string(res.status));
  }
  PieceSolve out;
  out.s = res.z.head(aux.n());
  out.delta = res.z(aux.n());
  out.objective = res.objective;
  out.lambda = piece_multiplier(aux, part, res);
  return out;
}

}  // namespace

Theta choose_theta(const PointValues& pt) {
  Theta th;
  th.g = Vector::Zero(pt.g.size());
  for (Eigen::Index i = 0; i < pt.g.size(); ++i) th.g(i) = pt.g(i) > 0 ? 1.0 : 0.0;
  const auto nv = pt.H.size();
  th.H = Vector::Zero(nv);
  th.G = Vector::Zero(nv);
  for (Eigen::Index i = 0; i < nv; ++i) {
    const Vec2 F = pt.F(static_cast<int>(i));
    if (dist_to_branch(F, ConeBranch::P) == 0.0) continue;
    if (dist_to_branch(F, ConeBranch::P1) <= dist_to_branch(F, ConeBranch::P2)) {
      th.H(i) = 1.0;
    } else {
      th.G(i) = 1.0;
    }
  }
  return th;
}

Vec2 AuxiliaryProblem::transformed_row(int i, const Vector& s, double delta) const {
  const double w1 = delta * theta.H(i) * pt.H(i) - pt.H(i) - pt.JH.row(i).dot(s);
  const double w2 = -delta * theta.G(i) * pt.G(i) + pt.G(i) + pt.JG.row(i).dot(s);
  return {w1, w2};
}

double AuxiliaryProblem::objective(const Vector& s, double delta) const {
  return 0.5 * s.dot(B * s) + pt.grad_f.dot(s) + rho * (0.5 * delta * delta + delta);
}

AuxiliaryProblem make_auxiliary(const EvalPoint& pt, const Matrix& B, double rho) {
  AuxiliaryProblem aux;
  aux.pt = pt;
  aux.B = B;
  aux.theta = choose_theta(pt);
  aux.rho = rho;
  return aux;
}

bool Partition::contains(int i) const {
  return std::binary_search(V1.begin(), V1.end(), i);
}

PieceMultiplier PieceMultiplier::zero(const AuxiliaryProblem& aux) {
  PieceMultiplier m;
  m.lambda_h = Vector::Zero(aux.num_eq());
  m.lambda_g = Vector::Zero(aux.num_ineq());
  m.lambda_F = Matrix::Zero(aux.num_vanishing(), 2);
  return m;
}

PointSets classify_point(const AuxiliaryProblem& aux, const Vector& s, double delta,
                         double tol) {
  PointSets sets;
  for (int i = 0; i < aux.num_vanishing(); ++i) {
    const Vec2 w = aux.transformed_row(i, s, delta);
    if (std::abs(w(0)) > tol) continue;
    if (w(1) > tol) {
      sets.I1.push_back(i);
    } else if (w(1) >= -tol) {
      sets.I00.push_back(i);
    } else {
      sets.I0minus.push_back(i);
    }
  }
  return sets;
}

QuadProgram build_piece_qp(const AuxiliaryProblem& aux, const Partition& part) {
  const int n = aux.n();
  const int ne = aux.num_eq();
  const int ni = aux.num_ineq();
  const int nv = aux.num_vanishing();
  const int n1 = static_cast<int>(part.V1.size());
  const int n2 = nv - n1;
  const auto& pt = aux.pt;

  QuadProgram qp;
  qp.H = Matrix::Zero(n + 1, n + 1);
  qp.H.topLeftCorner(n, n) = aux.B;
  qp.H(n, n) = aux.rho;
  qp.c.resize(n + 1);
  qp.c.head(n) = pt.grad_f;
  qp.c(n) = aux.rho;

  qp.Aeq = Matrix::Zero(ne + n1, n + 1);
  qp.beq.resize(ne + n1);
  for (int i = 0; i < ne; ++i) {
    qp.Aeq.row(i).head(n) = pt.Jh.row(i);
    qp.Aeq(i, n) = -pt.h(i);
    qp.beq(i) = -pt.h(i);
  }
  for (int r = 0; r < n1; ++r) {
    const int i = part.V1[r];
    qp.Aeq.row(ne + r).head(n) = pt.JH.row(i);
    qp.Aeq(ne + r, n) = -aux.theta.H(i) * pt.H(i);
    qp.beq(ne + r) = -pt.H(i);
  }

  qp.Ain = Matrix::Zero(ni + 2 * n2 + 1, n + 1);
  qp.bin.resize(ni + 2 * n2 + 1);
  for (int i = 0; i < ni; ++i) {
    qp.Ain.row(i).head(n) = pt.Jg.row(i);
    qp.Ain(i, n) = -aux.theta.g(i) * pt.g(i);
    qp.bin(i) = -pt.g(i);
  }
  int r = ni;
  for (int i = 0; i < nv; ++i) {
    if (part.contains(i)) continue;
    qp.Ain.row(r).head(n) = -pt.JH.row(i);
    qp.Ain(r, n) = aux.theta.H(i) * pt.H(i);
    qp.bin(r) = pt.H(i);
    ++r;
    qp.Ain.row(r).head(n) = pt.JG.row(i);
    qp.Ain(r, n) = -aux.theta.G(i) * pt.G(i);
    qp.bin(r) = -pt.G(i);
    ++r;
  }
  qp.Ain(r, n) = -1.0;
  qp.bin(r) = 0.0;
  return qp;
}

PieceMultiplier piece_multiplier(const AuxiliaryProblem& aux, const Partition& part,
                                 const SolveResult& result) {
  PieceMultiplier m = PieceMultiplier::zero(aux);
  const int ne = aux.num_eq();
  const int ni = aux.num_ineq();
  m.lambda_h = result.mu_eq.head(ne);
  for (std::size_t r = 0; r < part.V1.size(); ++r) {
    m.lambda_F(part.V1[r], 0) = -result.mu_eq(ne + static_cast<Eigen::Index>(r));
  }
  m.lambda_g = result.mu_in.head(ni);
  int r = ni;
  for (int i = 0; i < aux.num_vanishing(); ++i) {
    if (part.contains(i)) continue;
    m.lambda_F(i, 0) = result.mu_in(r++);
    m.lambda_F(i, 1) = result.mu_in(r++);
  }
  m.lambda_delta = result.mu_in(r);
  return m;
}

double min_delta(const AuxiliaryProblem& aux, const Partition& part) {
  const QuadProgram qp = build_piece_qp(aux, part);
  LinProgram lp;
  lp.c = Vector::Unit(aux.n() + 1, aux.n());
  lp.Aeq = qp.Aeq;
  lp.beq = qp.beq;
  lp.Ain = qp.Ain;
  lp.bin = qp.bin;
  const SolveResult res = solve_lp(lp);
  switch (res.status) {
    case SolveStatus::Optimal: return res.objective;
    case SolveStatus::Infeasible: return std::numeric_limits<double>::infinity();
    default:
      throw std::logic_error("min_delta LP failed with status " + to_string(res.status));
  }
}

bool is_solution_of_piece(const AuxiliaryProblem& aux, const Partition& part,
                          const Vector& s, double delta, double tol) {
  const double obj = aux.objective(s, delta);
  const PieceSolve sol = solve_piece(aux, part);
  return sol.objective >= obj - tol * (1.0 + std::abs(obj));
}

std::string to_string(QpvcStatus status) {
  return status == QpvcStatus::QMStationary ? "QMStationary" : "Degenerate";
}

PiecePath solve_qpvc(const AuxiliaryProblem& aux_in) {
  AuxiliaryProblem aux = aux_in;
  PiecePath path;
  const int n = aux.n();
  constexpr double gap_tol = 1e-9;

  while (true) {
    std::vector<PieceStep> steps;
    PieceStep start;
    start.s = Vector::Zero(n);
    start.delta = 1.0;
    start.lambda = PieceMultiplier::zero(aux);
    start.V1.V1 = classify_point(aux, start.s, start.delta).I1;
    start.objective = aux.objective(start.s, start.delta);
    steps.push_back(start);

    {
      const PieceSolve first = solve_piece(aux, start.V1);
      steps.push_back({first.s, first.delta, first.lambda, start.V1, first.objective});
    }
    bool restart = steps[1].delta > steps[0].delta + kDeltaIncreaseTol;
    PieceMultiplier under;
    PieceMultiplier over;
    PointSets sets;

    while (!restart) {
      const PieceStep& cur = steps.back();
      sets = classify_point(aux, cur.s, cur.delta);
      const std::vector<IndexList> candidates = {
          sorted_union(sets.I1, intersect(sets.I00, cur.V1.V1)),
          sorted_union(sets.I1, difference(sets.I00, cur.V1.V1)),
          sets.I1,
          sorted_union(sets.I1, sets.I00),
      };
      const double obj = aux.objective(cur.s, cur.delta);
      std::map<IndexList, PieceSolve> solved;
      bool moved = false;
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        auto it = solved.find(candidates[c]);
        if (it == solved.end()) {
          it = solved
                   .emplace(candidates[c],
                            solve_piece(aux, Partition{candidates[c]}))
                   .first;
        }
        const PieceSolve& sol = it->second;
        if (sol.objective < obj - gap_tol * (1.0 + std::abs(obj))) {
          steps.push_back({sol.s, sol.delta, sol.lambda, Partition{candidates[c]},
                           sol.objective});
          moved = true;
          break;
        }
        if (c == 2) over = sol.lambda;
        if (c == 3) under = sol.lambda;
      }
      if (!moved) break;
      const auto t = steps.size() - 1;
      if (steps[t].delta > steps[t - 1].delta + kDeltaIncreaseTol) restart = true;
      if (static_cast<int>(t) > kMaxPiecesPerEpoch) {
        throw std::runtime_error("piece walk exceeded its step cap");
      }
    }

    if (!restart) {
      const double delta = steps.back().delta;
      path.under_multiplier = under;
      path.over_multiplier = over;
      if (delta < aux.zeta) {
        path.status = QpvcStatus::QMStationary;
      } else {
        const double d1 = min_delta(aux, Partition{sets.I1});
        const double d2 = min_delta(aux, Partition{sorted_union(sets.I1, sets.I00)});
        if (std::min(d1, d2) < aux.zeta) {
          restart = true;
        } else {
          path.status = QpvcStatus::Degenerate;
        }
      }
      if (!restart) {
        path.steps = std::move(steps);
        path.final_rho = aux.rho;
        return path;
      }
    }

    path.abandoned.push_back(std::move(steps));
    path.abandoned_rho.push_back(aux.rho);
    if (++path.restarts > aux.max_restarts) {
      throw RestartLimitError("penalty escalation exceeded the restart limit");
    }
    aux.rho *= aux.rho_bar;
  }
}

}  // namespace mpvc
