#include "doctest.h"
#include "mpvc/problems.hpp"
#include "mpvc/qpvc.hpp"

#include <cmath>
#include <random>

using namespace mpvc;

namespace {

AuxiliaryProblem academic_aux(double x1, double x2, double rho = 1.0) {
  const auto prob = academic_problem();
  return make_auxiliary(evaluate_point(prob, Vector{{x1, x2}}), Matrix::Identity(2, 2), rho);
}

EvalPoint random_point(std::mt19937& rng, int n, int ne, int ni, int nv) {
  std::normal_distribution<double> nd;
  auto rnd = [&](int r, int c) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = nd(rng);
    return m;
  };
  EvalPoint pt;
  pt.x = Vector::Zero(n);
  pt.grad_f = rnd(n, 1);
  pt.h = rnd(ne, 1);
  pt.g = rnd(ni, 1);
  pt.H = rnd(nv, 1);
  pt.G = rnd(nv, 1);
  std::bernoulli_distribution coin(0.3);
  for (int i = 0; i < nv; ++i) {
    if (coin(rng)) pt.H(i) = 0.0;
    if (coin(rng)) pt.G(i) = 0.0;
  }
  pt.Jh = rnd(ne, n);
  pt.Jg = rnd(ni, n);
  pt.JH = rnd(nv, n);
  pt.JG = rnd(nv, n);
  return pt;
}

double piece_violation(const AuxiliaryProblem& aux, const Partition& part, const Vector& s,
                       double delta) {
  const QuadProgram qp = build_piece_qp(aux, part);
  Vector z(s.size() + 1);
  z << s, delta;
  return primal_infeasibility(qp.Aeq, qp.beq, qp.Ain, qp.bin, z);
}

}  // namespace

TEST_CASE("choose_theta cases") {
  PointValues pt;
  pt.g = Vector{{1.0, 0.0, -2.0}};
  pt.H = Vector{{-1.0, 3.0, 1.0, 2.0}};
  pt.G = Vector{{2.0, -3.0, 2.0, 0.5}};
  const Theta th = choose_theta(pt);
  CHECK(th.g == Vector{{1.0, 0.0, 0.0}});
  // F = (1,2): d(P1)=1 <= d(P2)=3.
  CHECK(th.H(0) == 1.0);
  CHECK(th.G(0) == 0.0);
  // F = (-3,-3) is feasible.
  CHECK(th.H(1) == 0.0);
  CHECK(th.G(1) == 0.0);
  // F = (-1,2): d(P1)=1 <= d(P2)=2.
  CHECK(th.H(2) == 1.0);
  // F = (-2,0.5): d(P2)=0.5 < d(P1)=2.
  CHECK(th.H(3) == 0.0);
  CHECK(th.G(3) == 1.0);
  // Relaxed rows have l1 size d(F_i, P).
  for (int i = 0; i < 4; ++i) {
    const double size = std::abs(th.H(i) * pt.H(i)) + std::abs(th.G(i) * pt.G(i));
    CHECK(size == doctest::Approx(dist_to_branch(pt.F(i), ConeBranch::P)));
  }
}

TEST_CASE("build_piece_qp structure") {
  const auto aux = academic_aux(1, 1);
  const QuadProgram qp = build_piece_qp(aux, Partition{});
  CHECK(qp.Aeq.rows() == 0);
  CHECK(qp.Ain.rows() == 5);
  CHECK(qp.H(2, 2) == 1.0);

  AuxiliaryProblem eq;
  eq.pt.x = Vector::Zero(2);
  eq.pt.grad_f = Vector::Zero(2);
  eq.pt.h = Vector{{2.0}};
  eq.pt.Jh = Matrix{{1.0, 0.0}};
  eq.pt.g = Vector();
  eq.pt.Jg = Matrix(0, 2);
  eq.pt.H = Vector{{-1.0}};
  eq.pt.G = Vector{{0.0}};
  eq.pt.JH = Matrix{{0.0, 1.0}};
  eq.pt.JG = Matrix{{1.0, 1.0}};
  eq.B = Matrix::Identity(2, 2);
  eq.theta = choose_theta(eq.pt);
  const QuadProgram piece = build_piece_qp(eq, Partition{{0}});
  REQUIRE(piece.Aeq.rows() == 2);
  // (1 - delta) 2 + s1 = 0  <=>  s1 - 2 delta = -2.
  CHECK(piece.Aeq.row(0) == Matrix{{1.0, 0.0, -2.0}});
  CHECK(piece.beq(0) == -2.0);
  // (1 - delta)(-1) + grad H s = 0  <=>  s2 + delta = 1.
  CHECK(piece.Aeq.row(1) == Matrix{{0.0, 1.0, 1.0}});
  CHECK(piece.beq(1) == 1.0);
}

TEST_CASE("min_delta values") {
  CHECK(min_delta(academic_aux(0, 5), Partition{{0}}) == doctest::Approx(0).epsilon(1e-12));
  CHECK(min_delta(academic_aux(4, 4), Partition{}) == doctest::Approx(0).epsilon(1e-12));

  AuxiliaryProblem bad;
  bad.pt.x = Vector::Zero(1);
  bad.pt.grad_f = Vector::Zero(1);
  bad.pt.h = Vector{{0.0, 0.0}};
  bad.pt.Jh = Matrix{{1.0}, {1.0}};
  bad.pt.g = Vector{{0.0}};
  bad.pt.Jg = Matrix{{0.0}};
  bad.pt.H = Vector();
  bad.pt.G = Vector();
  bad.pt.JH = Matrix(0, 1);
  bad.pt.JG = Matrix(0, 1);
  bad.B = Matrix::Identity(1, 1);
  bad.theta = choose_theta(bad.pt);
  CHECK(min_delta(bad, Partition{}) == doctest::Approx(0));
  // s1 = 1 and s1 = 2 with no delta coupling: empty piece.
  bad.pt.Jg = Matrix{{1.0}};
  bad.pt.g = Vector{{-1.0}};
  bad.pt.h = Vector{{0.0, 0.0}};
  bad.pt.Jh = Matrix{{1.0}, {-1.0}};
  AuxiliaryProblem empty = bad;
  empty.pt.g = Vector{{1.0}};  // g + s <= 0 with theta relaxing: s <= -1 + delta
  empty.theta.g = Vector{{0.0}};
  // Equalities force s = 0; the inequality s <= -1 cannot hold.
  CHECK(std::isinf(min_delta(empty, Partition{})));
}

TEST_CASE("is_solution_of_piece tolerance semantics") {
  const auto aux = academic_aux(4, 4);
  const Partition part{};
  const QuadProgram qp = build_piece_qp(aux, part);
  const SolveResult opt = solve_qp(qp);
  REQUIRE(opt.optimal());
  const Vector s = opt.z.head(2);
  const double delta = opt.z(2);
  CHECK(is_solution_of_piece(aux, part, s, delta));
  CHECK_FALSE(is_solution_of_piece(aux, part, Vector::Zero(2), 0.0));
  // A huge tolerance accepts any feasible point.
  CHECK(is_solution_of_piece(aux, part, Vector::Zero(2), 0.0, 1e6));
}

TEST_CASE("solve_qpvc at the local minimizer (0,5)") {
  const PiecePath path = solve_qpvc(academic_aux(0, 5));
  CHECK(path.status == QpvcStatus::QMStationary);
  CHECK(path.s_final().lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK(std::abs(path.delta_final()) < 1e-10);
  CHECK(path.restarts == 0);
}

TEST_CASE("solve_qpvc at a feasible point keeps delta at zero") {
  const auto aux = academic_aux(4, 4);
  const PiecePath path = solve_qpvc(aux);
  REQUIRE(path.status == QpvcStatus::QMStationary);
  CHECK(std::abs(path.delta_final()) < 1e-12);
  const auto& last = path.steps.back();
  CHECK(is_solution_of_piece(aux, last.V1, last.s, last.delta));
}

TEST_CASE("solve_qpvc reports degeneracy") {
  AuxiliaryProblem aux;
  aux.pt.x = Vector::Zero(1);
  aux.pt.grad_f = Vector{{1.0}};
  // s - delta = -1 and s - 2 delta = -2 force delta = 1.
  aux.pt.h = Vector{{1.0, 2.0}};
  aux.pt.Jh = Matrix{{1.0}, {1.0}};
  aux.pt.g = Vector();
  aux.pt.Jg = Matrix(0, 1);
  aux.pt.H = Vector();
  aux.pt.G = Vector();
  aux.pt.JH = Matrix(0, 1);
  aux.pt.JG = Matrix(0, 1);
  aux.B = Matrix::Identity(1, 1);
  aux.theta = choose_theta(aux.pt);
  CHECK(min_delta(aux, Partition{}) == doctest::Approx(1.0));
  const PiecePath path = solve_qpvc(aux);
  CHECK(path.status == QpvcStatus::Degenerate);
  CHECK(path.delta_final() == doctest::Approx(1.0));
}

TEST_CASE("solve_qpvc invariants on random auxiliary problems") {
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> ne_d(0, 1), ni_d(0, 2), nv_d(1, 4);
  int qm = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 3;
    const int nv = nv_d(rng);
    AuxiliaryProblem aux;
    aux.pt = random_point(rng, n, ne_d(rng), ni_d(rng), nv);
    std::normal_distribution<double> nd;
    Matrix M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = nd(rng);
    aux.B = M.transpose() * M + Matrix::Identity(n, n);
    aux.theta = choose_theta(aux.pt);
    aux.rho = 1.0;

    PiecePath path;
    try {
      path = solve_qpvc(aux);
    } catch (const RestartLimitError&) {
      continue;
    }
    auto check_epoch = [&](const std::vector<PieceStep>& steps, double rho) {
      AuxiliaryProblem a = aux;
      a.rho = rho;
      CHECK(steps.front().delta == 1.0);
      CHECK(static_cast<double>(steps.size() - 1) <= std::pow(2.0, nv) + 1);
      for (std::size_t t = 1; t < steps.size(); ++t) {
        CHECK(piece_violation(a, steps[t].V1, steps[t - 1].s, steps[t - 1].delta) <= 1e-8);
        CHECK(piece_violation(a, steps[t].V1, steps[t].s, steps[t].delta) <= 1e-8);
      }
    };
    for (std::size_t e = 0; e < path.abandoned.size(); ++e) {
      check_epoch(path.abandoned[e], path.abandoned_rho[e]);
    }
    check_epoch(path.steps, path.final_rho);
    for (std::size_t t = 1; t < path.steps.size(); ++t) {
      CHECK(path.steps[t].delta <= path.steps[t - 1].delta + 1e-10);
      CHECK(path.steps[t].delta >= -1e-12);
    }
    if (path.status != QpvcStatus::QMStationary) continue;
    ++qm;
    CHECK(path.delta_final() < aux.zeta);
    AuxiliaryProblem a = aux;
    a.rho = path.final_rho;
    const auto& last = path.steps.back();
    const PointSets sets = classify_point(a, last.s, last.delta);
    IndexList both = sets.I1;
    both.insert(both.end(), sets.I00.begin(), sets.I00.end());
    std::sort(both.begin(), both.end());
    CHECK(is_solution_of_piece(a, Partition{sets.I1}, last.s, last.delta, 1e-7));
    CHECK(is_solution_of_piece(a, Partition{both}, last.s, last.delta, 1e-7));
    for (int i : sets.I00) CHECK(std::abs(path.under_multiplier.lambda_F(i, 1)) <= 1e-8);
    // Stationarity of the final piece's multiplier in the s block.
    const auto& lam = last.lambda;
    Vector r = a.B * last.s + a.pt.grad_f;
    if (a.num_eq() > 0) r += a.pt.Jh.transpose() * lam.lambda_h;
    if (a.num_ineq() > 0) r += a.pt.Jg.transpose() * lam.lambda_g;
    for (int i = 0; i < nv; ++i) {
      r += -lam.lambda_F(i, 0) * a.pt.JH.row(i).transpose() +
           lam.lambda_F(i, 1) * a.pt.JG.row(i).transpose();
    }
    CHECK(r.lpNorm<Eigen::Infinity>() <= 1e-7);
  }
  CHECK(qm > 150);
}
