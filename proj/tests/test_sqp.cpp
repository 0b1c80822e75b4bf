#include "doctest.h"
#include "mpvc/problems.hpp"
#include "mpvc/sqp.hpp"

#include <cmath>
#include <memory>
#include <random>

using namespace mpvc;

namespace {

const double kR2 = std::sqrt(2.0);

PenaltyParams unit_penalties(int ne, int ni, int nv) {
  PenaltyParams s;
  s.sigma_h = Vector::Ones(ne);
  s.sigma_g = Vector::Ones(ni);
  s.sigma_F = Vector::Ones(nv);
  return s;
}

// One-variable linearization with the given vanishing pair values.
EvalPoint scalar_point(double H, double G) {
  EvalPoint pt;
  pt.x = Vector::Zero(1);
  pt.f = 0.0;
  pt.h = Vector();
  pt.g = Vector();
  pt.H = Vector{{H}};
  pt.G = Vector{{G}};
  pt.grad_f = Vector::Zero(1);
  pt.Jh = Matrix(0, 1);
  pt.Jg = Matrix(0, 1);
  pt.JH = Matrix::Zero(1, 1);
  pt.JG = Matrix::Zero(1, 1);
  return pt;
}

// min 1/2 |x - c|^2 with linear vanishing pair (x1, x2 - 1): the merit and
// its model agree exactly when B is the identity.
ProblemInstance linear_quadratic() {
  ProblemInstance p;
  p.name = "linear-quadratic";
  p.n = 2;
  p.num_vanishing = 1;
  const Vector c{{-1.0, 3.0}};
  p.objective = [c](const Vector& x) { return 0.5 * (x - c).squaredNorm(); };
  p.objective_gradient = [c](const Vector& x) { return Vector(x - c); };
  p.H = [](const Vector& x) { return Vector{{x(0)}}; };
  p.G = [](const Vector& x) { return Vector{{x(1) - 1.0}}; };
  p.H_jacobian = [](const Vector&) { return Matrix{{1.0, 0.0}}; };
  p.G_jacobian = [](const Vector&) { return Matrix{{0.0, 1.0}}; };
  return p;
}

}  // namespace

TEST_CASE("config validation names the field") {
  SqpConfig c;
  CHECK_NOTHROW(c.validate());
  c.zeta = 1.5;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("zeta"), std::invalid_argument);
  c = {};
  c.xi2 = 1.5;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("xi2"), std::invalid_argument);
  c = {};
  c.max_backtracks = 0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("max_backtracks"), std::invalid_argument);
}

TEST_CASE("enum names round-trip") {
  for (auto s : {SqpStatus::Solved, SqpStatus::Degenerate, SqpStatus::RestartLimit,
                 SqpStatus::MaxIter, SqpStatus::BacktrackLimit, SqpStatus::Error}) {
    CHECK(sqp_status_from_string(to_string(s)) == s);
  }
  for (auto b : {BUpdate::DampedBFGS, BUpdate::Identity}) {
    CHECK(b_update_from_string(to_string(b)) == b);
  }
}

TEST_CASE("penalty update rule") {
  PiecePath path;
  path.steps.resize(2);
  path.steps[1].lambda.lambda_h = Vector{{5.0, 0.4, 0.0}};
  path.steps[1].lambda.lambda_g = Vector();
  path.steps[1].lambda.lambda_F = Matrix{{-4.0, 5.0}};
  PenaltyParams prev;
  prev.sigma_h = Vector::Ones(3);
  prev.sigma_g = Vector();
  prev.sigma_F = Vector::Ones(1);
  const LambdaTilde lt = lambda_tilde(path);
  CHECK(lt.F(0) == 5.0);
  const PenaltyParams next = update_penalties(prev, path);
  CHECK(next.sigma_h(0) == 15.0);
  CHECK(next.sigma_h(1) == 1.0);
  CHECK(next.sigma_h(2) == 1.0);
  CHECK(next.sigma_F(0) == 15.0);
  CHECK(penalty_dominates(next, lt));
  CHECK_FALSE(penalty_dominates(prev, lt));
  CHECK(next.max() == 15.0);

  // lambda~ is the maximum over t = 1..N, ignoring t = 0.
  path.steps.insert(path.steps.begin() + 1, path.steps[1]);
  path.steps[1].lambda.lambda_h = Vector{{-7.0, 0.0, 0.0}};
  path.steps[0].lambda.lambda_h = Vector{{100.0, 100.0, 100.0}};
  path.steps[0].lambda.lambda_F = Matrix{{100.0, 0.0}};
  CHECK(lambda_tilde(path).h(0) == 7.0);
  CHECK(lambda_tilde(path).h(1) == 0.4);
}

TEST_CASE("linearized merit examples") {
  const PenaltyParams two{Vector(), Vector(), Vector::Constant(1, 2.0)};
  SUBCASE("pair on the second branch at (1,2)") {
    const AuxiliaryProblem aux = make_auxiliary(scalar_point(-1.0, 2.0), Matrix::Identity(1, 1), 1.0);
    CHECK(merit_hat_phi(aux, two, Partition{}, Vector::Zero(1)) == doctest::Approx(6.0));
  }
  SUBCASE("linearized equality satisfied adds nothing") {
    EvalPoint pt = scalar_point(1.0, -1.0);
    pt.h = Vector{{1.0}};
    pt.Jh = Matrix{{1.0}};
    const AuxiliaryProblem aux = make_auxiliary(pt, Matrix::Identity(1, 1), 1.0);
    PenaltyParams lo{Vector::Constant(1, 1.0), Vector(), Vector::Ones(1)};
    PenaltyParams hi{Vector::Constant(1, 100.0), Vector(), Vector::Ones(1)};
    const Vector s{{-1.0}};
    CHECK(merit_hat_phi(aux, lo, Partition{}, s) == merit_hat_phi(aux, hi, Partition{}, s));
  }
  SUBCASE("model is a first-order approximation of the merit") {
    const auto prob = academic_problem();
    const Vector x{{1.0, 1.0}};
    const AuxiliaryProblem aux = make_auxiliary(evaluate_point(prob, x), Matrix::Zero(2, 2), 1.0);
    const PenaltyParams sig = unit_penalties(0, 0, 2);
    for (double t : {1e-2, 1e-3, 1e-4}) {
      const Vector s = t * Vector{{-0.3, 0.7}};
      const double gap = std::abs(merit_phi(prob, sig, Partition{}, x, s) -
                                  merit_hat_phi(aux, sig, Partition{}, s));
      CHECK(gap <= 1e-12 + 1e-9 * t);
    }
  }
}

TEST_CASE("nonlinear merit examples") {
  const auto prob = academic_problem();
  const PenaltyParams sig = unit_penalties(0, 0, 2);
  const Vector x{{1.0, 1.0}};
  CHECK(merit_phi(prob, sig, Partition{}, x, Vector::Zero(2)) ==
        doctest::Approx(6.0 + (5 * kR2 - 2.0) + 3.0));
  CHECK(merit_Phi(prob, sig, x) == doctest::Approx(8.0));
  CHECK(merit_Phi(prob, sig, Vector{{0.0, 5.0}}) == doctest::Approx(10.0));
  // At a feasible point with the matching split both merits equal f.
  CHECK(merit_phi(prob, sig, Partition{{0}}, Vector{{0.0, 5.0}}, Vector::Zero(2)) ==
        doctest::Approx(10.0));
}

TEST_CASE("polygonal line parametrization") {
  const std::vector<Vector> pts{Vector{{0.0, 0.0}}, Vector{{1.0, 0.0}}, Vector{{1.0, 2.0}}};
  const auto S = arc_lengths(pts);
  CHECK(S == std::vector<double>{0.0, 1.0, 3.0});
  const PathPoint mid = parametrize_path(pts, 0.5);
  CHECK(mid.t == 2);
  CHECK(mid.alpha == doctest::Approx(0.25));
  CHECK(mid.s.isApprox(Vector{{1.0, 0.5}}));
  CHECK(mid.s.norm() <= 0.5 * S.back() + 1e-15);

  const PathPoint end = parametrize_path(pts, 1.0);
  CHECK(end.t == 2);
  CHECK(end.alpha == 1.0);
  CHECK(end.s == pts.back());

  const std::vector<Vector> stall{Vector::Zero(2), Vector::Zero(2), Vector{{1.0, 0.0}}};
  const PathPoint start = parametrize_path(stall, 0.0);
  CHECK(start.t == 2);
  CHECK(start.alpha == 0.0);
  CHECK(start.s.isZero());

  CHECK_THROWS_AS(parametrize_path({Vector::Zero(2), Vector::Zero(2)}, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(parametrize_path(pts, 1.5), std::invalid_argument);
}

TEST_CASE("damped BFGS update") {
  const Matrix B = Matrix::Identity(3, 3);
  CHECK(update_B(B, Vector::Zero(3), Vector::Ones(3), BUpdate::DampedBFGS) == B);

  const Matrix Q{{4.0, 1.0, 0.0}, {1.0, 3.0, 0.5}, {0.0, 0.5, 2.0}};
  const Vector s{{0.3, -1.0, 2.0}};
  CHECK(update_B(Q, s, Q * s, BUpdate::DampedBFGS).isApprox(Q, 1e-12));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 200; ++t) {
    Vector st(3), yt(3);
    for (int i = 0; i < 3; ++i) {
      st(i) = nd(rng);
      yt(i) = nd(rng);
    }
    if (st.dot(yt) >= 0) yt = -yt;
    const Matrix Bn = update_B(B, st, yt, BUpdate::DampedBFGS);
    CHECK((Bn - Bn.transpose()).norm() <= 1e-12);
    CHECK(Bn.llt().info() == Eigen::Success);
  }
  CHECK(update_B(Q, s, Q * s, BUpdate::Identity) == Matrix::Identity(3, 3));
}

TEST_CASE("basic driver on the academic example") {
  const auto prob = academic_problem();
  SUBCASE("start (1,1)") {
    const auto r = run_basic_sqp(prob, Vector{{1.0, 1.0}});
    REQUIRE(r.status == SqpStatus::Solved);
    const bool at_global = (r.x - Vector{{0.0, 0.0}}).norm() <= 1e-4;
    const bool at_local = (r.x - Vector{{0.0, 5.0}}).norm() <= 1e-4;
    CHECK((at_global || at_local));
    CHECK(r.certificate.level >= StationarityLevel::M);
    CHECK(r.invariants.all());
    CHECK(r.counters.f_evals == r.counters.outer_iterations + r.counters.sum_j);
    CHECK(r.counters.grad_evals == r.counters.outer_iterations + 1);
  }
  SUBCASE("start at the local minimizer stops at once") {
    const auto r = run_basic_sqp(prob, Vector{{0.0, 5.0}});
    CHECK(r.status == SqpStatus::Solved);
    CHECK(r.counters.outer_iterations == 0);
    CHECK(r.counters.N_k.size() == 1);
    CHECK(r.x == Vector{{0.0, 5.0}});
  }
  SUBCASE("trace records every step") {
    std::vector<IterationRecord> seen;
    const auto r = run_basic_sqp(prob, Vector{{7.0, 3.0}}, {},
                                 [&](const IterationRecord& rec) { seen.push_back(rec); });
    CHECK(r.status == SqpStatus::Solved);
    CHECK(seen.size() == r.trace.size());
    // One subproblem per visited iterate, including the final one.
    CHECK(static_cast<int>(r.counters.N_k.size()) == r.counters.outer_iterations + 1);
    for (const auto& rec : r.trace) CHECK(std::isnan(rec.correction_dfdk));
  }
  SUBCASE("constrained variant from (5,5) reaches (0,5)") {
    const auto r = run_basic_sqp(academic_problem(true), Vector{{5.0, 5.0}});
    CHECK(r.status == SqpStatus::Solved);
    CHECK((r.x - Vector{{0.0, 5.0}}).norm() <= 1e-4);
    CHECK(r.f == doctest::Approx(10.0).epsilon(1e-6));
  }
  SUBCASE("iteration cap") {
    SqpConfig c;
    c.max_outer = 0;
    CHECK(run_basic_sqp(prob, Vector{{7.0, 3.0}}, c).status == SqpStatus::MaxIter);
  }
  SUBCASE("bad configuration") {
    SqpConfig c;
    c.xi = 0.0;
    CHECK_THROWS_AS(run_basic_sqp(prob, Vector{{1.0, 1.0}}, c), std::invalid_argument);
  }
}

TEST_CASE("exact model accepts the full step") {
  const auto prob = linear_quadratic();
  const auto r = run_basic_sqp(prob, Vector{{2.0, 0.5}});
  REQUIRE(r.status == SqpStatus::Solved);
  REQUIRE(!r.trace.empty());
  CHECK(r.trace.front().j_k == 1);
  CHECK(r.invariants.all());
}

TEST_CASE("basic driver on the ten-bar truss") {
  auto model = std::make_shared<TrussModel>(ten_bar_ground_structure());
  const auto prob = truss_mpvc(model);
  const auto r = run_basic_sqp(prob, truss_start_point(*model));
  REQUIRE(r.status == SqpStatus::Solved);
  CHECK(model->volume(r.x.head(10)) == doctest::Approx(8.0).epsilon(1e-6));
  CHECK(r.certificate.level >= StationarityLevel::QM);
  CHECK(r.invariants.all());
  CHECK(r.counters.f_evals == r.counters.outer_iterations + r.counters.sum_j);
  CHECK(r.counters.grad_evals == r.counters.outer_iterations + 1);
  // Step lengths shrink along the run.
  REQUIRE(r.trace.size() >= 10);
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 5; ++i) {
    first += r.trace[i].step_norm;
    last += r.trace[r.trace.size() - 1 - i].step_norm;
  }
  CHECK(last < first);
}
