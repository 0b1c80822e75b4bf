#include "doctest.h"
#include "mpvc/problems.hpp"
#include "mpvc/stationarity.hpp"

#include <cmath>

using namespace mpvc;

namespace {

const double kR2 = std::sqrt(2.0);

Vector point(double x1, double x2) { return Vector{{x1, x2}}; }

}  // namespace

TEST_CASE("level names round-trip") {
  for (auto l : {StationarityLevel::None, StationarityLevel::Weak, StationarityLevel::M,
                 StationarityLevel::Q, StationarityLevel::QM, StationarityLevel::S}) {
    CHECK(level_from_string(to_string(l)) == l);
  }
  CHECK_THROWS_AS(level_from_string("strong"), std::invalid_argument);
}

TEST_CASE("Q test via LP at the academic candidates") {
  const auto prob = academic_problem();
  SUBCASE("local minimizer (0,5)") {
    const QTest t = check_Q_via_LP(prob, point(0, 5), {}, 1e-9);
    CHECK(t.q);
    CHECK(std::abs(t.optimum_beta1) <= 1e-8);
    CHECK(std::abs(t.optimum_beta2) <= 1e-8);
  }
  SUBCASE("global minimizer (0,0)") {
    const QTest t = check_Q_via_LP(prob, point(0, 0), {}, 1e-9);
    CHECK(t.q);
    CHECK(std::abs(t.optimum_beta1) <= 1e-8);
    CHECK(std::abs(t.optimum_beta2) <= 1e-8);
  }
  SUBCASE("(0, 5 sqrt 2) with the bi-active pair in beta2") {
    const QTest t = check_Q_via_LP(prob, point(0, 5 * kR2), {}, 1e-9);
    CHECK_FALSE(t.q);
    CHECK(t.beta2 == IndexList{0});
    CHECK(t.optimum_beta2 == doctest::Approx(-2.0).epsilon(1e-8));
  }
  SUBCASE("beta1 outside the bi-active set is rejected") {
    CHECK_THROWS_AS(check_Q_via_LP(prob, point(0, 5), {1}, 1e-9), std::invalid_argument);
  }
  SUBCASE("infeasible point") {
    CHECK_THROWS_AS(check_Q_via_LP(prob, point(-1, 5), {}, 1e-9), InfeasiblePoint);
  }
}

TEST_CASE("certify on the academic example") {
  const auto prob = academic_problem();
  SUBCASE("(0,5) is S-stationary") {
    const auto c = certify(prob, point(0, 5));
    CHECK(c.level == StationarityLevel::S);
    CHECK(c.stationarity_residual <= 1e-10);
  }
  SUBCASE("(0,0) is S-stationary") {
    CHECK(certify(prob, point(0, 0)).level == StationarityLevel::S);
  }
  SUBCASE("(0, 5 sqrt 2) is weakly stationary only") {
    // Unique multiplier lambda_H = lambda_G = 2 on the bi-active pair.
    const auto c = certify(prob, point(0, 5 * kR2), std::nullopt, {1e-6, true});
    CHECK(c.weak);
    CHECK_FALSE(c.m);
    CHECK_FALSE(c.q);
    CHECK(c.level == StationarityLevel::Weak);
  }
  SUBCASE("a feasible non-stationary point") {
    CHECK(certify(prob, point(1, 1)).level == StationarityLevel::None);
  }
  SUBCASE("an infeasible point") {
    const auto c = certify(prob, point(-1, 0));
    CHECK(c.level == StationarityLevel::None);
    CHECK(c.feasibility_residual == doctest::Approx(1.0));
    CHECK(c.note == "infeasible point");
  }
}

TEST_CASE("weak and M conditions for explicit multipliers") {
  const auto prob = academic_problem();
  MpvcMultiplier l = MpvcMultiplier::zero(prob);
  l.lambda_H(0) = 2.0;
  l.lambda_G(0) = 2.0;
  const auto c = check_weak_M(prob, point(0, 5 * kR2), l, 1e-9);
  CHECK(c.weak);
  CHECK_FALSE(c.m);
  CHECK(c.stationarity_residual <= 1e-12);

  MpvcMultiplier at05 = MpvcMultiplier::zero(prob);
  at05.lambda_H(0) = 2.0;
  at05.lambda_G(1) = 2.0;
  const auto d = check_weak_M(prob, point(0, 5), at05, 1e-9);
  CHECK(d.weak);
  CHECK(d.m);
  CHECK(d.level() == StationarityLevel::M);

  const auto cert = certificate_from_multiplier(prob, point(0, 5), at05);
  CHECK(cert.level == StationarityLevel::M);
  CHECK(cert.witnesses.size() == 1);

  MpvcMultiplier wrong = at05;
  wrong.lambda_G(1) = -2.0;
  CHECK_FALSE(check_weak_M(prob, point(0, 5), wrong, 1e-9).weak);
}

TEST_CASE("direction LP multipliers satisfy stationarity") {
  const auto prob = academic_problem();
  const EvalPoint pt = evaluate_point(prob, point(0, 5));
  const std::vector<PairRole> roles{PairRole::P1, PairRole::P2};
  const auto r = solve_lp(build_direction_lp(pt, roles));
  REQUIRE(r.optimal());
  CHECK(std::abs(r.objective) <= 1e-12);
  const MpvcMultiplier l = direction_lp_multiplier(pt, roles, r);
  CHECK(stationarity_residual(pt, l) <= 1e-10);
}

TEST_CASE("certify on the ten-bar optimum") {
  auto model = std::make_shared<TrussModel>(ten_bar_ground_structure());
  const auto prob = truss_mpvc(model);
  Vector a{{0, 1, 0, 1, 0, std::sqrt(2.0), 0, std::sqrt(2.0), 2, 0}};
  const Vector u = assemble_stiffness(*model, a).completeOrthogonalDecomposition().solve(model->load);
  Vector x(prob.n);
  x << a, u;
  CHECK(certify(prob, x).level >= StationarityLevel::QM);
}
