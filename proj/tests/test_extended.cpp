#include "doctest.h"
#include "mpvc/extended.hpp"
#include "mpvc/problems.hpp"

#include <cmath>
#include <memory>

using namespace mpvc;

namespace {

const double kR2 = std::sqrt(2.0);

PointValues pair_values(double H, double G) {
  PointValues v;
  v.x = Vector::Zero(1);
  v.H = Vector{{H}};
  v.G = Vector{{G}};
  return v;
}

bool in(const IndexList& l, int i) { return std::find(l.begin(), l.end(), i) != l.end(); }

}  // namespace

TEST_CASE("estimated index sets") {
  CHECK(in(estimate_index_sets(pair_values(0.05, 2.0), 0.1).I0plus, 0));
  CHECK(in(estimate_index_sets(pair_values(0.05, -0.05), 0.1).I00, 0));
  CHECK(in(estimate_index_sets(pair_values(0.05, -2.0), 0.1).I0minus, 0));
  CHECK(in(estimate_index_sets(pair_values(3.0, 0.05), 0.1).Iplus0, 0));
  CHECK(in(estimate_index_sets(pair_values(3.0, -1.0), 0.1).IplusMinus, 0));

  // With eps = 0 the sets are the exact ones.
  const auto prob = academic_problem();
  const auto at = [&](double x1, double x2) {
    return estimate_index_sets(evaluate_values(prob, Vector{{x1, x2}}), 0.0);
  };
  const auto a = at(0.0, 5.0);
  CHECK(a.I0plus == IndexList{0});
  CHECK(a.Iplus0 == IndexList{1});
  const auto b = at(0.0, 5 * kR2);
  CHECK(b.I00 == IndexList{0});
  CHECK(b.IplusMinus == IndexList{1});
  CHECK_THROWS_AS(estimate_index_sets(pair_values(0, 0), -1.0), std::invalid_argument);
}

TEST_CASE("estimates settle on the exact sets along a convergent sequence") {
  const auto prob = academic_problem();
  const Vector limit{{0.0, 5.0}};
  Vector prev;
  for (int k = 0; k < 30; ++k) {
    const Vector xk = limit + std::pow(0.5, k) * Vector{{0.3, -0.2}};
    const double eps = epsilon_schedule(xk, prev, 0.1);
    const auto sets = estimate_index_sets(evaluate_values(prob, xk), eps);
    if (k >= 10) {
      CHECK(sets.I0plus == IndexList{0});
      CHECK(sets.Iplus0 == IndexList{1});
    }
    prev = xk;
  }
}

TEST_CASE("epsilon schedule") {
  CHECK(epsilon_schedule(Vector{{0.04, 1.0}}, Vector{{0.0, 1.0}}) == doctest::Approx(0.2));
  CHECK(epsilon_schedule(Vector{{1.0}}, Vector{{1.0}}) == 0.0);
  CHECK(epsilon_schedule(Vector{{1.0}}, Vector()) == 0.1);
  CHECK(epsilon_schedule(Vector{{1.0}}, Vector(), 0.25) == 0.25);
  CHECK_THROWS_AS(epsilon_schedule(Vector{{1.0}}, Vector{{1.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("split merit") {
  const auto prob = academic_problem();
  const PenaltyParams sig{Vector(), Vector(), Vector::Ones(2)};
  CHECK(merit_varphi(prob, sig, Partition{{0}}, Vector{{1.0, 1.0}}) == doctest::Approx(10.0));
  CHECK(merit_varphi(prob, sig, Partition{{0}}, Vector{{0.0, 5.0}}) == doctest::Approx(10.0));
  CHECK(merit_Phi(prob, sig, Vector{{0.0, 5.0}}) == doctest::Approx(10.0));
}

TEST_CASE("correction step") {
  const auto prob = academic_problem();
  const SqpConfig cfg;
  SUBCASE("no correction at the local minimizer") {
    const auto sig = PenaltyParams::initial(prob, 1.0, 2.0, 3.0);
    const EvalPoint pt = evaluate_point(prob, Vector{{0.0, 5.0}});
    const auto rep = correct_iterate(prob, sig, pt, 0.1, cfg);
    CHECK(rep.dfd_a == doctest::Approx(0.0));
    CHECK(rep.dfd_b == doctest::Approx(0.0));
    CHECK_FALSE(rep.attempted);
    CHECK(rep.x_corrected == pt.x);
  }
  SUBCASE("moves off the point (0, 5 sqrt 2)") {
    const auto sig = PenaltyParams::initial(prob, 1.0, 2.0, 3.0);
    const EvalPoint pt = evaluate_point(prob, Vector{{0.0, 5 * kR2}});
    const auto rep = correct_iterate(prob, sig, pt, 0.0, cfg);
    CHECK(rep.W1b == IndexList{0});
    CHECK(rep.dfdk == doctest::Approx(-2.0));
    CHECK(rep.d.isApprox(Vector{{0.0, -1.0}}, 1e-9));
    REQUIRE(rep.corrected);
    CHECK(rep.Phi_after - rep.Phi_before <= cfg.mu * rep.alpha * rep.dfdk);
    CHECK(rep.x_corrected(1) < 5 * kR2);
  }
  SUBCASE("escape when the split merit exceeds the exact merit") {
    const auto sig = PenaltyParams::initial(prob, 20.0, 2.0, 3.0);
    const EvalPoint pt = evaluate_point(prob, Vector{{0.1, 7.0}});
    const auto rep = correct_iterate(prob, sig, pt, 0.3, cfg);
    CHECK(rep.attempted);
    CHECK(rep.varphi > rep.Phi_before);
    CHECK(rep.escaped);
    CHECK_FALSE(rep.corrected);
    CHECK(rep.x_corrected == pt.x);
  }
}

TEST_CASE("extended driver") {
  const auto prob = academic_problem();
  SUBCASE("immediate stop at a Q_M-stationary start") {
    const auto r = run_extended_sqp(prob, Vector{{0.0, 5.0}});
    CHECK(r.status == SqpStatus::Solved);
    CHECK(r.counters.outer_iterations == 0);
    CHECK(r.counters.corrections == 0);
  }
  SUBCASE("start near (0, 5 sqrt 2)") {
    const auto r = run_extended_sqp(prob, Vector{{0.01, 7.06}});
    REQUIRE(r.status == SqpStatus::Solved);
    CHECK((r.x - Vector{{0.0, 5 * kR2}}).norm() > 0.5);
    CHECK(r.certificate.level >= StationarityLevel::QM);
    CHECK(r.invariants.all());
    REQUIRE_FALSE(r.trace.empty());
    CHECK_FALSE(std::isnan(r.trace.front().eps_k));
  }
  SUBCASE("ten-bar truss") {
    auto model = std::make_shared<TrussModel>(ten_bar_ground_structure());
    const auto tp = truss_mpvc(model);
    const auto r = run_extended_sqp(tp, truss_start_point(*model));
    REQUIRE(r.status == SqpStatus::Solved);
    CHECK(model->volume(r.x.head(10)) <= 8.01);
    CHECK(r.certificate.level >= StationarityLevel::QM);
  }
}
