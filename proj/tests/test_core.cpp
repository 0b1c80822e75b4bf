#include "doctest.h"
#include "mpvc/core.hpp"

#include <cmath>
#include <random>

using namespace mpvc;

namespace {

PointValues vanishing_point(std::vector<double> H, std::vector<double> G) {
  PointValues pt;
  pt.H = Eigen::Map<Vector>(H.data(), static_cast<Eigen::Index>(H.size()));
  pt.G = Eigen::Map<Vector>(G.data(), static_cast<Eigen::Index>(G.size()));
  return pt;
}

// l1 distance from v to P by scanning a coordinate grid that contains v.
// The l1 norm separates per coordinate on each branch.
double grid_distance_to_P(const Vec2& v) {
  std::vector<double> grid{v(0), v(1), 0.0};
  for (int k = -2400; k <= 2400; ++k) grid.push_back(0.005 * k);
  auto best_1d = [&grid](double target, bool nonpositive_only) {
    double best = 1e300;
    for (double c : grid) {
      if (nonpositive_only && c > 0) continue;
      best = std::min(best, std::abs(target - c));
    }
    return best;
  };
  const double to_p1 = std::abs(v(0)) + best_1d(v(1), false);
  const double to_p2 = best_1d(v(0), true) + best_1d(v(1), true);
  return std::min(to_p1, to_p2);
}

}  // namespace

TEST_CASE("classify_indices on academic points") {
  const double r = 5.0 * std::sqrt(2.0);
  SUBCASE("(0,5)") {
    auto s = classify_indices(vanishing_point({0, 5}, {r - 5, 0}));
    CHECK(s.I0plus == IndexList{0});
    CHECK(s.Iplus0 == IndexList{1});
    CHECK(s.I00.empty());
    CHECK(s.I0minus.empty());
    CHECK(s.IplusMinus.empty());
  }
  SUBCASE("(0,0)") {
    auto s = classify_indices(vanishing_point({0, 0}, {r, 5}));
    CHECK(s.I0plus == IndexList{0, 1});
  }
  SUBCASE("(0,5 sqrt 2)") {
    auto s = classify_indices(vanishing_point({0, r}, {0, 5 - r}));
    CHECK(s.I00 == IndexList{0});
    CHECK(s.IplusMinus == IndexList{1});
  }
  SUBCASE("inequality activity") {
    PointValues pt = vanishing_point({}, {});
    pt.g = Vector::Zero(3);
    pt.g << 0.0, -1.0, 1e-9;
    auto s = classify_indices(pt);
    CHECK(s.Ig == IndexList{0, 2});
  }
}

TEST_CASE("classify_indices partitions V at feasible points") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> H(6), G(6);
    for (int i = 0; i < 6; ++i) {
      H[i] = coin(rng) ? 0.0 : std::abs(u(rng));
      G[i] = coin(rng) ? 0.0 : u(rng);
      if (H[i] > 0 && G[i] > 0) G[i] = -G[i];
    }
    auto s = classify_indices(vanishing_point(H, G));
    std::vector<int> seen(6, 0);
    for (const auto* set : {&s.I0plus, &s.I0minus, &s.Iplus0, &s.I00, &s.IplusMinus}) {
      for (int i : *set) ++seen[i];
    }
    for (int i = 0; i < 6; ++i) CHECK(seen[i] == 1);
  }
}

TEST_CASE("dist_to_branch examples") {
  CHECK(dist_to_branch({0, -3}, ConeBranch::P) == 0.0);
  CHECK(dist_to_branch({2, 1}, ConeBranch::P) == doctest::Approx(2));
  CHECK(dist_to_branch({2, 1}, ConeBranch::P1) == doctest::Approx(2));
  CHECK(dist_to_branch({2, 1}, ConeBranch::P2) == doctest::Approx(3));
  CHECK(dist_to_branch({-1, 2}, ConeBranch::P) == doctest::Approx(1));
}

TEST_CASE("dist_to_branch matches the grid oracle and is 1-Lipschitz") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec2 v(u(rng), u(rng));
    const double d = dist_to_branch(v, ConeBranch::P);
    CHECK(d == doctest::Approx(std::min(dist_to_branch(v, ConeBranch::P1),
                                        dist_to_branch(v, ConeBranch::P2))));
    CHECK(std::abs(d - grid_distance_to_P(v)) <= 1e-6);
    const Vec2 w(u(rng), u(rng));
    for (auto b : {ConeBranch::P, ConeBranch::P1, ConeBranch::P2}) {
      CHECK(std::abs(dist_to_branch(v, b) - dist_to_branch(w, b)) <= (v - w).lpNorm<1>() + 1e-12);
    }
  }
}

TEST_CASE("normal_cone_member case formulas") {
  CHECK(normal_cone_member({0, 0}, {3, 0}, ConeBranch::P, 1e-12));
  CHECK(normal_cone_member({0, 0}, {0, 2}, ConeBranch::P, 1e-12));
  CHECK_FALSE(normal_cone_member({0, 0}, {1, 1}, ConeBranch::P, 1e-12));
  CHECK_FALSE(normal_cone_member({0, 0}, {0, -1}, ConeBranch::P, 1e-12));
  CHECK(normal_cone_member({-2, -1}, {0, 0}, ConeBranch::P2, 1e-12));
  CHECK_FALSE(normal_cone_member({-2, -1}, {1, 0}, ConeBranch::P2, 1e-12));
  CHECK(normal_cone_member({0, 3}, {-4, 0}, ConeBranch::P, 1e-12));
  CHECK_FALSE(normal_cone_member({0, 3}, {0, 1}, ConeBranch::P, 1e-12));
  CHECK(normal_cone_member({0, -3}, {2, 0}, ConeBranch::P, 1e-12));
  CHECK_FALSE(normal_cone_member({0, -3}, {-2, 0}, ConeBranch::P, 1e-12));
  CHECK(normal_cone_member({-1, 0}, {0, 2}, ConeBranch::P, 1e-12));
  CHECK(normal_cone_member({-1, -1}, {0, 0}, ConeBranch::P, 1e-12));
  CHECK_FALSE(normal_cone_member({-1, -1}, {0, 1e-3}, ConeBranch::P, 1e-12));
  CHECK(normal_cone_member({0, 7}, {-3, 0}, ConeBranch::P1, 1e-12));
  CHECK_THROWS_AS((void)normal_cone_member({1, 1}, {0, 0}, ConeBranch::P, 1e-12),
                  std::domain_error);
}

TEST_CASE("finite differences of a smooth map") {
  auto fn = [](const Vector& x) {
    Vector out(2);
    out << std::sin(x(0)) * x(1), x(0) * x(0);
    return out;
  };
  Vector x(2);
  x << 0.3, -1.2;
  Matrix J = fd_jacobian(fn, x);
  CHECK(J(0, 0) == doctest::Approx(std::cos(0.3) * -1.2).epsilon(1e-8));
  CHECK(J(0, 1) == doctest::Approx(std::sin(0.3)).epsilon(1e-8));
  CHECK(J(1, 0) == doctest::Approx(0.6).epsilon(1e-8));
  CHECK(J(1, 1) == doctest::Approx(0.0));
}
