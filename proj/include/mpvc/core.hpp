// Problem model for mathematical programs with vanishing constraints:
//
//   min f(x)  s.t.  h_i(x) = 0 (i in E),  g_i(x) <= 0 (i in I),
//                   H_i(x) >= 0,  G_i(x) H_i(x) <= 0 (i in V).
//
// Each vanishing pair is handled through F_i(x) = (-H_i(x), G_i(x)), which
// must lie in P = {(a,b) : a <= 0, ab >= 0} = P1 u P2 with P1 = {0} x R and
// P2 = R^2_-.
#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpvc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using IndexList = std::vector<int>;

/// Evaluator bundle. Jacobians have one row per constraint and n columns.
struct ProblemInstance {
  std::string name;
  int n = 0;
  int num_eq = 0;
  int num_ineq = 0;
  int num_vanishing = 0;

  std::function<double(const Vector&)> objective;
  std::function<Vector(const Vector&)> objective_gradient;
  std::function<Vector(const Vector&)> eq;
  std::function<Vector(const Vector&)> ineq;
  std::function<Vector(const Vector&)> G;
  std::function<Vector(const Vector&)> H;
  std::function<Matrix(const Vector&)> eq_jacobian;
  std::function<Matrix(const Vector&)> ineq_jacobian;
  std::function<Matrix(const Vector&)> G_jacobian;
  std::function<Matrix(const Vector&)> H_jacobian;

  /// Throws std::invalid_argument if an evaluator is missing.
  void validate() const;
};

/// Function values only (no derivatives).
struct PointValues {
  Vector x;
  double f = 0.0;
  Vector h, g, G, H;

  /// F_i = (-H_i, G_i).
  [[nodiscard]] Vec2 F(int i) const { return {-H(i), G(i)}; }
};

/// Values and first derivatives at a point. Immutable once built.
struct EvalPoint : PointValues {
  Vector grad_f;
  Matrix Jh, Jg, JG, JH;

  /// 2 x n block (-grad H_i; grad G_i).
  [[nodiscard]] Eigen::Matrix<double, 2, Eigen::Dynamic> JF(int i) const;
};

PointValues evaluate_values(const ProblemInstance& problem, const Vector& x);
EvalPoint evaluate_point(const ProblemInstance& problem, const Vector& x);

/// Constraint violation max{ max|h_i|, max (g_i)^+, max d(F_i, P) }.
double constraint_violation(const PointValues& pt);

// ---------------------------------------------------------------------------
// Cone geometry

enum class ConeBranch { P, P1, P2 };

/// l1 distance from v to the given branch.
double dist_to_branch(const Vec2& v, ConeBranch branch);

/// Membership up to an l1 tolerance.
bool in_branch(const Vec2& v, ConeBranch branch, double tol);

/// Tests whether lambda_F lies in the (limiting) normal cone of the branch at
/// v. Throws std::domain_error if v is not in the branch within tol.
bool normal_cone_member(const Vec2& v, const Vec2& lambda_F, ConeBranch branch,
                        double tol);

// ---------------------------------------------------------------------------
// Index sets

struct IndexSets {
  IndexList Ig;
  IndexList I0plus, I0minus, Iplus0, I00, IplusMinus;
  double tau_act = 0.0;
};

/// Classifies I and V at the point. A value c counts as zero when
/// |c| <= tau_act * (1 + |H_i| + |G_i|) (for g: 1 + |g_i|). Indices in V that
/// are infeasible (H_i < 0, or H_i > 0 < G_i) land in none of the sets.
IndexSets classify_indices(const PointValues& pt, double tau_act = 1e-7);

// ---------------------------------------------------------------------------
// Finite differences (testing aid)

/// Central-difference Jacobian of a vector function, step 1e-6 (1 + |x_j|).
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& fn,
                   const Vector& x);
Vector fd_gradient(const std::function<double(const Vector&)>& fn,
                   const Vector& x);

}  // namespace mpvc
