#include "mpvc/core.hpp"

#include <algorithm>
#include <cmath>

namespace mpvc {

namespace {

double pos(double a) { return std::max(a, 0.0); }

void check_size(const Vector& v, int expected, const char* what) {
  if (v.size() != expected) {
    throw std::runtime_error(std::string("evaluator returned wrong size for ") +
                             what);
  }
}

void check_jac(const Matrix& m, int rows, int cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw std::runtime_error(std::string("evaluator returned wrong shape for ") +
                             what);
  }
}

}  // namespace

void ProblemInstance::validate() const {
  if (n <= 0) throw std::invalid_argument("problem dimension must be positive");
  if (!objective || !objective_gradient) {
    throw std::invalid_argument("problem '" + name + "' lacks objective evaluators");
  }
  if (num_eq > 0 && (!eq || !eq_jacobian)) {
    throw std::invalid_argument("problem '" + name + "' lacks equality evaluators");
  }
  if (num_ineq > 0 && (!ineq || !ineq_jacobian)) {
    throw std::invalid_argument("problem '" + name + "' lacks inequality evaluators");
  }
  if (num_vanishing > 0 && (!G || !H || !G_jacobian || !H_jacobian)) {
    throw std::invalid_argument("problem '" + name + "' lacks vanishing evaluators");
  }
}

Eigen::Matrix<double, 2, Eigen::Dynamic> EvalPoint::JF(int i) const {
  Eigen::Matrix<double, 2, Eigen::Dynamic> out(2, grad_f.size());
  out.row(0) = -JH.row(i);
  out.row(1) = JG.row(i);
  return out;
}

PointValues evaluate_values(const ProblemInstance& problem, const Vector& x) {
  PointValues pt;
  pt.x = x;
  pt.f = problem.objective(x);
  pt.h = problem.num_eq > 0 ? problem.eq(x) : Vector();
  pt.g = problem.num_ineq > 0 ? problem.ineq(x) : Vector();
  pt.G = problem.num_vanishing > 0 ? problem.G(x) : Vector();
  pt.H = problem.num_vanishing > 0 ? problem.H(x) : Vector();
  check_size(pt.h, problem.num_eq, "h");
  check_size(pt.g, problem.num_ineq, "g");
  check_size(pt.G, problem.num_vanishing, "G");
  check_size(pt.H, problem.num_vanishing, "H");
  return pt;
}

EvalPoint evaluate_point(const ProblemInstance& problem, const Vector& x) {
  EvalPoint pt;
  static_cast<PointValues&>(pt) = evaluate_values(problem, x);
  const int n = problem.n;
  pt.grad_f = problem.objective_gradient(x);
  check_size(pt.grad_f, n, "grad f");
  pt.Jh = problem.num_eq > 0 ? problem.eq_jacobian(x) : Matrix(0, n);
  pt.Jg = problem.num_ineq > 0 ? problem.ineq_jacobian(x) : Matrix(0, n);
  pt.JG = problem.num_vanishing > 0 ? problem.G_jacobian(x) : Matrix(0, n);
  pt.JH = problem.num_vanishing > 0 ? problem.H_jacobian(x) : Matrix(0, n);
  check_jac(pt.Jh, problem.num_eq, n, "Jh");
  check_jac(pt.Jg, problem.num_ineq, n, "Jg");
  check_jac(pt.JG, problem.num_vanishing, n, "JG");
  check_jac(pt.JH, problem.num_vanishing, n, "JH");
  return pt;
}

double constraint_violation(const PointValues& pt) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < pt.h.size(); ++i) v = std::max(v, std::abs(pt.h(i)));
  for (Eigen::Index i = 0; i < pt.g.size(); ++i) v = std::max(v, pos(pt.g(i)));
  for (Eigen::Index i = 0; i < pt.H.size(); ++i) {
    v = std::max(v, dist_to_branch(pt.F(static_cast<int>(i)), ConeBranch::P));
  }
  return v;
}

double dist_to_branch(const Vec2& v, ConeBranch branch) {
  switch (branch) {
    case ConeBranch::P1:
      return std::abs(v(0));
    case ConeBranch::P2:
      return pos(v(0)) + pos(v(1));
    case ConeBranch::P:
      return pos(v(0)) + pos(std::min(-v(0), v(1)));
  }
  return 0.0;
}

bool in_branch(const Vec2& v, ConeBranch branch, double tol) {
  return dist_to_branch(v, branch) <= tol;
}

bool normal_cone_member(const Vec2& v, const Vec2& lambda_F, ConeBranch branch,
                        double tol) {
  if (!in_branch(v, branch, tol)) {
    throw std::domain_error("normal_cone_member: point is not in the branch");
  }
  const double l1 = lambda_F(0);
  const double l2 = lambda_F(1);
  const auto zero = [tol](double a) { return std::abs(a) <= tol; };
  switch (branch) {
    case ConeBranch::P1:
      // R x {0} at every point of P1.
      return zero(l2);
    case ConeBranch::P2:
      // Normal cone of the nonpositive orthant.
      return l1 >= -tol && l2 >= -tol && zero(l1 * v(0)) && zero(l2 * v(1));
    case ConeBranch::P: {
      // Sign pattern of (-H, G) = v.
      const bool h_zero = zero(v(0));
      const bool g_zero = zero(v(1));
      if (h_zero && g_zero) return zero(l2) || (zero(l1) && l2 >= -tol);  // I00
      if (h_zero && v(1) > 0) return zero(l2);                            // I0+
      if (h_zero && v(1) < 0) return l1 >= -tol && zero(l2);              // I0-
      if (g_zero) return zero(l1) && l2 >= -tol;                          // I+0
      return zero(l1) && zero(l2);                                        // I+-
    }
  }
  return false;
}

IndexSets classify_indices(const PointValues& pt, double tau_act) {
  IndexSets sets;
  sets.tau_act = tau_act;
  for (Eigen::Index i = 0; i < pt.g.size(); ++i) {
    if (std::abs(pt.g(i)) <= tau_act * (1.0 + std::abs(pt.g(i)))) {
      sets.Ig.push_back(static_cast<int>(i));
    }
  }
  for (Eigen::Index i = 0; i < pt.H.size(); ++i) {
    const double H = pt.H(i);
    const double G = pt.G(i);
    const double band = tau_act * (1.0 + std::abs(H) + std::abs(G));
    const int idx = static_cast<int>(i);
    const bool h_zero = std::abs(H) <= band;
    const bool g_zero = std::abs(G) <= band;
    if (h_zero) {
      if (g_zero) {
        sets.I00.push_back(idx);
      } else if (G > 0) {
        sets.I0plus.push_back(idx);
      } else {
        sets.I0minus.push_back(idx);
      }
    } else if (H > 0) {
      if (g_zero) {
        sets.Iplus0.push_back(idx);
      } else if (G < 0) {
        sets.IplusMinus.push_back(idx);
      }
    }
  }
  return sets;
}

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& fn,
                   const Vector& x) {
  const Vector f0 = fn(x);
  Matrix J(f0.size(), x.size());
  Vector xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = 1e-6 * (1.0 + std::abs(x(j)));
    xp(j) = x(j) + step;
    const Vector fp = fn(xp);
    xp(j) = x(j) - step;
    const Vector fm = fn(xp);
    xp(j) = x(j);
    J.col(j) = (fp - fm) / (2.0 * step);
  }
  return J;
}

Vector fd_gradient(const std::function<double(const Vector&)>& fn,
                   const Vector& x) {
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = 1e-6 * (1.0 + std::abs(x(j)));
    xp(j) = x(j) + step;
    const double fp = fn(xp);
    xp(j) = x(j) - step;
    const double fm = fn(xp);
    xp(j) = x(j);
    g(j) = (fp - fm) / (2.0 * step);
  }
  return g;
}

}  // namespace mpvc
