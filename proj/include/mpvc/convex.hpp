// Dense convex solvers used by every other module: dual and primal active-set
// methods for strictly convex QPs and a bounded-variable revised simplex for
// LPs. All are reentrant; each call owns its workspace.
#pragma once

#include "mpvc/core.hpp"

#include <limits>
#include <string>

namespace mpvc {

/// min 1/2 z'Hz + c'z  s.t.  Aeq z = beq,  Ain z <= bin.
struct QuadProgram {
  Matrix H;
  Vector c;
  Matrix Aeq;
  Vector beq;
  Matrix Ain;
  Vector bin;

  [[nodiscard]] int num_vars() const { return static_cast<int>(c.size()); }
  [[nodiscard]] double objective(const Vector& z) const {
    return 0.5 * z.dot(H * z) + c.dot(z);
  }
};

/// min c'z  s.t.  Aeq z = beq,  Ain z <= bin,  lower <= z <= upper.
/// Empty lower/upper mean unbounded below/above.
struct LinProgram {
  Vector c;
  Matrix Aeq;
  Vector beq;
  Matrix Ain;
  Vector bin;
  Vector lower;
  Vector upper;

  [[nodiscard]] int num_vars() const { return static_cast<int>(c.size()); }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterLimit };

std::string to_string(SolveStatus status);

/// Multipliers follow the Lagrangian
///   objective + mu_eq'(Aeq z - beq) + mu_in'(Ain z - bin)
///             + mu_lower'(lower - z) + mu_upper'(z - upper)
/// with mu_in, mu_lower, mu_upper >= 0.
struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  Vector z;
  Vector mu_eq;
  Vector mu_in;
  Vector mu_lower;
  Vector mu_upper;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double kkt_residual = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;

  [[nodiscard]] bool optimal() const { return status == SolveStatus::Optimal; }
};

struct QpOptions {
  /// Iteration cap is cap_factor * (vars + constraints).
  int cap_factor = 50;
  double feas_tol = 1e-9;
};

/// Solves a strictly convex QP by the dual active-set method of Goldfarb and
/// Idnani. Throws std::invalid_argument when H is not positive definite or
/// dimensions disagree.
SolveResult solve_qp(const QuadProgram& qp, const QpOptions& options = {});

/// Primal null-space active-set method started from an LP vertex. Slower;
/// kept as an independent reference for the dual method.
SolveResult solve_qp_primal(const QuadProgram& qp, const QpOptions& options = {});

/// Primal method warm-started from a point that is feasible (within
/// feas_tol). Falls back to phase 1 when the point turns out infeasible.
SolveResult solve_qp_primal(const QuadProgram& qp, const Vector& feasible_start,
                            const QpOptions& options = {});

struct LpOptions {
  int cap_factor = 50;
  double feas_tol = 1e-9;
};

SolveResult solve_lp(const LinProgram& lp, const LpOptions& options = {});

/// max(primal infeasibility) of z for the QP/LP constraint rows.
double primal_infeasibility(const Matrix& Aeq, const Vector& beq,
                            const Matrix& Ain, const Vector& bin,
                            const Vector& z);

}  // namespace mpvc
