// Auxiliary subproblem QPVC(rho) at an iterate and the piecewise solver that
// walks its convex QP pieces until a Q_M-stationary point is reached.
#pragma once

#include "mpvc/convex.hpp"
#include "mpvc/core.hpp"

#include <stdexcept>
#include <vector>

namespace mpvc {

/// Relaxation selectors. Entries are 0 or 1.
struct Theta {
  Vector g, H, G;
};

Theta choose_theta(const PointValues& pt);

/// Frozen linearization at x_k.
struct AuxiliaryProblem {
  EvalPoint pt;
  Matrix B;
  Theta theta;
  double rho = 1.0;
  double zeta = 0.9;
  double rho_bar = 10.0;
  int max_restarts = 30;

  [[nodiscard]] int n() const { return static_cast<int>(pt.x.size()); }
  [[nodiscard]] int num_eq() const { return static_cast<int>(pt.h.size()); }
  [[nodiscard]] int num_ineq() const { return static_cast<int>(pt.g.size()); }
  [[nodiscard]] int num_vanishing() const { return static_cast<int>(pt.H.size()); }

  /// delta (theta^H H_i, -theta^G G_i) + F_i + grad F_i s.
  [[nodiscard]] Vec2 transformed_row(int i, const Vector& s, double delta) const;

  /// Objective 1/2 s'Bs + grad f s + rho (delta^2 / 2 + delta).
  [[nodiscard]] double objective(const Vector& s, double delta) const;
};

/// Builds the auxiliary problem with theta chosen from the point.
AuxiliaryProblem make_auxiliary(const EvalPoint& pt, const Matrix& B, double rho);

/// V1 as a sorted index list; V2 is the complement in V.
struct Partition {
  IndexList V1;

  [[nodiscard]] bool contains(int i) const;
  bool operator==(const Partition&) const = default;
};

/// Multipliers of one piece in the original (h, g, F, delta) coordinates.
struct PieceMultiplier {
  Vector lambda_h;
  Vector lambda_g;
  Matrix lambda_F;  // |V| x 2, rows (lambda^H_i, lambda^G_i)
  double lambda_delta = 0.0;

  static PieceMultiplier zero(const AuxiliaryProblem& aux);
};

/// Index sets I^1, I^00 and I^0- of the transformed rows at (s, delta).
struct PointSets {
  IndexList I1;
  IndexList I00;
  IndexList I0minus;
};

PointSets classify_point(const AuxiliaryProblem& aux, const Vector& s, double delta,
                         double tol = 1e-9);

/// Convex piece QP(rho, V1) in the variables z = (s, delta).
QuadProgram build_piece_qp(const AuxiliaryProblem& aux, const Partition& part);

/// Maps solver multipliers of build_piece_qp(aux, part) to piece multipliers.
PieceMultiplier piece_multiplier(const AuxiliaryProblem& aux, const Partition& part,
                                 const SolveResult& result);

/// Minimal delta over the piece's feasible set; +infinity if it is empty.
double min_delta(const AuxiliaryProblem& aux, const Partition& part);

/// True iff no point of the piece has objective below the given point's by
/// more than tol (1 + |objective|).
bool is_solution_of_piece(const AuxiliaryProblem& aux, const Partition& part,
                          const Vector& s, double delta, double tol = 1e-9);

struct PieceStep {
  Vector s;
  double delta = 1.0;
  PieceMultiplier lambda;
  Partition V1;
  double objective = 0.0;
};

enum class QpvcStatus { QMStationary, Degenerate };

std::string to_string(QpvcStatus status);

struct PiecePath {
  /// Steps t = 0..N of the final restart epoch.
  std::vector<PieceStep> steps;
  /// Epochs abandoned by restarts, in order, with the rho they used.
  std::vector<std::vector<PieceStep>> abandoned;
  std::vector<double> abandoned_rho;
  double final_rho = 1.0;
  int restarts = 0;
  PieceMultiplier under_multiplier;
  PieceMultiplier over_multiplier;
  QpvcStatus status = QpvcStatus::QMStationary;

  [[nodiscard]] int N() const { return static_cast<int>(steps.size()) - 1; }
  [[nodiscard]] const Vector& s_final() const { return steps.back().s; }
  [[nodiscard]] double delta_final() const { return steps.back().delta; }
};

class RestartLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs the piecewise algorithm from (s, delta) = (0, 1). aux.rho is the
/// starting penalty; the escalated value is returned in final_rho. Throws
/// RestartLimitError after aux.max_restarts escalations.
PiecePath solve_qpvc(const AuxiliaryProblem& aux);

}  // namespace mpvc
