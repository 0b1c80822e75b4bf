// Basic SQP method for MPVC: exact-penalty merits, the search along the
// polygonal line of piece solutions, penalty and Hessian updates.
#pragma once

#include "mpvc/core.hpp"
#include "mpvc/qpvc.hpp"
#include "mpvc/stationarity.hpp"

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpvc {

struct PenaltyParams {
  Vector sigma_h, sigma_g, sigma_F;
  double xi1 = 2.0;
  double xi2 = 3.0;

  static PenaltyParams initial(const ProblemInstance& problem, double sigma0,
                               double xi1, double xi2);
  [[nodiscard]] double max() const;
};

/// Componentwise max over t = 1..N of the piece multipliers (infinity norm
/// of the two components for the vanishing pairs).
struct LambdaTilde {
  Vector h, g, F;
};

LambdaTilde lambda_tilde(const PiecePath& path);

/// sigma <- xi2 lambda~ where sigma < xi1 lambda~, else unchanged.
PenaltyParams update_penalties(const PenaltyParams& prev, const PiecePath& path);

/// True iff sigma >= lambda~ componentwise.
bool penalty_dominates(const PenaltyParams& sigma, const LambdaTilde& lt);

enum class BUpdate { DampedBFGS, Identity };

std::string to_string(BUpdate policy);
BUpdate b_update_from_string(const std::string& name);

struct SqpConfig {
  double zeta = 0.9;
  double rho0 = 1.0;
  double rho_bar = 10.0;
  double xi = 0.1;
  double xi1 = 2.0;
  double xi2 = 3.0;
  double gamma_ratio = 0.5;
  double sigma0 = 1.0;
  double eps_C = 1e-8;
  double eps_1 = 1e-10;
  double tau_act = 1e-7;
  int max_outer = 2000;
  int max_restarts = 30;
  int max_backtracks = 60;
  BUpdate B_update = BUpdate::DampedBFGS;
  // Correction step of the extended method.
  double mu = 0.1;
  double alpha_ratio = 0.5;
  double eps_init = 0.1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Merit functions

/// Penalty part of a merit at the given values, splitting V by the partition.
double penalty_split(const PointValues& v, const PenaltyParams& sigma, const Partition& part);

/// Penalty part with d(F_i, P) for every pair.
double penalty_full(const PointValues& v, const PenaltyParams& sigma);

/// Linearized merit at x_k along s with the partition's branch distances.
double merit_hat_phi(const AuxiliaryProblem& aux, const PenaltyParams& sigma,
                     const Partition& part, const Vector& s);

/// Nonlinear merit at x_base + s with the partition's branch distances.
double merit_phi(const ProblemInstance& problem, const PenaltyParams& sigma,
                 const Partition& part, const Vector& x_base, const Vector& s);

/// Exact penalty merit with d(F_i, P).
double merit_Phi(const ProblemInstance& problem, const PenaltyParams& sigma, const Vector& x);
double merit_Phi(const PointValues& v, const PenaltyParams& sigma);

// ---------------------------------------------------------------------------
// Polygonal line

/// S^0 = 0, S^t = sum of segment lengths up to t.
std::vector<double> arc_lengths(const std::vector<Vector>& points);

struct PathPoint {
  int t = 1;
  double alpha = 1.0;
  Vector s;
};

/// Point at fraction gamma of the arc length of s^0..s^N. Throws
/// std::invalid_argument if the total length is zero or gamma is outside [0,1].
PathPoint parametrize_path(const std::vector<Vector>& points, double gamma);
PathPoint parametrize_path(const PiecePath& path, double gamma);

class BacktrackLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LineSearchResult {
  Vector x_next;
  PathPoint point;
  int j = 1;
  double gamma = 1.0;
  double Y0 = 0.0, Y = 0.0, Z0 = 0.0, Z = 0.0;
  /// Exact merit with the current penalties at x_k and x_next.
  double Phi_before = 0.0, Phi_after = 0.0;
  /// Number of function-value evaluations (1 for Y(0) plus j trials).
  int value_evals = 0;
  PointValues values_next;
};

/// Backtracks gamma_j = gamma_ratio^(j-1) until
/// Y(gamma_j) - Y(0) <= xi (Z(gamma_j) - Z(0)).
LineSearchResult accept_step(const ProblemInstance& problem, const AuxiliaryProblem& aux,
                             const PenaltyParams& sigma, const PiecePath& path,
                             const SqpConfig& config);

/// Merit differences along the path and their lower-bound partners.
struct DescentCheck {
  std::vector<double> r0, r1;
  std::vector<double> bound0, bound1;
  double worst_slack = -std::numeric_limits<double>::infinity();
};

DescentCheck descent_check(const AuxiliaryProblem& aux, const PenaltyParams& sigma,
                           const PiecePath& path);

/// Lagrangian gradient grad f + J_h' lh + J_g' lg - J_H' lH + J_G' lG.
Vector lagrangian_gradient(const EvalPoint& pt, const MpvcMultiplier& lambda);

MpvcMultiplier to_mpvc_multiplier(const PieceMultiplier& lambda);

/// Damped BFGS with Powell's 0.2 rule; identity policy returns I. The result
/// is SPD (reset to I if the Cholesky test fails).
Matrix update_B(const Matrix& B, const Vector& s, const Vector& y, BUpdate policy);

// ---------------------------------------------------------------------------
// Driver

/// Error marks a run stopped by an unexpected solver exception (batch runs
/// only; single runs propagate the exception).
enum class SqpStatus { Solved, Degenerate, RestartLimit, MaxIter, BacktrackLimit, Error };

std::string to_string(SqpStatus status);
SqpStatus sqp_status_from_string(const std::string& name);

struct IterationRecord {
  int k = 0;
  Vector x;
  double f = 0.0;
  double viol = 0.0;
  double delta_N = 0.0;
  int N_k = 0;
  int j_k = 0;
  double gamma = 0.0;
  double rho = 0.0;
  double sigma_max = 0.0;
  double step_norm = 0.0;
  int restarts = 0;
  // Extended method only; NaN otherwise.
  double correction_dfdk = std::numeric_limits<double>::quiet_NaN();
  double correction_alpha = std::numeric_limits<double>::quiet_NaN();
  double eps_k = std::numeric_limits<double>::quiet_NaN();
};

using IterationSink = std::function<void(const IterationRecord&)>;

struct SqpCounters {
  int outer_iterations = 0;
  int sum_j = 0;
  int f_evals = 0;
  int grad_evals = 0;
  std::vector<int> N_k;
  int corrections = 0;
};

/// Outcome of the per-iteration invariant checks.
struct InvariantReport {
  bool delta_monotone = true;
  bool piece_feasible = true;
  bool descent = true;
  bool merit_decrease = true;
  bool penalty_dominance = true;
  bool correction_monotone = true;
  double worst_piece_violation = 0.0;
  double worst_descent_slack = -std::numeric_limits<double>::infinity();
  std::vector<std::string> messages;

  [[nodiscard]] bool all() const {
    return delta_monotone && piece_feasible && descent && merit_decrease &&
           penalty_dominance && correction_monotone;
  }
};

struct SqpResult {
  SqpStatus status = SqpStatus::MaxIter;
  std::string message;
  Vector x;
  double f = 0.0;
  double viol = 0.0;
  double rho = 0.0;
  PenaltyParams sigma;
  MpvcMultiplier multiplier;
  StationarityCertificate certificate;
  SqpCounters counters;
  InvariantReport invariants;
  std::vector<IterationRecord> trace;
  double wall_seconds = 0.0;
};

/// Checks the per-path invariants (delta monotone within each epoch, piece
/// feasibility) and records failures in the report.
void check_path_invariants(const AuxiliaryProblem& aux, const PiecePath& path,
                           InvariantReport& report, int k);

SqpResult run_basic_sqp(const ProblemInstance& problem, const Vector& x0,
                        const SqpConfig& config = {}, const IterationSink& sink = {});

}  // namespace mpvc

namespace mpvc {

/// Outcome of a per-iteration pre-step applied before the subproblem.
struct PreStep {
  Vector x;
  bool moved = false;
  double dfdk = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double eps_k = std::numeric_limits<double>::quiet_NaN();
  int value_evals = 0;
  /// Exact merit before and after the move.
  double Phi_before = 0.0, Phi_after = 0.0;
};

/// Called at each outer iteration with the current point, the penalties in
/// force and the previous iterate (empty at k = 0).
using PreStepHook = std::function<PreStep(const EvalPoint& pt, const PenaltyParams& sigma,
                                          const Vector& x_prev, int k)>;

/// The outer loop shared by the basic and extended drivers.
SqpResult run_sqp_loop(const ProblemInstance& problem, const Vector& x0,
                       const SqpConfig& config, const IterationSink& sink,
                       const PreStepHook& pre_step);

}  // namespace mpvc
