// First-order certificates for MPVC points: weak and M-stationarity from a
// given multiplier, Q/Q_M/S-stationarity from LP duality.
#pragma once

#include "mpvc/convex.hpp"
#include "mpvc/core.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace mpvc {

enum class StationarityLevel { None, Weak, M, Q, QM, S };

std::string to_string(StationarityLevel level);
StationarityLevel level_from_string(const std::string& name);

/// (lambda^h, lambda^g, lambda^H, lambda^G) for the stationarity equation
/// grad f + J_h' lh + J_g' lg - J_H' lH + J_G' lG = 0.
struct MpvcMultiplier {
  Vector lambda_h, lambda_g, lambda_H, lambda_G;

  static MpvcMultiplier zero(const ProblemInstance& problem);
};

class InfeasiblePoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StationarityCheck {
  bool weak = false;
  bool m = false;
  double stationarity_residual = 0.0;
  double sign_violation = 0.0;
  double complementarity_residual = 0.0;
  double m_residual = 0.0;
  double feasibility_residual = 0.0;

  [[nodiscard]] StationarityLevel level() const;
};

/// Residual of the stationarity equation at pt for the multiplier.
double stationarity_residual(const EvalPoint& pt, const MpvcMultiplier& lambda);

/// Weak and M conditions for lambda at x. Index sets use the band
/// tol (1 + |H_i| + |G_i|). Throws InfeasiblePoint if the constraint
/// violation exceeds tol.
StationarityCheck check_weak_M(const ProblemInstance& problem, const Vector& x,
                               const MpvcMultiplier& lambda, double tol);
StationarityCheck check_weak_M(const EvalPoint& pt, const MpvcMultiplier& lambda,
                               double tol);

/// Role of a vanishing pair in a linearized direction problem.
enum class PairRole { P1, P2, HOnly };

/// min grad f d  s.t.  grad h d = 0, (g)^- + grad g d <= 0, and per pair:
/// P1: grad H_i d = 0; P2: (-H_i)^- - grad H_i d <= 0, (G_i)^- + grad G_i d <= 0;
/// HOnly: (-H_i)^- - grad H_i d <= 0; box -1 <= d <= 1.
LinProgram build_direction_lp(const EvalPoint& pt, const std::vector<PairRole>& roles);

/// The LP with W1 pairs on P1 and the rest on P2.
LinProgram build_lp_correction(const EvalPoint& pt, const IndexList& W1);

/// Reads the MPVC multiplier off the dual of build_direction_lp.
MpvcMultiplier direction_lp_multiplier(const EvalPoint& pt,
                                       const std::vector<PairRole>& roles,
                                       const SolveResult& result);

struct QTest {
  bool q = false;
  IndexList beta1, beta2;
  double optimum_beta1 = 0.0;
  double optimum_beta2 = 0.0;
  /// Dual of the beta1 problem and of the beta2 problem.
  MpvcMultiplier lambda_over, lambda_under;
  bool over_is_M = false;
  bool under_is_M = false;
};

/// Q-stationarity with respect to (beta1, I00 \ beta1) via the two LPs with
/// W1 = I0+ u beta1 and W1 = I0+ u beta2. Holds iff both optima are >= -tol.
/// Throws InfeasiblePoint if x violates the constraints by more than tol.
QTest check_Q_via_LP(const ProblemInstance& problem, const Vector& x,
                     const IndexList& beta1, double tol);

struct CertifyOptions {
  /// Tolerance is rel_tol (1 + ||grad f||_inf).
  double rel_tol = 1e-6;
  /// Try every partition of I00 when |I00| <= 10.
  bool exhaustive = false;
};

struct StationarityCertificate {
  Vector x;
  StationarityLevel level = StationarityLevel::None;
  bool weak = false, m = false, q = false, qm = false, s = false;
  std::vector<MpvcMultiplier> witnesses;
  IndexList beta1, beta2;
  double stationarity_residual = 0.0;
  double complementarity_residual = 0.0;
  double feasibility_residual = 0.0;
  /// Smallest LP optimum seen in the Q test (0 means certified exactly).
  double lp_margin = 0.0;
  double tol = 0.0;
  std::string note;
};

/// Strongest level certifiable at x. A hint multiplier is checked for the
/// weak and M conditions in addition to the LP duals.
StationarityCertificate certify(const ProblemInstance& problem, const Vector& x,
                                const std::optional<MpvcMultiplier>& hint = std::nullopt,
                                const CertifyOptions& options = {});

/// Certificate from a single multiplier: level at most M.
StationarityCertificate certificate_from_multiplier(const ProblemInstance& problem,
                                                    const Vector& x,
                                                    const MpvcMultiplier& lambda,
                                                    double rel_tol = 1e-6);

}  // namespace mpvc
