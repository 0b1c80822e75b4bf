// Extended SQP method: an LP-based correction of each iterate, steered by
// estimated index sets, ahead of the basic step.
#pragma once

#include "mpvc/sqp.hpp"

namespace mpvc {

/// Index sets estimated with threshold eps.
struct EstimatedIndexSets {
  IndexList I0plus, I00, I0minus, Iplus0, IplusMinus;
};

EstimatedIndexSets estimate_index_sets(const PointValues& pt, double eps);

/// sqrt(||x_k - x_prev||_inf); eps_init when x_prev is empty.
double epsilon_schedule(const Vector& x_k, const Vector& x_prev, double eps_init = 0.1);

/// f + penalties with d(F_i, P1) on W1 and d(F_i, P2) elsewhere.
double merit_varphi(const PointValues& v, const PenaltyParams& sigma, const Partition& W1);
double merit_varphi(const ProblemInstance& problem, const PenaltyParams& sigma,
                    const Partition& W1, const Vector& x);

class CorrectionBacktrackError : public BacktrackLimitError {
 public:
  using BacktrackLimitError::BacktrackLimitError;
};

struct CorrectionReport {
  double eps_k = 0.0;
  EstimatedIndexSets sets;
  IndexList W1a, W1b;
  Vector d_a, d_b;
  double dfd_a = 0.0, dfd_b = 0.0;
  /// Chosen direction and its partition.
  Vector d;
  IndexList W1;
  double dfdk = 0.0;
  bool attempted = false;
  bool corrected = false;
  bool escaped = false;
  int j = 0;
  double alpha = 0.0;
  double Phi_before = 0.0, Phi_after = 0.0, varphi = 0.0;
  int value_evals = 0;
  Vector x_corrected;
};

/// One correction step at pt with penalties sigma. Throws
/// CorrectionBacktrackError after config.max_backtracks reductions.
CorrectionReport correct_iterate(const ProblemInstance& problem, const PenaltyParams& sigma,
                                 const EvalPoint& pt, double eps_k, const SqpConfig& config);

/// Basic loop with the correction applied before each subproblem. On Solved
/// the certificate comes from the LP test at the final point.
SqpResult run_extended_sqp(const ProblemInstance& problem, const Vector& x0,
                           const SqpConfig& config = {}, const IterationSink& sink = {});

}  // namespace mpvc
