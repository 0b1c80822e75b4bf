// Batches of independent solver runs: an OpenMP runner and the serial
// reference it is checked against, plus clustering of the limit points.
#pragma once

#include "mpvc/sqp.hpp"

#include <map>
#include <string>
#include <vector>

namespace mpvc {

enum class Algorithm { Basic, Extended };

std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

SqpResult run_algorithm(const ProblemInstance& problem, const Vector& x0, Algorithm algorithm,
                        const SqpConfig& config = {});

/// Cartesian product of the axes, first axis varying slowest.
std::vector<Vector> grid_points(const std::vector<std::vector<double>>& axes);

/// Values -5, -4, ..., 10, 20 used on each axis of the academic grid.
std::vector<double> academic_axis();

/// One run per start, results in start order. Driver exceptions other than
/// std::invalid_argument are caught per run and reported with status Error.
std::vector<SqpResult> run_batch(const ProblemInstance& problem,
                                 const std::vector<Vector>& starts, Algorithm algorithm,
                                 const SqpConfig& config = {}, int threads = 0);

/// Same contract as run_batch, one run after another.
std::vector<SqpResult> run_batch_serial(const ProblemInstance& problem,
                                        const std::vector<Vector>& starts,
                                        Algorithm algorithm, const SqpConfig& config = {});

/// True iff the two results agree in everything except wall time.
bool same_outcome(const SqpResult& a, const SqpResult& b);

struct LimitCluster {
  Vector point;
  double f = 0.0;
  std::vector<int> members;
};

struct BatchSummary {
  int runs = 0;
  int solved = 0;
  /// Clusters of Solved end points, in order of first appearance.
  std::vector<LimitCluster> clusters;
  /// Start indices of runs that did not end Solved.
  std::vector<int> failures;
  std::map<std::string, int> status_counts;
};

/// Groups Solved end points: a point joins the first cluster whose
/// representative lies within radius (Euclidean).
BatchSummary summarize(const std::vector<SqpResult>& results, double radius = 1e-3);

/// Number of Solved end points within radius of p.
int count_near(const std::vector<SqpResult>& results, const Vector& p, double radius);

}  // namespace mpvc
