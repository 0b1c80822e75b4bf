#include "mpvc/batch.hpp"

#include "mpvc/extended.hpp"

#include <omp.h>

#include <stdexcept>

namespace mpvc {

namespace {

SqpResult guarded_run(const ProblemInstance& problem, const Vector& x0, Algorithm algorithm,
                      const SqpConfig& config) {
  try {
    return run_algorithm(problem, x0, algorithm, config);
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    SqpResult r;
    r.status = SqpStatus::Error;
    r.message = e.what();
    r.x = x0;
    return r;
  }
}

}  // namespace

std::string to_string(Algorithm algorithm) {
  return algorithm == Algorithm::Basic ? "basic" : "extended";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "basic") return Algorithm::Basic;
  if (name == "extended") return Algorithm::Extended;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

SqpResult run_algorithm(const ProblemInstance& problem, const Vector& x0, Algorithm algorithm,
                        const SqpConfig& config) {
  return algorithm == Algorithm::Basic ? run_basic_sqp(problem, x0, config)
                                       : run_extended_sqp(problem, x0, config);
}

std::vector<Vector> grid_points(const std::vector<std::vector<double>>& axes) {
  std::vector<Vector> pts;
  if (axes.empty()) return pts;
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  pts.reserve(total);
  const auto dim = static_cast<Eigen::Index>(axes.size());
  for (std::size_t idx = 0; idx < total; ++idx) {
    Vector x(dim);
    std::size_t rem = idx;
    for (Eigen::Index d = dim - 1; d >= 0; --d) {
      const auto& a = axes[d];
      x(d) = a[rem % a.size()];
      rem /= a.size();
    }
    pts.push_back(x);
  }
  return pts;
}

std::vector<double> academic_axis() {
  std::vector<double> v;
  for (int i = -5; i <= 10; ++i) v.push_back(i);
  v.push_back(20.0);
  return v;
}

std::vector<SqpResult> run_batch(const ProblemInstance& problem,
                                 const std::vector<Vector>& starts, Algorithm algorithm,
                                 const SqpConfig& config, int threads) {
  config.validate();
  const int count = static_cast<int>(starts.size());
  std::vector<SqpResult> results(starts.size());
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  std::vector<std::string> errors(starts.size());
#pragma omp parallel for schedule(dynamic) num_threads(nt)
  for (int i = 0; i < count; ++i) {
    try {
      results[i] = guarded_run(problem, starts[i], algorithm, config);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (int i = 0; i < count; ++i) {
    if (!errors[i].empty()) {
      throw std::invalid_argument("start " + std::to_string(i) + ": " + errors[i]);
    }
  }
  return results;
}

std::vector<SqpResult> run_batch_serial(const ProblemInstance& problem,
                                        const std::vector<Vector>& starts,
                                        Algorithm algorithm, const SqpConfig& config) {
  config.validate();
  std::vector<SqpResult> results;
  results.reserve(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    try {
      results.push_back(guarded_run(problem, starts[i], algorithm, config));
    } catch (const std::exception& e) {
      throw std::invalid_argument("start " + std::to_string(i) + ": " + e.what());
    }
  }
  return results;
}

bool same_outcome(const SqpResult& a, const SqpResult& b) {
  if (a.status != b.status || a.message != b.message) return false;
  if (a.x.size() != b.x.size() || a.x != b.x) return false;
  if (a.f != b.f && !(std::isnan(a.f) && std::isnan(b.f))) return false;
  if (a.certificate.level != b.certificate.level) return false;
  const auto& ca = a.counters;
  const auto& cb = b.counters;
  return ca.outer_iterations == cb.outer_iterations && ca.sum_j == cb.sum_j &&
         ca.f_evals == cb.f_evals && ca.grad_evals == cb.grad_evals && ca.N_k == cb.N_k &&
         ca.corrections == cb.corrections && a.invariants.all() == b.invariants.all();
}

BatchSummary summarize(const std::vector<SqpResult>& results, double radius) {
  BatchSummary s;
  s.runs = static_cast<int>(results.size());
  for (int i = 0; i < s.runs; ++i) {
    const auto& r = results[i];
    ++s.status_counts[to_string(r.status)];
    if (r.status != SqpStatus::Solved) {
      s.failures.push_back(i);
      continue;
    }
    ++s.solved;
    bool placed = false;
    for (auto& c : s.clusters) {
      if ((c.point - r.x).norm() <= radius) {
        c.members.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) s.clusters.push_back({r.x, r.f, {i}});
  }
  return s;
}

int count_near(const std::vector<SqpResult>& results, const Vector& p, double radius) {
  int n = 0;
  for (const auto& r : results) {
    if (r.status == SqpStatus::Solved && (r.x - p).norm() <= radius) ++n;
  }
  return n;
}

}  // namespace mpvc
