#include "mpvc/extended.hpp"

#include <algorithm>
#include <cmath>

namespace mpvc {

namespace {

constexpr double kNoDescent = 1e-10;

IndexList sorted_union(IndexList a, const IndexList& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

}  // namespace

EstimatedIndexSets estimate_index_sets(const PointValues& pt, double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be nonnegative");
  EstimatedIndexSets s;
  for (int i = 0; i < static_cast<int>(pt.H.size()); ++i) {
    const double H = pt.H(i);
    const double G = pt.G(i);
    if (std::abs(H) <= eps) {
      if (eps < G) {
        s.I0plus.push_back(i);
      } else if (std::abs(G) <= eps) {
        s.I00.push_back(i);
      } else {
        s.I0minus.push_back(i);
      }
    } else if (H > eps) {
      if (std::abs(G) <= eps) {
        s.Iplus0.push_back(i);
      } else if (G < -eps) {
        s.IplusMinus.push_back(i);
      }
    }
  }
  return s;
}

double epsilon_schedule(const Vector& x_k, const Vector& x_prev, double eps_init) {
  if (x_prev.size() == 0) return eps_init;
  if (x_prev.size() != x_k.size()) throw std::invalid_argument("iterate sizes differ");
  return std::sqrt((x_k - x_prev).lpNorm<Eigen::Infinity>());
}

double merit_varphi(const PointValues& v, const PenaltyParams& sigma, const Partition& W1) {
  return v.f + penalty_split(v, sigma, W1);
}

double merit_varphi(const ProblemInstance& problem, const PenaltyParams& sigma,
                    const Partition& W1, const Vector& x) {
  return merit_varphi(evaluate_values(problem, x), sigma, W1);
}

CorrectionReport correct_iterate(const ProblemInstance& problem, const PenaltyParams& sigma,
                                 const EvalPoint& pt, double eps_k, const SqpConfig& config) {
  CorrectionReport rep;
  rep.eps_k = eps_k;
  rep.x_corrected = pt.x;
  rep.sets = estimate_index_sets(pt, eps_k);
  rep.W1a = rep.sets.I0plus;
  rep.W1b = sorted_union(rep.sets.I0plus, rep.sets.I00);

  auto solve = [&](const IndexList& W1, Vector& d, double& value) {
    const SolveResult r = solve_lp(build_lp_correction(pt, W1));
    if (!r.optimal()) {
      throw std::runtime_error("correction LP failed with status " + to_string(r.status));
    }
    d = r.z;
    value = pt.grad_f.dot(d);
  };
  solve(rep.W1a, rep.d_a, rep.dfd_a);
  if (rep.W1b == rep.W1a) {
    rep.d_b = rep.d_a;
    rep.dfd_b = rep.dfd_a;
  } else {
    solve(rep.W1b, rep.d_b, rep.dfd_b);
  }
  const bool pick_b = rep.dfd_b < rep.dfd_a;
  rep.d = pick_b ? rep.d_b : rep.d_a;
  rep.W1 = pick_b ? rep.W1b : rep.W1a;
  rep.dfdk = pick_b ? rep.dfd_b : rep.dfd_a;
  if (rep.dfdk >= -kNoDescent) return rep;

  rep.attempted = true;
  rep.Phi_before = merit_Phi(pt, sigma);
  rep.varphi = merit_varphi(pt, sigma, Partition{rep.W1});
  const double escape = (rep.Phi_before - rep.varphi) / (config.mu * rep.dfdk);
  double alpha = 1.0;
  for (int j = 1; j <= config.max_backtracks; ++j, alpha *= config.alpha_ratio) {
    const Vector x = pt.x + alpha * rep.d;
    const PointValues v = evaluate_values(problem, x);
    ++rep.value_evals;
    const double Phi = merit_Phi(v, sigma);
    if (Phi - rep.Phi_before <= config.mu * alpha * rep.dfdk) {
      rep.corrected = true;
      rep.j = j;
      rep.alpha = alpha;
      rep.Phi_after = Phi;
      rep.x_corrected = x;
      return rep;
    }
    if (alpha <= escape) {
      rep.escaped = true;
      rep.j = j;
      rep.alpha = alpha;
      rep.Phi_after = rep.Phi_before;
      return rep;
    }
  }
  throw CorrectionBacktrackError("correction found no acceptable step after " +
                                 std::to_string(config.max_backtracks) + " reductions");
}

SqpResult run_extended_sqp(const ProblemInstance& problem, const Vector& x0,
                           const SqpConfig& config, const IterationSink& sink) {
  auto hook = [&](const EvalPoint& pt, const PenaltyParams& sigma, const Vector& x_prev,
                  int) {
    const double eps = epsilon_schedule(pt.x, x_prev, config.eps_init);
    const CorrectionReport rep = correct_iterate(problem, sigma, pt, eps, config);
    PreStep ps;
    ps.x = rep.x_corrected;
    ps.moved = rep.corrected;
    ps.dfdk = rep.dfdk;
    ps.alpha = rep.corrected ? rep.alpha : 0.0;
    ps.eps_k = eps;
    ps.value_evals = rep.value_evals;
    ps.Phi_before = rep.Phi_before;
    ps.Phi_after = rep.Phi_after;
    return ps;
  };
  return run_sqp_loop(problem, x0, config, sink, hook);
}

}  // namespace mpvc
