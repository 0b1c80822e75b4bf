#include "mpvc/convex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpvc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Vector& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

void check_dims(const Matrix& Aeq, const Vector& beq, const Matrix& Ain,
                const Vector& bin, Eigen::Index m) {
  const bool eq_ok = (Aeq.rows() == 0 && beq.size() == 0) ||
                     (Aeq.rows() == beq.size() && Aeq.cols() == m);
  const bool in_ok = (Ain.rows() == 0 && bin.size() == 0) ||
                     (Ain.rows() == bin.size() && Ain.cols() == m);
  if (!eq_ok || !in_ok) throw std::invalid_argument("constraint dimensions disagree");
}

// ---------------------------------------------------------------------------
// Bounded-variable revised simplex on  min c'y, A y = b, 0 <= y <= ub, b >= 0.

struct Simplex {
  Matrix A;
  Vector b;
  Vector ub;
  std::vector<int> basis;
  std::vector<bool> at_upper;
  std::vector<bool> is_basic;
  Matrix Binv;
  int iterations = 0;

  void refactor() {
    const auto m = A.rows();
    if (m == 0) return;
    Matrix B(m, m);
    for (Eigen::Index r = 0; r < m; ++r) B.col(r) = A.col(basis[r]);
    Binv = B.partialPivLu().inverse();
  }

  Vector basic_values() const {
    Vector rhs = b;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (!is_basic[j] && at_upper[j]) rhs -= A.col(j) * ub(j);
    }
    return Binv * rhs;
  }

  Vector values() const {
    Vector y = Vector::Zero(A.cols());
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (!is_basic[j] && at_upper[j]) y(j) = ub(j);
    }
    const Vector xb = basic_values();
    for (std::size_t r = 0; r < basis.size(); ++r) y(basis[r]) = xb(r);
    return y;
  }

  Vector duals(const Vector& cost) const {
    Vector cb(basis.size());
    for (std::size_t r = 0; r < basis.size(); ++r) cb(r) = cost(basis[r]);
    return Binv.transpose() * cb;
  }

  // Dantzig pricing with a switch to Bland's rule after a run of degenerate
  // pivots; basic values are updated in place between refactorizations.
  SolveStatus run(const Vector& cost, int max_iter) {
    const auto m = A.rows();
    const auto N = A.cols();
    const double dtol = 1e-9 * (1.0 + inf_norm(cost));
    constexpr double harris = 1e-10;
    constexpr int kRefactor = 100;
    constexpr int kDegenerateRun = 500;
    int since_refactor = 0;
    int degenerate = 0;
    Vector xb = basic_values();
    while (true) {
      if (iterations >= max_iter) return SolveStatus::IterLimit;
      const bool bland = degenerate >= kDegenerateRun;
      const Vector reduced = cost - A.transpose() * duals(cost);
      int enter = -1;
      double best = 0.0;
      for (Eigen::Index j = 0; j < N; ++j) {
        if (is_basic[j] || ub(j) == 0.0) continue;
        const double d = reduced(j);
        const double gain = at_upper[j] ? d : -d;
        if (gain <= dtol) continue;
        if (bland) {
          enter = static_cast<int>(j);
          break;
        }
        if (gain > best) {
          best = gain;
          enter = static_cast<int>(j);
        }
      }
      if (enter < 0) return SolveStatus::Optimal;

      const Vector w = Binv * A.col(enter);
      const double dir = at_upper[enter] ? -1.0 : 1.0;
      const double ptol = 1e-9 * std::max(1.0, inf_norm(w));
      // Step limit of basic row r, optionally relaxed by slack; inf if none.
      auto limit = [&](Eigen::Index r, double slack, bool& to_upper) {
        const double alpha = dir * w(r);
        to_upper = false;
        if (alpha > ptol) return (std::max(xb(r), 0.0) + slack) / alpha;
        if (alpha < -ptol && std::isfinite(ub(basis[r]))) {
          to_upper = true;
          return (std::max(ub(basis[r]) - xb(r), 0.0) + slack) / (-alpha);
        }
        return kInf;
      };
      double t_best = std::isfinite(ub(enter)) ? ub(enter) : kInf;
      int leave_row = -1;  // -1: bound flip of the entering variable
      bool leave_to_upper = false;
      bool to_upper = false;
      if (bland) {
        int leave_var = std::isfinite(ub(enter)) ? enter : static_cast<int>(N);
        for (Eigen::Index r = 0; r < m; ++r) {
          const double t = limit(r, 0.0, to_upper);
          if (!std::isfinite(t)) continue;
          const double tie = 1e-12 * (1.0 + std::abs(t_best == kInf ? 0.0 : t_best));
          if (t < t_best - tie || (std::abs(t - t_best) <= tie && basis[r] < leave_var)) {
            t_best = t;
            leave_row = static_cast<int>(r);
            leave_var = basis[r];
            leave_to_upper = to_upper;
          }
        }
      } else {
        // Harris: bound the step with relaxed limits, then take the largest
        // pivot among the rows that block within that bound.
        double t_relaxed = kInf;
        for (Eigen::Index r = 0; r < m; ++r) {
          t_relaxed = std::min(t_relaxed, limit(r, harris, to_upper));
        }
        if (t_relaxed < t_best) {
          double pivot = 0.0;
          for (Eigen::Index r = 0; r < m; ++r) {
            const double t = limit(r, 0.0, to_upper);
            if (t <= t_relaxed && std::abs(w(r)) > pivot) {
              pivot = std::abs(w(r));
              t_best = t;
              leave_row = static_cast<int>(r);
              leave_to_upper = to_upper;
            }
          }
        }
      }
      if (!std::isfinite(t_best)) return SolveStatus::Unbounded;
      ++iterations;
      degenerate = t_best <= 1e-12 ? degenerate + 1 : 0;

      xb -= (dir * t_best) * w;
      if (leave_row < 0) {
        at_upper[enter] = !at_upper[enter];
        continue;
      }
      const int out = basis[leave_row];
      is_basic[out] = false;
      at_upper[out] = leave_to_upper;
      is_basic[enter] = true;
      at_upper[enter] = false;
      basis[leave_row] = enter;
      xb(leave_row) = dir > 0 ? t_best : ub(enter) - t_best;

      const double piv = w(leave_row);
      Binv.row(leave_row) /= piv;
      for (Eigen::Index r = 0; r < m; ++r) {
        if (r != leave_row && w(r) != 0.0) Binv.row(r) -= w(r) * Binv.row(leave_row);
      }
      if (++since_refactor >= kRefactor) {
        refactor();
        xb = basic_values();
        since_refactor = 0;
      }
    }
  }
};

struct VarMap {
  int col = -1;
  int col_neg = -1;  // second column for free variables
  double sign = 1.0;
  double offset = 0.0;
};

// ---------------------------------------------------------------------------
// Active-set helpers

// Greedy independence test against an orthonormal basis (columns of Q).
bool try_add_independent(Matrix& Q, const Vector& a) {
  const double na = a.norm();
  if (na == 0.0) return false;
  Vector r = a;
  for (int pass = 0; pass < 2; ++pass) {
    if (Q.cols() > 0) r -= Q * (Q.transpose() * r);
  }
  const double nr = r.norm();
  if (nr <= 1e-9 * na) return false;
  Q.conservativeResize(a.size(), Q.cols() + 1);
  Q.col(Q.cols() - 1) = r / nr;
  return true;
}

SolveResult active_set(const QuadProgram& qp, Vector z, const QpOptions& opt) {
  const auto m = qp.H.rows();
  const auto p = qp.Aeq.rows();
  const auto q = qp.Ain.rows();
  Eigen::LLT<Matrix> llt(qp.H);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("QP Hessian is not positive definite");
  }

  std::vector<int> work_eq;
  std::vector<int> work_in;
  {
    Matrix Q(m, 0);
    for (Eigen::Index i = 0; i < p; ++i) {
      if (try_add_independent(Q, qp.Aeq.row(i).transpose())) {
        work_eq.push_back(static_cast<int>(i));
      }
    }
    for (Eigen::Index i = 0; i < q; ++i) {
      const double slack = qp.bin(i) - qp.Ain.row(i).dot(z);
      if (std::abs(slack) <= opt.feas_tol * (1.0 + std::abs(qp.bin(i))) &&
          try_add_independent(Q, qp.Ain.row(i).transpose())) {
        work_in.push_back(static_cast<int>(i));
      }
    }
  }

  SolveResult res;
  const int max_iter = opt.cap_factor * static_cast<int>(m + p + q);
  Vector lambda;
  bool at_subspace_min = false;
  while (true) {
    if (res.iterations >= max_iter) {
      res.status = SolveStatus::IterLimit;
      res.z = z;
      return res;
    }
    ++res.iterations;
    const auto k = static_cast<Eigen::Index>(work_eq.size() + work_in.size());
    Matrix AW(k, m);
    for (std::size_t r = 0; r < work_eq.size(); ++r) AW.row(r) = qp.Aeq.row(work_eq[r]);
    for (std::size_t r = 0; r < work_in.size(); ++r) {
      AW.row(work_eq.size() + r) = qp.Ain.row(work_in[r]);
    }
    const Vector g = qp.H * z + qp.c;
    // Null-space step: A_W' = [Y Z] [R; 0], step = Z (Z'HZ)^{-1} (-Z'g).
    Vector step = Vector::Zero(m);
    if (k > 0) {
      const Eigen::HouseholderQR<Matrix> qr(AW.transpose());
      const Matrix Q = qr.householderQ();
      if (k < m) {
        const Matrix Z = Q.rightCols(m - k);
        const Matrix reduced = Z.transpose() * qp.H * Z;
        step = Z * reduced.llt().solve(-(Z.transpose() * g));
      }
      const Matrix R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
      lambda = R.triangularView<Eigen::Upper>().solve(
          -(Q.leftCols(k).transpose() * (g + qp.H * step)));
    } else {
      lambda.resize(0);
      step = -llt.solve(g);
    }

    // After an unblocked full step z is the minimizer on the working set; any
    // remaining step is rounding noise.
    if (at_subspace_min || inf_norm(step) <= 1e-12 * (1.0 + inf_norm(z))) {
      at_subspace_min = false;
      const double mult_tol = 1e-10 * (1.0 + inf_norm(lambda));
      int drop = -1;
      double most_negative = -mult_tol;
      for (std::size_t r = 0; r < work_in.size(); ++r) {
        const double l = lambda(static_cast<Eigen::Index>(work_eq.size() + r));
        if (l < most_negative) {
          most_negative = l;
          drop = static_cast<int>(r);
        }
      }
      if (drop < 0) break;
      work_in.erase(work_in.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    int blocking = -1;
    const double step_norm = step.norm();
    for (Eigen::Index i = 0; i < q; ++i) {
      if (std::find(work_in.begin(), work_in.end(), static_cast<int>(i)) != work_in.end()) {
        continue;
      }
      const double ap = qp.Ain.row(i).dot(step);
      if (ap <= 1e-10 * qp.Ain.row(i).norm() * step_norm) continue;
      const double ratio = std::max(qp.bin(i) - qp.Ain.row(i).dot(z), 0.0) / ap;
      if (ratio < alpha) {
        alpha = ratio;
        blocking = static_cast<int>(i);
      }
    }
    z += alpha * step;
    if (blocking >= 0) {
      work_in.push_back(blocking);
    } else {
      at_subspace_min = true;
    }
  }

  res.status = SolveStatus::Optimal;
  res.z = z;
  res.mu_eq = Vector::Zero(p);
  res.mu_in = Vector::Zero(q);
  for (std::size_t r = 0; r < work_eq.size(); ++r) res.mu_eq(work_eq[r]) = lambda(r);
  for (std::size_t r = 0; r < work_in.size(); ++r) {
    res.mu_in(work_in[r]) = std::max(lambda(work_eq.size() + r), 0.0);
  }
  res.objective = qp.objective(z);
  Vector grad = qp.H * z + qp.c;
  if (p > 0) grad += qp.Aeq.transpose() * res.mu_eq;
  if (q > 0) grad += qp.Ain.transpose() * res.mu_in;
  res.kkt_residual = std::max(inf_norm(grad),
                              primal_infeasibility(qp.Aeq, qp.beq, qp.Ain, qp.bin, z));
  return res;
}


// ---------------------------------------------------------------------------
// Dual active-set method (Goldfarb-Idnani) with J = L^{-T} Q and the
// triangular factor R of the active normals kept up to date by rotations.

class DualFactor {
 public:
  DualFactor(const Matrix& L, Eigen::Index n)
      : J_(L.transpose().triangularView<Eigen::Upper>().solve(Matrix::Identity(n, n))),
        R_(Matrix::Zero(n, n)),
        n_(n) {}

  [[nodiscard]] Eigen::Index size() const { return iq_; }

  // d = J'np, z = J2 d2 (primal direction), r = R^{-1} d1 (dual direction).
  void directions(const Vector& np, Vector& d, Vector& z, Vector& r, bool& z_zero) const {
    d = J_.transpose() * np;
    const auto free = n_ - iq_;
    z = free > 0 ? Vector(J_.rightCols(free) * d.tail(free)) : Vector::Zero(n_);
    z_zero = free == 0 || d.tail(free).norm() <= 1e-8 * d.norm();
    if (z_zero) z.setZero();
    r = iq_ > 0 ? Vector(R_.topLeftCorner(iq_, iq_).triangularView<Eigen::Upper>().solve(
                      d.head(iq_)))
                : Vector();
  }

  // Appends a normal with d = J'np. False if it is dependent on the active set.
  bool add(Vector d) {
    for (Eigen::Index j = n_ - 1; j > iq_; --j) {
      const double a = d(j - 1);
      const double b = d(j);
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double c = a / h;
      const double s = b / h;
      d(j - 1) = h;
      d(j) = 0.0;
      rotate_cols(j - 1, j, c, s);
    }
    if (std::abs(d(iq_)) <= 1e-12 * std::max(1.0, d.head(iq_ + 1).norm())) return false;
    R_.col(iq_).head(iq_ + 1) = d.head(iq_ + 1);
    ++iq_;
    return true;
  }

  // Removes the k-th active normal.
  void remove(Eigen::Index k) {
    for (Eigen::Index c = k; c + 1 < iq_; ++c) R_.col(c) = R_.col(c + 1);
    R_.col(iq_ - 1).setZero();
    --iq_;
    for (Eigen::Index j = k; j < iq_; ++j) {
      const double a = R_(j, j);
      const double b = R_(j + 1, j);
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double c = a / h;
      const double s = b / h;
      for (Eigen::Index col = j; col < iq_; ++col) {
        const double x = R_(j, col);
        const double y = R_(j + 1, col);
        R_(j, col) = c * x + s * y;
        R_(j + 1, col) = -s * x + c * y;
      }
      R_(j + 1, j) = 0.0;
      rotate_cols(j, j + 1, c, s);
    }
  }

 private:
  void rotate_cols(Eigen::Index i, Eigen::Index j, double c, double s) {
    for (Eigen::Index k = 0; k < n_; ++k) {
      const double x = J_(k, i);
      const double y = J_(k, j);
      J_(k, i) = c * x + s * y;
      J_(k, j) = -s * x + c * y;
    }
  }

  Matrix J_;
  Matrix R_;
  Eigen::Index n_;
  Eigen::Index iq_ = 0;
};

SolveResult dual_active_set(const QuadProgram& qp, const QpOptions& opt,
                            std::vector<int>& active_in) {
  const auto n = qp.c.size();
  const auto p = qp.Aeq.rows();
  const auto q = qp.Ain.rows();
  Eigen::LLT<Matrix> llt(qp.H);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("QP Hessian is not positive definite");
  }
  DualFactor fac(llt.matrixL(), n);
  Vector x = llt.solve(-qp.c);
  // Active constraints: ids < p are equalities, p + i is inequality i.
  std::vector<int> active;
  std::vector<double> u;
  std::vector<bool> is_active(q, false);
  Vector d, z, r;
  bool z_zero = false;
  SolveResult res;
  res.status = SolveStatus::Optimal;
  int iterations = 0;
  const int max_iter = opt.cap_factor * static_cast<int>(n + p + q);

  auto step_multipliers = [&](double t) {
    for (std::size_t k = 0; k < active.size(); ++k) u[k] -= t * r(static_cast<Eigen::Index>(k));
  };

  for (Eigen::Index i = 0; i < p; ++i) {
    const Vector np = qp.Aeq.row(i).transpose();
    fac.directions(np, d, z, r, z_zero);
    const double resid = np.dot(x) - qp.beq(i);
    if (z_zero) {
      if (std::abs(resid) > opt.feas_tol * (1.0 + std::abs(qp.beq(i))) * (1.0 + np.norm())) {
        res.status = SolveStatus::Infeasible;
        return res;
      }
      continue;
    }
    const double t = -resid / z.dot(np);
    x += t * z;
    step_multipliers(t);
    if (!fac.add(d)) continue;
    active.push_back(static_cast<int>(i));
    u.push_back(t);
  }
  const auto n_eq_active = active.size();

  std::vector<double> row_norm(q);
  for (Eigen::Index i = 0; i < q; ++i) row_norm[i] = std::max(qp.Ain.row(i).norm(), 1e-300);

  while (true) {
    if (++iterations > max_iter) {
      res.status = SolveStatus::IterLimit;
      res.z = x;
      res.iterations = iterations;
      return res;
    }
    int pick = -1;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < q; ++i) {
      if (is_active[i]) continue;
      const double slack = qp.bin(i) - qp.Ain.row(i).dot(x);
      if (slack >= -opt.feas_tol * (1.0 + std::abs(qp.bin(i)))) continue;
      const double scaled = slack / row_norm[i];
      if (scaled < worst) {
        worst = scaled;
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) break;

    const Vector np = -qp.Ain.row(pick).transpose();
    double u_new = 0.0;
    while (true) {
      fac.directions(np, d, z, r, z_zero);
      double t1 = kInf;
      int drop = -1;
      for (std::size_t k = n_eq_active; k < active.size(); ++k) {
        const double rk = r(static_cast<Eigen::Index>(k));
        if (rk > 0.0) {
          const double ratio = u[k] / rk;
          if (ratio < t1) {
            t1 = ratio;
            drop = static_cast<int>(k);
          }
        }
      }
      const double slack = qp.bin(pick) - qp.Ain.row(pick).dot(x);
      const double t2 = z_zero ? kInf : -slack / z.dot(np);
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        res.status = SolveStatus::Infeasible;
        res.iterations = iterations;
        return res;
      }
      if (++iterations > max_iter) {
        res.status = SolveStatus::IterLimit;
        res.z = x;
        res.iterations = iterations;
        return res;
      }
      step_multipliers(t);
      u_new += t;
      if (!z_zero) x += t * z;
      if (t2 <= t1) {
        if (fac.add(d)) {
          active.push_back(pick + static_cast<int>(p));
          u.push_back(u_new);
          is_active[pick] = true;
        }
        break;
      }
      const int gone = active[drop] - static_cast<int>(p);
      is_active[gone] = false;
      fac.remove(drop);
      active.erase(active.begin() + drop);
      u.erase(u.begin() + drop);
    }
  }

  res.z = x;
  res.iterations = iterations;
  for (int id : active) {
    if (id >= p) active_in.push_back(id - static_cast<int>(p));
  }
  res.mu_eq = Vector::Zero(p);
  res.mu_in = Vector::Zero(q);
  for (std::size_t k = 0; k < active.size(); ++k) {
    if (active[k] < p) {
      res.mu_eq(active[k]) = -u[k];
    } else {
      res.mu_in(active[k] - p) = std::max(u[k], 0.0);
    }
  }
  res.objective = qp.objective(x);
  Vector grad = qp.H * x + qp.c;
  if (p > 0) grad += qp.Aeq.transpose() * res.mu_eq;
  if (q > 0) grad += qp.Ain.transpose() * res.mu_in;
  res.kkt_residual = std::max(inf_norm(grad),
                              primal_infeasibility(qp.Aeq, qp.beq, qp.Ain, qp.bin, x));
  return res;
}

// Re-solves the equality-constrained QP on the final working set by a
// null-space method and accepts it when it is feasible with signed multipliers.
bool polish(const QuadProgram& qp, const std::vector<int>& active_in, const QpOptions& opt,
            SolveResult& res) {
  const auto n = qp.c.size();
  const auto p = qp.Aeq.rows();
  const auto q = qp.Ain.rows();
  std::vector<int> rows_eq, rows_in;
  Matrix basis(n, 0);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (try_add_independent(basis, qp.Aeq.row(i).transpose())) rows_eq.push_back(static_cast<int>(i));
  }
  for (int i : active_in) {
    if (try_add_independent(basis, qp.Ain.row(i).transpose())) rows_in.push_back(i);
  }
  const auto k = static_cast<Eigen::Index>(rows_eq.size() + rows_in.size());
  Matrix AW(k, n);
  Vector bW(k);
  for (std::size_t r = 0; r < rows_eq.size(); ++r) {
    AW.row(r) = qp.Aeq.row(rows_eq[r]);
    bW(r) = qp.beq(rows_eq[r]);
  }
  for (std::size_t r = 0; r < rows_in.size(); ++r) {
    AW.row(rows_eq.size() + r) = qp.Ain.row(rows_in[r]);
    bW(rows_eq.size() + r) = qp.bin(rows_in[r]);
  }
  Vector x;
  Vector lambda(k);
  if (k == 0) {
    x = qp.H.llt().solve(-qp.c);
  } else {
    const Eigen::HouseholderQR<Matrix> qr(AW.transpose());
    const Matrix Q = qr.householderQ();
    const Matrix R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Vector y = R.transpose().triangularView<Eigen::Lower>().solve(bW);
    x = Q.leftCols(k) * y;
    if (k < n) {
      const Matrix Z = Q.rightCols(n - k);
      const Matrix reduced = Z.transpose() * qp.H * Z;
      x += Z * reduced.llt().solve(-(Z.transpose() * (qp.H * x + qp.c)));
    }
    lambda = R.triangularView<Eigen::Upper>().solve(-(Q.leftCols(k).transpose() * (qp.H * x + qp.c)));
  }
  if (!x.allFinite() || !lambda.allFinite()) return false;
  const double scale = 1.0 + std::max(inf_norm(qp.beq), inf_norm(qp.bin));
  if (primal_infeasibility(qp.Aeq, qp.beq, qp.Ain, qp.bin, x) > opt.feas_tol * scale) return false;
  const double mult_tol = 1e-8 * (1.0 + inf_norm(lambda));
  for (std::size_t r = 0; r < rows_in.size(); ++r) {
    if (lambda(static_cast<Eigen::Index>(rows_eq.size() + r)) < -mult_tol) return false;
  }
  res.z = x;
  res.mu_eq = Vector::Zero(p);
  res.mu_in = Vector::Zero(q);
  for (std::size_t r = 0; r < rows_eq.size(); ++r) res.mu_eq(rows_eq[r]) = lambda(r);
  for (std::size_t r = 0; r < rows_in.size(); ++r) {
    res.mu_in(rows_in[r]) = std::max(lambda(rows_eq.size() + r), 0.0);
  }
  res.objective = qp.objective(x);
  Vector grad = qp.H * x + qp.c;
  if (p > 0) grad += qp.Aeq.transpose() * res.mu_eq;
  if (q > 0) grad += qp.Ain.transpose() * res.mu_in;
  res.kkt_residual = std::max(inf_norm(grad),
                              primal_infeasibility(qp.Aeq, qp.beq, qp.Ain, qp.bin, x));
  return true;
}

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::IterLimit: return "IterLimit";
  }
  return "Unknown";
}

double primal_infeasibility(const Matrix& Aeq, const Vector& beq, const Matrix& Ain,
                            const Vector& bin, const Vector& z) {
  double v = 0.0;
  if (Aeq.rows() > 0) v = std::max(v, inf_norm(Aeq * z - beq));
  if (Ain.rows() > 0) v = std::max(v, (Ain * z - bin).cwiseMax(0.0).maxCoeff());
  return v;
}

SolveResult solve_lp(const LinProgram& lp, const LpOptions& options) {
  const auto n = lp.c.size();
  check_dims(lp.Aeq, lp.beq, lp.Ain, lp.bin, n);
  const Vector lower = lp.lower.size() ? lp.lower : Vector::Constant(n, -kInf);
  const Vector upper = lp.upper.size() ? lp.upper : Vector::Constant(n, kInf);
  if (lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("LP bound dimensions disagree");
  }
  SolveResult res;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (lower(j) > upper(j)) {
      res.status = SolveStatus::Infeasible;
      return res;
    }
  }

  // Map every variable onto nonnegative standard-form columns.
  std::vector<VarMap> vars(n);
  std::vector<double> col_ub;
  for (Eigen::Index j = 0; j < n; ++j) {
    VarMap& v = vars[j];
    v.col = static_cast<int>(col_ub.size());
    if (std::isfinite(lower(j))) {
      v.offset = lower(j);
      col_ub.push_back(upper(j) - lower(j));
    } else if (std::isfinite(upper(j))) {
      v.sign = -1.0;
      v.offset = upper(j);
      col_ub.push_back(kInf);
    } else {
      col_ub.push_back(kInf);
      v.col_neg = static_cast<int>(col_ub.size());
      col_ub.push_back(kInf);
    }
  }
  const auto n_struct = static_cast<Eigen::Index>(col_ub.size());
  const auto p = lp.Aeq.rows();
  const auto q = lp.Ain.rows();
  const auto m = p + q;
  const Eigen::Index n_total = n_struct + q + m;  // structural, slacks, artificials

  Simplex sx;
  sx.A = Matrix::Zero(m, n_total);
  sx.b = Vector::Zero(m);
  sx.ub = Vector::Constant(n_total, kInf);
  for (Eigen::Index j = 0; j < n_struct; ++j) sx.ub(j) = col_ub[j];
  Vector c_std = Vector::Zero(n_total);
  for (Eigen::Index j = 0; j < n; ++j) {
    c_std(vars[j].col) = vars[j].sign * lp.c(j);
    if (vars[j].col_neg >= 0) c_std(vars[j].col_neg) = -lp.c(j);
  }
  double c_offset = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) c_offset += lp.c(j) * vars[j].offset;

  std::vector<double> row_sign(m, 1.0);
  for (Eigen::Index r = 0; r < m; ++r) {
    const bool is_eq = r < p;
    const auto row = is_eq ? lp.Aeq.row(r) : lp.Ain.row(r - p);
    double rhs = is_eq ? lp.beq(r) : lp.bin(r - p);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = row(j);
      if (a == 0.0) continue;
      sx.A(r, vars[j].col) = a * vars[j].sign;
      if (vars[j].col_neg >= 0) sx.A(r, vars[j].col_neg) = -a;
      rhs -= a * vars[j].offset;
    }
    if (!is_eq) sx.A(r, n_struct + (r - p)) = 1.0;
    if (rhs < 0) {
      sx.A.row(r) *= -1.0;
      rhs = -rhs;
      row_sign[r] = -1.0;
    }
    sx.b(r) = rhs;
  }

  // Initial basis: slack where it has a +1 coefficient, artificial otherwise.
  sx.basis.assign(m, -1);
  sx.is_basic.assign(n_total, false);
  sx.at_upper.assign(n_total, false);
  Vector c_phase1 = Vector::Zero(n_total);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index art = n_struct + q + r;
    if (r >= p && row_sign[r] > 0) {
      sx.basis[r] = static_cast<int>(n_struct + (r - p));
      sx.ub(art) = 0.0;
    } else {
      sx.A(r, art) = 1.0;
      sx.basis[r] = static_cast<int>(art);
      c_phase1(art) = 1.0;
    }
    sx.is_basic[sx.basis[r]] = true;
  }
  sx.Binv = Matrix::Identity(m, m);

  const int max_iter = options.cap_factor * static_cast<int>(n_total + m + 1);
  const double feas_scale = 1.0 + inf_norm(sx.b);
  SolveStatus st = sx.run(c_phase1, max_iter);
  if (st == SolveStatus::IterLimit) {
    res.status = st;
    res.iterations = sx.iterations;
    return res;
  }
  sx.refactor();
  {
    const Vector y = sx.values();
    if (c_phase1.dot(y) > options.feas_tol * feas_scale) {
      res.status = SolveStatus::Infeasible;
      res.iterations = sx.iterations;
      return res;
    }
  }
  for (Eigen::Index r = 0; r < m; ++r) sx.ub(n_struct + q + r) = 0.0;

  st = sx.run(c_std, max_iter);
  res.iterations = sx.iterations;
  if (st != SolveStatus::Optimal) {
    res.status = st;
    return res;
  }
  sx.refactor();
  const Vector y = sx.values();
  const Vector pi = sx.duals(c_std);

  res.status = SolveStatus::Optimal;
  res.z.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double val = vars[j].offset + vars[j].sign * y(vars[j].col);
    if (vars[j].col_neg >= 0) val -= y(vars[j].col_neg);
    res.z(j) = std::clamp(val, lower(j), upper(j));
  }
  res.mu_eq.resize(p);
  res.mu_in.resize(q);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double mu = -row_sign[r] * pi(r);
    if (r < p) {
      res.mu_eq(r) = mu;
    } else {
      res.mu_in(r - p) = std::max(mu, 0.0);
    }
  }
  Vector reduced = lp.c;
  if (p > 0) reduced += lp.Aeq.transpose() * res.mu_eq;
  if (q > 0) reduced += lp.Ain.transpose() * res.mu_in;
  res.mu_lower = Vector::Zero(n);
  res.mu_upper = Vector::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (reduced(j) > 0 && std::isfinite(lower(j))) res.mu_lower(j) = reduced(j);
    if (reduced(j) < 0 && std::isfinite(upper(j))) res.mu_upper(j) = -reduced(j);
  }
  res.objective = lp.c.dot(res.z);
  (void)c_offset;

  double comp = 0.0;
  if (q > 0) {
    const Vector slack = lp.bin - lp.Ain * res.z;
    comp = (res.mu_in.array() * slack.array()).abs().maxCoeff();
  }
  const Vector stat = reduced - res.mu_lower + res.mu_upper;
  res.kkt_residual =
      std::max({inf_norm(stat), comp,
                primal_infeasibility(lp.Aeq, lp.beq, lp.Ain, lp.bin, res.z)});
  return res;
}

SolveResult solve_qp_primal(const QuadProgram& qp, const Vector& feasible_start,
                            const QpOptions& options) {
  const auto m = qp.c.size();
  if (qp.H.rows() != m || qp.H.cols() != m) {
    throw std::invalid_argument("QP Hessian dimensions disagree");
  }
  check_dims(qp.Aeq, qp.beq, qp.Ain, qp.bin, m);
  if (feasible_start.size() == m) {
    const double scale = 1.0 + std::max(inf_norm(qp.beq), inf_norm(qp.bin));
    if (primal_infeasibility(qp.Aeq, qp.beq, qp.Ain, qp.bin, feasible_start) <=
        options.feas_tol * scale) {
      return active_set(qp, feasible_start, options);
    }
  }
  return solve_qp_primal(qp, options);
}

SolveResult solve_qp_primal(const QuadProgram& qp, const QpOptions& options) {
  const auto m = qp.c.size();
  if (qp.H.rows() != m || qp.H.cols() != m) {
    throw std::invalid_argument("QP Hessian dimensions disagree");
  }
  check_dims(qp.Aeq, qp.beq, qp.Ain, qp.bin, m);
  if (qp.Aeq.rows() == 0 && qp.Ain.rows() == 0) {
    return active_set(qp, Vector::Zero(m), options);
  }
  // Phase 1: any vertex of the feasible set.
  LinProgram phase1;
  phase1.c = Vector::Zero(m);
  phase1.Aeq = qp.Aeq;
  phase1.beq = qp.beq;
  phase1.Ain = qp.Ain;
  phase1.bin = qp.bin;
  LpOptions lp_opt;
  lp_opt.feas_tol = options.feas_tol;
  const SolveResult start = solve_lp(phase1, lp_opt);
  if (!start.optimal()) {
    SolveResult res;
    res.status = start.status == SolveStatus::IterLimit ? SolveStatus::IterLimit
                                                         : SolveStatus::Infeasible;
    return res;
  }
  return active_set(qp, start.z, options);
}

SolveResult solve_qp(const QuadProgram& qp, const QpOptions& options) {
  const auto m = qp.c.size();
  if (qp.H.rows() != m || qp.H.cols() != m) {
    throw std::invalid_argument("QP Hessian dimensions disagree");
  }
  check_dims(qp.Aeq, qp.beq, qp.Ain, qp.bin, m);
  std::vector<int> active_in;
  SolveResult res = dual_active_set(qp, options, active_in);
  if (!res.optimal()) return res;
  if (polish(qp, active_in, options, res)) return res;
  const double scale = 1.0 + std::max(inf_norm(qp.beq), inf_norm(qp.bin));
  const Vector start =
      primal_infeasibility(qp.Aeq, qp.beq, qp.Ain, qp.bin, res.z) <= options.feas_tol * scale
          ? res.z
          : Vector();
  SolveResult ref = solve_qp_primal(qp, start, options);
  ref.iterations += res.iterations;
  return ref;
}

}  // namespace mpvc
