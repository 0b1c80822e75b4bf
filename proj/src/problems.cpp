#include "mpvc/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mpvc {

ProblemInstance academic_problem(bool with_extra_constraint) {
  const double r = 5.0 * std::sqrt(2.0);
  ProblemInstance p;
  p.name = with_extra_constraint ? "academic-constrained" : "academic";
  p.n = 2;
  p.num_vanishing = 2;
  p.objective = [](const Vector& x) { return 4.0 * x(0) + 2.0 * x(1); };
  p.objective_gradient = [](const Vector&) { return Vector{{4.0, 2.0}}; };
  p.H = [](const Vector& x) { return Vector{{x(0), x(1)}}; };
  p.G = [r](const Vector& x) {
    return Vector{{r - x(0) - x(1), 5.0 - x(0) - x(1)}};
  };
  p.H_jacobian = [](const Vector&) { return Matrix::Identity(2, 2).eval(); };
  p.G_jacobian = [](const Vector&) { return Matrix::Constant(2, 2, -1.0).eval(); };
  if (with_extra_constraint) {
    p.num_ineq = 1;
    p.ineq = [](const Vector& x) { return Vector{{3.0 - x(0) - x(1)}}; };
    p.ineq_jacobian = [](const Vector&) { return Matrix::Constant(1, 2, -1.0).eval(); };
  }
  return p;
}

void TrussModel::finalize() {
  const int nn = static_cast<int>(nodes.size());
  if (static_cast<int>(fixed.size()) != nn) {
    throw std::invalid_argument("truss: fixed flags must match node count");
  }
  dof_x.assign(nn, -1);
  dof_y.assign(nn, -1);
  const int free_nodes = static_cast<int>(std::count(fixed.begin(), fixed.end(), false));
  int k = 0;
  for (int j = 0; j < nn; ++j) {
    if (!fixed[j]) {
      dof_x[j] = k;
      dof_y[j] = k + free_nodes;
      ++k;
    }
  }
  num_dofs = 2 * free_nodes;
  const int nb = num_bars();
  lengths.resize(nb);
  b = Matrix::Zero(num_dofs, nb);
  for (int i = 0; i < nb; ++i) {
    const auto [p, q] = bars[i];
    const Vec2 d = nodes[q] - nodes[p];
    lengths(i) = d.norm();
    if (!(lengths(i) > 0)) throw std::invalid_argument("truss: zero-length bar");
    const Vec2 e = d / lengths(i);
    if (dof_x[q] >= 0) {
      b(dof_x[q], i) += e(0);
      b(dof_y[q], i) += e(1);
    }
    if (dof_x[p] >= 0) {
      b(dof_x[p], i) -= e(0);
      b(dof_y[p], i) -= e(1);
    }
  }
  load = Vector::Zero(num_dofs);
}

Vector TrussModel::stresses(const Vector& u) const {
  return (E * (b.transpose() * u).array() / lengths.array()).matrix();
}

namespace {

Matrix stiffness(const TrussModel& m, const Vector& a) {
  const Vector w = (m.E * a.array() / m.lengths.array()).matrix();
  return m.b * w.asDiagonal() * m.b.transpose();
}

}  // namespace

Matrix assemble_stiffness(const TrussModel& model, const Vector& a) {
  return stiffness(model, a.cwiseMax(0.0));
}

ProblemInstance truss_mpvc(std::shared_ptr<const TrussModel> model) {
  if (!model || model->num_dofs == 0) throw std::invalid_argument("truss: model not finalized");
  const int N = model->num_bars();
  const int d = model->num_dofs;
  ProblemInstance p;
  p.name = model->name;
  p.n = N + d;
  p.num_eq = d;
  p.num_ineq = 1 + N;
  p.num_vanishing = N;
  auto split_a = [N](const Vector& x) { return x.head(N); };
  auto split_u = [N, d](const Vector& x) { return x.segment(N, d); };

  p.objective = [model, split_a](const Vector& x) { return model->volume(split_a(x)); };
  p.objective_gradient = [model, d](const Vector&) {
    Vector g = Vector::Zero(model->num_bars() + d);
    g.head(model->num_bars()) = model->lengths;
    return g;
  };
  p.eq = [model, split_a, split_u](const Vector& x) {
    return (stiffness(*model, split_a(x)) * split_u(x) - model->load).eval();
  };
  p.eq_jacobian = [model, N, d, split_a, split_u](const Vector& x) {
    Matrix J(d, N + d);
    const Vector elong = model->b.transpose() * split_u(x);
    for (int i = 0; i < N; ++i) {
      J.col(i) = (model->E / model->lengths(i)) * elong(i) * model->b.col(i);
    }
    J.rightCols(d) = stiffness(*model, split_a(x));
    return J;
  };
  p.ineq = [model, N, split_a, split_u](const Vector& x) {
    Vector g(N + 1);
    g(0) = model->load.dot(split_u(x)) - model->compliance_cap;
    g.tail(N) = split_a(x).array() - model->a_max;
    return g;
  };
  p.ineq_jacobian = [model, N, d](const Vector&) {
    Matrix J = Matrix::Zero(N + 1, N + d);
    J.row(0).tail(d) = model->load.transpose();
    J.bottomLeftCorner(N, N) = Matrix::Identity(N, N);
    return J;
  };
  p.H = [split_a](const Vector& x) { return Vector(split_a(x)); };
  p.H_jacobian = [N, d](const Vector&) {
    Matrix J = Matrix::Zero(N, N + d);
    J.leftCols(N) = Matrix::Identity(N, N);
    return J;
  };
  p.G = [model, split_u](const Vector& x) {
    const Vector s = model->stresses(split_u(x));
    return (s.array().square() - model->stress_cap * model->stress_cap).matrix().eval();
  };
  p.G_jacobian = [model, N, d, split_u](const Vector& x) {
    const Vector s = model->stresses(split_u(x));
    Matrix J = Matrix::Zero(N, N + d);
    for (int i = 0; i < N; ++i) {
      J.row(i).tail(d) =
          2.0 * s(i) * (model->E / model->lengths(i)) * model->b.col(i).transpose();
    }
    return J;
  };
  return p;
}

Vector truss_start_point(const TrussModel& model) {
  const int N = model.num_bars();
  const Vector a = Vector::Constant(N, model.a_max);
  const Matrix K = assemble_stiffness(model, a);
  Eigen::LDLT<Matrix> ldlt(K);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw std::runtime_error("truss: stiffness at full areas is singular");
  }
  Vector x(N + model.num_dofs);
  x.head(N) = a;
  x.tail(model.num_dofs) = ldlt.solve(model.load);
  return x;
}

TrussModel ten_bar_ground_structure() {
  TrussModel m;
  m.name = "tenbar";
  // Nodes 1..6 of the drawing, zero based here.
  m.nodes = {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 0}, {2, 1}};
  m.fixed = {true, true, false, false, false, false};
  m.bars = {{2, 3}, {0, 2}, {2, 5}, {2, 4}, {1, 2},
            {0, 3}, {3, 5}, {3, 4}, {1, 3}, {4, 5}};
  m.a_max = 100.0;
  m.compliance_cap = 10.0;
  m.stress_cap = 1.0;
  m.finalize();
  m.load(m.dof_y[4]) = -1.0;
  return m;
}

TrussModel cantilever_ground_structure(double stress_cap) {
  TrussModel m;
  m.name = "cantilever";
  constexpr int cols = 9;
  constexpr int rows = 3;
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      m.nodes.emplace_back(c, r);
      m.fixed.push_back(c == 0);
    }
  }
  const int nn = static_cast<int>(m.nodes.size());
  for (int p = 0; p < nn; ++p) {
    for (int q = p + 1; q < nn; ++q) {
      if (m.fixed[p] && m.fixed[q]) continue;
      const int dx = static_cast<int>(std::abs(m.nodes[q](0) - m.nodes[p](0)));
      const int dy = static_cast<int>(std::abs(m.nodes[q](1) - m.nodes[p](1)));
      if (std::gcd(dx, dy) == 1) m.bars.emplace_back(p, q);
    }
  }
  m.a_max = 1.0;
  m.compliance_cap = 100.0;
  m.stress_cap = stress_cap;
  m.finalize();
  m.load(m.dof_y[(cols - 1) * rows]) = -1.0;
  return m;
}

NamedProblem make_named_problem(const std::string& id, double stress_cap) {
  NamedProblem np;
  np.id = id;
  if (id == "academic" || id == "academic-constrained") {
    np.problem = academic_problem(id == "academic-constrained");
    np.default_start = Vector{{1.0, 1.0}};
    return np;
  }
  std::shared_ptr<TrussModel> model;
  if (id == "tenbar") {
    model = std::make_shared<TrussModel>(ten_bar_ground_structure());
  } else if (id == "cantilever") {
    model = std::make_shared<TrussModel>(cantilever_ground_structure(stress_cap));
  } else {
    throw std::invalid_argument("unknown problem '" + id + "'");
  }
  np.problem = truss_mpvc(model);
  np.default_start = truss_start_point(*model);
  np.model = model;
  return np;
}

std::vector<std::string> problem_ids() {
  return {"academic", "academic-constrained", "tenbar", "cantilever"};
}

}  // namespace mpvc
