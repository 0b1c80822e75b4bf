// Built-in benchmark instances: the academic two-variable example and truss
// topology problems on ground structures.
#pragma once

#include "mpvc/core.hpp"

#include <memory>
#include <utility>

namespace mpvc {

/// min 4x1 + 2x2 with vanishing pairs (x1, 5 sqrt 2 - x1 - x2) and
/// (x2, 5 - x1 - x2). With the flag, adds 3 - x1 - x2 <= 0.
ProblemInstance academic_problem(bool with_extra_constraint = false);

/// Plane pin-jointed truss. Free dofs are numbered x-components of the free
/// nodes first, then y-components, both in node order.
struct TrussModel {
  std::string name;
  std::vector<Vec2> nodes;
  std::vector<std::pair<int, int>> bars;
  std::vector<bool> fixed;
  double E = 1.0;
  double a_max = 1.0;
  double compliance_cap = 1.0;
  double stress_cap = 1.0;

  // Derived by finalize().
  std::vector<int> dof_x, dof_y;  // -1 for fixed nodes
  int num_dofs = 0;
  Vector lengths;
  Matrix b;  // num_dofs x bars; column i maps u to the elongation of bar i
  Vector load;

  [[nodiscard]] int num_bars() const { return static_cast<int>(bars.size()); }

  /// Computes dof numbering, lengths and kinematic vectors. The load must be
  /// set afterwards in free-dof coordinates.
  void finalize();

  [[nodiscard]] double volume(const Vector& a) const { return lengths.dot(a); }
  /// sigma_i = (E / l_i) b_i' u.
  [[nodiscard]] Vector stresses(const Vector& u) const;
};

/// K(a) = sum_i a_i (E / l_i) b_i b_i' with negative areas clamped to zero.
Matrix assemble_stiffness(const TrussModel& model, const Vector& a);

/// Variables x = (a, u). Equalities K(a)u - f; inequalities f'u - c and
/// a_i - a_max; vanishing pairs H_i = a_i, G_i = sigma_i^2 - stress_cap^2.
ProblemInstance truss_mpvc(std::shared_ptr<const TrussModel> model);

/// a = a_max, u = K(a)^{-1} f.
Vector truss_start_point(const TrussModel& model);

/// Six nodes on a unit 2 x 3 grid, left nodes fixed, ten bars, unit load
/// pulling down at the bottom-right node.
TrussModel ten_bar_ground_structure();

/// 27 nodes on a unit 3 x 9 grid, left column fixed, 224 bars joining all
/// node pairs whose segment contains no other node, unit load pulling down at
/// the bottom-right node.
TrussModel cantilever_ground_structure(double stress_cap = 100.0);

/// A built-in problem with its default start; model is null for the
/// academic problems.
struct NamedProblem {
  std::string id;
  ProblemInstance problem;
  std::shared_ptr<const TrussModel> model;
  Vector default_start;
};

/// Ids: academic, academic-constrained, tenbar, cantilever. stress_cap
/// applies to the cantilever only. Throws std::invalid_argument for unknown ids.
NamedProblem make_named_problem(const std::string& id, double stress_cap = 100.0);

std::vector<std::string> problem_ids();

}  // namespace mpvc
