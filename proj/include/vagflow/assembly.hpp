#ifndef VAGFLOW_ASSEMBLY_HPP
#define VAGFLOW_ASSEMBLY_HPP

#include "vagflow/mesh.hpp"
#include "vagflow/physics.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vagflow {

/// One value per cell and one per vertex.
struct DofVector {
  std::vector<double> cell_values;
  std::vector<double> vertex_values;

  DofVector() = default;
  DofVector(std::size_t n_cells, std::size_t n_vertices, double fill = 0.0)
      : cell_values(n_cells, fill), vertex_values(n_vertices, fill) {}

  std::size_t size() const { return cell_values.size() + vertex_values.size(); }
  double min() const;
  double max_abs() const;
  bool all_finite() const;

  friend bool operator==(const DofVector&, const DofVector&) = default;
};

DofVector operator-(const DofVector& a, const DofVector& b);

/// Dense symmetric stiffness of one cell, indexed by the cell's vertex list:
/// a_{s,s'} = int_k Lambda grad e_s . grad e_s' over the cell's submesh.
struct LocalStiffness {
  Eigen::MatrixXd matrix;
  double cond = 0.0; ///< 2-norm condition number
};

LocalStiffness local_stiffness(const Mesh& mesh, const Submesh& submesh, std::size_t cell, const Tensor2& lambda);

/// Geometry, lumped masses and local stiffness matrices of a mesh.
class Discretization {
public:
  Discretization(Mesh mesh, const TensorField& tensors, const LumpingRule& lumping);

  const Mesh& mesh() const { return mesh_; }
  const Submesh& submesh() const { return submesh_; }
  const LumpedMeasures& lumped() const { return lumped_; }
  const LocalStiffness& stiffness(std::size_t cell) const { return stiffness_[cell]; }

  /// Mesh quality including the condition-number range of the A_k.
  QualityReport quality() const;

  /// Sum_b m_b v_b.
  double lumped_integral(const DofVector& v) const;
  /// Integrals of the P1 hat functions, int pi_T e_b.
  DofVector hat_integrals() const;

private:
  Mesh mesh_;
  Submesh submesh_;
  LumpedMeasures lumped_;
  std::vector<LocalStiffness> stiffness_;
};

enum class ReconstructionKind { piecewise_affine, lumped, cellwise };

/// Point evaluation of a reconstruction. Lumped values are only defined at
/// dof sites (cell centers and vertices); elsewhere the call throws, as do
/// points outside the mesh.
double reconstruct(const Discretization& disc, ReconstructionKind kind, const DofVector& v, Point x);

/// Point samples u0(x_b) at every dof. Throws ValidationError on a negative
/// sample unless `allow_negative`.
DofVector discretize_initial(const Mesh& mesh, const std::function<double(Point)>& u0,
                             bool allow_negative = false);

enum class FluxScheme { nonlinear, linear, quasilinear };

FluxScheme flux_scheme_from_string(std::string_view name);
std::string to_string(FluxScheme s);

/// Vertices carrying Dirichlet data and the data itself, in the primary unknown.
struct BoundaryConditions {
  std::vector<char> dirichlet;
  std::function<double(Point, double)> value;

  static BoundaryConditions no_flux(std::size_t n_vertices) { return {std::vector<char>(n_vertices, 0), {}}; }
  bool is_no_flux() const;
};

enum class Side { left, right, bottom, top };

Side side_from_string(std::string_view name);

/// Marks the boundary vertices lying on the given sides of the mesh bounding
/// box (coordinate match within `tol`).
std::vector<char> vertices_on_sides(const Mesh& mesh, std::span<const Side> sides, double tol = 1e-12);

/// Newton linearization split by unknown kind: rows/columns of vertices first,
/// then cells. D is diagonal. b1, b2 hold minus the residual.
struct JacobianBlocks {
  Eigen::SparseMatrix<double> A; ///< vertex x vertex
  Eigen::SparseMatrix<double> B; ///< vertex x cell
  Eigen::SparseMatrix<double> C; ///< cell x vertex
  Eigen::VectorXd D;             ///< cell diagonal
  Eigen::VectorXd b1;
  Eigen::VectorXd b2;
};

/// Evaluation of a cell's constitutive law at one value x of the primary
/// unknown: density u(x), mobility eta(u(x)), pressure P(x) and derivatives
/// with respect to x.
struct LawValue {
  double u, du;
  double eta, deta;
  double p, dp;
};

/// The fully discrete implicit system of one time step.
///
/// In the density formulation the primary unknown is u. In the pressure
/// formulation (heterogeneous drain/barrier data) it is p, each cell converts
/// it to a density through its own inverse law, and the mobility average uses
/// that same inverse at both endpoints.
class DiscreteProblem {
public:
  DiscreteProblem(std::shared_ptr<const Discretization> disc, Model model, Potential potential, FluxScheme scheme,
                  BoundaryConditions bc);

  static DiscreteProblem pressure_primary(std::shared_ptr<const Discretization> disc, HeteroModel hetero,
                                          BoundaryConditions bc);

  const Discretization& discretization() const { return *disc_; }
  std::shared_ptr<const Discretization> discretization_ptr() const { return disc_; }
  FluxScheme scheme() const { return scheme_; }
  /// Unknowns are pressures: heterogeneous data or a pressure twin.
  bool pressure_formulation() const { return hetero_ != nullptr || pressure_unknown_; }
  bool heterogeneous() const { return hetero_ != nullptr; }
  const Model& model() const { return model_; }
  const HeteroModel* hetero() const { return hetero_.get(); }
  const BoundaryConditions& bc() const { return bc_; }
  const DofVector& potential_values() const { return potential_; }
  /// Singular pressure law: iterates must stay above the clamp floor.
  bool needs_clamp() const { return !hetero_ && model_.singular && scheme_ == FluxScheme::nonlinear; }

  /// The same system with x = p(u) as the unknown, for logarithmic pressures
  /// p = c log u. Dirichlet data are floored at `floor` before conversion.
  DiscreteProblem pressure_twin(double floor) const;
  /// c of p = c log u; zero when the pressure is not logarithmic.
  double log_coefficient() const { return log_coef_; }

  LawValue law(std::size_t cell, double x) const;

  /// F_{k,s} for every vertex s of cell k, in the cell's vertex order.
  std::vector<double> flux(const DofVector& x, std::size_t cell) const;

  /// Cell rows m_k (u_k - u_k^prev) / dt + sum_s F_{k,s}; vertex rows
  /// sum_k m_{k,s} (u_s - u_s^prev) / dt + sum_k F_{s,k}; Dirichlet vertex
  /// rows x_s - x_D(x_s, t).
  DofVector residual(const DofVector& x, const DofVector& x_prev, double dt, double t) const;

  /// Analytic derivative of residual() with b1, b2 = -residual.
  JacobianBlocks jacobian(const DofVector& x, const DofVector& x_prev, double dt, double t) const;

  /// Overwrites Dirichlet vertex values with the data at time t.
  void impose_dirichlet(DofVector& x, double t) const;

  /// Conserved quantity sum_k m_k u_k + sum_{k,s} m_{k,s} u_k(x_s).
  double mass(const DofVector& x) const;
  /// Densities of all dofs (identity in the density formulation). Vertex
  /// densities of the pressure formulation use the law of the first cell
  /// around the vertex; see vertex_densities() for all of them.
  DofVector densities(const DofVector& x) const;
  /// u_k(x_s) for each (cell, local vertex).
  std::vector<std::vector<double>> vertex_densities(const DofVector& x) const;

private:
  DiscreteProblem() = default;

  void local_flux(std::size_t cell, const DofVector& x, std::vector<double>& F,
                  Eigen::MatrixXd* dF_dvertex, Eigen::VectorXd* dF_dcell) const;

  std::shared_ptr<const Discretization> disc_;
  Model model_;
  std::shared_ptr<const HeteroModel> hetero_;
  FluxScheme scheme_ = FluxScheme::nonlinear;
  bool pressure_unknown_ = false;
  double log_coef_ = 0.0;
  BoundaryConditions bc_;
  DofVector potential_;
};

/// E_D(u) = sum_b m_b (Gamma(u_b) + u_b V_b); +inf when some Gamma(u_b) is.
double discrete_energy(const Discretization& disc, const Model& model, const DofVector& u,
                       const DofVector& potential_values);

/// sum_k dh_k . B_k(u) dh_k with dh_k = (h_k - h_s)_s, h = p(u) + V and
/// B_k = M_k A_k M_k, M_k = diag(sqrt((eta(u_k) + eta(u_s)) / 2)).
double dissipation(const Discretization& disc, const Model& model, const DofVector& u,
                   const DofVector& potential_values);

/// sum_b m_b (u_b log(u_b / w_b) - u_b + w_b) with 0 log 0 = 0; +inf when
/// some u_b < 0.
double relative_entropy(const Discretization& disc, const DofVector& u, const DofVector& w);

/// V(x_b) at every dof.
DofVector sample_at_dofs(const Mesh& mesh, const std::function<double(Point)>& f);

} // namespace vagflow

#endif
