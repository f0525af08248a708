#include "vagflow/assembly.hpp"

#include "vagflow/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace vagflow {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Gradients of the barycentric coordinates of triangle (p0, p1, p2).
std::array<Point, 3> barycentric_gradients(Point p0, Point p1, Point p2) {
  const double two_area = cross(p1 - p0, p2 - p0);
  const std::array<Point, 3> pts{p0, p1, p2};
  std::array<Point, 3> g;
  for (int j = 0; j < 3; ++j) {
    const Point a = pts[(j + 1) % 3];
    const Point b = pts[(j + 2) % 3];
    g[j] = {(a.y - b.y) / two_area, (b.x - a.x) / two_area};
  }
  return g;
}

// Barycentric coordinates of x in (p0, p1, p2).
std::array<double, 3> barycentric(Point x, Point p0, Point p1, Point p2) {
  const double area = cross(p1 - p0, p2 - p0);
  const double l1 = cross(x - p0, p2 - p0) / area;
  const double l2 = cross(p1 - p0, x - p0) / area;
  return {1.0 - l1 - l2, l1, l2};
}

struct Located {
  std::size_t triangle;
  std::array<double, 3> weights;
};

Located locate(const Discretization& disc, Point x) {
  const Mesh& mesh = disc.mesh();
  const double tol = 1e-12;
  const auto& tris = disc.submesh().triangles;
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    const auto w = barycentric(x, mesh.cell(tri.cell).center, mesh.vertex(tri.a), mesh.vertex(tri.b));
    if (w[0] >= -tol && w[1] >= -tol && w[2] >= -tol) return {t, w};
  }
  throw ValidationError("point (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ") lies outside the mesh");
}

double clamp_sqrt(double v) { return v > 0.0 ? std::sqrt(v) : 0.0; }

} // namespace

double DofVector::min() const {
  double m = inf;
  for (double v : cell_values) m = std::min(m, v);
  for (double v : vertex_values) m = std::min(m, v);
  return m;
}

double DofVector::max_abs() const {
  double m = 0.0;
  for (double v : cell_values) m = std::max(m, std::abs(v));
  for (double v : vertex_values) m = std::max(m, std::abs(v));
  return m;
}

bool DofVector::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(cell_values.begin(), cell_values.end(), finite) &&
         std::all_of(vertex_values.begin(), vertex_values.end(), finite);
}

DofVector operator-(const DofVector& a, const DofVector& b) {
  DofVector r(a.cell_values.size(), a.vertex_values.size());
  for (std::size_t k = 0; k < a.cell_values.size(); ++k) r.cell_values[k] = a.cell_values[k] - b.cell_values[k];
  for (std::size_t i = 0; i < a.vertex_values.size(); ++i)
    r.vertex_values[i] = a.vertex_values[i] - b.vertex_values[i];
  return r;
}

LocalStiffness local_stiffness(const Mesh& mesh, const Submesh& submesh, std::size_t cell, const Tensor2& lambda) {
  const Cell& c = mesh.cell(cell);
  const std::size_t n = c.vertices.size();
  LocalStiffness out;
  out.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const std::size_t first = submesh.first_triangle(cell);
  for (std::size_t i = 0; i < n; ++i) {
    const SubTriangle& tri = submesh.triangles[first + i];
    const auto g = barycentric_gradients(c.center, mesh.vertex(tri.a), mesh.vertex(tri.b));
    const std::array<std::size_t, 2> local{i, (i + 1) % n};
    for (int r = 0; r < 2; ++r) {
      const Point lg = lambda.apply(g[r + 1]);
      for (int s = 0; s < 2; ++s) {
        out.matrix(static_cast<Eigen::Index>(local[r]), static_cast<Eigen::Index>(local[s])) +=
            tri.area * dot(lg, g[s + 1]);
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.matrix, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  out.cond = ev(0) > 0.0 ? ev(ev.size() - 1) / ev(0) : inf;
  return out;
}

Discretization::Discretization(Mesh mesh, const TensorField& tensors, const LumpingRule& lumping)
    : mesh_(std::move(mesh)), submesh_(build_submesh(mesh_)), lumped_(compute_lumping(mesh_, lumping)) {
  stiffness_.reserve(mesh_.n_cells());
  for (std::size_t k = 0; k < mesh_.n_cells(); ++k) {
    const int tag = mesh_.cell(k).tag;
    if (!tensors.has(tag)) throw ValidationError("no tensor for subdomain tag " + std::to_string(tag));
    stiffness_.push_back(local_stiffness(mesh_, submesh_, k, tensors.at(tag)));
  }
}

QualityReport Discretization::quality() const {
  QualityReport q = mesh_quality(mesh_, submesh_, lumped_);
  q.cond_min = inf;
  q.cond_max = 0.0;
  for (const auto& s : stiffness_) {
    q.cond_min = std::min(q.cond_min, s.cond);
    q.cond_max = std::max(q.cond_max, s.cond);
  }
  return q;
}

double Discretization::lumped_integral(const DofVector& v) const {
  double s = 0.0;
  for (std::size_t k = 0; k < mesh_.n_cells(); ++k) s += lumped_.m_cell[k] * v.cell_values[k];
  for (std::size_t i = 0; i < mesh_.n_vertices(); ++i) s += lumped_.m_vertex[i] * v.vertex_values[i];
  return s;
}

DofVector Discretization::hat_integrals() const {
  DofVector h(mesh_.n_cells(), mesh_.n_vertices());
  for (const auto& tri : submesh_.triangles) {
    h.cell_values[tri.cell] += tri.area / 3.0;
    h.vertex_values[tri.a] += tri.area / 3.0;
    h.vertex_values[tri.b] += tri.area / 3.0;
  }
  return h;
}

double reconstruct(const Discretization& disc, ReconstructionKind kind, const DofVector& v, Point x) {
  const Mesh& mesh = disc.mesh();
  if (kind == ReconstructionKind::lumped) {
    const BoundingBox box = mesh.bounding_box();
    const double tol = 1e-12 * std::max(box.hi.x - box.lo.x, box.hi.y - box.lo.y);
    for (std::size_t i = 0; i < mesh.n_vertices(); ++i)
      if (distance(mesh.vertex(i), x) <= tol) return v.vertex_values[i];
    for (std::size_t k = 0; k < mesh.n_cells(); ++k)
      if (distance(mesh.cell(k).center, x) <= tol) return v.cell_values[k];
    throw ValidationError("the lumped reconstruction is only defined at cell centers and vertices");
  }
  const Located loc = locate(disc, x);
  const SubTriangle& tri = disc.submesh().triangles[loc.triangle];
  if (kind == ReconstructionKind::cellwise) return v.cell_values[tri.cell];
  return loc.weights[0] * v.cell_values[tri.cell] + loc.weights[1] * v.vertex_values[tri.a] +
         loc.weights[2] * v.vertex_values[tri.b];
}

DofVector sample_at_dofs(const Mesh& mesh, const std::function<double(Point)>& f) {
  DofVector v(mesh.n_cells(), mesh.n_vertices());
  for (std::size_t k = 0; k < mesh.n_cells(); ++k) v.cell_values[k] = f(mesh.cell(k).center);
  for (std::size_t i = 0; i < mesh.n_vertices(); ++i) v.vertex_values[i] = f(mesh.vertex(i));
  return v;
}

DofVector discretize_initial(const Mesh& mesh, const std::function<double(Point)>& u0, bool allow_negative) {
  DofVector v = sample_at_dofs(mesh, u0);
  if (!v.all_finite()) throw ValidationError("initial datum is not finite at some dof");
  if (!allow_negative) {
    for (std::size_t k = 0; k < mesh.n_cells(); ++k)
      if (v.cell_values[k] < 0.0) throw ValidationError("negative initial value at cell " + std::to_string(k));
    for (std::size_t i = 0; i < mesh.n_vertices(); ++i)
      if (v.vertex_values[i] < 0.0) throw ValidationError("negative initial value at vertex " + std::to_string(i));
  }
  return v;
}

FluxScheme flux_scheme_from_string(std::string_view name) {
  if (name == "nonlinear") return FluxScheme::nonlinear;
  if (name == "linear") return FluxScheme::linear;
  if (name == "quasilinear") return FluxScheme::quasilinear;
  throw ValidationError("unknown scheme '" + std::string(name) + "'");
}

std::string to_string(FluxScheme s) {
  switch (s) {
  case FluxScheme::nonlinear: return "nonlinear";
  case FluxScheme::linear: return "linear";
  case FluxScheme::quasilinear: return "quasilinear";
  }
  return {};
}

bool BoundaryConditions::is_no_flux() const {
  return std::none_of(dirichlet.begin(), dirichlet.end(), [](char c) { return c != 0; });
}

Side side_from_string(std::string_view name) {
  if (name == "left") return Side::left;
  if (name == "right") return Side::right;
  if (name == "bottom") return Side::bottom;
  if (name == "top") return Side::top;
  throw ValidationError("unknown boundary side '" + std::string(name) + "'");
}

std::vector<char> vertices_on_sides(const Mesh& mesh, std::span<const Side> sides, double tol) {
  const BoundingBox box = mesh.bounding_box();
  std::vector<char> on(mesh.n_vertices(), 0);
  for (std::size_t i = 0; i < mesh.n_vertices(); ++i) {
    if (!mesh.is_boundary_vertex(i)) continue;
    const Point p = mesh.vertex(i);
    for (Side s : sides) {
      const bool hit = (s == Side::left && std::abs(p.x - box.lo.x) <= tol) ||
                       (s == Side::right && std::abs(p.x - box.hi.x) <= tol) ||
                       (s == Side::bottom && std::abs(p.y - box.lo.y) <= tol) ||
                       (s == Side::top && std::abs(p.y - box.hi.y) <= tol);
      if (hit) on[i] = 1;
    }
  }
  return on;
}

DiscreteProblem::DiscreteProblem(std::shared_ptr<const Discretization> disc, Model model, Potential potential,
                                 FluxScheme scheme, BoundaryConditions bc)
    : disc_(std::move(disc)), model_(std::move(model)), scheme_(scheme), bc_(std::move(bc)) {
  const Mesh& mesh = disc_->mesh();
  if (bc_.dirichlet.size() != mesh.n_vertices()) throw ValidationError("boundary marker size mismatch");
  if (!bc_.is_no_flux() && !bc_.value) throw ValidationError("Dirichlet vertices without boundary data");
  potential_ = sample_at_dofs(mesh, [&](Point x) { return potential.value(x); });
  if (model_.singular) {
    const double c = model_.pressure(std::exp(1.0)) - model_.pressure(1.0);
    const double c2 = 0.5 * (model_.pressure(std::exp(2.0)) - model_.pressure(1.0));
    if (model_.pressure(1.0) == 0.0 && c > 0.0 && std::abs(c - c2) <= 1e-12 * c) log_coef_ = c;
  }
}

DiscreteProblem DiscreteProblem::pressure_twin(double floor) const {
  if (hetero_ || pressure_unknown_) throw ValidationError("problem already has pressure unknowns");
  if (log_coef_ <= 0.0) throw ValidationError("pressure unknowns need a logarithmic pressure law");
  DiscreteProblem twin = *this;
  twin.pressure_unknown_ = true;
  if (!bc_.is_no_flux()) {
    twin.bc_.value = [c = log_coef_, floor, data = bc_.value](Point x, double t) {
      return c * std::log(std::max(floor, data(x, t)));
    };
  }
  return twin;
}

DiscreteProblem DiscreteProblem::pressure_primary(std::shared_ptr<const Discretization> disc, HeteroModel hetero,
                                                  BoundaryConditions bc) {
  DiscreteProblem p;
  p.disc_ = std::move(disc);
  const Mesh& mesh = p.disc_->mesh();
  for (const auto& c : mesh.cells()) hetero.at(c.tag);
  p.hetero_ = std::make_shared<HeteroModel>(std::move(hetero));
  p.model_ = make_model("fokker_planck_log");
  p.scheme_ = FluxScheme::nonlinear;
  if (bc.dirichlet.size() != mesh.n_vertices()) throw ValidationError("boundary marker size mismatch");
  if (!bc.is_no_flux() && !bc.value) throw ValidationError("Dirichlet vertices without boundary data");
  p.bc_ = std::move(bc);
  p.potential_ = DofVector(mesh.n_cells(), mesh.n_vertices(), 0.0);
  return p;
}

LawValue DiscreteProblem::law(std::size_t cell, double x) const {
  if (hetero_) {
    const double c = hetero_->at(disc_->mesh().cell(cell).tag).pressure_coef;
    const double u = std::exp(x / c);
    return {u, u / c, u, u / c, x, 1.0};
  }
  if (pressure_unknown_) {
    const double u = std::exp(x / log_coef_);
    const double du = u / log_coef_;
    return {u, du, model_.eta(u), model_.eta_prime(u) * du, x, 1.0};
  }
  return {x, 1.0, model_.eta(x), model_.eta_prime(x), model_.pressure(x), model_.pressure_prime(x)};
}

void DiscreteProblem::local_flux(std::size_t cell, const DofVector& x, std::vector<double>& F,
                                 Eigen::MatrixXd* dF_dvertex, Eigen::VectorXd* dF_dcell) const {
  const Mesh& mesh = disc_->mesh();
  const Cell& c = mesh.cell(cell);
  const auto n = static_cast<Eigen::Index>(c.vertices.size());
  const Eigen::MatrixXd& a = disc_->stiffness(cell).matrix;
  const double xk = x.cell_values[cell];
  const double Vk = potential_.cell_values[cell];
  const bool derivs = dF_dvertex != nullptr;
  F.assign(static_cast<std::size_t>(n), 0.0);
  if (derivs) {
    dF_dvertex->setZero(n, n);
    dF_dcell->setZero(n);
  }

  if (scheme_ != FluxScheme::nonlinear) {
    const bool quad = scheme_ == FluxScheme::quasilinear;
    auto f = [&](double v) { return quad ? v * v : v; };
    auto df = [&](double v) { return quad ? 2.0 * v : 1.0; };
    for (Eigen::Index i = 0; i < n; ++i) {
      const double xi = x.vertex_values[c.vertices[i]];
      double diff = 0.0;
      double W = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const std::size_t sj = c.vertices[j];
        diff += a(i, j) * (f(xk) - f(x.vertex_values[sj]));
        W += a(i, j) * (Vk - potential_.vertex_values[sj]);
      }
      F[i] = diff + 0.5 * (xk + xi) * W;
      if (derivs) {
        double rowsum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
          rowsum += a(i, j);
          (*dF_dvertex)(i, j) = -a(i, j) * df(x.vertex_values[c.vertices[j]]);
        }
        (*dF_dcell)(i) = rowsum * df(xk) + 0.5 * W;
        (*dF_dvertex)(i, i) += 0.5 * W;
      }
    }
    return;
  }

  const LawValue lk = law(cell, xk);
  std::vector<LawValue> lv(static_cast<std::size_t>(n));
  Eigen::VectorXd s(n), delta(n), ds_dk(n), ds_dv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t si = c.vertices[i];
    lv[i] = law(cell, x.vertex_values[si]);
    s(i) = clamp_sqrt(0.5 * (lk.eta + lv[i].eta));
    delta(i) = (lk.p + Vk) - (lv[i].p + potential_.vertex_values[si]);
    ds_dk(i) = s(i) > 0.0 ? lk.deta / (4.0 * s(i)) : 0.0;
    ds_dv(i) = s(i) > 0.0 ? lv[i].deta / (4.0 * s(i)) : 0.0;
  }
  // A vanishing mobility switches the term off even where p(0) = -inf.
  Eigen::VectorXd sd(n);
  for (Eigen::Index i = 0; i < n; ++i) sd(i) = s(i) > 0.0 ? s(i) * delta(i) : 0.0;
  const Eigen::VectorXd G = a * sd;
  for (Eigen::Index i = 0; i < n; ++i) F[i] = s(i) > 0.0 ? s(i) * G(i) : 0.0;
  if (!derivs) return;

  // d(s_j delta_j)/dx_k and d(s_j delta_j)/dx_j
  const Eigen::VectorXd dsd_dk = ds_dk.cwiseProduct(delta) + s * lk.dp;
  Eigen::VectorXd dsd_dv(n);
  for (Eigen::Index j = 0; j < n; ++j) dsd_dv(j) = ds_dv(j) * delta(j) - s(j) * lv[j].dp;
  const Eigen::VectorXd a_dsd_dk = a * dsd_dk;
  for (Eigen::Index i = 0; i < n; ++i) {
    (*dF_dcell)(i) = ds_dk(i) * G(i) + s(i) * a_dsd_dk(i);
    for (Eigen::Index j = 0; j < n; ++j) (*dF_dvertex)(i, j) = s(i) * a(i, j) * dsd_dv(j);
    (*dF_dvertex)(i, i) += ds_dv(i) * G(i);
  }
}

std::vector<double> DiscreteProblem::flux(const DofVector& x, std::size_t cell) const {
  std::vector<double> F;
  local_flux(cell, x, F, nullptr, nullptr);
  return F;
}

void DiscreteProblem::impose_dirichlet(DofVector& x, double t) const {
  const Mesh& mesh = disc_->mesh();
  for (std::size_t i = 0; i < mesh.n_vertices(); ++i)
    if (bc_.dirichlet[i]) x.vertex_values[i] = bc_.value(mesh.vertex(i), t);
}

DofVector DiscreteProblem::residual(const DofVector& x, const DofVector& x_prev, double dt, double t) const {
  const Mesh& mesh = disc_->mesh();
  const LumpedMeasures& lm = disc_->lumped();
  DofVector r(mesh.n_cells(), mesh.n_vertices());
  std::vector<double> F;
  for (std::size_t k = 0; k < mesh.n_cells(); ++k) {
    const Cell& c = mesh.cell(k);
    local_flux(k, x, F, nullptr, nullptr);
    r.cell_values[k] += lm.m_cell[k] * (law(k, x.cell_values[k]).u - law(k, x_prev.cell_values[k]).u) / dt;
    for (std::size_t i = 0; i < c.vertices.size(); ++i) {
      const std::size_t si = c.vertices[i];
      r.cell_values[k] += F[i];
      r.vertex_values[si] += lm.m_cell_vertex[k][i] *
                                 (law(k, x.vertex_values[si]).u - law(k, x_prev.vertex_values[si]).u) / dt -
                             F[i];
    }
  }
  for (std::size_t i = 0; i < mesh.n_vertices(); ++i)
    if (bc_.dirichlet[i]) r.vertex_values[i] = x.vertex_values[i] - bc_.value(mesh.vertex(i), t);
  return r;
}

JacobianBlocks DiscreteProblem::jacobian(const DofVector& x, const DofVector& x_prev, double dt, double t) const {
  const Mesh& mesh = disc_->mesh();
  const LumpedMeasures& lm = disc_->lumped();
  const auto nv = static_cast<Eigen::Index>(mesh.n_vertices());
  const auto nc = static_cast<Eigen::Index>(mesh.n_cells());

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> ta, tb, tc;
  JacobianBlocks J;
  J.D = Eigen::VectorXd::Zero(nc);

  std::vector<double> F;
  Eigen::MatrixXd dFv;
  Eigen::VectorXd dFc;
  for (std::size_t k = 0; k < mesh.n_cells(); ++k) {
    const Cell& c = mesh.cell(k);
    const auto kk = static_cast<Eigen::Index>(k);
    local_flux(k, x, F, &dFv, &dFc);
    J.D(kk) += lm.m_cell[k] * law(k, x.cell_values[k]).du / dt + dFc.sum();
    const auto n = static_cast<Eigen::Index>(c.vertices.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto sj = static_cast<Eigen::Index>(c.vertices[j]);
      tc.emplace_back(kk, sj, dFv.col(j).sum());
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::size_t si = c.vertices[i];
      if (bc_.dirichlet[si]) continue;
      const auto ii = static_cast<Eigen::Index>(si);
      ta.emplace_back(ii, ii, lm.m_cell_vertex[k][i] * law(k, x.vertex_values[si]).du / dt);
      tb.emplace_back(ii, kk, -dFc(i));
      for (Eigen::Index j = 0; j < n; ++j)
        ta.emplace_back(ii, static_cast<Eigen::Index>(c.vertices[j]), -dFv(i, j));
    }
  }
  for (Eigen::Index i = 0; i < nv; ++i)
    if (bc_.dirichlet[i]) ta.emplace_back(i, i, 1.0);

  J.A.resize(nv, nv);
  J.A.setFromTriplets(ta.begin(), ta.end());
  J.B.resize(nv, nc);
  J.B.setFromTriplets(tb.begin(), tb.end());
  J.C.resize(nc, nv);
  J.C.setFromTriplets(tc.begin(), tc.end());

  const DofVector r = residual(x, x_prev, dt, t);
  J.b1 = -Eigen::Map<const Eigen::VectorXd>(r.vertex_values.data(), nv);
  J.b2 = -Eigen::Map<const Eigen::VectorXd>(r.cell_values.data(), nc);
  return J;
}

double DiscreteProblem::mass(const DofVector& x) const {
  const Mesh& mesh = disc_->mesh();
  const LumpedMeasures& lm = disc_->lumped();
  double m = 0.0;
  for (std::size_t k = 0; k < mesh.n_cells(); ++k) {
    m += lm.m_cell[k] * law(k, x.cell_values[k]).u;
    const Cell& c = mesh.cell(k);
    for (std::size_t i = 0; i < c.vertices.size(); ++i)
      m += lm.m_cell_vertex[k][i] * law(k, x.vertex_values[c.vertices[i]]).u;
  }
  return m;
}

DofVector DiscreteProblem::densities(const DofVector& x) const {
  if (!pressure_formulation()) return x;
  const Mesh& mesh = disc_->mesh();
  DofVector u(mesh.n_cells(), mesh.n_vertices());
  for (std::size_t k = 0; k < mesh.n_cells(); ++k) u.cell_values[k] = law(k, x.cell_values[k]).u;
  for (std::size_t i = 0; i < mesh.n_vertices(); ++i)
    u.vertex_values[i] = law(mesh.vertex_cells(i).front(), x.vertex_values[i]).u;
  return u;
}

std::vector<std::vector<double>> DiscreteProblem::vertex_densities(const DofVector& x) const {
  const Mesh& mesh = disc_->mesh();
  std::vector<std::vector<double>> out(mesh.n_cells());
  for (std::size_t k = 0; k < mesh.n_cells(); ++k)
    for (std::size_t s : mesh.cell(k).vertices) out[k].push_back(law(k, x.vertex_values[s]).u);
  return out;
}

double discrete_energy(const Discretization& disc, const Model& model, const DofVector& u,
                       const DofVector& potential_values) {
  const Mesh& mesh = disc.mesh();
  const LumpedMeasures& lm = disc.lumped();
  double e = 0.0;
  for (std::size_t k = 0; k < mesh.n_cells(); ++k) {
    const double v = u.cell_values[k];
    e += lm.m_cell[k] * (model.entropy(v) + v * potential_values.cell_values[k]);
  }
  for (std::size_t i = 0; i < mesh.n_vertices(); ++i) {
    const double v = u.vertex_values[i];
    e += lm.m_vertex[i] * (model.entropy(v) + v * potential_values.vertex_values[i]);
  }
  return e;
}

double dissipation(const Discretization& disc, const Model& model, const DofVector& u,
                   const DofVector& potential_values) {
  const Mesh& mesh = disc.mesh();
  double total = 0.0;
  for (std::size_t k = 0; k < mesh.n_cells(); ++k) {
    const Cell& c = mesh.cell(k);
    const auto n = static_cast<Eigen::Index>(c.vertices.size());
    const double uk = u.cell_values[k];
    const double hk = model.pressure(uk) + potential_values.cell_values[k];
    Eigen::VectorXd sd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::size_t si = c.vertices[i];
      const double us = u.vertex_values[si];
      const double s = clamp_sqrt(0.5 * (model.eta(uk) + model.eta(us)));
      const double hs = model.pressure(us) + potential_values.vertex_values[si];
      // 0 * inf from a vanishing mobility next to a singular pressure counts as 0
      sd(i) = s > 0.0 ? s * (hk - hs) : 0.0;
    }
    total += sd.dot(disc.stiffness(k).matrix * sd);
  }
  return total;
}

double relative_entropy(const Discretization& disc, const DofVector& u, const DofVector& w) {
  auto term = [](double a, double b) {
    if (a < 0.0) return inf;
    if (a == 0.0) return b;
    return a * std::log(a / b) - a + b;
  };
  const Mesh& mesh = disc.mesh();
  const LumpedMeasures& lm = disc.lumped();
  double e = 0.0;
  for (std::size_t k = 0; k < mesh.n_cells(); ++k) e += lm.m_cell[k] * term(u.cell_values[k], w.cell_values[k]);
  for (std::size_t i = 0; i < mesh.n_vertices(); ++i)
    e += lm.m_vertex[i] * term(u.vertex_values[i], w.vertex_values[i]);
  return e;
}

} // namespace vagflow
