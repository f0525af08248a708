#include "vagflow/assembly.hpp"
#include "vagflow/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

using namespace vagflow;

namespace {

Mesh unit_square() {
  return Mesh::create({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {CellSpec{{0, 1, 2, 3}, Point{0.5, 0.5}, 1}});
}

std::shared_ptr<const Discretization> discretize(Mesh m, Tensor2 t = {}, double f = 0.1) {
  return std::make_shared<const Discretization>(std::move(m), TensorField(t), LumpingRule::uniform(f));
}

DofVector random_state(const Mesh& m, std::mt19937& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  DofVector v(m.n_cells(), m.n_vertices());
  for (double& x : v.cell_values) x = d(rng);
  for (double& x : v.vertex_values) x = d(rng);
  return v;
}

double quadratic_form(const Discretization& disc, std::size_t k, const DofVector& u, const DofVector& v) {
  const Cell& c = disc.mesh().cell(k);
  const Eigen::MatrixXd& a = disc.stiffness(k).matrix;
  double s = 0.0;
  for (std::size_t i = 0; i < c.vertices.size(); ++i)
    for (std::size_t j = 0; j < c.vertices.size(); ++j)
      s += (v.cell_values[k] - v.vertex_values[c.vertices[i]]) * a(i, j) *
           (u.cell_values[k] - u.vertex_values[c.vertices[j]]);
  return s;
}

// Gradient of the affine interpolant of values (f0, f1, f2) at (p0, p1, p2).
Point p1_gradient(Point p0, Point p1, Point p2, double f0, double f1, double f2) {
  const Point e1 = p1 - p0, e2 = p2 - p0;
  const double det = cross(e1, e2);
  return {((f1 - f0) * e2.y - (f2 - f0) * e1.y) / det, ((f2 - f0) * e1.x - (f1 - f0) * e2.x) / det};
}

Eigen::MatrixXd dense_jacobian(const JacobianBlocks& J) {
  const auto nv = J.A.rows(), nc = J.D.size();
  Eigen::MatrixXd M(nv + nc, nv + nc);
  M.topLeftCorner(nv, nv) = Eigen::MatrixXd(J.A);
  M.topRightCorner(nv, nc) = Eigen::MatrixXd(J.B);
  M.bottomLeftCorner(nc, nv) = Eigen::MatrixXd(J.C);
  M.bottomRightCorner(nc, nc) = J.D.asDiagonal();
  return M;
}

Eigen::VectorXd stacked(const DofVector& r) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(r.size()));
  Eigen::Index i = 0;
  for (double x : r.vertex_values) out(i++) = x;
  for (double x : r.cell_values) out(i++) = x;
  return out;
}

double& entry(DofVector& v, std::size_t i) {
  return i < v.vertex_values.size() ? v.vertex_values[i] : v.cell_values[i - v.vertex_values.size()];
}

} // namespace

TEST_CASE("local stiffness reproduces affine fields") {
  const auto disc = discretize(unit_square());
  DofVector u(1, 4);
  u.cell_values = {0.5};
  u.vertex_values = {0, 1, 1, 0};
  CHECK(quadratic_form(*disc, 0, u, u) == doctest::Approx(1.0).epsilon(1e-14));
  DofVector c(1, 4, 2.5);
  CHECK(quadratic_form(*disc, 0, c, c) == 0.0);

  const auto aniso = discretize(unit_square(), Tensor2{1.0, 0.0, 10.0});
  DofVector y(1, 4);
  y.cell_values = {0.5};
  y.vertex_values = {0, 0, 1, 1};
  CHECK(quadratic_form(*aniso, 0, y, y) == doctest::Approx(10.0).epsilon(1e-14));
  const Eigen::MatrixXd& a = aniso->stiffness(0).matrix;
  CHECK((a - a.transpose()).norm() == 0.0);
}

TEST_CASE("bilinear identity against per-triangle quadrature") {
  std::mt19937 rng(7);
  const Tensor2 lambda{2.0, 0.3, 0.5};
  for (MeshKind kind : {MeshKind::cartesian, MeshKind::split_triangles, MeshKind::kershaw_like}) {
    const auto disc = discretize(generate_structured(kind, 4, 0.5), lambda);
    const Mesh& m = disc->mesh();
    const DofVector u = random_state(m, rng, -1, 1), v = random_state(m, rng, -1, 1);
    for (std::size_t k = 0; k < m.n_cells(); ++k) {
      double direct = 0.0;
      const Submesh& s = disc->submesh();
      for (std::size_t t = s.first_triangle(k); t < s.first_triangle(k + 1); ++t) {
        const SubTriangle& tri = s.triangles[t];
        const Point c = m.cell(k).center, pa = m.vertex(tri.a), pb = m.vertex(tri.b);
        const Point gu = p1_gradient(c, pa, pb, u.cell_values[k], u.vertex_values[tri.a], u.vertex_values[tri.b]);
        const Point gv = p1_gradient(c, pa, pb, v.cell_values[k], v.vertex_values[tri.a], v.vertex_values[tri.b]);
        direct += tri.area * dot(lambda.apply(gu), gv);
      }
      const double form = quadratic_form(*disc, k, u, v);
      CHECK(std::abs(form - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST_CASE("reconstructions") {
  const auto disc = discretize(unit_square());
  DofVector e(1, 4);
  e.cell_values = {1.0};
  CHECK(reconstruct(*disc, ReconstructionKind::piecewise_affine, e, {0.5, 0.5}) == doctest::Approx(1.0));
  CHECK(reconstruct(*disc, ReconstructionKind::piecewise_affine, e, {1.0, 1.0}) == doctest::Approx(0.0));
  CHECK(reconstruct(*disc, ReconstructionKind::piecewise_affine, e, {0.75, 0.5}) == doctest::Approx(0.5));
  CHECK(reconstruct(*disc, ReconstructionKind::cellwise, e, {0.1, 0.9}) == 1.0);
  CHECK(reconstruct(*disc, ReconstructionKind::lumped, e, {1.0, 0.0}) == 0.0);
  CHECK_THROWS_AS(reconstruct(*disc, ReconstructionKind::lumped, e, {0.3, 0.2}), Error);
  CHECK_THROWS_AS(reconstruct(*disc, ReconstructionKind::piecewise_affine, e, {1.5, 0.2}), Error);
  const DofVector h = disc->hat_integrals();
  for (double x : h.vertex_values) CHECK(x == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(h.cell_values[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("initial data sampling") {
  const Mesh m = generate_structured(MeshKind::cartesian, 3);
  const DofVector c = discretize_initial(m, [](Point) { return 1.5; });
  CHECK(c.min() == 1.5);
  const auto disc = discretize(m);
  CHECK(disc->lumped_integral(c) == doctest::Approx(1.5).epsilon(1e-13));

  const Mesh sq = unit_square();
  const DofVector aff = discretize_initial(sq, [](Point x) { return 2 * x.x + x.y; });
  CHECK(aff.cell_values[0] == doctest::Approx(1.5));

  const Mesh odd = generate_structured(MeshKind::split_triangles, 4);
  const DofVector t2 = discretize_initial(
      odd, [](Point x) { return analytical_solution(AnalyticalTest::t2_2d, x, 0.0, AnalyticalParams{}); });
  CHECK(t2.min() >= 0.0);
  CHECK(t2.vertex_values[12] == 0.0); // (0.5, 0.5)
  CHECK_THROWS_AS(discretize_initial(sq, [](Point x) { return x.x - 0.5; }), ValidationError);
}

TEST_CASE("fluxes vanish at equilibria") {
  const auto disc = discretize(generate_structured(MeshKind::split_triangles, 4));
  const Mesh& m = disc->mesh();
  const Model fp = make_model("fokker_planck_log");
  const Potential grav = Potential::gravity({1.0, 0.0});
  const auto bc = BoundaryConditions::no_flux(m.n_vertices());

  const DiscreteProblem flat(disc, fp, Potential::zero(), FluxScheme::nonlinear, bc);
  const DofVector c(m.n_cells(), m.n_vertices(), 0.7);
  for (std::size_t k = 0; k < m.n_cells(); ++k)
    for (double f : flat.flux(c, k)) CHECK(f == 0.0);
  const DofVector r = flat.residual(c, c, 0.1, 0.1);
  CHECK(r.max_abs() == 0.0);

  const DiscreteProblem gibbs(disc, fp, grav, FluxScheme::nonlinear, bc);
  const DofVector w = sample_at_dofs(m, gibbs_state(fp, grav, 1.0));
  for (std::size_t k = 0; k < m.n_cells(); ++k)
    for (double f : gibbs.flux(w, k)) CHECK(std::abs(f) <= 1e-13);

  const DiscreteProblem pa(disc, make_model("pme_a"), Potential::zero(), FluxScheme::nonlinear, bc);
  const DofVector zero(m.n_cells(), m.n_vertices(), 0.0);
  for (std::size_t k = 0; k < m.n_cells(); ++k)
    for (double f : pa.flux(zero, k)) CHECK(f == 0.0);
}

TEST_CASE("single cell flux against a scalar transcription") {
  const auto disc = discretize(unit_square());
  const Model fp = make_model("fokker_planck_log");
  const DiscreteProblem prob(disc, fp, Potential::zero(), FluxScheme::nonlinear, BoundaryConditions::no_flux(4));
  DofVector u(1, 4);
  u.cell_values = {1.0};
  u.vertex_values = {2.0, 1.0, 1.0, 1.0};
  const std::vector<double> F = prob.flux(u, 0);
  const Eigen::MatrixXd& a = disc->stiffness(0).matrix;
  for (int i = 0; i < 4; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double eta_j = (u.cell_values[0] + u.vertex_values[j]) / 2.0;
      sum += a(i, j) * std::sqrt(eta_j) * (std::log(u.cell_values[0]) - std::log(u.vertex_values[j]));
    }
    const double expected = std::sqrt((u.cell_values[0] + u.vertex_values[i]) / 2.0) * sum;
    CHECK(F[i] == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("constant mobility collapses to the linear diffusion form") {
  const auto disc = discretize(generate_structured(MeshKind::kershaw_like, 3, 0.4));
  const Mesh& m = disc->mesh();
  const Model lin = make_model("custom", {{"eta_exp", 0.0}, {"p_exp", 1.0}});
  const DiscreteProblem prob(disc, lin, Potential::zero(), FluxScheme::nonlinear,
                             BoundaryConditions::no_flux(m.n_vertices()));
  std::mt19937 rng(3);
  const DofVector u = random_state(m, rng, 0.1, 2.0);
  for (std::size_t k = 0; k < m.n_cells(); ++k) {
    const auto F = prob.flux(u, k);
    const auto& vs = m.cell(k).vertices;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      double expected = 0.0;
      for (std::size_t j = 0; j < vs.size(); ++j)
        expected += disc->stiffness(k).matrix(i, j) * (u.cell_values[k] - u.vertex_values[vs[j]]);
      CHECK(F[i] == doctest::Approx(expected).epsilon(1e-13).scale(1.0));
    }
  }
}

TEST_CASE("Jacobian matches finite differences") {
  struct Case {
    const char* model;
    FluxScheme scheme;
    Potential potential;
    bool dirichlet;
  };
  const Case cases[] = {
      {"fokker_planck_log", FluxScheme::nonlinear, Potential::gravity({1.0, 0.0}), false},
      {"pme_a", FluxScheme::nonlinear, Potential::zero(), false},
      {"pme_b", FluxScheme::nonlinear, Potential::quadratic({0.3, 0.6}), true},
      {"pme_c", FluxScheme::nonlinear, Potential::zero(), true},
      {"fokker_planck_log", FluxScheme::linear, Potential::gravity({1.0, 0.5}), false},
      {"pme_drift", FluxScheme::quasilinear, Potential::gravity({1.0, 0.0}), true},
  };
  std::mt19937 rng(11);
  for (MeshKind kind : {MeshKind::cartesian, MeshKind::split_triangles}) {
    const auto disc = discretize(generate_structured(kind, 2));
    const Mesh& m = disc->mesh();
    for (const Case& cs : cases) {
      CAPTURE(cs.model);
      BoundaryConditions bc = BoundaryConditions::no_flux(m.n_vertices());
      if (cs.dirichlet) {
        const Side left[] = {Side::left};
        bc = {vertices_on_sides(m, left), [](Point x, double t) { return 1.0 + x.y + t; }};
      }
      const DiscreteProblem prob(disc, make_model(cs.model), cs.potential, cs.scheme, bc);
      const DofVector prev = random_state(m, rng, 0.5, 1.5);
      DofVector x = random_state(m, rng, 0.5, 1.5);
      const double dt = 0.01, t = 0.01;
      prob.impose_dirichlet(x, t);
      const Eigen::MatrixXd J = dense_jacobian(prob.jacobian(x, prev, dt, t));
      const Eigen::VectorXd r0 = stacked(prob.residual(x, prev, dt, t));
      Eigen::MatrixXd fd(J.rows(), J.cols());
      for (std::size_t j = 0; j < x.size(); ++j) {
        DofVector xp = x, xm = x;
        const double h = 1e-7 * std::max(1.0, std::abs(entry(x, j)));
        entry(xp, j) += h;
        entry(xm, j) -= h;
        fd.col(static_cast<Eigen::Index>(j)) =
            (stacked(prob.residual(xp, prev, dt, t)) - stacked(prob.residual(xm, prev, dt, t))) / (2 * h);
      }
      CHECK((J - fd).cwiseAbs().maxCoeff() <= 1e-5 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
      const JacobianBlocks blocks = prob.jacobian(x, prev, dt, t);
      CHECK((stacked(prob.residual(x, prev, dt, t)) + (Eigen::VectorXd(r0.size()) << blocks.b1, blocks.b2).finished())
                .norm() == 0.0);
    }
  }
}

TEST_CASE("linear scheme without potential has a state independent Jacobian") {
  const auto disc = discretize(generate_structured(MeshKind::split_triangles, 3));
  const Mesh& m = disc->mesh();
  const DiscreteProblem prob(disc, make_model("fokker_planck_log"), Potential::zero(), FluxScheme::linear,
                             BoundaryConditions::no_flux(m.n_vertices()));
  std::mt19937 rng(5);
  const DofVector prev = random_state(m, rng, 0.5, 1.5);
  const Eigen::MatrixXd J1 = dense_jacobian(prob.jacobian(random_state(m, rng, -1, 1), prev, 0.1, 0.1));
  const Eigen::MatrixXd J2 = dense_jacobian(prob.jacobian(random_state(m, rng, 0, 5), prev, 0.1, 0.1));
  CHECK((J1 - J2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cell diagonal dominates the mass term") {
  std::mt19937 rng(13);
  for (const char* name : {"fokker_planck_log", "pme_a", "pme_b", "pme_c", "pme_drift"}) {
    CAPTURE(name);
    const auto disc = discretize(generate_structured(MeshKind::split_triangles, 4));
    const Mesh& m = disc->mesh();
    const DiscreteProblem prob(disc, make_model(name), Potential::zero(), FluxScheme::nonlinear,
                               BoundaryConditions::no_flux(m.n_vertices()));
    const double dt = 1e-2;
    const JacobianBlocks J = prob.jacobian(random_state(m, rng, 0.8, 1.2), random_state(m, rng, 0.8, 1.2), dt, dt);
    for (std::size_t k = 0; k < m.n_cells(); ++k)
      CHECK(J.D(static_cast<Eigen::Index>(k)) >= disc->lumped().m_cell[k] / dt);
  }
}

TEST_CASE("discrete energy") {
  const auto disc = discretize(unit_square());
  const Mesh& m = disc->mesh();
  const DofVector one(1, 4, 1.0);
  const DofVector zero_v(1, 4, 0.0);
  CHECK(discrete_energy(*disc, make_model("pme_a"), one, zero_v) == 0.0);
  const Potential v = Potential::gravity({1.0, 0.0});
  const DofVector vv = sample_at_dofs(m, [&](Point x) { return v.value(x); });
  CHECK(discrete_energy(*disc, make_model("fokker_planck_log"), one, vv) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(discrete_energy(*disc, make_model("pme_b"), DofVector(1, 4, 3.0), zero_v) ==
        doctest::Approx(2.0).epsilon(1e-14));
  DofVector neg = one;
  neg.vertex_values[2] = -0.1;
  CHECK(std::isinf(discrete_energy(*disc, make_model("fokker_planck_log"), neg, zero_v)));
}

TEST_CASE("dissipation") {
  const auto disc = discretize(generate_structured(MeshKind::kershaw_like, 4, 0.3), Tensor2{1.5, 0.2, 0.7});
  const Mesh& m = disc->mesh();
  const Model fp = make_model("fokker_planck_log");
  const Potential grav = Potential::gravity({1.0, 0.0});
  const DofVector vv = sample_at_dofs(m, [&](Point x) { return grav.value(x); });
  const DofVector zero_v(m.n_cells(), m.n_vertices(), 0.0);
  CHECK(dissipation(*disc, fp, DofVector(m.n_cells(), m.n_vertices(), 2.0), zero_v) == 0.0);
  const DofVector w = sample_at_dofs(m, gibbs_state(fp, grav, 1.0));
  CHECK(std::abs(dissipation(*disc, fp, w, vv)) <= 1e-13);

  std::mt19937 rng(17);
  const DofVector u = random_state(m, rng, 0.2, 3.0);
  double oracle = 0.0;
  for (std::size_t k = 0; k < m.n_cells(); ++k) {
    const auto& vs = m.cell(k).vertices;
    const auto n = static_cast<Eigen::Index>(vs.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd dh(n);
    const double hk = std::log(u.cell_values[k]) + vv.cell_values[k];
    for (Eigen::Index i = 0; i < n; ++i) {
      M(i, i) = std::sqrt((u.cell_values[k] + u.vertex_values[vs[i]]) / 2);
      dh(i) = hk - std::log(u.vertex_values[vs[i]]) - vv.vertex_values[vs[i]];
    }
    const Eigen::MatrixXd B = M * disc->stiffness(k).matrix * M;
    oracle += dh.dot(B * dh);
    const Eigen::VectorXd probe = Eigen::VectorXd::Random(n);
    CHECK(probe.dot(B * probe) >= -1e-14);
  }
  CHECK(dissipation(*disc, fp, u, vv) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(oracle > 0.0);
}

TEST_CASE("relative entropy") {
  const auto disc = discretize(generate_structured(MeshKind::cartesian, 3));
  const Mesh& m = disc->mesh();
  const DofVector w = sample_at_dofs(m, [](Point x) { return 1.0 + x.x * x.y; });
  CHECK(relative_entropy(*disc, w, w) == 0.0);
  const DofVector zero(m.n_cells(), m.n_vertices(), 0.0);
  CHECK(relative_entropy(*disc, zero, w) == doctest::Approx(disc->lumped_integral(w)).epsilon(1e-14));
  DofVector twice = w;
  for (double& x : twice.cell_values) x *= 2;
  for (double& x : twice.vertex_values) x *= 2;
  CHECK(relative_entropy(*disc, twice, w) ==
        doctest::Approx((2 * std::log(2.0) - 1) * disc->lumped_integral(w)).epsilon(1e-13));
  DofVector neg = w;
  neg.cell_values[0] = -1e-3;
  CHECK(std::isinf(relative_entropy(*disc, neg, w)));
}

TEST_CASE("no-flux residual conserves mass") {
  const auto disc = discretize(generate_structured(MeshKind::split_triangles, 4));
  const Mesh& m = disc->mesh();
  std::mt19937 rng(19);
  for (FluxScheme s : {FluxScheme::nonlinear, FluxScheme::linear}) {
    const DiscreteProblem prob(disc, make_model("fokker_planck_log"), Potential::gravity({1.0, 0.0}), s,
                               BoundaryConditions::no_flux(m.n_vertices()));
    const DofVector x = random_state(m, rng, 0.5, 2.0);
    const DofVector r = prob.residual(x, x, 1.0, 1.0);
    double total = 0.0, scale = 0.0;
    for (double v : r.cell_values) total += v, scale += std::abs(v);
    for (double v : r.vertex_values) total += v, scale += std::abs(v);
    CHECK(std::abs(total) <= 1e-13 * scale);
  }
}
