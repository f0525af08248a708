#include "vagflow/solver.hpp"

#include "vagflow/errors.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace vagflow {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double scaled_residual(const DiscreteProblem& problem, const JacobianBlocks& J, double dt) {
  const auto& lm = problem.discretization().lumped();
  const auto& dir = problem.bc().dirichlet;
  double r = 0.0;
  for (Eigen::Index k = 0; k < J.b2.size(); ++k) r = std::max(r, std::abs(dt * J.b2(k) / lm.m_cell[k]));
  for (Eigen::Index i = 0; i < J.b1.size(); ++i) {
    const double v = dir[i] ? std::abs(J.b1(i)) : std::abs(dt * J.b1(i) / lm.m_vertex[i]);
    r = std::max(r, v);
  }
  return r;
}

double max_abs(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double m = 0.0;
  if (a.size()) m = std::max(m, a.cwiseAbs().maxCoeff());
  if (b.size()) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

void clamp(DofVector& x, double floor) {
  for (double& v : x.cell_values) v = std::max(v, floor);
  for (double& v : x.vertex_values) v = std::max(v, floor);
}

StepRecord describe(const DiscreteProblem& problem, const DofVector& x, double t, double dt, int iters) {
  StepRecord rec;
  rec.t = t;
  rec.dt = dt;
  rec.newton_iters = iters;
  rec.mass = problem.mass(x);
  const DofVector u = problem.densities(x);
  rec.u_min = u.min();
  if (problem.pressure_formulation()) {
    for (const auto& per_cell : problem.vertex_densities(x))
      for (double v : per_cell) rec.u_min = std::min(rec.u_min, v);
    rec.energy = nan;
    rec.dissipation = nan;
  } else {
    const auto& disc = problem.discretization();
    rec.energy = discrete_energy(disc, problem.model(), x, problem.potential_values());
    rec.dissipation = dissipation(disc, problem.model(), x, problem.potential_values());
  }
  return rec;
}

// Replaces the rows of frozen dofs by "increment = 0".
void freeze(JacobianBlocks& J, const std::vector<char>& hold_v, const std::vector<char>& hold_c) {
  auto drop_rows = [](Eigen::SparseMatrix<double>& M, const std::vector<char>& hold) {
    M.prune([&](Eigen::Index row, Eigen::Index, double) { return !hold[static_cast<std::size_t>(row)]; });
  };
  drop_rows(J.A, hold_v);
  drop_rows(J.B, hold_v);
  drop_rows(J.C, hold_c);
  for (std::size_t i = 0; i < hold_v.size(); ++i)
    if (hold_v[i]) {
      J.A.coeffRef(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
      J.b1(static_cast<Eigen::Index>(i)) = 0.0;
    }
  for (std::size_t k = 0; k < hold_c.size(); ++k)
    if (hold_c[k]) {
      J.D(static_cast<Eigen::Index>(k)) = 1.0;
      J.b2(static_cast<Eigen::Index>(k)) = 0.0;
    }
}

} // namespace

void NewtonConfig::validate() const {
  if (!(tol_inc > 0.0)) throw ValidationError("newton.tol must be positive");
  if (max_iter < 1) throw ValidationError("newton.max_iter must be at least 1");
  if (!(clamp_floor > 0.0 && clamp_floor < 1.0)) throw ValidationError("newton.epsilon must lie in (0, 1)");
  if (!(tol_res >= 0.0)) throw ValidationError("newton.tol_res must be nonnegative");
}

void TimeStepper::validate() const {
  if (!(dt_init > 0.0 && dt_init <= dt_max)) throw ValidationError("time steps need 0 < dt_init <= dt_max");
  if (!(growth > 1.0)) throw ValidationError("time.growth must exceed 1");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ValidationError("time.shrink must lie in (0, 1)");
  if (max_failures < 1) throw ValidationError("time.max_failures must be at least 1");
}

DofVector schur_solve(const JacobianBlocks& J) {
  const Eigen::Index nv = J.A.rows();
  const Eigen::Index nc = J.D.size();
  for (Eigen::Index k = 0; k < nc; ++k)
    if (J.D(k) == 0.0 || !std::isfinite(J.D(k)))
      throw SolverError("cell block has a zero or non-finite diagonal entry at cell " + std::to_string(k));
  const Eigen::VectorXd Dinv = J.D.cwiseInverse();

  Eigen::SparseMatrix<double> S = J.A - J.B * Dinv.asDiagonal() * J.C;
  S.makeCompressed();
  const Eigen::VectorXd rhs = J.b1 - J.B * Dinv.cwiseProduct(J.b2);

  Eigen::VectorXd dv(nv);
  if (nv > 0) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(S);
    lu.factorize(S);
    if (lu.info() != Eigen::Success) throw SolverError("singular Schur complement: " + lu.lastErrorMessage());
    dv = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !dv.allFinite()) throw SolverError("Schur complement solve failed");
  }
  const Eigen::VectorXd dc = Dinv.cwiseProduct(J.b2 - J.C * dv);
  if (!dc.allFinite()) throw SolverError("cell back-substitution produced non-finite values");

  DofVector out;
  out.vertex_values.assign(dv.data(), dv.data() + nv);
  out.cell_values.assign(dc.data(), dc.data() + nc);
  return out;
}

namespace {

// Newton on the problem's own unknowns. With a finite floor every update is
// clamped from below and floor dofs are handled as an active set; `to_u`
// maps unknowns to densities for the increment measure.
NewtonResult iterate(const DiscreteProblem& problem, DofVector x, const DofVector& x_prev, double dt, double t,
                     const NewtonConfig& cfg, double floor, double (*to_u)(double, double), double coef) {
  NewtonResult res;
  res.x = std::move(x);
  const bool clamped = std::isfinite(floor);
  const std::size_t nv = res.x.vertex_values.size();
  const std::size_t nc = res.x.cell_values.size();
  std::vector<char> hold_v(nv), hold_c(nc);

  for (int it = 0;; ++it) {
    JacobianBlocks J = problem.jacobian(res.x, x_prev, dt, t);
    // Rows of dofs resting on the floor while pushing downwards (R >= 0) are
    // satisfied as constraints and left out of the residual measures.
    if (clamped) {
      for (std::size_t i = 0; i < nv; ++i)
        if (res.x.vertex_values[i] <= floor && J.b1(i) <= 0.0) J.b1(i) = 0.0;
      for (std::size_t k = 0; k < nc; ++k)
        if (res.x.cell_values[k] <= floor && J.b2(k) <= 0.0) J.b2(k) = 0.0;
    }
    res.residual = max_abs(J.b1, J.b2);
    if (!std::isfinite(res.residual)) {
      res.failure = "non-finite residual";
      return res;
    }
    if (cfg.tol_res > 0.0 && scaled_residual(problem, J, dt) <= cfg.tol_res) {
      res.converged = true;
      return res;
    }
    if (it == cfg.max_iter) {
      res.failure = "no convergence in " + std::to_string(cfg.max_iter) + " iterations";
      return res;
    }
    DofVector dx;
    try {
      if (!clamped) dx = schur_solve(J);
      else {
        // Active set: floor dofs pushing downwards, then those whose increment
        // points below the floor, are frozen and the rest solved again.
        bool held = false;
        for (std::size_t i = 0; i < nv; ++i)
          held |= hold_v[i] = res.x.vertex_values[i] <= floor && J.b1(i) == 0.0;
        for (std::size_t k = 0; k < nc; ++k)
          held |= hold_c[k] = res.x.cell_values[k] <= floor && J.b2(k) == 0.0;
        if (held) {
          JacobianBlocks R = J;
          freeze(R, hold_v, hold_c);
          dx = schur_solve(R);
        } else {
          dx = schur_solve(J);
        }
        for (int pass = 0; pass < 20; ++pass) {
          bool grew = false;
          for (std::size_t i = 0; i < nv; ++i)
            if (!hold_v[i] && res.x.vertex_values[i] <= floor && dx.vertex_values[i] < 0.0) hold_v[i] = grew = true;
          for (std::size_t k = 0; k < nc; ++k)
            if (!hold_c[k] && res.x.cell_values[k] <= floor && dx.cell_values[k] < 0.0) hold_c[k] = grew = true;
          if (!grew) break;
          JacobianBlocks R = J;
          freeze(R, hold_v, hold_c);
          dx = schur_solve(R);
        }
      }
    } catch (const SolverError& e) {
      res.failure = e.what();
      return res;
    }
    double change = 0.0;
    auto update = [&](double& v, double d) {
      const double next = clamped ? std::max(v + d, floor) : v + d;
      change = std::max(change, std::abs(to_u(next, coef) - to_u(v, coef)));
      v = next;
    };
    for (std::size_t k = 0; k < nc; ++k) update(res.x.cell_values[k], dx.cell_values[k]);
    for (std::size_t i = 0; i < nv; ++i) update(res.x.vertex_values[i], dx.vertex_values[i]);
    res.iterations = it + 1;
    res.increment = change;
    if (!std::isfinite(change)) {
      res.failure = "non-finite increment";
      return res;
    }
    if (change <= cfg.tol_inc) {
      res.converged = true;
      const DofVector r = problem.residual(res.x, x_prev, dt, t);
      res.residual = r.max_abs();
      return res;
    }
  }
}

double identity(double x, double) { return x; }
double exp_scaled(double x, double c) { return std::exp(x / c); }

DofVector map_dofs(DofVector x, const auto& f) {
  for (double& v : x.cell_values) v = f(v);
  for (double& v : x.vertex_values) v = f(v);
  return x;
}

} // namespace

NewtonResult newton_solve(const DiscreteProblem& problem, const DofVector& x_prev, double dt, double t,
                          const NewtonConfig& cfg) {
  const double eps = cfg.clamp_floor;
  if (!problem.needs_clamp()) {
    DofVector x = x_prev;
    problem.impose_dirichlet(x, t);
    return iterate(problem, std::move(x), x_prev, dt, t, cfg, -std::numeric_limits<double>::infinity(), identity,
                   0.0);
  }
  if (problem.log_coefficient() <= 0.0) {
    DofVector x = x_prev;
    clamp(x, eps);
    problem.impose_dirichlet(x, t);
    clamp(x, eps);
    return iterate(problem, std::move(x), x_prev, dt, t, cfg, eps, identity, 0.0);
  }
  // Logarithmic pressures: iterate on x = c log u, floored at c log eps.
  const double c = problem.log_coefficient();
  const DiscreteProblem twin = problem.pressure_twin(eps);
  const DofVector p_prev = map_dofs(x_prev, [&](double u) { return c * std::log(std::max(u, 0.0)); });
  DofVector p = map_dofs(x_prev, [&](double u) { return c * std::log(std::max(u, eps)); });
  twin.impose_dirichlet(p, t);
  NewtonResult res = iterate(twin, std::move(p), p_prev, dt, t, cfg, c * std::log(eps), exp_scaled, c);
  res.x = map_dofs(std::move(res.x), [&](double q) { return std::max(eps, std::exp(q / c)); });
  if (res.converged) res.residual = problem.residual(res.x, x_prev, dt, t).max_abs();
  return res;
}

AdvanceResult advance(const DiscreteProblem& problem, const DofVector& x_prev, double t, double t_stop,
                      const TimeStepper& stepper, const NewtonConfig& newton, StepperState& state, int step_index,
                      const FailureInjector& inject) {
  if (state.dt <= 0.0) state.dt = stepper.dt_init;
  for (;;) {
    const double remaining = t_stop - t;
    double dt = std::min({state.dt, stepper.dt_max, remaining});
    if (remaining - dt <= 1e-10 * dt) dt = remaining;
    const double t_new = dt == remaining ? t_stop : t + dt;
    const bool forced = inject && inject(step_index, dt);
    NewtonResult nr;
    if (!forced) nr = newton_solve(problem, x_prev, dt, t_new, newton);
    if (!forced && nr.converged) {
      state.consecutive_failures = 0;
      state.dt = std::min(state.dt * stepper.growth, stepper.dt_max);
      return {std::move(nr.x), dt, nr.iterations};
    }
    ++state.total_failures;
    if (++state.consecutive_failures >= stepper.max_failures) {
      std::ostringstream msg;
      msg << "time stepping aborted at t = " << t << " after " << state.consecutive_failures
          << " consecutive failures (last dt = " << dt << ", last residual = " << nr.residual << ": "
          << (forced ? "injected failure" : nr.failure) << ")";
      throw SolverError(msg.str());
    }
    state.dt *= stepper.shrink;
  }
}

TransientResult run_transient(const DiscreteProblem& problem, const DofVector& x0, const TransientOptions& opts) {
  opts.stepper.validate();
  opts.newton.validate();
  if (!(opts.t_final >= 0.0)) throw ValidationError("time.final must be nonnegative");

  std::vector<double> stops;
  for (double s : opts.stop_times)
    if (s > 0.0 && s < opts.t_final) stops.push_back(s);
  stops.push_back(opts.t_final);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  TransientResult out;
  DofVector x = x0;
  double t = 0.0;
  StepRecord rec = describe(problem, x, 0.0, 0.0, 0);
  out.report.steps.push_back(rec);
  out.trajectory.times.push_back(0.0);
  out.trajectory.states.push_back(x);
  if (opts.observer) opts.observer(rec, x);

  StepperState state;
  state.dt = opts.stepper.dt_init;
  std::size_t next_stop = 0;
  int step = 0;
  while (next_stop < stops.size() && opts.t_final > 0.0) {
    const double t_stop = stops[next_stop];
    AdvanceResult ar;
    try {
      ar = advance(problem, x, t, t_stop, opts.stepper, opts.newton, state, step, opts.inject);
    } catch (const SolverError& e) {
      out.report.failures = state.total_failures;
      std::ostringstream msg;
      msg << e.what() << "; " << out.report.steps.size() - 1 << " steps accepted, " << out.report.newton_total
          << " Newton iterations";
      throw SolverError(msg.str());
    }
    ++step;
    const bool at_stop = ar.dt_used == t_stop - t;
    t = at_stop ? t_stop : t + ar.dt_used;
    if (at_stop) ++next_stop;
    x = std::move(ar.x);
    out.report.newton_total += ar.newton_iters;
    rec = describe(problem, x, t, ar.dt_used, ar.newton_iters);
    out.report.steps.push_back(rec);
    if (opts.observer) opts.observer(rec, x);
    const bool last = next_stop == stops.size();
    if (at_stop || last || (opts.stride > 0 && step % opts.stride == 0)) {
      out.trajectory.times.push_back(t);
      out.trajectory.states.push_back(x);
    }
  }
  out.report.failures = state.total_failures;
  return out;
}

TransientResult run_pressure_primary(const DiscreteProblem& problem, const DofVector& p0,
                                     const TransientOptions& opts) {
  if (!problem.heterogeneous())
    throw ValidationError("the pressure-primary march needs a heterogeneous pressure-formulation problem");
  return run_transient(problem, p0, opts);
}

} // namespace vagflow
