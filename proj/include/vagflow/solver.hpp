#ifndef VAGFLOW_SOLVER_HPP
#define VAGFLOW_SOLVER_HPP

#include "vagflow/assembly.hpp"

#include <functional>
#include <string>
#include <vector>

namespace vagflow {

struct NewtonConfig {
  double tol_inc = 1e-10;
  int max_iter = 30;
  double clamp_floor = 1e-10; ///< used for singular models only
  /// The iteration also stops, before solving, once every row satisfies
  /// |dt R_b / m_b| <= tol_res (Dirichlet rows: |R_b| <= tol_res). Zero
  /// disables the check.
  double tol_res = 1e-13;

  void validate() const;
};

struct NewtonResult {
  DofVector x;
  bool converged = false;
  int iterations = 0; ///< linear solves performed
  double increment = 0.0;
  double residual = 0.0; ///< L-infinity norm of the last evaluated residual
  std::string failure;
};

/// Solves (A B; C D)(dv; dc) = (b1; b2) through the vertex Schur complement
/// S = A - B D^-1 C with a sparse LU (COLAMD ordering), then back-substitutes
/// dc = D^-1 (b2 - C dv). Throws SolverError on a zero D entry or a singular S.
DofVector schur_solve(const JacobianBlocks& blocks);

/// Newton iteration for one implicit step from `x_prev` over [t - dt, t].
/// Singular models keep every dof at or above eps; with a logarithmic pressure
/// the iteration runs on p(u) and the increment is still measured in u.
NewtonResult newton_solve(const DiscreteProblem& problem, const DofVector& x_prev, double dt, double t,
                          const NewtonConfig& cfg);

struct TimeStepper {
  double dt_init = 1e-3;
  double dt_max = 1e-2;
  double growth = 2.0;
  double shrink = 0.5;
  int max_failures = 20;

  void validate() const;
};

struct StepperState {
  double dt = 0.0; ///< nominal step for the next attempt
  int consecutive_failures = 0;
  int total_failures = 0;
};

/// Returns true to make the attempt (step index, dt) fail before solving.
using FailureInjector = std::function<bool(int step, double dt)>;

struct AdvanceResult {
  DofVector x;
  double dt_used = 0.0;
  int newton_iters = 0;
};

/// One accepted step from t towards t_stop: dt_used = min(state.dt, dt_max,
/// t_stop - t). Failures shrink state.dt and retry; success grows it, capped
/// at dt_max. Throws SolverError after max_failures consecutive failures.
AdvanceResult advance(const DiscreteProblem& problem, const DofVector& x_prev, double t, double t_stop,
                      const TimeStepper& stepper, const NewtonConfig& newton, StepperState& state, int step_index = 0,
                      const FailureInjector& inject = {});

struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  int newton_iters = 0;
  double energy = 0.0;
  double dissipation = 0.0;
  double mass = 0.0;
  double u_min = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DofVector> states;
};

struct SolveReport {
  std::vector<StepRecord> steps; ///< steps[0] describes the initial state
  int newton_total = 0;
  int failures = 0;
};

struct TransientOptions {
  double t_final = 0.0;
  TimeStepper stepper;
  NewtonConfig newton;
  /// Times the stepper must land on exactly (snapshots).
  std::vector<double> stop_times;
  /// Store every stride-th accepted state (0: only the first and last); stop
  /// times and the final state are always stored.
  std::size_t stride = 1;
  /// Called with each accepted state, including the initial one.
  std::function<void(const StepRecord&, const DofVector&)> observer;
  FailureInjector inject;
};

struct TransientResult {
  Trajectory trajectory;
  SolveReport report;
};

/// Marches the implicit scheme from x0 at t = 0 to t_final. Throws
/// SolverError (carrying the partial report in its message) on abort.
TransientResult run_transient(const DiscreteProblem& problem, const DofVector& x0, const TransientOptions& opts);

/// Same march for a pressure-formulation problem; states hold pressures.
TransientResult run_pressure_primary(const DiscreteProblem& problem, const DofVector& p0,
                                     const TransientOptions& opts);

} // namespace vagflow

#endif
