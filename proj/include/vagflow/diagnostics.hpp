#ifndef VAGFLOW_DIAGNOSTICS_HPP
#define VAGFLOW_DIAGNOSTICS_HPP

#include "vagflow/assembly.hpp"
#include "vagflow/solver.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace vagflow {

/// Space-time discrete errors, err_q = (sum_n dt_n sum_b m_b |e_b^n|^q)^(1/q)
/// over the accepted steps n >= 1, and the maximum of |e_b^n| over the same set.
struct ErrorTriple {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

/// Streams accepted steps into an ErrorTriple without keeping them.
class ErrorAccumulator {
public:
  explicit ErrorAccumulator(const Discretization& disc) : disc_(&disc) {}

  void add(double dt, const DofVector& u, const DofVector& exact);
  ErrorTriple result() const;

private:
  const Discretization* disc_;
  double sum1_ = 0.0;
  double sum2_ = 0.0;
  double max_ = 0.0;
};

using SpaceTimeFunction = std::function<double(Point, double)>;

/// Errors of a trajectory holding every accepted step against `exact`
/// sampled at the dof sites.
ErrorTriple error_norms(const Discretization& disc, const Trajectory& traj, const SpaceTimeFunction& exact);

/// rate_i = log(err_i / err_{i+1}) / log(h_i / h_{i+1}); NaN where an error
/// vanishes. Throws ValidationError unless h is strictly decreasing.
std::vector<double> convergence_rates(const std::vector<double>& errors, const std::vector<double>& h);

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line through (t, log E) for the samples with t in
/// [t_lo, t_hi]. Throws ValidationError on E <= 0 inside the window or fewer
/// than two samples.
DecayFit entropy_decay_fit(const std::vector<std::pair<double, double>>& series, double t_lo, double t_hi);

/// 17 significant digits, "nan"/"inf"/"-inf" for non-finite values.
std::string format_number(double v);

/// One row of a convergence table.
struct BenchRow {
  double h = 0.0;
  std::size_t n_vertices = 0;
  double dt_init = 0.0;
  double dt_max = 0.0;
  ErrorTriple errors;
  double u_min = 0.0;
  int newton_total = 0;
};

extern const std::vector<std::string> bench_columns;

/// Header plus one line per level; rate columns are empty on the first row.
void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows);

void write_report_csv(std::ostream& out, const SolveReport& report);
void write_summary_csv(std::ostream& out, const BenchRow& row);
void write_series_dat(std::ostream& out, const std::vector<std::pair<double, double>>& series);

} // namespace vagflow

#endif
