#include "vagflow/diagnostics.hpp"

#include "vagflow/errors.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace vagflow {

void ErrorAccumulator::add(double dt, const DofVector& u, const DofVector& exact) {
  const Mesh& mesh = disc_->mesh();
  const LumpedMeasures& lm = disc_->lumped();
  double s1 = 0.0;
  double s2 = 0.0;
  auto visit = [&](double m, double e) {
    e = std::abs(e);
    s1 += m * e;
    s2 += m * e * e;
    max_ = std::max(max_, e);
  };
  for (std::size_t k = 0; k < mesh.n_cells(); ++k) visit(lm.m_cell[k], u.cell_values[k] - exact.cell_values[k]);
  for (std::size_t i = 0; i < mesh.n_vertices(); ++i)
    visit(lm.m_vertex[i], u.vertex_values[i] - exact.vertex_values[i]);
  sum1_ += dt * s1;
  sum2_ += dt * s2;
}

ErrorTriple ErrorAccumulator::result() const { return {sum1_, std::sqrt(sum2_), max_}; }

ErrorTriple error_norms(const Discretization& disc, const Trajectory& traj, const SpaceTimeFunction& exact) {
  ErrorAccumulator acc(disc);
  for (std::size_t n = 1; n < traj.times.size(); ++n) {
    const double t = traj.times[n];
    const DofVector ref = sample_at_dofs(disc.mesh(), [&](Point x) { return exact(x, t); });
    acc.add(t - traj.times[n - 1], traj.states[n], ref);
  }
  return acc.result();
}

std::vector<double> convergence_rates(const std::vector<double>& errors, const std::vector<double>& h) {
  if (errors.size() != h.size()) throw ValidationError("errors and mesh sizes differ in length");
  std::vector<double> rates;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    if (!(h[i + 1] < h[i])) throw ValidationError("mesh sizes must be strictly decreasing");
    if (errors[i] <= 0.0 || errors[i + 1] <= 0.0) {
      rates.push_back(std::nan(""));
      continue;
    }
    rates.push_back(std::log(errors[i] / errors[i + 1]) / std::log(h[i] / h[i + 1]));
  }
  return rates;
}

DecayFit entropy_decay_fit(const std::vector<std::pair<double, double>>& series, double t_lo, double t_hi) {
  std::vector<double> ts;
  std::vector<double> ys;
  for (const auto& [t, e] : series) {
    if (t < t_lo || t > t_hi) continue;
    if (!(e > 0.0)) throw ValidationError("nonpositive entropy at t = " + format_number(t));
    ts.push_back(t);
    ys.push_back(std::log(e));
  }
  if (ts.size() < 2) throw ValidationError("decay fit needs at least two samples in the window");
  const double n = static_cast<double>(ts.size());
  double mt = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= n;
  my /= n;
  double stt = 0.0;
  double sty = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    sty += (ts[i] - mt) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (stt == 0.0) throw ValidationError("decay fit needs distinct sample times");
  DecayFit fit;
  fit.slope = sty / stt;
  fit.intercept = my - fit.slope * mt;
  // a constant series is fitted exactly
  fit.r_squared = syy == 0.0 ? 1.0 : std::min(1.0, sty * sty / (stt * syy));
  return fit;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<std::string> bench_columns = {"h",         "n_vertices", "dt_init",   "dt_max",
                                                "err_l2",    "rate_l2",    "err_l1",    "rate_l1",
                                                "err_linf",  "rate_linf",  "u_min",     "newton_total"};

namespace {

void write_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

std::string rate_cell(const std::vector<double>& rates, std::size_t row) {
  return row == 0 ? std::string() : format_number(rates[row - 1]);
}

} // namespace

void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows) {
  write_header(out, bench_columns);
  std::vector<double> h, e2, e1, ei;
  for (const auto& r : rows) {
    h.push_back(r.h);
    e2.push_back(r.errors.l2);
    e1.push_back(r.errors.l1);
    ei.push_back(r.errors.linf);
  }
  std::vector<double> r2, r1, ri;
  if (rows.size() > 1) {
    r2 = convergence_rates(e2, h);
    r1 = convergence_rates(e1, h);
    ri = convergence_rates(ei, h);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << format_number(r.h) << ',' << r.n_vertices << ',' << format_number(r.dt_init) << ','
        << format_number(r.dt_max) << ',' << format_number(r.errors.l2) << ',' << rate_cell(r2, i) << ','
        << format_number(r.errors.l1) << ',' << rate_cell(r1, i) << ',' << format_number(r.errors.linf) << ','
        << rate_cell(ri, i) << ',' << format_number(r.u_min) << ',' << r.newton_total << '\n';
  }
}

void write_report_csv(std::ostream& out, const SolveReport& report) {
  write_header(out, {"t", "dt", "newton_iters", "E_D", "dissipation", "mass", "u_min"});
  for (const auto& s : report.steps) {
    out << format_number(s.t) << ',' << format_number(s.dt) << ',' << s.newton_iters << ','
        << format_number(s.energy) << ',' << format_number(s.dissipation) << ',' << format_number(s.mass) << ','
        << format_number(s.u_min) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const BenchRow& r) {
  write_header(out, {"h", "n_vertices", "dt_init", "dt_max", "err_l2", "err_l1", "err_linf", "u_min",
                     "newton_total"});
  out << format_number(r.h) << ',' << r.n_vertices << ',' << format_number(r.dt_init) << ','
      << format_number(r.dt_max) << ',' << format_number(r.errors.l2) << ',' << format_number(r.errors.l1) << ','
      << format_number(r.errors.linf) << ',' << format_number(r.u_min) << ',' << r.newton_total << '\n';
}

void write_series_dat(std::ostream& out, const std::vector<std::pair<double, double>>& series) {
  for (const auto& [t, e] : series) out << format_number(t) << ' ' << format_number(e) << '\n';
}

} // namespace vagflow
