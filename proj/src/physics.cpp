#include "vagflow/physics.hpp"

#include "vagflow/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace vagflow {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double sign(double u) { return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0); }

double param(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

Model log_family(std::string name, double eta_coef, double eta_exp) {
  // eta = c |u|^a, p = log u. Gamma does not depend on eta;
  // xi = int_0^u sqrt(c) a^(a/2 - 1) da = sqrt(c) u^(a/2) / (a/2).
  Model m;
  m.name = std::move(name);
  m.singular = true;
  m.p_at_zero = -inf;
  m.eta = [=](double u) { return eta_coef * std::pow(std::abs(u), eta_exp); };
  m.eta_prime = [=](double u) { return eta_coef * eta_exp * sign(u) * std::pow(std::abs(u), eta_exp - 1.0); };
  m.pressure = [](double u) { return std::log(u); };
  m.pressure_prime = [](double u) { return 1.0 / u; };
  m.entropy = [](double u) {
    if (u < 0.0) return inf;
    if (u == 0.0) return 1.0;
    return u * std::log(u) - u + 1.0;
  };
  m.xi = [=](double u) {
    if (u < 0.0) return nan;
    return std::sqrt(eta_coef) * std::pow(u, 0.5 * eta_exp) / (0.5 * eta_exp);
  };
  return m;
}

/// Numeric entropy and xi for custom laws.
void attach_quadrature(Model& m) {
  const auto pressure = m.pressure;
  const auto pressure_prime = m.pressure_prime;
  const auto eta = m.eta;
  const bool singular = m.singular;
  const double p1 = pressure(1.0);
  m.entropy = [=](double u) {
    if (singular && u < 0.0) return inf;
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto f = [&](double a) { return pressure(a) - p1; };
    if (u == 1.0) return 0.0;
    // Split at 0 so the integrator sees the kink of the extension as an endpoint.
    if (u < 0.0) {
      return integrator.integrate(f, 0.0, 1.0, 1e-12) * -1.0 + integrator.integrate(f, u, 0.0, 1e-12) * -1.0;
    }
    return u > 1.0 ? integrator.integrate(f, 1.0, u, 1e-12) : -integrator.integrate(f, u, 1.0, 1e-12);
  };
  m.xi = [=](double u) {
    if (u == 0.0) return 0.0;
    if (singular && u < 0.0) return nan;
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto f = [&](double a) { return std::sqrt(eta(a)) * pressure_prime(a); };
    const double s = integrator.integrate(f, 0.0, std::abs(u), 1e-12);
    return u > 0.0 ? s : -s;
  };
}

Model custom_model(const std::map<std::string, double>& params) {
  const double eta_coef = param(params, "eta_coef", 1.0);
  const double eta_exp = param(params, "eta_exp", 1.0);
  const bool log_pressure = param(params, "log_pressure", 0.0) != 0.0;
  const double p_coef = param(params, "p_coef", 1.0);
  const double p_exp = param(params, "p_exp", 1.0);

  if (!(eta_coef > 0.0) || !(p_coef > 0.0)) {
    throw ValidationError("model.params: eta_coef and p_coef must be positive");
  }
  if (!log_pressure && p_exp < 0.0) {
    throw ValidationError("model.params.p_exp < 0 is the fast-diffusion regime, which is not supported");
  }

  Model m;
  m.name = "custom";
  m.eta = [=](double u) { return eta_coef * std::pow(std::abs(u), eta_exp); };
  m.eta_prime = [=](double u) {
    return eta_exp == 0.0 ? 0.0 : eta_coef * eta_exp * sign(u) * std::pow(std::abs(u), eta_exp - 1.0);
  };
  m.degenerate = eta_exp > 0.0;
  if (log_pressure) {
    if (!(eta_exp > 0.0)) {
      throw ValidationError("model.params.eta_exp must be positive with a logarithmic pressure "
                            "(sqrt(eta) p' is not integrable at 0 otherwise)");
    }
    m.singular = true;
    m.p_at_zero = -inf;
    m.pressure = [=](double u) { return p_coef * std::log(u); };
    m.pressure_prime = [=](double u) { return p_coef / u; };
  } else {
    // p(u) = c sgn(u) |u|^k is already the odd extension 2 p(0) - p(-u).
    m.pressure = [=](double u) { return p_coef * sign(u) * std::pow(std::abs(u), p_exp); };
    m.pressure_prime = [=](double u) { return p_coef * p_exp * std::pow(std::abs(u), p_exp - 1.0); };
  }

  // Sample checks of the mobility and pressure monotonicity assumptions.
  double prev_eta = m.eta(0.0);
  double prev_p = -inf;
  for (int i = 1; i <= 200; ++i) {
    const double u = 1e-3 * std::pow(1.08, i);
    const double e = m.eta(u);
    const double p = m.pressure(u);
    if (e < prev_eta) throw ValidationError("custom mobility is not nondecreasing on u > 0");
    if (!(p > prev_p)) throw ValidationError("custom pressure is not increasing on u > 0");
    prev_eta = e;
    prev_p = p;
  }
  attach_quadrature(m);
  return m;
}

} // namespace

Model make_model(std::string_view name, const std::map<std::string, double>& params) {
  if (name == "fokker_planck_log") return log_family("fokker_planck_log", 1.0, 1.0);
  if (name == "pme_a") return log_family("pme_a", 2.0, 2.0);
  if (name == "pme_b") {
    Model m;
    m.name = "pme_b";
    m.eta = [](double u) { return 2.0 * std::abs(u); };
    m.eta_prime = [](double u) { return 2.0 * sign(u); };
    m.pressure = [](double u) { return u; };
    m.pressure_prime = [](double) { return 1.0; };
    m.entropy = [](double u) { return 0.5 * (u - 1.0) * (u - 1.0); };
    m.xi = [](double u) { return (2.0 * std::numbers::sqrt2 / 3.0) * sign(u) * std::pow(std::abs(u), 1.5); };
    return m;
  }
  if (name == "pme_c") {
    Model m;
    m.name = "pme_c";
    m.degenerate = false;
    m.eta = [](double) { return 1.0; };
    m.eta_prime = [](double) { return 0.0; };
    m.pressure = [](double u) { return u * std::abs(u); };
    m.pressure_prime = [](double u) { return 2.0 * std::abs(u); };
    m.entropy = [](double u) { return u * u * std::abs(u) / 3.0 - u + 2.0 / 3.0; };
    m.xi = [](double u) { return u * std::abs(u); };
    return m;
  }
  if (name == "pme_drift") {
    Model m;
    m.name = "pme_drift";
    m.eta = [](double u) { return std::abs(u); };
    m.eta_prime = [](double u) { return sign(u); };
    m.pressure = [](double u) { return 2.0 * u; };
    m.pressure_prime = [](double) { return 2.0; };
    m.entropy = [](double u) { return (u - 1.0) * (u - 1.0); };
    m.xi = [](double u) { return (4.0 / 3.0) * sign(u) * std::pow(std::abs(u), 1.5); };
    return m;
  }
  if (name == "custom") return custom_model(params);
  throw ValidationError("unknown model '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

double Tensor2::min_eigenvalue() const {
  const double mean = 0.5 * (xx + yy);
  return mean - std::hypot(0.5 * (xx - yy), xy);
}

double Tensor2::max_eigenvalue() const {
  const double mean = 0.5 * (xx + yy);
  return mean + std::hypot(0.5 * (xx - yy), xy);
}

TensorField::TensorField(Tensor2 uniform) { set(1, uniform); }

void TensorField::set(int tag, Tensor2 t) {
  const double lo = t.min_eigenvalue();
  if (!(lo > 0.0)) {
    throw ValidationError("tensor for subdomain " + std::to_string(tag) + " is not positive definite");
  }
  by_tag_[tag] = t;
  lambda_min_ = by_tag_.size() == 1 ? lo : std::min(lambda_min_, lo);
  lambda_max_ = std::max(lambda_max_, t.max_eigenvalue());
}

const Tensor2& TensorField::at(int tag) const {
  const auto it = by_tag_.find(tag);
  if (it == by_tag_.end()) {
    throw ValidationError("no tensor given for subdomain " + std::to_string(tag));
  }
  return it->second;
}

double Potential::value(Point x) const {
  switch (kind_) {
  case Kind::zero: return 0.0;
  case Kind::gravity: return -dot(g_, x);
  case Kind::quadratic: return 0.5 * dot(x - center_, x - center_);
  }
  return 0.0;
}

Point Potential::gradient(Point x) const {
  switch (kind_) {
  case Kind::zero: return {};
  case Kind::gravity: return {-g_.x, -g_.y};
  case Kind::quadratic: return x - center_;
  }
  return {};
}

HeteroModel HeteroModel::drain_barrier() {
  HeteroModel h;
  h.subdomains[1] = {3.0, Tensor2{1.0, 0.0, 1.0}};
  h.subdomains[2] = {1.0, Tensor2{1.0, 0.0, 0.01}};
  return h;
}

const HeteroModel::Subdomain& HeteroModel::at(int tag) const {
  const auto it = subdomains.find(tag);
  if (it == subdomains.end()) {
    throw ValidationError("cell tag " + std::to_string(tag) + " is not a known subdomain");
  }
  return it->second;
}

double HeteroModel::pressure(int tag, double u) const { return at(tag).pressure_coef * std::log(u); }

double HeteroModel::density(int tag, double p) const { return std::exp(p / at(tag).pressure_coef); }

double HeteroModel::density_prime(int tag, double p) const {
  const double c = at(tag).pressure_coef;
  return std::exp(p / c) / c;
}

// ---------------------------------------------------------------------------

AnalyticalTest analytical_test_from_string(std::string_view name) {
  if (name == "t1") return AnalyticalTest::t1;
  if (name == "t2_1d") return AnalyticalTest::t2_1d;
  if (name == "t2_2d") return AnalyticalTest::t2_2d;
  if (name == "t3") return AnalyticalTest::t3;
  throw ValidationError("unknown analytical solution '" + std::string(name) + "'");
}

std::string to_string(AnalyticalTest t) {
  switch (t) {
  case AnalyticalTest::t1: return "t1";
  case AnalyticalTest::t2_1d: return "t2_1d";
  case AnalyticalTest::t2_2d: return "t2_2d";
  case AnalyticalTest::t3: return "t3";
  }
  return "?";
}

double analytical_solution(AnalyticalTest test, Point p, double t, const AnalyticalParams& prm) {
  using std::numbers::pi;
  switch (test) {
  case AnalyticalTest::t1: {
    const double g = prm.g;
    const double alpha = prm.lx * (pi * pi + 0.25 * g * g);
    return std::exp(-alpha * t + 0.5 * g * p.x) * (pi * std::cos(pi * p.x) + 0.5 * g * std::sin(pi * p.x)) +
           pi * std::exp(g * (p.x - 0.5));
  }
  case AnalyticalTest::t2_1d:
    return std::max(2.0 * prm.lx * t - p.x, 0.0);
  case AnalyticalTest::t2_2d: {
    const double a = 1.0 / (16.0 * prm.lx);
    const double b = 1.0 / (16.0 * prm.ly);
    return (a * (p.x - 0.5) * (p.x - 0.5) + b * (p.y - 0.5) * (p.y - 0.5)) / (1.0 - t);
  }
  case AnalyticalTest::t3:
    return std::max(prm.lx * (2.0 + prm.g) * t - p.x, 0.0);
  }
  return nan;
}

std::function<double(Point)> gibbs_state(const Model& model, const Potential& potential, double mass,
                                         BoundingBox box) {
  const bool log_pressure = model.singular && std::abs(model.pressure(std::numbers::e) - 1.0) < 1e-14 &&
                            std::abs(model.pressure(1.0)) < 1e-14;
  if (!log_pressure) {
    throw ValidationError("steady states are only available for p(u) = log(u), not model '" + model.name + "'");
  }
  if (!(mass > 0.0)) throw ValidationError("steady state mass must be positive");

  // w = C exp(-V) with C fixed by the mass.
  double integral = 0.0;
  const double wx = box.hi.x - box.lo.x, wy = box.hi.y - box.lo.y;
  if (potential.kind() == Potential::Kind::zero) {
    integral = wx * wy;
  } else if (potential.kind() == Potential::Kind::gravity) {
    auto line = [](double g, double lo, double hi) {
      return g == 0.0 ? hi - lo : (std::exp(g * hi) - std::exp(g * lo)) / g;
    };
    integral = line(potential.g().x, box.lo.x, box.hi.x) * line(potential.g().y, box.lo.y, box.hi.y);
  } else {
    using Gauss = boost::math::quadrature::gauss<double, 30>;
    integral = Gauss::integrate(
        [&](double x) {
          return Gauss::integrate([&](double y) { return std::exp(-potential.value({x, y})); }, box.lo.y,
                                  box.hi.y);
        },
        box.lo.x, box.hi.x);
  }
  const double c = mass / integral;
  return [c, potential](Point x) { return c * std::exp(-potential.value(x)); };
}

} // namespace vagflow
