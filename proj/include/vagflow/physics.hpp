#ifndef VAGFLOW_PHYSICS_HPP
#define VAGFLOW_PHYSICS_HPP

#include "vagflow/mesh.hpp"

#include <functional>
#include <map>
#include <string>
#include <string_view>

namespace vagflow {

/// Mobility / pressure pair with its entropy and semi-Kirchhoff functions.
///
/// `eta` is extended to an even function and, when p(0) is finite, `pressure`
/// is extended to u < 0 by p(u) = 2 p(0) - p(-u). For singular models
/// (p(0) = -inf) pressure-side functions must only be called with u > 0, and
/// `entropy` returns +inf for u < 0.
struct Model {
  std::string name;
  bool singular = false;
  double p_at_zero = 0.0; ///< -inf for singular models
  bool degenerate = true; ///< eta(0) == 0

  std::function<double(double)> eta;
  std::function<double(double)> eta_prime;
  std::function<double(double)> pressure;
  std::function<double(double)> pressure_prime;
  /// Gamma(u) = int_1^u (p(a) - p(1)) da
  std::function<double(double)> entropy;
  /// xi(u) = int_0^u sqrt(eta(a)) p'(a) da
  std::function<double(double)> xi;

  /// u lies in the open pressure domain I_p.
  bool admissible(double u) const { return !singular || u > 0.0; }
};

/// Catalog: fokker_planck_log (eta = u, p = log u), pme_a (eta = 2u^2,
/// p = log u), pme_b (eta = 2u, p = u), pme_c (eta = 1, p = u^2), pme_drift
/// (eta = u, p = 2u), and `custom`: eta = eta_coef |u|^eta_exp with either
/// p = p_coef log u (log_pressure = 1) or p = p_coef u^p_exp. Custom entropy
/// and xi are evaluated by adaptive quadrature.
///
/// Throws ValidationError for unknown names, fast-diffusion exponents, or
/// custom laws failing the mobility / pressure monotonicity sample checks.
Model make_model(std::string_view name, const std::map<std::string, double>& params = {});

/// Symmetric 2x2 tensor.
struct Tensor2 {
  double xx = 1.0;
  double xy = 0.0;
  double yy = 1.0;

  double min_eigenvalue() const;
  double max_eigenvalue() const;
  Point apply(Point v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
};

/// Piecewise constant tensor, one entry per subdomain tag.
class TensorField {
public:
  TensorField() = default;
  explicit TensorField(Tensor2 uniform);

  /// Throws ValidationError unless the tensor is uniformly positive definite.
  void set(int tag, Tensor2 t);
  const Tensor2& at(int tag) const;
  bool has(int tag) const { return by_tag_.contains(tag); }

  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }

private:
  std::map<int, Tensor2> by_tag_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

class Potential {
public:
  enum class Kind { zero, gravity, quadratic };

  static Potential zero() { return Potential(Kind::zero, {}, {}); }
  /// V(x) = -g . x
  static Potential gravity(Point g) { return Potential(Kind::gravity, g, {}); }
  /// V(x) = |x - center|^2 / 2
  static Potential quadratic(Point center) { return Potential(Kind::quadratic, {}, center); }

  Kind kind() const { return kind_; }
  Point g() const { return g_; }
  double value(Point x) const;
  Point gradient(Point x) const;

private:
  Potential(Kind k, Point g, Point c) : kind_(k), g_(g), center_(c) {}

  Kind kind_;
  Point g_;
  Point center_;
};

/// Heterogeneous drain/barrier data with pressure as the primary unknown.
/// Subdomain tag -> pressure law p(u) = coef * log(u) and tensor; eta(u) = u.
struct HeteroModel {
  struct Subdomain {
    double pressure_coef = 1.0;
    Tensor2 tensor;
  };
  std::map<int, Subdomain> subdomains;

  /// The drain (tag 1: p = 3 log u, identity tensor) / barrier (tag 2:
  /// p = log u, diag(1, 0.01)) configuration.
  static HeteroModel drain_barrier();

  const Subdomain& at(int tag) const;
  double pressure(int tag, double u) const;
  /// Inverse pressure law u_k(p) of the subdomain.
  double density(int tag, double p) const;
  double density_prime(int tag, double p) const;
};

enum class AnalyticalTest { t1, t2_1d, t2_2d, t3 };

AnalyticalTest analytical_test_from_string(std::string_view name);
std::string to_string(AnalyticalTest t);

struct AnalyticalParams {
  double lx = 1.0;
  double ly = 1.0;
  double g = 0.0;
};

/// Closed-form reference solutions on the unit square:
/// t1 (linear Fokker-Planck with gravity, no-flux), t2_1d (porous medium
/// front max(2 lx t - x, 0)), t2_2d (separable paraboloid, t < 1) and t3
/// (porous medium with drift front max(lx (2 + g) t - x, 0)).
double analytical_solution(AnalyticalTest test, Point x, double t, const AnalyticalParams& params);

/// Steady state w with p(w) + V constant and total mass `mass` over `box`.
/// Only logarithmic pressures (p = log u) are supported.
std::function<double(Point)> gibbs_state(const Model& model, const Potential& potential, double mass,
                                         BoundingBox box = {{0.0, 0.0}, {1.0, 1.0}});

} // namespace vagflow

#endif
