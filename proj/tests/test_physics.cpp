#include "vagflow/errors.hpp"
#include "vagflow/physics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

using namespace vagflow;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// int_0^u sqrt(eta) p' with a = s^2 to remove the endpoint singularity.
double xi_oracle(const Model& m, double u) {
  const double lo = 1e-9 * std::sqrt(u);
  return simpson([&](double s) {
    s = std::max(s, lo);
    return std::sqrt(m.eta(s * s)) * m.pressure_prime(s * s) * 2 * s;
  }, 0.0, std::sqrt(u));
}

double entropy_oracle(const Model& m, double u) {
  const double p1 = m.pressure(1.0);
  return simpson([&](double a) { return m.pressure(a) - p1; }, 1.0, u);
}

} // namespace

TEST_CASE("catalog values") {
  const Model fp = make_model("fokker_planck_log");
  CHECK(fp.xi(4.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(fp.singular);
  CHECK(!fp.admissible(0.0));
  CHECK(std::isinf(fp.entropy(-1.0)));

  const Model b = make_model("pme_b");
  CHECK(b.pressure(-2.0) == -2.0);
  CHECK(b.eta(-3.0) == b.eta(3.0));
  CHECK(!b.singular);

  const Model c = make_model("pme_c");
  for (double u : {0.0, 0.3, 1.0, 2.5}) CHECK(c.xi(u) == doctest::Approx(u * u).epsilon(1e-14));

  CHECK_THROWS_AS(make_model("heat"), ValidationError);
  CHECK_THROWS_AS(make_model("custom", {{"p_exp", -0.5}}), ValidationError);
}

TEST_CASE("negative extension of the pressure") {
  for (const char* name : {"pme_b", "pme_c", "pme_drift"}) {
    const Model m = make_model(name);
    for (double u : {0.1, 0.7, 2.0}) CHECK(m.pressure(-u) == doctest::Approx(2 * m.pressure(0.0) - m.pressure(u)));
  }
}

TEST_CASE("xi and entropy agree with quadrature") {
  for (const char* name : {"fokker_planck_log", "pme_a", "pme_b", "pme_c", "pme_drift"}) {
    const Model m = make_model(name);
    for (double u : {0.25, 1.0, 4.0}) {
      CHECK(m.xi(u) == doctest::Approx(xi_oracle(m, u)).epsilon(1e-7));
      CHECK(m.entropy(u) == doctest::Approx(entropy_oracle(m, u)).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("custom laws integrate numerically") {
  const Model lg = make_model("custom", {{"eta_coef", 1.0}, {"eta_exp", 1.0}, {"log_pressure", 1.0}});
  const Model fp = make_model("fokker_planck_log");
  for (double u : {0.1, 1.0, 3.0}) {
    CHECK(lg.xi(u) == doctest::Approx(fp.xi(u)).epsilon(1e-9));
    CHECK(lg.entropy(u) == doctest::Approx(fp.entropy(u)).epsilon(1e-9).scale(1.0));
  }
  const Model pw = make_model("custom", {{"eta_coef", 2.0}, {"eta_exp", 1.0}, {"p_exp", 1.0}});
  const Model b = make_model("pme_b");
  for (double u : {0.1, 1.0, 3.0}) {
    CHECK(pw.xi(u) == doctest::Approx(b.xi(u)).epsilon(1e-9));
    CHECK(pw.entropy(u) == doctest::Approx(b.entropy(u)).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("entropy outgrows mobility") {
  for (const char* name : {"pme_b", "fokker_planck_log"}) {
    const Model m = make_model(name);
    CHECK(m.entropy(1e6) / m.eta(1e6) > m.entropy(1e3) / m.eta(1e3));
  }
  // u log u against 2 u^2: the quadratic mobility outgrows the entropy.
  const Model a = make_model("pme_a");
  CHECK(a.entropy(1e6) / a.eta(1e6) < a.entropy(1e3) / a.eta(1e3));
}

TEST_CASE("analytical solutions") {
  const AnalyticalParams unit{};
  CHECK(analytical_solution(AnalyticalTest::t2_1d, {0.5, 0.3}, 0.25, unit) == 0.0);
  CHECK(analytical_solution(AnalyticalTest::t2_1d, {0.1, 0.3}, 0.25, unit) == doctest::Approx(0.4));
  CHECK(analytical_solution(AnalyticalTest::t2_2d, {0.5, 0.5}, 0.3, unit) == 0.0);
  CHECK(analytical_solution(AnalyticalTest::t3, {0.2, 0.9}, 0.1, AnalyticalParams{1.0, 1.0, 1.0}) ==
        doctest::Approx(0.1));

  const AnalyticalParams grav{1.0, 1.0, 1.0};
  for (double x : {0.0, 0.3, 1.0}) {
    const double limit = std::numbers::pi * std::exp(x - 0.5);
    CHECK(analytical_solution(AnalyticalTest::t1, {x, 0.4}, 60.0, grav) == doctest::Approx(limit).epsilon(1e-12));
  }
}

TEST_CASE("Gibbs states") {
  const Model fp = make_model("fokker_planck_log");
  const auto w = gibbs_state(fp, Potential::gravity({1.0, 0.0}), 2.0);
  const Potential v = Potential::gravity({1.0, 0.0});
  const double ref = std::log(w({0.0, 0.0})) + v.value({0.0, 0.0});
  for (Point x : {Point{0.3, 0.1}, Point{1.0, 0.7}, Point{0.5, 0.5}})
    CHECK(std::log(w(x)) + v.value(x) == doctest::Approx(ref).epsilon(1e-13));
  // Mass of e^x on the unit square.
  CHECK(w({0, 0}) * (std::numbers::e - 1.0) == doctest::Approx(2.0).epsilon(1e-13));

  const auto flat = gibbs_state(fp, Potential::zero(), 3.0);
  CHECK(flat({0.2, 0.9}) == doctest::Approx(3.0));
  CHECK(flat({0.9, 0.1}) == doctest::Approx(3.0));

  const auto q = gibbs_state(fp, Potential::quadratic({0.5, 0.5}), 1.0);
  const double mass = simpson([&](double x) { return simpson([&](double y) { return q({x, y}); }, 0, 1, 200); }, 0, 1, 200);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));

  CHECK_THROWS_AS(gibbs_state(make_model("pme_b"), Potential::zero(), 1.0), ValidationError);
}

TEST_CASE("heterogeneous inverse laws") {
  const HeteroModel h = HeteroModel::drain_barrier();
  for (int tag : {1, 2})
    for (double u : {1e-4, 0.02, 1.0, 7.5}) CHECK(std::abs(h.density(tag, h.pressure(tag, u)) - u) <= 1e-12 * u);
  CHECK(h.density(1, 0.0) == 1.0);
  CHECK(h.density(1, -3.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(h.density_prime(2, 0.5) == doctest::Approx(std::exp(0.5)));
  CHECK_THROWS_AS(h.at(3), ValidationError);
}

TEST_CASE("tensors") {
  TensorField tf(Tensor2{});
  tf.set(2, Tensor2{1.0, 0.0, 0.01});
  CHECK(tf.lambda_min() == doctest::Approx(0.01));
  CHECK(tf.lambda_max() == doctest::Approx(1.0));
  CHECK_THROWS_AS(tf.set(3, Tensor2{1.0, 2.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(tf.at(5), ValidationError);
  const Tensor2 t{2.0, 1.0, 2.0};
  CHECK(t.min_eigenvalue() == doctest::Approx(1.0));
  CHECK(t.max_eigenvalue() == doctest::Approx(3.0));
}
