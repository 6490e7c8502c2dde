#include <doctest.h>

#include <cmath>
#include <vector>

#include "mtdc/errors.hpp"
#include "mtdc/rkf45.hpp"
#include "support.hpp"

using namespace mtdc;
using namespace testsupport;

namespace {

IntegratorOptions fixed_step(double dt) {
  IntegratorOptions options;
  options.dt_init = dt;
  options.dt_max = dt;
  options.rtol = 1e30;
  options.atol = 1e30;
  return options;
}

}  // namespace

TEST_SUITE("rkf45") {

TEST_CASE("polynomial quadrature is exact through degree three") {
  auto cubic = [](double t, const Eigen::VectorXd&, Eigen::VectorXd& dydt) {
    dydt(0) = t * t * t;
  };
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd y =
      integrate_rkf45(cubic, 0.0, 2.0, y0, fixed_step(0.25));
  CHECK(y(0) == doctest::Approx(4.0).epsilon(1e-13));

  auto quartic = [](double t, const Eigen::VectorXd&, Eigen::VectorXd& dydt) {
    dydt(0) = t * t * t * t;
  };
  Eigen::VectorXd z =
      integrate_rkf45(quartic, 0.0, 2.0, y0, fixed_step(0.25));
  // the propagated member is genuinely 4th order, so degree four leaves
  // a visible defect
  CHECK(std::abs(z(0) - 32.0 / 5.0) > 1e-9);
  CHECK(std::abs(z(0) - 32.0 / 5.0) < 1e-3);
}

TEST_CASE("fixed-step convergence on a linear system is fourth order") {
  Rng rng(0xabcd01u);
  Eigen::MatrixXd a(2, 2);
  a << -2.0, 1.0, 0.5, -3.0;
  Eigen::VectorXd y0(2);
  y0 << 1.0, -0.5;
  Eigen::VectorXd exact = expm(a * 1.0) * y0;

  auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
    dydt = a * y;
  };

  std::vector<double> errors;
  for (double dt : {0.1, 0.05, 0.025}) {
    Eigen::VectorXd y = integrate_rkf45(rhs, 0.0, 1.0, y0, fixed_step(dt));
    errors.push_back((y - exact).norm());
  }
  const double order1 = std::log2(errors[0] / errors[1]);
  const double order2 = std::log2(errors[1] / errors[2]);
  CHECK(order1 > 3.5);
  CHECK(order1 < 4.5);
  CHECK(order2 > 3.5);
  CHECK(order2 < 4.5);
}

TEST_CASE("adaptive run tracks an oscillatory solution and counts work") {
  auto rhs = [](double t, const Eigen::VectorXd&, Eigen::VectorXd& dydt) {
    dydt(0) = std::cos(t);
  };
  IntegratorOptions options;
  options.rtol = 1e-10;
  options.atol = 1e-12;
  options.dt_max = 0.5;
  IntegratorStats stats;
  Eigen::VectorXd y = integrate_rkf45(rhs, 0.0, 10.0, Eigen::VectorXd::Zero(1),
                                      options, &stats);
  CHECK(y(0) == doctest::Approx(std::sin(10.0)).epsilon(1e-8));
  CHECK(stats.accepted > 0);
  CHECK(stats.rhs_evaluations ==
        1 + 6 * stats.accepted + 5 * stats.rejected);
}

TEST_CASE("tightening the tolerance tightens the endpoint") {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, -4.0, -0.1;
  Eigen::VectorXd y0(2);
  y0 << 1.0, 0.0;
  Eigen::VectorXd exact = expm(a * 5.0) * y0;
  auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
    dydt = a * y;
  };

  double previous = 1e9;
  for (double rtol : {1e-4, 1e-7, 1e-10}) {
    IntegratorOptions options;
    options.rtol = rtol;
    options.atol = rtol * 1e-2;
    options.dt_max = 1.0;
    Eigen::VectorXd y = integrate_rkf45(rhs, 0.0, 5.0, y0, options);
    const double error = (y - exact).norm();
    CHECK(error < previous);
    previous = error;
  }
  CHECK(previous < 1e-7);
}

TEST_CASE("dense output sink covers the span and reproduces cubics") {
  auto rhs = [](double t, const Eigen::VectorXd&, Eigen::VectorXd& dydt) {
    dydt(0) = 3.0 * t * t;
  };
  std::vector<double> lefts, rights;
  Eigen::VectorXd mid_value(1);
  IntegratorOptions options;
  options.dt_max = 0.3;
  integrate_rkf45(
      rhs, 0.0, 1.5, Eigen::VectorXd::Zero(1), options,
      nullptr,
      [&](double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0,
          double t1, const Eigen::VectorXd& y1, const Eigen::VectorXd& f1) {
        lefts.push_back(t0);
        rights.push_back(t1);
        const double tm = 0.5 * (t0 + t1);
        Eigen::VectorXd ym = hermite_interpolate(t0, y0, f0, t1, y1, f1, tm);
        // y = t^3 is cubic: the Hermite reconstruction is exact up to the
        // accumulated step error
        CHECK(ym(0) == doctest::Approx(tm * tm * tm).epsilon(1e-9));
      });
  REQUIRE(!lefts.empty());
  CHECK(lefts.front() == 0.0);
  CHECK(rights.back() == 1.5);
  for (std::size_t i = 1; i < lefts.size(); ++i) {
    CHECK(lefts[i] == rights[i - 1]);
  }
}

TEST_CASE("hermite endpoints are reproduced exactly") {
  Eigen::VectorXd y0(1), y1(1), f0(1), f1(1);
  y0 << 2.0;
  y1 << -1.0;
  f0 << 0.5;
  f1 << 3.0;
  CHECK(hermite_interpolate(1.0, y0, f0, 3.0, y1, f1, 1.0)(0) ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK(hermite_interpolate(1.0, y0, f0, 3.0, y1, f1, 3.0)(0) ==
        doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("blow-up triggers the minimum-step error") {
  auto rhs = [](double t, const Eigen::VectorXd&, Eigen::VectorXd& dydt) {
    dydt(0) = 1.0 / (1.0 - t);
  };
  IntegratorOptions options;
  options.dt_max = 0.1;
  CHECK_THROWS_AS(
      integrate_rkf45(rhs, 0.0, 2.0, Eigen::VectorXd::Zero(1), options),
      NumericalError);
}

TEST_CASE("a trial stage leaving the model domain only rejects the step") {
  // y' = -50 y with a guard: a large first step drives trial stages
  // negative, which must shrink the step rather than abort
  auto rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
    if (y(0) < 0.0) {
      throw NumericalError("state left the domain");
    }
    dydt(0) = -50.0 * y(0);
  };
  IntegratorOptions options;
  options.dt_init = 1.0;
  options.dt_max = 1.0;
  options.rtol = 1e-8;
  options.atol = 1e-12;
  IntegratorStats stats;
  Eigen::VectorXd y0 = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd y = integrate_rkf45(rhs, 0.0, 0.2, y0, options, &stats);
  CHECK(y(0) == doctest::Approx(std::exp(-10.0)).epsilon(1e-5));
  CHECK(stats.rejected >= 1);
}

TEST_CASE("degenerate spans return the initial state") {
  auto rhs = [](double, const Eigen::VectorXd&, Eigen::VectorXd& dydt) {
    dydt(0) = 1.0;
  };
  Eigen::VectorXd y0 = Eigen::VectorXd::Constant(1, 7.0);
  IntegratorOptions options;
  CHECK(integrate_rkf45(rhs, 2.0, 2.0, y0, options)(0) == 7.0);
  CHECK_THROWS_AS(integrate_rkf45(rhs, 2.0, 1.0, y0, options),
                  ValidationError);
}

}  // TEST_SUITE
