#include <doctest.h>

#include "mtdc/errors.hpp"
#include "mtdc/plant.hpp"
#include "support.hpp"

using namespace mtdc;
using namespace testsupport;

TEST_SUITE("plant") {

TEST_CASE("parameter validation names the field and node") {
  SystemParams p = reference_params();

  SUBCASE("non-positive inertia") {
    p.inertia(1) = 0.0;
    std::string message = thrown_message([&] { validate(p); });
    CHECK(contains(message, "inertia"));
    CHECK(contains(message, "node 2"));
  }
  SUBCASE("negative gain") {
    p.voltage_gain(2) = -1.0;
    std::string message = thrown_message([&] { validate(p); });
    CHECK(contains(message, "k_v"));
    CHECK(contains(message, "node 3"));
  }
  SUBCASE("size mismatch") {
    p.capacitance.conservativeResize(2);
    CHECK(contains(thrown_message([&] { validate(p); }), "capacitance"));
  }
  SUBCASE("bad nominal voltage") {
    p.v_nom = 0.0;
    CHECK(contains(thrown_message([&] { validate(p); }), "v_nom"));
  }
  SUBCASE("valid params pass") { CHECK_NOTHROW(validate(p)); }
}

TEST_CASE("nominal balance and gain uniformity helpers") {
  SystemParams p = reference_params();
  CHECK(balanced_nominals(p));
  CHECK(uniform_gains(p));

  p.p_nom(0) = 0.2;
  CHECK_FALSE(balanced_nominals(p));
  CHECK(unbalanced_nodes(p) == std::vector<int>{1});

  p.p_inj_nom(0) = 0.2;
  CHECK(balanced_nominals(p));

  p.droop_gain(2) = 600.0;
  CHECK_FALSE(uniform_gains(p));
  CHECK(nonuniform_gain_nodes(p) == std::vector<int>{3});
}

TEST_CASE("state packing and incremental coordinates round-trip") {
  SystemParams p = reference_params();
  p.omega_ref = 1.0;
  p.v_ref << 1.01, 0.99, 1.0;

  SystemState state;
  state.omega = Eigen::Vector3d(1.001, 0.999, 1.0);
  state.voltage = Eigen::Vector3d(1.02, 0.98, 1.01);

  Eigen::VectorXd x = pack(state);
  REQUIRE(x.size() == 6);
  CHECK(x(0) == 1.001);
  CHECK(x(4) == 0.98);
  SystemState back = unpack(x);
  CHECK(back.omega == state.omega);
  CHECK(back.voltage == state.voltage);

  Eigen::VectorXd x_hat = to_incremental(state, p);
  CHECK(x_hat(0) == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(x_hat(3) == doctest::Approx(0.01).epsilon(1e-9));
  SystemState restored = from_incremental(x_hat, p);
  CHECK((restored.omega - state.omega).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((restored.voltage - state.voltage).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("piecewise-constant disturbance schedule") {
  Disturbance dist;
  dist.initial_pm = Eigen::Vector2d(0.1, 0.0);
  dist.steps.push_back({1.0, Eigen::Vector2d(-0.1, 0.0)});
  dist.steps.push_back({2.5, Eigen::Vector2d(0.0, 0.2)});

  CHECK(dist.pm_at(0.0, 2) == Eigen::Vector2d(0.1, 0.0));
  CHECK(dist.pm_at(0.999, 2) == Eigen::Vector2d(0.1, 0.0));
  CHECK(dist.pm_at(1.0, 2) == Eigen::Vector2d(-0.1, 0.0));
  CHECK(dist.pm_at(2.5, 2) == Eigen::Vector2d(0.0, 0.2));
  CHECK(dist.final_pm(2) == Eigen::Vector2d(0.0, 0.2));

  Disturbance empty;
  CHECK(empty.pm_at(3.0, 2) == Eigen::Vector2d::Zero());
  CHECK(empty.final_pm(2) == Eigen::Vector2d::Zero());

  SUBCASE("validation enforces ordering and sizes") {
    CHECK_NOTHROW(validate(dist, 2, 10.0));
    Disturbance bad = dist;
    bad.steps[1].time = 0.5;
    CHECK(contains(thrown_message([&] { validate(bad, 2, 10.0); }),
                   "increasing"));
    Disturbance wrong = dist;
    wrong.steps[0].pm = Eigen::Vector3d::Zero();
    CHECK_THROWS_AS(validate(wrong, 2, 10.0), ValidationError);
    Disturbance late = dist;
    late.steps[1].time = 20.0;
    CHECK_THROWS_AS(validate(late, 2, 10.0), ValidationError);
  }
}

TEST_CASE("closed-loop matrix blocks for the reference system") {
  SystemParams p = reference_params();
  LaplacianBundle lap = build_laplacian(reference_topology());
  ClosedLoopMatrices cl = assemble_closed_loop(p, lap);

  REQUIRE(cl.a.rows() == 6);
  // top-left: -(k_omega + k_droop)/m, diagonal
  CHECK(cl.a(0, 0) == doctest::Approx(-116.8).epsilon(1e-12));
  CHECK(cl.a(0, 1) == 0.0);
  // top-right: k_v/m
  CHECK(cl.a(0, 3) == doctest::Approx(1.0).epsilon(1e-12));
  // bottom-left: k_omega/(C v_nom)
  CHECK(cl.a(3, 0) == doctest::Approx(5010.0).epsilon(1e-12));
  // bottom-right: -(L + K^V/v_nom)/C
  CHECK(cl.a(3, 3) == doctest::Approx(-(8000.0 / 9.0 + 10.0) / 0.1)
                          .epsilon(1e-12));
  CHECK(cl.a(3, 4) == doctest::Approx((1.0 / 0.0015) / 0.1).epsilon(1e-12));

  CHECK(cl.b_const(0) == doctest::Approx((1168.0 - 10.0) / 10.0)
                             .epsilon(1e-12));
  CHECK(cl.b_const(3) == doctest::Approx((10.0 - 501.0) / 0.1)
                             .epsilon(1e-12));

  CHECK(cl.b_dist_map(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(cl.b_dist_map(3, 0) == 0.0);

  // the references are an equilibrium of the undisturbed loop
  SystemState refs;
  refs.omega = Eigen::VectorXd::Constant(3, p.omega_ref);
  refs.voltage = p.v_ref;
  Eigen::VectorXd rhs0 =
      full_rhs(cl, pack(refs), Eigen::VectorXd::Zero(3));
  CHECK(rhs0.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("incremental and absolute linear dynamics agree") {
  Rng rng(0x51a7e2bbu);
  for (int draw = 0; draw < 20; ++draw) {
    const int n = uniform_int(rng, 1, 8);
    GridTopology topo = random_connected_topology(rng, n);
    LaplacianBundle lap = build_laplacian(topo);
    SystemParams p = random_params(rng, n);
    if (draw % 2 == 0) apply_nonuniform_refs(rng, p, lap);
    ClosedLoopMatrices cl = assemble_closed_loop(p, lap);

    Eigen::VectorXd x_hat = uniform_vector(rng, 2 * n, -0.05, 0.05);
    Eigen::VectorXd pm = random_pm(rng, n, 0.2);

    SystemState refs;
    refs.omega = Eigen::VectorXd::Constant(n, p.omega_ref);
    refs.voltage = p.v_ref;
    Eigen::VectorXd x_abs = pack(refs) + x_hat;

    Eigen::VectorXd lhs = full_rhs(cl, x_abs, pm);
    Eigen::VectorXd rhs = linear_rhs(cl, x_hat, pm);
    const double scale =
        std::max(1.0, rhs.cwiseAbs().maxCoeff());
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9 * scale);
  }
}

TEST_CASE("nonlinear dynamics reduce to the linear model quadratically") {
  Rng rng(0xc0ffee11u);
  GridTopology topo = random_connected_topology(rng, 4);
  LaplacianBundle lap = build_laplacian(topo);
  SystemParams p = random_params(rng, 4);
  ClosedLoopMatrices cl = assemble_closed_loop(p, lap);

  Eigen::VectorXd direction = uniform_vector(rng, 8, -1.0, 1.0);
  Eigen::VectorXd pm = random_pm(rng, 4, 0.1);
  SystemState refs;
  refs.omega = Eigen::VectorXd::Constant(4, p.omega_ref);
  refs.voltage = p.v_ref;

  auto gap = [&](double eps) {
    Eigen::VectorXd x_abs = pack(refs) + eps * direction;
    SystemState state = unpack(x_abs);
    Eigen::VectorXd nl = nonlinear_rhs(p, lap, state, pm);
    Eigen::VectorXd lin = full_rhs(cl, x_abs, pm);
    return (nl - lin).cwiseAbs().maxCoeff();
  };

  // uniform references sit on both models exactly
  CHECK(gap(0.0) < 1e-9);
  const double g1 = gap(1e-2);
  const double g2 = gap(1e-3);
  // shrinking the deviation 10x should shrink the gap ~100x
  CHECK(g2 < g1 / 30.0);
  CHECK(g1 < 1.0);

  SUBCASE("nonuniform references leave only a second-order model gap") {
    // the dispatch keeps the exact model at equilibrium up to the
    // linearization error of the current relation, quadratic in the
    // reference spread
    auto ref_gap = [&](double spread) {
      SystemParams q = p;
      Rng local(0x1234u);
      q.v_ref = q.v_nom * Eigen::VectorXd::Ones(4) +
                uniform_vector(local, 4, -spread, spread);
      q.p_inj_nom = q.v_nom * (lap.laplacian * q.v_ref);
      q.p_nom = q.p_inj_nom;
      ClosedLoopMatrices qcl = assemble_closed_loop(q, lap);
      SystemState at;
      at.omega = Eigen::VectorXd::Constant(4, q.omega_ref);
      at.voltage = q.v_ref;
      Eigen::VectorXd nl =
          nonlinear_rhs(q, lap, at, Eigen::VectorXd::Zero(4));
      Eigen::VectorXd lin =
          full_rhs(qcl, pack(at), Eigen::VectorXd::Zero(4));
      return (nl - lin).cwiseAbs().maxCoeff();
    };
    const double wide = ref_gap(0.02);
    const double narrow = ref_gap(0.002);
    CHECK(narrow < wide / 30.0);
  }

  SUBCASE("non-positive voltage is rejected with the node") {
    SystemState state = refs;
    state.voltage(2) = -0.1;
    std::string message =
        thrown_message([&] { nonlinear_rhs(p, lap, state, pm); });
    CHECK(contains(message, "node 3"));
  }
}

TEST_CASE("droop and injected power formulas") {
  SystemParams p = reference_params();
  Eigen::VectorXd omega(3);
  omega << 1.001, 0.999, 1.0;
  Eigen::VectorXd droop = droop_power(p, omega);
  CHECK(droop(0) == doctest::Approx(-0.667).epsilon(1e-12));
  CHECK(droop(1) == doctest::Approx(0.667).epsilon(1e-12));
  CHECK(droop(2) == 0.0);

  SystemState state;
  state.omega = omega;
  state.voltage = Eigen::Vector3d(1.0, 1.002, 0.997);
  Eigen::VectorXd inj = injected_power(p, state);
  CHECK(inj(0) == doctest::Approx(501.0 * 0.001).epsilon(1e-9));
  CHECK(inj(1) ==
        doctest::Approx(501.0 * -0.001 + 10.0 * -0.002).epsilon(1e-9));
  CHECK(inj(2) == doctest::Approx(10.0 * 0.003).epsilon(1e-9));
}

TEST_CASE("energy function value and positivity") {
  SystemParams p = reference_params();
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(6);
  e1(0) = 1.0;
  // 1/2 * k_omega * m / k_v for a unit frequency deviation at node 1
  CHECK(lyapunov_value(p, e1) ==
        doctest::Approx(0.5 * 501.0 * 10.0 / 10.0).epsilon(1e-12));

  Eigen::VectorXd e4 = Eigen::VectorXd::Zero(6);
  e4(3) = 2.0;
  // v_nom/2 * C * v_bar^2
  CHECK(lyapunov_value(p, e4) ==
        doctest::Approx(0.5 * 0.1 * 4.0).epsilon(1e-12));

  CHECK(lyapunov_value(p, Eigen::VectorXd::Zero(6)) == 0.0);

  Rng rng(0x7e11u);
  for (int draw = 0; draw < 20; ++draw) {
    Eigen::VectorXd x = uniform_vector(rng, 6, -1.0, 1.0);
    if (x.cwiseAbs().maxCoeff() > 1e-12) {
      CHECK(lyapunov_value(p, x) > 0.0);
    }
  }
}

}  // TEST_SUITE
