#include "mtdc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/LU>

#include "mtdc/errors.hpp"

namespace mtdc {

namespace {

std::string join_nodes(const std::vector<int>& nodes) {
  std::string s;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(nodes[i]);
  }
  return s;
}

Eigen::VectorXd solve_affine_equilibrium(const ClosedLoopMatrices& matrices,
                                         const Eigen::VectorXd& pm) {
  const Eigen::VectorXd rhs =
      -(matrices.b_const + matrices.b_dist_map * pm);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(matrices.a);
  const Eigen::VectorXd y = lu.solve(rhs);
  const double residual = (matrices.a * y - rhs).lpNorm<Eigen::Infinity>();
  const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
  if (!(residual <= 1e-6 * scale)) {
    throw NumericalError(
        "steady state: closed-loop matrix is numerically singular "
        "(solve residual " +
        std::to_string(residual) + ")");
  }
  return y;  // absolute coordinates
}

Eigen::VectorXd reference_state(const SystemParams& params) {
  const int n = params.n();
  Eigen::VectorXd x_ref(2 * n);
  x_ref.head(n) = Eigen::VectorXd::Constant(n, params.omega_ref);
  x_ref.tail(n) = params.v_ref;
  return x_ref;
}

// Newton iteration for the nonlinear steady state, solving
// F(V) = -L V + P^inj(V)/V = 0 with the frequency eliminated.
Eigen::VectorXd nonlinear_equilibrium_voltage(const SystemParams& params,
                                              const LaplacianBundle& lap,
                                              const Eigen::VectorXd& pm,
                                              Eigen::VectorXd v) {
  const int n = params.n();
  const Eigen::VectorXd gain_sum = params.droop_gain + params.omega_gain;
  // d P^inj / d V, diagonal and constant.
  const Eigen::VectorXd dpinj =
      params.omega_gain.cwiseProduct(params.voltage_gain)
          .cwiseQuotient(gain_sum) -
      params.voltage_gain;

  for (int iter = 0; iter < 60; ++iter) {
    for (int i = 0; i < n; ++i) {
      if (!(v(i) > 0.0)) {
        throw NumericalError(
            "steady state: no positive-voltage operating point (node " +
            std::to_string(i + 1) + " reached V = " + std::to_string(v(i)) +
            " p.u. during Newton iteration)");
      }
    }
    const Eigen::VectorXd omega_dev =
        (params.p_nom - params.p_inj_nom + pm +
         params.voltage_gain.cwiseProduct(v - params.v_ref))
            .cwiseQuotient(gain_sum);
    const Eigen::VectorXd p_inj =
        params.p_inj_nom + params.omega_gain.cwiseProduct(omega_dev) -
        params.voltage_gain.cwiseProduct(v - params.v_ref);
    const Eigen::VectorXd f = -lap.laplacian * v + p_inj.cwiseQuotient(v);
    const double scale =
        std::max(1.0, (lap.laplacian * v).lpNorm<Eigen::Infinity>());
    if (f.lpNorm<Eigen::Infinity>() <= 1e-12 * scale) {
      return v;
    }
    Eigen::MatrixXd jac = -lap.laplacian;
    jac.diagonal() +=
        (dpinj.cwiseProduct(v) - p_inj).cwiseQuotient(v.cwiseProduct(v));
    const Eigen::VectorXd dv = Eigen::PartialPivLU<Eigen::MatrixXd>(jac)
                                   .solve(-f);
    v += dv;
  }
  throw NumericalError(
      "steady state: Newton iteration for the nonlinear model did not "
      "converge");
}

struct Sampler {
  double grid = 0.0;
  double merge_eps = 0.0;
  long next_grid = 1;  // t = 0 is emitted by the caller
  std::vector<double>* times = nullptr;
  std::vector<Eigen::VectorXd>* samples = nullptr;

  void emit(double t, const Eigen::VectorXd& y) {
    times->push_back(t);
    samples->push_back(y);
  }

  void on_step(double t0, const Eigen::VectorXd& y0,
               const Eigen::VectorXd& f0, double t1,
               const Eigen::VectorXd& y1, const Eigen::VectorXd& f1) {
    while (true) {
      const double tg = static_cast<double>(next_grid) * grid;
      if (tg >= t1 - merge_eps) break;
      if (tg > t0 + merge_eps) {
        emit(tg, hermite_interpolate(t0, y0, f0, t1, y1, f1, tg));
      }
      ++next_grid;
    }
    emit(t1, y1);
    // Skip grid points the accepted step already covers.
    while (static_cast<double>(next_grid) * grid <= t1 + merge_eps) {
      ++next_grid;
    }
  }
};

}  // namespace

void validate(const Scenario& scenario) {
  validate(scenario.topology);
  validate(scenario.params);
  const int n = scenario.params.n();
  if (scenario.topology.node_count != n) {
    throw ValidationError("scenario: topology has " +
                          std::to_string(scenario.topology.node_count) +
                          " nodes but params describe " + std::to_string(n));
  }
  if (!(scenario.t_end > 0.0) || !std::isfinite(scenario.t_end)) {
    throw ValidationError("scenario: t_end_s must be positive");
  }
  if (!(scenario.dt_max > 0.0) || !std::isfinite(scenario.dt_max)) {
    throw ValidationError("scenario: dt_max_s must be positive");
  }
  if (!(scenario.output_grid > 0.0) || !std::isfinite(scenario.output_grid)) {
    throw ValidationError("scenario: output_grid_s must be positive");
  }
  if (!(scenario.rtol > 0.0) || !(scenario.atol > 0.0)) {
    throw ValidationError("scenario: tolerances must be positive");
  }
  validate(scenario.disturbance, n, scenario.t_end);
  if (scenario.initial_state) {
    if (scenario.initial_state->omega.size() != n ||
        scenario.initial_state->voltage.size() != n) {
      throw ValidationError("scenario: initial state size mismatch");
    }
    if (scenario.model == ModelKind::nonlinear) {
      for (int i = 0; i < n; ++i) {
        if (!(scenario.initial_state->voltage(i) > 0.0)) {
          throw ValidationError(
              "scenario: nonlinear model needs a positive initial voltage "
              "at node " +
              std::to_string(i + 1));
        }
      }
    }
  } else if (!balanced_nominals(scenario.params)) {
    throw ValidationError(
        "scenario: steady-state start requires P^nom = P^inj,nom; "
        "unbalanced at node(s) " +
        join_nodes(unbalanced_nodes(scenario.params)));
  }
}

Eigen::VectorXd steady_state_incremental(const SystemParams& params,
                                         const LaplacianBundle& laplacian,
                                         const ClosedLoopMatrices& matrices,
                                         const Eigen::VectorXd& pm,
                                         ModelKind model) {
  const Eigen::VectorXd x_ref = reference_state(params);
  const Eigen::VectorXd linear = solve_affine_equilibrium(matrices, pm);
  if (model == ModelKind::linear) {
    return linear - x_ref;
  }
  const int n = params.n();
  Eigen::VectorXd v0 = linear.tail(n);
  // Fall back to the references when the linear guess is unphysical.
  for (int i = 0; i < n; ++i) {
    if (!(v0(i) > 0.0)) v0(i) = params.v_ref(i);
  }
  const Eigen::VectorXd v =
      nonlinear_equilibrium_voltage(params, laplacian, pm, v0);
  const Eigen::VectorXd omega_dev =
      (params.p_nom - params.p_inj_nom + pm +
       params.voltage_gain.cwiseProduct(v - params.v_ref))
          .cwiseQuotient(params.droop_gain + params.omega_gain);
  Eigen::VectorXd x_hat(2 * n);
  x_hat.head(n) = omega_dev;
  x_hat.tail(n) = v - params.v_ref;
  return x_hat;
}

Trajectory simulate(const Scenario& scenario) {
  validate(scenario);
  const int n = scenario.params.n();
  const LaplacianBundle lap = build_laplacian(scenario.topology);
  const ClosedLoopMatrices cl =
      assemble_closed_loop(scenario.params, lap);
  const Eigen::VectorXd x_ref = reference_state(scenario.params);

  Eigen::VectorXd y0(2 * n);
  if (scenario.initial_state) {
    y0 = pack(*scenario.initial_state);
  } else {
    const Eigen::VectorXd pm0 =
        scenario.disturbance.initial_pm.size() > 0
            ? scenario.disturbance.initial_pm
            : Eigen::VectorXd::Zero(n);
    y0 = x_ref + steady_state_incremental(scenario.params, lap, cl, pm0,
                                          scenario.model);
  }

  // Segment boundaries: 0, interior step times, t_end.
  std::vector<double> bounds{0.0};
  for (const Disturbance::Step& step : scenario.disturbance.steps) {
    if (step.time > 0.0 && step.time < scenario.t_end) {
      bounds.push_back(step.time);
    }
  }
  bounds.push_back(scenario.t_end);

  Trajectory traj;
  std::vector<Eigen::VectorXd> raw;
  Sampler sampler;
  sampler.grid = scenario.output_grid;
  sampler.merge_eps = 1e-6 * scenario.output_grid;
  sampler.times = &traj.times;
  sampler.samples = &raw;
  sampler.emit(0.0, y0);

  IntegratorOptions opts;
  opts.rtol = scenario.rtol;
  opts.atol = scenario.atol;
  opts.dt_max = scenario.dt_max;

  Eigen::VectorXd y = y0;
  for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
    const double t0 = bounds[seg];
    const double t1 = bounds[seg + 1];
    const Eigen::VectorXd pm = scenario.disturbance.pm_at(t0, n);
    OdeRhs rhs;
    if (scenario.model == ModelKind::linear) {
      const Eigen::VectorXd c = cl.b_const + cl.b_dist_map * pm;
      rhs = [&cl, c](double, const Eigen::VectorXd& ys,
                     Eigen::VectorXd& out) {
        out.noalias() = cl.a * ys;
        out += c;
      };
    } else {
      rhs = [&scenario, &lap, pm, n](double, const Eigen::VectorXd& ys,
                                     Eigen::VectorXd& out) {
        const SystemState s{ys.head(n), ys.tail(n)};
        out = nonlinear_rhs(scenario.params, lap, s, pm);
      };
    }
    y = integrate_rkf45(
        rhs, t0, t1, y, opts, &traj.stats,
        [&sampler](double ta, const Eigen::VectorXd& ya,
                   const Eigen::VectorXd& fa, double tb,
                   const Eigen::VectorXd& yb, const Eigen::VectorXd& fb) {
          sampler.on_step(ta, ya, fa, tb, yb, fb);
        });
  }
  if (traj.times.back() <
      scenario.t_end - 1e-14 * std::max(1.0, scenario.t_end)) {
    sampler.emit(scenario.t_end, y);
  }

  traj.final_equilibrium_incremental = steady_state_incremental(
      scenario.params, lap, cl,
      scenario.disturbance.final_pm(n), scenario.model);

  const std::size_t count = raw.size();
  traj.states.reserve(count);
  traj.pdroop.reserve(count);
  traj.pinj.reserve(count);
  traj.lyapunov_w.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    SystemState state{raw[k].head(n), raw[k].tail(n)};
    traj.pdroop.push_back(droop_power(scenario.params, state.omega));
    traj.pinj.push_back(injected_power(scenario.params, state));
    const Eigen::VectorXd x_bar =
        (raw[k] - x_ref) - traj.final_equilibrium_incremental;
    traj.lyapunov_w.push_back(lyapunov_value(scenario.params, x_bar));
    traj.states.push_back(std::move(state));
  }
  return traj;
}

std::vector<std::pair<double, double>> lyapunov_along(
    const Trajectory& trajectory, const SystemParams& params,
    const Eigen::VectorXd& equilibrium_incremental) {
  std::vector<std::pair<double, double>> series;
  series.reserve(trajectory.times.size());
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    const Eigen::VectorXd x_bar =
        to_incremental(trajectory.states[k], params) -
        equilibrium_incremental;
    series.emplace_back(trajectory.times[k],
                        lyapunov_value(params, x_bar));
  }
  return series;
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
  if (trajectory.states.empty()) {
    throw ValidationError("trajectory: nothing to write");
  }
  const int n = static_cast<int>(trajectory.states[0].omega.size());
  out << "time";
  for (int i = 1; i <= n; ++i) out << ",omega_" << i;
  for (int i = 1; i <= n; ++i) out << ",v_" << i;
  for (int i = 1; i <= n; ++i) out << ",pdroop_" << i;
  for (int i = 1; i <= n; ++i) out << ",pinj_" << i;
  out << ",W\n";

  char buf[32];
  auto put = [&](double value) {
    std::snprintf(buf, sizeof buf, "%.9g", value);
    out << buf;
  };
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    put(trajectory.times[k]);
    const SystemState& s = trajectory.states[k];
    for (int i = 0; i < n; ++i) { out << ','; put(s.omega(i)); }
    for (int i = 0; i < n; ++i) { out << ','; put(s.voltage(i)); }
    for (int i = 0; i < n; ++i) { out << ','; put(trajectory.pdroop[k](i)); }
    for (int i = 0; i < n; ++i) { out << ','; put(trajectory.pinj[k](i)); }
    out << ',';
    put(trajectory.lyapunov_w[k]);
    out << '\n';
  }
}

TrajectoryTable read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("trajectory csv: empty input");
  }
  int columns = 1;
  for (char c : line) {
    if (c == ',') ++columns;
  }
  if (columns < 6 || (columns - 2) % 4 != 0 ||
      line.rfind("time,omega_1", 0) != 0) {
    throw ValidationError("trajectory csv: unrecognized header: " + line);
  }
  TrajectoryTable table;
  table.n = (columns - 2) / 4;

  std::vector<std::vector<double>> cols(columns);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= columns) {
        ++c;
        break;
      }
      try {
        cols[c].push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError("trajectory csv: bad number '" + cell +
                              "' in row " + std::to_string(rows + 2));
      }
      ++c;
    }
    if (c != columns) {
      throw ValidationError("trajectory csv: row " +
                            std::to_string(rows + 2) + " has " +
                            std::to_string(c) + " columns, expected " +
                            std::to_string(columns));
    }
    ++rows;
  }

  const int n = table.n;
  table.times = std::move(cols[0]);
  table.omega.resize(rows, n);
  table.v.resize(rows, n);
  table.pdroop.resize(rows, n);
  table.pinj.resize(rows, n);
  table.w.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (int i = 0; i < n; ++i) {
      table.omega(r, i) = cols[1 + i][r];
      table.v(r, i) = cols[1 + n + i][r];
      table.pdroop(r, i) = cols[1 + 2 * n + i][r];
      table.pinj(r, i) = cols[1 + 3 * n + i][r];
    }
    table.w[r] = cols[1 + 4 * n][r];
  }
  return table;
}

}  // namespace mtdc
