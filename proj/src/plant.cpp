#include "mtdc/plant.hpp"

#include <cmath>
#include <string>

#include "mtdc/errors.hpp"

namespace mtdc {

namespace {

void require_size(const Eigen::VectorXd& v, int n, const char* name) {
  if (static_cast<int>(v.size()) != n) {
    throw ValidationError("params: " + std::string(name) + " has " +
                          std::to_string(v.size()) + " entries, expected " +
                          std::to_string(n));
  }
}

void require_positive(const Eigen::VectorXd& v, const char* name) {
  for (int i = 0; i < v.size(); ++i) {
    if (!(v(i) > 0.0) || !std::isfinite(v(i))) {
      throw ValidationError("params: " + std::string(name) + " at node " +
                            std::to_string(i + 1) + " must be positive, got " +
                            std::to_string(v(i)));
    }
  }
}

void require_finite(const Eigen::VectorXd& v, const char* name) {
  for (int i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i))) {
      throw ValidationError("params: " + std::string(name) + " at node " +
                            std::to_string(i + 1) + " is not finite");
    }
  }
}

bool close(double a, double b, double rtol) {
  return std::abs(a - b) <= rtol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

void validate(const SystemParams& params) {
  const int n = params.n();
  if (n < 1) {
    throw ValidationError("params: need at least 1 node");
  }
  require_size(params.capacitance, n, "capacitance");
  require_size(params.droop_gain, n, "k_droop");
  require_size(params.omega_gain, n, "k_omega");
  require_size(params.voltage_gain, n, "k_v");
  require_size(params.v_ref, n, "v_ref");
  require_size(params.p_nom, n, "p_nom");
  require_size(params.p_inj_nom, n, "p_inj_nom");
  require_positive(params.inertia, "inertia");
  require_positive(params.capacitance, "capacitance");
  require_positive(params.droop_gain, "k_droop");
  require_positive(params.omega_gain, "k_omega");
  require_positive(params.voltage_gain, "k_v");
  require_finite(params.v_ref, "v_ref");
  require_finite(params.p_nom, "p_nom");
  require_finite(params.p_inj_nom, "p_inj_nom");
  if (!(params.v_nom > 0.0) || !std::isfinite(params.v_nom)) {
    throw ValidationError("params: v_nom must be positive, got " +
                          std::to_string(params.v_nom));
  }
  if (!std::isfinite(params.omega_ref)) {
    throw ValidationError("params: omega_ref is not finite");
  }
}

std::vector<int> unbalanced_nodes(const SystemParams& params, double rtol) {
  std::vector<int> nodes;
  for (int i = 0; i < params.n(); ++i) {
    if (!close(params.p_nom(i), params.p_inj_nom(i), rtol)) {
      nodes.push_back(i + 1);
    }
  }
  return nodes;
}

bool balanced_nominals(const SystemParams& params, double rtol) {
  return unbalanced_nodes(params, rtol).empty();
}

std::vector<int> nonuniform_gain_nodes(const SystemParams& params,
                                       double rtol) {
  std::vector<int> nodes;
  for (int i = 1; i < params.n(); ++i) {
    if (!close(params.omega_gain(i), params.omega_gain(0), rtol) ||
        !close(params.droop_gain(i), params.droop_gain(0), rtol) ||
        !close(params.voltage_gain(i), params.voltage_gain(0), rtol)) {
      nodes.push_back(i + 1);
    }
  }
  return nodes;
}

bool uniform_gains(const SystemParams& params, double rtol) {
  return nonuniform_gain_nodes(params, rtol).empty();
}

Eigen::VectorXd Disturbance::pm_at(double t, int n) const {
  Eigen::VectorXd pm =
      initial_pm.size() > 0 ? initial_pm : Eigen::VectorXd::Zero(n);
  for (const Step& step : steps) {
    if (step.time <= t) {
      pm = step.pm;
    } else {
      break;
    }
  }
  return pm;
}

Eigen::VectorXd Disturbance::final_pm(int n) const {
  if (!steps.empty()) {
    return steps.back().pm;
  }
  return initial_pm.size() > 0 ? initial_pm : Eigen::VectorXd::Zero(n);
}

void validate(const Disturbance& disturbance, int n, double t_end) {
  if (disturbance.initial_pm.size() > 0) {
    if (static_cast<int>(disturbance.initial_pm.size()) != n) {
      throw ValidationError("disturbance: initial P^m has " +
                            std::to_string(disturbance.initial_pm.size()) +
                            " entries, expected " + std::to_string(n));
    }
    require_finite(disturbance.initial_pm, "initial P^m");
  }
  double prev = -1.0;
  for (std::size_t k = 0; k < disturbance.steps.size(); ++k) {
    const Disturbance::Step& step = disturbance.steps[k];
    const std::string where = "disturbance: step " + std::to_string(k + 1);
    if (static_cast<int>(step.pm.size()) != n) {
      throw ValidationError(where + " has " + std::to_string(step.pm.size()) +
                            " entries, expected " + std::to_string(n));
    }
    require_finite(step.pm, "step P^m");
    if (!std::isfinite(step.time) || step.time < 0.0 || step.time > t_end) {
      throw ValidationError(where + " time " + std::to_string(step.time) +
                            " outside [0, " + std::to_string(t_end) + "]");
    }
    if (step.time <= prev) {
      throw ValidationError(where + " time " + std::to_string(step.time) +
                            " not strictly increasing");
    }
    prev = step.time;
  }
}

Eigen::VectorXd pack(const SystemState& state) {
  Eigen::VectorXd x(state.omega.size() + state.voltage.size());
  x << state.omega, state.voltage;
  return x;
}

SystemState unpack(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size()) / 2;
  return SystemState{x.head(n), x.tail(n)};
}

Eigen::VectorXd to_incremental(const SystemState& state,
                               const SystemParams& params) {
  const int n = params.n();
  Eigen::VectorXd x_hat(2 * n);
  x_hat.head(n) =
      state.omega - Eigen::VectorXd::Constant(n, params.omega_ref);
  x_hat.tail(n) = state.voltage - params.v_ref;
  return x_hat;
}

SystemState from_incremental(const Eigen::VectorXd& x_hat,
                             const SystemParams& params) {
  const int n = params.n();
  SystemState state;
  state.omega =
      x_hat.head(n) + Eigen::VectorXd::Constant(n, params.omega_ref);
  state.voltage = x_hat.tail(n) + params.v_ref;
  return state;
}

ClosedLoopMatrices assemble_closed_loop(const SystemParams& params,
                                        const LaplacianBundle& laplacian) {
  validate(params);
  const int n = params.n();
  if (laplacian.laplacian.rows() != n) {
    throw ValidationError("params: laplacian is " +
                          std::to_string(laplacian.laplacian.rows()) +
                          "x" + std::to_string(laplacian.laplacian.cols()) +
                          " but params describe " + std::to_string(n) +
                          " nodes");
  }

  const Eigen::VectorXd m_inv = params.inertia.cwiseInverse();
  const Eigen::VectorXd c_inv = params.capacitance.cwiseInverse();
  const double v_nom = params.v_nom;

  ClosedLoopMatrices cl;
  cl.a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  cl.a.topLeftCorner(n, n) =
      (-m_inv.cwiseProduct(params.omega_gain + params.droop_gain))
          .asDiagonal();
  cl.a.topRightCorner(n, n) =
      m_inv.cwiseProduct(params.voltage_gain).asDiagonal();
  cl.a.bottomLeftCorner(n, n) =
      (c_inv.cwiseProduct(params.omega_gain) / v_nom).asDiagonal();
  cl.a.bottomRightCorner(n, n) =
      (-c_inv).asDiagonal() *
      (laplacian.laplacian +
       Eigen::MatrixXd(params.voltage_gain.asDiagonal()) / v_nom);

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  cl.b_const = Eigen::VectorXd::Zero(2 * n);
  cl.b_const.head(n) = m_inv.cwiseProduct(
      (params.omega_gain + params.droop_gain) * params.omega_ref -
      params.voltage_gain.cwiseProduct(params.v_ref) + params.p_nom -
      params.p_inj_nom);
  cl.b_const.tail(n) = c_inv.cwiseProduct(
      (params.voltage_gain.cwiseProduct(params.v_ref) -
       params.omega_ref * params.omega_gain + params.p_inj_nom) /
      v_nom);

  cl.b_dist_map = Eigen::MatrixXd::Zero(2 * n, n);
  cl.b_dist_map.topRows(n) = Eigen::MatrixXd(m_inv.asDiagonal());
  return cl;
}

Eigen::VectorXd linear_rhs(const ClosedLoopMatrices& matrices,
                           const Eigen::VectorXd& state_incremental,
                           const Eigen::VectorXd& pm) {
  if (state_incremental.size() != matrices.a.rows() ||
      pm.size() != matrices.b_dist_map.cols()) {
    throw ValidationError("linear_rhs: dimension mismatch");
  }
  return matrices.a * state_incremental + matrices.b_dist_map * pm;
}

Eigen::VectorXd full_rhs(const ClosedLoopMatrices& matrices,
                         const Eigen::VectorXd& state_absolute,
                         const Eigen::VectorXd& pm) {
  if (state_absolute.size() != matrices.a.rows() ||
      pm.size() != matrices.b_dist_map.cols()) {
    throw ValidationError("full_rhs: dimension mismatch");
  }
  return matrices.a * state_absolute + matrices.b_const +
         matrices.b_dist_map * pm;
}

Eigen::VectorXd nonlinear_rhs(const SystemParams& params,
                              const LaplacianBundle& laplacian,
                              const SystemState& state,
                              const Eigen::VectorXd& pm) {
  const int n = params.n();
  if (state.omega.size() != n || state.voltage.size() != n ||
      pm.size() != n) {
    throw ValidationError("nonlinear_rhs: dimension mismatch");
  }
  for (int i = 0; i < n; ++i) {
    if (!(state.voltage(i) > 0.0)) {
      throw NumericalError("nonlinear model: voltage at node " +
                           std::to_string(i + 1) +
                           " is not positive (V = " +
                           std::to_string(state.voltage(i)) + " p.u.)");
    }
  }
  const Eigen::VectorXd p_inj = injected_power(params, state);
  const Eigen::VectorXd i_inj = p_inj.cwiseQuotient(state.voltage);

  Eigen::VectorXd dx(2 * n);
  dx.head(n) =
      (droop_power(params, state.omega) + params.p_nom + pm - p_inj)
          .cwiseQuotient(params.inertia);
  dx.tail(n) = (-laplacian.laplacian * state.voltage + i_inj)
                   .cwiseQuotient(params.capacitance);
  return dx;
}

Eigen::VectorXd droop_power(const SystemParams& params,
                            const Eigen::VectorXd& omega) {
  return -params.droop_gain.cwiseProduct(
      omega - Eigen::VectorXd::Constant(omega.size(), params.omega_ref));
}

Eigen::VectorXd injected_power(const SystemParams& params,
                               const SystemState& state) {
  const int n = params.n();
  return params.p_inj_nom +
         params.omega_gain.cwiseProduct(
             state.omega - Eigen::VectorXd::Constant(n, params.omega_ref)) +
         params.voltage_gain.cwiseProduct(params.v_ref - state.voltage);
}

double lyapunov_value(const SystemParams& params,
                      const Eigen::VectorXd& x_bar) {
  const int n = params.n();
  const Eigen::VectorXd omega_bar = x_bar.head(n);
  const Eigen::VectorXd v_bar = x_bar.tail(n);
  const Eigen::VectorXd omega_weight = params.omega_gain.cwiseProduct(
      params.inertia.cwiseQuotient(params.voltage_gain));
  return 0.5 * omega_bar.dot(omega_weight.cwiseProduct(omega_bar)) +
         0.5 * params.v_nom * v_bar.dot(
                   params.capacitance.cwiseProduct(v_bar));
}

}  // namespace mtdc
