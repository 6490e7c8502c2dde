#ifndef MTDC_SIM_HPP
#define MTDC_SIM_HPP

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "mtdc/grid.hpp"
#include "mtdc/plant.hpp"
#include "mtdc/rkf45.hpp"

namespace mtdc {

enum class ModelKind { linear, nonlinear };

/// Everything needed for one simulation run. An absent initial_state means
/// "start at the steady state of the pre-schedule disturbance".
struct Scenario {
  GridTopology topology;
  SystemParams params;
  std::optional<SystemState> initial_state;
  Disturbance disturbance;
  double t_end = 0.0;
  double dt_max = 0.0;
  ModelKind model = ModelKind::linear;
  double output_grid = 0.01;  // uniform sampling period, seconds
  double rtol = 1e-8;
  double atol = 1e-10;
  bool k_v_explicit = true;  // false when k_v came from the built-in default
};

/// Throws ValidationError when the scenario violates its contract
/// (non-positive horizon or steps, malformed topology/params/disturbance,
/// steady-state start requested with unbalanced nominals).
void validate(const Scenario& scenario);

/// Time-stamped states plus derived signals, sampled at every accepted
/// integrator step and on the uniform output grid. The lyapunov_w column
/// is measured about the steady state of the final disturbance segment,
/// stored in final_equilibrium_incremental.
struct Trajectory {
  std::vector<double> times;
  std::vector<SystemState> states;
  std::vector<Eigen::VectorXd> pdroop;
  std::vector<Eigen::VectorXd> pinj;
  std::vector<double> lyapunov_w;
  Eigen::VectorXd final_equilibrium_incremental;
  IntegratorStats stats;
};

/// Steady state of the chosen model under a constant disturbance, in
/// incremental coordinates. The linear model solves the closed-loop
/// affine system; the nonlinear model refines that solution by Newton
/// iteration on the exact current relation.
Eigen::VectorXd steady_state_incremental(const SystemParams& params,
                                         const LaplacianBundle& laplacian,
                                         const ClosedLoopMatrices& matrices,
                                         const Eigen::VectorXd& pm,
                                         ModelKind model);

/// Integrates the scenario over [0, t_end], restarting exactly at each
/// disturbance step time.
Trajectory simulate(const Scenario& scenario);

/// W(t) about a caller-chosen equilibrium (incremental coordinates).
std::vector<std::pair<double, double>> lyapunov_along(
    const Trajectory& trajectory, const SystemParams& params,
    const Eigen::VectorXd& equilibrium_incremental);

/// CSV export with header time,omega_1..n,v_1..n,pdroop_1..n,pinj_1..n,W
/// and 9 significant digits per value.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);

/// Column-oriented trajectory data read back from the CSV schema above.
struct TrajectoryTable {
  int n = 0;
  std::vector<double> times;
  Eigen::MatrixXd omega;   // samples x n
  Eigen::MatrixXd v;       // samples x n
  Eigen::MatrixXd pdroop;  // samples x n
  Eigen::MatrixXd pinj;    // samples x n
  std::vector<double> w;
};

TrajectoryTable read_trajectory_csv(std::istream& in);

}  // namespace mtdc

#endif  // MTDC_SIM_HPP
