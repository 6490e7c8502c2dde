#ifndef MTDC_PLANT_HPP
#define MTDC_PLANT_HPP

#include <Eigen/Dense>
#include <vector>

#include "mtdc/grid.hpp"

namespace mtdc {

/// Physical and controller constants, all in per-unit on a common base.
/// Per-node vectors have one entry per converter terminal.
struct SystemParams {
  Eigen::VectorXd inertia;        // m_i, p.u. s^2
  Eigen::VectorXd capacitance;    // C_i
  Eigen::VectorXd droop_gain;     // K^droop_i
  Eigen::VectorXd omega_gain;     // K^omega_i
  Eigen::VectorXd voltage_gain;   // K^V_i
  Eigen::VectorXd v_ref;          // reference DC voltage per node
  Eigen::VectorXd p_nom;          // nominal generated power
  Eigen::VectorXd p_inj_nom;      // nominal injected power
  double omega_ref = 1.0;
  double v_nom = 1.0;

  int n() const { return static_cast<int>(inertia.size()); }
};

/// Throws ValidationError on inconsistent vector sizes or non-positive
/// inertia, capacitance, gains, or nominal voltage. Messages cite the
/// field and the 1-based node.
void validate(const SystemParams& params);

/// True when P^nom = P^inj,nom elementwise within rtol (the balanced-
/// nominals condition that makes the references an equilibrium).
bool balanced_nominals(const SystemParams& params, double rtol = 1e-9);

/// 1-based nodes where |P^nom_i - P^inj,nom_i| exceeds rtol.
std::vector<int> unbalanced_nodes(const SystemParams& params,
                                  double rtol = 1e-9);

/// True when every gain vector is a constant multiple of the ones vector
/// (uniform scalar gains k^omega, k^droop, k^V across nodes).
bool uniform_gains(const SystemParams& params, double rtol = 1e-9);

/// 1-based nodes whose gains differ from node 1's.
std::vector<int> nonuniform_gain_nodes(const SystemParams& params,
                                       double rtol = 1e-9);

/// Piecewise-constant generation deviation P^m(t): a baseline vector that
/// applies from t = 0 plus step events replacing the whole vector.
struct Disturbance {
  struct Step {
    double time = 0.0;
    Eigen::VectorXd pm;
  };
  Eigen::VectorXd initial_pm;  // empty means zero
  std::vector<Step> steps;     // strictly increasing times

  Eigen::VectorXd pm_at(double t, int n) const;
  Eigen::VectorXd final_pm(int n) const;
};

/// Throws ValidationError on nonfinite entries, size mismatch, or step
/// times that are not strictly increasing within [0, t_end].
void validate(const Disturbance& disturbance, int n, double t_end);

/// Absolute frequencies and DC voltages.
struct SystemState {
  Eigen::VectorXd omega;
  Eigen::VectorXd voltage;
};

/// Stacked 2n vector (omega, voltage).
Eigen::VectorXd pack(const SystemState& state);
SystemState unpack(const Eigen::VectorXd& x);

/// Incremental coordinates about the references: (omega - omega_ref*1,
/// voltage - v_ref).
Eigen::VectorXd to_incremental(const SystemState& state,
                               const SystemParams& params);
SystemState from_incremental(const Eigen::VectorXd& x_hat,
                             const SystemParams& params);

/// Linearized closed-loop system in absolute coordinates:
/// d/dt [omega; V] = a [omega; V] + b_const + b_dist_map P^m.
struct ClosedLoopMatrices {
  Eigen::MatrixXd a;           // 2n x 2n
  Eigen::VectorXd b_const;     // 2n reference/nominal terms
  Eigen::MatrixXd b_dist_map;  // 2n x n, maps P^m into the derivative
};

/// Builds the block matrix
///   [ -M(K^omega + K^droop)      M K^V                    ]
///   [ (1/V^nom) E K^omega       -E(L_R + K^V / V^nom)     ]
/// with M = diag(1/m_i), E = diag(1/C_i), together with the constant
/// input collecting all reference and nominal terms.
ClosedLoopMatrices assemble_closed_loop(const SystemParams& params,
                                        const LaplacianBundle& laplacian);

/// Incremental dynamics: a x_hat + [M P^m; 0]. Exact for balanced
/// nominals with a flow-consistent dispatch; see full_rhs otherwise.
Eigen::VectorXd linear_rhs(const ClosedLoopMatrices& matrices,
                           const Eigen::VectorXd& state_incremental,
                           const Eigen::VectorXd& pm);

/// Absolute-coordinate linearized dynamics including every constant term:
/// a x + b_const + b_dist_map P^m.
Eigen::VectorXd full_rhs(const ClosedLoopMatrices& matrices,
                         const Eigen::VectorXd& state_absolute,
                         const Eigen::VectorXd& pm);

/// Exact model with the nonlinear current relation I^inj_i = P^inj_i / V_i.
/// Throws NumericalError naming the 1-based node when some V_i <= 0.
Eigen::VectorXd nonlinear_rhs(const SystemParams& params,
                              const LaplacianBundle& laplacian,
                              const SystemState& state,
                              const Eigen::VectorXd& pm);

/// P^droop_i = -K^droop_i (omega_i - omega_ref).
Eigen::VectorXd droop_power(const SystemParams& params,
                            const Eigen::VectorXd& omega);

/// Controller output P^inj_i = P^inj,nom_i + K^omega_i (omega_i -
/// omega_ref) + K^V_i (v_ref_i - V_i).
Eigen::VectorXd injected_power(const SystemParams& params,
                               const SystemState& state);

/// Lyapunov function about an equilibrium, evaluated at the shifted state
/// x_bar = (omega_bar, v_bar):
///   W = 1/2 omega_bar' K^omega (K^V)^-1 diag(m) omega_bar
///     + V^nom/2 v_bar' diag(C) v_bar.
double lyapunov_value(const SystemParams& params,
                      const Eigen::VectorXd& x_bar);

}  // namespace mtdc

#endif  // MTDC_PLANT_HPP
